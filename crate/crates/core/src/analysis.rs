//! Parameter sweeps, constancy verdicts and finite-difference Schläfli checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{orient_outward, DeformationFamily, IntroParams, Tolerances};
use crate::error::{Error, Result};
use crate::geom::{barycenter, distance, solve_apex_plane_distance, Point, SpaceKind};
use crate::mesh::{
    edge_table, enclosed_volume_estimate, self_intersects, surface_area, total_mean_curvature, triangle_area,
    vertex_gauss_curvature, TriMesh,
};
use crate::mesh::shapes::icosphere;
use crate::sphere2d::{side_length, Side};

/// A one-parameter family of closed meshes with fixed labels.
pub trait Family: Sync {
    fn kind(&self) -> SpaceKind;
    fn interval(&self) -> (f64, f64);
    fn tolerances(&self) -> Tolerances;
    /// The mesh at `r` and any family-specific scalar columns.
    fn evaluate(&self, r: f64) -> Result<(TriMesh<f64>, Vec<(String, f64)>)>;
}

impl Family for DeformationFamily {
    fn kind(&self) -> SpaceKind {
        self.params.kind
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn tolerances(&self) -> Tolerances {
        self.params.tolerances
    }

    fn evaluate(&self, r: f64) -> Result<(TriMesh<f64>, Vec<(String, f64)>)> {
        let m = self.member::<f64>(r)?;
        let xy = distance(&m.surface.point("x")?, &m.surface.point("y")?)?;
        let face = m
            .disk
            .find_triangle(["O", "a~", "b~"])
            .ok_or_else(|| Error::InvalidMesh("disk lost the face O a~ b~".into()))?;
        let extras = vec![
            ("s".to_string(), m.cone.s),
            ("xy_distance".to_string(), xy),
            ("ab_side".to_string(), side_length(&m.cone.ap, Side::Ab)),
            ("area_gain".to_string(), surface_area(&m.surface) - surface_area(&m.host)),
            ("cone_face_area".to_string(), triangle_area(&m.disk, face)),
        ];
        Ok((m.surface, extras))
    }
}

/// The introductory family over its rotation range.
#[derive(Debug, Clone)]
pub struct IntroFamily {
    pub params: IntroParams,
}

impl Family for IntroFamily {
    fn kind(&self) -> SpaceKind {
        self.params.kind
    }

    fn interval(&self) -> (f64, f64) {
        (self.params.t_min, self.params.t_max)
    }

    fn tolerances(&self) -> Tolerances {
        self.params.tolerances
    }

    fn evaluate(&self, r: f64) -> Result<(TriMesh<f64>, Vec<(String, f64)>)> {
        Ok((crate::construction::build_intro_family(&self.params, r)?, Vec::new()))
    }
}

/// Tetrahedron with three fixed vertices and a fourth moving along a
/// geodesic from the origin, so every dihedral angle changes with `r`.
#[derive(Debug, Clone)]
pub struct MovingVertexTetrahedron {
    pub kind: SpaceKind,
    pub base: [Point<f64>; 3],
    pub direction: [f64; 3],
    pub interval: (f64, f64),
    pub tolerances: Tolerances,
}

impl MovingVertexTetrahedron {
    pub fn new(kind: SpaceKind) -> Self {
        let base = [[1.0, 0.0, -0.4], [-0.5, 0.8, -0.4], [-0.5, -0.8, -0.4]].map(|d| Point::from_polar(kind, d, 0.6));
        MovingVertexTetrahedron {
            kind,
            base,
            direction: [0.2, 0.1, 1.0],
            interval: (0.2, 0.8),
            tolerances: Tolerances { volume: 1e-13, ..Tolerances::default() },
        }
    }
}

impl Family for MovingVertexTetrahedron {
    fn kind(&self) -> SpaceKind {
        self.kind
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    fn evaluate(&self, r: f64) -> Result<(TriMesh<f64>, Vec<(String, f64)>)> {
        let mut m = TriMesh::new(self.kind);
        for (k, p) in self.base.iter().enumerate() {
            m.add_vertex(format!("p{k}"), *p)?;
        }
        m.add_vertex("q", Point::from_polar(self.kind, self.direction, r))?;
        for f in [[0, 2, 1], [0, 1, 3], [1, 2, 3], [2, 0, 3]] {
            m.add_triangle(f)?;
        }
        let inside = barycenter(&m.vertices)?;
        orient_outward(&mut m, &inside)?;
        Ok((m, Vec::new()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub r: f64,
    pub volume: f64,
    pub volume_error: f64,
    pub embedded: bool,
    /// Values in the order of [`SweepReport::columns`].
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: SpaceKind,
    pub interval: (f64, f64),
    /// Column names besides `r`, `volume` and `embedded`: `area`, `tmc`,
    /// then `dihedral:e`, `length:e`, `summand:e` per edge label,
    /// `curvature:v` per vertex label, then family-specific columns.
    pub columns: Vec<String>,
    pub samples: Vec<Sample>,
    pub failures: Vec<(f64, String)>,
    pub tolerances: Tolerances,
}

fn evaluate_sample(family: &dyn Family, r: f64) -> Result<(Vec<String>, Sample)> {
    let tols = family.tolerances();
    let (m, extras) = family.evaluate(r)?;
    m.require_closed()?;
    let embedded = !self_intersects(&m, tols.intersection)?.intersects;
    let vol = if embedded {
        enclosed_volume_estimate(&m, tols.volume)?
    } else {
        crate::mesh::VolumeEstimate { volume: f64::NAN, error_bound: f64::NAN }
    };
    let mut cols = vec!["area".to_string(), "tmc".to_string()];
    let mut vals = vec![surface_area(&m), total_mean_curvature(&m)?];
    let edges = edge_table(&m)?;
    for e in &edges {
        cols.push(format!("dihedral:{}", e.label()));
        vals.push(e.dihedral);
    }
    for e in &edges {
        cols.push(format!("length:{}", e.label()));
        vals.push(e.length);
    }
    for e in &edges {
        cols.push(format!("summand:{}", e.label()));
        vals.push((std::f64::consts::PI - e.dihedral) * e.length);
    }
    let mut labels: Vec<&String> = m.used_vertices().into_iter().map(|i| &m.labels[i]).collect();
    labels.sort();
    for l in labels {
        cols.push(format!("curvature:{l}"));
        vals.push(vertex_gauss_curvature(&m, l)?);
    }
    for (c, v) in extras {
        cols.push(c);
        vals.push(v);
    }
    Ok((cols, Sample { r, volume: vol.volume, volume_error: vol.error_bound, embedded, values: vals }))
}

/// Evaluates `n` evenly spaced parameters strictly inside the interval.
pub fn sweep(family: &dyn Family, n: usize) -> Result<SweepReport> {
    if n < 3 {
        return Err(Error::Config(format!("a sweep needs at least 3 samples, got {n}")));
    }
    let (lo, hi) = family.interval();
    let rs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * (k as f64 + 1.0) / (n as f64 + 1.0)).collect();
    let results: Vec<(f64, Result<(Vec<String>, Sample)>)> =
        rs.par_iter().map(|&r| (r, evaluate_sample(family, r))).collect();
    let mut columns: Option<Vec<String>> = None;
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in results {
        match res {
            Ok((cols, s)) => {
                match &columns {
                    None => columns = Some(cols),
                    Some(c) if *c != cols => failures.push((r, "combinatorics changed along the family".to_string())),
                    Some(_) => {}
                }
                samples.push(s);
            }
            Err(e) => failures.push((r, e.to_string())),
        }
    }
    let failed: Vec<f64> = failures.iter().map(|f| f.0).collect();
    samples.retain(|s| !failed.contains(&s.r));
    Ok(SweepReport {
        kind: family.kind(),
        interval: (lo, hi),
        columns: columns.unwrap_or_default(),
        samples,
        failures,
        tolerances: family.tolerances(),
    })
}

impl SweepReport {
    /// Values of a column over the samples; `r`, `volume` and `embedded`
    /// (as 0/1) are accepted besides [`SweepReport::columns`].
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        match name {
            "r" => Ok(self.samples.iter().map(|s| s.r).collect()),
            "volume" => Ok(self.samples.iter().map(|s| s.volume).collect()),
            "embedded" => Ok(self.samples.iter().map(|s| if s.embedded { 1.0 } else { 0.0 }).collect()),
            _ => {
                let k = self
                    .columns
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
                Ok(self.samples.iter().map(|s| s.values[k]).collect())
            }
        }
    }

    pub fn spread(&self, name: &str) -> Result<f64> {
        let v = self.column(name)?;
        if v.iter().any(|x| x.is_nan()) {
            return Ok(f64::NAN);
        }
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(hi - lo)
    }

    /// All column names, including `volume`.
    pub fn all_columns(&self) -> Vec<String> {
        std::iter::once("volume".to_string()).chain(self.columns.iter().cloned()).collect()
    }

    /// CSV with a header row and one row per sample.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,volume,volume_error,embedded");
        for c in &self.columns {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for row in &self.samples {
            write!(s, "{:.16e},{:.16e},{:.16e},{}", row.r, row.volume, row.volume_error, row.embedded).unwrap();
            for v in &row.values {
                write!(s, ",{v:.16e}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Constant,
    Varying,
    Indeterminate,
}

/// Constant below `tol_constant`, varying above `tol_varying`, otherwise
/// indeterminate. An undefined spread is indeterminate.
pub fn constancy_verdict(report: &SweepReport, column: &str, tol_constant: f64, tol_varying: f64) -> Result<Verdict> {
    if !(tol_constant < tol_varying) {
        return Err(Error::Config("tolConstant must be below tolVarying".into()));
    }
    let spread = report.spread(column)?;
    Ok(if spread < tol_constant {
        Verdict::Constant
    } else if spread > tol_varying {
        Verdict::Varying
    } else {
        Verdict::Indeterminate
    })
}

/// Expected verdict for one column or for every column with a given
/// prefix (`"dihedral:*"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Expectation {
    pub column: String,
    pub verdict: Verdict,
    /// Overrides the report's constancy threshold for this column.
    #[serde(default)]
    pub tol_constant: Option<f64>,
}

impl Expectation {
    pub fn new(column: &str, verdict: Verdict) -> Self {
        Expectation { column: column.to_string(), verdict, tol_constant: None }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_constant = Some(tol);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub column: String,
    pub spread: f64,
    pub verdict: Verdict,
    pub expected: Option<Verdict>,
}

/// Verdicts the deformation theorems predict for `P_r`.
pub fn glued_family_expectations(tols: &Tolerances) -> Vec<Expectation> {
    vec![
        Expectation::new("dihedral:*", Verdict::Constant),
        Expectation::new("volume", Verdict::Constant).with_tol(10.0 * tols.volume),
        Expectation::new("area", Verdict::Varying),
        Expectation::new("tmc", Verdict::Varying),
        Expectation::new("curvature:y", Verdict::Varying),
    ]
}

/// Verdicts for the introductory family: everything listed stays put.
pub fn intro_family_expectations(tols: &Tolerances) -> Vec<Expectation> {
    vec![
        Expectation::new("volume", Verdict::Constant).with_tol(10.0 * tols.volume),
        Expectation::new("area", Verdict::Constant),
        Expectation::new("tmc", Verdict::Constant),
        Expectation::new("curvature:*", Verdict::Constant),
        Expectation::new("summand:*", Verdict::Constant),
        Expectation::new("dihedral:*", Verdict::Constant),
    ]
}

/// Verdict for every column, annotated with the expectation that covers it.
pub fn verdicts(report: &SweepReport, expectations: &[Expectation]) -> Result<Vec<VerdictRecord>> {
    let tols = report.tolerances;
    let mut out = Vec::new();
    for e in expectations {
        let matched: Vec<String> = match e.column.strip_suffix('*') {
            Some(prefix) => report.all_columns().into_iter().filter(|c| c.starts_with(prefix)).collect(),
            None => {
                // Validates the name.
                report.column(&e.column)?;
                vec![e.column.clone()]
            }
        };
        if matched.is_empty() {
            return Err(Error::UnknownColumn(e.column.clone()));
        }
        for c in matched {
            let tc = e.tol_constant.unwrap_or(tols.constant);
            let verdict = constancy_verdict(report, &c, tc, tols.varying.max(tc * 2.0))?;
            out.push(VerdictRecord { spread: report.spread(&c)?, column: c, verdict, expected: Some(e.verdict) });
        }
    }
    Ok(out)
}

/// Whether every expected verdict was met, and whether any verdict was
/// indeterminate.
pub fn verdict_status(records: &[VerdictRecord]) -> (bool, bool) {
    let ok = records.iter().all(|r| r.expected.is_none_or(|e| e == r.verdict));
    let indeterminate = records.iter().any(|r| r.verdict == Verdict::Indeterminate);
    (ok, indeterminate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchlafliCheck {
    pub r: f64,
    pub h: f64,
    pub dv_dr: f64,
    /// `sum |l| d(alpha)/dr` over the edges.
    pub edge_sum: f64,
    pub residual: f64,
}

/// Central-difference check of `dV = -1/2 sum |l| d(alpha)` (hyperbolic),
/// `dV = +1/2 sum |l| d(alpha)` (spherical).
pub fn schlafli_residual(family: &dyn Family, r: f64, h: f64) -> Result<SchlafliCheck> {
    let (lo, hi) = family.interval();
    if !(h >= 1e-6) {
        return Err(Error::Domain { op: "schlafli_residual", detail: format!("step {h} below 1e-6") });
    }
    if !(r - h >= lo && r + h <= hi) {
        return Err(Error::Domain {
            op: "schlafli_residual",
            detail: format!("[{}, {}] leaves the interval [{lo}, {hi}]", r - h, r + h),
        });
    }
    let tol = family.tolerances().volume;
    let at = |x: f64| -> Result<(f64, BTreeMap<String, (f64, f64)>)> {
        let (m, _) = family.evaluate(x)?;
        let v = enclosed_volume_estimate(&m, tol)?.volume;
        let edges = edge_table(&m)?.into_iter().map(|e| (e.label(), (e.length, e.dihedral))).collect();
        Ok((v, edges))
    };
    let (minus, (plus, mid)) = rayon::join(|| at(r - h), || rayon::join(|| at(r + h), || at(r)));
    let ((v_minus, e_minus), (v_plus, e_plus), (_, e_mid)) = (minus?, plus?, mid?);
    let mut edge_sum = 0.0;
    for (label, (len, _)) in &e_mid {
        let (Some(p), Some(m)) = (e_plus.get(label), e_minus.get(label)) else {
            return Err(Error::InvalidMesh(format!("edge `{label}` missing at a neighbouring parameter")));
        };
        edge_sum += len * (p.1 - m.1) / (2.0 * h);
    }
    let dv_dr = (v_plus - v_minus) / (2.0 * h);
    let residual = match family.kind() {
        SpaceKind::Hyperbolic => (dv_dr + 0.5 * edge_sum).abs(),
        SpaceKind::Spherical => (dv_dr - 0.5 * edge_sum).abs(),
    };
    Ok(SchlafliCheck { r, h, dv_dr, edge_sum, residual })
}

/// Volume of a geodesic icosphere of radius `radius` against the exact ball
/// volume `pi (sinh 2R - 2R)`, Richardson-extrapolated from two levels to
/// cancel the leading `h^2` inscription error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BallCalibration {
    pub radius: f64,
    pub level: usize,
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    pub exact: f64,
    pub relative_error: f64,
}

pub fn ball_calibration(radius: f64, level: usize, tol: f64) -> Result<BallCalibration> {
    if !(radius > 0.0) || level == 0 {
        return Err(Error::Config("ball calibration needs radius > 0 and level >= 1".into()));
    }
    let kind = SpaceKind::Hyperbolic;
    let coarse = crate::mesh::enclosed_volume(&icosphere(kind, radius, level - 1), tol)?;
    let fine = crate::mesh::enclosed_volume(&icosphere(kind, radius, level), tol)?;
    let extrapolated = fine + (fine - coarse) / 3.0;
    let exact = std::f64::consts::PI * ((2.0 * radius).sinh() - 2.0 * radius);
    Ok(BallCalibration { radius, level, coarse, fine, extrapolated, exact, relative_error: (extrapolated - exact).abs() / exact })
}

/// Every triangle split at its barycentre; the surface is unchanged.
pub fn refine_at_barycenters(m: &TriMesh<f64>) -> Result<TriMesh<f64>> {
    let mut out = m.clone();
    for t in 0..m.triangles.len() {
        let c = barycenter(&m.triangle_points(t))?;
        out = out.split_triangle(t, &format!("split:{t}"), c)?;
    }
    Ok(out)
}

/// Changes of area, volume and total mean curvature under
/// [`refine_at_barycenters`].
pub fn refinement_deltas(m: &TriMesh<f64>, volume_tol: f64) -> Result<[f64; 3]> {
    let fine = refine_at_barycenters(m)?;
    let measure = |x: &TriMesh<f64>| -> Result<[f64; 3]> {
        Ok([surface_area(x), crate::mesh::enclosed_volume(x, volume_tol)?, total_mean_curvature(x)?])
    };
    let (a, b) = (measure(m)?, measure(&fine)?);
    Ok(std::array::from_fn(|i| (a[i] - b[i]).abs()))
}

/// Largest `|cos beta - C(s) sin r|` over random admissible pairs, with
/// `C = cosh` or `cos`.
pub fn apex_identity_residual(kind: SpaceKind, n: usize, seed: u64) -> Result<f64> {
    use std::f64::consts::FRAC_PI_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let beta = rng.gen_range(0.05..FRAC_PI_2 - 0.05);
        let edge = FRAC_PI_2 - beta;
        let r = match kind {
            SpaceKind::Hyperbolic => rng.gen_range(0.01..edge),
            SpaceKind::Spherical => rng.gen_range(edge..FRAC_PI_2 - 1e-3),
        };
        let s = solve_apex_plane_distance(r, beta, kind)?;
        let c = match kind {
            SpaceKind::Hyperbolic => s.cosh(),
            SpaceKind::Spherical => s.cos(),
        };
        worst = worst.max((beta.cos() - c * r.sin()).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_family, FamilyParams};

    /// Returns the same tetrahedron for every parameter.
    struct Frozen(MovingVertexTetrahedron);

    impl Family for Frozen {
        fn kind(&self) -> SpaceKind {
            self.0.kind
        }
        fn interval(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
        fn tolerances(&self) -> Tolerances {
            Tolerances::default()
        }
        fn evaluate(&self, _: f64) -> Result<(TriMesh<f64>, Vec<(String, f64)>)> {
            self.0.evaluate(0.5)
        }
    }

    #[test]
    fn ball_and_refinement() {
        let b = ball_calibration(0.5, 4, 1e-9).unwrap();
        assert!(b.relative_error < 1e-3, "{b:?}");
        assert!(b.extrapolated > b.fine && b.fine > b.coarse);
        let p = build_family(&FamilyParams::default_hyperbolic()).unwrap().generate::<f64>(0.4).unwrap();
        let d = refinement_deltas(&p, 1e-11).unwrap();
        assert!(d.iter().all(|&x| x < 1e-9), "{d:?}");
        assert_eq!(refine_at_barycenters(&p).unwrap().triangles.len(), 3 * p.triangles.len());
    }

    #[test]
    fn constant_family_gives_zero_spread() {
        let rep = sweep(&Frozen(MovingVertexTetrahedron::new(SpaceKind::Hyperbolic)), 3).unwrap();
        assert_eq!(rep.samples.len(), 3);
        for c in rep.all_columns() {
            assert_eq!(rep.spread(&c).unwrap(), 0.0);
            assert_eq!(constancy_verdict(&rep, &c, 1e-9, 1e-3).unwrap(), Verdict::Constant);
        }
        assert!(sweep(&Frozen(MovingVertexTetrahedron::new(SpaceKind::Hyperbolic)), 2).is_err());
    }

    #[test]
    fn verdict_bands_and_unknown_columns() {
        let rep = sweep(&MovingVertexTetrahedron::new(SpaceKind::Spherical), 4).unwrap();
        let spread = rep.spread("area").unwrap();
        assert!(spread > 0.0);
        assert_eq!(constancy_verdict(&rep, "area", spread * 2.0, spread * 4.0).unwrap(), Verdict::Constant);
        assert_eq!(constancy_verdict(&rep, "area", spread / 4.0, spread / 2.0).unwrap(), Verdict::Varying);
        assert_eq!(constancy_verdict(&rep, "area", spread / 2.0, spread * 2.0).unwrap(), Verdict::Indeterminate);
        assert!(matches!(constancy_verdict(&rep, "nope", 1e-9, 1e-3), Err(Error::UnknownColumn(_))));
        assert!(constancy_verdict(&rep, "area", 1e-3, 1e-9).is_err());
    }

    #[test]
    fn glued_family_verdicts() {
        for p in [FamilyParams::default_hyperbolic(), FamilyParams::default_spherical()] {
            let fam = build_family(&p).unwrap();
            let exp = glued_family_expectations(&p.tolerances);
            let small = verdicts(&sweep(&fam, 6).unwrap(), &exp).unwrap();
            let (ok, indeterminate) = verdict_status(&small);
            assert!(ok && !indeterminate, "{small:?}");
            // Doubling the sample count keeps every verdict.
            let big = verdicts(&sweep(&fam, 12).unwrap(), &exp).unwrap();
            for (a, b) in small.iter().zip(&big) {
                assert_eq!((&a.column, a.verdict), (&b.column, b.verdict));
            }
        }
    }

    #[test]
    fn intro_family_verdicts() {
        let fam = IntroFamily { params: IntroParams::default_for(SpaceKind::Hyperbolic) };
        let rep = sweep(&fam, 5).unwrap();
        let rec = verdicts(&rep, &intro_family_expectations(&rep.tolerances)).unwrap();
        assert!(verdict_status(&rec).0, "{rec:?}");
    }

    #[test]
    fn csv_layout() {
        let rep = sweep(&MovingVertexTetrahedron::new(SpaceKind::Hyperbolic), 3).unwrap();
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        let header: Vec<&str> = lines[0].split(',').collect();
        assert_eq!(&header[..6], &["r", "volume", "volume_error", "embedded", "area", "tmc"]);
        for row in &lines[1..] {
            let cells: Vec<&str> = row.split(',').collect();
            assert_eq!(cells.len(), header.len());
            // 17 significant digits.
            assert_eq!(cells[0].split('e').next().unwrap().len(), 18);
        }
    }

    #[test]
    fn schlafli_on_angle_varying_tetrahedra() {
        for kind in [SpaceKind::Hyperbolic, SpaceKind::Spherical] {
            let f = MovingVertexTetrahedron::new(kind);
            let a = schlafli_residual(&f, 0.5, 1e-4).unwrap();
            let b = schlafli_residual(&f, 0.5, 5e-5).unwrap();
            assert!(a.edge_sum.abs() > 1e-2, "angles must move");
            assert!(a.residual < 1e-4);
            assert!(b.residual <= 0.3 * a.residual + 10.0 * f.tolerances.volume, "{a:?} {b:?}");
        }
    }

    #[test]
    fn schlafli_on_glued_family_and_bounds() {
        let fam = build_family(&FamilyParams::default_hyperbolic()).unwrap();
        let r = 0.5 * (fam.interval.0 + fam.interval.1);
        let c = schlafli_residual(&fam, r, 1e-3).unwrap();
        assert!(c.dv_dr.abs() < 1e-6 && c.edge_sum.abs() < 1e-9);
        assert!(schlafli_residual(&fam, fam.interval.1, 1e-3).is_err());
        assert!(schlafli_residual(&fam, r, 1e-8).is_err());
    }
}
