//! Dihedral-preserving deformation families.
//!
//! The cone octahedron `M_r` is built over a circumscribed antiparallelogram
//! on the sphere of directions at the origin and cut by a plane that makes a
//! fixed angle `beta` with every cone face. Removing one of its four wedges
//! leaves an embedded disk `N_r` whose boundary is a hinged quadrilateral of
//! fixed dihedral `2 beta`, which is glued into a matching hole of a host
//! tetrahedron to give the closed embedded surface `P_r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    barycenter, bilinear, distance, isometry_from_point_correspondence, solve_apex_plane_distance, GeodesicPlane, Isometry, Point,
    SpaceKind, Vec4,
};
use crate::mesh::{edge_table, self_intersects, surgery_replace, triangle_area, winding_number, TriMesh};
use crate::scalar::Real;
use crate::sphere2d::{build_antiparallelogram, Antiparallelogram};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct Tolerances {
    /// Contact distance for self-intersection tests (chart units).
    pub intersection: f64,
    /// Absolute quadrature tolerance for enclosed volumes.
    pub volume: f64,
    /// Allowed residual when matching congruent point sets.
    pub congruence: f64,
    /// Spread below which a sweep column counts as constant.
    pub constant: f64,
    /// Spread above which a sweep column counts as varying.
    pub varying: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { intersection: 1e-9, volume: 1e-7, congruence: 1e-9, constant: 1e-9, varying: 1e-3 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("intersection", self.intersection),
            ("volume", self.volume),
            ("congruence", self.congruence),
            ("constant", self.constant),
            ("varying", self.varying),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        if !(self.constant < self.varying) {
            return Err(Error::Config("tolerances.constant must be below tolerances.varying".into()));
        }
        Ok(())
    }
}

/// Fixed data of a family: antiparallelogram angles, the cut angle `beta`,
/// host size and the parameter bounds to scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FamilyParams {
    pub kind: SpaceKind,
    /// Angle of the antiparallelogram at `a` and `c`.
    pub alpha_a: f64,
    /// Angle at `b` and `d`.
    pub angle_b: f64,
    /// Half of the dihedral angle at the glued hinge.
    pub beta: f64,
    /// Distance of each host tetrahedron vertex from the origin.
    pub host_scale: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Required clearance between the patch and the host's corners.
    pub margin: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl FamilyParams {
    pub fn default_hyperbolic() -> Self {
        FamilyParams {
            kind: SpaceKind::Hyperbolic,
            alpha_a: 2.0 * std::f64::consts::FRAC_PI_3,
            angle_b: 0.6,
            beta: std::f64::consts::FRAC_PI_3,
            host_scale: 2.5,
            r_min: 0.3,
            r_max: 0.51,
            margin: 0.2,
            tolerances: Tolerances::default(),
        }
    }

    pub fn default_spherical() -> Self {
        FamilyParams {
            kind: SpaceKind::Spherical,
            alpha_a: 2.0 * std::f64::consts::FRAC_PI_3,
            angle_b: 0.6,
            beta: std::f64::consts::FRAC_PI_3,
            host_scale: 1.2,
            r_min: 0.535,
            r_max: 0.7,
            margin: 0.1,
            tolerances: Tolerances::default(),
        }
    }

    /// Checks ranges that do not depend on `r`.
    pub fn validate(&self) -> Result<()> {
        use std::f64::consts::{FRAC_PI_2, PI};
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.beta > 0.0 && self.beta < FRAC_PI_2) {
            return bad("beta must lie in (0, pi/2)");
        }
        if !(self.alpha_a > 0.0 && self.alpha_a < PI) {
            return bad("alphaA must lie in (0, pi)");
        }
        if !(self.angle_b > 0.0 && self.angle_b < PI) {
            return bad("angleB must lie in (0, pi)");
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max < FRAC_PI_2) {
            return bad("need 0 < rMin < rMax < pi/2");
        }
        if !(self.host_scale > 0.0 && self.host_scale.is_finite()) {
            return bad("hostScale must be positive");
        }
        if self.kind == SpaceKind::Spherical && self.host_scale >= FRAC_PI_2 {
            return bad("spherical hostScale must stay below pi/2 so the host fits in a hemisphere");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return bad("margin must be positive");
        }
        self.tolerances.validate()
    }

    /// End of the parameter range where the cut plane reaches the apex.
    pub fn degenerate_end(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 - self.beta
    }
}

/// Cone data shared by `M_r`, `N_r` and `P_r`.
#[derive(Debug, Clone)]
pub struct ConeData<T> {
    pub r: T,
    pub ap: Antiparallelogram<T>,
    /// Distance from the apex to the cut plane.
    pub s: T,
    pub plane: GeodesicPlane<T>,
    pub apex: Point<T>,
    pub mirror_apex: Point<T>,
    /// Ray hits `a~, b~, c~, d~`.
    pub hits: [Point<T>; 4],
}

fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

pub fn cone_data<T: Real>(params: &FamilyParams, r: T) -> Result<ConeData<T>> {
    let kind = params.kind;
    let ap = build_antiparallelogram(r, lit(params.alpha_a), lit(params.angle_b))?;
    let s = solve_apex_plane_distance(r, lit(params.beta), kind)?;
    let axis = [T::zero(), T::zero(), T::one()];
    let plane = GeodesicPlane::at_distance(kind, axis, s);
    let ts = kind.tan(s);
    let mut hits = [Point::origin(kind); 4];
    for (h, v) in hits.iter_mut().zip(ap.vertices()) {
        let uz = v.coords[2];
        let q = if uz > T::zero() { ts / uz } else { T::infinity() };
        // Hyperbolic rays miss the plane once tanh t would exceed 1.
        let limit = match kind {
            SpaceKind::Hyperbolic => T::one() - T::lit(1e-12),
            SpaceKind::Spherical => T::infinity(),
        };
        if !(q < limit) {
            return Err(Error::Infeasible(format!("cone ray misses the cut plane at r = {r}")));
        }
        *h = Point::from_polar(kind, v.coords, kind.atan(q));
    }
    let apex = Point::origin(kind);
    let mirror_apex = plane.reflection().apply(&apex);
    Ok(ConeData { r, ap, s, plane, apex, mirror_apex, hits })
}

const CONE_LABELS: [&str; 4] = ["a~", "b~", "c~", "d~"];

/// Closed self-intersecting octahedron over the antiparallelogram.
pub fn build_octahedron_m<T: Real>(params: &FamilyParams, r: T) -> Result<TriMesh<T>> {
    octahedron_from(&cone_data(params, r)?)
}

fn octahedron_from<T: Real>(c: &ConeData<T>) -> Result<TriMesh<T>> {
    let mut m = TriMesh::new(c.apex.kind);
    m.add_vertex("O", c.apex)?;
    for (l, p) in CONE_LABELS.iter().zip(c.hits) {
        m.add_vertex(*l, p)?;
    }
    m.add_vertex("O~", c.mirror_apex)?;
    for k in 0..4 {
        let (p, q) = (CONE_LABELS[k], CONE_LABELS[(k + 1) % 4]);
        m.add_face(["O", p, q])?;
        m.add_face(["O~", q, p])?;
    }
    Ok(m)
}

/// `M_r` without the two faces on `a~ d~`.
pub fn build_disk_n<T: Real>(params: &FamilyParams, r: T) -> Result<TriMesh<T>> {
    disk_from(&cone_data(params, r)?)
}

fn disk_from<T: Real>(c: &ConeData<T>) -> Result<TriMesh<T>> {
    let mut m = octahedron_from(c)?;
    let drop = [m.find_triangle(["O", "d~", "a~"]), m.find_triangle(["O~", "a~", "d~"])];
    m.triangles = m
        .triangles
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(&Some(*i)))
        .map(|(_, t)| *t)
        .collect();
    Ok(m)
}

/// Host tetrahedron `WXYZ` with the edge `XY` on the first axis, centred at
/// the origin, and dihedral `2 beta` at `XY`. Outward orientation.
pub fn build_host_tetrahedron<T: Real>(params: &FamilyParams) -> Result<TriMesh<T>> {
    let kind = params.kind;
    let (sb, cb) = lit::<T>(params.beta).sin_cos();
    let h: T = lit(params.host_scale);
    let mut m = TriMesh::new(kind);
    m.add_vertex("X", Point::from_polar(kind, [-T::one(), T::zero(), T::zero()], h))?;
    m.add_vertex("Y", Point::from_polar(kind, [T::one(), T::zero(), T::zero()], h))?;
    m.add_vertex("Z", Point::from_polar(kind, [T::zero(), sb, -cb], h))?;
    m.add_vertex("W", Point::from_polar(kind, [T::zero(), -sb, -cb], h))?;
    for f in [["X", "Y", "Z"], ["X", "W", "Y"], ["X", "Z", "W"], ["Y", "W", "Z"]] {
        m.add_face(f)?;
    }
    let centre = barycenter(&m.vertices)?;
    orient_outward(&mut m, &centre)?;
    Ok(m)
}

/// Reverses `m` if `inside` has winding number −1.
pub(crate) fn orient_outward<T: Real>(m: &mut TriMesh<T>, inside: &Point<T>) -> Result<()> {
    let w = winding_number(m, inside)?;
    if (w.abs() - T::one()).abs() > T::lit(1e-6) {
        return Err(Error::Degenerate(format!("reference point has winding number {w}")));
    }
    if w < T::zero() {
        m.reverse_orientation();
    }
    Ok(())
}

/// Everything built for one parameter value.
#[derive(Debug, Clone)]
pub struct FamilyMember<T> {
    pub cone: ConeData<T>,
    pub octahedron: TriMesh<T>,
    pub disk: TriMesh<T>,
    pub host: TriMesh<T>,
    pub surface: TriMesh<T>,
    /// Isometry placing the disk into the host.
    pub placement: Isometry<T>,
}

/// Point in the half-plane bounded by the first axis with unit inward
/// direction `u` (perpendicular to the axis), at distances `d1` from
/// the axis point at `-h` and `d2` from the one at `+h`.
fn hinge_point<T: Real>(kind: SpaceKind, h: T, d1: T, d2: T, u: [T; 3]) -> Result<Point<T>> {
    let two = T::lit(2.0);
    let (x, w, yy) = match kind {
        SpaceKind::Hyperbolic => {
            let w = (d1.cosh() + d2.cosh()) / (two * h.cosh());
            let x = (d1.cosh() - d2.cosh()) / (two * h.sinh());
            (x, w, w * w - x * x - T::one())
        }
        SpaceKind::Spherical => {
            let w = (d1.cos() + d2.cos()) / (two * h.cos());
            let x = (d2.cos() - d1.cos()) / (two * h.sin());
            (x, w, T::one() - x * x - w * w)
        }
    };
    if !(yy > T::zero()) {
        return Err(Error::Degenerate("hinge triangle is degenerate".into()));
    }
    let y = yy.sqrt();
    Point::new(Vec4::new(x, y * u[1], y * u[2], w), kind)
}

/// Host face subdivided into a fan around `centre`, with `inserted`
/// placed in order along the directed edge `from -> to`.
fn fan_face(face: [&str; 3], from: &str, to: &str, inserted: [&str; 2], centre: &str) -> Vec<[String; 3]> {
    let mut poly: Vec<&str> = Vec::new();
    for k in 0..3 {
        let (p, q) = (face[k], face[(k + 1) % 3]);
        poly.push(p);
        if p == from && q == to {
            poly.extend(inserted);
        } else if p == to && q == from {
            poly.extend(inserted.iter().rev());
        }
    }
    (0..poly.len())
        .map(|k| [poly[k].to_string(), poly[(k + 1) % poly.len()].to_string(), centre.to_string()])
        .collect()
}

pub fn build_member<T: Real>(params: &FamilyParams, r: T) -> Result<FamilyMember<T>> {
    params.validate()?;
    let kind = params.kind;
    let tols = params.tolerances;
    let cone = cone_data(params, r)?;
    let octahedron = octahedron_from(&cone)?;
    let disk = disk_from(&cone)?;
    let host = build_host_tetrahedron::<T>(params)?;

    let [a, _, _, d] = cone.hits;
    let hinge = distance(&a, &d)?;
    let half = hinge / T::lit(2.0);
    let d1 = distance(&a, &cone.apex)?;
    let d2 = distance(&d, &cone.apex)?;
    let (sb, cb) = lit::<T>(params.beta).sin_cos();
    let w = Point::from_polar(kind, [-T::one(), T::zero(), T::zero()], half);
    let z = Point::from_polar(kind, [T::one(), T::zero(), T::zero()], half);
    let y = hinge_point(kind, half, d1, d2, [T::zero(), sb, -cb])?;
    let x = hinge_point(kind, half, d1, d2, [T::zero(), -sb, -cb])?;
    let placement = isometry_from_point_correspondence(
        &[a, d, cone.apex, cone.mirror_apex],
        &[w, z, y, x],
        lit(tols.congruence),
    )?;

    // Subdivide the two host faces on XY.
    let mut sub = TriMesh::new(kind);
    for (l, p) in host.labels.iter().zip(&host.vertices) {
        sub.add_vertex(l.clone(), *p)?;
    }
    for (l, p) in [("w", w), ("z", z), ("y", y), ("x", x)] {
        sub.add_vertex(l, p)?;
    }
    let mut removed = Vec::new();
    for t in 0..host.triangles.len() {
        let f = host.triangle_labels(t);
        let centre = if f.contains(&"Z") && f.contains(&"X") && f.contains(&"Y") {
            Some("y")
        } else if f.contains(&"W") && f.contains(&"X") && f.contains(&"Y") {
            Some("x")
        } else {
            None
        };
        let Some(centre) = centre else {
            sub.add_face(f)?;
            continue;
        };
        let fan = fan_face(f, "X", "Y", ["w", "z"], centre);
        // The fan only tiles the face when the centre lies inside it.
        let fan_area: T = fan
            .iter()
            .map(|t| {
                let mut tmp = TriMesh::new(kind);
                for l in t {
                    tmp.add_vertex(l.clone(), sub.point(l).unwrap()).unwrap();
                }
                tmp.add_triangle([0, 1, 2]).unwrap();
                triangle_area(&tmp, 0)
            })
            .sum();
        let face_area = triangle_area(&host, t);
        if (fan_area - face_area).abs() > T::lit(1e-9) * face_area.max(T::one()) {
            return Err(Error::Margin(format!("glued patch does not fit inside host face {f:?}")));
        }
        for tri in fan {
            if tri.contains(&"w".to_string()) && tri.contains(&"z".to_string()) {
                removed.push(sub.triangles.len());
            }
            sub.add_face([&tri[0], &tri[1], &tri[2]])?;
        }
    }

    let patch = disk.transformed(&placement).relabeled(|l| {
        match l {
            "O" => "y",
            "O~" => "x",
            "a~" => "w",
            "d~" => "z",
            other => other,
        }
        .to_string()
    });
    let pairs = [("w", "w"), ("z", "z"), ("y", "y"), ("x", "x")];
    let tol: T = lit(tols.congruence);
    let surface = match surgery_replace(&sub, &removed, &patch, &pairs, tol) {
        Err(Error::Orientation(_)) => surgery_replace(&sub, &removed, &patch.reversed(), &pairs, tol)?,
        other => other?,
    };

    check_margin(params, &host, &patch)?;
    Ok(FamilyMember { cone, octahedron, disk, host, surface, placement })
}

fn check_margin<T: Real>(params: &FamilyParams, host: &TriMesh<T>, patch: &TriMesh<T>) -> Result<()> {
    let mut worst = T::infinity();
    for c in &host.vertices {
        for p in patch.used_vertices() {
            worst = worst.min(distance(c, &patch.vertices[p])?);
        }
    }
    let margin: T = lit(params.margin);
    if worst < margin {
        return Err(Error::Margin(format!(
            "patch comes within {worst} of a host corner (margin {margin}); hostScale must be at least about {}",
            params.host_scale + (margin - worst).to_f64_lossy()
        )));
    }
    Ok(())
}

/// Closed embedded surface `P_r`.
pub fn build_p<T: Real>(params: &FamilyParams, r: T) -> Result<TriMesh<T>> {
    Ok(build_member(params, r)?.surface)
}

/// Builds a member and confirms it is embedded.
pub fn build_checked_member<T: Real>(params: &FamilyParams, r: T) -> Result<FamilyMember<T>> {
    let m = build_member(params, r)?;
    let rep = self_intersects(&m.surface, lit(params.tolerances.intersection))?;
    if rep.intersects {
        return Err(Error::Infeasible(format!("P self-intersects at r = {r}: {:?}", rep.witness)));
    }
    Ok(m)
}

/// A family `r -> P_r` over the feasible interval found by [`build_family`].
#[derive(Debug, Clone)]
pub struct DeformationFamily {
    pub params: FamilyParams,
    pub interval: (f64, f64),
}

impl DeformationFamily {
    pub fn generate<T: Real>(&self, r: T) -> Result<TriMesh<T>> {
        build_p(&self.params, r)
    }

    pub fn member<T: Real>(&self, r: T) -> Result<FamilyMember<T>> {
        build_member(&self.params, r)
    }

    /// `n` evenly spaced parameters strictly inside the interval.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.interval;
        (0..n).map(|k| lo + (hi - lo) * (k as f64 + 1.0) / (n as f64 + 1.0)).collect()
    }
}

/// Grid points of the user bounds with the reason each failed, if any.
pub fn feasibility_scan(params: &FamilyParams, n: usize) -> Vec<(f64, Option<String>)> {
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .map(|k| {
            let r = params.r_min + (params.r_max - params.r_min) * k as f64 / (n - 1) as f64;
            (r, build_checked_member::<f64>(params, r).err().map(|e| e.to_string()))
        })
        .collect()
}

const SCAN_POINTS: usize = 41;

/// Longest run of feasible grid points within the user bounds.
pub fn build_family(params: &FamilyParams) -> Result<DeformationFamily> {
    params.validate()?;
    let scan = feasibility_scan(params, SCAN_POINTS);
    let (mut best, mut cur): ((usize, usize), Option<usize>) = ((0, 0), None);
    for (k, (_, err)) in scan.iter().enumerate() {
        match (err, cur) {
            (None, None) => cur = Some(k),
            (Some(_), Some(start)) => {
                if k - start > best.1 - best.0 {
                    best = (start, k);
                }
                cur = None;
            }
            _ => {}
        }
    }
    if let Some(start) = cur {
        if scan.len() - start > best.1 - best.0 {
            best = (start, scan.len());
        }
    }
    if best.1 - best.0 < 2 {
        let reason = scan.iter().find_map(|(r, e)| e.as_ref().map(|e| format!("r = {r}: {e}")));
        return Err(Error::Infeasible(format!(
            "no feasible interval in [{}, {}]; first failure {}",
            params.r_min,
            params.r_max,
            reason.unwrap_or_default()
        )));
    }
    Ok(DeformationFamily { params: *params, interval: (scan[best.0].0, scan[best.1 - 1].0) })
}

/// Parameters of the introductory contrast family: a small tetrahedron `T`
/// standing on a face of a regular tetrahedron `Q`, turned about the face
/// normal by `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IntroParams {
    pub kind: SpaceKind,
    /// Circumradius of `Q`.
    pub host_radius: f64,
    /// Circumradius of the footprint of `T` inside the host face.
    pub foot_radius: f64,
    /// Height of the apex of `T` above the host face.
    pub height: f64,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl IntroParams {
    pub fn default_for(kind: SpaceKind) -> Self {
        IntroParams {
            kind,
            host_radius: 0.9,
            foot_radius: 0.12,
            height: 0.15,
            t_min: 0.0,
            t_max: 1.0,
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        for (name, v) in [("hostRadius", self.host_radius), ("footRadius", self.foot_radius), ("height", self.height)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if self.kind == SpaceKind::Spherical && self.host_radius >= std::f64::consts::FRAC_PI_2 {
            return bad("spherical hostRadius must stay below pi/2");
        }
        if !(self.t_min < self.t_max) {
            return bad("need tMin < tMax");
        }
        self.tolerances.validate()
    }
}

/// Boundary of `Q ∪ T` with `T` turned by `t`.
pub fn build_intro_family<T: Real>(params: &IntroParams, t: T) -> Result<TriMesh<T>> {
    params.validate()?;
    let (mut m, ring, tau, apex, inside) = intro_parts(params, t)?;
    // The fixed ring tiles the host face only while no triangle flips.
    let area_of = |tri: [usize; 3]| {
        let mut tmp = TriMesh::new(m.kind);
        for i in tri {
            tmp.add_vertex(m.labels[i].clone(), m.vertices[i]).unwrap();
        }
        tmp.add_triangle([0, 1, 2]).unwrap();
        triangle_area(&tmp, 0)
    };
    let covered: T = ring.iter().map(|&tri| area_of(tri)).sum::<T>() + area_of([tau[0], tau[1], tau[2]]);
    let face = area_of([0, 1, 2]);
    if (covered - face).abs() > T::lit(1e-9) * face {
        return Err(Error::Margin(format!("tetrahedron footprint turned too far at t = {t}")));
    }
    for tri in ring {
        m.add_triangle(tri)?;
    }
    for k in 0..3 {
        m.add_triangle([tau[k], tau[(k + 1) % 3], apex])?;
    }
    m.require_closed()?;
    orient_outward(&mut m, &inside)?;
    Ok(m)
}

type IntroParts<T> = (TriMesh<T>, Vec<[usize; 3]>, Vec<usize>, usize, Point<T>);

/// Vertices, the untouched faces of `Q`, and the ring around the footprint.
fn intro_parts<T: Real>(params: &IntroParams, t: T) -> Result<IntroParts<T>> {
    let kind = params.kind;
    let rho: T = lit(params.host_radius);
    let dirs = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let q: Vec<Point<T>> = dirs.iter().map(|d| Point::from_polar(kind, d.map(lit::<T>), rho)).collect();
    let mut m = TriMesh::new(kind);
    for (k, p) in q.iter().enumerate() {
        m.add_vertex(format!("Q{k}"), *p)?;
    }
    // Outward faces of Q; the first one carries T.
    let faces = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];

    let foot = [q[0], q[1], q[2]];
    let c = barycenter(&foot)?;
    let e1 = c.unit_tangent_toward(&foot[0]).ok_or_else(|| Error::Degenerate("host face".into()))?;
    let v = c.tangent_toward(&foot[1]);
    let v = v - e1 * bilinear(&v, &e1, kind);
    let e2 = v * (T::one() / bilinear(&v, &v, kind).sqrt());
    let plane = GeodesicPlane::through(&foot[0], &foot[1], &foot[2])?;
    let mut n = c.project_tangent(&plane.normal);
    n = n * (T::one() / bilinear(&n, &n, kind).sqrt());
    // Point the normal away from the opposite vertex of Q.
    if bilinear(&n, &c.tangent_toward(&q[3]), kind) > T::zero() {
        n = -n;
    }
    let frame = Isometry::from_frame(&c, [e1, e2, n])?;
    let third = T::TAU() / T::lit(3.0);
    let foot_r: T = lit(params.foot_radius);
    let mut tau = Vec::new();
    for k in 0..3 {
        let ang = third * T::lit(k as f64) + t;
        let p = frame.apply(&Point::from_polar(kind, [ang.cos(), ang.sin(), T::zero()], foot_r));
        tau.push(m.add_vertex(format!("t{k}"), p)?);
    }
    let up = Point::from_polar(kind, [T::zero(), T::zero(), T::one()], lit(params.height));
    let apex = m.add_vertex("apex", frame.apply(&up))?;
    for f in &faces[1..] {
        m.add_triangle(*f)?;
    }
    let f = faces[0];
    let ring = (0..3)
        .flat_map(|k| [[f[k], f[(k + 1) % 3], tau[k]], [f[(k + 1) % 3], tau[(k + 1) % 3], tau[k]]])
        .collect();
    Ok((m, ring, tau, apex, barycenter(&q)?))
}

/// Largest dihedral deviation between two meshes with equal edge labels.
pub fn dihedral_deviation<T: Real>(a: &TriMesh<T>, b: &TriMesh<T>) -> Result<T> {
    let (ea, eb) = (edge_table(a)?, edge_table(b)?);
    if ea.len() != eb.len() {
        return Err(Error::InvalidMesh("edge sets differ".into()));
    }
    let mut worst = T::zero();
    for (x, y) in ea.iter().zip(&eb) {
        if x.label() != y.label() {
            return Err(Error::InvalidMesh(format!("edge `{}` has no partner", x.label())));
        }
        worst = worst.max((x.dihedral - y.dihedral).abs());
    }
    Ok(worst)
}
