//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or other error, 2 configuration or
//! schema error, 3 infeasible family, 4 indeterminate verdict, 5 patch does
//! not fit. All outputs are computed before anything is written, and each
//! file is written to a temporary name and renamed into place.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    apex_identity_residual, ball_calibration, glued_family_expectations, intro_family_expectations, schlafli_residual, sweep, verdict_status,
    verdicts, Family, IntroFamily, MovingVertexTetrahedron, SweepReport,
};
use crate::config::{load_config, BuildConfig, Construction, SweepConfig, TileConfig, Tiling, VerifyConfig};
use crate::construction::{
    build_family, build_host_tetrahedron, build_intro_family, build_octahedron_m, build_disk_n, build_p, FamilyParams,
};
use crate::error::{Error, Result};
use crate::geom::{barycenter, Chart, ChartKind, SpaceKind};
use crate::mesh::{self_intersects, to_off, write_atomic, TriMesh};
use crate::tilings::{
    boroczky_cell, boroczky_window, dihedral_spread, file_stem, modified_boroczky_cell, modified_spherical_cell,
    modified_spherical_tiling, random_s3_point, spherical_12_tiling, BoroczkyFrame, TileWindow, Window3, MATCH_TOL,
};

#[derive(Debug, Parser)]
#[command(name = "fixed-dihedral", version, about = "Deformations of polyhedra that keep every dihedral angle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write meshes of the requested constructions and a summary.
    Build(Common),
    /// Sample a family, write the sweep table and constancy verdicts.
    Sweep(Common),
    /// Build a tiling window, write cell meshes and the adjacency manifest.
    Tile(Common),
    /// Finite-difference Schläfli checks and volume engine calibration.
    VerifySchlafli(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the sample count of the config.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Chart for OFF coordinates (klein, gnomonic, hyperboloid, upper-half-space, ambient4d).
    #[arg(long)]
    pub chart: Option<String>,
    /// Seed for randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Result of a command that ran to completion.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub message: String,
}

impl Outcome {
    fn new(ok: bool, indeterminate: bool, message: impl Into<String>) -> Self {
        let code = if indeterminate {
            4
        } else if ok {
            0
        } else {
            1
        };
        Outcome { code, message: message.into() }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Json(_) => 2,
        Error::Infeasible(_) => 3,
        Error::Margin(_) => 5,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(o) => {
            println!("{}", o.message);
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Build(c) => cmd_build(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Tile(c) => cmd_tile(c),
        Command::VerifySchlafli(c) => cmd_verify(c),
    }
}

fn pick_chart(flag: &Option<String>, config: Option<ChartKind>) -> Result<Option<ChartKind>> {
    match flag {
        Some(name) => ChartKind::parse(name).map(Some).ok_or_else(|| Error::Config(format!("unknown chart `{name}`"))),
        None => Ok(config),
    }
}

/// Export chart for one mesh. Without an explicit choice spherical meshes
/// use a gnomonic chart centred at their vertex barycenter, since cells of
/// the spherical tilings reach the equator of any fixed hemisphere.
fn chart_for(tag: Option<ChartKind>, m: &TriMesh<f64>) -> Result<Chart<f64>> {
    let chosen = tag.unwrap_or(ChartKind::projective(m.kind));
    check_chart(chosen, m.kind)?;
    if tag.is_none() && m.kind == SpaceKind::Spherical {
        return Ok(Chart::centred(chosen, barycenter(&m.vertices)?));
    }
    Ok(Chart::new(chosen))
}

fn check_chart(chosen: ChartKind, kind: SpaceKind) -> Result<()> {
    let fits = match chosen {
        ChartKind::Hyperboloid | ChartKind::Klein | ChartKind::UpperHalfSpace => kind == SpaceKind::Hyperbolic,
        ChartKind::Gnomonic => kind == SpaceKind::Spherical,
        ChartKind::Ambient4D => true,
    };
    if !fits {
        return Err(Error::Config(format!("chart {chosen:?} does not exist in {} space", kind.name())));
    }
    Ok(())
}

fn chart_json(c: &Chart<f64>) -> Value {
    json!({ "tag": c.tag, "base": c.base.map(|b| b.coords.0) })
}

fn json_text<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Files collected in memory and written at the end.
#[derive(Default)]
struct Outputs(Vec<(PathBuf, String)>);

impl Outputs {
    fn add(&mut self, path: PathBuf, text: String) {
        self.0.push((path, text));
    }

    fn write(self) -> Result<()> {
        for (p, t) in self.0 {
            write_atomic(&p, &t)?;
        }
        Ok(())
    }
}

fn mesh_summary(name: &str, file: &str, m: &TriMesh<f64>) -> Result<Value> {
    let report = self_intersects(m, 1e-9)?;
    Ok(json!({
        "name": name,
        "file": file,
        "kind": m.kind,
        "vertices": m.vertices.len(),
        "triangles": m.triangles.len(),
        "eulerCharacteristic": m.euler_characteristic(),
        "closed": m.require_closed().is_ok(),
        "embedded": !report.intersects,
        "witness": report.witness,
    }))
}

fn midpoint(p: &FamilyParams) -> Result<f64> {
    let fam = build_family(p)?;
    Ok(0.5 * (fam.interval.0 + fam.interval.1))
}

fn in_cell(word: &str, e: Error) -> Error {
    match e {
        Error::Margin(m) => Error::Margin(format!("cell {word}: {m}")),
        other => other,
    }
}

fn cmd_build(c: &Common) -> Result<Outcome> {
    let cfg: BuildConfig = load_config(&c.config)?;
    let chart = pick_chart(&c.chart, cfg.chart)?;
    let r = match (&cfg.family, cfg.r) {
        (_, Some(r)) => Some(r),
        (Some(f), None) => Some(midpoint(f)?),
        (None, None) => None,
    };
    let mut out = Outputs::default();
    let mut entries = Vec::new();
    for &k in &cfg.constructions {
        let fam = || cfg.family.as_ref().expect("validated");
        let tile = || cfg.tile_family.as_ref().expect("validated");
        let tile_r = |t: &crate::tilings::TileFamily| 0.5 * (t.family.r_min + t.family.r_max);
        let mesh = match k {
            Construction::M => build_octahedron_m::<f64>(fam(), r.expect("family given"))?,
            Construction::N => build_disk_n::<f64>(fam(), r.expect("family given"))?,
            Construction::T => build_host_tetrahedron::<f64>(fam())?,
            Construction::P => build_p::<f64>(fam(), r.expect("family given"))?,
            Construction::Kappa => boroczky_cell(&BoroczkyFrame::new()?)?.mesh,
            Construction::ModifiedKappa => {
                let t = tile();
                modified_boroczky_cell(&BoroczkyFrame::new()?, &t.family, tile_r(t), t.margin).map_err(|e| in_cell("kappa", e))?.mesh
            }
            Construction::SphericalCell => spherical_12_tiling()?.cells.swap_remove(0).mesh,
            Construction::ModifiedSphericalCell => {
                let t = tile();
                modified_spherical_cell(&t.family, tile_r(t), 1, t.margin).map_err(|e| in_cell("phi1.N", e))?.0.mesh
            }
            Construction::Intro => {
                let i = cfg.intro.as_ref().expect("validated");
                build_intro_family::<f64>(i, cfg.r.unwrap_or(0.5 * (i.t_min + i.t_max)))?
            }
        };
        let file = format!("{}.off", k.name());
        let ch = chart_for(chart, &mesh)?;
        out.add(c.out.join(&file), to_off(&mesh, &ch)?);
        let mut entry = mesh_summary(k.name(), &file, &mesh)?;
        entry["chart"] = chart_json(&ch);
        entries.push(entry);
    }
    let summary = json!({ "r": r, "constructions": entries });
    out.add(c.out.join("summary.json"), json_text(&summary)?);
    out.write()?;
    Ok(Outcome::new(true, false, format!("built {} meshes into {}", entries.len(), c.out.display())))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SweepSummary<'a> {
    kind: SpaceKind,
    interval: (f64, f64),
    samples: usize,
    failures: &'a [(f64, String)],
    ok: bool,
    indeterminate: bool,
    verdicts: Vec<crate::analysis::VerdictRecord>,
}

fn cmd_sweep(c: &Common) -> Result<Outcome> {
    let cfg: SweepConfig = load_config(&c.config)?;
    let n = c.samples.unwrap_or(cfg.samples);
    let (report, defaults): (SweepReport, _) = match (&cfg.family, &cfg.intro) {
        (Some(p), _) => (sweep(&build_family(p)?, n)?, glued_family_expectations(&p.tolerances)),
        (_, Some(i)) => (sweep(&IntroFamily { params: *i }, n)?, intro_family_expectations(&i.tolerances)),
        _ => unreachable!("validated"),
    };
    if let Some((r, why)) = report.failures.first() {
        return Err(Error::Infeasible(format!("sample r = {r} failed: {why}")));
    }
    let exps = cfg.expectations.clone().unwrap_or(defaults);
    let records = verdicts(&report, &exps)?;
    let (ok, indeterminate) = verdict_status(&records);
    let summary = SweepSummary {
        kind: report.kind,
        interval: report.interval,
        samples: report.samples.len(),
        failures: &report.failures,
        ok,
        indeterminate,
        verdicts: records,
    };
    let mut out = Outputs::default();
    out.add(c.out.join("sweep.csv"), report.to_csv());
    out.add(c.out.join("verdicts.json"), json_text(&summary)?);
    out.write()?;
    let bad: Vec<&str> = summary
        .verdicts
        .iter()
        .filter(|v| v.expected.is_some_and(|e| e != v.verdict))
        .map(|v| v.column.as_str())
        .collect();
    let msg = if bad.is_empty() {
        format!("{} samples, all {} verdicts as expected", n, summary.verdicts.len())
    } else {
        format!("{} samples, unexpected verdicts for {}", n, bad.join(", "))
    };
    Ok(Outcome::new(ok, indeterminate, msg))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct WindowSummary {
    r: Option<f64>,
    directory: String,
    cells: usize,
    adjacencies: usize,
    expected_adjacencies: Option<usize>,
    max_residual: f64,
    mismatches: Vec<String>,
    congruence_residual: f64,
    covered_once: Option<bool>,
    ok: bool,
}

fn window_verdict(t: &TileWindow, tiling: Tiling, window: &Window3, coverage: Option<(usize, u64)>) -> Result<(bool, Option<usize>, Option<bool>)> {
    let congruent = t.congruence_residual()? < MATCH_TOL;
    Ok(match tiling {
        Tiling::Spherical => {
            let covered = match coverage {
                Some((n, seed)) if n > 0 => {
                    let (counts, frac) = t.coverage(n, seed, random_s3_point)?;
                    Some(counts.iter().all(|&k| k == 1) && frac < 1e-6)
                }
                _ => None,
            };
            (t.is_closed_tiling() && congruent && covered.unwrap_or(true), None, covered)
        }
        Tiling::Boroczky => {
            let want = window.expected_adjacencies()?;
            (t.is_consistent() && t.adjacency.len() == want && congruent, Some(want), None)
        }
    })
}

fn cmd_tile(c: &Common) -> Result<Outcome> {
    let cfg: TileConfig = load_config(&c.config)?;
    let chart_tag = pick_chart(&c.chart, cfg.chart)?;
    let kind = match cfg.tiling {
        Tiling::Boroczky => SpaceKind::Hyperbolic,
        Tiling::Spherical => SpaceKind::Spherical,
    };
    if let Some(t) = chart_tag {
        check_chart(t, kind)?;
    }
    let window = cfg.window.unwrap_or(Window3::cube(2));
    let seed = c.seed.unwrap_or(cfg.seed);
    let frame = BoroczkyFrame::new()?;
    let build = |r: Option<f64>| -> Result<TileWindow> {
        match (cfg.tiling, r, &cfg.modified) {
            (Tiling::Spherical, None, _) => spherical_12_tiling(),
            (Tiling::Spherical, Some(r), Some(m)) => modified_spherical_tiling(&m.family, r, m.margin).map_err(|e| in_cell("phi1.N", e)),
            (Tiling::Boroczky, None, _) => boroczky_window(&frame, &boroczky_cell(&frame)?, &window),
            (Tiling::Boroczky, Some(r), Some(m)) => {
                let cell = modified_boroczky_cell(&frame, &m.family, r, m.margin).map_err(|e| in_cell("kappa", e))?;
                boroczky_window(&frame, &cell, &window)
            }
            (_, Some(_), None) => unreachable!("parameters only come with a family"),
        }
    };
    let params: Vec<Option<f64>> = match &cfg.modified {
        None => vec![None],
        Some(m) => m.samples(c.samples.unwrap_or(cfg.samples)).into_iter().map(Some).collect(),
    };
    let mut out = Outputs::default();
    let mut summaries = Vec::new();
    let mut per_cell: Vec<Vec<TriMesh<f64>>> = Vec::new();
    for (i, &r) in params.iter().enumerate() {
        let t = build(r)?;
        let dir = if params.len() == 1 && r.is_none() { c.out.clone() } else { c.out.join(format!("sample{i}")) };
        let mut charts = serde_json::Map::new();
        let (ok, expected, covered) = window_verdict(&t, cfg.tiling, &window, Some((cfg.coverage_samples, seed)))?;
        for (k, cell) in t.cells.iter().enumerate() {
            if per_cell.len() <= k {
                per_cell.push(Vec::new());
            }
            per_cell[k].push(cell.mesh.clone());
            let ch = chart_for(chart_tag, &cell.mesh)?;
            let file = format!("{}.off", file_stem(&cell.word));
            out.add(dir.join(&file), to_off(&cell.mesh, &ch)?);
            charts.insert(file, chart_json(&ch));
        }
        out.add(dir.join("charts.json"), json_text(&charts)?);
        out.add(dir.join("manifest.json"), t.manifest_json()?);
        summaries.push(WindowSummary {
            r,
            directory: dir.display().to_string(),
            cells: t.cells.len(),
            adjacencies: t.adjacency.len(),
            expected_adjacencies: expected,
            max_residual: t.max_residual(),
            mismatches: t.mismatches.clone(),
            congruence_residual: t.congruence_residual()?,
            covered_once: covered,
            ok,
        });
    }
    let spread = per_cell.iter().map(|ms| dihedral_spread(ms)).try_fold(0.0, |a, s| Ok::<_, Error>(f64::max(a, s?)))?;
    let ok = summaries.iter().all(|s| s.ok) && spread < 1e-9;
    let verdict = json!({
        "tiling": cfg.tiling,
        "modified": cfg.modified.is_some(),
        "windows": summaries,
        "dihedralSpread": spread,
        "ok": ok,
    });
    out.add(c.out.join("verdict.json"), json_text(&verdict)?);
    out.write()?;
    Ok(Outcome::new(ok, false, format!("{} window(s), tiling property {}", params.len(), if ok { "holds" } else { "FAILS" })))
}

fn cmd_verify(c: &Common) -> Result<Outcome> {
    let cfg: VerifyConfig = load_config(&c.config)?;
    let seed = c.seed.unwrap_or(cfg.seed);
    let mut ok = true;
    let mut tets = Vec::new();
    for &kind in &cfg.tetrahedra {
        let fam = MovingVertexTetrahedron::new(kind);
        let (lo, hi) = fam.interval();
        let r = 0.5 * (lo + hi);
        let a = schlafli_residual(&fam, r, cfg.h)?;
        let b = schlafli_residual(&fam, r, cfg.h / 2.0)?;
        let ratio = a.residual / b.residual;
        let pass = a.residual < cfg.max_residual && ratio >= cfg.min_ratio;
        ok &= pass;
        tets.push(json!({ "kind": kind, "check": a, "halved": b, "ratio": ratio, "pass": pass }));
    }
    let mut fams = Vec::new();
    for p in &cfg.families {
        let fam = build_family(p)?;
        let r = 0.5 * (fam.interval.0 + fam.interval.1);
        let h = cfg.h.max(1e-3 * (fam.interval.1 - fam.interval.0));
        let a = schlafli_residual(&fam, r, h)?;
        let pass = a.residual < cfg.max_residual;
        ok &= pass;
        fams.push(json!({ "kind": p.kind, "check": a, "pass": pass }));
    }
    let mut balls = Vec::new();
    for &radius in &cfg.ball_radii {
        let b = ball_calibration(radius, cfg.ball_level, 1e-9)?;
        let pass = b.relative_error < cfg.ball_tol;
        ok &= pass;
        balls.push(json!({ "calibration": b, "pass": pass }));
    }
    let mut apex = Vec::new();
    if cfg.apex_samples > 0 {
        for kind in [SpaceKind::Hyperbolic, SpaceKind::Spherical] {
            let worst = apex_identity_residual(kind, cfg.apex_samples, seed)?;
            let pass = worst < 1e-12;
            ok &= pass;
            apex.push(json!({ "kind": kind, "samples": cfg.apex_samples, "maxResidual": worst, "pass": pass }));
        }
    }
    let report = json!({ "tetrahedra": tets, "families": fams, "balls": balls, "apexIdentity": apex, "ok": ok });
    write_atomic(&c.out.join("verify.json"), &json_text(&report)?)?;
    Ok(Outcome::new(ok, false, format!("verification {}", if ok { "passed" } else { "FAILED" })))
}

/// Path of a config shipped in the crate's `configs` directory.
pub fn bundled_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}
