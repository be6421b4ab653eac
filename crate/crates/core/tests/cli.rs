use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::TempDir;

use fixed_dihedral::cli::{bundled_config, run};
use fixed_dihedral::geom::{Chart, ChartKind, Point, Vec4};
use fixed_dihedral::mesh::from_off;
use fixed_dihedral::tilings::spherical_12_tiling;
use fixed_dihedral::SpaceKind;

fn exec(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec!["fixed-dihedral".to_string(), cmd.into(), "--config".into(), config.display().to_string()];
    args.extend(["--out".to_string(), out.display().to_string()]);
    args.extend(extra.iter().map(|s| s.to_string()));
    run(args)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Bundled config with one field replaced, written into `dir`.
fn patched(name: &str, dir: &Path, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v = read_json(&bundled_config(name));
    edit(&mut v);
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn build_writes_meshes_and_summary() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(exec("build", &bundled_config("build-hyperbolic.json"), tmp.path(), &[]), 0);
    let summary = read_json(&tmp.path().join("summary.json"));
    let entries = summary["constructions"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    for e in entries {
        let text = fs::read_to_string(tmp.path().join(e["file"].as_str().unwrap())).unwrap();
        assert!(text.starts_with("OFF\n"));
        // N is a disk with boundary; the others are closed.
        assert_eq!(e["closed"], e["name"] != "N");
    }
    let m = entries.iter().find(|e| e["name"] == "M").unwrap();
    assert_eq!(m["embedded"], false);
    assert!(m["witness"].is_array());
    assert_eq!(entries.iter().find(|e| e["name"] == "P").unwrap()["embedded"], true);
}

#[test]
fn outputs_are_deterministic() {
    for (cmd, cfg) in [("build", "build-spherical.json"), ("tile", "tile-spherical.json"), ("sweep", "sweep-intro-hyperbolic.json")] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert_eq!(exec(cmd, &bundled_config(cfg), a.path(), &[]), 0);
        assert_eq!(exec(cmd, &bundled_config(cfg), b.path(), &[]), 0);
        let (fa, fb) = (files(a.path()), files(b.path()));
        assert!(!fa.is_empty());
        let names = |f: &[(String, Vec<u8>)]| f.iter().map(|x| x.0.clone()).collect::<Vec<_>>();
        assert_eq!(names(&fa), names(&fb), "{cfg}");
        for (x, y) in fa.iter().zip(&fb) {
            // Paths of the output directory differ between the two runs.
            if x.0 != "verdict.json" {
                assert_eq!(x.1, y.1, "{cfg}: {} differs", x.0);
            }
        }
    }
}

#[test]
fn invalid_config_exits_2_with_line() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(exec("build", &bundled_config("build-invalid-beta.json"), tmp.path(), &[]), 2);
    assert!(!tmp.path().join("summary.json").exists());
    let missing = tmp.path().join("nope.json");
    assert_eq!(exec("build", &missing, tmp.path(), &[]), 2);
    assert_eq!(exec("build", &bundled_config("build-hyperbolic.json"), tmp.path(), &["--chart", "mercator"]), 2);
    assert_eq!(exec("tile", &bundled_config("tile-spherical.json"), tmp.path(), &["--chart", "klein"]), 2);
}

#[test]
fn indeterminate_sweep_exits_4() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(exec("sweep", &bundled_config("sweep-tight.json"), tmp.path(), &[]), 4);
    let verdicts = read_json(&tmp.path().join("verdicts.json"));
    assert!(verdicts.to_string().contains("indeterminate"));
    assert!(tmp.path().join("sweep.csv").exists());
}

#[test]
fn infeasible_family_exits_3() {
    let tmp = TempDir::new().unwrap();
    // Beyond pi/2 - beta the cone apex has no real distance to its plane.
    let cfg = patched("sweep-hyperbolic.json", tmp.path(), |v| {
        v["family"]["rMin"] = 0.53.into();
        v["family"]["rMax"] = 0.6.into();
    });
    assert_eq!(exec("sweep", &cfg, &tmp.path().join("out"), &[]), 3);
}

#[test]
fn oversized_margin_exits_5() {
    let tmp = TempDir::new().unwrap();
    let cfg = patched("tile-boroczky-modified.json", tmp.path(), |v| v["modified"]["margin"] = 5.0.into());
    assert_eq!(exec("tile", &cfg, &tmp.path().join("out"), &[]), 5);
}

#[test]
fn empty_window_writes_empty_manifest() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(exec("tile", &bundled_config("tile-boroczky-empty.json"), tmp.path(), &[]), 0);
    let m = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(m["cells"].as_array().unwrap().len(), 0);
    assert_eq!(m["adjacency"].as_array().unwrap().len(), 0);
}

#[test]
fn spherical_cells_reimport_through_their_charts() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(exec("tile", &bundled_config("tile-spherical.json"), tmp.path(), &[]), 0);
    let charts = read_json(&tmp.path().join("charts.json"));
    let tiling = spherical_12_tiling().unwrap();
    assert_eq!(charts.as_object().unwrap().len(), 12);
    for cell in &tiling.cells {
        let file = format!("{}.off", fixed_dihedral::tilings::file_stem(&cell.word));
        let c = &charts[&file];
        assert_eq!(c["tag"], "gnomonic");
        let b: Vec<f64> = c["base"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        let base = Point::new(Vec4::new(b[0], b[1], b[2], b[3]), SpaceKind::Spherical).unwrap();
        let text = fs::read_to_string(tmp.path().join(&file)).unwrap();
        let back = from_off::<f64>(&text, &Chart::centred(ChartKind::Gnomonic, base), SpaceKind::Spherical).unwrap();
        assert!(back.max_vertex_residual(&cell.mesh).unwrap() < 1e-12, "{file}");
    }
    let verdict = read_json(&tmp.path().join("verdict.json"));
    assert_eq!(verdict["ok"], true);
}

#[test]
fn verify_writes_report() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(exec("verify-schlafli", &bundled_config("schlafli-spherical.json"), tmp.path(), &[]), 0);
    let v = read_json(&tmp.path().join("verify.json"));
    assert_eq!(v["ok"], true);
    assert!(!v["tetrahedra"].as_array().unwrap().is_empty());
}
