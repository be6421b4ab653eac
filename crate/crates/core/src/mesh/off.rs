//! OFF mesh files and CSV edge tables.

use std::fmt::Write as _;
use std::path::Path;

use super::{edge_table, TriMesh};
use crate::error::{Error, Result};
use crate::geom::{chart_from, chart_to, Chart, SpaceKind};
use crate::scalar::Real;

/// Writes `contents` next to `path` and renames it into place.
pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Config(format!("`{}` is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub(crate) fn fmt_real<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

/// OFF text in chart coordinates, vertices sorted by label. Labels are kept
/// in `# label` comment lines so the file reads back losslessly.
pub fn to_off<T: Real>(m: &TriMesh<T>, chart: &Chart<T>) -> Result<String> {
    let mut order: Vec<usize> = (0..m.vertices.len()).collect();
    order.sort_by(|&a, &b| m.labels[a].cmp(&m.labels[b]));
    let mut rank = vec![0usize; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut s = String::from("OFF\n");
    for &i in &order {
        writeln!(s, "# label {}", m.labels[i]).unwrap();
    }
    writeln!(s, "{} {} 0", m.vertices.len(), m.triangles.len()).unwrap();
    for &i in &order {
        let x = chart_to(&m.vertices[i], chart)?;
        writeln!(s, "{} {} {}", fmt_real(x[0]), fmt_real(x[1]), fmt_real(x[2])).unwrap();
    }
    for t in &m.triangles {
        writeln!(s, "3 {} {} {}", rank[t[0]], rank[t[1]], rank[t[2]]).unwrap();
    }
    Ok(s)
}

pub fn export_mesh<T: Real>(m: &TriMesh<T>, chart: &Chart<T>, path: &Path) -> Result<()> {
    write_atomic(path, &to_off(m, chart)?)
}

/// Parses OFF text written in `chart` coordinates.
pub fn from_off<T: Real>(text: &str, chart: &Chart<T>, kind: SpaceKind) -> Result<TriMesh<T>> {
    let mut labels = Vec::new();
    let mut tokens: Vec<&str> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(l) = rest.trim().strip_prefix("label ") {
                labels.push(l.trim().to_string());
            }
            continue;
        }
        tokens.extend(line.split_whitespace());
    }
    let mut it = tokens.into_iter();
    if it.next() != Some("OFF") {
        return Err(Error::Parse("missing OFF header".into()));
    }
    let mut num = |what: &str| -> Result<f64> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("unexpected end of file reading {what}")))?
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
    };
    let nv = num("vertex count")? as usize;
    let nf = num("face count")? as usize;
    let _ = num("edge count")?;
    if !labels.is_empty() && labels.len() != nv {
        return Err(Error::Parse(format!("{} labels for {nv} vertices", labels.len())));
    }
    let mut m = TriMesh::new(kind);
    for i in 0..nv {
        let x = [T::lit(num("coordinate")?), T::lit(num("coordinate")?), T::lit(num("coordinate")?)];
        let label = labels.get(i).cloned().unwrap_or_else(|| format!("v{i}"));
        m.add_vertex(label, chart_from(x, chart, kind)?)?;
    }
    for _ in 0..nf {
        if num("face size")? as usize != 3 {
            return Err(Error::Parse("only triangular faces are supported".into()));
        }
        let t = [num("index")? as usize, num("index")? as usize, num("index")? as usize];
        m.add_triangle(t)?;
    }
    Ok(m)
}

/// CSV with columns `edge_label,length,dihedral`.
pub fn edge_table_csv<T: Real>(m: &TriMesh<T>) -> Result<String> {
    let mut s = String::from("edge_label,length,dihedral\n");
    for e in edge_table(m)? {
        writeln!(s, "{},{},{}", e.label(), fmt_real(e.length), fmt_real(e.dihedral)).unwrap();
    }
    Ok(s)
}
