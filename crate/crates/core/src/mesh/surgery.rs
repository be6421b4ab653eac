use std::collections::{HashMap, HashSet};

use super::{Topology, TriMesh};
use crate::error::{Error, Result};
use crate::geom::distance;
use crate::scalar::Real;

/// Cuts the disk formed by `removed` (triangle positions in `host`) out of
/// `host` and glues `patch` into the hole.
///
/// `boundary` pairs each patch boundary label with the host label it lands
/// on; those vertices must coincide within `tol`. The patch keeps its other
/// labels, and must induce the same orientation on the hole boundary as the
/// removed disk did. Host vertices left unused are dropped.
pub fn surgery_replace<T: Real>(
    host: &TriMesh<T>,
    removed: &[usize],
    patch: &TriMesh<T>,
    boundary: &[(&str, &str)],
    tol: T,
) -> Result<TriMesh<T>> {
    if host.kind != patch.kind {
        return Err(Error::KindMismatch("surgery_replace"));
    }
    let removed_set: HashSet<usize> = removed.iter().copied().collect();
    if removed_set.len() != removed.len() || removed.iter().any(|&t| t >= host.triangles.len()) {
        return Err(Error::InvalidMesh("removed triangle list has repeats or bad indices".into()));
    }
    let hole = TriMesh {
        kind: host.kind,
        vertices: host.vertices.clone(),
        labels: host.labels.clone(),
        triangles: removed.iter().map(|&t| host.triangles[t]).collect(),
    };
    let Topology::Disk(_) = hole.validate()? else {
        return Err(Error::InvalidMesh("removed triangles do not form a disk".into()));
    };
    let Topology::Disk(_) = patch.validate()? else {
        return Err(Error::InvalidMesh("patch is not a disk".into()));
    };

    // Patch vertex -> host vertex for the boundary.
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut residual = T::zero();
    for &(pl, hl) in boundary {
        let pi = patch.index_of(pl)?;
        let hi = host.index_of(hl)?;
        residual = residual.max(distance(&patch.vertices[pi], &host.vertices[hi])?);
        map.insert(pi, hi);
    }
    if residual > tol {
        return Err(Error::Congruence { residual: residual.to_f64_lossy() });
    }
    let patch_boundary = patch.boundary_edges();
    let mut mapped = HashSet::new();
    for &(a, b) in &patch_boundary {
        let (Some(&ha), Some(&hb)) = (map.get(&a), map.get(&b)) else {
            return Err(Error::InvalidMesh(format!(
                "patch boundary vertex `{}` has no host partner",
                patch.labels[if map.contains_key(&a) { b } else { a }]
            )));
        };
        mapped.insert((ha, hb));
    }
    let hole_boundary: HashSet<(usize, usize)> = hole.boundary_edges().into_iter().collect();
    if mapped != hole_boundary {
        let flipped: HashSet<(usize, usize)> = mapped.iter().map(|&(a, b)| (b, a)).collect();
        if flipped == hole_boundary {
            return Err(Error::Orientation("patch orientation is opposite to the host".into()));
        }
        return Err(Error::InvalidMesh("patch boundary does not match the hole boundary".into()));
    }

    let mut out = TriMesh {
        kind: host.kind,
        vertices: host.vertices.clone(),
        labels: host.labels.clone(),
        triangles: host
            .triangles
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed_set.contains(i))
            .map(|(_, t)| *t)
            .collect(),
    };
    for (i, (p, l)) in patch.vertices.iter().zip(&patch.labels).enumerate() {
        if map.contains_key(&i) {
            continue;
        }
        let used_in_patch = patch.triangles.iter().any(|t| t.contains(&i));
        if !used_in_patch {
            continue;
        }
        let idx = out.add_vertex(l.clone(), *p)?;
        map.insert(i, idx);
    }
    out.triangles.extend(patch.triangles.iter().map(|t| t.map(|i| map[&i])));
    let out = out.compacted();
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::shapes::*;
    use super::*;
    use crate::geom::{Point, SpaceKind};

    #[test]
    fn identity_surgery() {
        let host = icosphere(SpaceKind::Hyperbolic, 0.7, 1);
        // The fan around one vertex is a disk.
        let removed: Vec<usize> = (0..host.triangles.len()).filter(|&t| host.triangles[t].contains(&0)).collect();
        let mut patch = TriMesh::new(host.kind);
        patch.vertices = host.vertices.clone();
        patch.labels = host.labels.iter().map(|l| format!("{l}'")).collect();
        patch.triangles = removed.iter().map(|&t| host.triangles[t]).collect();
        let patch = patch.compacted();
        let Topology::Disk(cycle) = patch.validate().unwrap() else { panic!() };
        let pairs: Vec<(String, String)> = cycle
            .iter()
            .map(|&i| (patch.labels[i].clone(), patch.labels[i].trim_end_matches('\'').to_string()))
            .collect();
        let pairs_ref: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let out = surgery_replace(&host, &removed, &patch, &pairs_ref, 1e-12).unwrap();
        assert_eq!(out.triangles.len(), host.triangles.len());
        assert_eq!(out.euler_characteristic(), 2);
        assert!(out.require_closed().is_ok());
        // Flipped patch is rejected.
        let err = surgery_replace(&host, &removed, &patch.reversed(), &pairs_ref, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Orientation(_)));
    }

    #[test]
    fn cone_over_a_face() {
        let kind = SpaceKind::Spherical;
        let host = regular_tetrahedron(kind, 0.5);
        let [a, b, c] = host.triangle_points(0);
        let labels = host.triangle_labels(0).map(|s| s.to_string());
        let mut patch = TriMesh::new(kind);
        for (l, p) in labels.iter().zip([a, b, c]) {
            patch.add_vertex(format!("{l}p"), p).unwrap();
        }
        let apex = Point::from_polar(kind, [1.0, 1.0, -1.0], 0.7);
        patch.add_vertex("apex", apex).unwrap();
        patch.triangles = vec![[0, 1, 3], [1, 2, 3], [2, 0, 3]];
        let pairs: Vec<(String, String)> = labels.iter().map(|l| (format!("{l}p"), l.clone())).collect();
        let pairs_ref: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let out = surgery_replace(&host, &[0], &patch, &pairs_ref, 1e-12).unwrap();
        assert_eq!(out.vertices.len(), 5);
        assert_eq!(out.triangles.len(), 6);
        assert_eq!(out.euler_characteristic(), 2);
        // Misplaced corner.
        let mut bad = patch.clone();
        bad.vertices[0] = Point::from_polar(kind, [1.0, 0.0, 0.0], 0.1);
        assert!(matches!(
            surgery_replace(&host, &[0], &bad, &pairs_ref, 1e-9),
            Err(Error::Congruence { .. })
        ));
    }
}
