//! Triangle-pair intersection tests in a projective chart.
//!
//! Klein and gnomonic charts map geodesic triangles to flat Euclidean ones,
//! so embeddedness reduces to Euclidean triangle-triangle tests. Any contact
//! closer than the tolerance counts, away from shared vertices and edges.

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geom::{barycenter, chart_to, cross3, dot3, sub3, Chart, ChartKind, Point};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionReport {
    pub intersects: bool,
    /// First offending triangle pair, as label triples.
    pub witness: Option<([String; 3], [String; 3])>,
    pub tolerance: f64,
}

type V3<T> = [T; 3];

fn lin<T: Real>(a: V3<T>, b: V3<T>, t: T) -> V3<T> {
    std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
}

fn norm<T: Real>(a: V3<T>) -> T {
    dot3(a, a).sqrt()
}

fn unit_normal<T: Real>(tri: &[V3<T>; 3]) -> V3<T> {
    let n = cross3(sub3(tri[1], tri[0]), sub3(tri[2], tri[0]));
    let l = norm(n);
    n.map(|x| x / l)
}

/// Euclidean distance from `p` to the closed triangle.
fn point_triangle_distance<T: Real>(p: V3<T>, tri: &[V3<T>; 3]) -> T {
    let n = unit_normal(tri);
    let h = dot3(sub3(p, tri[0]), n);
    let foot: V3<T> = std::array::from_fn(|i| p[i] - h * n[i]);
    let inside = (0..3).all(|k| dot3(cross3(sub3(tri[(k + 1) % 3], tri[k]), sub3(foot, tri[k])), n) >= T::zero());
    if inside {
        return h.abs();
    }
    (0..3)
        .map(|k| point_segment_distance(p, tri[k], tri[(k + 1) % 3]))
        .fold(T::infinity(), T::min)
}

fn point_segment_distance<T: Real>(p: V3<T>, a: V3<T>, b: V3<T>) -> T {
    let ab = sub3(b, a);
    let t = (dot3(sub3(p, a), ab) / dot3(ab, ab)).max(T::zero()).min(T::one());
    norm(sub3(p, lin(a, b, t)))
}

fn segment_segment_distance<T: Real>(p1: V3<T>, q1: V3<T>, p2: V3<T>, q2: V3<T>) -> T {
    let d1 = sub3(q1, p1);
    let d2 = sub3(q2, p2);
    let r = sub3(p1, p2);
    let (a, e, f) = (dot3(d1, d1), dot3(d2, d2), dot3(d2, r));
    let c = dot3(d1, r);
    let b = dot3(d1, d2);
    let denom = a * e - b * b;
    let clamp = |x: T| x.max(T::zero()).min(T::one());
    let mut s = if denom > T::epsilon() * a * e { clamp((b * f - c * e) / denom) } else { T::zero() };
    let mut t = (b * s + f) / e;
    if t < T::zero() {
        t = T::zero();
        s = clamp(-c / a);
    } else if t > T::one() {
        t = T::one();
        s = clamp((b - c) / a);
    }
    norm(sub3(lin(p1, q1, s), lin(p2, q2, t)))
}

/// The segment crosses the triangle's plane strictly and the crossing point
/// lies in the closed triangle.
fn segment_crosses<T: Real>(a: V3<T>, b: V3<T>, tri: &[V3<T>; 3], tol: T) -> bool {
    let n = unit_normal(tri);
    let da = dot3(sub3(a, tri[0]), n);
    let db = dot3(sub3(b, tri[0]), n);
    if !((da > tol && db < -tol) || (da < -tol && db > tol)) {
        return false;
    }
    let x = lin(a, b, da / (da - db));
    point_triangle_distance(x, tri) <= tol
}

/// Any contact between a segment and a closed triangle.
fn segment_touches_triangle<T: Real>(a: V3<T>, b: V3<T>, tri: &[V3<T>; 3], tol: T) -> bool {
    segment_crosses(a, b, tri, tol)
        || point_triangle_distance(a, tri) <= tol
        || point_triangle_distance(b, tri) <= tol
        || (0..3).any(|k| segment_segment_distance(a, b, tri[k], tri[(k + 1) % 3]) <= tol)
}

/// Segment `s -> p` from a vertex `s` of `tri` runs into the triangle: `p` is
/// within `tol` of its plane and the direction lies in the closed corner wedge.
fn edge_enters_corner<T: Real>(s: V3<T>, p: V3<T>, tri: &[V3<T>; 3], corner: usize, tol: T) -> bool {
    let n = unit_normal(tri);
    let d = sub3(p, s);
    if dot3(d, n).abs() > tol {
        return false;
    }
    let u = sub3(tri[(corner + 1) % 3], s);
    let v = sub3(tri[(corner + 2) % 3], s);
    // Signed distances of `p` from the two wedge lines.
    let side_u = dot3(cross3(u, d), n) / norm(u);
    let side_v = dot3(cross3(d, v), n) / norm(v);
    side_u >= -tol && side_v >= -tol
}

/// Intersection test for two chart triangles whose vertex identities are
/// `ia`, `ib` (equal ids mean the same mesh vertex).
pub(crate) fn chart_triangles_intersect<T: Real>(a: &[V3<T>; 3], ia: [usize; 3], b: &[V3<T>; 3], ib: [usize; 3], tol: T) -> bool {
    let mut shared = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if ia[i] == ib[j] {
                shared.push((i, j));
            }
        }
    }
    match shared.len() {
        0 => {
            (0..3).any(|k| segment_touches_triangle(a[k], a[(k + 1) % 3], b, tol))
                || (0..3).any(|k| segment_touches_triangle(b[k], b[(k + 1) % 3], a, tol))
        }
        1 => {
            let (sa, sb) = shared[0];
            let (a1, a2) = (a[(sa + 1) % 3], a[(sa + 2) % 3]);
            let (b1, b2) = (b[(sb + 1) % 3], b[(sb + 2) % 3]);
            segment_touches_triangle(a1, a2, b, tol)
                || segment_touches_triangle(b1, b2, a, tol)
                || edge_enters_corner(a[sa], a1, b, sb, tol)
                || edge_enters_corner(a[sa], a2, b, sb, tol)
                || edge_enters_corner(b[sb], b1, a, sa, tol)
                || edge_enters_corner(b[sb], b2, a, sa, tol)
        }
        2 => {
            // Two triangles on one edge meet elsewhere only when folded flat.
            let oa = (0..3).find(|&i| !shared.iter().any(|&(s, _)| s == i)).unwrap();
            let ob = (0..3).find(|&j| !shared.iter().any(|&(_, s)| s == j)).unwrap();
            let n = unit_normal(a);
            if dot3(sub3(b[ob], a[0]), n).abs() > tol {
                return false;
            }
            let (e0, e1) = (a[shared[0].0], a[shared[1].0]);
            let sa = dot3(cross3(sub3(e1, e0), sub3(a[oa], e0)), n);
            let sb = dot3(cross3(sub3(e1, e0), sub3(b[ob], e0)), n);
            sa * sb > T::zero()
        }
        _ => false,
    }
}

/// Whether two geodesic triangles (given by points) intersect, treating
/// vertices closer than `tol` as shared.
pub fn triangles_intersect<T: Real>(a: &[Point<T>; 3], b: &[Point<T>; 3], tol: T) -> Result<bool> {
    let all: Vec<Point<T>> = a.iter().chain(b.iter()).copied().collect();
    let chart = Chart::centred(ChartKind::projective(a[0].kind), barycenter(&all)?);
    let ca = [chart_to(&a[0], &chart)?, chart_to(&a[1], &chart)?, chart_to(&a[2], &chart)?];
    let cb = [chart_to(&b[0], &chart)?, chart_to(&b[1], &chart)?, chart_to(&b[2], &chart)?];
    let ids = weld_ids(&all, tol);
    Ok(chart_triangles_intersect(&ca, [ids[0], ids[1], ids[2]], &cb, [ids[3], ids[4], ids[5]], tol))
}

/// Identifies points closer than `tol` (first occurrence wins).
pub(crate) fn weld_ids<T: Real>(points: &[Point<T>], tol: T) -> Vec<usize> {
    let mut ids: Vec<usize> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let id = (0..i).find(|&j| ids[j] == j && p.coords.max_abs_diff(&points[j].coords) <= tol).unwrap_or(i);
        ids.push(id);
    }
    ids
}

/// Chart used for a whole mesh: the projective chart at the vertex centroid,
/// falling back to each vertex in turn when some vertex leaves the domain.
pub(crate) fn mesh_chart<T: Real>(m: &TriMesh<T>) -> Result<(Chart<T>, Vec<V3<T>>)> {
    let used: Vec<Point<T>> = m.used_vertices().iter().map(|&i| m.vertices[i]).collect();
    let mut candidates: Vec<Point<T>> = barycenter(&used).into_iter().collect();
    candidates.extend(used.iter().copied());
    for c in candidates {
        let chart = Chart::centred(ChartKind::projective(m.kind), c);
        let coords: Result<Vec<V3<T>>> = m.vertices.iter().map(|p| chart_to(p, &chart)).collect();
        if let Ok(coords) = coords {
            // Stay well inside the chart so flat tests stay well conditioned.
            if coords.iter().all(|x| dot3(*x, *x) < T::lit(1e8)) {
                return Ok((chart, coords));
            }
        }
    }
    Err(Error::ChartDomain("no projective chart contains every vertex".into()))
}

/// Reports whether two triangles that share at most one vertex intersect.
/// Vertices at the same position (within `tol`) are treated as shared.
pub fn self_intersects<T: Real>(m: &TriMesh<T>, tol: T) -> Result<IntersectionReport> {
    let (_, coords) = mesh_chart(m)?;
    let ids = weld_ids(&m.vertices, T::lit(1e-9));
    let tris: Vec<[V3<T>; 3]> = m.triangles.iter().map(|t| t.map(|i| coords[i])).collect();
    let tid: Vec<[usize; 3]> = m.triangles.iter().map(|t| t.map(|i| ids[i])).collect();
    let boxes: Vec<(V3<T>, V3<T>)> = tris
        .iter()
        .map(|t| {
            let lo = std::array::from_fn(|i| t[0][i].min(t[1][i]).min(t[2][i]) - tol);
            let hi = std::array::from_fn(|i| t[0][i].max(t[1][i]).max(t[2][i]) + tol);
            (lo, hi)
        })
        .collect();
    let mut order: Vec<usize> = (0..tris.len()).collect();
    order.sort_by(|&a, &b| boxes[a].0[0].partial_cmp(&boxes[b].0[0]).unwrap_or(std::cmp::Ordering::Equal));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if boxes[j].0[0] > boxes[i].1[0] {
                break;
            }
            let overlap = (1..3).all(|d| boxes[i].0[d] <= boxes[j].1[d] && boxes[j].0[d] <= boxes[i].1[d]);
            if !overlap {
                continue;
            }
            if chart_triangles_intersect(&tris[i], tid[i], &tris[j], tid[j], tol) {
                let lab = |t: usize| m.triangles[t].map(|v| m.labels[v].clone());
                return Ok(IntersectionReport { intersects: true, witness: Some((lab(i), lab(j))), tolerance: tol.to_f64_lossy() });
            }
        }
    }
    Ok(IntersectionReport { intersects: false, witness: None, tolerance: tol.to_f64_lossy() })
}

#[cfg(test)]
mod tests {
    use super::super::shapes::*;
    use super::*;
    use crate::geom::SpaceKind;

    fn e(t: [[f64; 3]; 3]) -> [V3<f64>; 3] {
        t
    }

    #[test]
    fn euclidean_pair_cases() {
        let a = e([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        // Piercing.
        let b = e([[0.2, 0.2, -0.5], [0.3, 0.2, 0.5], [0.2, 0.4, 0.5]]);
        assert!(chart_triangles_intersect(&a, [0, 1, 2], &b, [3, 4, 5], 1e-9));
        // Separated.
        let c = e([[0.2, 0.2, 0.1], [0.3, 0.2, 0.5], [0.2, 0.4, 0.5]]);
        assert!(!chart_triangles_intersect(&a, [0, 1, 2], &c, [3, 4, 5], 1e-9));
        // Coplanar overlap and coplanar disjoint.
        let d = e([[0.1, 0.1, 0.0], [2.0, 0.1, 0.0], [0.1, 2.0, 0.0]]);
        assert!(chart_triangles_intersect(&a, [0, 1, 2], &d, [3, 4, 5], 1e-9));
        let f = e([[1.0, 1.0, 0.0], [2.0, 1.0, 0.0], [1.0, 2.0, 0.0]]);
        assert!(!chart_triangles_intersect(&a, [0, 1, 2], &f, [3, 4, 5], 1e-9));
        // Shared vertex, fanning out of plane: no intersection.
        let g = e([[0.0, 0.0, 0.0], [-1.0, 0.0, 0.3], [0.0, -1.0, 0.3]]);
        assert!(!chart_triangles_intersect(&a, [0, 1, 2], &g, [0, 4, 5], 1e-9));
        // Shared vertex, second triangle cutting through the first.
        let h = e([[0.0, 0.0, 0.0], [1.0, 1.0, 0.5], [1.0, 1.0, -0.5]]);
        assert!(chart_triangles_intersect(&a, [0, 1, 2], &h, [0, 4, 5], 1e-9));
        // Shared edge folded flat onto the first triangle.
        let k = e([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.3, 0.0]]);
        assert!(chart_triangles_intersect(&a, [0, 1, 2], &k, [0, 1, 5], 1e-9));
        let l = e([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, -0.3, 0.0]]);
        assert!(!chart_triangles_intersect(&a, [0, 1, 2], &l, [0, 1, 5], 1e-9));
        // Coplanar with a shared vertex, wedges overlapping.
        let m = e([[0.0, 0.0, 0.0], [1.0, 0.5, 0.0], [-0.5, 1.0, 0.0]]);
        assert!(chart_triangles_intersect(&a, [0, 1, 2], &m, [0, 4, 5], 1e-9));
        let n = e([[0.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]);
        assert!(!chart_triangles_intersect(&a, [0, 1, 2], &n, [0, 4, 5], 1e-9));
        // A vertex resting on the other face is a contact.
        let tch = e([[0.3, 0.3, 0.0], [0.3, 0.3, 1.0], [0.5, 0.6, 1.0]]);
        assert!(chart_triangles_intersect(&a, [0, 1, 2], &tch, [3, 4, 5], 1e-9));
        let gap = e([[0.3, 0.3, 1e-6], [0.3, 0.3, 1.0], [0.5, 0.6, 1.0]]);
        assert!(!chart_triangles_intersect(&a, [0, 1, 2], &gap, [3, 4, 5], 1e-9));
    }

    #[test]
    fn convex_meshes_are_embedded() {
        for kind in [SpaceKind::Hyperbolic, SpaceKind::Spherical] {
            assert!(!self_intersects(&regular_tetrahedron(kind, 0.6), 1e-9).unwrap().intersects);
            assert!(!self_intersects(&icosphere(kind, 0.6, 2), 1e-9).unwrap().intersects);
        }
    }

    #[test]
    fn overlapping_tetrahedra_intersect() {
        let kind = SpaceKind::Hyperbolic;
        let a = regular_tetrahedron(kind, 0.6);
        let shift = crate::geom::Isometry::to_origin(&Point::from_polar(kind, [1.0, 0.3, 0.2], 0.3));
        let b = a.transformed(&shift).relabeled(|l| format!("{l}'"));
        let both = a.disjoint_union(&b).unwrap();
        let r = self_intersects(&both, 1e-9).unwrap();
        assert!(r.intersects && r.witness.is_some(), "{r:?}");
        // Far apart: embedded.
        let far = crate::geom::Isometry::to_origin(&Point::from_polar(kind, [1.0, 0.3, 0.2], 3.0));
        let c = a.transformed(&far).relabeled(|l| format!("{l}'"));
        assert!(!self_intersects(&a.disjoint_union(&c).unwrap(), 1e-9).unwrap().intersects);
    }
}
