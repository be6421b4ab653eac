//! Edge lengths, dihedral angles, curvature, area and total mean curvature.

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geom::{angle_at, bilinear, distance, form_cross, Point, Vec4};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord<T> {
    pub endpoints: (String, String),
    pub length: T,
    /// Interior dihedral angle in `(0, 2 pi)`; `pi` for a flat edge.
    pub dihedral: T,
}

impl<T: Real> EdgeRecord<T> {
    pub fn label(&self) -> String {
        format!("{}-{}", self.endpoints.0, self.endpoints.1)
    }
}

/// Plane angles of triangle `t` at its three corners.
pub fn face_angles<T: Real>(m: &TriMesh<T>, t: usize) -> [T; 3] {
    let [a, b, c] = m.triangle_points(t);
    [angle_at(&a, &b, &c), angle_at(&b, &c, &a), angle_at(&c, &a, &b)]
}

pub fn triangle_area<T: Real>(m: &TriMesh<T>, t: usize) -> T {
    let s: T = face_angles(m, t).iter().copied().sum();
    match m.kind {
        crate::geom::SpaceKind::Hyperbolic => T::PI() - s,
        crate::geom::SpaceKind::Spherical => s - T::PI(),
    }
}

pub fn surface_area<T: Real>(m: &TriMesh<T>) -> T {
    (0..m.triangles.len()).map(|t| triangle_area(m, t)).sum()
}

fn unit_tangent<T: Real>(p: &Point<T>, v: Vec4<T>) -> Vec4<T> {
    let n = bilinear(&v, &v, p.kind).max(T::zero()).sqrt();
    v * (T::one() / n)
}

/// Interior dihedral angle at edge `p -> q`, where the outside sees
/// `(p, q, a)` and `(q, p, b)` counter-clockwise.
///
/// The angle is measured in the normal plane of the edge at `p`, turning from
/// the first face toward the inside, so nonconvex edges exceed `pi`.
pub(crate) fn dihedral_at_edge<T: Real>(p: &Point<T>, q: &Point<T>, a: &Point<T>, b: &Point<T>) -> T {
    let kind = p.kind;
    let e = unit_tangent(p, p.tangent_toward(q));
    let perp = |x: &Point<T>| {
        let t = p.tangent_toward(x);
        unit_tangent(p, t - e * bilinear(&t, &e, kind))
    };
    let ua = perp(a);
    let ub = perp(b);
    // Outward normal of (p, q, a): right-hand rule on the ordered triple.
    let n = form_cross(&p.coords, &q.coords, &a.coords, kind);
    let n = unit_tangent(p, n);
    let y = -bilinear(&ub, &n, kind);
    let x = bilinear(&ub, &ua, kind);
    let mut theta = y.atan2(x);
    if theta < T::zero() {
        theta += T::TAU();
    }
    theta
}

/// One record per edge of a closed mesh, sorted by vertex index.
pub fn edge_table<T: Real>(m: &TriMesh<T>) -> Result<Vec<EdgeRecord<T>>> {
    m.require_closed()?;
    let mut out = Vec::new();
    for ((i, j), faces) in m.edges() {
        if faces.len() != 2 {
            return Err(Error::InvalidMesh(format!(
                "edge {}-{} has {} incident triangles",
                m.labels[i],
                m.labels[j],
                faces.len()
            )));
        }
        // Find the face where the edge runs i -> j.
        let (f1, f2) = if has_directed(&m.triangles[faces[0]], i, j) { (faces[0], faces[1]) } else { (faces[1], faces[0]) };
        let a = third(&m.triangles[f1], i, j);
        let b = third(&m.triangles[f2], i, j);
        let (p, q) = (m.vertices[i], m.vertices[j]);
        out.push(EdgeRecord {
            endpoints: (m.labels[i].clone(), m.labels[j].clone()),
            length: distance(&p, &q)?,
            dihedral: dihedral_at_edge(&p, &q, &m.vertices[a], &m.vertices[b]),
        });
    }
    Ok(out)
}

fn has_directed(t: &[usize; 3], i: usize, j: usize) -> bool {
    (0..3).any(|k| t[k] == i && t[(k + 1) % 3] == j)
}

fn third(t: &[usize; 3], i: usize, j: usize) -> usize {
    *t.iter().find(|&&v| v != i && v != j).expect("triangle contains the edge")
}

/// `2 pi` minus the sum of plane angles at the vertex.
pub fn vertex_gauss_curvature<T: Real>(m: &TriMesh<T>, label: &str) -> Result<T> {
    let v = m.index_of(label)?;
    let mut sum = T::zero();
    let mut any = false;
    for (ti, t) in m.triangles.iter().enumerate() {
        if let Some(k) = t.iter().position(|&i| i == v) {
            sum += face_angles(m, ti)[k];
            any = true;
        }
    }
    if !any {
        return Err(Error::InvalidMesh(format!("vertex `{label}` is not used by any triangle")));
    }
    Ok(T::TAU() - sum)
}

/// Half the sum of `(pi - dihedral) * length` over all edges.
pub fn total_mean_curvature<T: Real>(m: &TriMesh<T>) -> Result<T> {
    let half = T::lit(0.5);
    Ok(edge_table(m)?.iter().map(|e| half * (T::PI() - e.dihedral) * e.length).sum())
}
