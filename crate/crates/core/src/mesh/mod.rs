//! Labeled oriented triangle meshes in hyperbolic or spherical space.
//!
//! Triangles are index triples oriented counter-clockwise when seen from
//! outside. Vertex labels are stable names that survive a deformation, so
//! measurements at different parameters can be compared by label.

mod intersect;
mod measure;
mod off;
mod surgery;
pub mod triangulate;
mod volume;

use std::collections::{BTreeMap, HashMap};

pub use intersect::{self_intersects, triangles_intersect, IntersectionReport};
pub use measure::{
    edge_table, face_angles, surface_area, total_mean_curvature, triangle_area, vertex_gauss_curvature, EdgeRecord,
};
pub(crate) use off::write_atomic;
pub use off::{edge_table_csv, export_mesh, from_off, to_off};
pub use surgery::surgery_replace;
pub use volume::{enclosed_volume, enclosed_volume_estimate, tetrahedron_volume, winding_number, VolumeEstimate};

use crate::error::{Error, Result};
use crate::geom::{distance, GeodesicPlane, Isometry, Point, SpaceKind};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh<T> {
    pub kind: SpaceKind,
    pub vertices: Vec<Point<T>>,
    pub labels: Vec<String>,
    pub triangles: Vec<[usize; 3]>,
}

/// Topological type of a valid mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Closed,
    /// Single boundary cycle, as a list of vertex indices in the direction
    /// induced by the orientation.
    Disk(Vec<usize>),
}

impl<T: Real> TriMesh<T> {
    pub fn new(kind: SpaceKind) -> Self {
        TriMesh { kind, vertices: Vec::new(), labels: Vec::new(), triangles: Vec::new() }
    }

    /// Adds a vertex and returns its index. Labels must be unique.
    pub fn add_vertex(&mut self, label: impl Into<String>, p: Point<T>) -> Result<usize> {
        let label = label.into();
        if p.kind != self.kind {
            return Err(Error::KindMismatch("TriMesh::add_vertex"));
        }
        if self.labels.iter().any(|l| *l == label) {
            return Err(Error::InvalidMesh(format!("duplicate vertex label `{label}`")));
        }
        self.vertices.push(p);
        self.labels.push(label);
        Ok(self.vertices.len() - 1)
    }

    pub fn add_triangle(&mut self, t: [usize; 3]) -> Result<()> {
        if t.iter().any(|&i| i >= self.vertices.len()) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::InvalidMesh(format!("bad triangle {t:?}")));
        }
        self.triangles.push(t);
        Ok(())
    }

    /// Adds a triangle given by vertex labels.
    pub fn add_face(&mut self, labels: [&str; 3]) -> Result<()> {
        let t = [self.index_of(labels[0])?, self.index_of(labels[1])?, self.index_of(labels[2])?];
        self.add_triangle(t)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn point(&self, label: &str) -> Result<Point<T>> {
        Ok(self.vertices[self.index_of(label)?])
    }

    pub fn triangle_points(&self, t: usize) -> [Point<T>; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn triangle_labels(&self, t: usize) -> [&str; 3] {
        self.triangles[t].map(|i| self.labels[i].as_str())
    }

    /// Position of the triangle with exactly these vertex labels (any rotation).
    pub fn find_triangle(&self, labels: [&str; 3]) -> Option<usize> {
        let idx: Vec<usize> = labels.iter().filter_map(|l| self.index_of(l).ok()).collect();
        if idx.len() != 3 {
            return None;
        }
        self.triangles.iter().position(|t| (0..3).any(|k| t[k] == idx[0] && t[(k + 1) % 3] == idx[1] && t[(k + 2) % 3] == idx[2]))
    }

    /// Image under an isometry; labels are kept. Orientation-reversing maps
    /// also reverse the triangles so the outside stays outside.
    pub fn transformed(&self, iso: &Isometry<T>) -> Self {
        let mut m = TriMesh {
            kind: self.kind,
            vertices: self.vertices.iter().map(|p| iso.apply(p)).collect(),
            labels: self.labels.clone(),
            triangles: self.triangles.clone(),
        };
        if iso.determinant() < T::zero() {
            m.reverse_orientation();
        }
        m
    }

    pub fn reverse_orientation(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
    }

    pub fn reversed(&self) -> Self {
        let mut m = self.clone();
        m.reverse_orientation();
        m
    }

    /// Labels with a suffix appended, for placing several copies side by side.
    pub fn relabeled(&self, f: impl Fn(&str) -> String) -> Self {
        let mut m = self.clone();
        m.labels = self.labels.iter().map(|l| f(l)).collect();
        m
    }

    /// Directed edge multiplicities.
    fn directed_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut e = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *e.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        e
    }

    /// Undirected edges with their incident triangle positions.
    pub fn edges(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut e: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                e.entry((a.min(b), a.max(b))).or_default().push(ti);
            }
        }
        e
    }

    /// Directed boundary edges (appearing in one triangle, reverse absent).
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let d = self.directed_edges();
        let mut out: Vec<(usize, usize)> = d.keys().filter(|&&(a, b)| !d.contains_key(&(b, a))).copied().collect();
        out.sort_unstable();
        out
    }

    /// Vertices referenced by at least one triangle.
    pub fn used_vertices(&self) -> Vec<usize> {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &i in t {
                used[i] = true;
            }
        }
        (0..self.vertices.len()).filter(|&i| used[i]).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.used_vertices().len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    /// Checks the combinatorial and metric invariants and classifies the mesh.
    pub fn validate(&self) -> Result<Topology> {
        if self.triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        for (p, l) in self.vertices.iter().zip(&self.labels) {
            if p.quadric_residual() > T::lit(1e-9) {
                return Err(Error::InvalidMesh(format!("vertex `{l}` is off the model quadric")));
            }
        }
        let d = self.directed_edges();
        if let Some(((a, b), _)) = d.iter().find(|(_, &n)| n > 1) {
            return Err(Error::Orientation(format!(
                "edge {}-{} is used twice in the same direction",
                self.labels[*a], self.labels[*b]
            )));
        }
        for (ti, t) in self.triangles.iter().enumerate() {
            let [p, q, r] = self.triangle_points(ti);
            for (u, v) in [(p, q), (q, r), (r, p)] {
                if distance(&u, &v)? <= T::lit(1e-9) {
                    return Err(Error::InvalidMesh(format!("triangle {:?} has coincident vertices", self.triangle_labels(ti))));
                }
            }
            if GeodesicPlane::through(&p, &q, &r).is_err() {
                return Err(Error::InvalidMesh(format!("triangle {:?} is degenerate", self.triangle_labels(ti))));
            }
            let _ = t;
        }
        let boundary = self.boundary_edges();
        if boundary.is_empty() {
            return Ok(Topology::Closed);
        }
        let mut next: HashMap<usize, usize> = HashMap::new();
        for &(a, b) in &boundary {
            if next.insert(a, b).is_some() {
                return Err(Error::InvalidMesh(format!("boundary is pinched at `{}`", self.labels[a])));
            }
        }
        let start = boundary[0].0;
        let mut cycle = vec![start];
        let mut cur = next[&start];
        while cur != start {
            cycle.push(cur);
            cur = *next
                .get(&cur)
                .ok_or_else(|| Error::InvalidMesh("boundary is not a closed cycle".into()))?;
            if cycle.len() > boundary.len() {
                return Err(Error::InvalidMesh("boundary is not a simple cycle".into()));
            }
        }
        if cycle.len() != boundary.len() {
            return Err(Error::InvalidMesh("boundary has more than one component".into()));
        }
        Ok(Topology::Disk(cycle))
    }

    pub fn require_closed(&self) -> Result<()> {
        match self.validate()? {
            Topology::Closed => Ok(()),
            Topology::Disk(c) => Err(Error::OpenSurface(format!("{} boundary edges", c.len()))),
        }
    }

    /// Copy with all vertices of `other` appended; labels must not collide.
    pub fn disjoint_union(&self, other: &TriMesh<T>) -> Result<Self> {
        let mut m = self.clone();
        let off = m.vertices.len();
        for (p, l) in other.vertices.iter().zip(&other.labels) {
            m.add_vertex(l.clone(), *p)?;
        }
        m.triangles.extend(other.triangles.iter().map(|t| t.map(|i| i + off)));
        Ok(m)
    }

    /// Drops vertices no triangle uses.
    pub fn compacted(&self) -> Self {
        let used = self.used_vertices();
        let mut map = vec![usize::MAX; self.vertices.len()];
        for (new, &old) in used.iter().enumerate() {
            map[old] = new;
        }
        TriMesh {
            kind: self.kind,
            vertices: used.iter().map(|&i| self.vertices[i]).collect(),
            labels: used.iter().map(|&i| self.labels[i].clone()).collect(),
            triangles: self.triangles.iter().map(|t| t.map(|i| map[i])).collect(),
        }
    }

    /// Subdivides triangle `t` at an interior point `p` into three triangles.
    pub fn split_triangle(&self, t: usize, label: &str, p: Point<T>) -> Result<Self> {
        let mut m = self.clone();
        let c = m.add_vertex(label, p)?;
        let [a, b, d] = m.triangles[t];
        m.triangles[t] = [a, b, c];
        m.triangles.push([b, d, c]);
        m.triangles.push([d, a, c]);
        Ok(m)
    }

    pub fn max_vertex_residual(&self, other: &TriMesh<T>) -> Result<T> {
        let mut worst = T::zero();
        for (l, p) in self.labels.iter().zip(&self.vertices) {
            worst = worst.max(distance(p, &other.point(l)?)?);
        }
        Ok(worst)
    }
}

/// Standard test shapes.
pub mod shapes {
    use super::*;

    /// Regular tetrahedron with circumradius `rho` centred at the origin,
    /// outward orientation.
    pub fn regular_tetrahedron(kind: SpaceKind, rho: f64) -> TriMesh<f64> {
        let dirs = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        let mut m = TriMesh::new(kind);
        for (i, d) in dirs.iter().enumerate() {
            m.add_vertex(format!("v{i}"), Point::from_polar(kind, *d, rho)).unwrap();
        }
        for t in [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]] {
            m.add_triangle(t).unwrap();
        }
        m
    }

    /// Geodesic icosphere of radius `rho`: an icosahedron subdivided `level`
    /// times with vertices pushed out radially.
    pub fn icosphere(kind: SpaceKind, rho: f64, level: usize) -> TriMesh<f64> {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let mut dirs: Vec<[f64; 3]> = vec![
            [-1.0, g, 0.0], [1.0, g, 0.0], [-1.0, -g, 0.0], [1.0, -g, 0.0],
            [0.0, -1.0, g], [0.0, 1.0, g], [0.0, -1.0, -g], [0.0, 1.0, -g],
            [g, 0.0, -1.0], [g, 0.0, 1.0], [-g, 0.0, -1.0], [-g, 0.0, 1.0],
        ];
        let mut tris: Vec<[usize; 3]> = vec![
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ];
        for _ in 0..level {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(tris.len() * 4);
            for t in &tris {
                let mut m = [0usize; 3];
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    m[k] = *mid.entry(key).or_insert_with(|| {
                        let (p, q) = (dirs[a], dirs[b]);
                        let np = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                        let nq = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                        dirs.push(std::array::from_fn(|i| p[i] / np + q[i] / nq));
                        dirs.len() - 1
                    });
                }
                next.push([t[0], m[0], m[2]]);
                next.push([t[1], m[1], m[0]]);
                next.push([t[2], m[2], m[1]]);
                next.push([m[0], m[1], m[2]]);
            }
            tris = next;
        }
        let mut m = TriMesh::new(kind);
        for (i, d) in dirs.iter().enumerate() {
            m.add_vertex(format!("v{i}"), Point::from_polar(kind, *d, rho)).unwrap();
        }
        m.triangles = tris;
        m
    }
}

#[cfg(test)]
mod tests {
    use super::shapes::*;
    use super::*;

    #[test]
    fn tetrahedron_topology() {
        for kind in [SpaceKind::Hyperbolic, SpaceKind::Spherical] {
            let m = regular_tetrahedron(kind, 0.5);
            assert_eq!(m.validate().unwrap(), Topology::Closed);
            assert_eq!(m.euler_characteristic(), 2);
            assert_eq!(m.edges().len() * 2, 3 * m.triangles.len());
        }
    }

    #[test]
    fn disk_boundary_cycle() {
        let mut m = regular_tetrahedron(SpaceKind::Hyperbolic, 0.5);
        m.triangles.pop();
        match m.validate().unwrap() {
            Topology::Disk(c) => assert_eq!(c.len(), 3),
            t => panic!("expected disk, got {t:?}"),
        }
        assert!(matches!(m.require_closed(), Err(Error::OpenSurface(_))));
    }

    #[test]
    fn rejects_bad_meshes() {
        let mut m = regular_tetrahedron(SpaceKind::Hyperbolic, 0.5);
        m.triangles[0].swap(1, 2);
        assert!(matches!(m.validate(), Err(Error::Orientation(_))));
        let mut m = regular_tetrahedron(SpaceKind::Hyperbolic, 0.5);
        assert!(m.add_vertex("v0", Point::origin(SpaceKind::Hyperbolic)).is_err());
        assert!(m.add_triangle([0, 0, 1]).is_err());
        assert!(matches!(m.index_of("nope"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn icosphere_is_closed() {
        let m = icosphere(SpaceKind::Hyperbolic, 1.0, 2);
        assert_eq!(m.validate().unwrap(), Topology::Closed);
        assert_eq!(m.triangles.len(), 320);
        assert_eq!(m.euler_characteristic(), 2);
    }
}
