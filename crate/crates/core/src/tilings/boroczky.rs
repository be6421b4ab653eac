//! Böröczky's tiling in upper half-space coordinates `(x, y, h)`.
//!
//! The horospheres `Σ_k` are the planes `h = 2^k`, so consecutive ones are
//! `ln 2` apart. `ψ` and `χ` translate by 1 along `x` and `y`, and `φ`
//! halves all coordinates, carrying `Σ_{k+1}` onto `Σ_k`. The cell `κ`
//! sits between `Σ_0` and `Σ_1`: its top is one grid square of `Σ_1`, its
//! bottom the four grid squares of `Σ_0` underneath, and its sides are
//! vertical pentagons.

use serde::{Deserialize, Serialize};

use super::{bump_and_dent, Cell, CellBuilder, Placement, TileWindow};
use crate::construction::{build_checked_member, FamilyParams};
use crate::error::{Error, Result};
use crate::geom::{chart_from, distance, isometry_from_point_correspondence, Chart, ChartKind, Isometry, Point, SpaceKind};

const KIND: SpaceKind = SpaceKind::Hyperbolic;

/// Largest generator exponent accepted in a window.
pub const MAX_EXPONENT: i32 = 8;

/// Point with upper half-space coordinates `(x, y, h)`.
pub fn uhs(x: f64, y: f64, h: f64) -> Point<f64> {
    chart_from([x, y, h], &Chart::new(ChartKind::UpperHalfSpace), KIND).expect("h > 0")
}

/// Generators of the tiling.
#[derive(Debug, Clone, Copy)]
pub struct BoroczkyFrame {
    pub phi: Isometry<f64>,
    pub psi: Isometry<f64>,
    pub chi: Isometry<f64>,
}

fn from_map(f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Isometry<f64>> {
    let src = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 2.0]];
    let to = |x: [f64; 3]| uhs(x[0], x[1], x[2]);
    isometry_from_point_correspondence(&src.map(to), &src.map(|x| to(f(x))), 1e-12)
}

/// `iso` composed with itself `n` times (inverse for negative `n`).
pub fn power(iso: &Isometry<f64>, n: i32) -> Isometry<f64> {
    let step = if n < 0 { iso.inverse() } else { *iso };
    (0..n.unsigned_abs()).fold(Isometry::identity(iso.kind), |acc, _| acc.compose(&step))
}

impl BoroczkyFrame {
    pub fn new() -> Result<Self> {
        Ok(BoroczkyFrame {
            phi: from_map(|x| x.map(|c| c / 2.0))?,
            psi: from_map(|[x, y, h]| [x + 1.0, y, h])?,
            chi: from_map(|[x, y, h]| [x, y + 1.0, h])?,
        })
    }

    /// Grid corners of `Σ_0` around the unit square at the origin.
    pub fn base_square(&self) -> [Point<f64>; 4] {
        [uhs(0.0, 0.0, 1.0), uhs(0.0, 1.0, 1.0), uhs(1.0, 1.0, 1.0), uhs(1.0, 0.0, 1.0)]
    }

    /// `A_k`, the point of the axis `x = y = 0` on `Σ_k`.
    pub fn a(&self, k: i32) -> Point<f64> {
        power(&self.phi, -k).apply(&self.base_square()[0])
    }

    /// `φ^k ψ^{2p} χ^{2q}`: the placement of cell `(k, p, q)`.
    pub fn word(&self, k: i32, p: i32, q: i32) -> Isometry<f64> {
        power(&self.phi, k).compose(&power(&self.psi, 2 * p)).compose(&power(&self.chi, 2 * q))
    }

    /// The 13 labeled vertices of the cell.
    pub fn cell_vertices(&self) -> Vec<(String, Point<f64>)> {
        let [a0, b0, c0, d0] = self.base_square();
        let up = self.phi.inverse();
        let (psi, chi) = (&self.psi, &self.chi);
        vec![
            ("A1".into(), up.apply(&a0)),
            ("B1".into(), up.apply(&b0)),
            ("C1".into(), up.apply(&c0)),
            ("D1".into(), up.apply(&d0)),
            ("A0".into(), a0),
            ("B0".into(), b0),
            ("C0".into(), c0),
            ("D0".into(), d0),
            ("psiC0".into(), psi.apply(&c0)),
            ("psiD0".into(), psi.apply(&d0)),
            ("chiB0".into(), chi.apply(&b0)),
            ("chiC0".into(), chi.apply(&c0)),
            ("chipsiC0".into(), chi.apply(&psi.apply(&c0))),
        ]
    }

    /// Largest coordinate difference between `ψχ` and `χψ`, as matrices and
    /// on the cell vertices.
    pub fn commutator_residual(&self) -> f64 {
        let pc = self.psi.compose(&self.chi);
        let cp = self.chi.compose(&self.psi);
        let on_points = self
            .cell_vertices()
            .iter()
            .map(|(_, p)| pc.apply(p).coords.max_abs_diff(&cp.apply(p).coords))
            .fold(0.0, f64::max);
        pc.max_abs_diff(&cp).max(on_points)
    }

    /// Horocyclic length on `Σ_0` of `A_0 ψ(D_0)` minus twice that of
    /// `A_0 D_0`. Horocyclic length is `2 sinh(d/2)` for chord distance `d`.
    pub fn doubling_residual(&self) -> Result<f64> {
        let [a0, _, _, d0] = self.base_square();
        let horo = |p: &Point<f64>, q: &Point<f64>| -> Result<f64> { Ok(2.0 * (distance(p, q)? / 2.0).sinh()) };
        Ok((horo(&a0, &self.psi.apply(&d0))? - 2.0 * horo(&a0, &d0)?).abs())
    }
}

fn builder(frame: &BoroczkyFrame) -> Result<CellBuilder> {
    let mut b = CellBuilder::new(KIND, &frame.cell_vertices(), uhs(1.0, 1.0, 1.5))?;
    // The first vertex of each face is its fan centre; the bottom squares
    // are split along the diagonal that the layer below uses for its tops.
    let faces: [(&str, &[&str]); 9] = [
        ("top", &["A1", "D1", "C1", "B1"]),
        ("bottom00", &["A0", "D0", "C0", "B0"]),
        ("bottom10", &["D0", "psiD0", "psiC0", "C0"]),
        ("bottom01", &["B0", "C0", "chiC0", "chiB0"]),
        ("bottom11", &["C0", "psiC0", "chipsiC0", "chiC0"]),
        ("x0", &["A1", "A0", "B0", "chiB0", "B1"]),
        ("x2", &["D1", "psiD0", "psiC0", "chipsiC0", "C1"]),
        ("y0", &["A1", "A0", "D0", "psiD0", "D1"]),
        ("y2", &["B1", "chiB0", "chiC0", "chipsiC0", "C1"]),
    ];
    for (name, labels) in faces {
        b.face(name, labels)?;
    }
    Ok(b)
}

/// The reference cell `κ`.
pub fn boroczky_cell(frame: &BoroczkyFrame) -> Result<Cell> {
    builder(frame)?.finish("kappa", Vec::new())
}

/// `κ` with a copy of the family surface at `r` glued outward on the face
/// `x = 0` and its `ψ²` image pressed inward on the face `x = 2`.
pub fn modified_boroczky_cell(frame: &BoroczkyFrame, family: &FamilyParams, r: f64, margin: f64) -> Result<Cell> {
    if family.kind != KIND {
        return Err(Error::KindMismatch("modified_boroczky_cell needs a hyperbolic family"));
    }
    let surface = build_checked_member::<f64>(family, r)?.surface;
    let mut b = builder(frame)?;
    let face = b.cycle("x0")?.to_vec();
    let map = power(&frame.psi, 2);
    let at = Placement { face: &face, anchor: uhs(0.0, 1.0, 1.5), map: &map, margin, avoid: &[] };
    let (bump, dent) = bump_and_dent(&mut b, &surface, &at)?;
    let cell = b.finish("kappa", vec![("x0".into(), bump), ("x2".into(), dent)])?;
    cell.check()?;
    Ok(cell)
}

/// Half-open exponent ranges `[start, end)` of a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window3 {
    pub k: [i32; 2],
    pub p: [i32; 2],
    pub q: [i32; 2],
}

impl Window3 {
    pub fn cube(n: i32) -> Self {
        Window3 { k: [0, n], p: [0, n], q: [0, n] }
    }

    pub fn words(&self) -> Result<Vec<(i32, i32, i32)>> {
        for r in [self.k, self.p, self.q] {
            if r.iter().any(|e| e.abs() > MAX_EXPONENT) {
                return Err(Error::Domain {
                    op: "boroczky_window",
                    detail: format!("exponents beyond {MAX_EXPONENT} lose precision near the ideal boundary"),
                });
            }
        }
        let mut out = Vec::new();
        for k in self.k[0]..self.k[1] {
            for p in self.p[0]..self.p[1] {
                for q in self.q[0]..self.q[1] {
                    out.push((k, p, q));
                }
            }
        }
        Ok(out)
    }

    /// Number of face pairs shared by cells of the window: side neighbours
    /// within a layer, and the four cells of layer `k + 1` under each cell of
    /// layer `k`.
    pub fn expected_adjacencies(&self) -> Result<usize> {
        let words = self.words()?;
        let has = |w: (i32, i32, i32)| words.contains(&w);
        let mut n = 0;
        for &(k, p, q) in &words {
            n += usize::from(has((k, p + 1, q))) + usize::from(has((k, p, q + 1)));
            for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                n += usize::from(has((k + 1, 2 * p + a, 2 * q + b)));
            }
        }
        Ok(n)
    }
}

/// Cells `φ^k ψ^{2p} χ^{2q}(base)` over the window, with matched faces.
pub fn boroczky_window(frame: &BoroczkyFrame, base: &Cell, window: &Window3) -> Result<TileWindow> {
    let cells = window
        .words()?
        .into_iter()
        .map(|(k, p, q)| base.transformed(&frame.word(k, p, q), format!("phi^{k}.psi^{}.chi^{}", 2 * p, 2 * q)))
        .collect();
    TileWindow::new(KIND, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::dihedral_deviation;
    use crate::tilings::TileFamily;

    #[test]
    fn frame_relations() {
        let f = BoroczkyFrame::new().unwrap();
        for k in -3..3 {
            assert!((distance(&f.a(k), &f.a(k + 1)).unwrap() - 2f64.ln()).abs() < 1e-12);
            assert!(f.phi.apply(&f.a(k + 1)).coords.max_abs_diff(&f.a(k).coords) < 1e-12);
        }
        let [a0, b0, c0, d0] = f.base_square();
        let close = |p: Point<f64>, q: Point<f64>| p.coords.max_abs_diff(&q.coords) < 1e-12;
        assert!(close(f.psi.apply(&a0), d0) && close(f.psi.apply(&b0), c0));
        assert!(close(f.chi.apply(&a0), b0) && close(f.chi.apply(&d0), c0));
        assert!(f.commutator_residual() < 1e-12);
        assert!(f.doubling_residual().unwrap() < 1e-12);
    }

    #[test]
    fn reference_cell() {
        let f = BoroczkyFrame::new().unwrap();
        let c = boroczky_cell(&f).unwrap();
        assert_eq!(c.mesh.vertices.len(), 13);
        assert_eq!(c.mesh.triangles.len(), 22);
        c.check().unwrap();
        let w = crate::mesh::winding_number(&c.mesh, &c.inside).unwrap();
        assert!((w - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_cell_window_shares_a_face() {
        let f = BoroczkyFrame::new().unwrap();
        let c = boroczky_cell(&f).unwrap();
        let single = boroczky_window(&f, &c, &Window3::cube(1)).unwrap();
        assert!(single.adjacency.is_empty());
        let w = boroczky_window(&f, &c, &Window3 { k: [0, 1], p: [0, 1], q: [0, 2] }).unwrap();
        assert_eq!(w.adjacency.len(), 1);
        assert!(w.adjacency[0].residual < 1e-12);
        assert_eq!(w.adjacency[0].face_name, "y2");
        assert_eq!(w.adjacency[0].neighbor_face_name, "y0");
        let big = boroczky_window(&f, &c, &Window3::cube(2)).unwrap();
        assert_eq!(big.adjacency.len(), 12);
        assert_eq!(Window3::cube(2).expected_adjacencies().unwrap(), 12);
        let odd = Window3 { k: [-1, 1], p: [-1, 1], q: [0, 2] };
        let w = boroczky_window(&f, &c, &odd).unwrap();
        assert_eq!(w.adjacency.len(), odd.expected_adjacencies().unwrap());
        assert!(w.is_consistent());
        assert!(big.is_consistent() && big.max_residual() < 1e-9);
        assert!(big.congruence_residual().unwrap() < 1e-9);
        assert!(boroczky_window(&f, &c, &Window3 { k: [0, 9], p: [0, 1], q: [0, 1] }).is_err());
        assert!(boroczky_window(&f, &c, &Window3 { k: [1, 1], p: [0, 1], q: [0, 1] }).unwrap().cells.is_empty());
    }

    fn in_box(lo: [f64; 3], hi: [f64; 3]) -> impl Fn(&mut rand_chacha::ChaCha8Rng) -> Point<f64> {
        use rand::Rng;
        move |rng| uhs(rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1]), rng.gen_range(lo[2]..hi[2]))
    }

    #[test]
    fn window_interior_is_covered_once() {
        let f = BoroczkyFrame::new().unwrap();
        let TileFamily { family: fam, margin } = TileFamily::default_for(KIND);
        for cell in [boroczky_cell(&f).unwrap(), modified_boroczky_cell(&f, &fam, fam.r_max, margin).unwrap()] {
            let w = boroczky_window(&f, &cell, &Window3::cube(2)).unwrap();
            let (counts, frac) = w.coverage(300, 3, in_box([0.05, 0.05, 0.65], [1.95, 1.95, 1.9])).unwrap();
            assert!(counts.iter().all(|&c| c == 1) && frac < 1e-6);
            // Around the bump of the second cell, which pushes into the first.
            let (counts, frac) = w.coverage(300, 4, in_box([1.8, 0.8, 1.3], [2.2, 1.2, 1.7])).unwrap();
            assert!(counts.iter().all(|&c| c == 1) && frac < 1e-6);
        }
    }

    #[test]
    fn modified_cells_tile() {
        let f = BoroczkyFrame::new().unwrap();
        let TileFamily { family: fam, margin } = TileFamily::default_for(SpaceKind::Hyperbolic);
        let c0 = boroczky_cell(&f).unwrap();
        let v0 = c0.volume(1e-8).unwrap();
        let mut meshes = Vec::new();
        for r in [fam.r_min, 0.5 * (fam.r_min + fam.r_max), fam.r_max] {
            let c = modified_boroczky_cell(&f, &fam, r, margin).unwrap();
            let w = boroczky_window(&f, &c, &Window3::cube(2)).unwrap();
            assert_eq!(w.adjacency.len(), 12, "{:?}", w.mismatches);
            assert!(w.is_consistent() && w.max_residual() < 1e-9);
            assert!((c.volume(1e-8).unwrap() - v0).abs() < 1e-6);
            meshes.push(c.mesh);
        }
        assert!(dihedral_deviation(&meshes[0], &meshes[2]).unwrap() < 1e-9);
        assert_eq!(meshes[0].vertices.len(), 13 + 2 * 10);
        // The patch itself does change shape.
        assert!(meshes[0].max_vertex_residual(&meshes[2]).unwrap() > 1e-4);
    }
}
