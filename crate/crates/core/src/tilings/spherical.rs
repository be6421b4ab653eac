//! Twelve-cell tiling of the 3-sphere.
//!
//! The faces of the cube inscribed in the great sphere `w = 0` project to
//! six spherical squares `T_j`. Coning each one to the poles `N` and `S`
//! gives the cells `T^N_j` and `T^S_j`; the second is the image of the first
//! under the point reflection `σ_j` at the square's centre `O_j`.

use super::{bump_and_dent, Cell, CellBuilder, Placement, TileWindow};
use crate::construction::{build_checked_member, FamilyParams};
use crate::error::{Error, Result};
use crate::geom::{barycenter, Isometry, Point, SpaceKind, Vec4};

const KIND: SpaceKind = SpaceKind::Spherical;

fn cube_vertex(x: f64, y: f64, z: f64) -> Point<f64> {
    let s = 1.0 / 3f64.sqrt();
    Point::new(Vec4::new(x * s, y * s, z * s, 0.0), KIND).expect("unit vector")
}

pub fn north() -> Point<f64> {
    Point::origin(KIND)
}

/// Centre `O_1` of the square `T_1` on the face `z = 1`.
pub fn o1() -> Point<f64> {
    Point::new(Vec4::new(0.0, 0.0, 1.0, 0.0), KIND).expect("unit vector")
}

/// Rotations `φ_j` fixing both poles, taking `T_1` to `T_j`.
pub fn cube_rotations() -> [Isometry<f64>; 6] {
    use std::f64::consts::{FRAC_PI_2, PI};
    let rot = |i, j, a| Isometry::rotation(KIND, i, j, a);
    [Isometry::identity(KIND), rot(0, 2, -FRAC_PI_2), rot(0, 2, FRAC_PI_2), rot(1, 2, -FRAC_PI_2), rot(1, 2, FRAC_PI_2), rot(0, 2, PI)]
}

fn builder() -> Result<CellBuilder> {
    let vertices = vec![
        ("N".to_string(), north()),
        ("v0".to_string(), cube_vertex(1.0, 1.0, 1.0)),
        ("v1".to_string(), cube_vertex(-1.0, 1.0, 1.0)),
        ("v2".to_string(), cube_vertex(-1.0, -1.0, 1.0)),
        ("v3".to_string(), cube_vertex(1.0, -1.0, 1.0)),
    ];
    let pts: Vec<Point<f64>> = vertices.iter().map(|v| v.1).collect();
    let mut b = CellBuilder::new(KIND, &vertices, barycenter(&pts)?)?;
    b.face("square", &["v0", "v1", "v2", "v3"])?;
    for k in 0..4 {
        let (p, q) = (format!("v{k}"), format!("v{}", (k + 1) % 4));
        b.face(&format!("side{k}"), &["N", &p, &q])?;
    }
    Ok(b)
}

/// The twelve cells `φ_j(T^N_1)` and `φ_j σ_1 (T^N_1)` built from `north`.
fn place(north_cell: &Cell) -> Result<TileWindow> {
    let sigma = Isometry::point_reflection(&o1());
    let south = north_cell.transformed(&sigma, "sigma");
    let mut cells = Vec::new();
    for (j, phi) in cube_rotations().iter().enumerate() {
        cells.push(north_cell.transformed(phi, format!("phi{}.N", j + 1)));
        cells.push(south.transformed(phi, format!("phi{}.S", j + 1)));
    }
    TileWindow::new(KIND, cells)
}

pub fn spherical_12_tiling() -> Result<TileWindow> {
    place(&builder()?.finish("N", Vec::new())?)
}

/// `T^N_1` with the family surface at `r` glued outward on the half of
/// `T_1` beyond the diagonal `v0 v2`, and its `σ_1` image pressed inward
/// on the other half.
fn modified_north(family: &FamilyParams, r: f64, margin: f64) -> Result<Cell> {
    if family.kind != KIND {
        return Err(Error::KindMismatch("modified spherical cells need a spherical family"));
    }
    let surface = build_checked_member::<f64>(family, r)?.surface;
    let mut b = builder()?;
    let square = b.cycle("square")?.to_vec();
    let half = [square[0], square[1], square[2]];
    let anchor = barycenter(&half.map(|i| b.mesh.vertices[i]))?;
    let sigma = Isometry::point_reflection(&o1());
    let avoid = [o1()];
    let at = Placement { face: &half, anchor, map: &sigma, margin, avoid: &avoid };
    let (mut tris, dent) = bump_and_dent(&mut b, &surface, &at)?;
    tris.extend(dent);
    let cell = b.finish("N", vec![("square".into(), tris)])?;
    cell.check()?;
    Ok(cell)
}

/// The modified pair `(T̄^N_j, T̄^S_j)` for `j` in `1..=6`.
pub fn modified_spherical_cell(family: &FamilyParams, r: f64, j: usize, margin: f64) -> Result<(Cell, Cell)> {
    if !(1..=6).contains(&j) {
        return Err(Error::Domain { op: "modified_spherical_cell", detail: format!("cell index {j} is not in 1..=6") });
    }
    let n = modified_north(family, r, margin)?;
    let s = n.transformed(&Isometry::point_reflection(&o1()), "sigma");
    let phi = cube_rotations()[j - 1];
    Ok((n.transformed(&phi, format!("phi{j}.N")), s.transformed(&phi, format!("phi{j}.S"))))
}

pub fn modified_spherical_tiling(family: &FamilyParams, r: f64, margin: f64) -> Result<TileWindow> {
    place(&modified_north(family, r, margin)?)
}

/// Largest vertex distance between `σ_j` of the north cell and the south
/// cell, matched by label.
pub fn central_symmetry_residual(north_cell: &Cell, south_cell: &Cell, j: usize) -> Result<f64> {
    let centre = cube_rotations()[j - 1].apply(&o1());
    let image = north_cell.mesh.transformed(&Isometry::point_reflection(&centre));
    image.max_vertex_residual(&south_cell.mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::dihedral_deviation;
    use crate::tilings::{random_s3_point, TileFamily};
    use std::f64::consts::PI;

    #[test]
    fn rotations_fix_the_poles_and_permute_the_faces() {
        let s = Point::new(Vec4::new(0.0, 0.0, 0.0, -1.0), KIND).unwrap();
        let mut centres = Vec::new();
        for phi in cube_rotations() {
            assert!(phi.apply(&north()).coords.max_abs_diff(&north().coords) < 1e-15);
            assert!(phi.apply(&s).coords.max_abs_diff(&s.coords) < 1e-15);
            let c = phi.apply(&o1()).coords.0.map(|x| x.round() as i32);
            centres.push(c);
        }
        centres.sort();
        centres.dedup();
        assert_eq!(centres.len(), 6);
    }

    #[test]
    fn twelve_cells_tile() {
        let t = spherical_12_tiling().unwrap();
        assert_eq!(t.cells.len(), 12);
        assert!(t.is_closed_tiling(), "{:?}", t.mismatches);
        assert_eq!(t.adjacency.len(), 30);
        assert!(t.max_residual() < 1e-12);
        assert!(t.congruence_residual().unwrap() < 1e-12);
        let vols = t.volumes(1e-8).unwrap();
        for v in &vols {
            assert!((v - PI * PI / 6.0).abs() < 1e-7, "{v}");
        }
        let (counts, frac) = t.coverage(200, 7, random_s3_point).unwrap();
        assert!(counts.iter().all(|&c| c == 1));
        assert!(frac < 1e-6);
        for j in 1..=6 {
            let (n, s) = (&t.cells[2 * j - 2], &t.cells[2 * j - 1]);
            assert!(central_symmetry_residual(n, s, j).unwrap() < 1e-12);
        }
    }

    #[test]
    fn modified_cells_tile() {
        let TileFamily { family, margin } = TileFamily::default_for(KIND);
        let mut meshes = Vec::new();
        for r in [family.r_min, family.r_max] {
            let t = modified_spherical_tiling(&family, r, margin).unwrap();
            assert!(t.is_closed_tiling(), "{:?}", t.mismatches);
            assert!(t.max_residual() < 1e-9);
            let total: f64 = t.volumes(1e-8).unwrap().iter().sum();
            assert!((total - 2.0 * PI * PI).abs() < 1e-6);
            meshes.push(t.cells[0].mesh.clone());
        }
        assert!(dihedral_deviation(&meshes[0], &meshes[1]).unwrap() < 1e-9);
        let (n, s) = modified_spherical_cell(&family, family.r_min, 3, margin).unwrap();
        assert!(central_symmetry_residual(&n, &s, 3).unwrap() < 1e-12);
        assert!(modified_spherical_cell(&family, family.r_min, 7, margin).is_err());
    }
}
