//! Tilings by congruent cells whose shapes can be deformed without changing
//! any dihedral angle: Böröczky's tiling of hyperbolic space and a 12-cell
//! tiling of the 3-sphere.
//!
//! A cell is a closed mesh whose triangles are grouped by the flat polygon
//! they triangulate. Tiling checks are window-local: every pair of cells is
//! scanned for face groups that sit on top of each other, and those must
//! agree triangle by triangle with opposite orientation.

mod boroczky;
mod spherical;

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use boroczky::{boroczky_cell, boroczky_window, modified_boroczky_cell, power, uhs, BoroczkyFrame, Window3};
pub use spherical::{
    central_symmetry_residual, cube_rotations, modified_spherical_cell, modified_spherical_tiling, spherical_12_tiling,
};

use crate::construction::FamilyParams;
use crate::error::{Error, Result};
use crate::geom::{barycenter, bilinear, distance, Chart, GeodesicPlane, Isometry, Point, SpaceKind, Vec4};
use crate::mesh::triangulate::{annulus, fan};
use crate::construction::dihedral_deviation;
use crate::mesh::{enclosed_volume, export_mesh, self_intersects, winding_number, TriMesh};

/// Largest vertex mismatch accepted when two faces are identified.
pub const MATCH_TOL: f64 = 1e-9;

/// Triangles of one flat polygonal face, as positions in the cell mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceGroup {
    pub name: String,
    pub triangles: Vec<usize>,
}

/// A placed tile.
#[derive(Debug, Clone)]
pub struct Cell {
    /// Word in the generators that places this cell.
    pub word: String,
    pub mesh: TriMesh<f64>,
    pub groups: Vec<FaceGroup>,
    /// A point strictly inside the cell.
    pub inside: Point<f64>,
}

impl Cell {
    /// Image under `iso`; triangle positions and groups are kept.
    pub fn transformed(&self, iso: &Isometry<f64>, word: impl Into<String>) -> Cell {
        Cell { word: word.into(), mesh: self.mesh.transformed(iso), groups: self.groups.clone(), inside: iso.apply(&self.inside) }
    }

    pub fn group(&self, name: &str) -> Option<&FaceGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    fn group_vertices(&self, g: &FaceGroup) -> Vec<usize> {
        let set: BTreeSet<usize> = g.triangles.iter().flat_map(|&t| self.mesh.triangles[t]).collect();
        set.into_iter().collect()
    }

    /// Closedness, sphere topology and embeddedness.
    pub fn check(&self) -> Result<()> {
        self.mesh.require_closed()?;
        if self.mesh.euler_characteristic() != 2 {
            return Err(Error::InvalidMesh(format!("cell `{}` is not a sphere", self.word)));
        }
        let covered: usize = self.groups.iter().map(|g| g.triangles.len()).sum();
        if covered != self.mesh.triangles.len() {
            return Err(Error::InvalidMesh(format!("cell `{}` has ungrouped triangles", self.word)));
        }
        let report = self_intersects(&self.mesh, 1e-9)?;
        if report.intersects {
            return Err(Error::Margin(format!("cell `{}` intersects itself", self.word)));
        }
        Ok(())
    }

    pub fn volume(&self, tol: f64) -> Result<f64> {
        enclosed_volume(&self.mesh, tol)
    }
}

/// Two faces of distinct cells identified in the tiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Adjacency {
    pub cell: String,
    pub face: usize,
    pub face_name: String,
    pub neighbor: String,
    pub neighbor_face: usize,
    pub neighbor_face_name: String,
    pub residual: f64,
}

/// Placed cells together with their matched faces.
#[derive(Debug, Clone)]
pub struct TileWindow {
    pub kind: SpaceKind,
    pub cells: Vec<Cell>,
    pub adjacency: Vec<Adjacency>,
    /// Face pairs that overlap but do not match triangle by triangle.
    pub mismatches: Vec<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Manifest<'a> {
    kind: SpaceKind,
    cells: Vec<ManifestCell>,
    adjacency: &'a [Adjacency],
    mismatches: &'a [String],
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ManifestCell {
    word: String,
    file: String,
    vertices: usize,
    triangles: usize,
    faces: Vec<String>,
}

impl TileWindow {
    /// Places `cells` and matches their faces.
    pub fn new(kind: SpaceKind, cells: Vec<Cell>) -> Result<Self> {
        let (adjacency, mismatches) = match_faces(&cells)?;
        Ok(TileWindow { kind, cells, adjacency, mismatches })
    }

    pub fn max_residual(&self) -> f64 {
        self.adjacency.iter().map(|a| a.residual).fold(0.0, f64::max)
    }

    /// How often each (cell, face) occurs in the adjacency list.
    pub fn face_multiplicity(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.cells.iter().map(|c| vec![0; c.groups.len()]).collect();
        let pos = |w: &str| self.cells.iter().position(|c| c.word == w).expect("adjacency names a window cell");
        for a in &self.adjacency {
            out[pos(&a.cell)][a.face] += 1;
            out[pos(&a.neighbor)][a.neighbor_face] += 1;
        }
        out
    }

    /// Every face of every cell matched exactly once, and no mismatches.
    pub fn is_closed_tiling(&self) -> bool {
        self.mismatches.is_empty() && self.face_multiplicity().iter().flatten().all(|&n| n == 1)
    }

    /// Faces matched at most once, and no mismatches.
    pub fn is_consistent(&self) -> bool {
        self.mismatches.is_empty() && self.face_multiplicity().iter().flatten().all(|&n| n <= 1)
    }

    /// Largest distance-spectrum difference between each cell and the first.
    pub fn congruence_residual(&self) -> Result<f64> {
        let Some(first) = self.cells.first() else { return Ok(0.0) };
        self.cells.iter().map(|c| distance_spectrum_residual(&first.mesh, &c.mesh)).try_fold(0.0, |a, r| Ok(f64::max(a, r?)))
    }

    pub fn volumes(&self, tol: f64) -> Result<Vec<f64>> {
        self.cells.par_iter().map(|c| c.volume(tol)).collect()
    }

    /// Samples `n` points and counts the cells containing each one. Returns
    /// the per-point counts (rounded winding sums) and the largest distance
    /// of any winding number from an integer.
    pub fn coverage<F>(&self, n: usize, seed: u64, sample: F) -> Result<(Vec<i64>, f64)>
    where
        F: Fn(&mut ChaCha8Rng) -> Point<f64>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Point<f64>> = (0..n).map(|_| sample(&mut rng)).collect();
        let per: Vec<(i64, f64)> = pts
            .par_iter()
            .map(|p| {
                let mut count = 0i64;
                let mut worst = 0.0f64;
                for c in &self.cells {
                    let w = winding_number(&c.mesh, p)?;
                    worst = worst.max((w - w.round()).abs());
                    count += w.round() as i64;
                }
                Ok((count, worst))
            })
            .collect::<Result<_>>()?;
        Ok((per.iter().map(|x| x.0).collect(), per.iter().map(|x| x.1).fold(0.0, f64::max)))
    }

    /// JSON listing of the cells and their matched faces.
    pub fn manifest_json(&self) -> Result<String> {
        let cells = self
            .cells
            .iter()
            .map(|c| ManifestCell {
                word: c.word.clone(),
                file: format!("{}.off", file_stem(&c.word)),
                vertices: c.mesh.vertices.len(),
                triangles: c.mesh.triangles.len(),
                faces: c.groups.iter().map(|g| g.name.clone()).collect(),
            })
            .collect();
        let manifest = Manifest { kind: self.kind, cells, adjacency: &self.adjacency, mismatches: &self.mismatches };
        Ok(serde_json::to_string_pretty(&manifest)? + "\n")
    }

    /// One OFF file per cell and `manifest.json`, each written atomically.
    pub fn export(&self, dir: &Path, chart: &Chart<f64>) -> Result<()> {
        for c in &self.cells {
            export_mesh(&c.mesh, chart, &dir.join(format!("{}.off", file_stem(&c.word))))?;
        }
        crate::mesh::write_atomic(&dir.join("manifest.json"), &self.manifest_json()?)
    }
}

/// File-name-safe form of a generator word.
pub fn file_stem(word: &str) -> String {
    let s: String = word.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    format!("cell_{s}")
}

/// Largest difference of pairwise vertex distances between meshes with the
/// same labels.
pub fn distance_spectrum_residual(a: &TriMesh<f64>, b: &TriMesh<f64>) -> Result<f64> {
    if a.labels.len() != b.labels.len() {
        return Err(Error::Congruence { residual: f64::INFINITY });
    }
    let map: Vec<usize> = a.labels.iter().map(|l| b.index_of(l)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for i in 0..a.vertices.len() {
        for j in (i + 1)..a.vertices.len() {
            let da = distance(&a.vertices[i], &a.vertices[j])?;
            let db = distance(&b.vertices[map[i]], &b.vertices[map[j]])?;
            worst = worst.max((da - db).abs());
        }
    }
    Ok(worst)
}

/// Largest dihedral change across a list of meshes of one cell.
pub fn dihedral_spread(meshes: &[TriMesh<f64>]) -> Result<f64> {
    let Some(first) = meshes.first() else { return Ok(0.0) };
    meshes.iter().map(|m| dihedral_deviation(first, m)).try_fold(0.0, |a, r| Ok(f64::max(a, r?)))
}

fn match_faces(cells: &[Cell]) -> Result<(Vec<Adjacency>, Vec<String>)> {
    // Per group: vertex indices and a centroid for the coarse test.
    let summaries: Vec<Vec<(Vec<usize>, Point<f64>)>> = cells
        .iter()
        .map(|c| {
            c.groups
                .iter()
                .map(|g| {
                    let vs = c.group_vertices(g);
                    let pts: Vec<Point<f64>> = vs.iter().map(|&i| c.mesh.vertices[i]).collect();
                    Ok((vs, barycenter(&pts)?))
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|i| ((i + 1)..cells.len()).map(move |j| (i, j))).collect();
    let found: Vec<(Vec<Adjacency>, Vec<String>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (ci, cj) = (&cells[i], &cells[j]);
            let mut adj = Vec::new();
            let mut bad = Vec::new();
            for (gi, g) in ci.groups.iter().enumerate() {
                for (gj, h) in cj.groups.iter().enumerate() {
                    let (vi, pi) = &summaries[i][gi];
                    let (vj, pj) = &summaries[j][gj];
                    if vi.len() != vj.len() || distance(pi, pj)? > 1e-6 {
                        continue;
                    }
                    match match_groups(ci, g, cj, h)? {
                        Some(residual) if residual < MATCH_TOL => adj.push(Adjacency {
                            cell: ci.word.clone(),
                            face: gi,
                            face_name: g.name.clone(),
                            neighbor: cj.word.clone(),
                            neighbor_face: gj,
                            neighbor_face_name: h.name.clone(),
                            residual,
                        }),
                        other => bad.push(format!(
                            "{}:{} vs {}:{} ({})",
                            ci.word,
                            g.name,
                            cj.word,
                            h.name,
                            other.map_or("triangulations differ".to_string(), |r| format!("residual {r:.3e}"))
                        )),
                    }
                }
            }
            Ok((adj, bad))
        })
        .collect::<Result<_>>()?;
    let mut adjacency = Vec::new();
    let mut mismatches = Vec::new();
    for (a, b) in found {
        adjacency.extend(a);
        mismatches.extend(b);
    }
    Ok((adjacency, mismatches))
}

/// Residual of the best triangle-by-triangle identification of two groups
/// with opposite orientations, or `None` if some triangle has no partner.
fn match_groups(a: &Cell, g: &FaceGroup, b: &Cell, h: &FaceGroup) -> Result<Option<f64>> {
    if g.triangles.len() != h.triangles.len() {
        return Ok(None);
    }
    let mut used = vec![false; h.triangles.len()];
    let mut worst = 0.0f64;
    for &ta in &g.triangles {
        let pa = a.mesh.triangle_points(ta);
        let mut best: Option<(usize, f64)> = None;
        for (k, &tb) in h.triangles.iter().enumerate() {
            if used[k] {
                continue;
            }
            let pb = b.mesh.triangle_points(tb);
            let rev = [pb[0], pb[2], pb[1]];
            for shift in 0..3 {
                let mut r = 0.0f64;
                for m in 0..3 {
                    r = r.max(distance(&pa[m], &rev[(m + shift) % 3])?);
                }
                if best.is_none_or(|(_, br)| r < br) {
                    best = Some((k, r));
                }
            }
        }
        match best {
            Some((k, r)) if r < 1e-6 => {
                used[k] = true;
                worst = worst.max(r);
            }
            _ => return Ok(None),
        }
    }
    Ok(Some(worst))
}

/// Triangulated polyhedron assembled from named flat polygons.
pub(crate) struct CellBuilder {
    pub mesh: TriMesh<f64>,
    faces: Vec<(String, Vec<usize>)>,
    inside: Point<f64>,
}

impl CellBuilder {
    pub fn new(kind: SpaceKind, vertices: &[(String, Point<f64>)], inside: Point<f64>) -> Result<Self> {
        let mut mesh = TriMesh::new(kind);
        for (l, p) in vertices {
            mesh.add_vertex(l.clone(), *p)?;
        }
        Ok(CellBuilder { mesh, faces: Vec::new(), inside })
    }

    /// Adds a convex polygon; its cycle is turned to face outward while
    /// keeping the first vertex, which is the fan centre.
    pub fn face(&mut self, name: &str, labels: &[&str]) -> Result<()> {
        let mut cycle: Vec<usize> = labels.iter().map(|l| self.mesh.index_of(l)).collect::<Result<_>>()?;
        let [p, q, r] = [0, 1, 2].map(|k| self.mesh.vertices[cycle[k]]);
        if GeodesicPlane::through(&p, &q, &r)?.side(&self.inside) > 0.0 {
            cycle[1..].reverse();
        }
        self.faces.push((name.to_string(), cycle));
        Ok(())
    }

    /// Outward cycle of a face.
    pub fn cycle(&self, name: &str) -> Result<&[usize]> {
        self.faces
            .iter()
            .find(|f| f.0 == name)
            .map(|f| f.1.as_slice())
            .ok_or_else(|| Error::InvalidMesh(format!("no face `{name}`")))
    }

    /// Fans every face except those in `custom`, which bring their own
    /// triangles.
    pub fn finish(mut self, word: &str, custom: Vec<(String, Vec<[usize; 3]>)>) -> Result<Cell> {
        let mut groups = Vec::new();
        for (name, cycle) in &self.faces {
            let tris = match custom.iter().find(|c| &c.0 == name) {
                Some(c) => c.1.clone(),
                None => fan(cycle, 0),
            };
            let start = self.mesh.triangles.len();
            self.mesh.triangles.extend(tris);
            groups.push(FaceGroup { name: name.clone(), triangles: (start..self.mesh.triangles.len()).collect() });
        }
        let mesh = self.mesh;
        Ok(Cell { word: word.to_string(), mesh, groups, inside: self.inside })
    }
}

/// Where and how a patch is laid onto a flat face.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Placement<'a> {
    /// Outward cycle of the face (mesh indices).
    pub face: &'a [usize],
    /// Point of the face where the centroid of the base triangle goes.
    pub anchor: Point<f64>,
    /// Isometry carrying the face onto its partner face.
    pub map: &'a Isometry<f64>,
    /// Minimum distance from the base triangle to every cell vertex and to
    /// `avoid`.
    pub margin: f64,
    pub avoid: &'a [Point<f64>],
}

/// Labels of the patch triangle that is cut away and glued onto the face.
pub(crate) const BASE: [&str; 3] = ["W", "Y", "Z"];

/// Adds to `builder` a copy of the patch `surface` with its base triangle
/// laid on the face at the anchor and the rest sticking out of the cell,
/// and the image of that bump under `map` on the partner face as a dent.
/// Returns the triangles of both faces.
pub(crate) fn bump_and_dent(
    builder: &mut CellBuilder,
    surface: &TriMesh<f64>,
    at: &Placement<'_>,
) -> Result<(Vec<[usize; 3]>, Vec<[usize; 3]>)> {
    let kind = builder.mesh.kind;
    if surface.kind != kind {
        return Err(Error::KindMismatch("bump_and_dent"));
    }
    let base_t = surface
        .find_triangle(BASE)
        .or_else(|| surface.find_triangle([BASE[0], BASE[2], BASE[1]]))
        .ok_or_else(|| Error::InvalidMesh("patch has no base triangle".into()))?;
    let base = surface.triangles[base_t];
    let bp = base.map(|i| surface.vertices[i]);

    let frame_at = |c: &Point<f64>, p0: &Point<f64>, p1: &Point<f64>, n: Vec4<f64>, flip: bool| -> Result<Isometry<f64>> {
        let e1 = c.unit_tangent_toward(p0).ok_or_else(|| Error::Degenerate("anchor on a face vertex".into()))?;
        let t = c.tangent_toward(p1);
        let t = t - e1 * bilinear(&t, &e1, kind);
        let len = bilinear(&t, &t, kind).sqrt();
        let e2 = t * (if flip { -1.0 } else { 1.0 } / len);
        Isometry::from_frame(c, [e1, e2, n])
    };
    let cp = barycenter(&bp)?;
    let np = GeodesicPlane::through(&bp[0], &bp[1], &bp[2])?.normal;
    let from_patch = frame_at(&cp, &bp[0], &bp[1], np, false)?.inverse();

    let mesh = &builder.mesh;
    let fv = at.face.iter().map(|&i| mesh.vertices[i]).collect::<Vec<_>>();
    let plane = GeodesicPlane::through(&fv[0], &fv[1], &fv[2])?;
    if plane.side(&at.anchor).abs() > 1e-9 {
        return Err(Error::Degenerate("anchor is not on the face".into()));
    }
    let mut g = frame_at(&at.anchor, &fv[0], &fv[1], -plane.normal, false)?.compose(&from_patch);
    if g.determinant() < 0.0 {
        g = frame_at(&at.anchor, &fv[0], &fv[1], -plane.normal, true)?.compose(&from_patch);
    }

    let delta = bp.map(|p| g.apply(&p));
    let mut clearance = f64::INFINITY;
    for d in &delta {
        for q in mesh.vertices.iter().chain(at.avoid) {
            clearance = clearance.min(distance(d, q)?);
        }
    }
    if clearance < at.margin {
        return Err(Error::Margin(format!("patch comes within {clearance:.4} of a cell vertex (margin {})", at.margin)));
    }

    // Patch vertex -> bump vertex in the cell.
    let mesh = &mut builder.mesh;
    let mut bump_of = vec![usize::MAX; surface.vertices.len()];
    for (i, p) in surface.vertices.iter().enumerate() {
        bump_of[i] = mesh.add_vertex(format!("bump:{}", surface.labels[i]), g.apply(p))?;
    }
    let inner = [bump_of[base[0]], bump_of[base[2]], bump_of[base[1]]];
    let mut bump: Vec<[usize; 3]> = annulus(mesh, at.face, &inner).map_err(|e| match e {
        Error::Degenerate(s) | Error::InvalidMesh(s) => Error::Margin(format!("patch does not fit inside the face: {s}")),
        other => other,
    })?;
    bump.extend(surface.triangles.iter().enumerate().filter(|&(t, _)| t != base_t).map(|(_, t)| t.map(|i| bump_of[i])));

    // Cell vertex -> dent vertex, through the face map.
    let mut dent_of = std::collections::HashMap::new();
    for &i in at.face {
        let q = at.map.apply(&mesh.vertices[i]);
        let j = (0..mesh.vertices.len())
            .find(|&j| distance(&mesh.vertices[j], &q).is_ok_and(|d| d < MATCH_TOL))
            .ok_or_else(|| Error::InvalidMesh("face map does not land on cell vertices".into()))?;
        dent_of.insert(i, j);
    }
    for (i, l) in surface.labels.iter().enumerate() {
        let q = at.map.apply(&mesh.vertices[bump_of[i]]);
        dent_of.insert(bump_of[i], mesh.add_vertex(format!("dent:{l}"), q)?);
    }
    let mut dent: Vec<[usize; 3]> = bump.iter().map(|t| t.map(|i| dent_of[&i])).collect();
    let [a, b, c] = dent[0].map(|i| mesh.vertices[i]);
    if GeodesicPlane::through(&a, &b, &c)?.side(&builder.inside) > 0.0 {
        for t in &mut dent {
            t.swap(1, 2);
        }
    }
    Ok((bump, dent))
}

/// Patch family for modified cells, and the clearance of the patch from
/// the cell's vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TileFamily {
    pub family: FamilyParams,
    pub margin: f64,
}

impl TileFamily {
    /// Small patches close to the degenerate end of the parameter range,
    /// which fit well inside the cell faces.
    pub fn default_for(kind: SpaceKind) -> Self {
        let family = match kind {
            SpaceKind::Hyperbolic => FamilyParams {
                host_scale: 0.15,
                r_min: 0.5200,
                r_max: 0.5232,
                margin: 0.01,
                ..FamilyParams::default_hyperbolic()
            },
            SpaceKind::Spherical => FamilyParams {
                host_scale: 0.15,
                r_min: 0.5238,
                r_max: 0.5270,
                margin: 0.01,
                ..FamilyParams::default_spherical()
            },
        };
        TileFamily { family, margin: 0.05 }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::Config("tile margin must be positive".into()));
        }
        Ok(())
    }

    /// `n` parameter values spread over the closed family interval.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let (a, b) = (self.family.r_min, self.family.r_max);
        match n {
            0 => Vec::new(),
            1 => vec![0.5 * (a + b)],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Uniform random point on the 3-sphere.
pub fn random_s3_point(rng: &mut ChaCha8Rng) -> Point<f64> {
    loop {
        let v = Vec4::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.euclid_norm();
        if n > 1e-3 && n <= 1.0 {
            return Point::new(v * (1.0 / n), SpaceKind::Spherical).expect("unit vector");
        }
    }
}
