//! Triangulations of flat polygons without new vertices.

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geom::{barycenter, chart_to, cross3, dot3, sub3, Chart, ChartKind, Point};
use crate::scalar::Real;

/// Fan from `poly[start]`; `poly` is a convex polygon in cyclic order.
pub fn fan(poly: &[usize], start: usize) -> Vec<[usize; 3]> {
    let n = poly.len();
    (1..n - 1).map(|k| [poly[start], poly[(start + k) % n], poly[(start + k + 1) % n]]).collect()
}

/// Planar coordinates of coplanar points: projective chart at their centroid,
/// then an orthonormal basis of the common plane with the first three points
/// counter-clockwise.
pub fn planar_coords<T: Real>(pts: &[Point<T>]) -> Result<Vec<[T; 2]>> {
    let chart = Chart::centred(ChartKind::projective(pts[0].kind), barycenter(pts)?);
    let x: Vec<[T; 3]> = pts.iter().map(|p| chart_to(p, &chart)).collect::<Result<_>>()?;
    let e1 = sub3(x[1], x[0]);
    let n = cross3(e1, sub3(x[2], x[0]));
    let nl = dot3(n, n).sqrt();
    if !(nl > T::lit(1e-300)) {
        return Err(Error::Degenerate("polygon points are collinear".into()));
    }
    let l1 = dot3(e1, e1).sqrt();
    let u = e1.map(|c| c / l1);
    let nn = n.map(|c| c / nl);
    let v = cross3(nn, u);
    for p in &x {
        if dot3(sub3(*p, x[0]), nn).abs() > T::lit(1e-9) {
            return Err(Error::Degenerate("polygon points are not coplanar".into()));
        }
    }
    Ok(x.iter().map(|p| {
        let d = sub3(*p, x[0]);
        [dot3(d, u), dot3(d, v)]
    }).collect())
}

fn orient<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Triangulates the region between a convex outer polygon and an inner
/// polygon strictly inside it; both cycles are given counter-clockwise in
/// the same planar coordinates. Returns triangles as `(is_inner, index)`
/// triples, counter-clockwise.
pub fn annulus_2d<T: Real>(outer: &[[T; 2]], inner: &[[T; 2]]) -> Result<Vec<[(bool, usize); 3]>> {
    let (no, ni) = (outer.len(), inner.len());
    let c = {
        let s = inner.iter().fold([T::zero(); 2], |a, p| [a[0] + p[0], a[1] + p[1]]);
        [s[0] / T::lit(ni as f64), s[1] / T::lit(ni as f64)]
    };
    let ang = |p: [T; 2]| (p[1] - c[1]).atan2(p[0] - c[0]);
    let start_o = (0..no).min_by(|&a, &b| ang(outer[a]).partial_cmp(&ang(outer[b])).unwrap()).unwrap();
    let start_i = (0..ni).min_by(|&a, &b| ang(inner[a]).partial_cmp(&ang(inner[b])).unwrap()).unwrap();
    // Unwrapped angles along each cycle starting from its minimum.
    let unwrap = |pts: &[[T; 2]], s: usize| -> Vec<T> {
        let n = pts.len();
        let mut out = Vec::with_capacity(n + 1);
        let mut prev = ang(pts[s]);
        out.push(prev);
        for k in 1..=n {
            let mut a = ang(pts[(s + k) % n]);
            while a <= prev {
                a += T::TAU();
            }
            out.push(a);
            prev = a;
        }
        out
    };
    let ao = unwrap(outer, start_o);
    let ai = unwrap(inner, start_i);
    let (mut i, mut j) = (0usize, 0usize);
    let mut tris = Vec::with_capacity(no + ni);
    while i < no || j < ni {
        let advance_outer = j >= ni || (i < no && ao[i + 1] <= ai[j + 1]);
        let o = (false, (start_o + i) % no);
        let p = (true, (start_i + j) % ni);
        if advance_outer {
            tris.push([o, (false, (start_o + i + 1) % no), p]);
            i += 1;
        } else {
            tris.push([o, (true, (start_i + j + 1) % ni), p]);
            j += 1;
        }
    }
    let at = |v: (bool, usize)| if v.0 { inner[v.1] } else { outer[v.1] };
    for t in &tris {
        if orient(at(t[0]), at(t[1]), at(t[2])) <= T::zero() {
            return Err(Error::Degenerate("annulus triangulation produced a flipped triangle".into()));
        }
    }
    Ok(tris)
}

/// Annulus triangulation on mesh vertices; both cycles follow the face
/// orientation (counter-clockwise seen from outside).
pub fn annulus<T: Real>(m: &TriMesh<T>, outer: &[usize], inner: &[usize]) -> Result<Vec<[usize; 3]>> {
    let all: Vec<Point<T>> = outer.iter().chain(inner).map(|&i| m.vertices[i]).collect();
    let xy = planar_coords(&all)?;
    let (oxy, ixy) = xy.split_at(outer.len());
    // Planar basis may be mirrored relative to the face orientation.
    let flip = orient(oxy[0], oxy[1], oxy[2]) < T::zero();
    let fix = |p: &[T; 2]| if flip { [p[0], -p[1]] } else { *p };
    let oxy: Vec<[T; 2]> = oxy.iter().map(fix).collect();
    let ixy: Vec<[T; 2]> = ixy.iter().map(fix).collect();
    Ok(annulus_2d(&oxy, &ixy)?
        .into_iter()
        .map(|t| t.map(|(inn, k)| if inn { inner[k] } else { outer[k] }))
        .collect())
}
