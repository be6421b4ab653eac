//! Enclosed volume by adaptive quadrature in a projective chart.
//!
//! In the Klein chart the hyperbolic volume element is `(1 - |x|^2)^-2 d^3x`;
//! in the gnomonic chart the spherical one is `(1 + |x|^2)^-2 d^3x`. Both
//! charts map geodesic triangles to flat ones, so a closed mesh bounds a
//! Euclidean polyhedron in the chart and its volume splits into signed cones
//! from the chart centre, one per triangle.

use std::sync::OnceLock;

use rayon::prelude::*;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geom::{barycenter, chart_to, cross3, dot3, sub3, Chart, ChartKind, Point, SpaceKind};
use crate::scalar::Real;

const LOW_ORDER: usize = 6;
const HIGH_ORDER: usize = 10;
const MAX_DEPTH: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate<T> {
    pub volume: T,
    /// Sum of per-cell differences between the two quadrature orders.
    pub error_bound: T,
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

fn rule(n: usize) -> &'static [(f64, f64)] {
    static LOW: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static HIGH: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    match n {
        LOW_ORDER => LOW.get_or_init(|| gauss_legendre(LOW_ORDER)),
        HIGH_ORDER => HIGH.get_or_init(|| gauss_legendre(HIGH_ORDER)),
        _ => unreachable!(),
    }
}

fn density<T: Real>(kind: SpaceKind, x: [T; 3]) -> T {
    let r2 = dot3(x, x);
    let d = match kind {
        SpaceKind::Hyperbolic => T::one() - r2,
        SpaceKind::Spherical => T::one() + r2,
    };
    T::one() / (d * d)
}

/// Tensor rule on the collapsed cube mapped onto tetrahedron `v`.
fn tet_rule<T: Real>(kind: SpaceKind, v: &[[T; 3]; 4], order: usize) -> T {
    let e1 = sub3(v[1], v[0]);
    let e2 = sub3(v[2], v[0]);
    let e3 = sub3(v[3], v[0]);
    let det = dot3(e1, cross3(e2, e3));
    let pts = rule(order);
    let mut acc = T::zero();
    for &(u, wu) in pts {
        let (u, wu) = (T::lit(u), T::lit(wu));
        let ou = T::one() - u;
        for &(s, ws) in pts {
            let (s, ws) = (T::lit(s), T::lit(ws));
            let os = T::one() - s;
            let jw = wu * ws * ou * ou * os;
            for &(t, wt) in pts {
                let (t, wt) = (T::lit(t), T::lit(wt));
                let (a, b, c) = (u, ou * s, ou * os * t);
                let x = std::array::from_fn(|i| v[0][i] + a * e1[i] + b * e2[i] + c * e3[i]);
                acc += jw * wt * density(kind, x);
            }
        }
    }
    acc * det
}

fn mid<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    let h = T::lit(0.5);
    std::array::from_fn(|i| h * (a[i] + b[i]))
}

/// Adaptive integral of the density over a Euclidean tetrahedron, signed by
/// the orientation of `v`.
fn adaptive_tet<T: Real>(kind: SpaceKind, v: &[[T; 3]; 4], tol: T, depth: u32) -> (T, T) {
    let lo = tet_rule(kind, v, LOW_ORDER);
    let hi = tet_rule(kind, v, HIGH_ORDER);
    let diff = (hi - lo).abs();
    if diff <= tol || depth >= MAX_DEPTH {
        return (hi, diff);
    }
    let [a, b, c, d] = *v;
    let (ab, ac, ad, bc, bd, cd) = (mid(a, b), mid(a, c), mid(a, d), mid(b, c), mid(b, d), mid(c, d));
    // Four corner tetrahedra plus the central octahedron split along ab-cd.
    let kids: [[[T; 3]; 4]; 8] = [
        [a, ab, ac, ad],
        [ab, b, bc, bd],
        [ac, bc, c, cd],
        [ad, bd, cd, d],
        [ab, cd, ac, ad],
        [ab, cd, ad, bd],
        [ab, cd, bd, bc],
        [ab, cd, bc, ac],
    ];
    let sub_tol = tol / T::lit(8.0);
    kids.iter().fold((T::zero(), T::zero()), |(s, e), k| {
        let (x, y) = adaptive_tet(kind, k, sub_tol, depth + 1);
        (s + x, e + y)
    })
}

/// Volume of the geodesic tetrahedron with vertices `p` (sign follows the
/// orientation of the chart images).
pub fn tetrahedron_volume<T: Real>(p: &[Point<T>; 4], tol: T) -> Result<T> {
    let kind = p[0].kind;
    let centre = barycenter(p)?;
    let chart = Chart::centred(ChartKind::projective(kind), centre);
    let v = [chart_to(&p[0], &chart)?, chart_to(&p[1], &chart)?, chart_to(&p[2], &chart)?, chart_to(&p[3], &chart)?];
    Ok(adaptive_tet(kind, &v, tol, 0).0)
}

/// Volume and quadrature error bound for a closed embedded mesh.
pub fn enclosed_volume_estimate<T: Real>(m: &TriMesh<T>, tol: T) -> Result<VolumeEstimate<T>> {
    m.require_closed()?;
    let centre = barycenter(&m.used_vertices().iter().map(|&i| m.vertices[i]).collect::<Vec<_>>())?;
    let chart = Chart::centred(ChartKind::projective(m.kind), centre);
    let coords: Vec<[T; 3]> = m
        .vertices
        .iter()
        .map(|p| {
            chart_to(p, &chart).map_err(|_| {
                Error::ChartDomain(
                    "surface does not fit in one hemisphere around its vertex centroid; recentre or split the tile".into(),
                )
            })
        })
        .collect::<Result<_>>()?;
    let origin = [T::zero(); 3];
    let per = tol / T::lit(m.triangles.len() as f64);
    let kind = m.kind;
    let (volume, error_bound) = m
        .triangles
        .par_iter()
        .map(|t| adaptive_tet(kind, &[origin, coords[t[0]], coords[t[1]], coords[t[2]]], per, 0))
        .reduce(|| (T::zero(), T::zero()), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(VolumeEstimate { volume, error_bound })
}

pub fn enclosed_volume<T: Real>(m: &TriMesh<T>, tol: T) -> Result<T> {
    Ok(enclosed_volume_estimate(m, tol)?.volume)
}

/// Winding number of a closed mesh around `p`, from signed solid angles in
/// the projective chart centred at the mesh's vertex centroid. A spherical
/// point outside that chart's hemisphere is outside the mesh.
pub fn winding_number<T: Real>(m: &TriMesh<T>, p: &Point<T>) -> Result<T> {
    let centre = barycenter(&m.used_vertices().iter().map(|&i| m.vertices[i]).collect::<Vec<_>>())?;
    let chart = Chart::centred(ChartKind::projective(m.kind), centre);
    let x = match chart_to(p, &chart) {
        Ok(x) => x,
        Err(Error::ChartDomain(_)) if m.kind == SpaceKind::Spherical => return Ok(T::zero()),
        Err(e) => return Err(e),
    };
    let coords: Vec<[T; 3]> = m.vertices.iter().map(|q| chart_to(q, &chart).map(|c| sub3(c, x))).collect::<Result<_>>()?;
    let two = T::lit(2.0);
    let total: T = m
        .triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| coords[i]);
            let (la, lb, lc) = (dot3(a, a).sqrt(), dot3(b, b).sqrt(), dot3(c, c).sqrt());
            let num = dot3(a, cross3(b, c));
            let den = la * lb * lc + dot3(a, b) * lc + dot3(a, c) * lb + dot3(b, c) * la;
            two * num.atan2(den)
        })
        .sum();
    Ok(total / (T::lit(4.0) * T::PI()))
}
