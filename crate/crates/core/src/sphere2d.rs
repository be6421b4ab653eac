//! Geometry on the unit sphere of directions at the cone apex.
//!
//! The circle `C_r` is centred at the north pole `o = e_z`. An
//! antiparallelogram `abcd` is circumscribed about it: its four sides lie on
//! great circles tangent to `C_r`, opposite sides have equal length, and the
//! sides `bc` and `da` cross each other.

use crate::error::{domain, Error, Result};
use crate::geom::{cross3, dot3};
use crate::scalar::Real;

/// Unit vector in `R^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2Point<T> {
    pub coords: [T; 3],
}

impl<T: Real> S2Point<T> {
    pub fn new(v: [T; 3]) -> Result<Self> {
        let n = dot3(v, v).sqrt();
        if !(n > T::lit(1e-300)) {
            return Err(domain("S2Point::new", "zero vector"));
        }
        Ok(S2Point { coords: v.map(|x| x / n) })
    }

    pub fn north() -> Self {
        S2Point { coords: [T::zero(), T::zero(), T::one()] }
    }

    pub fn distance(&self, other: &S2Point<T>) -> T {
        // atan2 form keeps full precision for nearby and nearly antipodal points.
        let c = cross3(self.coords, other.coords);
        dot3(c, c).sqrt().atan2(dot3(self.coords, other.coords))
    }

    /// Polar angle measured from the north pole.
    pub fn polar_angle(&self) -> T {
        self.distance(&S2Point::north())
    }

    /// Interior angle at `self` between the arcs toward `p` and toward `q`.
    pub fn angle_between(&self, p: &S2Point<T>, q: &S2Point<T>) -> T {
        let tp = cross3(cross3(self.coords, p.coords), self.coords);
        let tq = cross3(cross3(self.coords, q.coords), self.coords);
        let c = cross3(tp, tq);
        dot3(c, c).sqrt().atan2(dot3(tp, tq))
    }
}

/// Great circle `{x : x . pole = 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2GreatCircle<T> {
    pub pole: [T; 3],
}

impl<T: Real> S2GreatCircle<T> {
    pub fn through(p: &S2Point<T>, q: &S2Point<T>) -> Result<Self> {
        let n = S2Point::new(cross3(p.coords, q.coords)).map_err(|_| Error::Degenerate("points are equal or antipodal".into()))?;
        Ok(S2GreatCircle { pole: n.coords })
    }

    /// Spherical distance from `p` to the circle.
    pub fn distance_to(&self, p: &S2Point<T>) -> T {
        dot3(self.pole, p.coords).abs().min(T::one()).asin()
    }

    /// Intersection angle in `[0, pi/2]`, independent of orientation.
    pub fn angle_with(&self, other: &S2GreatCircle<T>) -> T {
        dot3(self.pole, other.pole).abs().acos_clamped()
    }

    /// The intersection point with positive `z` coordinate.
    pub fn upper_intersection(&self, other: &S2GreatCircle<T>) -> Result<S2Point<T>> {
        let x = S2Point::new(cross3(self.pole, other.pole)).map_err(|_| Error::Degenerate("great circles coincide".into()))?;
        Ok(if x.coords[2] < T::zero() { S2Point { coords: x.coords.map(|v| -v) } } else { x })
    }

    pub fn rotated_about_z(&self, phi: T) -> Self {
        S2GreatCircle { pole: rotate_z(self.pole, phi) }
    }
}

/// Small circle with centre `center` and angular radius in `(0, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2Circle<T> {
    pub center: S2Point<T>,
    pub radius: T,
}

impl<T: Real> S2Circle<T> {
    pub fn new(center: S2Point<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero() && radius < T::FRAC_PI_2()) {
            return Err(domain("S2Circle::new", format!("radius {radius} must lie in (0, pi/2)")));
        }
        Ok(S2Circle { center, radius })
    }
}

pub(crate) fn rotate_z<T: Real>(v: [T; 3], phi: T) -> [T; 3] {
    let (s, c) = phi.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Ab,
    Bc,
    Cd,
    Da,
}

/// Circumscribed self-intersecting quadrilateral with angle `angle_a` at `a`
/// and `c` and `angle_b` at `b` and `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Antiparallelogram<T> {
    pub a: S2Point<T>,
    pub b: S2Point<T>,
    pub c: S2Point<T>,
    pub d: S2Point<T>,
    pub circle: S2Circle<T>,
    pub angle_a: T,
    pub angle_b: T,
    /// Rotation about the circle centre taking `a` to `c`.
    pub phi: T,
}

impl<T: Real> Antiparallelogram<T> {
    pub fn vertices(&self) -> [S2Point<T>; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Side great circles in the order `ab, bc, cd, da`.
    pub fn side_circles(&self) -> Result<[S2GreatCircle<T>; 4]> {
        Ok([
            S2GreatCircle::through(&self.a, &self.b)?,
            S2GreatCircle::through(&self.b, &self.c)?,
            S2GreatCircle::through(&self.c, &self.d)?,
            S2GreatCircle::through(&self.d, &self.a)?,
        ])
    }

    /// Largest deviation of a side's distance to the centre from the radius.
    pub fn tangency_residual(&self) -> Result<T> {
        Ok(self
            .side_circles()?
            .iter()
            .map(|g| (g.distance_to(&self.circle.center) - self.circle.radius).abs())
            .fold(T::zero(), T::max))
    }

    /// Measured interior angles at `a, b, c, d`.
    pub fn measured_angles(&self) -> [T; 4] {
        let v = self.vertices();
        std::array::from_fn(|i| v[i].angle_between(&v[(i + 3) % 4], &v[(i + 1) % 4]))
    }
}

/// Distance from the circle centre to a point whose two tangent great
/// circles to a circle of radius `r` meet at angle `alpha`.
pub fn tangent_apex_distance<T: Real>(r: T, alpha: T) -> Result<T> {
    if !(r > T::zero() && r < T::FRAC_PI_2()) {
        return Err(domain("tangent_apex_distance", format!("radius {r} must lie in (0, pi/2)")));
    }
    if !(alpha > T::zero() && alpha <= T::PI()) {
        return Err(domain("tangent_apex_distance", format!("angle {alpha} must lie in (0, pi]")));
    }
    let sd = r.sin() / (alpha / T::lit(2.0)).sin();
    if sd > T::one() + T::epsilon() {
        return Err(domain(
            "tangent_apex_distance",
            format!("no tangent pair: need sin r <= sin(alpha/2), got {} > {}", r.sin(), (alpha / T::lit(2.0)).sin()),
        ));
    }
    Ok(sd.min(T::one()).asin())
}

/// The two great circles through `apex` tangent to `circle`.
///
/// The first has its pole on the positive side of the plane spanned by the
/// centre and the apex, i.e. `(center x apex) . pole > 0`; the second is its
/// mirror image. Poles are oriented so the centre lies on their positive side.
pub fn tangent_lines<T: Real>(circle: &S2Circle<T>, apex: &S2Point<T>) -> Result<[S2GreatCircle<T>; 2]> {
    let o = circle.center.coords;
    let dist = circle.center.distance(apex);
    let r = circle.radius;
    if !(dist > r + T::lit(1e-12)) {
        return Err(domain("tangent_lines", "apex lies inside or on the circle"));
    }
    if dist >= T::PI() - r - T::lit(1e-12) {
        return Err(domain("tangent_lines", "apex is on the far side of the disk"));
    }
    // Orthonormal frame: o, e1 toward the apex, e2 = o x e1.
    let along = apex.coords;
    let proj = dot3(along, o);
    let e1 = S2Point::new([along[0] - proj * o[0], along[1] - proj * o[1], along[2] - proj * o[2]])?.coords;
    let e2 = cross3(o, e1);
    // pole = sin r * o + p1 e1 + p2 e2 with pole . apex = 0.
    let (sd, cd) = dist.sin_cos();
    let p1 = -r.sin() * cd / sd;
    let p2 = (r.cos() * r.cos() - p1 * p1).max(T::zero()).sqrt();
    let mk = |sign: T| -> S2GreatCircle<T> {
        S2GreatCircle { pole: std::array::from_fn(|i| r.sin() * o[i] + p1 * e1[i] + sign * p2 * e2[i]) }
    };
    Ok([mk(T::one()), mk(-T::one())])
}

/// Rotation angle `phi` about the centre that turns a tangent great circle
/// into one meeting it at angle `theta`: `cos theta = sin^2 r + cos^2 r cos phi`.
pub fn rotation_for_intersection_angle<T: Real>(r: T, theta: T) -> Result<T> {
    let (sr, cr) = r.sin_cos();
    let c = (theta.cos() - sr * sr) / (cr * cr);
    if !(theta > T::zero()) || c < -T::one() - T::epsilon() || c > T::one() {
        return Err(domain(
            "rotation_for_intersection_angle",
            format!("angle {theta} unattainable for r = {r}: need 0 < theta <= pi - 2r"),
        ));
    }
    Ok(c.acos_clamped())
}

/// Antiparallelogram circumscribed about the circle of radius `r` centred at
/// the north pole, with `a` in the half-plane `y = 0, x > 0` and angles
/// `alpha_a` at `a, c` and `angle_b` at `b, d`.
pub fn build_antiparallelogram<T: Real>(r: T, alpha_a: T, angle_b: T) -> Result<Antiparallelogram<T>> {
    if !(alpha_a < T::PI()) {
        return Err(domain("build_antiparallelogram", "angle at a must be below pi"));
    }
    let circle = S2Circle::new(S2Point::north(), r)?;
    let dist = tangent_apex_distance(r, alpha_a)?;
    if !(dist > r) {
        return Err(domain("build_antiparallelogram", "apex distance must exceed the radius"));
    }
    let a = S2Point { coords: [dist.sin(), T::zero(), dist.cos()] };
    let [l1, l2] = tangent_lines(&circle, &a)?;
    let phi = rotation_for_intersection_angle(r, angle_b)?;
    let c = S2Point { coords: rotate_z(a.coords, phi) };
    let b = l1.upper_intersection(&l1.rotated_about_z(phi))?;
    let d = l2.upper_intersection(&l2.rotated_about_z(phi))?;
    Ok(Antiparallelogram { a, b, c, d, circle, angle_a: alpha_a, angle_b, phi })
}

pub fn side_length<T: Real>(ap: &Antiparallelogram<T>, side: Side) -> T {
    match side {
        Side::Ab => ap.a.distance(&ap.b),
        Side::Bc => ap.b.distance(&ap.c),
        Side::Cd => ap.c.distance(&ap.d),
        Side::Da => ap.d.distance(&ap.a),
    }
}

/// Whether the minor arcs `p1 p2` and `q1 q2` cross at an interior point.
pub fn arcs_cross<T: Real>(p1: &S2Point<T>, p2: &S2Point<T>, q1: &S2Point<T>, q2: &S2Point<T>) -> bool {
    let on_arc = |x: &S2Point<T>, u: &S2Point<T>, v: &S2Point<T>| {
        let slack = u.distance(x) + x.distance(v) - u.distance(v);
        slack.abs() < T::lit(1e-9) && u.distance(x) > T::lit(1e-9) && v.distance(x) > T::lit(1e-9)
    };
    let (Ok(g), Ok(h)) = (S2GreatCircle::through(p1, p2), S2GreatCircle::through(q1, q2)) else {
        return false;
    };
    let Ok(x) = S2Point::new(cross3(g.pole, h.pole)) else {
        return false;
    };
    let y = S2Point { coords: x.coords.map(|v| -v) };
    [x, y].iter().any(|z| on_arc(z, p1, p2) && on_arc(z, q1, q2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};

    const ALPHA: f64 = 2.0 * FRAC_PI_3;
    const THETA: f64 = 0.6;

    /// Brute-force oracle: scan great circles through the apex and find the
    /// one closest to tangency, then read off the apex distance.
    fn apex_distance_by_search(r: f64, alpha: f64) -> f64 {
        // For an apex at distance d, the tangent circle through it makes the
        // half-angle with the apex-centre arc; bisect d so that the
        // half-angle equals alpha/2.
        let half_angle = |d: f64| {
            let apex = S2Point { coords: [d.sin(), 0.0, d.cos()] };
            // Search the direction at the apex for a circle at distance r.
            let mut best = (f64::INFINITY, 0.0);
            let n = 20000;
            for k in 1..n {
                let psi = FRAC_PI_2 * k as f64 / n as f64;
                // Great circle through apex whose tangent at apex makes angle
                // psi with the meridian toward the pole.
                let toward = [-(d.cos()), 0.0, d.sin()];
                let side = [0.0, 1.0, 0.0];
                let t: [f64; 3] = std::array::from_fn(|i| psi.cos() * toward[i] + psi.sin() * side[i]);
                let g = S2GreatCircle { pole: cross3(apex.coords, t) };
                let err = (g.distance_to(&S2Point::north()) - r).abs();
                if err < best.0 {
                    best = (err, psi);
                }
            }
            best.1
        };
        let (mut lo, mut hi) = (r + 1e-9, FRAC_PI_2);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            // Farther apex sees the disk under a smaller angle.
            if half_angle(mid) > alpha / 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn tangent_apex_distance_examples() {
        assert!((tangent_apex_distance(0.4, PI).unwrap() - 0.4).abs() < 1e-12);
        assert!((tangent_apex_distance(FRAC_PI_6, FRAC_PI_3).unwrap() - FRAC_PI_2).abs() < 1e-7);
        let d = tangent_apex_distance(0.3f64, 1.0).unwrap();
        assert!((d - 0.6645).abs() < 5e-4, "d = {d}");
        assert!((d - 0.6641687653676754).abs() < 1e-14);
        let searched = apex_distance_by_search(0.3, 1.0);
        assert!((d - searched).abs() < 1e-3, "formula {d} vs search {searched}");
        assert!(tangent_apex_distance(0.6f64, 1.0).is_err());
    }

    #[test]
    fn tangent_lines_examples() {
        let circle = S2Circle::new(S2Point::north(), FRAC_PI_6).unwrap();
        let apex = S2Point::new([1.0, 0.0, 0.0]).unwrap();
        let [l1, l2] = tangent_lines(&circle, &apex).unwrap();
        for l in [l1, l2] {
            assert!(dot3(l.pole, apex.coords).abs() < 1e-12);
            assert!((l.distance_to(&circle.center) - FRAC_PI_6).abs() < 1e-12);
        }
        // Angle at the apex between the two lines equals 2 asin(sin r / sin d) = pi/3.
        let t1 = cross3(l1.pole, apex.coords);
        let t2 = cross3(l2.pole, apex.coords);
        let ang = dot3(t1, t2).acos();
        assert!((ang - FRAC_PI_3).abs() < 1e-12 || (PI - ang - FRAC_PI_3).abs() < 1e-12);
        // Mirror symmetry in the plane y = 0 swaps the two lines.
        let mirrored = [l1.pole[0], -l1.pole[1], l1.pole[2]];
        assert!(mirrored.iter().zip(l2.pole.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
        let far = S2Point::new([(PI - FRAC_PI_6).sin(), 0.0, (PI - FRAC_PI_6).cos()]).unwrap();
        assert!(tangent_lines(&circle, &far).is_err());
        let inside = S2Point::new([0.1, 0.0, 1.0]).unwrap();
        assert!(tangent_lines(&circle, &inside).is_err());
    }

    /// Pole oracle: two tangent poles at polar angle pi/2 - r, one rotated by phi.
    fn rotated_pole_angle(r: f64, phi: f64) -> f64 {
        let m = [r.cos(), 0.0, r.sin()];
        let n = rotate_z(m, phi);
        dot3(m, n).acos()
    }

    #[test]
    fn rotation_identity_matches_pole_oracle() {
        assert!(rotated_pole_angle(0.3, 0.0).abs() < 1e-7);
        assert!((rotated_pole_angle(0.3, PI) - (PI - 0.6)).abs() < 1e-12);
        let theta = rotated_pole_angle(0.3, 1.0);
        assert!((theta.cos() - 0.58045).abs() < 1e-5);
        assert!((theta - 0.9515).abs() < 1e-4);
        for &(r, phi) in &[(0.3, 1.0), (0.45, 0.3), (1.1, 2.9), (0.05, 0.01)] {
            let theta = rotated_pole_angle(r, phi);
            assert!((rotation_for_intersection_angle(r, theta).unwrap() - phi).abs() < 1e-7);
        }
        assert!(rotation_for_intersection_angle(0.3f64, PI - 0.5).is_err());
    }

    #[test]
    fn antiparallelogram_invariants() {
        for &r in &[0.2, 0.35, 0.45, 0.5] {
            let ap = build_antiparallelogram(r, ALPHA, THETA).unwrap();
            let [aa, ab, ac, ad] = ap.measured_angles();
            assert!((aa - ALPHA).abs() < 1e-10 && (ac - ALPHA).abs() < 1e-10, "angles at a, c: {aa} {ac}");
            assert!((ab - THETA).abs() < 1e-10 && (ad - THETA).abs() < 1e-10, "angles at b, d: {ab} {ad}");
            assert!((side_length(&ap, Side::Ab) - side_length(&ap, Side::Cd)).abs() < 1e-10);
            assert!((side_length(&ap, Side::Bc) - side_length(&ap, Side::Da)).abs() < 1e-10);
            assert!(ap.tangency_residual().unwrap() < 1e-10);
            assert!(arcs_cross(&ap.b, &ap.c, &ap.d, &ap.a), "sides bc and da must cross");
            assert!(!arcs_cross(&ap.a, &ap.b, &ap.c, &ap.d));
        }
    }

    #[test]
    fn prototype_values() {
        let ap = build_antiparallelogram(0.45, ALPHA, THETA).unwrap();
        // Values from an independent numpy construction.
        assert!((side_length(&ap, Side::Ab) - 0.13265193037056552).abs() < 1e-12);
        assert!((side_length(&ap, Side::Bc) - 0.4326282846336434).abs() < 1e-12);
    }

    #[test]
    fn side_length_strictly_monotone_in_r() {
        let mut prev = 0.0;
        for k in 0..400 {
            let r = 0.05 + 0.47 * k as f64 / 400.0;
            let ab = side_length(&build_antiparallelogram(r, ALPHA, THETA).unwrap(), Side::Ab);
            assert!(ab > prev, "not increasing at r = {r}");
            prev = ab;
        }
    }

    #[test]
    fn continuity_in_r() {
        let p = build_antiparallelogram(0.4, ALPHA, THETA).unwrap();
        let q = build_antiparallelogram(0.4 + 1e-7, ALPHA, THETA).unwrap();
        for (u, v) in p.vertices().iter().zip(q.vertices().iter()) {
            assert!(u.distance(v) < 1e-4);
        }
    }

    #[test]
    fn infeasible_triples() {
        assert!(build_antiparallelogram(0.5f64, 0.8, THETA).is_err());
        assert!(build_antiparallelogram(0.5f64, ALPHA, PI - 0.9).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn angles_and_tangency(r in 0.05f64..1.2, alpha in 0.3f64..3.0, theta in 0.05f64..2.5) {
                prop_assume!(r.sin() < (alpha / 2.0).sin() * 0.999 && theta < PI - 2.0 * r - 1e-3);
                let ap = build_antiparallelogram(r, alpha, theta).unwrap();
                prop_assert!(ap.tangency_residual().unwrap() < 1e-10);
                prop_assert!((side_length(&ap, Side::Ab) - side_length(&ap, Side::Cd)).abs() < 1e-10);
                prop_assert!((side_length(&ap, Side::Bc) - side_length(&ap, Side::Da)).abs() < 1e-10);
            }
        }
    }
}
