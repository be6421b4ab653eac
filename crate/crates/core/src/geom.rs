//! Ambient 4-dimensional models of hyperbolic and spherical 3-space.
//!
//! Both geometries live in `R^4` with the bilinear form
//! `<u, v> = u0 v0 + u1 v1 + u2 v2 + k u3 v3`, where `k = -1` for the
//! hyperboloid model and `k = +1` for the unit 3-sphere. Points satisfy
//! `<p, p> = k` (hyperbolic points also have `p3 > 0`), geodesic planes are
//! `{p : <p, n> = 0}` with `<n, n> = 1`, and isometries are the 4x4 matrices
//! that preserve the form. The fourth coordinate is the special one; the
//! origin of both models is `(0, 0, 0, 1)`.
//!
//! Charts are views only: everything is computed in ambient coordinates.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Which constant-curvature space a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Hyperbolic,
    Spherical,
}

impl SpaceKind {
    /// Sign of the fourth diagonal entry of the form, which is also `<p, p>`
    /// for every point.
    #[inline]
    pub fn sign<T: Real>(self) -> T {
        match self {
            SpaceKind::Hyperbolic => -T::one(),
            SpaceKind::Spherical => T::one(),
        }
    }

    /// `cosh` or `cos`.
    #[inline]
    pub fn cos<T: Real>(self, x: T) -> T {
        match self {
            SpaceKind::Hyperbolic => x.cosh(),
            SpaceKind::Spherical => x.cos(),
        }
    }

    /// `sinh` or `sin`.
    #[inline]
    pub fn sin<T: Real>(self, x: T) -> T {
        match self {
            SpaceKind::Hyperbolic => x.sinh(),
            SpaceKind::Spherical => x.sin(),
        }
    }

    /// `tanh` or `tan`.
    #[inline]
    pub fn tan<T: Real>(self, x: T) -> T {
        match self {
            SpaceKind::Hyperbolic => x.tanh(),
            SpaceKind::Spherical => x.tan(),
        }
    }

    /// Distance whose generalized cosine is `c`.
    #[inline]
    pub fn acos<T: Real>(self, c: T) -> T {
        match self {
            SpaceKind::Hyperbolic => c.acosh_clamped(),
            SpaceKind::Spherical => c.acos_clamped(),
        }
    }

    /// Distance whose generalized tangent is `t`.
    #[inline]
    pub fn atan<T: Real>(self, t: T) -> T {
        match self {
            SpaceKind::Hyperbolic => t.atanh(),
            SpaceKind::Spherical => t.atan(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Hyperbolic => "hyperbolic",
            SpaceKind::Spherical => "spherical",
        }
    }
}

/// Plain 4-vector in ambient coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec4<T>(pub [T; 4]);

impl<T: Real> Vec4<T> {
    pub fn new(x: T, y: T, z: T, w: T) -> Self {
        Vec4([x, y, z, w])
    }

    pub fn zero() -> Self {
        Vec4([T::zero(); 4])
    }

    pub fn axis(i: usize) -> Self {
        let mut v = [T::zero(); 4];
        v[i] = T::one();
        Vec4(v)
    }

    pub fn from_spatial(v: [T; 3], w: T) -> Self {
        Vec4([v[0], v[1], v[2], w])
    }

    pub fn spatial(&self) -> [T; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn w(&self) -> T {
        self.0[3]
    }

    pub fn euclid_norm(&self) -> T {
        self.0.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Component-wise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (0..4)
            .map(|i| (self.0[i] - other.0[i]).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<usize> for Vec4<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Real> Add for Vec4<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec4(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl<T: Real> Sub for Vec4<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec4(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl<T: Real> Mul<T> for Vec4<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Vec4(self.0.map(|x| x * s))
    }
}

impl<T: Real> Neg for Vec4<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec4(self.0.map(|x| -x))
    }
}

/// The ambient bilinear form of `kind`.
#[inline]
pub fn bilinear<T: Real>(u: &Vec4<T>, v: &Vec4<T>, kind: SpaceKind) -> T {
    u.0[0] * v.0[0] + u.0[1] * v.0[1] + u.0[2] * v.0[2] + kind.sign::<T>() * u.0[3] * v.0[3]
}

/// Raises or lowers an index with the form: `G v`.
#[inline]
fn lower<T: Real>(v: Vec4<T>, kind: SpaceKind) -> Vec4<T> {
    Vec4([v.0[0], v.0[1], v.0[2], kind.sign::<T>() * v.0[3]])
}

fn det3<T: Real>(m: [[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Euclidean ternary cross product: the covector `X` with
/// `X . v = det[v; a; b; c]` for every `v`.
pub fn ternary_cross<T: Real>(a: &Vec4<T>, b: &Vec4<T>, c: &Vec4<T>) -> Vec4<T> {
    let rows = [a.0, b.0, c.0];
    Vec4(std::array::from_fn(|i| {
        let cols: Vec<usize> = (0..4).filter(|&j| j != i).collect();
        let minor: [[T; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|k| rows[r][cols[k]]));
        let sign = if i % 2 == 0 { T::one() } else { -T::one() };
        sign * det3(minor)
    }))
}

/// The vector `c` with `<c, v> = det[v; a; b; d]` under the form of `kind`.
pub fn form_cross<T: Real>(a: &Vec4<T>, b: &Vec4<T>, d: &Vec4<T>, kind: SpaceKind) -> Vec4<T> {
    lower(ternary_cross(a, b, d), kind)
}

pub fn det4<T: Real>(a: &Vec4<T>, b: &Vec4<T>, c: &Vec4<T>, d: &Vec4<T>) -> T {
    let x = ternary_cross(b, c, d);
    (0..4).map(|i| a.0[i] * x.0[i]).sum()
}

/// A point of hyperbolic or spherical 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub coords: Vec4<T>,
    pub kind: SpaceKind,
}

impl<T: Real> Point<T> {
    /// Projects arbitrary ambient coordinates onto the model quadric.
    pub fn new(coords: Vec4<T>, kind: SpaceKind) -> Result<Self> {
        let q = bilinear(&coords, &coords, kind);
        let ok = match kind {
            SpaceKind::Hyperbolic => q < T::zero() && coords.w() > T::zero(),
            SpaceKind::Spherical => q > T::zero(),
        };
        if !ok {
            return Err(domain("Point::new", format!("coordinates {:?} do not represent a point", coords)));
        }
        Ok(Self::normalized_unchecked(coords, kind))
    }

    pub(crate) fn normalized_unchecked(coords: Vec4<T>, kind: SpaceKind) -> Self {
        let q = bilinear(&coords, &coords, kind).abs().sqrt();
        Point { coords: coords * (T::one() / q), kind }
    }

    pub fn origin(kind: SpaceKind) -> Self {
        Point { coords: Vec4::axis(3), kind }
    }

    /// Point at distance `t` from the origin along the unit direction `dir`.
    pub fn from_polar(kind: SpaceKind, dir: [T; 3], t: T) -> Self {
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        let s = kind.sin(t) / n;
        Point {
            coords: Vec4::new(dir[0] * s, dir[1] * s, dir[2] * s, kind.cos(t)),
            kind,
        }
    }

    pub fn inner(&self, other: &Point<T>) -> T {
        bilinear(&self.coords, &other.coords, self.kind)
    }

    /// Deviation `|<p, p> - k|` from the model quadric.
    pub fn quadric_residual(&self) -> T {
        (bilinear(&self.coords, &self.coords, self.kind) - self.kind.sign::<T>()).abs()
    }

    /// Component of `v` tangent to the model at this point.
    pub fn project_tangent(&self, v: &Vec4<T>) -> Vec4<T> {
        let k = self.kind.sign::<T>();
        *v - self.coords * (k * bilinear(v, &self.coords, self.kind))
    }

    /// Unnormalized tangent vector at `self` pointing along the geodesic to `q`.
    pub fn tangent_toward(&self, q: &Point<T>) -> Vec4<T> {
        self.project_tangent(&q.coords)
    }

    /// Unit-speed tangent vector toward `q`, or `None` when the points coincide.
    pub fn unit_tangent_toward(&self, q: &Point<T>) -> Option<Vec4<T>> {
        let v = self.tangent_toward(q);
        let n = bilinear(&v, &v, self.kind);
        if n <= T::zero() || n.sqrt() < T::lit(1e-300) {
            return None;
        }
        Some(v * (T::one() / n.sqrt()))
    }

    /// Exponential map: follow the geodesic with initial tangent `v`.
    pub fn exp(&self, v: &Vec4<T>) -> Point<T> {
        let len = bilinear(v, v, self.kind).max(T::zero()).sqrt();
        if len == T::zero() {
            return *self;
        }
        let c = self.coords * self.kind.cos(len) + *v * (self.kind.sin(len) / len);
        Point::normalized_unchecked(c, self.kind)
    }

    /// Point a fraction `s` of the way along the geodesic segment to `q`.
    pub fn lerp(&self, q: &Point<T>, s: T) -> Point<T> {
        let d = distance_unchecked(self, q);
        if d < T::lit(1e-300) {
            return *self;
        }
        let sk = self.kind.sin(d);
        let c = self.coords * (self.kind.sin((T::one() - s) * d) / sk) + q.coords * (self.kind.sin(s * d) / sk);
        Point::normalized_unchecked(c, self.kind)
    }
}

fn distance_unchecked<T: Real>(p: &Point<T>, q: &Point<T>) -> T {
    match p.kind {
        SpaceKind::Hyperbolic => {
            let c = -p.inner(q);
            if c < T::lit(1.0 + 1e-6) {
                // acosh loses half the digits near 1; use the chord instead.
                let d = p.coords - q.coords;
                let chord = bilinear(&d, &d, p.kind).max(T::zero()).sqrt();
                T::lit(2.0) * (chord / T::lit(2.0)).asinh()
            } else {
                c.acosh()
            }
        }
        SpaceKind::Spherical => {
            let d = p.coords - q.coords;
            let s = q.coords + p.coords;
            let chord = d.euclid_norm();
            let other = s.euclid_norm();
            T::lit(2.0) * chord.atan2(other)
        }
    }
}

/// Geodesic distance (curvature +-1).
pub fn distance<T: Real>(p: &Point<T>, q: &Point<T>) -> Result<T> {
    if p.kind != q.kind {
        return Err(Error::KindMismatch("distance"));
    }
    Ok(distance_unchecked(p, q))
}

/// Angle at `v` between the geodesics toward `p` and toward `q`.
///
/// Computed after moving `v` to the origin, where tangent directions are the
/// spatial parts; this stays accurate for far-away vertices.
pub fn angle_at<T: Real>(v: &Point<T>, p: &Point<T>, q: &Point<T>) -> T {
    let m = Isometry::to_origin(v);
    let a = m.apply_vec(&p.coords).spatial();
    let b = m.apply_vec(&q.coords).spatial();
    let c = cross3(a, b);
    dot3(c, c).sqrt().atan2(dot3(a, b))
}

/// Totally geodesic plane `{p : <p, n> = 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicPlane<T> {
    pub normal: Vec4<T>,
    pub kind: SpaceKind,
}

impl<T: Real> GeodesicPlane<T> {
    pub fn new(normal: Vec4<T>, kind: SpaceKind) -> Result<Self> {
        let q = bilinear(&normal, &normal, kind);
        if q <= T::zero() {
            return Err(domain("GeodesicPlane::new", "normal must be spacelike"));
        }
        Ok(GeodesicPlane { normal: normal * (T::one() / q.sqrt()), kind })
    }

    /// Plane through three points, normal oriented by the right-hand rule
    /// on `p -> q -> r` (in a chart centred near the points).
    pub fn through(p: &Point<T>, q: &Point<T>, r: &Point<T>) -> Result<Self> {
        let n = form_cross(&p.coords, &q.coords, &r.coords, p.kind);
        let len = bilinear(&n, &n, p.kind);
        if !(len > T::lit(1e-300)) {
            return Err(Error::Degenerate("three points do not span a plane".into()));
        }
        Ok(GeodesicPlane { normal: n * (T::one() / len.sqrt()), kind: p.kind })
    }

    /// Plane at distance `s` from the origin with unit normal direction `dir`
    /// at the foot point; the origin lies on the negative side.
    pub fn at_distance(kind: SpaceKind, dir: [T; 3], s: T) -> Self {
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        let c = kind.cos(s) / n;
        let w = -kind.sign::<T>() * kind.sin(s);
        GeodesicPlane { normal: Vec4::new(dir[0] * c, dir[1] * c, dir[2] * c, w), kind }
    }

    /// Signed value `<p, n>`; its sign says which side `p` is on.
    pub fn side(&self, p: &Point<T>) -> T {
        bilinear(&p.coords, &self.normal, self.kind)
    }

    pub fn flipped(&self) -> Self {
        GeodesicPlane { normal: -self.normal, kind: self.kind }
    }

    pub fn reflection(&self) -> Isometry<T> {
        Isometry::reflection(self)
    }
}

/// How to read the two normals handed to [`dihedral_between_planes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalConvention {
    /// Both normals point out of (or both into) the solid wedge: the result is
    /// the interior dihedral angle.
    Interior,
    /// The angle between the normals themselves.
    BetweenNormals,
}

/// Dihedral angle between two intersecting planes.
///
/// Coincident (or tangent) planes are reported as [`Error::Degenerate`];
/// ultraparallel hyperbolic planes as [`Error::NonIntersecting`].
pub fn dihedral_between_planes<T: Real>(
    n1: &GeodesicPlane<T>,
    n2: &GeodesicPlane<T>,
    convention: NormalConvention,
) -> Result<T> {
    if n1.kind != n2.kind {
        return Err(Error::KindMismatch("dihedral_between_planes"));
    }
    let c = bilinear(&n1.normal, &n2.normal, n1.kind);
    if c.abs() > T::one() + T::lit(1e-12) {
        return Err(Error::NonIntersecting { inner: c.to_f64_lossy() });
    }
    if (c.abs() - T::one()).abs() <= T::lit(1e-12) {
        return Err(Error::Degenerate("planes coincide or meet only at infinity".into()));
    }
    Ok(match convention {
        NormalConvention::Interior => (-c).acos_clamped(),
        NormalConvention::BetweenNormals => c.acos_clamped(),
    })
}

/// Distance `s` from the apex of a right triangle to the opposite plane.
///
/// The triangle has the apex angle `r` and the angle `beta` at the foot of the
/// slanted leg; hyperbolically `cos beta = cosh s sin r`, spherically
/// `cos beta = cos s sin r`.
pub fn solve_apex_plane_distance<T: Real>(r: T, beta: T, kind: SpaceKind) -> Result<T> {
    let (sr, cb) = (r.sin(), beta.cos());
    if !(r > T::zero() && r < T::FRAC_PI_2()) || !(beta > T::zero() && beta < T::FRAC_PI_2()) {
        return Err(domain("solve_apex_plane_distance", "need 0 < r, beta < pi/2"));
    }
    let ratio = cb / sr;
    match kind {
        SpaceKind::Hyperbolic => {
            if sr > cb * (T::one() + T::epsilon()) {
                return Err(domain(
                    "solve_apex_plane_distance",
                    format!("hyperbolic branch needs r <= pi/2 - beta = {}", T::FRAC_PI_2() - beta),
                ));
            }
            Ok(ratio.acosh_clamped())
        }
        SpaceKind::Spherical => {
            if cb > sr * (T::one() + T::epsilon()) {
                return Err(domain(
                    "solve_apex_plane_distance",
                    format!("spherical branch needs r >= pi/2 - beta = {}", T::FRAC_PI_2() - beta),
                ));
            }
            Ok(ratio.acos_clamped())
        }
    }
}

pub type Mat4<T> = [[T; 4]; 4];

pub(crate) fn mat_mul<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

fn mat_vec<T: Real>(a: &Mat4<T>, v: &Vec4<T>) -> Vec4<T> {
    Vec4(std::array::from_fn(|i| (0..4).map(|k| a[i][k] * v.0[k]).sum()))
}

fn identity<T: Real>() -> Mat4<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { T::one() } else { T::zero() }))
}

/// Gauss-Jordan inverse with partial pivoting.
fn mat_inverse<T: Real>(m: &Mat4<T>) -> Option<Mat4<T>> {
    let mut a = *m;
    let mut inv = identity::<T>();
    let scale = m.iter().flatten().fold(T::zero(), |acc, x| acc.max(x.abs()));
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() <= scale * T::lit(1e-13) {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = T::one() / a[col][col];
        for j in 0..4 {
            a[col][j] *= d;
            inv[col][j] *= d;
        }
        for i in 0..4 {
            if i != col {
                let f = a[i][col];
                for j in 0..4 {
                    a[i][j] = a[i][j] - f * a[col][j];
                    inv[i][j] = inv[i][j] - f * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

/// Form-preserving linear map of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry<T> {
    pub matrix: Mat4<T>,
    pub kind: SpaceKind,
}

impl<T: Real> Isometry<T> {
    pub fn identity(kind: SpaceKind) -> Self {
        Isometry { matrix: identity(), kind }
    }

    /// Wraps a matrix after checking `M^T G M = G` to `tol`.
    pub fn from_matrix(matrix: Mat4<T>, kind: SpaceKind, tol: T) -> Result<Self> {
        let iso = Isometry { matrix, kind };
        let res = iso.form_residual();
        if res > tol {
            return Err(Error::Congruence { residual: res.to_f64_lossy() });
        }
        if kind == SpaceKind::Hyperbolic && matrix[3][3] <= T::zero() {
            return Err(domain("Isometry::from_matrix", "matrix swaps the sheets of the hyperboloid"));
        }
        Ok(iso)
    }

    /// `max |M^T G M - G|`.
    pub fn form_residual(&self) -> T {
        let g = |i: usize| if i == 3 { self.kind.sign::<T>() } else { T::one() };
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                let v: T = (0..4).map(|k| self.matrix[k][i] * g(k) * self.matrix[k][j]).sum();
                let target = if i == j { g(i) } else { T::zero() };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    pub fn reflection(plane: &GeodesicPlane<T>) -> Self {
        let n = plane.normal;
        let nl = lower(n, plane.kind);
        let two = T::lit(2.0);
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let id = if i == j { T::one() } else { T::zero() };
                id - two * n.0[i] * nl.0[j]
            })
        });
        Isometry { matrix: m, kind: plane.kind }
    }

    /// Reflection in the point `c`: the isometry fixing `c` that acts as `-1`
    /// on its tangent space.
    pub fn point_reflection(c: &Point<T>) -> Self {
        let k = c.kind.sign::<T>();
        let cl = lower(c.coords, c.kind);
        let two = T::lit(2.0);
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let id = if i == j { T::one() } else { T::zero() };
                two * k * c.coords.0[i] * cl.0[j] - id
            })
        });
        Isometry { matrix: m, kind: c.kind }
    }

    /// Transvection along the geodesic from `p` to the origin.
    pub fn to_origin(p: &Point<T>) -> Self {
        let kind = p.kind;
        let o = Point::origin(kind);
        let n = p.coords - o.coords;
        if n.euclid_norm() < T::lit(1e-15) {
            return Self::identity(kind);
        }
        let swap = Isometry::reflection(&GeodesicPlane { normal: n * (T::one() / bilinear(&n, &n, kind).sqrt()), kind });
        let s = p.coords.spatial();
        let len = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        let axis = if len < T::lit(1e-15) { [T::one(), T::zero(), T::zero()] } else { s.map(|x| x / len) };
        let fix = Isometry::reflection(&GeodesicPlane { normal: Vec4::from_spatial(axis, T::zero()), kind });
        fix.compose(&swap)
    }

    /// Isometry taking the origin to `p` and the coordinate axes to the given
    /// tangent frame at `p` (columns must be form-orthonormal).
    pub fn from_frame(p: &Point<T>, frame: [Vec4<T>; 3]) -> Result<Self> {
        let cols = [frame[0], frame[1], frame[2], p.coords];
        let m = std::array::from_fn(|i| std::array::from_fn(|j| cols[j].0[i]));
        Isometry::from_matrix(m, p.kind, T::lit(1e-9))
    }

    /// Rotation by `angle` in the coordinate plane `(i, j)` with `i, j < 3`.
    pub fn rotation(kind: SpaceKind, i: usize, j: usize, angle: T) -> Self {
        let mut m = identity::<T>();
        let (s, c) = angle.sin_cos();
        m[i][i] = c;
        m[j][j] = c;
        m[i][j] = -s;
        m[j][i] = s;
        Isometry { matrix: m, kind }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Isometry<T>) -> Self {
        Isometry { matrix: mat_mul(&self.matrix, &other.matrix), kind: self.kind }
    }

    pub fn inverse(&self) -> Self {
        // M^-1 = G M^T G for form-preserving M.
        let g = |i: usize| if i == 3 { self.kind.sign::<T>() } else { T::one() };
        let m = std::array::from_fn(|i| std::array::from_fn(|j| g(i) * self.matrix[j][i] * g(j)));
        Isometry { matrix: m, kind: self.kind }
    }

    pub fn determinant(&self) -> T {
        let c = |j: usize| Vec4(std::array::from_fn(|i| self.matrix[i][j]));
        det4(&c(0), &c(1), &c(2), &c(3))
    }

    pub fn apply_vec(&self, v: &Vec4<T>) -> Vec4<T> {
        mat_vec(&self.matrix, v)
    }

    /// Image of a point, renormalized onto the quadric.
    pub fn apply(&self, p: &Point<T>) -> Point<T> {
        Point::normalized_unchecked(mat_vec(&self.matrix, &p.coords), p.kind)
    }

    pub fn apply_plane(&self, pl: &GeodesicPlane<T>) -> GeodesicPlane<T> {
        let n = mat_vec(&self.matrix, &pl.normal);
        let q = bilinear(&n, &n, pl.kind).sqrt();
        GeodesicPlane { normal: n * (T::one() / q), kind: pl.kind }
    }

    pub fn max_abs_diff(&self, other: &Isometry<T>) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.matrix[i][j] - other.matrix[i][j]).abs());
            }
        }
        worst
    }
}

/// The unique isometry taking `src[i]` to `dst[i]`.
///
/// Pairwise distances must agree to `tol`; the four source points must span
/// the ambient space (not lie in a common plane).
pub fn isometry_from_point_correspondence<T: Real>(src: &[Point<T>; 4], dst: &[Point<T>; 4], tol: T) -> Result<Isometry<T>> {
    let kind = src[0].kind;
    if src.iter().chain(dst.iter()).any(|p| p.kind != kind) {
        return Err(Error::KindMismatch("isometry_from_point_correspondence"));
    }
    let mut worst = T::zero();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let a = distance_unchecked(&src[i], &src[j]);
            let b = distance_unchecked(&dst[i], &dst[j]);
            worst = worst.max((a - b).abs());
        }
    }
    if worst > tol {
        return Err(Error::Congruence { residual: worst.to_f64_lossy() });
    }
    let cols = |pts: &[Point<T>; 4]| -> Mat4<T> { std::array::from_fn(|i| std::array::from_fn(|j| pts[j].coords.0[i])) };
    let s = cols(src);
    let d = cols(dst);
    let s_inv = mat_inverse(&s).ok_or(Error::Rank)?;
    let iso = Isometry { matrix: mat_mul(&d, &s_inv), kind };
    let mapped = (0..4)
        .map(|i| iso.apply_vec(&src[i].coords).max_abs_diff(&dst[i].coords))
        .fold(T::zero(), T::max);
    let form = iso.form_residual();
    // The matrix solve amplifies the input mismatch by the conditioning of the
    // frame; judge the result by mapped residuals and form preservation.
    if mapped > tol || form > tol.max(T::lit(1e-9)) {
        return Err(Error::Congruence { residual: mapped.max(form).to_f64_lossy() });
    }
    Ok(iso)
}

/// Coordinate view of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    /// Spatial part of the hyperboloid (hyperbolic only).
    Hyperboloid,
    /// Beltrami-Klein projective ball (hyperbolic only).
    Klein,
    /// Upper half-space; the third coordinate is the height.
    UpperHalfSpace,
    /// Orthographic drop of the fourth coordinate (spherical: upper hemisphere).
    Ambient4D,
    /// Central projection of a hemisphere onto its tangent space (spherical only).
    Gnomonic,
}

impl ChartKind {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "hyperboloid" => ChartKind::Hyperboloid,
            "klein" => ChartKind::Klein,
            "upperhalfspace" | "upper-half-space" | "uhs" => ChartKind::UpperHalfSpace,
            "ambient4d" | "ambient" => ChartKind::Ambient4D,
            "gnomonic" => ChartKind::Gnomonic,
            _ => return None,
        })
    }

    /// Klein for hyperbolic, gnomonic for spherical.
    pub fn projective(kind: SpaceKind) -> Self {
        match kind {
            SpaceKind::Hyperbolic => ChartKind::Klein,
            SpaceKind::Spherical => ChartKind::Gnomonic,
        }
    }
}

/// A chart plus an optional centre that is moved to the origin first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart<T> {
    pub tag: ChartKind,
    pub base: Option<Point<T>>,
}

impl<T: Real> Chart<T> {
    pub fn new(tag: ChartKind) -> Self {
        Chart { tag, base: None }
    }

    pub fn centred(tag: ChartKind, base: Point<T>) -> Self {
        Chart { tag, base: Some(base) }
    }

    fn check_kind(&self, kind: SpaceKind) -> Result<()> {
        let ok = match self.tag {
            ChartKind::Hyperboloid | ChartKind::Klein | ChartKind::UpperHalfSpace => kind == SpaceKind::Hyperbolic,
            ChartKind::Gnomonic => kind == SpaceKind::Spherical,
            ChartKind::Ambient4D => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::KindMismatch("chart does not exist for this space"))
        }
    }
}

/// Chart coordinates of `p`.
pub fn chart_to<T: Real>(p: &Point<T>, chart: &Chart<T>) -> Result<[T; 3]> {
    chart.check_kind(p.kind)?;
    let q = match &chart.base {
        Some(b) => Isometry::to_origin(b).apply(p),
        None => *p,
    };
    let [x, y, z, w] = q.coords.0;
    match chart.tag {
        ChartKind::Hyperboloid => Ok([x, y, z]),
        ChartKind::Klein | ChartKind::Gnomonic => {
            if w <= T::lit(1e-12) {
                return Err(Error::ChartDomain(format!("point {:?} is not in the open hemisphere of the chart", q.coords)));
            }
            Ok([x / w, y / w, z / w])
        }
        ChartKind::UpperHalfSpace => {
            let denom = w - z;
            Ok([x / denom, y / denom, T::one() / denom])
        }
        ChartKind::Ambient4D => {
            if p.kind == SpaceKind::Spherical && w <= T::zero() {
                return Err(Error::ChartDomain("orthographic chart covers the upper hemisphere only".into()));
            }
            Ok([x, y, z])
        }
    }
}

/// Inverse of [`chart_to`].
pub fn chart_from<T: Real>(x: [T; 3], chart: &Chart<T>, kind: SpaceKind) -> Result<Point<T>> {
    chart.check_kind(kind)?;
    let one = T::one();
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let local = match chart.tag {
        ChartKind::Hyperboloid => Point { coords: Vec4::from_spatial(x, (one + r2).sqrt()), kind },
        ChartKind::Klein => {
            if r2 >= one {
                return Err(Error::ChartDomain("Klein coordinates must lie in the open unit ball".into()));
            }
            let w = one / (one - r2).sqrt();
            Point { coords: Vec4::new(x[0] * w, x[1] * w, x[2] * w, w), kind }
        }
        ChartKind::Gnomonic => {
            let w = one / (one + r2).sqrt();
            Point { coords: Vec4::new(x[0] * w, x[1] * w, x[2] * w, w), kind }
        }
        ChartKind::UpperHalfSpace => {
            let h = x[2];
            if h <= T::zero() {
                return Err(Error::ChartDomain("upper half-space height must be positive".into()));
            }
            let (px, py) = (x[0] / h, x[1] / h);
            let minus = one / h; // w - z
            let plus = (one + px * px + py * py) * h; // w + z
            let two = T::lit(2.0);
            Point { coords: Vec4::new(px, py, (plus - minus) / two, (plus + minus) / two), kind }
        }
        ChartKind::Ambient4D => match kind {
            SpaceKind::Hyperbolic => Point { coords: Vec4::from_spatial(x, (one + r2).sqrt()), kind },
            SpaceKind::Spherical => {
                if r2 >= one {
                    return Err(Error::ChartDomain("orthographic coordinates must lie in the open unit ball".into()));
                }
                Point { coords: Vec4::from_spatial(x, (one - r2).sqrt()), kind }
            }
        },
    };
    let local = Point::normalized_unchecked(local.coords, kind);
    Ok(match &chart.base {
        Some(b) => Isometry::to_origin(b).inverse().apply(&local),
        None => local,
    })
}

/// Chart centre for a finite point set: the normalized ambient mean.
pub fn barycenter<T: Real>(points: &[Point<T>]) -> Result<Point<T>> {
    let kind = points.first().ok_or_else(|| Error::Degenerate("empty point set".into()))?.kind;
    let sum = points.iter().fold(Vec4::zero(), |acc, p| acc + p.coords);
    Point::new(sum, kind).map_err(|_| Error::ChartDomain("point set has no well-defined centre".into()))
}

pub(crate) fn cross3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
pub(crate) fn norm3<T: Real>(x: &[T; 3]) -> T {
    dot3(*x, *x).sqrt()
}

pub(crate) fn sub3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    const H: SpaceKind = SpaceKind::Hyperbolic;
    const S: SpaceKind = SpaceKind::Spherical;

    #[test]
    fn form_signature() {
        let w = Vec4::<f64>::axis(3);
        let x = Vec4::<f64>::axis(0);
        assert_eq!(bilinear(&w, &w, H), -1.0);
        assert_eq!(bilinear(&w, &w, S), 1.0);
        assert_eq!(bilinear(&x, &w, H), 0.0);
        assert_eq!(bilinear(&x, &w, S), 0.0);
    }

    #[test]
    fn distance_examples() {
        let o = Point::<f64>::origin(H);
        assert_eq!(distance(&o, &o).unwrap(), 0.0);
        let q = Point::new(Vec4::new(1f64.sinh(), 0.0, 0.0, 1f64.cosh()), H).unwrap();
        assert!((distance(&o, &q).unwrap() - 1.0).abs() < 1e-15);
        let a = Point::new(Vec4::new(1.0, 0.0, 0.0, 0.0), S).unwrap();
        let b = Point::new(Vec4::new(0.0, 1.0, 0.0, 0.0), S).unwrap();
        assert!((distance(&a, &b).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(matches!(distance(&o, &a), Err(Error::KindMismatch(_))));
    }

    #[test]
    fn orthogonal_and_coincident_planes() {
        for kind in [H, S] {
            let p1 = GeodesicPlane::<f64>::new(Vec4::axis(0), kind).unwrap();
            let p2 = GeodesicPlane::<f64>::new(Vec4::axis(1), kind).unwrap();
            let a = dihedral_between_planes(&p1, &p2, NormalConvention::Interior).unwrap();
            assert!((a - FRAC_PI_2).abs() < 1e-15);
            assert!(matches!(
                dihedral_between_planes(&p1, &p1, NormalConvention::Interior),
                Err(Error::Degenerate(_))
            ));
        }
        // Two planes perpendicular to the x-axis at distances 0 and 1 are ultraparallel.
        let a = GeodesicPlane::<f64>::at_distance(H, [1.0, 0.0, 0.0], 0.0);
        let b = GeodesicPlane::<f64>::at_distance(H, [1.0, 0.0, 0.0], 1.0);
        assert!(matches!(
            dihedral_between_planes(&a, &b, NormalConvention::Interior),
            Err(Error::NonIntersecting { .. })
        ));
    }

    /// Independent oracle: an explicit right triangle `O p q` with the right
    /// angle at the foot `p`, so `|Op| = s` and both angles are measured.
    fn right_triangle_oracle(kind: SpaceKind, s: f64, leg: f64) -> (f64, f64) {
        let o = Point::origin(kind);
        let p = Point::from_polar(kind, [0.0, 0.0, 1.0], s);
        let q = p.exp(&(Vec4::new(1.0, 0.0, 0.0, 0.0) * leg));
        (angle_at(&o, &p, &q), angle_at(&q, &o, &p))
    }

    #[test]
    fn apex_plane_distance_examples() {
        // Boundary case r = pi/2 - beta.
        let s = solve_apex_plane_distance(FRAC_PI_6, FRAC_PI_3, H).unwrap();
        assert!(s.abs() < 1e-7);
        let s = solve_apex_plane_distance(0.4, FRAC_PI_3, H).unwrap();
        assert!((s - 0.736831099183371).abs() < 1e-12, "s = {s}");
        let s = solve_apex_plane_distance(FRAC_PI_2 - 1e-12, FRAC_PI_3, S).unwrap();
        assert!((s - FRAC_PI_3).abs() < 1e-9);
        assert!(solve_apex_plane_distance(0.6, FRAC_PI_3, H).is_err());
        assert!(solve_apex_plane_distance(0.4, FRAC_PI_3, S).is_err());
    }

    #[test]
    fn apex_plane_distance_matches_right_triangle_oracle() {
        for kind in [H, S] {
            for &(s, leg) in &[(0.3, 0.2), (0.7, 0.5), (0.5, 1.1)] {
                let (r, beta) = right_triangle_oracle(kind, s, leg);
                let solved = solve_apex_plane_distance(r, beta, kind).unwrap();
                assert!((solved - s).abs() < 1e-12, "{kind:?} s={s} solved={solved}");
            }
        }
    }

    fn random_isometry(kind: SpaceKind, seed: u64) -> Isometry<f64> {
        let f = |k: u64| ((seed.wrapping_mul(6364136223846793005).wrapping_add(k * 1442695040888963407) >> 11) as f64
            / (1u64 << 53) as f64)
            - 0.5;
        let p = Point::from_polar(kind, [f(1), f(2), f(3)], 1.3 * f(4).abs() + 0.1);
        Isometry::to_origin(&p)
            .inverse()
            .compose(&Isometry::rotation(kind, 0, 1, 3.0 * f(5)))
            .compose(&Isometry::rotation(kind, 1, 2, 3.0 * f(6)))
    }

    #[test]
    fn correspondence_identity_and_reflection() {
        for kind in [H, S] {
            let pts = [
                Point::from_polar(kind, [1.0, 0.0, 0.0], 0.3),
                Point::from_polar(kind, [0.0, 1.0, 0.0], 0.4),
                Point::from_polar(kind, [0.0, 0.0, 1.0], 0.5),
                Point::from_polar(kind, [-1.0, -1.0, 0.3], 0.2),
            ];
            let id = isometry_from_point_correspondence(&pts, &pts, 1e-9).unwrap();
            assert!(id.max_abs_diff(&Isometry::identity(kind)) < 1e-12);
            let plane = GeodesicPlane::at_distance(kind, [0.3, 0.4, 1.0], 0.2);
            let refl = plane.reflection();
            let img = pts.map(|p| refl.apply(&p));
            let r = isometry_from_point_correspondence(&pts, &img, 1e-9).unwrap();
            assert!(r.max_abs_diff(&refl) < 1e-10);
            assert!(r.compose(&r).max_abs_diff(&Isometry::identity(kind)) < 1e-10);
            assert!((r.determinant() + 1.0f64).abs() < 1e-10);
        }
    }

    #[test]
    fn correspondence_rejects_mismatch_and_degenerate() {
        let pts = [
            Point::from_polar(H, [1.0, 0.0, 0.0], 0.3),
            Point::from_polar(H, [0.0, 1.0, 0.0], 0.4),
            Point::from_polar(H, [0.0, 0.0, 1.0], 0.5),
            Point::origin(H),
        ];
        let mut bad = pts;
        bad[0] = Point::from_polar(H, [1.0, 0.0, 0.0], 0.31);
        assert!(matches!(isometry_from_point_correspondence(&pts, &bad, 1e-9), Err(Error::Congruence { .. })));
        let flat = [
            Point::from_polar(H, [1.0, 0.0, 0.0], 0.3),
            Point::from_polar(H, [0.0, 1.0, 0.0], 0.4),
            Point::from_polar(H, [-1.0, 0.0, 0.0], 0.5),
            Point::origin(H),
        ];
        assert!(matches!(isometry_from_point_correspondence(&flat, &flat, 1e-9), Err(Error::Rank)));
    }

    #[test]
    fn chart_examples() {
        let o = Point::<f64>::origin(H);
        assert_eq!(chart_to(&o, &Chart::new(ChartKind::Klein)).unwrap(), [0.0, 0.0, 0.0]);
        let k = chart_from([1f64.tanh(), 0.0, 0.0], &Chart::new(ChartKind::Klein), H).unwrap();
        assert!((distance(&o, &k).unwrap() - 1.0).abs() < 1e-14);
        let base = Point::from_polar(S, [0.2, 0.1, 0.5], 0.7);
        let chart = Chart::centred(ChartKind::Gnomonic, base);
        let frame = Isometry::to_origin(&base).inverse();
        let p = frame.apply(&Point::from_polar(S, [0.0, 1.0, 0.0], FRAC_PI_4));
        let x = chart_to(&p, &chart).unwrap();
        assert!((norm3(&x) - 1.0).abs() < 1e-14);
        let anti = Point::new(-base.coords, S).unwrap();
        assert!(matches!(chart_to(&anti, &chart), Err(Error::ChartDomain(_))));
        assert!(chart_to(&o, &Chart::new(ChartKind::Gnomonic)).is_err());
    }

    #[test]
    fn upper_half_space_distance_formula() {
        let c = Chart::new(ChartKind::UpperHalfSpace);
        let a: [f64; 3] = [0.3, -0.2, 0.7];
        let b: [f64; 3] = [1.1, 0.4, 1.9];
        let pa = chart_from(a, &c, H).unwrap();
        let pb = chart_from(b, &c, H).unwrap();
        let e2 = (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>();
        let expected = (1.0 + e2 / (2.0 * a[2] * b[2])).acosh();
        assert!((distance(&pa, &pb).unwrap() - expected).abs() < 1e-13);
        let o = chart_to(&Point::origin(H), &c).unwrap();
        assert_eq!(o, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn projective_charts_straighten_geodesics() {
        for kind in [H, S] {
            let chart = Chart::new(ChartKind::projective(kind));
            let p = Point::from_polar(kind, [0.3, -0.5, 0.2], 0.6);
            let q = Point::from_polar(kind, [-0.4, 0.1, 0.9], 0.8);
            let xp = chart_to(&p, &chart).unwrap();
            let xq = chart_to(&q, &chart).unwrap();
            for s in [0.25, 0.5, 0.8] {
                let xm = chart_to(&p.lerp(&q, s), &chart).unwrap();
                let c = cross3(sub3(xm, xp), sub3(xq, xp));
                assert!(norm3(&c) < 1e-9 * norm3(&sub3(xq, xp)));
            }
        }
    }

    #[test]
    fn isometry_rejects_non_form_preserving() {
        let mut m = identity::<f64>();
        m[0][0] = 2.0;
        assert!(Isometry::from_matrix(m, H, 1e-12).is_err());
        let mut flip = identity::<f64>();
        flip[3][3] = -1.0;
        assert!(Isometry::from_matrix(flip, H, 1e-12).is_err());
        assert!(Isometry::from_matrix(flip, S, 1e-12).is_ok());
    }

    #[test]
    fn point_reflection_fixes_centre() {
        let c = Point::from_polar(S, [1.0, 0.0, 0.0], FRAC_PI_2);
        let r = Isometry::point_reflection(&c);
        assert!(r.apply(&c).coords.max_abs_diff(&c.coords) < 1e-15);
        let n = Point::origin(S);
        assert!(r.apply(&n).coords.max_abs_diff(&(-n.coords)) < 1e-15);
        assert!(r.form_residual() < 1e-15);
        let _ = PI;
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn kind_strategy() -> impl Strategy<Value = SpaceKind> {
            prop_oneof![Just(H), Just(S)]
        }

        proptest! {
            #[test]
            fn distance_is_isometry_invariant(kind in kind_strategy(), seed in any::<u64>(),
                a in prop::array::uniform3(-1.0f64..1.0), b in prop::array::uniform3(-1.0f64..1.0),
                ta in 0.05f64..1.2, tb in 0.05f64..1.2) {
                prop_assume!(norm3(&a) > 0.1 && norm3(&b) > 0.1);
                let p = Point::from_polar(kind, a, ta);
                let q = Point::from_polar(kind, b, tb);
                let iso = random_isometry(kind, seed);
                prop_assert!(iso.form_residual() < 1e-12);
                let d0 = distance(&p, &q).unwrap();
                let d1 = distance(&iso.apply(&p), &iso.apply(&q)).unwrap();
                prop_assert!((d0 - d1).abs() < 1e-10);
            }

            #[test]
            fn chart_round_trips(kind in kind_strategy(), a in prop::array::uniform3(-1.0f64..1.0), t in 0.0f64..1.2,
                seed in any::<u64>()) {
                prop_assume!(norm3(&a) > 0.1);
                let p = random_isometry(kind, seed).apply(&Point::from_polar(kind, a, t));
                let base = random_isometry(kind, seed ^ 0x5555).apply(&Point::origin(kind));
                let tags: &[ChartKind] = match kind {
                    H => &[ChartKind::Hyperboloid, ChartKind::Klein, ChartKind::UpperHalfSpace, ChartKind::Ambient4D],
                    S => &[ChartKind::Gnomonic, ChartKind::Ambient4D],
                };
                for &tag in tags {
                    for chart in [Chart::new(tag), Chart::centred(tag, base)] {
                        if let Ok(x) = chart_to(&p, &chart) {
                            let back = chart_from(x, &chart, kind).unwrap();
                            prop_assert!(back.coords.max_abs_diff(&p.coords) < 1e-12 * p.coords.euclid_norm().max(1.0).powi(2));
                        }
                    }
                }
            }

            #[test]
            fn apex_plane_identity(beta in 0.05f64..1.5, frac in 0.001f64..0.999) {
                let top = FRAC_PI_2 - beta;
                let r = top * frac;
                let s = solve_apex_plane_distance(r, beta, H).unwrap();
                prop_assert!((beta.cos() - s.cosh() * r.sin()).abs() < 1e-12);
                let r = top + (FRAC_PI_2 - top) * frac;
                let s = solve_apex_plane_distance(r, beta, S).unwrap();
                prop_assert!((beta.cos() - s.cos() * r.sin()).abs() < 1e-12);
            }
        }
    }
}
