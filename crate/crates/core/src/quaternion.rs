//! Quaternion algebra and the symplectic decomposition.
//!
//! A quaternion image `f = a + b·i + c·j + d·k` is rewritten in the basis
//! `{1, μ, ν, μν}` where `μ` is the transform axis and `ν` is a fixed unit
//! pure quaternion orthogonal to it. The two halves
//! `simplex = a + (v·μ)·μ` and `perplex = (v·ν) + (v·μν)·μ` are ordinary
//! complex planes once `μ` is identified with the complex unit, so a
//! left-sided hypercomplex transform reduces to two complex transforms.

use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance accepted when validating a user supplied axis.
const AXIS_TOLERANCE: f64 = 1e-9;

/// `q = a + b·i + c·j + d·k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Scalar part S(q).
    pub fn scalar(&self) -> f64 {
        self.a
    }

    /// Vector part V(q) as `[b, c, d]`.
    pub fn vector(&self) -> [f64; 3] {
        [self.b, self.c, self.d]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// Overflow- and underflow-safe `|q|`.
    pub fn norm(&self) -> f64 {
        self.a.hypot(self.b).hypot(self.c.hypot(self.d))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// `e^{axis·θ} = cos θ + axis·sin θ`.
    pub fn exp_axis(axis: PureUnitAxis, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, axis.b * s, axis.c * s, axis.d * s)
    }
}

/// Hamilton product.
pub fn qmul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion {
        a: p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        b: p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        c: p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        d: p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, rhs: Quaternion) -> Quaternion {
        qmul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;

    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.a + rhs.a, self.b + rhs.b, self.c + rhs.c, self.d + rhs.d)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;

    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.a - rhs.a, self.b - rhs.b, self.c - rhs.c, self.d - rhs.d)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }
}

/// Unit pure quaternion `b·i + c·j + d·k` with `b² + c² + d² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct PureUnitAxis {
    b: f64,
    c: f64,
    d: f64,
}

impl PureUnitAxis {
    /// Validates that `(b, c, d)` has unit norm within 1e-9, then
    /// renormalizes it so that `axis² = -1` holds to rounding.
    pub fn new(b: f64, c: f64, d: f64) -> Result<Self> {
        let norm = (b * b + c * c + d * d).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > AXIS_TOLERANCE {
            return Err(Error::NonUnitAxis { norm });
        }
        Ok(Self {
            b: b / norm,
            c: c / norm,
            d: d / norm,
        })
    }

    /// Normalizes an arbitrary nonzero direction.
    pub fn from_direction(b: f64, c: f64, d: f64) -> Result<Self> {
        let norm = (b * b + c * c + d * d).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonUnitAxis { norm });
        }
        Self::new(b / norm, c / norm, d / norm)
    }

    /// The luminance axis `(i + j + k)/√3`.
    pub fn luminance() -> Self {
        let s = 1.0 / 3f64.sqrt();
        Self { b: s, c: s, d: s }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.b, self.c, self.d]
    }

    pub fn as_quaternion(&self) -> Quaternion {
        Quaternion::new(0.0, self.b, self.c, self.d)
    }

    /// Second basis direction ν ⟂ μ: `normalize(μ × i)`, or `normalize(μ × j)`
    /// when μ is parallel to i.
    pub fn orthogonal(&self) -> [f64; 3] {
        let mu = self.components();
        let mut v = cross(mu, [1.0, 0.0, 0.0]);
        if dot(v, v).sqrt() < 1e-6 {
            v = cross(mu, [0.0, 1.0, 0.0]);
        }
        let n = dot(v, v).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    }
}

impl TryFrom<[f64; 3]> for PureUnitAxis {
    type Error = Error;

    fn try_from([b, c, d]: [f64; 3]) -> Result<Self> {
        Self::new(b, c, d)
    }
}

impl From<PureUnitAxis> for [f64; 3] {
    fn from(axis: PureUnitAxis) -> Self {
        axis.components()
    }
}

impl Default for PureUnitAxis {
    fn default() -> Self {
        Self::luminance()
    }
}

pub(crate) fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

pub(crate) fn dot(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// Height × width field of quaternions stored as four real planes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionImage {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub c: Array2<f64>,
    pub d: Array2<f64>,
}

impl QuaternionImage {
    pub fn zeros(height: usize, width: usize) -> Self {
        let z = Array2::zeros((height, width));
        Self {
            a: z.clone(),
            b: z.clone(),
            c: z.clone(),
            d: z,
        }
    }

    pub fn from_planes(a: Array2<f64>, b: Array2<f64>, c: Array2<f64>, d: Array2<f64>) -> Result<Self> {
        let dim = a.dim();
        for p in [&b, &c, &d] {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: p.dim(),
                });
            }
        }
        if dim.0 == 0 || dim.1 == 0 {
            return Err(Error::InvalidParameter("empty quaternion image".into()));
        }
        let img = Self { a, b, c, d };
        if !img.iter().all(|q| q.is_finite()) {
            return Err(Error::InvalidParameter(
                "quaternion image has non-finite entries".into(),
            ));
        }
        Ok(img)
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut img = Self::zeros(height, width);
        for r in 0..height {
            for c in 0..width {
                img.set(r, c, f(r, c));
            }
        }
        img
    }

    pub fn height(&self) -> usize {
        self.a.nrows()
    }

    pub fn width(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.a.dim()
    }

    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        Quaternion::new(self.a[[r, c]], self.b[[r, c]], self.c[[r, c]], self.d[[r, c]])
    }

    pub fn set(&mut self, r: usize, c: usize, q: Quaternion) {
        self.a[[r, c]] = q.a;
        self.b[[r, c]] = q.b;
        self.c[[r, c]] = q.c;
        self.d[[r, c]] = q.d;
    }

    pub fn iter(&self) -> impl Iterator<Item = Quaternion> + '_ {
        self.a
            .iter()
            .zip(self.b.iter())
            .zip(self.c.iter().zip(self.d.iter()))
            .map(|((&a, &b), (&c, &d))| Quaternion::new(a, b, c, d))
    }

    /// Elementwise squared modulus.
    pub fn norm_sqr(&self) -> Array2<f64> {
        let mut out = Array2::zeros(self.dim());
        Zip::from(&mut out)
            .and(&self.a)
            .and(&self.b)
            .and(&self.c)
            .and(&self.d)
            .for_each(|o, &a, &b, &c, &d| *o = a * a + b * b + c * c + d * d);
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            a: &self.a * s,
            b: &self.b * s,
            c: &self.c * s,
            d: &self.d * s,
        }
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            (&self.a, &other.a),
            (&self.b, &other.b),
            (&self.c, &other.c),
            (&self.d, &other.d),
        ]
        .iter()
        .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
    }
}

/// Complex planes of the symplectic form `f = simplex + perplex·ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPair {
    pub simplex: Array2<Complex64>,
    pub perplex: Array2<Complex64>,
}

/// Projects every element onto the basis `{1, μ, ν, μν}`.
pub fn symplectic_split(img: &QuaternionImage, axis: PureUnitAxis) -> SymplecticPair {
    let mu = axis.components();
    let nu = axis.orthogonal();
    let mu_nu = cross(mu, nu);
    let dim = img.dim();
    let mut simplex = Array2::zeros(dim);
    let mut perplex = Array2::zeros(dim);
    Zip::from(&mut simplex)
        .and(&mut perplex)
        .and(&img.a)
        .and(&img.b)
        .and(&img.c)
        .and(&img.d)
        .for_each(|s, p, &a, &b, &c, &d| {
            let v = [b, c, d];
            *s = Complex64::new(a, dot(v, mu));
            *p = Complex64::new(dot(v, nu), dot(v, mu_nu));
        });
    SymplecticPair { simplex, perplex }
}

/// Inverse of [`symplectic_split`] for the same axis.
pub fn symplectic_merge(pair: &SymplecticPair, axis: PureUnitAxis) -> Result<QuaternionImage> {
    let dim = pair.simplex.dim();
    if pair.perplex.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: pair.perplex.dim(),
        });
    }
    let mu = axis.components();
    let nu = axis.orthogonal();
    let mu_nu = cross(mu, nu);
    let mut out = QuaternionImage::zeros(dim.0, dim.1);
    Zip::from(&mut out.a)
        .and(&mut out.b)
        .and(&mut out.c)
        .and(&mut out.d)
        .and(&pair.simplex)
        .and(&pair.perplex)
        .for_each(|a, b, c, d, s, p| {
            *a = s.re;
            let v: [f64; 3] = std::array::from_fn(|i| s.im * mu[i] + p.re * nu[i] + p.im * mu_nu[i]);
            *b = v[0];
            *c = v[1];
            *d = v[2];
        });
    Ok(out)
}
