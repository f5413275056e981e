//! Quaternion scalars, vectors and dense matrices.
//!
//! A quaternion is `a0 + a1 p + a2 q + a3 r` where `(p, q, r)` is an orthonormal
//! triple of pure units. Every orthonormal triple obeys the same multiplication
//! table as `(i, j, k)`, so the table is fixed here:
//!
//! ```text
//! p² = q² = r² = -1,   pq = -qp = r,   qr = -rq = p,   rp = -pr = q
//! ```

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[repr(C)]
pub struct Quaternion {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const P: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const Q: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const R: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        Self { a0, a1, a2, a3 }
    }

    #[inline]
    pub const fn real(a0: f64) -> Self {
        Self::new(a0, 0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a0, self.a1, self.a2, self.a3]
    }

    /// Negates the imaginary part.
    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.a0, -self.a1, -self.a2, -self.a3)
    }

    /// Euclidean dot product of the coefficient 4-vectors.
    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.a0 * other.a0 + self.a1 * other.a1 + self.a2 * other.a2 + self.a3 * other.a3
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Magnitude of the imaginary part.
    #[inline]
    pub fn imag_norm(self) -> f64 {
        (self.a1 * self.a1 + self.a2 * self.a2 + self.a3 * self.a3).sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a0 * s, self.a1 * s, self.a2 * s, self.a3 * s)
    }

    /// `conj(x) / |x|²`; returns `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        let n2 = self.norm_sqr();
        (n2 > 0.0).then(|| self.conj().scale(1.0 / n2))
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, mut e: u32) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Polar decomposition `x = |x| (cos θ + m sin θ)` with `θ ∈ [0, π]` and `m` a
    /// pure unit. Real inputs get the axis `p`.
    pub fn polar(self) -> Result<Polar> {
        let modulus = self.norm();
        if modulus == 0.0 {
            return Err(Error::Domain("polar decomposition of zero".into()));
        }
        let imag = self.imag_norm();
        let axis = if imag > 0.0 {
            Self::new(0.0, self.a1 / imag, self.a2 / imag, self.a3 / imag)
        } else {
            Self::P
        };
        let angle = imag.atan2(self.a0);
        Ok(Polar {
            modulus,
            axis,
            angle,
        })
    }

    pub fn is_finite(self) -> bool {
        self.a0.is_finite() && self.a1.is_finite() && self.a2.is_finite() && self.a3.is_finite()
    }
}

/// Result of [`Quaternion::polar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub modulus: f64,
    pub axis: Quaternion,
    pub angle: f64,
}

impl Polar {
    /// `|x| exp(m θ)`.
    pub fn reconstruct(&self) -> Quaternion {
        let (s, c) = self.angle.sin_cos();
        (Quaternion::real(c) + self.axis.scale(s)).scale(self.modulus)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}p{:+}q{:+}r", self.a0, self.a1, self.a2, self.a3)
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(
            self.a0 + o.a0,
            self.a1 + o.a1,
            self.a2 + o.a2,
            self.a3 + o.a3,
        )
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.a0 - o.a0,
            self.a1 - o.a1,
            self.a2 - o.a2,
            self.a3 - o.a3,
        )
    }
}

impl Neg for Quaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.a0, -self.a1, -self.a2, -self.a3)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    /// Hamilton product.
    #[inline]
    fn mul(self, o: Self) -> Self {
        let (a0, a1, a2, a3) = (self.a0, self.a1, self.a2, self.a3);
        let (b0, b1, b2, b3) = (o.a0, o.a1, o.a2, o.a3);
        Self::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn div(self, s: f64) -> Self {
        self.scale(1.0 / s)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign<f64> for Quaternion {
    #[inline]
    fn mul_assign(&mut self, s: f64) {
        *self = self.scale(s);
    }
}

impl From<f64> for Quaternion {
    fn from(a0: f64) -> Self {
        Self::real(a0)
    }
}

/// Vector helpers over quaternion slices.
pub mod qvec {
    use super::Quaternion;

    /// `⟨x, y⟩ = y* x = Σ conj(y_s) x_s`.
    pub fn inner(x: &[Quaternion], y: &[Quaternion]) -> Quaternion {
        debug_assert_eq!(x.len(), y.len());
        x.iter()
            .zip(y)
            .fold(Quaternion::ZERO, |acc, (&a, &b)| acc + b.conj() * a)
    }

    pub fn norm(x: &[Quaternion]) -> f64 {
        x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `y += x s` for real `s`.
    pub fn axpy(y: &mut [Quaternion], s: f64, x: &[Quaternion]) {
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi += xi.scale(s);
        }
    }

    pub fn sub(a: &[Quaternion], b: &[Quaternion]) -> Vec<Quaternion> {
        a.iter().zip(b).map(|(&x, &y)| x - y).collect()
    }

    /// Largest componentwise distance, relative to the largest entry of `reference`.
    pub fn rel_max_diff(a: &[Quaternion], reference: &[Quaternion]) -> f64 {
        let scale = reference
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        a.iter()
            .zip(reference)
            .map(|(&x, &y)| (x - y).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

/// Row-major dense quaternion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Quaternion::ONE
            } else {
                Quaternion::ZERO
            }
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Quaternion,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let n = rows.len();
        Ok(Self {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Quaternion) {
        self.data[i * self.cols + j] = v;
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Plain triple-loop product; the reference every fast kernel is checked against.
    pub fn matvec(&self, x: &[Quaternion]) -> Result<Vec<Quaternion>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .fold(Quaternion::ZERO, |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.data
    }
}
