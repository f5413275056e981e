//! The `φ₁/φ₂` split and the complex-adjoint maps.
//!
//! Every quaternion `X` is uniquely `φ₁(X) + φ₂(X) q` with both parts in the
//! commutative subalgebra spanned by `1` and `p`. That subalgebra is a copy of the
//! complex field (`p` plays `i`), so the parts are stored as [`C01`] complex numbers
//! and all fast kernels run on ordinary complex arithmetic.
//!
//! Products across the split use `q c = conj(c) q` for `c` in the subalgebra:
//!
//! ```text
//! (A₁ + A₂q)(x₁ + x₂q) = (A₁x₁ − A₂ conj(x₂)) + (A₁x₂ + A₂ conj(x₁)) q
//! ```
//!
//! The adjoint map `M(A) = [[φ₁(A), −φ₂(A)], [conj φ₂(A), conj φ₁(A)]]` pairs with
//! the vector map `V(x) = [φ₁(x); conj φ₂(x)]`, which is the stacking for which
//! `V(Ax) = M(A) V(x)` holds.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quat::{QMatrix, Quaternion};

/// Element of the `{x + y p}` subalgebra, stored as a complex number.
pub type C01 = Complex64;

impl Quaternion {
    /// `(φ₁(x), φ₂(x))`.
    #[inline]
    pub fn split(self) -> (C01, C01) {
        (C01::new(self.a0, self.a1), C01::new(self.a2, self.a3))
    }

    /// Inverse of [`Quaternion::split`]: `part1 + part2 q`.
    #[inline]
    pub fn from_split(part1: C01, part2: C01) -> Self {
        Self::new(part1.re, part1.im, part2.re, part2.im)
    }

    /// Embeds a subalgebra element.
    #[inline]
    pub fn from_c01(c: C01) -> Self {
        Self::new(c.re, c.im, 0.0, 0.0)
    }
}

/// Split form of a quaternion vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitVec {
    pub part1: Vec<C01>,
    pub part2: Vec<C01>,
}

impl SplitVec {
    pub fn from_quaternions(x: &[Quaternion]) -> Self {
        let (part1, part2) = x.iter().map(|v| v.split()).unzip();
        Self { part1, part2 }
    }

    pub fn recombine(&self) -> Vec<Quaternion> {
        self.part1
            .iter()
            .zip(&self.part2)
            .map(|(&a, &b)| Quaternion::from_split(a, b))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.part1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.part1.is_empty()
    }
}

/// Split form of a quaternion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMat {
    pub part1: CMatrix,
    pub part2: CMatrix,
}

impl SplitMat {
    pub fn from_qmatrix(a: &QMatrix) -> Self {
        let part1 = CMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j).split().0);
        let part2 = CMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j).split().1);
        Self { part1, part2 }
    }

    pub fn recombine(&self) -> QMatrix {
        QMatrix::from_fn(self.part1.rows(), self.part1.cols(), |i, j| {
            Quaternion::from_split(self.part1.get(i, j), self.part2.get(i, j))
        })
    }
}

/// `M(A)`, a `2n × 2n` complex matrix.
pub fn adjoint_matrix(a: &QMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "adjoint map needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    Ok(CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (p1, p2) = a.get(i % n, j % n).split();
        match (i < n, j < n) {
            (true, true) => p1,
            (true, false) => -p2,
            (false, true) => p2.conj(),
            (false, false) => p1.conj(),
        }
    }))
}

/// `V(x) = [φ₁(x); conj φ₂(x)]`.
pub fn adjoint_vector(x: &[Quaternion]) -> Vec<C01> {
    let n = x.len();
    let mut out = vec![C01::new(0.0, 0.0); 2 * n];
    for (i, v) in x.iter().enumerate() {
        let (p1, p2) = v.split();
        out[i] = p1;
        out[n + i] = p2.conj();
    }
    out
}

/// Inverse of [`adjoint_vector`]: `z₁ + conj(z₂) q`.
pub fn adjoint_vector_inverse(z: &[C01]) -> Result<Vec<Quaternion>> {
    if !z.len().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "adjoint vector must have even length, got {}",
            z.len()
        )));
    }
    let n = z.len() / 2;
    Ok((0..n)
        .map(|i| Quaternion::from_split(z[i], z[n + i].conj()))
        .collect())
}

/// Quaternion matrix-vector product through four complex products.
pub fn csplit_qmatvec(a: &SplitMat, x: &SplitVec) -> Result<SplitVec> {
    if a.part1.cols() != x.len() || a.part2.cols() != x.len() {
        return Err(Error::Dimension(format!(
            "split matrix has {} columns, split vector has {} entries",
            a.part1.cols(),
            x.len()
        )));
    }
    let x1c: Vec<C01> = x.part1.iter().map(|c| c.conj()).collect();
    let x2c: Vec<C01> = x.part2.iter().map(|c| c.conj()).collect();
    let a1x1 = a.part1.matvec(&x.part1);
    let a2x2c = a.part2.matvec(&x2c);
    let a1x2 = a.part1.matvec(&x.part2);
    let a2x1c = a.part2.matvec(&x1c);
    Ok(SplitVec {
        part1: a1x1.iter().zip(&a2x2c).map(|(u, v)| u - v).collect(),
        part2: a1x2.iter().zip(&a2x1c).map(|(u, v)| u + v).collect(),
    })
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C01>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C01::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| C01::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C01) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C01 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C01) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matvec(&self, x: &[C01]) -> Vec<C01> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
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
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out.data[i * other.cols..(i + 1) * other.cols]
                    .iter_mut()
                    .zip(row)
                {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn hermitian_defect(&self) -> f64 {
        if self.rows != self.cols {
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

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[C01]) -> Result<Vec<C01>> {
        let n = self.rows;
        if n != self.cols || b.len() != n {
            return Err(Error::Dimension("solve needs a square system".into()));
        }
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .unwrap_or(k);
            if a[piv * n + k].norm() == 0.0 {
                return Err(Error::Domain("singular matrix".into()));
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                x.swap(k, piv);
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                if f == C01::new(0.0, 0.0) {
                    continue;
                }
                for j in k..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
                let xk = x[k];
                x[i] -= f * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[k * n + j] * x[j];
            }
            x[k] = s / a[k * n + k];
        }
        Ok(x)
    }

    pub(crate) fn to_faer(&self) -> faer::Mat<C01> {
        faer::Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }
}
