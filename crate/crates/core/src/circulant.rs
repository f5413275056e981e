//! Quaternion circulant operators and Strang's preconditioner.
//!
//! A quaternion circulant `C = C₁ + C₂ q` (complex circulants `C₁`, `C₂`) is not
//! diagonalized by a Fourier matrix, but it is block diagonalized into `n` 2×2
//! complex blocks. With the transform `X_k = Σ_j x_j e^{+2πi jk/n}` and
//! `d_l(k) = Σ_j c_l(j) e^{+2πi jk/n}`,
//!
//! ```text
//! [Y₁(k)       ]   [ d₁(k)        −d₂(k)       ] [X₁(k)       ]
//! [conj Y₂(−k) ] = [ conj d₂(−k)   conj d₁(−k) ] [conj X₂(−k) ]
//! ```
//!
//! which follows from `FFT(conj v)_k = conj(FFT(v)_{−k})`. The partner index of
//! `k` is `n − k mod n`; `0` and (for even `n`) `n/2` are self-paired.
//!
//! For Strang's preconditioner of a symbol-built Toeplitz matrix, the block at `k`
//! equals `G[f_h](2πk/n)` with `h = ⌊(n−1)/2⌋`, the number of off-diagonals the
//! Strang column copies.

use crate::adjoint::C01;
use crate::error::{Error, Result};
use crate::fft;
use crate::pcg::LinearOperator;
use crate::quat::{QMatrix, Quaternion};
use crate::symbols::hermitian_2x2_eigenvalues;
use crate::toeplitz::{HermitianToeplitz, DEFAULT_DENSE_CAP};

/// `|det H| < SINGULAR_RTOL · ‖H‖_F²` marks a block as singular.
pub const SINGULAR_RTOL: f64 = 1e-14;
/// Duplicate eigenvalues must agree within `PAIRING_TOL · max(1, |λ|)`.
pub const PAIRING_TOL: f64 = 1e-8;

type Block = [[C01; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct QCirculant {
    col: Vec<Quaternion>,
}

impl QCirculant {
    pub fn new(col: Vec<Quaternion>) -> Result<Self> {
        if col.is_empty() {
            return Err(Error::Dimension("empty circulant column".into()));
        }
        Ok(Self { col })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut col = vec![Quaternion::ZERO; n];
        if let Some(c) = col.first_mut() {
            *c = Quaternion::ONE;
        }
        Self::new(col)
    }

    /// Strang's circulant: copies the central `⌊(n−1)/2⌋` diagonals of `t`
    /// on each side and wraps them; for even `n` the middle entry is zero.
    pub fn strang(t: &HermitianToeplitz) -> Self {
        let n = t.size();
        let h = (n - 1) / 2;
        let col = (0..n)
            .map(|j| {
                if j <= h {
                    t.column()[j]
                } else if n.is_multiple_of(2) && j == n / 2 {
                    Quaternion::ZERO
                } else {
                    t.column()[n - j].conj()
                }
            })
            .collect();
        Self { col }
    }

    pub fn size(&self) -> usize {
        self.col.len()
    }

    pub fn column(&self) -> &[Quaternion] {
        &self.col
    }

    /// Largest deviation of the column from `c₀` real, `c_{n−k} = conj c_k`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.size();
        let mut worst = self.col[0].imag_norm();
        for k in 1..n {
            worst = worst.max((self.col[n - k] - self.col[k].conj()).norm());
        }
        worst
    }

    pub fn densify(&self) -> Result<QMatrix> {
        let n = self.size();
        if n > DEFAULT_DENSE_CAP {
            return Err(Error::DenseCapExceeded {
                size: n,
                cap: DEFAULT_DENSE_CAP,
            });
        }
        Ok(QMatrix::from_fn(n, n, |i, j| self.col[(i + n - j) % n]))
    }

    pub fn block_diagonalize(&self) -> BlockDiagFactor {
        let n = self.size();
        let (mut d1, mut d2): (Vec<C01>, Vec<C01>) = self.col.iter().map(|c| c.split()).unzip();
        fft::backward(&mut d1);
        fft::backward(&mut d2);
        BlockDiagFactor { n, d1, d2 }
    }
}

/// Per-frequency 2×2 blocks of a quaternion circulant.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagFactor {
    n: usize,
    d1: Vec<C01>,
    d2: Vec<C01>,
}

/// Pre-inverted blocks; applies `C⁻¹` in `O(n log n)`.
#[derive(Debug, Clone)]
pub struct CirculantInverse {
    n: usize,
    inv: Vec<Block>,
}

impl BlockDiagFactor {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Conjugate-frequency partner of `s`.
    pub fn partner(&self, s: usize) -> usize {
        (self.n - s) % self.n
    }

    pub fn block(&self, s: usize) -> Block {
        let t = self.partner(s);
        [
            [self.d1[s], -self.d2[s]],
            [self.d2[t].conj(), self.d1[t].conj()],
        ]
    }

    pub fn blocks(&self) -> Vec<Block> {
        (0..self.n).map(|s| self.block(s)).collect()
    }

    /// Recovers the circulant column from the factor.
    pub fn reconstruct(&self) -> QCirculant {
        let mut c1 = self.d1.clone();
        let mut c2 = self.d2.clone();
        fft::forward(&mut c1);
        fft::forward(&mut c2);
        let s = 1.0 / self.n as f64;
        QCirculant {
            col: c1
                .iter()
                .zip(&c2)
                .map(|(a, b)| Quaternion::from_split(a * s, b * s))
                .collect(),
        }
    }

    fn transform(&self, x: &[Quaternion]) -> (Vec<C01>, Vec<C01>) {
        let (mut x1, mut x2): (Vec<C01>, Vec<C01>) = x.iter().map(|v| v.split()).unzip();
        fft::backward(&mut x1);
        fft::backward(&mut x2);
        (x1, x2)
    }

    fn untransform(&self, mut y1: Vec<C01>, mut y2: Vec<C01>) -> Vec<Quaternion> {
        fft::forward(&mut y1);
        fft::forward(&mut y2);
        let s = 1.0 / self.n as f64;
        y1.iter()
            .zip(&y2)
            .map(|(a, b)| Quaternion::from_split(a * s, b * s))
            .collect()
    }

    fn apply_blocks(&self, blocks: &[Block], x: &[Quaternion]) -> Vec<Quaternion> {
        let n = self.n;
        let (x1, x2) = self.transform(x);
        let zero = C01::new(0.0, 0.0);
        let mut y1 = vec![zero; n];
        let mut y2 = vec![zero; n];
        for k in 0..n {
            let t = self.partner(k);
            let b = &blocks[k];
            let (u, v) = (x1[k], x2[t].conj());
            y1[k] = b[0][0] * u + b[0][1] * v;
            y2[t] = (b[1][0] * u + b[1][1] * v).conj();
        }
        self.untransform(y1, y2)
    }

    /// `C x` through the block form.
    pub fn apply(&self, x: &[Quaternion]) -> Result<Vec<Quaternion>> {
        self.check_len(x)?;
        Ok(self.apply_blocks(&self.blocks(), x))
    }

    fn check_len(&self, x: &[Quaternion]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!(
                "circulant of size {} applied to a vector of length {}",
                self.n,
                x.len()
            )));
        }
        Ok(())
    }

    /// Inverts every block, failing on the first singular one.
    pub fn inverse(&self) -> Result<CirculantInverse> {
        let inv = (0..self.n)
            .map(|s| {
                let b = self.block(s);
                let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
                let fro2: f64 = b.iter().flatten().map(|v| v.norm_sqr()).sum();
                if det.norm() < SINGULAR_RTOL * fro2 || fro2 == 0.0 {
                    return Err(Error::SingularBlock {
                        frequency: s,
                        det_abs: det.norm(),
                    });
                }
                let r = det.inv();
                Ok([[b[1][1] * r, -b[0][1] * r], [-b[1][0] * r, b[0][0] * r]])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CirculantInverse { n: self.n, inv })
    }

    /// `C⁻¹ r`.
    pub fn solve_apply(&self, r: &[Quaternion]) -> Result<Vec<Quaternion>> {
        self.check_len(r)?;
        Ok(self.inverse()?.apply_inverse(self, r))
    }

    /// The `n` right eigenvalues in ascending order. The `2n` block eigenvalues
    /// come in coincident pairs; each pair contributes one value.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let scale = self
            .d1
            .iter()
            .chain(&self.d2)
            .map(|v| v.norm())
            .fold(f64::MIN_POSITIVE, f64::max);
        let mut all = Vec::with_capacity(2 * self.n);
        for s in 0..self.n {
            let b = self.block(s);
            let defect = b[0][0]
                .im
                .abs()
                .max(b[1][1].im.abs())
                .max((b[0][1] - b[1][0].conj()).norm());
            if defect > 1e-10 * scale {
                return Err(Error::NotHermitian(defect));
            }
            let (lo, hi) = hermitian_2x2_eigenvalues(b[0][0].re, b[1][1].re, b[0][1]);
            all.push(lo);
            all.push(hi);
        }
        collapse_pairs(all)
    }
}

impl CirculantInverse {
    pub fn size(&self) -> usize {
        self.n
    }

    fn apply_inverse(&self, factor: &BlockDiagFactor, r: &[Quaternion]) -> Vec<Quaternion> {
        factor.apply_blocks(&self.inv, r)
    }
}

/// A circulant preconditioner ready for repeated `C⁻¹` applications.
#[derive(Debug, Clone)]
pub struct CirculantPreconditioner {
    factor: BlockDiagFactor,
    inverse: CirculantInverse,
}

impl CirculantPreconditioner {
    pub fn new(c: &QCirculant) -> Result<Self> {
        let factor = c.block_diagonalize();
        let inverse = factor.inverse()?;
        Ok(Self { factor, inverse })
    }

    pub fn strang(t: &HermitianToeplitz) -> Result<Self> {
        Self::new(&QCirculant::strang(t))
    }

    pub fn factor(&self) -> &BlockDiagFactor {
        &self.factor
    }
}

impl LinearOperator for CirculantPreconditioner {
    fn dim(&self) -> usize {
        self.inverse.size()
    }

    fn apply(&self, x: &[Quaternion]) -> Vec<Quaternion> {
        self.inverse.apply_inverse(&self.factor, x)
    }
}

/// Sorts `2n` values and merges coincident pairs into `n` values.
pub fn collapse_pairs(mut all: Vec<f64>) -> Result<Vec<f64>> {
    all.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(all.len() / 2);
    for (index, pair) in all.chunks(2).enumerate() {
        let (a, b) = (pair[0], *pair.get(1).unwrap_or(&f64::NAN));
        if !((a - b).abs() <= PAIRING_TOL * a.abs().max(b.abs()).max(1.0)) {
            return Err(Error::Pairing { index, a, b });
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::qvec;

    fn q(a: f64, b: f64, c: f64, d: f64) -> Quaternion {
        Quaternion::new(a, b, c, d)
    }

    fn column(n: usize) -> Vec<Quaternion> {
        (0..n)
            .map(|k| {
                if k == 0 {
                    Quaternion::real(10.0)
                } else {
                    q(1.0 / k as f64, 0.3, -0.2 * k as f64, 0.1)
                }
            })
            .collect()
    }

    #[test]
    fn strang_columns() {
        let t = HermitianToeplitz::new(column(5)).unwrap();
        let c = t.column();
        assert_eq!(
            QCirculant::strang(&t).column(),
            &[c[0], c[1], c[2], c[2].conj(), c[1].conj()]
        );
        let t = HermitianToeplitz::new(column(4)).unwrap();
        let c = t.column();
        assert_eq!(
            QCirculant::strang(&t).column(),
            &[c[0], c[1], Quaternion::ZERO, c[1].conj()]
        );
        let one = HermitianToeplitz::new(vec![Quaternion::real(2.0)]).unwrap();
        assert_eq!(QCirculant::strang(&one).column(), &[Quaternion::real(2.0)]);
    }

    #[test]
    fn strang_of_circulant_is_identity_map() {
        // a Hermitian circulant of odd size is its own Strang preconditioner
        let base = QCirculant::strang(&HermitianToeplitz::new(column(7)).unwrap());
        let t = HermitianToeplitz::new(base.column().to_vec()).unwrap();
        assert_eq!(QCirculant::strang(&t), base);
        assert_eq!(base.hermitian_defect(), 0.0);
    }

    #[test]
    fn identity_blocks() {
        let f = QCirculant::identity(6).unwrap().block_diagonalize();
        for b in f.blocks() {
            assert!((b[0][0] - C01::new(1.0, 0.0)).norm() < 1e-15);
            assert!((b[1][1] - C01::new(1.0, 0.0)).norm() < 1e-15);
            assert!(b[0][1].norm() < 1e-15 && b[1][0].norm() < 1e-15);
        }
        assert_eq!(f.spectrum().unwrap(), vec![1.0; 6]);
    }

    #[test]
    fn scaled_identity_solve() {
        let mut col = vec![Quaternion::ZERO; 5];
        col[0] = Quaternion::real(2.0);
        let f = QCirculant::new(col).unwrap().block_diagonalize();
        let r: Vec<Quaternion> = (0..5).map(|i| q(i as f64, 1.0, 2.0, -3.0)).collect();
        let x = f.solve_apply(&r).unwrap();
        let half: Vec<Quaternion> = r.iter().map(|v| v.scale(0.5)).collect();
        assert!(qvec::rel_max_diff(&x, &half) < 1e-15);
    }

    #[test]
    fn singular_block_reports_frequency() {
        // the all-ones circulant has d₁(0) = n and d₁(s) = 0 for s ≠ 0
        let c = QCirculant::new(vec![Quaternion::ONE; 4]).unwrap();
        let err = c
            .block_diagonalize()
            .solve_apply(&[Quaternion::ONE; 4])
            .unwrap_err();
        match err {
            Error::SingularBlock { frequency, det_abs } => {
                assert_eq!(frequency, 1);
                assert!(det_abs < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reconstruct_roundtrip() {
        let c = QCirculant::new(column(9)).unwrap();
        let back = c.block_diagonalize().reconstruct();
        assert!(qvec::rel_max_diff(back.column(), c.column()) < 1e-14);
    }

    #[test]
    fn collapse_rejects_unpaired() {
        assert_eq!(
            collapse_pairs(vec![2.0, 1.0, 1.0, 2.0]).unwrap(),
            vec![1.0, 2.0]
        );
        assert!(matches!(
            collapse_pairs(vec![1.0, 1.5]),
            Err(Error::Pairing { index: 0, .. })
        ));
    }
}
