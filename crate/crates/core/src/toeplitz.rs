//! Hermitian quaternion Toeplitz operators.
//!
//! The operator is stored as its first column `t₀ … t_{n−1}` and applied in
//! `O(n log n)`: `T = φ₁(T) + φ₂(T) q` where both parts are complex Toeplitz
//! matrices, each embedded in a `2n` circulant and applied by FFT.

use std::sync::OnceLock;

use crate::adjoint::{SplitVec, C01};
use crate::error::{Error, Result};
use crate::fft;
use crate::pcg::LinearOperator;
use crate::quat::{QMatrix, Quaternion};
use crate::symbols::SymbolModel;

/// Largest size [`HermitianToeplitz::densify`] materializes by default.
pub const DEFAULT_DENSE_CAP: usize = 2048;

#[derive(Debug)]
pub struct HermitianToeplitz {
    col: Vec<Quaternion>,
    embedding: OnceLock<Embedding>,
}

/// Spectra of the `2n` circulant embeddings of `φ₁(T)` and `φ₂(T)`.
#[derive(Debug)]
struct Embedding {
    eig1: Vec<C01>,
    eig2: Vec<C01>,
}

impl Clone for HermitianToeplitz {
    fn clone(&self) -> Self {
        Self {
            col: self.col.clone(),
            embedding: OnceLock::new(),
        }
    }
}

impl PartialEq for HermitianToeplitz {
    fn eq(&self, other: &Self) -> bool {
        self.col == other.col
    }
}

impl HermitianToeplitz {
    /// Builds the operator from its first column. `t₀` must be real up to rounding.
    pub fn new(col: Vec<Quaternion>) -> Result<Self> {
        let Some(t0) = col.first() else {
            return Err(Error::Dimension("empty Toeplitz column".into()));
        };
        if t0.imag_norm() > 1e-12 * t0.norm().max(1.0) {
            return Err(Error::InvalidModel(format!("t0 must be real, got {t0}")));
        }
        let mut col = col;
        col[0] = Quaternion::real(col[0].a0);
        Ok(Self {
            col,
            embedding: OnceLock::new(),
        })
    }

    pub fn from_symbol(model: &SymbolModel, n: usize) -> Result<Self> {
        Self::new(model.coefficients(n)?.values)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_symbol(&SymbolModel::constant(1.0), n)
    }

    pub fn size(&self) -> usize {
        self.col.len()
    }

    pub fn column(&self) -> &[Quaternion] {
        &self.col
    }

    /// `t_k` for `−n < k < n`.
    pub fn entry_at_offset(&self, k: isize) -> Quaternion {
        if k >= 0 {
            self.col[k as usize]
        } else {
            self.col[(-k) as usize].conj()
        }
    }

    pub fn densify(&self) -> Result<QMatrix> {
        self.densify_capped(DEFAULT_DENSE_CAP)
    }

    pub fn densify_capped(&self, cap: usize) -> Result<QMatrix> {
        let n = self.size();
        if n > cap {
            return Err(Error::DenseCapExceeded { size: n, cap });
        }
        Ok(QMatrix::from_fn(n, n, |s, l| {
            self.entry_at_offset(s as isize - l as isize)
        }))
    }

    fn embedding(&self) -> &Embedding {
        self.embedding.get_or_init(|| {
            let n = self.size();
            let len = 2 * n;
            let zero = C01::new(0.0, 0.0);
            let mut c1 = vec![zero; len];
            let mut c2 = vec![zero; len];
            for (k, t) in self.col.iter().enumerate() {
                let (a1, a2) = t.split();
                c1[k] = a1;
                c2[k] = a2;
                if k > 0 {
                    // first row: φ₁(t_{−k}) = conj φ₁(t_k), φ₂(t_{−k}) = −φ₂(t_k)
                    c1[len - k] = a1.conj();
                    c2[len - k] = -a2;
                }
            }
            fft::forward(&mut c1);
            fft::forward(&mut c2);
            Embedding { eig1: c1, eig2: c2 }
        })
    }

    /// `T x` in `O(n log n)`.
    pub fn matvec(&self, x: &[Quaternion]) -> Result<Vec<Quaternion>> {
        let n = self.size();
        if x.len() != n {
            return Err(Error::Dimension(format!(
                "Toeplitz operator of size {n} applied to a vector of length {}",
                x.len()
            )));
        }
        let emb = self.embedding();
        let len = 2 * n;
        let split = SplitVec::from_quaternions(x);
        let zero = C01::new(0.0, 0.0);
        let mut x1 = vec![zero; len];
        let mut x2 = vec![zero; len];
        x1[..n].copy_from_slice(&split.part1);
        x2[..n].copy_from_slice(&split.part2);
        fft::forward(&mut x1);
        fft::forward(&mut x2);
        // FFT(conj v)_k = conj(FFT(v)_{−k})
        let mut y1 = vec![zero; len];
        let mut y2 = vec![zero; len];
        for k in 0..len {
            let mk = (len - k) % len;
            let x1c = x1[mk].conj();
            let x2c = x2[mk].conj();
            y1[k] = emb.eig1[k] * x1[k] - emb.eig2[k] * x2c;
            y2[k] = emb.eig1[k] * x2[k] + emb.eig2[k] * x1c;
        }
        fft::backward(&mut y1);
        fft::backward(&mut y2);
        let scale = 1.0 / len as f64;
        Ok((0..n)
            .map(|i| Quaternion::from_split(y1[i] * scale, y2[i] * scale))
            .collect())
    }
}

impl LinearOperator for HermitianToeplitz {
    fn dim(&self) -> usize {
        self.size()
    }

    fn apply(&self, x: &[Quaternion]) -> Vec<Quaternion> {
        self.matvec(x).expect("dimension checked by the solver")
    }
}
