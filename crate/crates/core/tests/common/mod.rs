#![allow(dead_code)]

use qtsolve::{HermitianToeplitz, QMatrix, Quaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn quat(rng: &mut impl Rng) -> Quaternion {
    Quaternion::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

pub fn qvec(rng: &mut impl Rng, n: usize) -> Vec<Quaternion> {
    (0..n).map(|_| quat(rng)).collect()
}

pub fn qmat(rng: &mut impl Rng, rows: usize, cols: usize) -> QMatrix {
    QMatrix::from_fn(rows, cols, |_, _| quat(rng))
}

/// `B* B + shift I`, Hermitian positive definite for `shift > 0`.
pub fn hpd(rng: &mut impl Rng, n: usize, shift: f64) -> QMatrix {
    let b = qmat(rng, n, n);
    let mut a = b.conj_transpose().matmul(&b).unwrap();
    for i in 0..n {
        a.set(i, i, a.get(i, i) + Quaternion::real(shift));
    }
    // symmetrize away rounding so the diagonal is exactly real
    QMatrix::from_fn(n, n, |i, j| {
        let v = (a.get(i, j) + a.get(j, i).conj()).scale(0.5);
        if i == j {
            Quaternion::real(v.a0)
        } else {
            v
        }
    })
}

/// Random Hermitian Toeplitz column with a real diagonal entry.
pub fn toeplitz(rng: &mut impl Rng, n: usize) -> HermitianToeplitz {
    let mut col = qvec(rng, n);
    col[0] = Quaternion::real(rng.gen_range(-1.0..1.0));
    HermitianToeplitz::new(col).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn qdiff(a: Quaternion, b: Quaternion) -> f64 {
    (a - b).norm()
}
