//! Dense right-eigenvalue oracle and spectral diagnostics.
//!
//! Right eigenvalues of a Hermitian quaternion matrix `A` are the eigenvalues of
//! its complex adjoint `M(A)`, each appearing twice.

use std::io::Write;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::adjoint::{adjoint_matrix, C01};
use crate::circulant::{collapse_pairs, QCirculant};
use crate::error::{Error, Result};
use crate::quat::QMatrix;
use crate::symbols::{grid, SymbolModel, DEFAULT_GRID};
use crate::toeplitz::{HermitianToeplitz, DEFAULT_DENSE_CAP};

/// Hermitian defect tolerated on input, relative to `max(1, max |a_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Quadrature points for the symbol side of moment checks.
pub const SZEGO_GRID: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub model: Option<String>,
    pub operator: String,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

impl SpectrumReport {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,eigenvalue")?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            writeln!(w, "{i},{l:e}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_hermitian(a: &QMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "{}x{} matrix is not square",
            a.rows(),
            a.cols()
        )));
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

fn hermitian_eigenvalues(m: &Mat<C01>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Sorted right eigenvalues of a Hermitian quaternion matrix.
pub fn dense_spectrum(a: &QMatrix) -> Result<SpectrumReport> {
    dense_spectrum_capped(a, DEFAULT_DENSE_CAP)
}

pub fn dense_spectrum_capped(a: &QMatrix, cap: usize) -> Result<SpectrumReport> {
    if a.rows() > cap {
        return Err(Error::DenseCapExceeded {
            size: a.rows(),
            cap,
        });
    }
    check_hermitian(a)?;
    let m = adjoint_matrix(a)?.to_faer();
    Ok(SpectrumReport {
        n: a.rows(),
        model: None,
        operator: "dense".into(),
        eigenvalues: collapse_pairs(hermitian_eigenvalues(&m)?)?,
    })
}

/// Spectrum of `T_n` built from the symbol.
pub fn toeplitz_spectrum(model: &SymbolModel, n: usize) -> Result<SpectrumReport> {
    let t = HermitianToeplitz::from_symbol(model, n)?;
    let mut rep = dense_spectrum(&t.densify()?)?;
    rep.model = Some(model.name());
    rep.operator = "toeplitz".into();
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    /// `(1/n) Σ F(λ_s(T_n))`.
    pub lhs: f64,
    /// `(1/4π) ∫ F(f̂) + F(f̌)`.
    pub rhs: f64,
    /// `|lhs − rhs| / |rhs|` (absolute when `rhs = 0`).
    pub gap: f64,
}

impl MomentCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        let diff = (lhs - rhs).abs();
        let gap = if rhs == 0.0 { diff } else { diff / rhs.abs() };
        Self { lhs, rhs, gap }
    }
}

/// Compares the eigenvalue average of `F` with its symbol-side limit.
pub fn szego_moment_check(
    model: &SymbolModel,
    n: usize,
    f: impl Fn(f64) -> f64,
) -> Result<MomentCheck> {
    let eig = toeplitz_spectrum(model, n)?.eigenvalues;
    Ok(moment_from_spectrum(model, &eig, f))
}

pub fn moment_from_spectrum(
    model: &SymbolModel,
    eig: &[f64],
    f: impl Fn(f64) -> f64,
) -> MomentCheck {
    let lhs = eig.iter().map(|&l| f(l)).sum::<f64>() / eig.len() as f64;
    // periodic trapezoid rule: the mean over a uniform grid
    let rhs = grid(SZEGO_GRID)
        .map(|x| {
            let (lo, hi) = model.extremal(x);
            f(lo) + f(hi)
        })
        .sum::<f64>()
        / (2.0 * SZEGO_GRID as f64);
    MomentCheck::new(lhs, rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub n: usize,
    pub eps: f64,
    /// Eigenvalues of `c(T_n)⁻¹ T_n` outside `[1 − ε, 1 + ε]`.
    pub outside_count: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    /// `2 min f̌ / (3 max f̂)` on the default grid.
    pub lower_bound: f64,
}

/// Sorted eigenvalues of `c(T_n)⁻¹ T_n` for Strang's `c`, computed from the
/// Hermitian form `M(c)^{−1/2} M(T) M(c)^{−1/2}`.
pub fn preconditioned_spectrum(model: &SymbolModel, n: usize) -> Result<Vec<f64>> {
    let t = HermitianToeplitz::from_symbol(model, n)?;
    let c = QCirculant::strang(&t);
    let mc = adjoint_matrix(&c.densify()?)?.to_faer();
    let mt = adjoint_matrix(&t.densify()?)?.to_faer();
    let evd = mc
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let dim = mc.nrows();
    let smin = (0..dim).map(|i| s[i].re).fold(f64::INFINITY, f64::min);
    if !(smin > 0.0) {
        return Err(Error::NotPositiveDefinite(smin));
    }
    let w = Mat::<C01>::from_fn(dim, dim, |i, j| u[(i, j)] * (1.0 / s[j].re.sqrt()));
    let inv_sqrt = &w * u.adjoint();
    let k = &inv_sqrt * &mt * &inv_sqrt;
    collapse_pairs(hermitian_eigenvalues(&k)?)
}

pub fn clustering_from_spectrum(model: &SymbolModel, eig: &[f64], eps: f64) -> ClusteringReport {
    let (lo, hi) = model.extrema(DEFAULT_GRID);
    ClusteringReport {
        n: eig.len(),
        eps,
        outside_count: eig.iter().filter(|&&l| (l - 1.0).abs() > eps).count(),
        min_eig: eig.first().copied().unwrap_or(f64::NAN),
        max_eig: eig.last().copied().unwrap_or(f64::NAN),
        lower_bound: 2.0 * lo / (3.0 * hi),
    }
}

pub fn clustering_report(model: &SymbolModel, n: usize, eps: f64) -> Result<ClusteringReport> {
    let eig = preconditioned_spectrum(model, n)?;
    Ok(clustering_from_spectrum(model, &eig, eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::Quaternion;

    #[test]
    fn diagonal() {
        let a = QMatrix::from_fn(3, 3, |i, j| {
            Quaternion::real(if i == j { (3 - i) as f64 } else { 0.0 })
        });
        let eig = dense_spectrum(&a).unwrap().eigenvalues;
        for (l, e) in eig.iter().zip([1.0, 2.0, 3.0]) {
            assert!((l - e).abs() < 1e-13);
        }
    }

    #[test]
    fn off_diagonal_q() {
        let a = QMatrix::from_rows(vec![
            vec![Quaternion::ZERO, Quaternion::Q],
            vec![-Quaternion::Q, Quaternion::ZERO],
        ])
        .unwrap();
        let eig = dense_spectrum(&a).unwrap().eigenvalues;
        assert!((eig[0] + 1.0).abs() < 1e-13 && (eig[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = QMatrix::from_rows(vec![
            vec![Quaternion::ONE, Quaternion::P],
            vec![Quaternion::P, Quaternion::ONE],
        ])
        .unwrap();
        assert!(matches!(dense_spectrum(&a), Err(Error::NotHermitian(_))));
        assert!(matches!(
            dense_spectrum_capped(&QMatrix::identity(4), 3),
            Err(Error::DenseCapExceeded { .. })
        ));
    }

    #[test]
    fn constant_symbol_moments() {
        let one = SymbolModel::constant(1.0);
        let m = szego_moment_check(&one, 8, |_| 1.0).unwrap();
        assert_eq!((m.lhs, m.rhs), (1.0, 1.0));
        let c = clustering_report(&one, 8, 0.1).unwrap();
        assert_eq!(c.outside_count, 0);
        assert!((c.min_eig - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ma1_first_moment() {
        let ma = SymbolModel::ma1(Quaternion::real(0.5), 1.0);
        let m = szego_moment_check(&ma, 16, |l| l).unwrap();
        assert!((m.lhs - 5.0).abs() < 1e-12);
        assert!((m.rhs - 5.0).abs() < 1e-12);
    }

    #[test]
    fn report_serialization() {
        let rep = SpectrumReport {
            n: 2,
            model: Some("ma1".into()),
            operator: "toeplitz".into(),
            eigenvalues: vec![0.5, 2.0],
        };
        let mut csv = Vec::new();
        rep.write_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "index,eigenvalue\n0,5e-1\n1,2e0\n"
        );
        let back: SpectrumReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
    }
}
