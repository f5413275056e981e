//! Generating functions of Hermitian quaternion Toeplitz families.
//!
//! A covariance sequence `η(0), η(1), …` (with `η(0)` real) defines the family
//! `t_s = η(s)`, `t_{-s} = conj η(s)` and the symbol
//!
//! ```text
//! f(θ) = η(0) + Σ_{s≥1} η(s) e^{psθ} + conj(η(s)) e^{-psθ}
//! ```
//!
//! whose split parts are
//!
//! ```text
//! φ₁(f)(θ) = η(0) + 2 Σ Re(φ₁(η(s)) e^{isθ})          (real valued)
//! φ₂(f)(θ) = −2i Σ φ₂(η(s)) sin(sθ)                  (odd)
//! ```
//!
//! The 2×2 block symbol is taken in its Hermitian form
//! `G[f](x) = [[φ₁(f)(x), φ₂(f)(x)], [conj φ₂(f)(x), φ₁(f)(−x)]]`; its eigenvalues
//! are `f̌(x) ≤ f̂(x)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adjoint::C01;
use crate::error::{Error, Result};
use crate::quat::Quaternion;

/// Default grid resolution for symbol extrema.
pub const DEFAULT_GRID: usize = 4096;
/// Coarsest grid [`SymbolModel::hpd_test`] accepts.
pub const MIN_GRID: usize = 64;

type SymbolFn = dyn Fn(f64) -> (C01, C01) + Send + Sync;

/// A symbol known only through closed-form `φ₁(f)`, `φ₂(f)`.
#[derive(Clone)]
pub struct ClosedForm {
    name: String,
    phi: Arc<SymbolFn>,
}

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedForm")
            .field("name", &self.name)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ar1,
    Ma1,
    Finite,
    Closed,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Ar1 => "ar1",
            ModelKind::Ma1 => "ma1",
            ModelKind::Finite => "finite",
            ModelKind::Closed => "closed",
        })
    }
}

#[derive(Debug, Clone)]
pub enum SymbolModel {
    /// `x(t) = β x(t−1) + e(t)`, `η(s) = 4δ²βˢ/(1−|β|²)`.
    Ar1 {
        beta: Quaternion,
        delta: f64,
    },
    /// `x(t) = β e(t−1) + e(t)`, `η = (4δ²(|β|²+1), 4δ²β, 0, …)`.
    Ma1 {
        beta: Quaternion,
        delta: f64,
    },
    /// Finitely supported covariance `η(0..len)`, zero afterwards.
    Finite(Vec<Quaternion>),
    Closed(ClosedForm),
}

/// First-column coefficients extracted from a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub values: Vec<Quaternion>,
    /// Set when the values came from quadrature rather than an exact `η`.
    pub approximate: bool,
    pub warnings: Vec<String>,
}

/// Truncation order for symbol evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Full,
    Partial(usize),
}

/// `G[f](x)` as a 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GBlock(pub [[C01; 2]; 2]);

impl GBlock {
    pub fn from_parts(phi1_x: C01, phi1_neg_x: C01, phi2_x: C01) -> Self {
        GBlock([[phi1_x, phi2_x], [phi2_x.conj(), phi1_neg_x]])
    }

    pub fn hermitian_defect(&self) -> f64 {
        let m = &self.0;
        (m[0][0].im.abs())
            .max(m[1][1].im.abs())
            .max((m[0][1] - m[1][0].conj()).norm())
    }

    /// Eigenvalues `(min, max)` of the Hermitian part.
    pub fn eigenvalues(&self) -> (f64, f64) {
        hermitian_2x2_eigenvalues(self.0[0][0].re, self.0[1][1].re, self.0[0][1])
    }
}

/// Eigenvalues of `[[a, b], [conj b, d]]` with `a, d` real.
pub fn hermitian_2x2_eigenvalues(a: f64, d: f64, b: C01) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let rad = half_gap.hypot(b.norm());
    (mean - rad, mean + rad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HpdVerdict {
    Definite,
    Semidefinite,
    Indefinite,
}

/// Evaluates the split symbol of a truncated covariance sequence.
pub fn series_symbol(eta: &[Quaternion], x: f64) -> (C01, C01) {
    let Some(first) = eta.first() else {
        return (C01::new(0.0, 0.0), C01::new(0.0, 0.0));
    };
    let mut phi1 = first.a0;
    let mut phi2 = C01::new(0.0, 0.0);
    for (s, e) in eta.iter().enumerate().skip(1) {
        let (e1, e2) = e.split();
        let (sn, cs) = (s as f64 * x).sin_cos();
        phi1 += 2.0 * (e1.re * cs - e1.im * sn);
        phi2 += e2 * C01::new(0.0, -2.0 * sn);
    }
    (C01::new(phi1, 0.0), phi2)
}

/// Uniform periodic grid `−π + 2πj/N`, `j = 0..N`.
pub fn grid(points: usize) -> impl Iterator<Item = f64> + Clone {
    (0..points).map(move |j| -PI + 2.0 * PI * j as f64 / points as f64)
}

impl SymbolModel {
    pub fn ar1(beta: Quaternion, delta: f64) -> Result<Self> {
        if !(beta.norm() < 1.0) {
            return Err(Error::InvalidModel(format!(
                "AR(1) needs |beta| < 1, got {}",
                beta.norm()
            )));
        }
        Ok(SymbolModel::Ar1 { beta, delta })
    }

    pub fn ma1(beta: Quaternion, delta: f64) -> Self {
        SymbolModel::Ma1 { beta, delta }
    }

    /// Finitely supported covariance; `η(0)` must be real.
    pub fn finite(eta: Vec<Quaternion>) -> Result<Self> {
        if let Some(e0) = eta.first() {
            if e0.imag_norm() > 1e-14 * e0.norm().max(1.0) {
                return Err(Error::InvalidModel(format!(
                    "eta(0) must be real, got {e0}"
                )));
            }
        }
        let mut eta = eta;
        if let Some(e0) = eta.first_mut() {
            *e0 = Quaternion::real(e0.a0);
        }
        Ok(SymbolModel::Finite(eta))
    }

    /// `f ≡ c`.
    pub fn constant(c: f64) -> Self {
        SymbolModel::Finite(vec![Quaternion::real(c)])
    }

    /// User-supplied closed form. Rejected unless `φ₁(f)` is real and `φ₂(f)` odd
    /// on a 1024-point check grid.
    pub fn closed_form(
        name: impl Into<String>,
        phi: impl Fn(f64) -> (C01, C01) + Send + Sync + 'static,
    ) -> Result<Self> {
        let model = SymbolModel::Closed(ClosedForm {
            name: name.into(),
            phi: Arc::new(phi),
        });
        let (imag, odd) = model.structure_defect(1024);
        let scale = grid(1024)
            .map(|x| {
                let (a, b) = model.phi(x);
                a.norm().max(b.norm())
            })
            .fold(1.0, f64::max);
        if imag > 1e-10 * scale || odd > 1e-10 * scale {
            return Err(Error::InvalidModel(format!(
                "symbol violates the Hermitian structure: max |Im phi1| = {imag:e}, \
                 max |phi2(x) + phi2(-x)| = {odd:e}"
            )));
        }
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            SymbolModel::Ar1 { .. } => ModelKind::Ar1,
            SymbolModel::Ma1 { .. } => ModelKind::Ma1,
            SymbolModel::Finite(_) => ModelKind::Finite,
            SymbolModel::Closed(_) => ModelKind::Closed,
        }
    }

    pub fn name(&self) -> String {
        match self {
            SymbolModel::Closed(c) => c.name.clone(),
            other => other.kind().to_string(),
        }
    }

    /// `η(s)`, when the model carries a covariance sequence.
    pub fn eta(&self, s: usize) -> Option<Quaternion> {
        match self {
            SymbolModel::Ar1 { beta, delta } => {
                let c = 4.0 * delta * delta / (1.0 - beta.norm_sqr());
                Some(beta.powi(s as u32).scale(c))
            }
            SymbolModel::Ma1 { beta, delta } => {
                let c = 4.0 * delta * delta;
                Some(match s {
                    0 => Quaternion::real(c * (beta.norm_sqr() + 1.0)),
                    1 => beta.scale(c),
                    _ => Quaternion::ZERO,
                })
            }
            SymbolModel::Finite(eta) => Some(eta.get(s).copied().unwrap_or(Quaternion::ZERO)),
            SymbolModel::Closed(_) => None,
        }
    }

    /// `Σ_{s>m} |η(s)|` when known.
    pub fn tail_bound(&self, m: usize) -> Option<f64> {
        match self {
            SymbolModel::Ar1 { beta, delta } => {
                let b = beta.norm();
                let c = 4.0 * delta * delta / (1.0 - b * b);
                Some(c * b.powi(m as i32 + 1) / (1.0 - b))
            }
            SymbolModel::Ma1 { beta, delta } => Some(if m == 0 {
                4.0 * delta * delta * beta.norm()
            } else {
                0.0
            }),
            SymbolModel::Finite(eta) => Some(eta.iter().skip(m + 1).map(|e| e.norm()).sum()),
            SymbolModel::Closed(_) => None,
        }
    }

    /// `t_0 … t_{n−1}`. Closed-form-only models fall back to a trapezoid rule on
    /// `max(8n, 64)` points.
    pub fn coefficients(&self, n: usize) -> Result<Coefficients> {
        match self {
            SymbolModel::Closed(_) => {
                let points = (8 * n).max(64);
                let mut values = Vec::with_capacity(n);
                let xs: Vec<f64> = grid(points).collect();
                let phis: Vec<(C01, C01)> = xs.iter().map(|&x| self.phi(x)).collect();
                for s in 0..n {
                    let mut c1 = C01::new(0.0, 0.0);
                    let mut c2 = C01::new(0.0, 0.0);
                    for (&x, &(p1, p2)) in xs.iter().zip(&phis) {
                        let e = C01::from_polar(1.0, s as f64 * x);
                        c1 += p1 * e.conj();
                        c2 += p2 * e;
                    }
                    c1 /= points as f64;
                    c2 /= points as f64;
                    values.push(Quaternion::from_split(c1, c2));
                }
                if let Some(t0) = values.first_mut() {
                    *t0 = Quaternion::real(t0.a0);
                }
                Ok(Coefficients {
                    values,
                    approximate: true,
                    warnings: vec![format!(
                        "coefficients of '{}' computed by {points}-point quadrature without decay metadata",
                        self.name()
                    )],
                })
            }
            _ => Ok(Coefficients {
                values: (0..n)
                    .map(|s| self.eta(s).expect("covariance model"))
                    .collect(),
                approximate: false,
                warnings: Vec::new(),
            }),
        }
    }

    /// `(φ₁(f)(x), φ₂(f)(x))` of the full symbol.
    pub fn phi(&self, x: f64) -> (C01, C01) {
        match self {
            SymbolModel::Ar1 { beta, delta } => ar1_symbol(*beta, *delta, x),
            SymbolModel::Ma1 { beta, delta } => {
                let c = 8.0 * delta * delta;
                let (sn, cs) = x.sin_cos();
                (
                    C01::new(
                        4.0 * delta * delta * (beta.norm_sqr() + 1.0)
                            + c * (beta.a0 * cs - beta.a1 * sn),
                        0.0,
                    ),
                    C01::new(c * beta.a3 * sn, -c * beta.a2 * sn),
                )
            }
            SymbolModel::Finite(eta) => series_symbol(eta, x),
            SymbolModel::Closed(c) => (c.phi)(x),
        }
    }

    /// Split symbol truncated to the given order.
    pub fn phi_order(&self, x: f64, order: Order) -> (C01, C01) {
        match order {
            Order::Full => self.phi(x),
            Order::Partial(m) => match self.coefficients(m + 1) {
                Ok(c) => series_symbol(&c.values, x),
                Err(_) => self.phi(x),
            },
        }
    }

    pub fn g_block(&self, x: f64, order: Order) -> GBlock {
        let (a, b) = self.phi_order(x, order);
        let (d, _) = self.phi_order(-x, order);
        GBlock::from_parts(a, d, b)
    }

    /// `(f̌(x), f̂(x))` via the closed-form 2×2 eigenvalues.
    pub fn extremal(&self, x: f64) -> (f64, f64) {
        let (a, b) = self.phi(x);
        let (d, _) = self.phi(-x);
        let sum = a.re + d.re;
        let rad = ((a.re - d.re).powi(2) + 4.0 * b.norm_sqr()).sqrt();
        (0.5 * (sum - rad), 0.5 * (sum + rad))
    }

    /// `(min f̌, max f̂)` over a uniform grid.
    pub fn extrema(&self, points: usize) -> (f64, f64) {
        grid(points).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            let (a, b) = self.extremal(x);
            (lo.min(a), hi.max(b))
        })
    }

    /// `(max |Im φ₁(f)|, max |φ₂(f)(x) + φ₂(f)(−x)|)` over the grid.
    pub fn structure_defect(&self, points: usize) -> (f64, f64) {
        grid(points).fold((0.0f64, 0.0f64), |(im, odd), x| {
            let (a, b) = self.phi(x);
            let (_, bn) = self.phi(-x);
            (im.max(a.im.abs()), odd.max((b + bn).norm()))
        })
    }

    /// Checks the sufficient HPD conditions on a grid:
    /// (i) `|φ₂(x)|² ≤ φ₁(x)φ₁(−x)` and `φ₁(x) ≥ 0` everywhere,
    /// (ii) strict inequality somewhere.
    pub fn hpd_test(&self, points: usize) -> Result<HpdVerdict> {
        if points < MIN_GRID {
            return Err(Error::GridTooCoarse(points, MIN_GRID));
        }
        let samples: Vec<(f64, f64, f64)> = grid(points)
            .map(|x| {
                let (a, b) = self.phi(x);
                let (d, _) = self.phi(-x);
                (a.re, d.re, b.norm_sqr())
            })
            .collect();
        let scale = samples
            .iter()
            .map(|&(a, d, b2)| (a * d).abs().max(b2).max(a * a))
            .fold(0.0, f64::max);
        let tol = 1e-12 * scale;
        let mut strict = false;
        for &(a, d, b2) in &samples {
            let gap = a * d - b2;
            if gap < -tol || a < -tol.sqrt() {
                return Ok(HpdVerdict::Indefinite);
            }
            if gap > tol {
                strict = true;
            }
        }
        Ok(if strict {
            HpdVerdict::Definite
        } else {
            HpdVerdict::Semidefinite
        })
    }
}

/// Closed-form split symbol of the AR(1) covariance.
fn ar1_symbol(beta: Quaternion, delta: f64, theta: f64) -> (C01, C01) {
    let b = beta.norm();
    let c = 4.0 * delta * delta / (1.0 - b * b);
    if b == 0.0 {
        return (C01::new(c, 0.0), C01::new(0.0, 0.0));
    }
    let polar = beta.polar().expect("nonzero beta");
    let (m, t0) = (polar.axis, polar.angle);
    let ratio = |u: f64| {
        let (s, cs) = u.sin_cos();
        let num = 1.0 - b * cs;
        num / (num * num + b * b * s * s)
    };
    let plus = ratio(theta + t0);
    let minus = ratio(theta - t0);
    let phi1 = c * (-1.0 + (1.0 + m.a1) * plus + (1.0 - m.a1) * minus);
    let w = minus - plus;
    (C01::new(phi1, 0.0), C01::new(c * m.a3 * w, -c * m.a2 * w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: f64, b: f64, c: f64, d: f64) -> Quaternion {
        Quaternion::new(a, b, c, d)
    }

    #[test]
    fn ma1_coefficients() {
        let m = SymbolModel::ma1(Quaternion::real(0.5), 1.0);
        let c = m.coefficients(3).unwrap();
        assert_eq!(
            c.values,
            vec![
                Quaternion::real(5.0),
                Quaternion::real(2.0),
                Quaternion::ZERO
            ]
        );
        assert!(!c.approximate);
    }

    #[test]
    fn ar1_coefficients() {
        let m = SymbolModel::ar1(Quaternion::real(0.5), 1.0).unwrap();
        let c = m.coefficients(3).unwrap().values;
        assert!((c[0].a0 - 16.0 / 3.0).abs() < 1e-14);
        assert!((c[1].a0 - 8.0 / 3.0).abs() < 1e-14);
        assert!((c[2].a0 - 4.0 / 3.0).abs() < 1e-14);
        assert!(SymbolModel::ar1(q(0.6, 0.0, 0.8, 0.0), 1.0).is_err());
    }

    #[test]
    fn constant_symbol() {
        let m = SymbolModel::constant(1.0);
        assert_eq!(
            m.coefficients(4).unwrap().values,
            vec![
                Quaternion::ONE,
                Quaternion::ZERO,
                Quaternion::ZERO,
                Quaternion::ZERO
            ]
        );
    }

    #[test]
    fn g_block_even_real_symbol_is_diagonal() {
        let m = SymbolModel::finite(vec![Quaternion::real(3.0), Quaternion::real(1.0)]).unwrap();
        let g = m.g_block(0.7, Order::Full);
        assert_eq!(g.0[0][1], C01::new(0.0, 0.0));
        assert!((g.0[0][0] - g.0[1][1]).norm() < 1e-15);
    }

    #[test]
    fn g_block_ma1_at_zero() {
        let m = SymbolModel::ma1(Quaternion::real(0.5), 1.0);
        let g = m.g_block(0.0, Order::Full);
        assert_eq!(g.0[0][0], C01::new(9.0, 0.0));
        assert_eq!(g.0[1][1], C01::new(9.0, 0.0));
        assert_eq!(g.0[0][1].norm(), 0.0);
    }

    #[test]
    fn extremal_ma1_minimum() {
        let m = SymbolModel::ma1(Quaternion::real(0.5), 1.0);
        let (lo, _) = m.extremal(PI);
        assert!((lo - 1.0).abs() < 1e-13);
        let (lo, _) = m.extrema(DEFAULT_GRID);
        assert!((lo - 1.0).abs() < 1e-13);
    }

    #[test]
    fn extremal_without_phi2_is_min_of_phi1() {
        let m = SymbolModel::finite(vec![Quaternion::real(3.0), q(0.4, 0.9, 0.0, 0.0)]).unwrap();
        for x in grid(97) {
            let (lo, _) = m.extremal(x);
            let a = m.phi(x).0.re;
            let d = m.phi(-x).0.re;
            assert!((lo - a.min(d)).abs() < 1e-13);
        }
    }

    #[test]
    fn hpd_verdicts() {
        let ma = SymbolModel::ma1(q(0.3, -0.2, 0.1, 0.4), 1.0);
        assert_eq!(ma.hpd_test(DEFAULT_GRID).unwrap(), HpdVerdict::Definite);
        assert_eq!(
            SymbolModel::constant(0.0).hpd_test(256).unwrap(),
            HpdVerdict::Semidefinite
        );
        let odd = SymbolModel::closed_form("sin", |x| (C01::new(0.0, 0.0), C01::new(x.sin(), 0.0)))
            .unwrap();
        assert_eq!(odd.hpd_test(256).unwrap(), HpdVerdict::Indefinite);
        assert!(matches!(ma.hpd_test(32), Err(Error::GridTooCoarse(32, 64))));
    }

    #[test]
    fn closed_form_rejects_broken_structure() {
        let even_phi2 =
            SymbolModel::closed_form("bad", |x| (C01::new(1.0, 0.0), C01::new(x.cos(), 0.0)));
        assert!(matches!(even_phi2, Err(Error::InvalidModel(_))));
        let complex_phi1 =
            SymbolModel::closed_form("bad", |x| (C01::new(1.0, x.sin()), C01::new(0.0, 0.0)));
        assert!(complex_phi1.is_err());
    }

    #[test]
    fn quadrature_recovers_ma1_coefficients() {
        let ma = SymbolModel::ma1(q(0.3, -0.2, 0.1, 0.4), 1.0);
        let inner = ma.clone();
        let closed = SymbolModel::closed_form("ma1-closed", move |x| inner.phi(x)).unwrap();
        let approx = closed.coefficients(4).unwrap();
        assert!(approx.approximate);
        assert!(!approx.warnings.is_empty());
        for s in 0..4 {
            assert!(
                (approx.values[s] - ma.eta(s).unwrap()).norm() < 1e-13,
                "s = {s}"
            );
        }
    }
}
