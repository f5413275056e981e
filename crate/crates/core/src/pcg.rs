//! Preconditioned conjugate gradients over quaternion vectors.
//!
//! Inner products are `⟨x, y⟩ = y* x`. For Hermitian operators the step
//! scalars are real; their imaginary parts are checked and then dropped.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circulant::CirculantPreconditioner;
use crate::error::{Error, Result};
use crate::quat::{qvec, QMatrix, Quaternion};
use crate::symbols::{HpdVerdict, SymbolModel, DEFAULT_GRID};
use crate::toeplitz::HermitianToeplitz;

/// Imaginary part allowed on a step scalar, relative to its real part.
pub const REALNESS_TOL: f64 = 1e-10;
/// The recurrence residual is replaced by `b − A x` this often.
pub const REFRESH_EVERY: usize = 50;

pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Quaternion]) -> Vec<Quaternion>;
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[Quaternion]) -> Vec<Quaternion> {
        (**self).apply(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[Quaternion]) -> Vec<Quaternion> {
        x.to_vec()
    }
}

impl LinearOperator for QMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[Quaternion]) -> Vec<Quaternion> {
        self.matvec(x).expect("dimension checked by the solver")
    }
}

/// Wraps a closure as an operator of the given size.
pub struct FnOperator<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[Quaternion]) -> Vec<Quaternion>> FnOperator<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[Quaternion]) -> Vec<Quaternion>> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[Quaternion]) -> Vec<Quaternion> {
        (self.f)(x)
    }
}

/// What the residual norm is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopRule {
    /// `‖r⁽ᵏ⁾‖₂ ≤ tol ‖r⁽⁰⁾‖₂`.
    #[default]
    Relative,
    /// `‖r⁽ᵏ⁾‖₂ ≤ tol`. The expected counts and errors of the `table*`
    /// presets hold exactly under this rule.
    Absolute,
}

impl std::str::FromStr for StopRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relative" | "rel" => Ok(Self::Relative),
            "absolute" | "abs" => Ok(Self::Absolute),
            other => Err(format!(
                "unknown stopping rule '{other}' (expected relative or absolute)"
            )),
        }
    }
}

impl fmt::Display for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Relative => "relative",
            Self::Absolute => "absolute",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub tol_rel: f64,
    pub stop: StopRule,
    /// `None` means `10 n`.
    pub max_iter: Option<usize>,
    pub record_history: bool,
    /// Skip the symbol positivity test in [`solve_toeplitz`].
    pub assume_hpd: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol_rel: 1e-7,
            stop: StopRule::Relative,
            max_iter: None,
            record_history: true,
            assume_hpd: false,
        }
    }
}

impl SolveConfig {
    pub fn with_tol(tol_rel: f64) -> Self {
        Self {
            tol_rel,
            ..Self::default()
        }
    }

    pub fn absolute(tol: f64) -> Self {
        Self {
            tol_rel: tol,
            stop: StopRule::Absolute,
            ..Self::default()
        }
    }

    pub fn max_iter_for(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖r⁽ᵏ⁾‖₂` for `k = 0..=iterations` (empty when not recorded).
    pub residual_history: Vec<f64>,
    /// `‖b − A x‖₂`, recomputed from the returned iterate.
    pub final_error: f64,
    pub converged: bool,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialSolve {
    pub x: Vec<Quaternion>,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PcgError {
    #[error("operator size {op} does not match right-hand side length {rhs}")]
    Dimension { op: usize, rhs: usize },

    #[error("step scalar {name} is not real at iteration {iteration}: {value}")]
    NonRealScalar {
        iteration: usize,
        name: &'static str,
        value: Quaternion,
    },

    #[error("breakdown at iteration {iteration}: {name} = {value:e}")]
    Breakdown {
        iteration: usize,
        name: &'static str,
        value: f64,
    },

    #[error("no convergence after {} iterations (relative residual {:e})", .0.report.iterations, rel_residual(&.0.report))]
    MaxIterations(Box<PartialSolve>),
}

fn rel_residual(r: &SolveReport) -> f64 {
    match (r.residual_history.first(), r.residual_history.last()) {
        (Some(&r0), Some(&rk)) if r0 > 0.0 => rk / r0,
        _ => f64::NAN,
    }
}

/// Checks realness and returns the real part. `<Ap, p>` must be positive; `<z, r>`
/// only nonzero, since an indefinite preconditioner does not stop the iteration.
fn real_scalar(
    value: Quaternion,
    iteration: usize,
    name: &'static str,
    positive: bool,
) -> Result<f64, PcgError> {
    if !value.is_finite() || value.imag_norm() > REALNESS_TOL * value.a0.abs() {
        return Err(PcgError::NonRealScalar {
            iteration,
            name,
            value,
        });
    }
    if value.a0 == 0.0 || (positive && value.a0 < 0.0) {
        return Err(PcgError::Breakdown {
            iteration,
            name,
            value: value.a0,
        });
    }
    Ok(value.a0)
}

fn residual<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[Quaternion],
    x: &[Quaternion],
) -> Vec<Quaternion> {
    qvec::sub(b, &a.apply(x))
}

/// Solves `A x = b` from a zero initial guess, stopping once
/// `‖r⁽ᵏ⁾‖₂ ≤ tol_rel ‖r⁽⁰⁾‖₂` (or `≤ tol_rel` under [`StopRule::Absolute`]).
pub fn pcg_solve<A, P>(
    a: &A,
    pinv: &P,
    b: &[Quaternion],
    cfg: &SolveConfig,
) -> Result<(Vec<Quaternion>, SolveReport), PcgError>
where
    A: LinearOperator + ?Sized,
    P: LinearOperator + ?Sized,
{
    let start = Instant::now();
    let n = b.len();
    for op in [a.dim(), pinv.dim()] {
        if op != n {
            return Err(PcgError::Dimension { op, rhs: n });
        }
    }
    let max_iter = cfg.max_iter_for(n);
    let mut x = vec![Quaternion::ZERO; n];
    let mut r = b.to_vec();
    let r0 = qvec::norm(&r);
    let mut history = Vec::new();
    if cfg.record_history {
        history.push(r0);
    }
    let threshold = match cfg.stop {
        StopRule::Relative => cfg.tol_rel * r0,
        StopRule::Absolute => cfg.tol_rel,
    };
    let mut iterations = 0;
    let mut converged = r0 == 0.0 || r0 <= threshold;

    if !converged {
        let mut z = pinv.apply(&r);
        let mut rho = real_scalar(qvec::inner(&z, &r), 0, "<z, r>", false)?;
        let mut p = z.clone();
        while iterations < max_iter {
            let ap = a.apply(&p);
            let sigma = real_scalar(qvec::inner(&ap, &p), iterations, "<Ap, p>", true)?;
            let alpha = rho / sigma;
            qvec::axpy(&mut x, alpha, &p);
            qvec::axpy(&mut r, -alpha, &ap);
            iterations += 1;
            if iterations % REFRESH_EVERY == 0 {
                r = residual(a, b, &x);
            }
            let rk = qvec::norm(&r);
            if cfg.record_history {
                history.push(rk);
            }
            if rk <= threshold {
                converged = true;
                break;
            }
            z = pinv.apply(&r);
            let rho_next = real_scalar(qvec::inner(&z, &r), iterations, "<z, r>", false)?;
            let beta = rho_next / rho;
            rho = rho_next;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = *zi + pi.scale(beta);
            }
        }
    }

    let report = SolveReport {
        iterations,
        residual_history: history,
        final_error: qvec::norm(&residual(a, b, &x)),
        converged,
        wall_time: start.elapsed(),
    };
    if converged {
        Ok((x, report))
    } else {
        Err(PcgError::MaxIterations(Box::new(PartialSolve {
            x,
            report,
        })))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    None,
    Strang,
}

impl Preconditioner {
    /// Solver tag used in reports.
    pub fn tag(self) -> &'static str {
        match self {
            Self::None => "PCG-I",
            Self::Strang => "PCG-C",
        }
    }
}

impl fmt::Display for Preconditioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Runs PCG on an assembled Toeplitz system.
pub fn solve_system(
    t: &HermitianToeplitz,
    b: &[Quaternion],
    precond: Preconditioner,
    cfg: &SolveConfig,
) -> Result<(Vec<Quaternion>, SolveReport)> {
    let out = match precond {
        Preconditioner::None => pcg_solve(t, &Identity(t.size()), b, cfg),
        Preconditioner::Strang => pcg_solve(t, &CirculantPreconditioner::strang(t)?, b, cfg),
    };
    Ok(out?)
}

/// Builds `T_n` from the symbol and solves `T_n x = b`.
pub fn solve_toeplitz(
    model: &SymbolModel,
    n: usize,
    b: &[Quaternion],
    precond: Preconditioner,
    cfg: &SolveConfig,
) -> Result<(Vec<Quaternion>, SolveReport)> {
    if !cfg.assume_hpd {
        let verdict = model.hpd_test(DEFAULT_GRID)?;
        if verdict != HpdVerdict::Definite {
            return Err(Error::InvalidModel(format!(
                "symbol of {} is not positive definite ({verdict:?})",
                model.name()
            )));
        }
    }
    let t = HermitianToeplitz::from_symbol(model, n)?;
    solve_system(&t, b, precond, cfg)
}
