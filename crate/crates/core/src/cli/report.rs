//! Report rows and their CSV/JSON encodings.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;
pub const SOLVE_HEADER: &str =
    "model,beta0,beta1,beta2,beta3,delta,n,m,solver,iters,time_ms,error,seed";
pub const SPECTRUM_HEADER: &str = "model,beta0,beta1,beta2,beta3,delta,n,index,eigenvalue";
pub const SUMMARY_HEADER: &str = "model,beta0,beta1,beta2,beta3,delta,n,lambda_min,lambda_max,symbol_min,symbol_max,\
moment1_lhs,moment1_rhs,moment2_lhs,moment2_rhs,moment2_gap,eps,outside_count,precond_min,precond_bound";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Converged,
    MaxIter,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub model: String,
    pub beta: [f64; 4],
    pub delta: f64,
    pub n: usize,
    /// `None` for exact-covariance systems.
    pub m: Option<usize>,
    pub solver: String,
    pub iters: usize,
    pub time_ms: f64,
    /// `‖b − T u‖₂`; `NaN` (null in JSON) when the cell failed before producing an iterate.
    pub error: Option<f64>,
    pub seed: u64,
    pub status: CellStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

fn beta_cols(b: &[f64; 4]) -> String {
    format!("{},{},{},{}", b[0], b[1], b[2], b[3])
}

pub fn version_line(kind: &str) -> String {
    format!("# qtsolve {kind} report, schema v{SCHEMA_VERSION}")
}

pub fn write_rows_csv<W: Write + ?Sized>(w: &mut W, rows: &[ReportRow]) -> Result<()> {
    writeln!(w, "{}", version_line("solve"))?;
    writeln!(w, "{SOLVE_HEADER}")?;
    for r in rows {
        let m = r.m.map_or_else(|| "exact".to_string(), |m| m.to_string());
        let err = r
            .error
            .map_or_else(|| "nan".to_string(), |e| format!("{e:.6e}"));
        writeln!(
            w,
            "{},{},{},{},{},{},{},{:.3},{},{}",
            r.model,
            beta_cols(&r.beta),
            r.delta,
            r.n,
            m,
            r.solver,
            r.iters,
            r.time_ms,
            err,
            r.seed
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub model: String,
    pub beta: [f64; 4],
    pub delta: f64,
    pub n: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub model: String,
    pub beta: [f64; 4],
    pub delta: f64,
    pub n: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `min f̌` and `max f̂` on the default grid.
    pub symbol_min: f64,
    pub symbol_max: f64,
    pub moment1_lhs: f64,
    pub moment1_rhs: f64,
    pub moment2_lhs: f64,
    pub moment2_rhs: f64,
    pub moment2_gap: f64,
    pub eps: f64,
    pub outside_count: Option<usize>,
    pub precond_min: Option<f64>,
    pub precond_bound: f64,
}

pub fn write_spectra_csv<W: Write + ?Sized>(w: &mut W, rows: &[SpectrumRow]) -> Result<()> {
    writeln!(w, "{}", version_line("spectrum"))?;
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for r in rows {
        for (i, l) in r.eigenvalues.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{i},{l:.15e}",
                r.model,
                beta_cols(&r.beta),
                r.delta,
                r.n
            )?;
        }
    }
    Ok(())
}

pub fn write_summaries_csv<W: Write + ?Sized>(w: &mut W, rows: &[SpectrumSummary]) -> Result<()> {
    writeln!(w, "{}", version_line("spectrum summary"))?;
    writeln!(w, "{SUMMARY_HEADER}")?;
    let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.9e}"));
    for s in rows {
        writeln!(
            w,
            "{},{},{},{},{:.9e},{:.9e},{:.9e},{:.9e},{:.12e},{:.12e},{:.9e},{:.9e},{:.3e},{},{},{},{:.9e}",
            s.model,
            beta_cols(&s.beta),
            s.delta,
            s.n,
            s.lambda_min,
            s.lambda_max,
            s.symbol_min,
            s.symbol_max,
            s.moment1_lhs,
            s.moment1_rhs,
            s.moment2_lhs,
            s.moment2_rhs,
            s.moment2_gap,
            s.eps,
            s.outside_count.map_or_else(|| "nan".to_string(), |c| c.to_string()),
            opt(s.precond_min),
            s.precond_bound
        )?;
    }
    Ok(())
}
