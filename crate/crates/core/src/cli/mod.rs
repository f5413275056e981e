//! The `qtsolve` experiment runner.
//!
//! Exit codes: 0 when every cell converged, 2 when some cell hit the iteration
//! cap, 3 when some cell failed otherwise (breakdown, singular preconditioner,
//! degenerate estimate), 1 for usage and I/O errors.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pcg::{solve_system, PcgError, Preconditioner, SolveConfig};
use crate::quat::Quaternion;
use crate::signal::{estimate_correlation, prediction_system, synthesize, ProcessSpec};
use crate::spectra::{
    clustering_from_spectrum, moment_from_spectrum, preconditioned_spectrum, toeplitz_spectrum,
};
use crate::symbols::DEFAULT_GRID;
use crate::toeplitz::HermitianToeplitz;

pub use config::{preset, ConfigLayer, ExperimentConfig, Format, PrecondChoice};
pub use report::{CellStatus, ReportRow, SpectrumRow, SpectrumSummary};

pub const THREADS_ENV: &str = "QTSOLVE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "qtsolve",
    version,
    about = "Preconditioned CG for Hermitian quaternion Toeplitz systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve exact-covariance prediction systems.
    Solve(Flags),
    /// Dense spectra, moment checks and preconditioned clustering.
    Spectrum(Flags),
    /// Synthesize samples, estimate covariances and solve the estimated systems.
    Estimate(Flags),
}

#[derive(Debug, Args, Default)]
struct Flags {
    /// table1, table2, table3 or table4.
    #[arg(long)]
    preset: Option<String>,
    /// key=value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ar1 or ma1.
    #[arg(long)]
    model: Option<String>,
    /// a,b,c,d for a + bp + cq + dr; repeat for several.
    #[arg(long, allow_hyphen_values = true)]
    beta: Vec<String>,
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated sizes.
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated sample multipliers (M = m n + 1).
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// absolute (default) or relative.
    #[arg(long)]
    stop: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// strang, none or both.
    #[arg(long)]
    precond: Option<String>,
    /// Comma-separated cluster radii (spectrum only).
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

impl Flags {
    fn layer(&self) -> Result<ConfigLayer> {
        let betas = if self.beta.is_empty() {
            None
        } else {
            Some(
                self.beta
                    .iter()
                    .map(|b| config::parse_beta(b))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        Ok(ConfigLayer {
            preset: self.preset.clone(),
            model: self.model.as_deref().map(str::parse).transpose()?,
            betas,
            delta: self.delta,
            n: self
                .n
                .as_deref()
                .map(|v| config::parse_list("n", v))
                .transpose()?,
            m: self
                .m
                .as_deref()
                .map(|v| config::parse_list("m", v))
                .transpose()?,
            precond: self.precond.as_deref().map(str::parse).transpose()?,
            tol: self.tol,
            stop: self
                .stop
                .as_deref()
                .map(str::parse)
                .transpose()
                .map_err(Error::Parse)?,
            max_iter: self.max_iter,
            seed: self.seed,
            eps: self
                .eps
                .as_deref()
                .map(|v| config::parse_list("eps", v))
                .transpose()?,
            out: self.out.clone(),
            format: self.format.as_deref().map(str::parse).transpose()?,
        })
    }

    fn resolve(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        file.merged(self.layer()?).resolve()
    }
}

/// Worker pool honoring `QTSOLVE_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v.trim().parse().map_err(|_| {
            Error::Parse(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))
        })?;
        if threads == 0 {
            return Err(Error::Parse(format!("{THREADS_ENV} must be positive")));
        }
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::Parse(format!("cannot start worker pool: {e}")))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one experiment cell; independent of scheduling.
pub fn cell_seed(base: u64, beta_index: usize, m: usize, n: usize) -> u64 {
    [beta_index as u64, m as u64, n as u64]
        .iter()
        .fold(splitmix(base), |acc, &c| splitmix(acc ^ c))
}

fn solve_cfg(cfg: &ExperimentConfig) -> SolveConfig {
    SolveConfig {
        tol_rel: cfg.tol,
        stop: cfg.stop,
        max_iter: cfg.max_iter,
        record_history: false,
        assume_hpd: true,
    }
}

struct CellKey {
    beta: Quaternion,
    n: usize,
    m: Option<usize>,
    seed: u64,
}

fn row(cfg: &ExperimentConfig, key: &CellKey, solver: Preconditioner) -> ReportRow {
    ReportRow {
        model: cfg.model.to_string(),
        beta: key.beta.to_array(),
        delta: cfg.delta,
        n: key.n,
        m: key.m,
        solver: solver.tag().to_string(),
        iters: 0,
        time_ms: 0.0,
        error: None,
        seed: key.seed,
        status: CellStatus::Failed,
        message: None,
    }
}

fn solve_rows(
    cfg: &ExperimentConfig,
    key: &CellKey,
    system: Result<(HermitianToeplitz, Vec<Quaternion>)>,
) -> Vec<ReportRow> {
    let scfg = solve_cfg(cfg);
    cfg.precond
        .solvers()
        .iter()
        .map(|&solver| {
            let mut r = row(cfg, key, solver);
            let (t, b) = match &system {
                Ok(s) => s,
                Err(e) => {
                    r.message = Some(e.to_string());
                    return r;
                }
            };
            let start = Instant::now();
            let out = solve_system(t, b, solver, &scfg);
            r.time_ms = start.elapsed().as_secs_f64() * 1e3;
            match out {
                Ok((_, rep)) => {
                    r.iters = rep.iterations;
                    r.error = Some(rep.final_error);
                    r.status = CellStatus::Converged;
                }
                Err(Error::Solve(PcgError::MaxIterations(p))) => {
                    r.iters = p.report.iterations;
                    r.error = Some(p.report.final_error);
                    r.status = CellStatus::MaxIter;
                    r.message = Some(format!(
                        "stopped at the iteration cap {}",
                        p.report.iterations
                    ));
                }
                Err(e) => {
                    if let Error::Solve(
                        PcgError::Breakdown { iteration, .. }
                        | PcgError::NonRealScalar { iteration, .. },
                    ) = &e
                    {
                        r.iters = *iteration;
                    }
                    r.message = Some(e.to_string());
                }
            }
            r
        })
        .collect()
}

/// Exact-covariance runs; one cell per `(β, n)`.
pub fn cmd_solve(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Vec<ReportRow> {
    let keys: Vec<CellKey> = cfg
        .betas
        .iter()
        .flat_map(|&beta| {
            cfg.n.iter().map(move |&n| CellKey {
                beta,
                n,
                m: None,
                seed: cfg.seed,
            })
        })
        .collect();
    pool.install(|| {
        keys.par_iter()
            .flat_map_iter(|key| {
                let system = ProcessSpec::new(cfg.model, key.beta, cfg.delta, key.seed)
                    .and_then(|spec| prediction_system(&spec, key.n));
                solve_rows(cfg, key, system)
            })
            .collect()
    })
}

/// Estimated-covariance runs; one cell per `(β, m, n)` with its own seed.
pub fn cmd_estimate(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Vec<ReportRow> {
    let mut keys = Vec::new();
    for (bi, &beta) in cfg.betas.iter().enumerate() {
        for &m in &cfg.m {
            for &n in &cfg.n {
                keys.push(CellKey {
                    beta,
                    n,
                    m: Some(m),
                    seed: cell_seed(cfg.seed, bi, m, n),
                });
            }
        }
    }
    pool.install(|| {
        keys.par_iter()
            .flat_map_iter(|key| solve_rows(cfg, key, estimated_system(cfg, key)))
            .collect()
    })
}

fn estimated_system(
    cfg: &ExperimentConfig,
    key: &CellKey,
) -> Result<(HermitianToeplitz, Vec<Quaternion>)> {
    let m = key.m.expect("estimate cells carry m");
    let spec = ProcessSpec::new(cfg.model, key.beta, cfg.delta, key.seed)?;
    let samples = synthesize(&spec, m * key.n + 1)?;
    let est = estimate_correlation(&samples, key.n)?;
    if !(est.eta_hat[0].a0 > 0.0) {
        return Err(Error::Domain(
            "degenerate estimate: the samples carry no energy".into(),
        ));
    }
    Ok((est.toeplitz()?, est.rhs))
}

/// Dense spectra with moment and clustering summaries, one per `(β, n, ε)`.
pub fn cmd_spectrum(
    cfg: &ExperimentConfig,
    pool: &rayon::ThreadPool,
) -> Result<(Vec<SpectrumRow>, Vec<SpectrumSummary>)> {
    let keys: Vec<(Quaternion, usize)> = cfg
        .betas
        .iter()
        .flat_map(|&b| cfg.n.iter().map(move |&n| (b, n)))
        .collect();
    let results: Vec<Result<(SpectrumRow, Vec<SpectrumSummary>)>> = pool.install(|| {
        keys.par_iter()
            .map(|&(beta, n)| {
                let model = ProcessSpec::new(cfg.model, beta, cfg.delta, cfg.seed)?.model()?;
                let eig = toeplitz_spectrum(&model, n)?.eigenvalues;
                let m1 = moment_from_spectrum(&model, &eig, |l| l);
                let m2 = moment_from_spectrum(&model, &eig, |l| l * l);
                let (smin, smax) = model.extrema(DEFAULT_GRID);
                let pre = preconditioned_spectrum(&model, n);
                let summaries = cfg
                    .eps
                    .iter()
                    .map(|&eps| {
                        let (outside, pmin, bound) = match &pre {
                            Ok(p) => {
                                let c = clustering_from_spectrum(&model, p, eps);
                                (Some(c.outside_count), Some(c.min_eig), c.lower_bound)
                            }
                            Err(_) => (None, None, 2.0 * smin / (3.0 * smax)),
                        };
                        SpectrumSummary {
                            model: cfg.model.to_string(),
                            beta: beta.to_array(),
                            delta: cfg.delta,
                            n,
                            lambda_min: eig[0],
                            lambda_max: eig[eig.len() - 1],
                            symbol_min: smin,
                            symbol_max: smax,
                            moment1_lhs: m1.lhs,
                            moment1_rhs: m1.rhs,
                            moment2_lhs: m2.lhs,
                            moment2_rhs: m2.rhs,
                            moment2_gap: m2.gap,
                            eps,
                            outside_count: outside,
                            precond_min: pmin,
                            precond_bound: bound,
                        }
                    })
                    .collect();
                let row = SpectrumRow {
                    model: cfg.model.to_string(),
                    beta: beta.to_array(),
                    delta: cfg.delta,
                    n,
                    eigenvalues: eig,
                };
                Ok((row, summaries))
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut sums = Vec::new();
    for r in results {
        let (row, s) = r?;
        rows.push(row);
        sums.extend(s);
    }
    Ok((rows, sums))
}

/// 0 all converged, 2 some cell hit max_iter, 3 some other cell failure.
pub fn exit_code(rows: &[ReportRow]) -> i32 {
    if rows.iter().any(|r| r.status == CellStatus::MaxIter) {
        2
    } else if rows.iter().any(|r| r.status == CellStatus::Failed) {
        3
    } else {
        0
    }
}

#[derive(Serialize)]
struct JsonReport<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    body: T,
}

fn open_out(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn execute(
    command: &str,
    cfg: &ExperimentConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let pool = thread_pool()?;
    // open the output first so an unwritable path fails before any work
    let mut file = cfg.out.as_deref().map(open_out).transpose()?;
    let sink: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => stdout,
    };
    let code = match command {
        "spectrum" => {
            let (rows, sums) = cmd_spectrum(cfg, &pool)?;
            match cfg.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Body<'a> {
                        spectra: &'a [SpectrumRow],
                        summaries: &'a [SpectrumSummary],
                    }
                    let doc = JsonReport {
                        schema_version: report::SCHEMA_VERSION,
                        command,
                        config: cfg,
                        body: Body {
                            spectra: &rows,
                            summaries: &sums,
                        },
                    };
                    serde_json::to_writer_pretty(&mut *sink, &doc)
                        .map_err(|e| Error::Parse(e.to_string()))?;
                    writeln!(sink)?;
                }
                Format::Csv => {
                    report::write_spectra_csv(sink, &rows)?;
                    match &cfg.out {
                        Some(out) => {
                            report::write_summaries_csv(&mut open_out(&summary_path(out))?, &sums)?
                        }
                        None => report::write_summaries_csv(stderr, &sums)?,
                    }
                }
            }
            0
        }
        _ => {
            let rows = if command == "solve" {
                cmd_solve(cfg, &pool)
            } else {
                cmd_estimate(cfg, &pool)
            };
            match cfg.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Body<'a> {
                        rows: &'a [ReportRow],
                    }
                    let doc = JsonReport {
                        schema_version: report::SCHEMA_VERSION,
                        command,
                        config: cfg,
                        body: Body { rows: &rows },
                    };
                    serde_json::to_writer_pretty(&mut *sink, &doc)
                        .map_err(|e| Error::Parse(e.to_string()))?;
                    writeln!(sink)?;
                }
                Format::Csv => report::write_rows_csv(sink, &rows)?,
            }
            for r in rows.iter().filter(|r| r.status != CellStatus::Converged) {
                writeln!(
                    stderr,
                    "warning: {} beta={} n={} m={:?}: {}",
                    r.solver,
                    Quaternion::from_array(r.beta),
                    r.n,
                    r.m,
                    r.message.as_deref().unwrap_or("not converged")
                )?;
            }
            exit_code(&rows)
        }
    };
    sink.flush()?;
    Ok(code)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (name, flags) = match &cli.command {
        Command::Solve(f) => ("solve", f),
        Command::Spectrum(f) => ("spectrum", f),
        Command::Estimate(f) => ("estimate", f),
    };
    let outcome = flags
        .resolve()
        .and_then(|cfg| execute(name, &cfg, stdout, stderr));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
