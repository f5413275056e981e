//! Experiment configuration: presets, key=value files and flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcg::{Preconditioner, StopRule};
use crate::quat::Quaternion;
use crate::signal::ProcessKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecondChoice {
    Strang,
    None,
    Both,
}

impl PrecondChoice {
    /// Solvers in report order: PCG-C before PCG-I.
    pub fn solvers(self) -> &'static [Preconditioner] {
        match self {
            Self::Strang => &[Preconditioner::Strang],
            Self::None => &[Preconditioner::None],
            Self::Both => &[Preconditioner::Strang, Preconditioner::None],
        }
    }
}

impl FromStr for PrecondChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strang" => Ok(Self::Strang),
            "none" => Ok(Self::None),
            "both" => Ok(Self::Both),
            other => Err(Error::Parse(format!(
                "unknown preconditioner '{other}' (strang|none|both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Parse(format!("unknown format '{other}' (csv|json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ProcessKind,
    pub betas: Vec<Quaternion>,
    pub delta: f64,
    pub n: Vec<usize>,
    /// Sample multipliers; an estimate run uses `M = m n + 1` samples.
    pub m: Vec<usize>,
    pub precond: PrecondChoice,
    pub tol: f64,
    pub stop: StopRule,
    pub max_iter: Option<usize>,
    pub seed: u64,
    /// Cluster radii for the spectrum command.
    pub eps: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ProcessKind::Ar1,
            betas: Vec::new(),
            delta: 1.0,
            n: vec![256],
            m: vec![4],
            precond: PrecondChoice::Both,
            tol: 1e-7,
            stop: StopRule::Absolute,
            max_iter: None,
            seed: 0,
            eps: vec![0.1],
            out: None,
            format: Format::Csv,
        }
    }
}

pub const PRESETS: [&str; 4] = ["table1", "table2", "table3", "table4"];

fn q(a: [f64; 4]) -> Quaternion {
    Quaternion::from_array(a)
}

/// Built-in experiment grids `table1` to `table4`.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let exact_n = vec![256, 512, 1024, 2048];
    let est_n = vec![512, 1024, 2048];
    let (model, betas, n) = match name.trim().to_ascii_lowercase().as_str() {
        "table1" => (
            ProcessKind::Ar1,
            vec![
                q([0.45, -0.01, 0.3, -0.35]),
                q([-0.07, 0.41, 0.29, 0.45]),
                q([0.15, -0.46, 0.34, 0.43]),
            ],
            exact_n,
        ),
        "table2" => (
            ProcessKind::Ar1,
            vec![
                q([0.1, 0.0, -0.3, -0.4]),
                q([0.3, 0.4, 0.0, 0.4]),
                q([0.3, 0.4, 0.4, 0.0]),
            ],
            est_n,
        ),
        "table3" => (
            ProcessKind::Ma1,
            vec![
                q([-0.08, 0.21, -0.8, -0.79]),
                q([-0.2, 0.18, -1.19, -0.07]),
                q([-0.52, -0.32, -0.01, -1.23]),
            ],
            exact_n,
        ),
        "table4" => (
            ProcessKind::Ma1,
            vec![
                q([0.9, 0.9, 0.5, 1.3]),
                q([-1.9, -0.6, 0.3, 0.0]),
                q([-2.0, -0.6, -0.4, -0.1]),
            ],
            est_n,
        ),
        other => {
            return Err(Error::Parse(format!(
                "unknown preset '{other}' (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(ExperimentConfig {
        model,
        betas,
        n,
        m: vec![4, 8, 16],
        ..ExperimentConfig::default()
    })
}

/// A partial configuration; later layers override earlier ones field by field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub preset: Option<String>,
    pub model: Option<ProcessKind>,
    pub betas: Option<Vec<Quaternion>>,
    pub delta: Option<f64>,
    pub n: Option<Vec<usize>>,
    pub m: Option<Vec<usize>>,
    pub precond: Option<PrecondChoice>,
    pub tol: Option<f64>,
    pub stop: Option<StopRule>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub eps: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse '{}'", v.trim())))
}

/// Comma-separated list.
pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

/// `a,b,c,d` as `a + b p + c q + d r`.
pub fn parse_beta(v: &str) -> Result<Quaternion> {
    let parts: Vec<f64> = parse_list("beta", v)?;
    match parts.as_slice() {
        [a, b, c, d] => Ok(Quaternion::new(*a, *b, *c, *d)),
        _ => Err(Error::Parse(format!(
            "beta needs four comma-separated reals, got '{v}'"
        ))),
    }
}

fn push<T>(slot: &mut Option<Vec<T>>, items: Vec<T>) {
    slot.get_or_insert_with(Vec::new).extend(items);
}

impl ConfigLayer {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
    /// repeating a key appends to its list.
    pub fn parse(text: &str) -> Result<Self> {
        let mut layer = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            let ctx = |e: Error| Error::Parse(format!("line {}: {e}", lineno + 1));
            match key.as_str() {
                "preset" => layer.preset = Some(value.to_string()),
                "model" => layer.model = Some(value.parse().map_err(ctx)?),
                "beta" => push(&mut layer.betas, vec![parse_beta(value).map_err(ctx)?]),
                "delta" => layer.delta = Some(parse_num(&key, value).map_err(ctx)?),
                "n" => push(&mut layer.n, parse_list(&key, value).map_err(ctx)?),
                "m" => push(&mut layer.m, parse_list(&key, value).map_err(ctx)?),
                "eps" => push(&mut layer.eps, parse_list(&key, value).map_err(ctx)?),
                "precond" => layer.precond = Some(value.parse().map_err(ctx)?),
                "tol" => layer.tol = Some(parse_num(&key, value).map_err(ctx)?),
                "stop" => {
                    layer.stop = Some(value.parse().map_err(|e: String| ctx(Error::Parse(e)))?)
                }
                "max_iter" => layer.max_iter = Some(parse_num(&key, value).map_err(ctx)?),
                "seed" => layer.seed = Some(parse_num(&key, value).map_err(ctx)?),
                "out" => layer.out = Some(PathBuf::from(value)),
                "format" => layer.format = Some(value.parse().map_err(ctx)?),
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `over` wins wherever it sets a field.
    pub fn merged(self, over: Self) -> Self {
        Self {
            preset: over.preset.or(self.preset),
            model: over.model.or(self.model),
            betas: over.betas.or(self.betas),
            delta: over.delta.or(self.delta),
            n: over.n.or(self.n),
            m: over.m.or(self.m),
            precond: over.precond.or(self.precond),
            tol: over.tol.or(self.tol),
            stop: over.stop.or(self.stop),
            max_iter: over.max_iter.or(self.max_iter),
            seed: over.seed.or(self.seed),
            eps: over.eps.or(self.eps),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }

    /// Starts from the named preset (if any) and applies the layer on top.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.preset {
            Some(name) => preset(name)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { cfg.$f = v; })*};
        }
        set!(model, betas, delta, n, m, precond, tol, stop, seed, eps, format);
        if self.max_iter.is_some() {
            cfg.max_iter = self.max_iter;
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(Error::Parse(
                "no beta given (use --beta, a config file or a preset)".into(),
            ));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(Error::Parse(
                "n must be a non-empty list of positive sizes".into(),
            ));
        }
        if self.m.contains(&0) {
            return Err(Error::Parse("m must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parse(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Parse(format!(
                "delta must be a finite non-negative real, got {}",
                self.delta
            )));
        }
        if self.model == ProcessKind::Ar1 {
            if let Some(b) = self.betas.iter().find(|b| !(b.norm() < 1.0)) {
                return Err(Error::InvalidModel(format!(
                    "AR(1) needs |beta| < 1, got {b} (|beta| = {})",
                    b.norm()
                )));
            }
        }
        Ok(())
    }
}
