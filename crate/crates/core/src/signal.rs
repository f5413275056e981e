//! Stationary quaternion AR(1)/MA(1) signals, sample paths and
//! correlation-windowed covariance estimates.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::symbols::SymbolModel;
use crate::toeplitz::HermitianToeplitz;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Ar1,
    Ma1,
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcessKind::Ar1 => "ar1",
            ProcessKind::Ma1 => "ma1",
        })
    }
}

impl std::str::FromStr for ProcessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ar1" | "ar" => Ok(ProcessKind::Ar1),
            "ma1" | "ma" => Ok(ProcessKind::Ma1),
            other => Err(Error::Parse(format!(
                "unknown model kind '{other}' (expected ar1 or ma1)"
            ))),
        }
    }
}

/// `x(t) = β x(t−1) + e(t)` (AR1) or `x(t) = β e(t−1) + e(t)` (MA1), where each
/// component of `e(t)` is an independent `N(0, δ²)` draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub beta: Quaternion,
    pub delta: f64,
    pub seed: u64,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, beta: Quaternion, delta: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            kind,
            beta,
            delta,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// MA1 accepts any finite `β`; AR1 needs `|β| < 1`.
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || !self.delta.is_finite() || self.delta < 0.0 {
            return Err(Error::InvalidModel(format!(
                "beta = {}, delta = {} must be finite with delta >= 0",
                self.beta, self.delta
            )));
        }
        if self.kind == ProcessKind::Ar1 {
            self.model()?;
        }
        Ok(())
    }

    pub fn model(&self) -> Result<SymbolModel> {
        match self.kind {
            ProcessKind::Ar1 => SymbolModel::ar1(self.beta, self.delta),
            ProcessKind::Ma1 => Ok(SymbolModel::ma1(self.beta, self.delta)),
        }
    }

    /// Steps discarded before an AR1 path is recorded.
    pub fn burn_in(&self) -> usize {
        match self.kind {
            ProcessKind::Ar1 => {
                let b = self.beta.norm();
                1000usize.max((10.0 / (1.0 - b)).ceil() as usize)
            }
            ProcessKind::Ma1 => 0,
        }
    }
}

/// Exact `η(s)`.
pub fn covariance(spec: &ProcessSpec, s: usize) -> Result<Quaternion> {
    Ok(spec
        .model()?
        .eta(s)
        .expect("process models carry their covariance"))
}

struct Noise {
    rng: ChaCha8Rng,
    delta: f64,
}

impl Noise {
    fn next(&mut self) -> Quaternion {
        let mut draw = || -> f64 { StandardNormal.sample(&mut self.rng) };
        let q = Quaternion::new(draw(), draw(), draw(), draw());
        q.scale(self.delta)
    }
}

/// `m` consecutive samples of the process, deterministic in `spec.seed`.
pub fn synthesize(spec: &ProcessSpec, m: usize) -> Result<Vec<Quaternion>> {
    spec.validate()?;
    if m == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let mut noise = Noise {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        delta: spec.delta,
    };
    let beta = spec.beta;
    let mut out = Vec::with_capacity(m);
    match spec.kind {
        ProcessKind::Ar1 => {
            let mut x = Quaternion::ZERO;
            for _ in 0..spec.burn_in() {
                x = beta * x + noise.next();
            }
            for _ in 0..m {
                x = beta * x + noise.next();
                out.push(x);
            }
        }
        ProcessKind::Ma1 => {
            let mut prev = noise.next();
            for _ in 0..m {
                let e = noise.next();
                out.push(beta * prev + e);
                prev = e;
            }
        }
    }
    Ok(out)
}

/// A prediction system assembled from sample estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedSystem {
    pub n: usize,
    pub samples: usize,
    /// `η̃(0) … η̃(n)`, with `η̃(0)` projected to the reals.
    pub eta_hat: Vec<Quaternion>,
    /// Imaginary magnitude dropped from `η̃(0)`.
    pub imag_residue: f64,
    /// `w̃ = (conj η̃(1), …, conj η̃(n))`.
    pub rhs: Vec<Quaternion>,
}

impl EstimatedSystem {
    /// First column `η̃(0) … η̃(n−1)`.
    pub fn column(&self) -> &[Quaternion] {
        &self.eta_hat[..self.n]
    }

    pub fn toeplitz(&self) -> Result<HermitianToeplitz> {
        HermitianToeplitz::new(self.column().to_vec())
    }
}

/// `η̃(s) = (1/M) Σ_{l=s+1}^{M} x_l conj(x_{l−s})` for `s = 0..=n`.
pub fn estimate_correlation(samples: &[Quaternion], n: usize) -> Result<EstimatedSystem> {
    let m = samples.len();
    if m <= n {
        return Err(Error::Domain(format!(
            "need more samples than the system size ({m} <= {n})"
        )));
    }
    let scale = 1.0 / m as f64;
    let mut eta_hat: Vec<Quaternion> = (0..=n)
        .map(|s| {
            let mut acc = Quaternion::ZERO;
            for l in s..m {
                acc += samples[l] * samples[l - s].conj();
            }
            acc.scale(scale)
        })
        .collect();
    let imag_residue = eta_hat[0].imag_norm();
    eta_hat[0] = Quaternion::real(eta_hat[0].a0);
    let rhs = eta_hat[1..].iter().map(|e| e.conj()).collect();
    Ok(EstimatedSystem {
        n,
        samples: m,
        eta_hat,
        imag_residue,
        rhs,
    })
}

/// `T_n` with exact covariances and `w = (conj η(1), …, conj η(n))`.
pub fn prediction_system(
    spec: &ProcessSpec,
    n: usize,
) -> Result<(HermitianToeplitz, Vec<Quaternion>)> {
    let model = spec.model()?;
    model_prediction_system(&model, n)
}

pub fn model_prediction_system(
    model: &SymbolModel,
    n: usize,
) -> Result<(HermitianToeplitz, Vec<Quaternion>)> {
    let eta = model.coefficients(n + 1)?.values;
    let t = HermitianToeplitz::new(eta[..n].to_vec())?;
    let w = eta[1..].iter().map(|e| e.conj()).collect();
    Ok((t, w))
}

/// Writes one `a0,a1,a2,a3` row per sample.
pub fn write_samples_csv<W: Write>(mut w: W, samples: &[Quaternion]) -> Result<()> {
    writeln!(w, "a0,a1,a2,a3")?;
    for s in samples {
        writeln!(w, "{:e},{:e},{:e},{:e}", s.a0, s.a1, s.a2, s.a3)?;
    }
    Ok(())
}

/// Reads rows written by [`write_samples_csv`]; a non-numeric first line is
/// treated as a header.
pub fn read_samples_csv<R: Read>(r: R) -> Result<Vec<Quaternion>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match fields {
            Ok(v) if v.len() == 4 => out.push(Quaternion::new(v[0], v[1], v[2], v[3])),
            Err(_) if i == 0 => continue,
            _ => {
                return Err(Error::Parse(format!(
                    "line {}: expected four numbers, got '{line}'",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Little-endian `f64` quadruples, no header.
pub fn write_samples_binary<W: Write>(mut w: W, samples: &[Quaternion]) -> Result<()> {
    for s in samples {
        for v in s.to_array() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_samples_binary<R: Read>(mut r: R) -> Result<Vec<Quaternion>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 32 != 0 {
        return Err(Error::Parse(format!(
            "binary sample file of {} bytes is not a whole number of quaternions",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(32)
        .map(|c| {
            let mut a = [0.0; 4];
            for (k, v) in a.iter_mut().enumerate() {
                *v = f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
            }
            Quaternion::from_array(a)
        })
        .collect())
}
