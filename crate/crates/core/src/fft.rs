//! Process-wide FFT plan cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::{Fft, FftDirection, FftPlanner};

use crate::adjoint::C01;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn cache() -> &'static Mutex<HashMap<usize, PlanPair>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `(forward, inverse)` plans of the given length, built once per length.
pub fn plans(len: usize) -> PlanPair {
    let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
    map.entry(len)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (
                planner.plan_fft(len, FftDirection::Forward),
                planner.plan_fft(len, FftDirection::Inverse),
            )
        })
        .clone()
}

/// In place `X_k = Σ_j x_j e^{-2πi jk/N}` (unnormalized).
pub fn forward(buf: &mut [C01]) {
    if buf.len() > 1 {
        plans(buf.len()).0.process(buf);
    }
}

/// In place `X_k = Σ_j x_j e^{+2πi jk/N}` (unnormalized).
pub fn backward(buf: &mut [C01]) {
    if buf.len() > 1 {
        plans(buf.len()).1.process(buf);
    }
}
