//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each export has a plain Rust twin so the logic is tested natively.

use qaml::diagnostics::participation_ratio;
use qaml::encoding::encode_mnist_chain;
use qaml::ising::{AnnealSettings, IsingProblem, ProbDist};
use qaml::sampling::{sample_shots, ShotConfig};
use wasm_bindgen::prelude::*;

/// Largest register the page offers; 2^10 amplitudes stay interactive.
pub const MAX_DEMO_QUBITS: usize = 10;

fn chain(features: &[f64], gamma: f64) -> Result<IsingProblem, String> {
    if features.len().is_multiple_of(2) {
        return Err(format!("a chain needs 2N-1 features, got {}", features.len()));
    }
    let n = features.len().div_ceil(2);
    if n > MAX_DEMO_QUBITS {
        return Err(format!("demo supports at most {MAX_DEMO_QUBITS} qubits"));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(format!("gamma {gamma} outside [0, 1]"));
    }
    if let Some(x) = features.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
        return Err(format!("feature {x} outside [-1, 1]"));
    }
    let scaled: Vec<f64> = features.iter().map(|x| gamma * x).collect();
    encode_mnist_chain(&scaled, n).map_err(|e| e.to_string())
}

/// Exact output distribution of the chain encoding of `features` after a
/// linear anneal of length `anneal_time`.
pub fn chain_distribution(features: &[f64], gamma: f64, anneal_time: f64) -> Result<Vec<f64>, String> {
    let problem = chain(features, gamma)?;
    let dist = AnnealSettings::linear(anneal_time).distribution(&problem).map_err(|e| e.to_string())?;
    Ok(dist.into_probs())
}

/// Participation ratio of the output distribution at every time in `times`.
pub fn pr_curve(features: &[f64], gamma: f64, times: &[f64]) -> Result<Vec<f64>, String> {
    let problem = chain(features, gamma)?;
    times
        .iter()
        .map(|&t| {
            let dist = AnnealSettings::linear(t).distribution(&problem).map_err(|e| e.to_string())?;
            participation_ratio(&dist).map_err(|e| e.to_string())
        })
        .collect()
}

/// Empirical frequencies of `shots` seeded measurements of `probs`.
pub fn shot_histogram(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<f64>, String> {
    let dist = ProbDist::exact(probs.to_vec()).map_err(|e| e.to_string())?;
    let sampled = sample_shots(&dist, ShotConfig { shots, seed }).map_err(|e| e.to_string())?;
    Ok(sampled.into_probs())
}

#[wasm_bindgen(js_name = chainDistribution)]
pub fn chain_distribution_js(features: &[f64], gamma: f64, anneal_time: f64) -> Result<Vec<f64>, JsError> {
    chain_distribution(features, gamma, anneal_time).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = prCurve)]
pub fn pr_curve_js(features: &[f64], gamma: f64, times: &[f64]) -> Result<Vec<f64>, JsError> {
    pr_curve(features, gamma, times).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = shotHistogram)]
pub fn shot_histogram_js(probs: &[f64], shots: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    shot_histogram(probs, shots as u64, seed as u64).map_err(|e| JsError::new(&e))
}
