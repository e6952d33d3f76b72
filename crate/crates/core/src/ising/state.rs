use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the state-vector simulator accepts.
pub const MAX_QUBITS: usize = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Size(format!("state length {dim} is not 2^N with N ≥ 1")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        Ok(Self { n_qubits, amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Size(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
    }
}

pub(crate) fn check_qubits(n_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(Error::Size(format!("{n_qubits} qubits outside supported range 1..={MAX_QUBITS}")))
    }
}

/// `∏_l (|0⟩_l + |1⟩_l)/√2`.
pub fn uniform_state(n_qubits: usize) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    let amp = (dim as f64).sqrt().recip();
    Ok(QuantumState {
        n_qubits,
        amplitudes: vec![Complex64::new(amp, 0.0); dim],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSource {
    Exact,
    Sampled { shots: u64, counts: Vec<u64> },
}

/// Outcome distribution over the `2^N` computational basis states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbDist {
    probs: Vec<f64>,
    source: DistSource,
}

impl ProbDist {
    /// Exact distribution; entries must be nonnegative and sum to one within `1e-9`.
    pub fn exact(probs: Vec<f64>) -> Result<Self> {
        let dim = probs.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Size(format!("distribution length {dim} is not 2^N with N ≥ 1")));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidState("distribution has negative or non-finite entries".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("distribution sums to {total}")));
        }
        Ok(Self {
            probs,
            source: DistSource::Exact,
        })
    }

    /// Empirical distribution `counts / shots`.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let dim = counts.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Size(format!("distribution length {dim} is not 2^N with N ≥ 1")));
        }
        let shots: u64 = counts.iter().sum();
        if shots == 0 {
            return Err(Error::Config("at least one shot is required".into()));
        }
        let inv = 1.0 / shots as f64;
        let probs = counts.iter().map(|&c| c as f64 * inv).collect();
        Ok(Self {
            probs,
            source: DistSource::Sampled { shots, counts },
        })
    }

    pub fn uniform(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        Self::exact(vec![1.0 / dim as f64; dim])
    }

    pub fn delta(n_qubits: usize, index: usize) -> Result<Self> {
        output_distribution(&QuantumState::basis(n_qubits, index)?)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn source(&self) -> &DistSource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    /// Total-variation distance `½ Σ |p − q|`.
    pub fn total_variation(&self, other: &ProbDist) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Shape {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(p, q)| (p - q).abs()).sum::<f64>())
    }
}

/// Born-rule probabilities `|⟨b|φ⟩|²`.
pub fn output_distribution(state: &QuantumState) -> Result<ProbDist> {
    let norm = state.norm_sqr();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidState(format!("state norm² {norm} deviates from 1")));
    }
    let probs: Vec<f64> = state.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    Ok(ProbDist {
        probs,
        source: DistSource::Exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_amplitudes() {
        let one = uniform_state(1).unwrap();
        for a in one.amplitudes() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
            assert_eq!(a.im, 0.0);
        }
        let two = uniform_state(2).unwrap();
        assert!(two.amplitudes().iter().all(|a| *a == Complex64::new(0.5, 0.0)));
        let eight = output_distribution(&uniform_state(8).unwrap()).unwrap();
        assert!(eight.probs().iter().all(|p| (p - 1.0 / 256.0).abs() < 1e-15));
    }

    #[test]
    fn size_guard() {
        assert!(matches!(uniform_state(0), Err(Error::Size(_))));
        assert!(matches!(uniform_state(15), Err(Error::Size(_))));
        assert!(uniform_state(14).is_ok());
    }

    #[test]
    fn distributions_of_simple_states() {
        let u = output_distribution(&uniform_state(3).unwrap()).unwrap();
        assert!(u.probs().iter().all(|&p| (p - 0.125).abs() < 1e-15));
        let d = output_distribution(&QuantumState::basis(3, 0).unwrap()).unwrap();
        assert_eq!(d.probs()[0], 1.0);
        assert!(d.probs()[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn random_state_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let amps: Vec<Complex64> = (0..32)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut state = QuantumState::from_amplitudes(amps).unwrap();
        state.normalize();
        let dist = output_distribution(&state).unwrap();
        assert!((dist.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let state = QuantumState::from_amplitudes(vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        assert!(matches!(output_distribution(&state), Err(Error::InvalidState(_))));
    }
}
