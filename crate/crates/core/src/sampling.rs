//! Finite-shot measurement and the Hamiltonian-randomness ensemble.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{AnnealSettings, DistSource, IsingProblem, ProbDist};

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for a stream identified by `path` under `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub shots: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub amplitude: f64,
    pub realizations: usize,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            amplitude: 0.1,
            realizations: 100,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::Config(format!("noise amplitude {} must be ≥ 0", self.amplitude)));
        }
        if self.realizations == 0 {
            return Err(Error::Config("at least one noise realization is required".into()));
        }
        Ok(())
    }
}

/// Draws `cfg.shots` basis outcomes by inverse-CDF lookup and returns `counts / M`.
pub fn sample_shots(dist: &ProbDist, cfg: ShotConfig) -> Result<ProbDist> {
    if cfg.shots == 0 {
        return Err(Error::Config("shot count must be at least 1".into()));
    }
    if !matches!(dist.source(), DistSource::Exact) {
        return Err(Error::InvalidState("shots must be drawn from an exact distribution".into()));
    }
    let probs = dist.probs();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    // Rounding can leave the total a hair below 1; such draws fall on the last
    // outcome with nonzero probability.
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
    let mut counts = vec![0u64; probs.len()];
    let mut rng = rng_from_seed(cfg.seed);
    for _ in 0..cfg.shots {
        let u: f64 = rng.random();
        let idx = cdf.partition_point(|&c| c <= u).min(last);
        counts[idx] += 1;
    }
    ProbDist::from_counts(counts)
}

/// Adds independent uniform `[−a, a)` offsets to every coupling and field.
pub fn perturb_problem(problem: &IsingProblem, cfg: &NoiseConfig, realization: usize) -> Result<IsingProblem> {
    cfg.validate()?;
    if cfg.amplitude == 0.0 {
        return Ok(problem.clone());
    }
    let a = cfg.amplitude;
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[realization as u64]));
    let couplings = problem.couplings().iter().map(|j| j + rng.random_range(-a..a)).collect();
    let fields = problem.fields().iter().map(|h| h + rng.random_range(-a..a)).collect();
    problem.with_coefficients(couplings, fields)
}

/// Mean of the exact output distributions over `cfg.realizations` perturbed problems.
pub fn ensemble_distribution(problem: &IsingProblem, settings: &AnnealSettings, cfg: &NoiseConfig) -> Result<ProbDist> {
    cfg.validate()?;
    let mut mean = vec![0.0; problem.dimension()];
    for r in 0..cfg.realizations {
        let member = perturb_problem(problem, cfg, r)
            .and_then(|p| settings.distribution(&p))
            .map_err(|e| Error::Realization {
                realization: r,
                source: Box::new(e),
            })?;
        mean.iter_mut().zip(member.probs()).for_each(|(m, p)| *m += p);
    }
    let inv = 1.0 / cfg.realizations as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    ProbDist::exact(mean)
}
