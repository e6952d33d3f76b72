use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{apply_ising, schedule_coefficients};
use super::problem::IsingProblem;
use super::schedule::AnnealSchedule;
use super::state::{output_distribution, uniform_state, ProbDist, QuantumState};
use crate::error::{Error, Result};

/// Norm drift above which the final state is renormalised.
const RENORMALIZE_THRESHOLD: f64 = 1e-12;

/// Default RK4 step: `T / 10_000`.
pub fn default_dt(anneal_time: f64) -> f64 {
    anneal_time / 10_000.0
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub state: QuantumState,
    /// `|‖φ(T)‖² − 1|` before any renormalisation.
    pub norm_drift: f64,
    pub renormalized: bool,
    pub steps: usize,
}

impl Evolution {
    pub fn distribution(&self) -> Result<ProbDist> {
        output_distribution(&self.state)
    }
}

/// Integrates `i dφ/dt = H(t/T) φ` from the uniform superposition with
/// fixed-step classical RK4, `ceil(T / dt_target)` steps.
pub fn evolve(
    problem: &IsingProblem,
    schedule: &AnnealSchedule,
    anneal_time: f64,
    scale: f64,
    dt_target: f64,
) -> Result<Evolution> {
    if !(anneal_time.is_finite() && anneal_time > 0.0) {
        return Err(Error::Config(format!("annealing time {anneal_time} must be positive")));
    }
    if !(dt_target.is_finite() && dt_target > 0.0) {
        return Err(Error::Config(format!("dt_target {dt_target} must be positive")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Config(format!("scale {scale} must be positive")));
    }
    let mut state = uniform_state(problem.n_qubits())?;
    let energies = problem.diagonal();
    let steps = (anneal_time / dt_target).ceil().max(1.0) as usize;
    let h = anneal_time / steps as f64;
    let dim = energies.len();

    let zero = Complex64::new(0.0, 0.0);
    let mut k = vec![zero; dim];
    let mut probe = vec![zero; dim];
    let mut acc = vec![zero; dim];

    let coefficients = |t: f64| schedule_coefficients(schedule, (t / anneal_time).min(1.0), scale);

    for step in 0..steps {
        let t = step as f64 * h;
        let psi = state.amplitudes_mut();
        acc.copy_from_slice(psi);

        // Stage weights (1, 2, 2, 1)/6 and probe offsets (½, ½, 1).
        let stages = [(0.0, h / 6.0, 0.5 * h), (0.5 * h, h / 3.0, 0.5 * h), (0.5 * h, h / 3.0, h), (h, h / 6.0, 0.0)];
        for (stage, &(offset, weight, next)) in stages.iter().enumerate() {
            let (cx, cz) = coefficients(t + offset);
            let input: &[Complex64] = if stage == 0 { psi } else { &probe };
            apply_ising(cx, cz, &energies, input, &mut k);
            // k ← −i H φ, folded into the updates below.
            for (a, kv) in acc.iter_mut().zip(&k) {
                *a += Complex64::new(kv.im, -kv.re) * weight;
            }
            if stage < 3 {
                for ((p, &base), kv) in probe.iter_mut().zip(psi.iter()).zip(&k) {
                    *p = base + Complex64::new(kv.im, -kv.re) * next;
                }
            }
        }
        psi.copy_from_slice(&acc);

        let norm = state.norm_sqr();
        if !norm.is_finite() {
            return Err(Error::Numerical {
                step,
                reason: "non-finite amplitudes".into(),
            });
        }
    }

    let norm_drift = (state.norm_sqr() - 1.0).abs();
    let renormalized = norm_drift > RENORMALIZE_THRESHOLD;
    if renormalized {
        state.normalize();
    }
    Ok(Evolution {
        state,
        norm_drift,
        renormalized,
        steps,
    })
}

/// Everything besides the problem that determines an annealing run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSettings {
    pub schedule: AnnealSchedule,
    pub anneal_time: f64,
    #[serde(default = "one")]
    pub scale: f64,
    /// `None` selects [`default_dt`].
    #[serde(default)]
    pub dt_target: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl AnnealSettings {
    pub fn linear(anneal_time: f64) -> Self {
        Self {
            schedule: AnnealSchedule::Linear,
            anneal_time,
            scale: 1.0,
            dt_target: None,
        }
    }

    pub fn with_dt(mut self, dt_target: f64) -> Self {
        self.dt_target = Some(dt_target);
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt_target.unwrap_or_else(|| default_dt(self.anneal_time))
    }

    pub fn evolve(&self, problem: &IsingProblem) -> Result<Evolution> {
        evolve(problem, &self.schedule, self.anneal_time, self.scale, self.dt())
    }

    pub fn distribution(&self, problem: &IsingProblem) -> Result<ProbDist> {
        self.evolve(problem)?.distribution()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_spins_stay_uniform() {
        let p = IsingProblem::free(3).unwrap();
        let dist = AnnealSettings::linear(5.0).distribution(&p).unwrap();
        for &q in dist.probs() {
            assert!((q - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_time_gives_uniform() {
        let p = IsingProblem::chain(vec![0.9, -0.8], vec![0.7, -1.0, 0.5]).unwrap();
        let dist = AnnealSettings::linear(1e-9).distribution(&p).unwrap();
        for &q in dist.probs() {
            assert!((q - 0.125).abs() < 1e-6);
        }
    }

    #[test]
    fn step_count_is_ceiling() {
        let p = IsingProblem::free(1).unwrap();
        let evo = evolve(&p, &AnnealSchedule::Linear, 1.0, 1.0, 0.3).unwrap();
        assert_eq!(evo.steps, 4);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = IsingProblem::free(1).unwrap();
        assert!(evolve(&p, &AnnealSchedule::Linear, 0.0, 1.0, 0.1).is_err());
        assert!(evolve(&p, &AnnealSchedule::Linear, 1.0, 1.0, 0.0).is_err());
        assert!(evolve(&p, &AnnealSchedule::Linear, 1.0, -1.0, 0.1).is_err());
    }

    #[test]
    fn unstable_step_reports_numerical_failure() {
        // dt far beyond the RK4 stability region blows the norm up.
        let p = IsingProblem::new(1, vec![], vec![], vec![1e150]).unwrap();
        let err = evolve(&p, &AnnealSchedule::Linear, 100.0, 1.0, 50.0).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }), "{err}");
    }
}
