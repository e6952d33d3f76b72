mod common;

use common::*;
use qaml::encoding::PcaModel;
use qaml::ising::{evolve, evolve_oracle, output_distribution, AnnealSchedule, AnnealSettings, ProbDist};
use qaml::learning::{loss_and_gradient, ClassifierParams, Dataset, Hyperparameters};
use qaml::sampling::{ensemble_distribution, perturb_problem, sample_shots, NoiseConfig, ShotConfig};
use rand::Rng;

#[test]
fn pca_matches_dense_jacobi() {
    let mut rng = rng(50);
    let (rows, cols, k) = (50, 10, 5);
    // Anisotropic columns keep the eigenvalues well separated.
    let data: Vec<f64> = (0..rows * cols)
        .map(|i| rng.random_range(-1.0..1.0) * (1.0 + (i % cols) as f64))
        .collect();
    let model = PcaModel::fit(&data, rows, cols, k).unwrap();
    let (values, axes) = brute_force_pca(&data, rows, cols, k);
    for i in 0..k {
        assert!((model.explained_variance()[i] - values[i]).abs() < 1e-8 * values[0]);
        assert!(max_abs_diff(model.component(i), &axes[i]) < 1e-8, "component {i}");
    }
    // Projection of an arbitrary sample through the oracle axes.
    let sample: Vec<f64> = (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect();
    let centred: Vec<f64> = sample.iter().zip(model.mean()).map(|(x, m)| x - m).collect();
    let expected: Vec<f64> = axes.iter().map(|a| a.iter().zip(&centred).map(|(p, q)| p * q).sum()).collect();
    assert!(max_abs_diff(&model.transform(&sample).unwrap(), &expected) < 1e-8);
}

#[test]
fn pca_components_orthonormal() {
    let mut rng = rng(3);
    let data: Vec<f64> = (0..40 * 12).map(|_| rng.random_range(0.0..1.0)).collect();
    let model = PcaModel::fit(&data, 40, 12, 7).unwrap();
    for i in 0..7 {
        for j in 0..7 {
            let dot: f64 = model.component(i).iter().zip(model.component(j)).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-9);
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = rng(8);
    for trial in 0..5 {
        let (c, d, n) = (3, 8, 12);
        let features: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let labels: Vec<usize> = (0..n).map(|i| (i + trial) % c).collect();
        let data = Dataset::new(d, c, features, labels).unwrap();
        let weights = (0..c * d).map(|_| rng.random_range(-0.5..0.5)).collect();
        let bias = (0..c).map(|_| rng.random_range(-0.5..0.5)).collect();
        let params = ClassifierParams::with_values(c, d, weights, bias, Hyperparameters::default()).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let analytic = loss_and_gradient(&params, &data, &all);
        let (gw, gb) = numeric_gradient(&params, &data, 1e-5);
        assert!(max_relative_error(&analytic.weights, &gw) < 1e-4);
        assert!(max_relative_error(&analytic.bias, &gb) < 1e-4);
    }
}

#[test]
fn rk4_matches_dense_oracle_on_small_instances() {
    let mut rng = rng(11);
    for case in 0..6 {
        let n = 1 + case % 3;
        let problem = random_problem(&mut rng, n, true);
        let schedule = if case % 2 == 0 { AnnealSchedule::Linear } else { sample_table() };
        let t = [0.5, 2.0, 8.0][case % 3];
        let rk = evolve(&problem, &schedule, t, 1.0, t / 10_000.0).unwrap().distribution().unwrap();
        let oracle = output_distribution(&evolve_oracle(&problem, &schedule, t, 1.0, 100_000).unwrap()).unwrap();
        assert!(max_abs_diff(rk.probs(), oracle.probs()) <= 1e-6, "case {case}");
    }
}

#[test]
fn single_spin_rk4_against_oracle() {
    let problem = qaml::ising::IsingProblem::new(1, vec![], vec![], vec![1.0]).unwrap();
    let rk = evolve(&problem, &AnnealSchedule::Linear, 2.0, 1.0, 2.0 / 10_000.0).unwrap().distribution().unwrap();
    let oracle = output_distribution(&evolve_oracle(&problem, &AnnealSchedule::Linear, 2.0, 1.0, 100_000).unwrap()).unwrap();
    assert!(max_abs_diff(rk.probs(), oracle.probs()) <= 1e-6);
    // Sanity: the field favours z = −1 (bit 1) at the end of the anneal.
    assert!(rk.probs()[1] > rk.probs()[0]);
}

#[test]
fn oracle_self_convergence() {
    let mut rng = rng(5);
    let problem = random_problem(&mut rng, 3, true);
    let coarse = evolve_oracle(&problem, &AnnealSchedule::Linear, 2.0, 1.0, 100_000).unwrap();
    let fine = evolve_oracle(&problem, &AnnealSchedule::Linear, 2.0, 1.0, 200_000).unwrap();
    let (p, q) = (output_distribution(&coarse).unwrap(), output_distribution(&fine).unwrap());
    assert!(max_abs_diff(p.probs(), q.probs()) < 1e-9);
}

#[test]
fn ensemble_equals_recomputed_members() {
    let mut rng = rng(44);
    let problem = random_problem(&mut rng, 4, false);
    let settings = AnnealSettings::linear(2.0).with_dt(0.002);
    let cfg = NoiseConfig { amplitude: 0.1, realizations: 7, seed: 99 };
    let ensemble = ensemble_distribution(&problem, &settings, &cfg).unwrap();
    let mut mean = vec![0.0; 16];
    for r in 0..cfg.realizations {
        let member = perturb_problem(&problem, &cfg, r).unwrap();
        let p = evolve(&member, &settings.schedule, 2.0, 1.0, 0.002).unwrap().distribution().unwrap();
        mean.iter_mut().zip(p.probs()).for_each(|(m, x)| *m += x / cfg.realizations as f64);
    }
    assert!(max_abs_diff(ensemble.probs(), &mean) < 1e-12);
    assert!((ensemble.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn total_variation_decays_as_inverse_root_shots() {
    let dist = ProbDist::exact(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    let shots = [100u64, 1_000, 10_000, 100_000];
    let mut log_m = Vec::new();
    let mut log_tv = Vec::new();
    for &m in &shots {
        let tv: f64 = (0..200)
            .map(|s| dist.total_variation(&sample_shots(&dist, ShotConfig { shots: m, seed: s }).unwrap()).unwrap())
            .sum::<f64>()
            / 200.0;
        log_m.push((m as f64).ln());
        log_tv.push(tv.ln());
    }
    let fitted = slope(&log_m, &log_tv);
    assert!((fitted + 0.5).abs() <= 0.1, "slope {fitted}");
}
