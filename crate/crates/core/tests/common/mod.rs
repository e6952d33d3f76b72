//! Independent reference computations shared by the integration suites.
#![allow(dead_code)]

use qaml::ising::{AnnealSchedule, IsingProblem, ScheduleTable};
use qaml::learning::{dataset_loss, ClassifierParams, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random problem on `n` qubits: each pair coupled with probability ½, all fields set.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, with_fields: bool) -> IsingProblem {
    let mut edges = Vec::new();
    let mut couplings = Vec::new();
    for l in 0..n {
        for m in l + 1..n {
            if edges.is_empty() || rng.random_bool(0.5) {
                edges.push((l, m));
                couplings.push(rng.random_range(-1.0..1.0));
            }
        }
    }
    let fields = (0..n)
        .map(|_| if with_fields { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect();
    IsingProblem::new(n, edges, couplings, fields).unwrap()
}

/// Smooth-ish tabulated schedule with a transverse term that decays faster than linear.
pub fn sample_table() -> AnnealSchedule {
    let s: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let a = s.iter().map(|x| 2.0 * (1.0 - x).powi(2)).collect();
    let b = s.iter().map(|x| 2.0 * x.sqrt()).collect();
    AnnealSchedule::Tabulated(ScheduleTable::new(s, a, b, 1.0).unwrap())
}

/// Cyclic Jacobi eigensolver for a dense symmetric matrix (row-major).
/// Returns eigenvalues and eigenvectors as columns of a row-major matrix.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Top-`k` principal axes by brute force: covariance, Jacobi, sort, sign-fix.
pub fn brute_force_pca(data: &[f64], rows: usize, cols: usize, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mean: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| data[i * cols + j]).sum::<f64>() / rows as f64)
        .collect();
    let mut cov = vec![0.0; cols * cols];
    for i in 0..rows {
        for a in 0..cols {
            for b in 0..cols {
                cov[a * cols + b] += (data[i * cols + a] - mean[a]) * (data[i * cols + b] - mean[b]);
            }
        }
    }
    cov.iter_mut().for_each(|c| *c /= (rows - 1) as f64);
    let (values, vectors) = jacobi_eigen(&cov, cols);
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
    let axes = order[..k]
        .iter()
        .map(|&c| {
            let mut axis: Vec<f64> = (0..cols).map(|r| vectors[r * cols + c]).collect();
            let lead = axis.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                axis.iter_mut().for_each(|x| *x = -*x);
            }
            axis
        })
        .collect();
    (order[..k].iter().map(|&c| values[c]).collect(), axes)
}

/// Central finite differences of the full-dataset mean cross-entropy.
pub fn numeric_gradient(params: &ClassifierParams, dataset: &Dataset, step: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = params.clone();
    let mut gw = vec![0.0; p.weights().len()];
    for (i, g) in gw.iter_mut().enumerate() {
        let orig = p.weights()[i];
        p.weights_mut()[i] = orig + step;
        let up = dataset_loss(&p, dataset);
        p.weights_mut()[i] = orig - step;
        let down = dataset_loss(&p, dataset);
        p.weights_mut()[i] = orig;
        *g = (up - down) / (2.0 * step);
    }
    let mut gb = vec![0.0; p.bias().len()];
    for (i, g) in gb.iter_mut().enumerate() {
        let orig = p.bias()[i];
        p.bias_mut()[i] = orig + step;
        let up = dataset_loss(&p, dataset);
        p.bias_mut()[i] = orig - step;
        let down = dataset_loss(&p, dataset);
        p.bias_mut()[i] = orig;
        *g = (up - down) / (2.0 * step);
    }
    (gw, gb)
}

/// Largest elementwise relative error, with an absolute floor for tiny entries.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
