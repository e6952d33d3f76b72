//! Participation ratios, distribution-matching scans and rescaled-time collapse.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::ProbDist;

const NORMALIZATION_TOL: f64 = 1e-6;

/// `1 / Σ_b p_b²` over all `2^N` outcomes.
pub fn participation_ratio(dist: &ProbDist) -> Result<f64> {
    let probs = dist.probs();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL || probs.iter().any(|p| *p < 0.0) {
        return Err(Error::InvalidState(format!("participation ratio of unnormalized distribution (sum {total})")));
    }
    Ok(1.0 / probs.iter().map(|p| p * p).sum::<f64>())
}

/// Mean participation ratio over a dataset.
pub fn apr(dists: &[ProbDist]) -> Result<f64> {
    if dists.is_empty() {
        return Err(Error::Config("APR of an empty dataset".into()));
    }
    let total = dists.iter().map(participation_ratio).sum::<Result<f64>>()?;
    Ok(total / dists.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrReport {
    pub n_qubits: usize,
    pub anneal_time: f64,
    pub gamma: f64,
    pub per_sample: Vec<f64>,
    pub apr: f64,
}

impl PrReport {
    pub fn new(dists: &[ProbDist], n_qubits: usize, anneal_time: f64, gamma: f64) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::Config("PR report of an empty dataset".into()));
        }
        let per_sample = dists.iter().map(participation_ratio).collect::<Result<Vec<_>>>()?;
        let apr = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
        Ok(Self {
            n_qubits,
            anneal_time,
            gamma,
            per_sample,
            apr,
        })
    }
}

/// Writes `N,T,gamma,sample_index,pr` rows (with header) for every report.
pub fn write_pr_csv<W: Write>(out: W, reports: &[PrReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "T", "gamma", "sample_index", "pr"])?;
    for r in reports {
        for (i, pr) in r.per_sample.iter().enumerate() {
            w.write_record([
                r.n_qubits.to_string(),
                r.anneal_time.to_string(),
                r.gamma.to_string(),
                i.to_string(),
                pr.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<pr csv>", e))?;
    Ok(())
}

/// `Σ_i (p_i − q_i)²`.
pub fn squared_error(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape {
            expected: p.len(),
            actual: q.len(),
        });
    }
    Ok(p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b) * (a - b)).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LtScan {
    pub times: Vec<f64>,
    pub mean_error: Vec<f64>,
    pub best_time: f64,
    pub best_index: usize,
}

impl LtScan {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["T", "mean_L"])?;
        for (t, l) in self.times.iter().zip(&self.mean_error) {
            w.write_record([t.to_string(), l.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<lt csv>", e))?;
        Ok(())
    }
}

/// Mean squared distance between references and simulated distributions at
/// every grid time; `simulate(T)` returns one distribution per reference.
pub fn lt_scan<F>(reference: &[ProbDist], times: &[f64], mut simulate: F) -> Result<LtScan>
where
    F: FnMut(f64) -> Result<Vec<ProbDist>>,
{
    if times.is_empty() {
        return Err(Error::Config("L(T) scan needs a nonempty time grid".into()));
    }
    if reference.is_empty() {
        return Err(Error::Config("L(T) scan needs reference distributions".into()));
    }
    let mut mean_error = Vec::with_capacity(times.len());
    for &t in times {
        let sim = simulate(t)?;
        if sim.len() != reference.len() {
            return Err(Error::Shape {
                expected: reference.len(),
                actual: sim.len(),
            });
        }
        let total = reference
            .iter()
            .zip(&sim)
            .map(|(r, s)| squared_error(r, s))
            .sum::<Result<f64>>()?;
        mean_error.push(total / reference.len() as f64);
    }
    // Strict comparison keeps the earliest (smallest) time on ties.
    let mut best_index = 0;
    for (i, &l) in mean_error.iter().enumerate() {
        if l < mean_error[best_index] {
            best_index = i;
        }
    }
    Ok(LtScan {
        best_time: times[best_index],
        best_index,
        times: times.to_vec(),
        mean_error,
    })
}

/// APR as a function of annealing time for one register size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprCurve {
    pub n_qubits: usize,
    pub times: Vec<f64>,
    pub aprs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledRow {
    pub n_qubits: usize,
    pub anneal_time: f64,
    pub rescaled_time: f64,
    pub apr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledTable {
    pub alpha: f64,
    pub rows: Vec<RescaledRow>,
    pub collapse_before: f64,
    pub collapse_after: f64,
}

impl RescaledTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["N", "T", "rescaled_T", "apr"])?;
        for r in &self.rows {
            w.write_record([
                r.n_qubits.to_string(),
                r.anneal_time.to_string(),
                r.rescaled_time.to_string(),
                r.apr.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<rescaled csv>", e))?;
        Ok(())
    }
}

/// `T / 2^{αN}`.
pub fn rescaled_time(anneal_time: f64, n_qubits: usize, alpha: f64) -> f64 {
    anneal_time / (alpha * n_qubits as f64).exp2()
}

const COLLAPSE_SAMPLES: usize = 257;

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    ys[k - 1] + (x - x0) / (x1 - x0) * (ys[k] - ys[k - 1])
}

/// Mean over curve pairs of the average `|Δ ln APR|` across their overlap in `ln t`.
///
/// Each curve is given as `(abscissa, apr)` samples with increasing abscissa.
/// Pairs whose abscissa ranges do not overlap make the score infinite.
pub fn collapse_score(curves: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    if curves.len() < 2 {
        return Err(Error::Config("collapse score needs at least two curves".into()));
    }
    let logged: Vec<(Vec<f64>, Vec<f64>)> = curves
        .iter()
        .map(|(x, y)| {
            if x.len() < 2 || x.len() != y.len() {
                return Err(Error::Config("each curve needs at least two matched samples".into()));
            }
            if x.windows(2).any(|w| w[1] <= w[0]) || x.iter().chain(y).any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(Error::Config("curve samples must be positive with increasing abscissa".into()));
            }
            Ok((x.iter().map(|v| v.ln()).collect(), y.iter().map(|v| v.ln()).collect()))
        })
        .collect::<Result<_>>()?;

    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..logged.len() {
        for j in i + 1..logged.len() {
            let (xi, yi) = &logged[i];
            let (xj, yj) = &logged[j];
            let lo = xi[0].max(xj[0]);
            let hi = xi[xi.len() - 1].min(xj[xj.len() - 1]);
            if hi <= lo {
                return Ok(f64::INFINITY);
            }
            let gap: f64 = (0..COLLAPSE_SAMPLES)
                .map(|s| {
                    let x = lo + (hi - lo) * s as f64 / (COLLAPSE_SAMPLES - 1) as f64;
                    (interpolate(xi, yi, x) - interpolate(xj, yj, x)).abs()
                })
                .sum::<f64>()
                / COLLAPSE_SAMPLES as f64;
            total += gap;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Rescaled abscissae for every `(N, T)` plus collapse scores before and after rescaling.
pub fn rescaled_time_table(curves: &[AprCurve], alpha: f64) -> Result<RescaledTable> {
    if curves.len() < 2 {
        return Err(Error::Config("rescaled-time table needs at least two qubit counts".into()));
    }
    let grid = &curves[0].times;
    if curves.iter().any(|c| &c.times != grid || c.aprs.len() != c.times.len()) {
        return Err(Error::Config("APR curves must share one time grid".into()));
    }
    let mut rows = Vec::new();
    for c in curves {
        for (&t, &apr) in c.times.iter().zip(&c.aprs) {
            rows.push(RescaledRow {
                n_qubits: c.n_qubits,
                anneal_time: t,
                rescaled_time: rescaled_time(t, c.n_qubits, alpha),
                apr,
            });
        }
    }
    let raw: Vec<_> = curves.iter().map(|c| (c.times.clone(), c.aprs.clone())).collect();
    let scaled: Vec<_> = curves
        .iter()
        .map(|c| {
            let xs = c.times.iter().map(|&t| rescaled_time(t, c.n_qubits, alpha)).collect();
            (xs, c.aprs.clone())
        })
        .collect();
    Ok(RescaledTable {
        alpha,
        rows,
        collapse_before: collapse_score(&raw)?,
        collapse_after: collapse_score(&scaled)?,
    })
}
