//! End-to-end experiment runner: encode, evolve, sample, learn, report.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DatasetKind, ExperimentConfig};
use crate::data::{self, load_digits, load_mnist_dir, stratified_subsample, ImageSet, Split, CLASSES};
use crate::diagnostics::{apr, lt_scan, AprCurve, LtScan, PrReport};
use crate::encoding::{encode_digits, encode_mnist_chain, Encoder};
use crate::error::{Error, ErrorClass, Result};
use crate::ising::{AnnealSchedule, AnnealSettings, IsingProblem, ProbDist};
use crate::learning::{fit_and_score, linear_baseline, Dataset, FitOutcome};
use crate::sampling::{derive_seed, ensemble_distribution, sample_shots, NoiseConfig, ShotConfig};

const SPLIT_STREAM: u64 = 1;
const SUBSAMPLE_STREAM: u64 = 2;
const NOISE_STREAM: u64 = 3;
const SHOT_STREAM: u64 = 4;
const TRAIN_STREAM: u64 = 5;
const BASELINE_STREAM: u64 = 6;
const REFERENCE_STREAM: u64 = 7;

/// Hamiltonian-randomness settings of one sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub amplitude: f64,
    pub realizations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_qubits: usize,
    pub gamma: f64,
    pub anneal_time: f64,
    /// `None` trains on exact distributions.
    pub shots: Option<u64>,
    pub noise: Option<NoisePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct DistKey {
    n_qubits: usize,
    gamma: u64,
    anneal_time: u64,
    noise: Option<(u64, usize)>,
}

impl From<&SweepPoint> for DistKey {
    fn from(p: &SweepPoint) -> Self {
        Self {
            n_qubits: p.n_qubits,
            gamma: p.gamma.to_bits(),
            anneal_time: p.anneal_time.to_bits(),
            noise: p.noise.map(|n| (n.amplitude.to_bits(), n.realizations)),
        }
    }
}

/// Exact (or ensemble-averaged) output distributions of every image.
#[derive(Clone, Debug, PartialEq)]
pub struct Distributions {
    pub train: Vec<ProbDist>,
    pub test: Vec<ProbDist>,
}

/// Encoded PCA features of both splits for one PCA dimension.
#[derive(Clone, Debug)]
pub struct EncodedSplit {
    pub encoder: Encoder,
    pub train_x: Vec<Vec<f64>>,
    pub test_x: Vec<Vec<f64>>,
    pub train_pca: Dataset,
    pub test_pca: Dataset,
}

/// Accuracy summary over repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointScore {
    pub train_accuracy: Vec<f64>,
    pub test_accuracy: Vec<f64>,
    pub apr: f64,
    /// Model of the first repetition.
    #[serde(skip)]
    pub first_model: Option<Box<FitOutcome>>,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One CSV row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config_hash: String,
    pub kind: String,
    pub dataset: String,
    pub n_qubits: usize,
    pub gamma: Option<f64>,
    pub anneal_time: Option<f64>,
    pub shots: String,
    pub noise_amplitude: Option<f64>,
    pub realizations: Option<usize>,
    pub repetitions: usize,
    pub train_acc_mean: Option<f64>,
    pub train_acc_std: Option<f64>,
    pub test_acc_mean: Option<f64>,
    pub test_acc_std: Option<f64>,
    pub baseline_test_acc: Option<f64>,
    pub apr: Option<f64>,
    pub wall_time_s: f64,
    pub error: String,
    /// Class of `error`; not part of the CSV.
    #[serde(skip)]
    pub error_class: Option<ErrorClass>,
}

impl ResultRow {
    /// Row with the timing column blanked, for reproducibility comparisons.
    pub fn without_timing(&self) -> ResultRow {
        ResultRow {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<result csv>", e))?;
    Ok(())
}

pub fn write_rows_file(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(file, rows)
}

pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub struct Pipeline {
    config: ExperimentConfig,
    config_hash: String,
    schedule: AnnealSchedule,
    split: Split,
    encoded: HashMap<usize, Arc<EncodedSplit>>,
    distributions: HashMap<DistKey, Arc<Distributions>>,
    baselines: HashMap<usize, Arc<PointScore>>,
}

impl Pipeline {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let split = load_split(&config)?;
        Self::with_split(config, split)
    }

    /// Uses an already loaded split; the config's paths are not read.
    pub fn with_split(config: ExperimentConfig, split: Split) -> Result<Self> {
        let schedule = config.schedule.build()?;
        Ok(Self {
            config_hash: config.hash(),
            config,
            schedule,
            split,
            encoded: HashMap::new(),
            distributions: HashMap::new(),
            baselines: HashMap::new(),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn split(&self) -> &Split {
        &self.split
    }

    pub fn clear_cache(&mut self) {
        self.distributions.clear();
    }

    pub fn settings(&self, anneal_time: f64) -> AnnealSettings {
        AnnealSettings {
            schedule: self.schedule.clone(),
            anneal_time,
            scale: self.config.scale,
            dt_target: self.config.dt_target,
        }
    }

    /// PCA + normaliser fitted on the training split for `n_qubits`.
    pub fn encoded(&mut self, n_qubits: usize) -> Result<Arc<EncodedSplit>> {
        let k = self.config.pca_dim(n_qubits);
        if let Some(e) = self.encoded.get(&k) {
            return Ok(e.clone());
        }
        let train = &self.split.train;
        let encoder = Encoder::fit(&train.images, train.len(), train.pixels, k, self.config.seed)?;
        let encode_all = |set: &ImageSet| -> Result<Vec<Vec<f64>>> {
            (0..set.len()).map(|i| encoder.encode(set.image(i))).collect()
        };
        let train_x = encode_all(train)?;
        let test_x = encode_all(&self.split.test)?;
        let pca_rows = |set: &ImageSet| -> Result<Vec<Vec<f64>>> {
            (0..set.len()).map(|i| encoder.pca.transform(set.image(i))).collect()
        };
        let train_pca = Dataset::from_rows(&pca_rows(train)?, train.labels.clone(), CLASSES)?;
        let test_pca = Dataset::from_rows(&pca_rows(&self.split.test)?, self.split.test.labels.clone(), CLASSES)?;
        let e = Arc::new(EncodedSplit {
            encoder,
            train_x,
            test_x,
            train_pca,
            test_pca,
        });
        self.encoded.insert(k, e.clone());
        Ok(e)
    }

    fn encode_one(&self, x: &[f64], n_qubits: usize, gamma: f64) -> Result<IsingProblem> {
        match self.config.dataset {
            DatasetKind::Digits => encode_digits(x, gamma, &self.config.digits_edges()),
            DatasetKind::Mnist => {
                let scaled: Vec<f64> = x.iter().map(|v| v * gamma).collect();
                encode_mnist_chain(&scaled, n_qubits)
            }
        }
    }

    /// Encoded Ising problems for both splits, in image order.
    pub fn problems(&mut self, n_qubits: usize, gamma: f64) -> Result<(Vec<IsingProblem>, Vec<IsingProblem>)> {
        let enc = self.encoded(n_qubits)?;
        let train = enc.train_x.iter().map(|x| self.encode_one(x, n_qubits, gamma)).collect::<Result<_>>()?;
        let test = enc.test_x.iter().map(|x| self.encode_one(x, n_qubits, gamma)).collect::<Result<_>>()?;
        Ok((train, test))
    }

    /// Output distributions of every image at a sweep point, cached when enabled.
    pub fn distributions(&mut self, point: &SweepPoint) -> Result<Arc<Distributions>> {
        let key = DistKey::from(point);
        if let Some(d) = self.distributions.get(&key) {
            return Ok(d.clone());
        }
        let (train_p, test_p) = self.problems(point.n_qubits, point.gamma)?;
        let settings = self.settings(point.anneal_time);
        let n_train = train_p.len();
        let master = self.config.seed;
        let run = |(index, problem): (usize, &IsingProblem)| -> Result<ProbDist> {
            match point.noise {
                None => settings.distribution(problem),
                Some(noise) => {
                    let cfg = NoiseConfig {
                        amplitude: noise.amplitude,
                        realizations: noise.realizations,
                        seed: derive_seed(master, &[NOISE_STREAM, index as u64]),
                    };
                    ensemble_distribution(problem, &settings, &cfg)
                }
            }
        };
        let train: Vec<ProbDist> = train_p.par_iter().enumerate().map(run).collect::<Result<_>>()?;
        let test: Vec<ProbDist> = test_p
            .par_iter()
            .enumerate()
            .map(|(i, p)| run((n_train + i, p)))
            .collect::<Result<_>>()?;
        let d = Arc::new(Distributions { train, test });
        if self.config.cache {
            self.distributions.insert(key, d.clone());
        }
        Ok(d)
    }

    /// Feature rows for one repetition: exact or shot-sampled distributions.
    pub fn features(&self, dists: &Distributions, shots: Option<u64>, repetition: usize) -> Result<(Dataset, Dataset)> {
        let master = self.config.seed;
        let n_train = dists.train.len();
        let sample = |index: usize, d: &ProbDist| -> Result<Vec<f64>> {
            match shots {
                None => Ok(d.probs().to_vec()),
                Some(m) => {
                    let seed = derive_seed(master, &[SHOT_STREAM, repetition as u64, index as u64]);
                    Ok(sample_shots(d, ShotConfig { shots: m, seed })?.into_probs())
                }
            }
        };
        let train_rows: Vec<Vec<f64>> = dists.train.par_iter().enumerate().map(|(i, d)| sample(i, d)).collect::<Result<_>>()?;
        let test_rows: Vec<Vec<f64>> = dists
            .test
            .par_iter()
            .enumerate()
            .map(|(i, d)| sample(n_train + i, d))
            .collect::<Result<_>>()?;
        Ok((
            Dataset::from_rows(&train_rows, self.split.train.labels.clone(), CLASSES)?,
            Dataset::from_rows(&test_rows, self.split.test.labels.clone(), CLASSES)?,
        ))
    }

    /// Trains and scores the QA-feature model at one point over all repetitions.
    pub fn score_point(&mut self, point: &SweepPoint) -> Result<PointScore> {
        self.score_point_with(point, self.config.repetitions)
    }

    pub fn score_point_with(&mut self, point: &SweepPoint, repetitions: usize) -> Result<PointScore> {
        let dists = self.distributions(point)?;
        let point_apr = apr(&dists.train)?;
        let mut score = PointScore {
            train_accuracy: Vec::with_capacity(repetitions),
            test_accuracy: Vec::with_capacity(repetitions),
            apr: point_apr,
            first_model: None,
        };
        for rep in 0..repetitions {
            let (train_set, test_set) = self.features(&dists, point.shots, rep)?;
            let seed = derive_seed(self.config.seed, &[TRAIN_STREAM, rep as u64]);
            let outcome = fit_and_score(&train_set, &test_set, self.config.trainer, seed)?;
            score.train_accuracy.push(outcome.train_accuracy);
            score.test_accuracy.push(outcome.test_accuracy);
            if rep == 0 {
                score.first_model = Some(Box::new(outcome));
            }
        }
        Ok(score)
    }

    /// Linear classifier on the PCA features, same trainer and repetitions.
    pub fn baseline(&mut self, n_qubits: usize) -> Result<Arc<PointScore>> {
        let k = self.config.pca_dim(n_qubits);
        if let Some(b) = self.baselines.get(&k) {
            return Ok(b.clone());
        }
        let enc = self.encoded(n_qubits)?;
        let mut score = PointScore {
            train_accuracy: Vec::new(),
            test_accuracy: Vec::new(),
            apr: f64::NAN,
            first_model: None,
        };
        for rep in 0..self.config.repetitions {
            let seed = derive_seed(self.config.seed, &[BASELINE_STREAM, rep as u64]);
            let outcome = linear_baseline(&enc.train_pca, &enc.test_pca, self.config.trainer, seed)?;
            score.train_accuracy.push(outcome.train_accuracy);
            score.test_accuracy.push(outcome.test_accuracy);
            if rep == 0 {
                score.first_model = Some(Box::new(outcome));
            }
        }
        let score = Arc::new(score);
        self.baselines.insert(k, score.clone());
        Ok(score)
    }

    fn base_row(&self, n_qubits: usize) -> ResultRow {
        ResultRow {
            config_hash: self.config_hash.clone(),
            kind: String::new(),
            dataset: self.config.dataset.name().into(),
            n_qubits,
            gamma: None,
            anneal_time: None,
            shots: String::new(),
            noise_amplitude: None,
            realizations: None,
            repetitions: self.config.repetitions,
            train_acc_mean: None,
            train_acc_std: None,
            test_acc_mean: None,
            test_acc_std: None,
            baseline_test_acc: None,
            apr: None,
            wall_time_s: 0.0,
            error: String::new(),
            error_class: None,
        }
    }

    pub fn baseline_row(&mut self, n_qubits: usize) -> ResultRow {
        let start = Instant::now();
        let mut row = self.base_row(n_qubits);
        row.kind = "baseline".into();
        match self.baseline(n_qubits) {
            Ok(b) => {
                let (tr, trs) = mean_std(&b.train_accuracy);
                let (te, tes) = mean_std(&b.test_accuracy);
                row.train_acc_mean = Some(tr);
                row.train_acc_std = Some(trs);
                row.test_acc_mean = Some(te);
                row.test_acc_std = Some(tes);
                row.baseline_test_acc = Some(te);
            }
            Err(e) => {
                row.error = e.to_string();
                row.error_class = Some(e.class());
            }
        }
        row.wall_time_s = start.elapsed().as_secs_f64();
        row
    }

    /// Scores one point, recording any failure in the row instead of aborting.
    pub fn point_row(&mut self, point: &SweepPoint) -> (ResultRow, Option<Box<FitOutcome>>) {
        let start = Instant::now();
        let mut row = self.base_row(point.n_qubits);
        row.kind = "qa".into();
        row.gamma = Some(point.gamma);
        row.anneal_time = Some(point.anneal_time);
        row.shots = point.shots.map_or_else(|| "exact".to_string(), |m| m.to_string());
        row.noise_amplitude = Some(point.noise.map_or(0.0, |n| n.amplitude));
        row.realizations = point.noise.map(|n| n.realizations);
        row.baseline_test_acc = self.baseline(point.n_qubits).ok().map(|b| mean_std(&b.test_accuracy).0);
        let mut model = None;
        match self.score_point(point) {
            Ok(score) => {
                let (tr, trs) = mean_std(&score.train_accuracy);
                let (te, tes) = mean_std(&score.test_accuracy);
                row.train_acc_mean = Some(tr);
                row.train_acc_std = Some(trs);
                row.test_acc_mean = Some(te);
                row.test_acc_std = Some(tes);
                row.apr = Some(score.apr);
                model = score.first_model;
            }
            Err(e) => {
                row.error = e.to_string();
                row.error_class = Some(e.class());
            }
        }
        row.wall_time_s = start.elapsed().as_secs_f64();
        (row, model)
    }

    /// Baseline rows (one per register size) followed by one row per point.
    pub fn run_sweep(&mut self, points: &[SweepPoint]) -> Vec<ResultRow> {
        self.run_sweep_with(points, |_, _| {})
    }

    /// As [`Pipeline::run_sweep`], handing each point's first trained model to `on_model`.
    pub fn run_sweep_with<F>(&mut self, points: &[SweepPoint], mut on_model: F) -> Vec<ResultRow>
    where
        F: FnMut(&SweepPoint, &FitOutcome),
    {
        let mut sizes: Vec<usize> = points.iter().map(|p| p.n_qubits).collect();
        sizes.sort_unstable();
        sizes.dedup();
        let mut rows: Vec<ResultRow> = sizes.iter().map(|&n| self.baseline_row(n)).collect();
        for point in points {
            let (row, model) = self.point_row(point);
            if let Some(m) = model {
                on_model(point, &m);
            }
            rows.push(row);
        }
        rows
    }

    /// Participation-ratio report over the training split at one point.
    pub fn pr_report(&mut self, point: &SweepPoint) -> Result<PrReport> {
        let dists = self.distributions(point)?;
        PrReport::new(&dists.train, point.n_qubits, point.anneal_time, point.gamma)
    }

    /// Exact distributions of the first `count` training images.
    pub fn training_distributions(&mut self, n_qubits: usize, gamma: f64, anneal_time: f64, count: usize) -> Result<Vec<ProbDist>> {
        let (train, _) = self.problems(n_qubits, gamma)?;
        if count == 0 || count > train.len() {
            return Err(Error::Config(format!("{count} images requested from a training split of {}", train.len())));
        }
        let settings = self.settings(anneal_time);
        train[..count].par_iter().map(|p| settings.distribution(p)).collect()
    }

    /// Reference distributions for the L(T) scan: read from the configured
    /// file, or simulated at `reference_time` and sampled with `reference_shots`.
    pub fn reference_distributions(&mut self, n_qubits: usize, gamma: f64) -> Result<Vec<ProbDist>> {
        let lt = self.config.lt.clone();
        if let Some(path) = &lt.reference_path {
            let refs = read_reference_csv(path)?;
            if refs.len() != lt.images || refs.iter().any(|r| r.n_qubits() != n_qubits) {
                return Err(Error::Format {
                    path: path.clone(),
                    field: "rows".into(),
                    reason: format!("expected {} distributions over {n_qubits} qubits", lt.images),
                });
            }
            return Ok(refs);
        }
        let exact = self.training_distributions(n_qubits, gamma, lt.reference_time, lt.images)?;
        let master = self.config.seed;
        exact
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let seed = derive_seed(master, &[REFERENCE_STREAM, i as u64]);
                sample_shots(d, ShotConfig { shots: lt.reference_shots, seed })
            })
            .collect()
    }

    /// Mean squared distance between references and simulations over the configured grid.
    pub fn run_lt_scan(&mut self, n_qubits: usize, gamma: f64) -> Result<LtScan> {
        let reference = self.reference_distributions(n_qubits, gamma)?;
        self.lt_scan_against(&reference, n_qubits, gamma)
    }

    pub fn lt_scan_against(&mut self, reference: &[ProbDist], n_qubits: usize, gamma: f64) -> Result<LtScan> {
        let times = self.config.lt.times.clone();
        let count = reference.len();
        lt_scan(reference, &times, |t| self.training_distributions(n_qubits, gamma, t, count))
    }

    /// APR over the training split for every configured register size and time.
    pub fn apr_curves(&mut self, gamma: f64) -> Result<(Vec<AprCurve>, Vec<PrReport>)> {
        let mut curves = Vec::new();
        let mut reports = Vec::new();
        for n_qubits in self.config.n_qubits.clone() {
            let mut aprs = Vec::new();
            for anneal_time in self.config.anneal_times.clone() {
                let point = SweepPoint {
                    n_qubits,
                    gamma,
                    anneal_time,
                    shots: None,
                    noise: None,
                };
                let report = self.pr_report(&point)?;
                aprs.push(report.apr);
                reports.push(report);
            }
            curves.push(AprCurve {
                n_qubits,
                times: self.config.anneal_times.clone(),
                aprs,
            });
        }
        Ok((curves, reports))
    }

    fn grid(&self, shots: &[Option<u64>], noise: &[Option<NoisePoint>]) -> Vec<SweepPoint> {
        let mut points = Vec::new();
        for &n_qubits in &self.config.n_qubits {
            for &gamma in &self.config.gammas {
                for &anneal_time in &self.config.anneal_times {
                    for &noise in noise {
                        for &shots in shots {
                            points.push(SweepPoint {
                                n_qubits,
                                gamma,
                                anneal_time,
                                shots,
                                noise,
                            });
                        }
                    }
                }
            }
        }
        points
    }

    /// `N × γ × T` at the first configured shot count.
    pub fn time_points(&self) -> Vec<SweepPoint> {
        self.grid(&self.config.shots[..1], &[None])
    }

    /// `N × γ × T × M`.
    pub fn shot_points(&self) -> Vec<SweepPoint> {
        self.grid(&self.config.shots, &[None])
    }

    /// `N × γ × T × amplitude` at the first configured shot count.
    pub fn noise_points(&self) -> Vec<SweepPoint> {
        let noise: Vec<Option<NoisePoint>> = self
            .config
            .noise
            .amplitudes
            .iter()
            .map(|&amplitude| {
                Some(NoisePoint {
                    amplitude,
                    realizations: self.config.noise.realizations,
                })
            })
            .collect();
        self.grid(&self.config.shots[..1], &noise)
    }
}

/// Reads `sample_index,p0,p1,…` rows (header required) as exact distributions.
pub fn read_reference_csv(path: impl AsRef<Path>) -> Result<Vec<ProbDist>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let probs = record
            .iter()
            .skip(1)
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let dist = ProbDist::exact(probs).map_err(|e| Error::Validation(format!("{}:{line}: {e}", path.display())))?;
        out.push(dist);
    }
    if out.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            field: "rows".into(),
            reason: "no reference distributions".into(),
        });
    }
    Ok(out)
}

pub fn write_reference_csv<W: Write>(out: W, dists: &[ProbDist]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let width = dists.first().map_or(0, ProbDist::len);
    let mut header = vec!["sample_index".to_string()];
    header.extend((0..width).map(|b| format!("p{b}")));
    w.write_record(&header)?;
    for (i, d) in dists.iter().enumerate() {
        let mut record = vec![i.to_string()];
        record.extend(d.probs().iter().map(|p| p.to_string()));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<reference csv>", e))?;
    Ok(())
}

/// Loads the configured dataset and applies the split and optional subsample.
pub fn load_split(config: &ExperimentConfig) -> Result<Split> {
    let sizes = config.split_sizes();
    let split = match config.dataset {
        DatasetKind::Digits => {
            let path = config.digits_path.as_ref().ok_or_else(|| Error::Config("digits_path is required".into()))?;
            let set = load_digits(path)?;
            data::split_images(&set, sizes.train, sizes.test, derive_seed(config.seed, &[SPLIT_STREAM]))?
        }
        DatasetKind::Mnist => {
            let dir = config.mnist_dir.as_ref().ok_or_else(|| Error::Config("mnist_dir is required".into()))?;
            let full = load_mnist_dir(dir)?;
            if sizes.train > full.train.len() || sizes.test > full.test.len() {
                return Err(Error::Config(format!(
                    "requested split {}/{} exceeds MNIST {}/{}",
                    sizes.train,
                    sizes.test,
                    full.train.len(),
                    full.test.len()
                )));
            }
            let take_train: Vec<usize> = (0..sizes.train).collect();
            let take_test: Vec<usize> = (0..sizes.test).collect();
            Split {
                train: full.train.select(&take_train),
                test: full.test.select(&take_test),
            }
        }
    };
    match config.subsample {
        None => Ok(split),
        Some(sub) => {
            let seed = derive_seed(config.seed, &[SUBSAMPLE_STREAM]);
            let train_idx = stratified_subsample(&split.train.labels, sub.train, derive_seed(seed, &[0]))?;
            let test_idx = stratified_subsample(&split.test.labels, sub.test, derive_seed(seed, &[1]))?;
            Ok(Split {
                train: split.train.select(&train_idx),
                test: split.test.select(&test_idx),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_population() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }
}
