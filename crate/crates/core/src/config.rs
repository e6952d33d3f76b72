use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::{CANONICAL_DIGITS_EDGES, DIGITS_QUBITS};
use crate::error::{Error, Result};
use crate::ising::{AnnealSchedule, ScheduleTable, DEFAULT_ANGULAR_FACTOR, MAX_QUBITS};
use crate::learning::Hyperparameters;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Digits,
    Mnist,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Digits => "digits",
            DatasetKind::Mnist => "mnist",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSpec {
    Linear,
    Tabulated {
        path: PathBuf,
        #[serde(default = "default_angular_factor")]
        angular_factor: f64,
    },
}

fn default_angular_factor() -> f64 {
    DEFAULT_ANGULAR_FACTOR
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<AnnealSchedule> {
        match self {
            ScheduleSpec::Linear => Ok(AnnealSchedule::Linear),
            ScheduleSpec::Tabulated { path, angular_factor } => {
                Ok(AnnealSchedule::Tabulated(ScheduleTable::from_csv(path, *angular_factor)?))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub test: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub amplitudes: Vec<f64>,
    pub realizations: usize,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            amplitudes: vec![0.1],
            realizations: 100,
        }
    }
}

/// Distribution-matching scan settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LtSpec {
    /// CSV of reference distributions: `sample_index,p0,p1,…`; synthesised when absent.
    pub reference_path: Option<PathBuf>,
    /// Time at which synthetic references are generated.
    pub reference_time: f64,
    pub reference_shots: u64,
    /// Number of training images scanned.
    pub images: usize,
    pub times: Vec<f64>,
}

impl Default for LtSpec {
    fn default() -> Self {
        Self {
            reference_path: None,
            reference_time: 2.0,
            reference_shots: 10_000,
            images: 100,
            times: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
        }
    }
}

/// One experiment, read from a single JSON document. Every field but the
/// dataset path has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    pub digits_path: Option<PathBuf>,
    pub mnist_dir: Option<PathBuf>,
    pub n_qubits: Vec<usize>,
    /// Overrides the canonical Digits coupler graph.
    pub edges: Option<Vec<(usize, usize)>>,
    pub schedule: ScheduleSpec,
    pub anneal_times: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Shots per image; `null` uses the exact distribution.
    pub shots: Vec<Option<u64>>,
    pub noise: NoiseSpec,
    pub trainer: Hyperparameters,
    pub repetitions: usize,
    pub seed: u64,
    pub split: Option<SplitSizes>,
    pub subsample: Option<SplitSizes>,
    pub dt_target: Option<f64>,
    pub scale: f64,
    pub lt: LtSpec,
    pub apr_alpha: f64,
    pub output_dir: PathBuf,
    pub threads: Option<usize>,
    pub cache: bool,
    pub save_params: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetKind::Digits,
            digits_path: None,
            mnist_dir: None,
            n_qubits: vec![DIGITS_QUBITS],
            edges: None,
            schedule: ScheduleSpec::Linear,
            anneal_times: vec![1.0],
            gammas: vec![1.0],
            shots: vec![Some(1000)],
            noise: NoiseSpec::default(),
            trainer: Hyperparameters::default(),
            repetitions: 10,
            seed: 0,
            split: None,
            subsample: None,
            dt_target: None,
            scale: 1.0,
            lt: LtSpec::default(),
            apr_alpha: 0.4,
            output_dir: PathBuf::from("results"),
            threads: None,
            cache: true,
            save_params: true,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    pub fn digits_edges(&self) -> Vec<(usize, usize)> {
        self.edges.clone().unwrap_or_else(|| CANONICAL_DIGITS_EDGES.to_vec())
    }

    /// PCA dimension feeding an `n_qubits` register.
    pub fn pca_dim(&self, n_qubits: usize) -> usize {
        match self.dataset {
            DatasetKind::Digits => self.digits_edges().len(),
            DatasetKind::Mnist => 2 * n_qubits - 1,
        }
    }

    pub fn split_sizes(&self) -> SplitSizes {
        self.split.unwrap_or(match self.dataset {
            DatasetKind::Digits => SplitSizes { train: 1347, test: 450 },
            DatasetKind::Mnist => SplitSizes { train: 60_000, test: 10_000 },
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_qubits.is_empty() || self.anneal_times.is_empty() || self.gammas.is_empty() || self.shots.is_empty() {
            return fail("n_qubits, anneal_times, gammas and shots must be nonempty".into());
        }
        match self.dataset {
            DatasetKind::Digits => {
                if self.digits_path.is_none() {
                    return fail("digits dataset requires digits_path".into());
                }
                if self.n_qubits != [DIGITS_QUBITS] {
                    return fail(format!("digits runs use exactly {DIGITS_QUBITS} qubits"));
                }
                let edges = self.digits_edges();
                if edges.iter().any(|&(l, m)| l >= m || m >= DIGITS_QUBITS) {
                    return fail("digits edges must satisfy l < m < 8".into());
                }
            }
            DatasetKind::Mnist => {
                if self.mnist_dir.is_none() {
                    return fail("mnist dataset requires mnist_dir".into());
                }
                if self.edges.is_some() {
                    return fail("custom edges apply to the digits graph only".into());
                }
            }
        }
        if let Some(&n) = self.n_qubits.iter().find(|&&n| n == 0 || n > MAX_QUBITS) {
            return fail(format!("register size {n} outside 1..={MAX_QUBITS}"));
        }
        if let Some(t) = self.anneal_times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return fail(format!("annealing time {t} must be positive"));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return fail(format!("gamma {g} outside [0, 1]"));
        }
        if self.shots.contains(&Some(0)) {
            return fail("shot counts must be positive (use null for exact distributions)".into());
        }
        if self.noise.realizations == 0 || self.noise.amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return fail("noise needs ≥ 1 realization and nonnegative amplitudes".into());
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1".into());
        }
        if let Some(dt) = self.dt_target {
            if !(dt.is_finite() && dt > 0.0) {
                return fail(format!("dt_target {dt} must be positive"));
            }
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return fail(format!("scale {} must be positive", self.scale));
        }
        self.trainer.validate()
    }

    /// Stable digest of every field that influences results.
    pub fn hash(&self) -> String {
        let mut canonical = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = canonical.as_object_mut() {
            for key in ["output_dir", "threads", "cache", "save_params"] {
                map.remove(key);
            }
        }
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
