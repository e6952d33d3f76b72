use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplier turning cycles-per-unit-time schedule data into angular frequency.
pub const DEFAULT_ANGULAR_FACTOR: f64 = std::f64::consts::TAU;

/// Sampled `(s, A(s), B(s))` schedule with piecewise-linear interpolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTable {
    s: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    angular_factor: f64,
}

impl ScheduleTable {
    pub fn new(s: Vec<f64>, a: Vec<f64>, b: Vec<f64>, angular_factor: f64) -> Result<Self> {
        if s.len() < 2 || s.len() != a.len() || s.len() != b.len() {
            return Err(Error::Config(format!(
                "schedule table needs at least two rows of equal length (s={}, A={}, B={})",
                s.len(),
                a.len(),
                b.len()
            )));
        }
        if s[0] != 0.0 || *s.last().unwrap() != 1.0 {
            return Err(Error::Config("schedule table must cover s = 0 and s = 1".into()));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("schedule s-samples must be strictly increasing".into()));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config("schedule values must be finite and nonnegative".into()));
        }
        if !(angular_factor.is_finite() && angular_factor > 0.0) {
            return Err(Error::Config(format!("invalid angular factor {angular_factor}")));
        }
        Ok(Self { s, a, b, angular_factor })
    }

    /// Reads a CSV with header `s,A,B`.
    pub fn from_csv(path: impl AsRef<Path>, angular_factor: f64) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                other => Error::Format {
                    path: path.into(),
                    field: "header".into(),
                    reason: format!("{other:?}"),
                },
            })?;
        let header = reader.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["s", "A", "B"] {
            return Err(Error::Format {
                path: path.into(),
                field: "header".into(),
                reason: format!("expected `s,A,B`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let (mut s, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 2;
            if record.len() != 3 {
                return Err(Error::Format {
                    path: path.into(),
                    field: format!("line {line}"),
                    reason: format!("expected 3 columns, found {}", record.len()),
                });
            }
            let parse = |k: usize| -> Result<f64> {
                record[k].parse::<f64>().map_err(|e| Error::Parse {
                    path: path.into(),
                    line,
                    reason: format!("`{}`: {e}", &record[k]),
                })
            };
            s.push(parse(0)?);
            a.push(parse(1)?);
            b.push(parse(2)?);
        }
        Self::new(s, a, b, angular_factor)
    }

    fn interpolate(&self, values: &[f64], s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let k = self.s.partition_point(|&x| x <= s);
        if k >= self.s.len() {
            return values[values.len() - 1];
        }
        let (i, j) = (k - 1, k);
        let w = (s - self.s[i]) / (self.s[j] - self.s[i]);
        values[i] + w * (values[j] - values[i])
    }
}

/// Annealing schedule `A(s)`, `B(s)` in angular frequency per unit time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnnealSchedule {
    /// `A(s) = 2(1 − s)`, `B(s) = 2s`, i.e. `H = (1 − s)(−Σσ^x) + s·H_problem`.
    Linear,
    Tabulated(ScheduleTable),
}

impl AnnealSchedule {
    pub fn a(&self, s: f64) -> f64 {
        match self {
            AnnealSchedule::Linear => 2.0 * (1.0 - s),
            AnnealSchedule::Tabulated(t) => t.angular_factor * t.interpolate(&t.a, s),
        }
    }

    pub fn b(&self, s: f64) -> f64 {
        match self {
            AnnealSchedule::Linear => 2.0 * s,
            AnnealSchedule::Tabulated(t) => t.angular_factor * t.interpolate(&t.b, s),
        }
    }

    /// Largest `A` and `B` over the schedule, used for step-size bounds.
    pub fn peak_values(&self) -> (f64, f64) {
        match self {
            AnnealSchedule::Linear => (2.0, 2.0),
            AnnealSchedule::Tabulated(t) => {
                let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max) * t.angular_factor;
                (max(&t.a), max(&t.b))
            }
        }
    }
}
