//! Feature standardisation and the softmax perceptron trained with AdaGrad.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{derive_seed, rng_from_seed};

/// Row-major feature matrix with integer class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    classes: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
}

impl Dataset {
    pub fn new(dim: usize, classes: usize, features: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if dim == 0 || classes == 0 {
            return Err(Error::Config("dataset needs a positive dimension and class count".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::Shape {
                expected: dim * labels.len(),
                actual: features.len(),
            });
        }
        if let Some(l) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::Validation(format!("label {l} outside 0..{classes}")));
        }
        Ok(Self {
            dim,
            classes,
            features,
            labels,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, classes: usize) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Shape {
                expected: dim,
                actual: r.len(),
            });
        }
        Self::new(dim, classes, rows.concat(), labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize) -> (&[f64], usize) {
        (self.row(i), self.labels[i])
    }

    /// One-hot target of sample `i`.
    pub fn target(&self, i: usize) -> Vec<f64> {
        let mut t = vec![0.0; self.classes];
        t[self.labels[i]] = 1.0;
        t
    }
}

/// `(u − μ)/σ` per feature with population variance; zero σ maps to one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(dataset: &Dataset) -> Result<Self> {
        let n = dataset.len();
        if n == 0 {
            return Err(Error::Config("cannot standardize an empty dataset".into()));
        }
        let d = dataset.dim();
        let mut mean = vec![0.0; d];
        for i in 0..n {
            mean.iter_mut().zip(dataset.row(i)).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for i in 0..n {
            var.iter_mut()
                .zip(dataset.row(i))
                .zip(&mean)
                .for_each(|((v, x), m)| *v += (x - m) * (x - m));
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn transform(&self, feature: &[f64]) -> Result<Vec<f64>> {
        if self.mean.is_empty() {
            return Err(Error::NotFitted("standardizer"));
        }
        if feature.len() != self.mean.len() {
            return Err(Error::Shape {
                expected: self.mean.len(),
                actual: feature.len(),
            });
        }
        Ok(feature
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }

    pub fn transform_dataset(&self, dataset: &Dataset) -> Result<Dataset> {
        let mut features = Vec::with_capacity(dataset.features.len());
        for i in 0..dataset.len() {
            features.extend(self.transform(dataset.row(i))?);
        }
        Dataset::new(dataset.dim, dataset.classes, features, dataset.labels.clone())
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub epsilon: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 32,
            epochs: 200,
            epsilon: 1e-8,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::Config(format!("epsilon {} must be ≥ 0", self.epsilon)));
        }
        Ok(())
    }
}

/// Weights `W` (`c × dim`, row-major), bias `b`, and AdaGrad accumulators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    classes: usize,
    dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    grad_sq_weights: Vec<f64>,
    grad_sq_bias: Vec<f64>,
    pub hyper: Hyperparameters,
}

/// Gradient of the mean cross-entropy over a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub loss: f64,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ClassifierParams {
    /// Zero-initialised parameters.
    pub fn zeros(classes: usize, dim: usize, hyper: Hyperparameters) -> Self {
        Self {
            classes,
            dim,
            weights: vec![0.0; classes * dim],
            bias: vec![0.0; classes],
            grad_sq_weights: vec![0.0; classes * dim],
            grad_sq_bias: vec![0.0; classes],
            hyper,
        }
    }

    pub fn with_values(classes: usize, dim: usize, weights: Vec<f64>, bias: Vec<f64>, hyper: Hyperparameters) -> Result<Self> {
        if weights.len() != classes * dim || bias.len() != classes {
            return Err(Error::Shape {
                expected: classes * dim + classes,
                actual: weights.len() + bias.len(),
            });
        }
        let mut p = Self::zeros(classes, dim, hyper);
        p.weights = weights;
        p.bias = bias;
        Ok(p)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn grad_sq_weights(&self) -> &[f64] {
        &self.grad_sq_weights
    }

    pub fn grad_sq_bias(&self) -> &[f64] {
        &self.grad_sq_bias
    }

    fn logits_into(&self, u: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let row = &self.weights[c * self.dim..(c + 1) * self.dim];
            *o = self.bias[c] + row.iter().zip(u).map(|(w, x)| w * x).sum::<f64>();
        }
    }

    /// AdaGrad step `θ ← θ − η g / (√G + ε)` with `G` accumulating `g²`.
    pub fn apply_gradient(&mut self, grad: &Gradient) {
        let Hyperparameters { learning_rate: eta, epsilon: eps, .. } = self.hyper;
        let step = |theta: &mut [f64], acc: &mut [f64], g: &[f64]| {
            for ((t, a), &g) in theta.iter_mut().zip(acc.iter_mut()).zip(g) {
                if g == 0.0 {
                    continue;
                }
                *a += g * g;
                *t -= eta * g / (a.sqrt() + eps);
            }
        };
        step(&mut self.weights, &mut self.grad_sq_weights, &grad.weights);
        step(&mut self.bias, &mut self.grad_sq_bias, &grad.bias);
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    z.iter_mut().for_each(|v| *v /= total);
}

/// `Softmax(W·u + b)`.
pub fn forward(params: &ClassifierParams, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != params.dim {
        return Err(Error::Shape {
            expected: params.dim,
            actual: u.len(),
        });
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical {
            step: 0,
            reason: "non-finite classifier input".into(),
        });
    }
    let mut z = vec![0.0; params.classes];
    params.logits_into(u, &mut z);
    softmax_in_place(&mut z);
    Ok(z)
}

/// Mean cross-entropy and its analytic gradient over `indices`.
pub fn loss_and_gradient(params: &ClassifierParams, dataset: &Dataset, indices: &[usize]) -> Gradient {
    let (c, d) = (params.classes, params.dim);
    let mut grad_w = vec![0.0; c * d];
    let mut grad_b = vec![0.0; c];
    let mut probs = vec![0.0; c];
    let mut loss = 0.0;
    for &i in indices {
        let (u, label) = dataset.get(i);
        params.logits_into(u, &mut probs);
        softmax_in_place(&mut probs);
        loss -= probs[label].max(f64::MIN_POSITIVE).ln();
        probs[label] -= 1.0;
        for (k, &delta) in probs.iter().enumerate() {
            if delta == 0.0 {
                continue;
            }
            grad_b[k] += delta;
            let row = &mut grad_w[k * d..(k + 1) * d];
            row.iter_mut().zip(u).for_each(|(g, x)| *g += delta * x);
        }
    }
    let inv = 1.0 / indices.len().max(1) as f64;
    grad_w.iter_mut().for_each(|g| *g *= inv);
    grad_b.iter_mut().for_each(|g| *g *= inv);
    Gradient {
        loss: loss * inv,
        weights: grad_w,
        bias: grad_b,
    }
}

/// Mean cross-entropy over the whole dataset.
pub fn dataset_loss(params: &ClassifierParams, dataset: &Dataset) -> f64 {
    let mut z = vec![0.0; params.classes];
    let mut loss = 0.0;
    for i in 0..dataset.len() {
        let (u, label) = dataset.get(i);
        params.logits_into(u, &mut z);
        softmax_in_place(&mut z);
        loss -= z[label].max(f64::MIN_POSITIVE).ln();
    }
    loss / dataset.len().max(1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean mini-batch cross-entropy of each epoch.
    pub loss_trace: Vec<f64>,
}

/// One shuffled pass over the data; returns the mean batch loss.
pub fn run_epoch(params: &mut ClassifierParams, dataset: &Dataset, seed: u64, epoch: usize) -> Result<f64> {
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(seed, &[epoch as u64])));
    let mut total = 0.0;
    let batches = order.chunks(params.hyper.batch_size);
    let n_batches = batches.len();
    for (b, batch) in batches.enumerate() {
        let grad = loss_and_gradient(params, dataset, batch);
        if !grad.loss.is_finite() {
            return Err(Error::Numerical {
                step: epoch * n_batches + b,
                reason: format!("non-finite loss at epoch {epoch}, batch {b}"),
            });
        }
        total += grad.loss;
        params.apply_gradient(&grad);
    }
    Ok(total / n_batches.max(1) as f64)
}

/// Mini-batch AdaGrad on the cross-entropy loss.
pub fn train(params: &mut ClassifierParams, dataset: &Dataset, seed: u64) -> Result<TrainReport> {
    params.hyper.validate()?;
    if dataset.is_empty() {
        return Err(Error::Config("cannot train on an empty dataset".into()));
    }
    if dataset.dim() != params.dim || dataset.classes() != params.classes {
        return Err(Error::Shape {
            expected: params.dim,
            actual: dataset.dim(),
        });
    }
    let loss_trace = (0..params.hyper.epochs)
        .map(|epoch| run_epoch(params, dataset, seed, epoch))
        .collect::<Result<_>>()?;
    Ok(TrainReport { loss_trace })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
}

impl Evaluation {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn evaluate(params: &ClassifierParams, dataset: &Dataset) -> Result<Evaluation> {
    if dataset.is_empty() {
        return Err(Error::Config("cannot evaluate on an empty dataset".into()));
    }
    let c = params.classes;
    let mut confusion = vec![vec![0u64; c]; c];
    let mut correct = 0usize;
    for i in 0..dataset.len() {
        let (u, label) = dataset.get(i);
        let pred = argmax(&forward(params, u)?);
        confusion[label][pred] += 1;
        correct += usize::from(pred == label);
    }
    Ok(Evaluation {
        accuracy: correct as f64 / dataset.len() as f64,
        confusion,
    })
}

/// Standardise on `train`, fit a fresh zero-initialised model, and score both sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub model: TrainedModel,
}

/// Persisted classifier: parameters, scaler, seed and loss trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub params: ClassifierParams,
    pub standardizer: Standardizer,
    pub seed: u64,
    pub loss_trace: Vec<f64>,
}

impl TrainedModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn fit_and_score(train_set: &Dataset, test_set: &Dataset, hyper: Hyperparameters, seed: u64) -> Result<FitOutcome> {
    let standardizer = Standardizer::fit(train_set)?;
    let train_u = standardizer.transform_dataset(train_set)?;
    let test_u = standardizer.transform_dataset(test_set)?;
    let mut params = ClassifierParams::zeros(train_set.classes(), train_set.dim(), hyper);
    let report = train(&mut params, &train_u, seed)?;
    let train_accuracy = evaluate(&params, &train_u)?.accuracy;
    let test_accuracy = evaluate(&params, &test_u)?.accuracy;
    Ok(FitOutcome {
        train_accuracy,
        test_accuracy,
        model: TrainedModel {
            params,
            standardizer,
            seed,
            loss_trace: report.loss_trace,
        },
    })
}

/// The same classifier pipeline applied directly to PCA features.
pub fn linear_baseline(train_pca: &Dataset, test_pca: &Dataset, hyper: Hyperparameters, seed: u64) -> Result<FitOutcome> {
    fit_and_score(train_pca, test_pca, hyper, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn two_clouds(n_per: usize, seed: u64) -> Dataset {
        let mut rng = rng_from_seed(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2 {
            let centre = if class == 0 { -3.0 } else { 3.0 };
            for _ in 0..n_per {
                rows.push(vec![centre + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
                labels.push(class);
            }
        }
        Dataset::from_rows(&rows, labels, 2).unwrap()
    }

    #[test]
    fn standardizer_two_point_column() {
        let d = Dataset::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0]], vec![0, 0], 1).unwrap();
        let s = Standardizer::fit(&d).unwrap();
        assert_eq!(s.mean(), &[2.0, 5.0]);
        assert_eq!(s.std(), &[1.0, 1.0]);
        assert_eq!(s.transform(&[1.0, 5.0]).unwrap(), vec![-1.0, 0.0]);
        assert_eq!(s.transform(&[3.0, 5.0]).unwrap(), vec![1.0, 0.0]);
        // Test features reuse the training statistics.
        assert_eq!(s.transform(&[6.0, 7.0]).unwrap(), vec![4.0, 2.0]);
        assert!(matches!(Standardizer::default().transform(&[1.0]), Err(Error::NotFitted(_))));
    }

    #[test]
    fn zero_params_are_uniform_and_predict_class_zero() {
        let p = ClassifierParams::zeros(4, 3, Hyperparameters::default());
        let f = forward(&p, &[1.0, -2.0, 0.5]).unwrap();
        assert!(f.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        let d = Dataset::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], vec![2, 3], 4).unwrap();
        let e = evaluate(&p, &d).unwrap();
        assert_eq!(e.confusion[2][0] + e.confusion[3][0], 2);
        assert_eq!(e.total(), 2);
    }

    #[test]
    fn softmax_shift_invariance_and_saturation() {
        let mut a = vec![0.3, -1.2, 2.0];
        let mut b: Vec<f64> = a.iter().map(|v| v + 100.0).collect();
        softmax_in_place(&mut a);
        softmax_in_place(&mut b);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        let mut z = vec![10.0, 0.0, 0.0];
        softmax_in_place(&mut z);
        assert!(z[0] > 0.9999);
    }

    #[test]
    fn forward_rejects_non_finite() {
        let p = ClassifierParams::zeros(2, 2, Hyperparameters::default());
        assert!(matches!(forward(&p, &[f64::NAN, 0.0]), Err(Error::Numerical { .. })));
        assert!(matches!(forward(&p, &[0.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = ClassifierParams::zeros(2, 2, Hyperparameters::default());
        p.weights_mut()[0] = 0.7;
        let before = p.clone();
        p.apply_gradient(&Gradient {
            loss: 0.0,
            weights: vec![0.0; 4],
            bias: vec![0.0; 2],
        });
        assert_eq!(p, before);
    }

    #[test]
    fn first_adagrad_step() {
        let hyper = Hyperparameters {
            learning_rate: 0.1,
            epsilon: 1e-8,
            ..Default::default()
        };
        let mut p = ClassifierParams::zeros(1, 1, hyper);
        p.apply_gradient(&Gradient {
            loss: 0.0,
            weights: vec![1.0],
            bias: vec![0.0],
        });
        assert!((p.weights()[0] + 0.1 / (1.0 + 1e-8)).abs() < 1e-15);
        assert_eq!(p.grad_sq_weights()[0], 1.0);
    }

    #[test]
    fn separable_clouds_are_learned() {
        let data = two_clouds(40, 11);
        let hyper = Hyperparameters {
            learning_rate: 0.1,
            batch_size: 8,
            epochs: 30,
            ..Default::default()
        };
        let mut p = ClassifierParams::zeros(2, 2, hyper);
        let report = train(&mut p, &data, 5).unwrap();
        assert_eq!(evaluate(&p, &data).unwrap().accuracy, 1.0);
        assert!(report.loss_trace.last().unwrap() < report.loss_trace.first().unwrap());
    }

    #[test]
    fn full_loss_non_increasing_for_small_steps() {
        let data = two_clouds(30, 3);
        let hyper = Hyperparameters {
            learning_rate: 0.01,
            batch_size: 60,
            epochs: 1,
            ..Default::default()
        };
        let mut p = ClassifierParams::zeros(2, 2, hyper);
        let mut last = dataset_loss(&p, &data);
        for epoch in 0..40 {
            run_epoch(&mut p, &data, 1, epoch).unwrap();
            let now = dataset_loss(&p, &data);
            assert!(now <= last + 1e-12, "epoch {epoch}: {now} > {last}");
            last = now;
        }
    }

    #[test]
    fn accumulators_nondecreasing() {
        let data = two_clouds(10, 8);
        let hyper = Hyperparameters {
            batch_size: 4,
            epochs: 1,
            ..Default::default()
        };
        let mut p = ClassifierParams::zeros(2, 2, hyper);
        let mut prev = p.grad_sq_weights().to_vec();
        for epoch in 0..5 {
            run_epoch(&mut p, &data, 2, epoch).unwrap();
            assert!(p.grad_sq_weights().iter().zip(&prev).all(|(a, b)| a >= b));
            prev = p.grad_sq_weights().to_vec();
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = two_clouds(20, 4);
        let hyper = Hyperparameters {
            epochs: 5,
            ..Default::default()
        };
        let run = || {
            let mut p = ClassifierParams::zeros(2, 2, hyper);
            let r = train(&mut p, &data, 42).unwrap();
            (p, r)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn empty_evaluation_rejected() {
        let p = ClassifierParams::zeros(2, 2, Hyperparameters::default());
        let empty = Dataset::new(2, 2, vec![], vec![]).unwrap();
        assert!(matches!(evaluate(&p, &empty), Err(Error::Config(_))));
    }

    #[test]
    fn perfect_predictions_score_one() {
        let mut p = ClassifierParams::zeros(2, 2, Hyperparameters::default());
        p.weights_mut().copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        let d = Dataset::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0, 1], 2).unwrap();
        assert_eq!(evaluate(&p, &d).unwrap().accuracy, 1.0);
    }

    #[test]
    fn baseline_is_the_same_pipeline() {
        let train_set = two_clouds(25, 1);
        let test_set = two_clouds(10, 2);
        let hyper = Hyperparameters {
            epochs: 20,
            ..Default::default()
        };
        let a = linear_baseline(&train_set, &test_set, hyper, 9).unwrap();
        let b = fit_and_score(&train_set, &test_set, hyper, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.test_accuracy, 1.0);
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(u in proptest::collection::vec(-10.0f64..10.0, 3), w in proptest::collection::vec(-3.0f64..3.0, 9)) {
            let p = ClassifierParams::with_values(3, 3, w, vec![0.1, -0.2, 0.3], Hyperparameters::default()).unwrap();
            let f = forward(&p, &u).unwrap();
            prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(f.iter().all(|&v| v > 0.0));
        }
    }
}
