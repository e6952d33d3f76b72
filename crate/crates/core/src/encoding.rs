//! PCA compression, min-max normalisation and the two Hamiltonian encodings.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingProblem;

/// Qubits on the Digits hardware subgraph.
pub const DIGITS_QUBITS: usize = 8;

/// Canonical 20-coupler graph on 8 qubits: the 4×4 bipartite block followed by
/// the intra-side couplers.
pub const CANONICAL_DIGITS_EDGES: [(usize, usize); 20] = [
    (0, 4), (0, 5), (0, 6), (0, 7),
    (1, 4), (1, 5), (1, 6), (1, 7),
    (2, 4), (2, 5), (2, 6), (2, 7),
    (3, 4), (3, 5), (3, 6), (3, 7),
    (0, 1), (2, 3), (4, 5), (6, 7),
];

/// Relative eigenvalue floor below which a direction counts as null.
const NULL_EIGENVALUE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// `k × d`, row-major, orthonormal rows.
    components: Vec<f64>,
    k: usize,
    d: usize,
    explained_variance: Vec<f64>,
    /// Set when fewer than `k` directions carry variance and the remainder
    /// were completed from the null space.
    rank_deficient: bool,
}

impl PcaModel {
    /// Fits the top-`k` principal axes of row-major `n × d` data.
    pub fn fit(data: &[f64], n: usize, d: usize, k: usize) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::Shape {
                expected: n * d,
                actual: data.len(),
            });
        }
        if !(k >= 1 && n > k && d >= k) {
            return Err(Error::Config(format!("PCA needs n > k ≥ 1 and d ≥ k (n={n}, d={d}, k={k})")));
        }
        let mut mean = vec![0.0; d];
        for row in data.chunks_exact(d) {
            mean.iter_mut().zip(row).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);

        let mut cov = DMatrix::<f64>::zeros(d, d);
        let mut centered = vec![0.0; d];
        for row in data.chunks_exact(d) {
            centered.iter_mut().zip(row).zip(&mean).for_each(|((c, x), m)| *c = x - m);
            for i in 0..d {
                let ci = centered[i];
                if ci == 0.0 {
                    continue;
                }
                // Upper triangle only; mirrored below.
                for j in i..d {
                    cov[(i, j)] += ci * centered[j];
                }
            }
        }
        let denom = (n - 1) as f64;
        for i in 0..d {
            for j in i..d {
                let v = cov[(i, j)] / denom;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }

        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<(usize, usize)> = (0..d)
            .map(|c| {
                let col = eig.eigenvectors.column(c);
                (c, col.iamax())
            })
            .collect();
        // Descending eigenvalue; ties by the coordinate the axis points along.
        order.sort_by(|a, b| {
            eig.eigenvalues[b.0]
                .partial_cmp(&eig.eigenvalues[a.0])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });

        let top = eig.eigenvalues.max().max(0.0);
        let mut components = Vec::with_capacity(k * d);
        let mut explained_variance = Vec::with_capacity(k);
        let mut rank_deficient = false;
        for &(c, pivot) in order.iter().take(k) {
            let col = eig.eigenvectors.column(c);
            let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
            components.extend(col.iter().map(|v| v * sign));
            let lambda = eig.eigenvalues[c].max(0.0);
            if lambda <= NULL_EIGENVALUE_TOL * top.max(f64::MIN_POSITIVE) {
                rank_deficient = true;
            }
            explained_variance.push(lambda);
        }
        Ok(Self {
            mean,
            components,
            k,
            d,
            explained_variance,
            rank_deficient,
        })
    }

    /// `components · (sample − mean)`.
    pub fn transform(&self, sample: &[f64]) -> Result<Vec<f64>> {
        if sample.len() != self.d {
            return Err(Error::Shape {
                expected: self.d,
                actual: sample.len(),
            });
        }
        Ok(self
            .components
            .chunks_exact(self.d)
            .map(|row| row.iter().zip(sample).zip(&self.mean).map(|((w, x), m)| w * (x - m)).sum())
            .collect())
    }

    pub fn transform_rows(&self, data: &[f64]) -> Result<Vec<Vec<f64>>> {
        data.chunks(self.d).map(|row| self.transform(row)).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i * self.d..(i + 1) * self.d]
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank_deficient
    }
}

/// Per-feature affine map of the training range onto `[−1, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Normalizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_fitted(&self) -> bool {
        !self.min.is_empty()
    }

    pub fn fit(&mut self, rows: &[Vec<f64>]) -> Result<()> {
        let first = rows.first().ok_or_else(|| Error::Config("cannot fit normalizer on no rows".into()))?;
        let k = first.len();
        let mut min = vec![f64::INFINITY; k];
        let mut max = vec![f64::NEG_INFINITY; k];
        for row in rows {
            if row.len() != k {
                return Err(Error::Shape {
                    expected: k,
                    actual: row.len(),
                });
            }
            for i in 0..k {
                min[i] = min[i].min(row[i]);
                max[i] = max[i].max(row[i]);
            }
        }
        self.min = min;
        self.max = max;
        Ok(())
    }

    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>> {
        if !self.is_fitted() {
            return Err(Error::NotFitted("normalizer"));
        }
        if row.len() != self.min.len() {
            return Err(Error::Shape {
                expected: self.min.len(),
                actual: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| {
                if hi > lo {
                    (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect())
    }

    pub fn fit_transform(&mut self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.fit(rows)?;
        rows.iter().map(|r| self.transform(r)).collect()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }
}

/// Fitted PCA plus normaliser, as persisted beside experiment outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub pca: PcaModel,
    pub normalizer: Normalizer,
    /// Seed of the split the models were fitted on.
    pub seed: u64,
}

impl Encoder {
    /// Fits both stages on training rows only.
    pub fn fit(train: &[f64], n: usize, d: usize, k: usize, seed: u64) -> Result<Self> {
        let pca = PcaModel::fit(train, n, d, k)?;
        let projections = pca.transform_rows(train)?;
        let mut normalizer = Normalizer::new();
        normalizer.fit(&projections)?;
        Ok(Self { pca, normalizer, seed })
    }

    /// Normalised feature vector `x′ ∈ [−1, 1]^k` for one raw sample.
    pub fn encode(&self, sample: &[f64]) -> Result<Vec<f64>> {
        self.normalizer.transform(&self.pca.transform(sample)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Couplings `J_e = γ·x′_e` on an 8-qubit graph with no longitudinal fields.
pub fn encode_digits(x_prime: &[f64], gamma: f64, edges: &[(usize, usize)]) -> Result<IsingProblem> {
    if x_prime.len() != edges.len() {
        return Err(Error::Encoding(format!(
            "expected {} features for {} couplers, got {}",
            edges.len(),
            edges.len(),
            x_prime.len()
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Encoding(format!("gamma {gamma} outside [0, 1]")));
    }
    let couplings: Vec<f64> = x_prime.iter().map(|x| gamma * x).collect();
    if let Some(j) = couplings.iter().find(|j| j.is_nan() || j.abs() > 1.0) {
        return Err(Error::Encoding(format!("scaled coupling {j} outside [-1, 1]")));
    }
    IsingProblem::fast_anneal(DIGITS_QUBITS, edges.to_vec(), couplings).map_err(|e| Error::Encoding(e.to_string()))
}

/// Nearest-neighbour chain: `J_l = x′_l` for `l = 1..N−1` and `h_l = x′_{N+l−1}`.
pub fn encode_mnist_chain(x_prime: &[f64], n_qubits: usize) -> Result<IsingProblem> {
    if n_qubits == 0 || x_prime.len() != 2 * n_qubits - 1 {
        return Err(Error::Encoding(format!(
            "chain of {n_qubits} qubits needs {} features, got {}",
            (2 * n_qubits).saturating_sub(1),
            x_prime.len()
        )));
    }
    let (couplings, fields) = x_prime.split_at(n_qubits - 1);
    IsingProblem::chain(couplings.to_vec(), fields.to_vec()).map_err(|e| Error::Encoding(e.to_string()))
}

/// Inverse of [`encode_mnist_chain`]: reads `(J, h)` back into a feature vector.
pub fn decode_mnist_chain(problem: &IsingProblem) -> Vec<f64> {
    problem.couplings().iter().chain(problem.fields()).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{diagonal_ground_states, AnnealSettings};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn collinear_data_has_single_axis() {
        let data: Vec<f64> = (-5..=5).flat_map(|t| [t as f64, t as f64]).collect();
        let pca = PcaModel::fit(&data, 11, 2, 1).unwrap();
        let c = pca.component(0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c[0] - r).abs() < 1e-12 && (c[1] - r).abs() < 1e-12);

        let full = PcaModel::fit(&data, 11, 2, 2).unwrap();
        assert!(full.explained_variance()[1].abs() < 1e-12);
        assert!(full.is_rank_deficient());
        assert!(!pca.is_rank_deficient());
    }

    #[test]
    fn isotropic_variances_equal() {
        // ±e_i pairs give covariance proportional to the identity.
        let d = 3;
        let mut data = Vec::new();
        for i in 0..d {
            for sign in [1.0, -1.0] {
                let mut row = vec![0.0; d];
                row[i] = sign;
                data.extend(row);
            }
        }
        let pca = PcaModel::fit(&data, 2 * d, d, d).unwrap();
        let v = pca.explained_variance();
        assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-12));
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = pca.component(i).iter().zip(pca.component(j)).map(|(a, b)| a * b).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn transform_of_mean_is_zero() {
        let data = vec![1.0, 2.0, 3.0, 5.0, 4.0, 1.0, 0.0, 2.0];
        let pca = PcaModel::fit(&data, 4, 2, 1).unwrap();
        let z = pca.transform(pca.mean()).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-14));
        assert!(matches!(pca.transform(&[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn pca_argument_checks() {
        assert!(PcaModel::fit(&[1.0, 2.0], 1, 2, 1).is_err());
        assert!(PcaModel::fit(&[1.0; 6], 3, 2, 3).is_err());
    }

    #[test]
    fn normalizer_endpoints_and_clamp() {
        let mut norm = Normalizer::new();
        assert!(matches!(norm.transform(&[1.0]), Err(Error::NotFitted(_))));
        norm.fit(&[vec![1.0, 7.0], vec![3.0, 7.0]]).unwrap();
        assert_eq!(norm.transform(&[1.0, 7.0]).unwrap(), vec![-1.0, 0.0]);
        assert_eq!(norm.transform(&[3.0, 2.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(norm.transform(&[2.0, 9.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(norm.transform(&[5.0, 7.0]).unwrap()[0], 1.0);
    }

    #[test]
    fn digits_encoding_basics() {
        let zero = encode_digits(&[0.0; 20], 1.0, &CANONICAL_DIGITS_EDGES).unwrap();
        assert!(zero.couplings().iter().all(|&j| j == 0.0));

        let mut x = [0.0; 20];
        x[0] = 1.0;
        let p = encode_digits(&x, 0.25, &CANONICAL_DIGITS_EDGES).unwrap();
        assert_eq!(p.edges()[0], (0, 4));
        assert_eq!(p.couplings()[0], 0.25);
        assert!(p.couplings()[1..].iter().all(|&j| j == 0.0));
        assert!(p.fields().iter().all(|&h| h == 0.0));

        assert!(encode_digits(&[0.0; 19], 1.0, &CANONICAL_DIGITS_EDGES).is_err());
        assert!(encode_digits(&[2.0; 20], 1.0, &CANONICAL_DIGITS_EDGES).is_err());
        assert!(encode_digits(&[0.5; 20], 1.5, &CANONICAL_DIGITS_EDGES).is_err());
    }

    #[test]
    fn canonical_graph_is_valid() {
        let unique: BTreeSet<_> = CANONICAL_DIGITS_EDGES.iter().collect();
        assert_eq!(unique.len(), 20);
        assert!(CANONICAL_DIGITS_EDGES.iter().all(|&(l, m)| l < m && m < 8));
    }

    #[test]
    fn chain_index_map() {
        let p = encode_mnist_chain(&[0.1, 0.2, 0.3, 0.4, 0.5], 3).unwrap();
        assert_eq!(p.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(p.couplings(), &[0.1, 0.2]);
        assert_eq!(p.fields(), &[0.3, 0.4, 0.5]);
        assert!(encode_mnist_chain(&[0.0; 4], 3).is_err());
    }

    #[test]
    fn chain_antiferromagnetic_pair() {
        let p = encode_mnist_chain(&[1.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(diagonal_ground_states(&p), BTreeSet::from([0b01, 0b10]));
    }

    #[test]
    fn zero_chain_is_free() {
        let p = encode_mnist_chain(&[0.0; 7], 4).unwrap();
        let dist = AnnealSettings::linear(3.0).with_dt(0.01).distribution(&p).unwrap();
        assert!(dist.probs().iter().all(|q| (q - 1.0 / 16.0).abs() < 1e-12));
    }

    #[test]
    fn encoder_json_roundtrip() {
        let data: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64).collect();
        let enc = Encoder::fit(&data, 10, 4, 2, 9).unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        enc.save(file.path()).unwrap();
        assert_eq!(Encoder::load(file.path()).unwrap(), enc);
    }

    proptest! {
        #[test]
        fn chain_roundtrip(x in proptest::collection::vec(-1.0f64..=1.0, 1..12usize).prop_filter("odd", |v| v.len() % 2 == 1)) {
            let n = x.len().div_ceil(2);
            let p = encode_mnist_chain(&x, n).unwrap();
            prop_assert_eq!(decode_mnist_chain(&p), x);
        }

        #[test]
        fn encoded_coefficients_bounded(x in proptest::collection::vec(-1.0f64..=1.0, 20), gamma in 0.0f64..=1.0) {
            let p = encode_digits(&x, gamma, &CANONICAL_DIGITS_EDGES).unwrap();
            prop_assert!(p.couplings().iter().all(|j| j.abs() <= gamma));
            prop_assert!(p.fields().iter().all(|&h| h == 0.0));
        }
    }
}
