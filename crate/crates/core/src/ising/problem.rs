use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// σ^z eigenvalue of qubit `qubit` in basis state `index`.
#[inline]
pub fn spin(index: usize, qubit: usize) -> f64 {
    if (index >> qubit) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Problem Hamiltonian `Σ J_lm σ^z_l σ^z_m + Σ h_l σ^z_l` over an explicit edge list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingProblem {
    n_qubits: usize,
    edges: Vec<(usize, usize)>,
    couplings: Vec<f64>,
    fields: Vec<f64>,
    fast_anneal: bool,
}

impl IsingProblem {
    pub fn new(
        n_qubits: usize,
        edges: Vec<(usize, usize)>,
        couplings: Vec<f64>,
        fields: Vec<f64>,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidProblem("at least one qubit is required".into()));
        }
        if couplings.len() != edges.len() {
            return Err(Error::InvalidProblem(format!(
                "{} couplings for {} edges",
                couplings.len(),
                edges.len()
            )));
        }
        if fields.len() != n_qubits {
            return Err(Error::InvalidProblem(format!(
                "{} fields for {n_qubits} qubits",
                fields.len()
            )));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for &(l, m) in &edges {
            if l >= m {
                return Err(Error::InvalidProblem(format!("edge ({l}, {m}) must satisfy l < m")));
            }
            if m >= n_qubits {
                return Err(Error::InvalidProblem(format!(
                    "edge ({l}, {m}) out of range for {n_qubits} qubits"
                )));
            }
            if !seen.insert((l, m)) {
                return Err(Error::InvalidProblem(format!("duplicate edge ({l}, {m})")));
            }
        }
        if let Some(v) = couplings.iter().chain(&fields).find(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem(format!("non-finite coefficient {v}")));
        }
        Ok(Self {
            n_qubits,
            edges,
            couplings,
            fields,
            fast_anneal: false,
        })
    }

    /// Couplings only, no longitudinal fields, every `|J| ≤ 1`.
    pub fn fast_anneal(n_qubits: usize, edges: Vec<(usize, usize)>, couplings: Vec<f64>) -> Result<Self> {
        if let Some(j) = couplings.iter().find(|j| j.abs() > 1.0) {
            return Err(Error::InvalidProblem(format!(
                "fast-anneal coupling {j} outside [-1, 1]"
            )));
        }
        let mut problem = Self::new(n_qubits, edges, couplings, vec![0.0; n_qubits])?;
        problem.fast_anneal = true;
        Ok(problem)
    }

    /// Open chain `(l, l+1)` with the given couplings and fields.
    pub fn chain(couplings: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        let n = fields.len();
        let edges = (0..n.saturating_sub(1)).map(|l| (l, l + 1)).collect();
        Self::new(n, edges, couplings, fields)
    }

    /// Problem with every coefficient zero.
    pub fn free(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new(), Vec::new(), vec![0.0; n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn is_fast_anneal(&self) -> bool {
        self.fast_anneal
    }

    pub fn dimension(&self) -> usize {
        1 << self.n_qubits
    }

    /// Same graph with replaced coefficients; drops the fast-anneal marker.
    pub fn with_coefficients(&self, couplings: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        Self::new(self.n_qubits, self.edges.clone(), couplings, fields)
    }

    /// Diagonal energy of basis state `index`.
    pub fn energy(&self, index: usize) -> f64 {
        let pair: f64 = self
            .edges
            .iter()
            .zip(&self.couplings)
            .map(|(&(l, m), j)| j * spin(index, l) * spin(index, m))
            .sum();
        let local: f64 = self
            .fields
            .iter()
            .enumerate()
            .map(|(l, h)| h * spin(index, l))
            .sum();
        pair + local
    }

    /// Diagonal of the problem Hamiltonian over all `2^N` basis states.
    pub fn diagonal(&self) -> Vec<f64> {
        let dim = self.dimension();
        let mut diag = vec![0.0; dim];
        // Accumulate term by term: each σ^z product flips sign on a fixed bit pattern.
        for (&(l, m), &j) in self.edges.iter().zip(&self.couplings) {
            if j == 0.0 {
                continue;
            }
            for (b, d) in diag.iter_mut().enumerate() {
                let parity = ((b >> l) ^ (b >> m)) & 1;
                *d += if parity == 0 { j } else { -j };
            }
        }
        for (l, &h) in self.fields.iter().enumerate() {
            if h == 0.0 {
                continue;
            }
            for (b, d) in diag.iter_mut().enumerate() {
                *d += if (b >> l) & 1 == 0 { h } else { -h };
            }
        }
        diag
    }

    /// Sum of coefficient magnitudes; an upper bound on the problem spectral radius.
    pub fn coefficient_norm(&self) -> f64 {
        self.couplings.iter().chain(&self.fields).map(|v| v.abs()).sum()
    }
}

/// All basis states minimising the diagonal problem energy.
pub fn diagonal_ground_states(problem: &IsingProblem) -> BTreeSet<usize> {
    let diag = problem.diagonal();
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + min.abs());
    diag.iter()
        .enumerate()
        .filter(|(_, &e)| e - min <= tol)
        .map(|(b, _)| b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert!(IsingProblem::new(2, vec![(1, 0)], vec![1.0], vec![0.0; 2]).is_err());
        assert!(IsingProblem::new(2, vec![(0, 2)], vec![1.0], vec![0.0; 2]).is_err());
        assert!(IsingProblem::new(3, vec![(0, 1), (0, 1)], vec![1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(IsingProblem::new(2, vec![(0, 1)], vec![], vec![0.0; 2]).is_err());
        assert!(IsingProblem::new(2, vec![(0, 1)], vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn fast_anneal_bounds_couplings() {
        assert!(IsingProblem::fast_anneal(2, vec![(0, 1)], vec![1.5]).is_err());
        let p = IsingProblem::fast_anneal(2, vec![(0, 1)], vec![-1.0]).unwrap();
        assert!(p.is_fast_anneal());
        assert!(p.fields().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn diagonal_matches_energy() {
        let p = IsingProblem::chain(vec![0.3, -0.7], vec![0.1, -0.2, 0.5]).unwrap();
        let diag = p.diagonal();
        for (b, d) in diag.iter().enumerate() {
            assert!((d - p.energy(b)).abs() < 1e-14);
        }
    }

    #[test]
    fn ferromagnetic_pair_ground_states() {
        let p = IsingProblem::new(2, vec![(0, 1)], vec![-1.0], vec![0.0; 2]).unwrap();
        assert_eq!(diagonal_ground_states(&p), BTreeSet::from([0b00, 0b11]));
    }

    #[test]
    fn single_spin_ground_state() {
        let p = IsingProblem::new(1, vec![], vec![], vec![1.0]).unwrap();
        assert_eq!(diagonal_ground_states(&p), BTreeSet::from([1]));
    }
}
