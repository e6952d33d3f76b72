//! Brute-force reference propagator: dense Hamiltonians assembled from Kronecker
//! products of Pauli matrices, exponentiated slice by slice via eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::problem::IsingProblem;
use super::schedule::AnnealSchedule;
use super::state::{uniform_state, QuantumState};
use crate::error::{Error, Result};

pub const ORACLE_MAX_QUBITS: usize = 4;
pub const ORACLE_MIN_STEPS: usize = 100_000;

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Single-qubit operator `op` acting on `qubit`, identity elsewhere.
///
/// Qubit `l` is bit `l` of the basis index, so it sits at position `N − 1 − l`
/// in the left-to-right Kronecker product.
fn embed(op: &DMatrix<f64>, qubit: usize, n_qubits: usize) -> DMatrix<f64> {
    let eye = DMatrix::<f64>::identity(2, 2);
    let mut out = DMatrix::<f64>::identity(1, 1);
    for position in (0..n_qubits).rev() {
        out = kron(&out, if position == qubit { op } else { &eye });
    }
    out
}

struct DenseTerms {
    transverse: DMatrix<f64>,
    problem: DMatrix<f64>,
}

fn dense_terms(problem: &IsingProblem) -> DenseTerms {
    let n = problem.n_qubits();
    let dim = 1usize << n;
    let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let zs: Vec<_> = (0..n).map(|l| embed(&z, l, n)).collect();
    let mut transverse = DMatrix::zeros(dim, dim);
    for l in 0..n {
        transverse += embed(&x, l, n);
    }
    let mut h2 = DMatrix::zeros(dim, dim);
    for (&(l, m), &j) in problem.edges().iter().zip(problem.couplings()) {
        h2 += (&zs[l] * &zs[m]) * j;
    }
    for (l, &h) in problem.fields().iter().enumerate() {
        h2 += &zs[l] * h;
    }
    DenseTerms { transverse, problem: h2 }
}

/// Piecewise-constant midpoint propagation over `n_steps` slices of `[0, T]`.
pub fn evolve_oracle(
    problem: &IsingProblem,
    schedule: &AnnealSchedule,
    anneal_time: f64,
    scale: f64,
    n_steps: usize,
) -> Result<QuantumState> {
    if problem.n_qubits() > ORACLE_MAX_QUBITS {
        return Err(Error::Size(format!(
            "oracle supports at most {ORACLE_MAX_QUBITS} qubits, got {}",
            problem.n_qubits()
        )));
    }
    if n_steps < ORACLE_MIN_STEPS {
        return Err(Error::Config(format!("oracle needs at least {ORACLE_MIN_STEPS} slices, got {n_steps}")));
    }
    if !(anneal_time.is_finite() && anneal_time > 0.0) {
        return Err(Error::Config(format!("annealing time {anneal_time} must be positive")));
    }
    let terms = dense_terms(problem);
    let dim = problem.dimension();
    let initial = uniform_state(problem.n_qubits())?;
    let mut psi: DVector<Complex64> = DVector::from_column_slice(initial.amplitudes());
    let dt = anneal_time / n_steps as f64;

    for slice in 0..n_steps {
        let s = (slice as f64 + 0.5) / n_steps as f64;
        let h = (&terms.transverse * (-0.5 * schedule.a(s)) + &terms.problem * (0.5 * schedule.b(s))) * scale;
        let eig = SymmetricEigen::new(h);
        let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let mut coeffs = v.adjoint() * &psi;
        for (c, &lambda) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
            *c *= Complex64::from_polar(1.0, -lambda * dt);
        }
        psi = v * coeffs;
        debug_assert_eq!(psi.len(), dim);
    }
    QuantumState::from_amplitudes(psi.iter().copied().collect())
}
