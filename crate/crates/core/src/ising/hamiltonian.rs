use nalgebra::DMatrix;
use num_complex::Complex64;

use super::problem::IsingProblem;
use super::schedule::AnnealSchedule;
use crate::error::{Error, Result};

/// `transverse · Σ_l σ^x_l + diag(diagonal)` in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHamiltonian {
    n_qubits: usize,
    transverse: f64,
    diagonal: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn transverse(&self) -> f64 {
        self.transverse
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let dim = self.diagonal.len();
        if psi.len() != dim || out.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                actual: psi.len().min(out.len()),
            });
        }
        apply_ising(self.transverse, 1.0, &self.diagonal, psi, out);
        Ok(())
    }

    /// Matrix element `⟨row|H|col⟩`.
    pub fn element(&self, row: usize, col: usize) -> f64 {
        if row == col {
            self.diagonal[row]
        } else if (row ^ col).count_ones() == 1 {
            self.transverse
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.diagonal.len();
        DMatrix::from_fn(dim, dim, |r, c| self.element(r, c))
    }
}

/// `scale · [−A(s)/2 · Σσ^x + B(s)/2 · H_problem]`.
pub fn hamiltonian_at(
    problem: &IsingProblem,
    schedule: &AnnealSchedule,
    s: f64,
    scale: f64,
) -> Result<SparseHamiltonian> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Config(format!("schedule position {s} outside [0, 1]")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Config(format!("scale {scale} must be positive")));
    }
    let (cx, cz) = schedule_coefficients(schedule, s, scale);
    let mut diagonal = problem.diagonal();
    diagonal.iter_mut().for_each(|d| *d *= cz);
    Ok(SparseHamiltonian {
        n_qubits: problem.n_qubits(),
        transverse: cx,
        diagonal,
    })
}

/// Coefficients `(c_x, c_z)` with `H(s) = c_x Σσ^x + c_z H_problem`.
#[inline]
pub(crate) fn schedule_coefficients(schedule: &AnnealSchedule, s: f64, scale: f64) -> (f64, f64) {
    (-0.5 * scale * schedule.a(s), 0.5 * scale * schedule.b(s))
}

/// `out = cx · Σ_l σ^x_l ψ + cz · (energies ⊙ ψ)`.
#[inline]
pub(crate) fn apply_ising(cx: f64, cz: f64, energies: &[f64], psi: &[Complex64], out: &mut [Complex64]) {
    let n_qubits = psi.len().trailing_zeros() as usize;
    for ((o, &p), &e) in out.iter_mut().zip(psi).zip(energies) {
        *o = p * (cz * e);
    }
    if cx == 0.0 {
        return;
    }
    // σ^x on qubit l swaps the halves of every aligned block of width 2^(l+1).
    for l in 0..n_qubits {
        let half = 1usize << l;
        for (out_block, psi_block) in out.chunks_exact_mut(2 * half).zip(psi.chunks_exact(2 * half)) {
            let (out_lo, out_hi) = out_block.split_at_mut(half);
            let (psi_lo, psi_hi) = psi_block.split_at(half);
            for (o, &p) in out_lo.iter_mut().zip(psi_hi) {
                *o += p * cx;
            }
            for (o, &p) in out_hi.iter_mut().zip(psi_lo) {
                *o += p * cx;
            }
        }
    }
}
