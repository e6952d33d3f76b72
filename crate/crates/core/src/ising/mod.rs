//! Transverse-field Ising dynamics on small qubit registers.
//!
//! Basis index `b` encodes qubit `l` (0-based) in bit `l` of `b`. A cleared
//! bit is the σ^z = +1 eigenstate `|0⟩`, a set bit is σ^z = −1.

mod evolve;
mod hamiltonian;
mod oracle;
mod problem;
mod schedule;
mod state;

pub use evolve::{default_dt, evolve, AnnealSettings, Evolution};
pub use hamiltonian::{hamiltonian_at, SparseHamiltonian};
pub use oracle::{evolve_oracle, ORACLE_MAX_QUBITS, ORACLE_MIN_STEPS};
pub use problem::{diagonal_ground_states, spin, IsingProblem};
pub use schedule::{AnnealSchedule, ScheduleTable, DEFAULT_ANGULAR_FACTOR};
pub use state::{output_distribution, uniform_state, DistSource, ProbDist, QuantumState, MAX_QUBITS};
