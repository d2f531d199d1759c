//! Sparse complex state vectors over named qubit registers.
//!
//! A [`SparseState`] maps basis bitstrings to amplitudes and only stores the
//! nonzero ones; single-photon protocol states occupy `O(K)` strings even when
//! the register holds a hundred qubits. Measurements are joint Pauli-string
//! projections returning both eigenvalue branches, which makes exhaustive
//! outcome enumeration ([`enumerate_branches`]) a first-class operation.

mod bits;
mod layout;
mod measure;
mod state;

pub use bits::BitString;
pub use layout::{QubitRole, RegisterLayout, Site};
pub use measure::{
    choose_branch, enumerate_branches, enumerate_branches_with_cap, measure_pauli_string,
    measure_qubit_x, Branch, Outcome, Pauli, PauliString, DEFAULT_BRANCH_CAP,
};
pub use state::{Gate, SparseState, PRUNE_THRESHOLD};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("bitstring has {got} qubits, layout has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("qubit {qubit} is outside a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} appears twice in one operation")]
    DuplicateQubit(usize),
    #[error("cannot measure an empty Pauli string")]
    EmptyPauliString,
    #[error("branch enumeration exceeded the cap of {cap} branches")]
    EnumerationOverflow { cap: usize },
    #[error("state has zero norm")]
    ZeroNorm,
}
