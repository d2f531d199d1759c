use alloc::vec::Vec;

use super::{BitString, SparseState, StateError};
use crate::Sign;

/// Default maximum number of live branches during enumeration (`2^20`).
pub const DEFAULT_BRANCH_CAP: usize = 1 << 20;

/// Branches whose Born probability falls below this are dropped.
const NEGLIGIBLE_PROBABILITY: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Pauli {
    X,
    Z,
}

/// Tensor product of single-qubit Paulis on distinct qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<(usize, Pauli)>);

impl PauliString {
    pub fn new(factors: Vec<(usize, Pauli)>) -> Self {
        PauliString(factors)
    }

    pub fn x(qubit: usize) -> Self {
        PauliString(alloc::vec![(qubit, Pauli::X)])
    }

    pub fn z(qubit: usize) -> Self {
        PauliString(alloc::vec![(qubit, Pauli::Z)])
    }

    /// `X_a X_b`: the parity of a pair in the `X` basis.
    pub fn xx(a: usize, b: usize) -> Self {
        PauliString(alloc::vec![(a, Pauli::X), (b, Pauli::X)])
    }

    pub fn zz(a: usize, b: usize) -> Self {
        PauliString(alloc::vec![(a, Pauli::Z), (b, Pauli::Z)])
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.0
    }

    fn validate(&self, num_qubits: usize) -> Result<(), StateError> {
        if self.0.is_empty() {
            return Err(StateError::EmptyPauliString);
        }
        for (i, &(q, _)) in self.0.iter().enumerate() {
            if q >= num_qubits {
                return Err(StateError::QubitOutOfRange { qubit: q, num_qubits });
            }
            if self.0[..i].iter().any(|&(p, _)| p == q) {
                return Err(StateError::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    /// Phase picked up by `|bits⟩` from the `Z` factors.
    fn sign_of(&self, bits: &BitString) -> f64 {
        let flips = self.0.iter().filter(|&&(q, p)| p == Pauli::Z && bits.get(q)).count();
        if flips % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `P|bits⟩ = sign·|bits'⟩`.
    fn act(&self, bits: &BitString) -> (BitString, f64) {
        let mut out = bits.clone();
        let mut sign = 1.0;
        for &(q, p) in &self.0 {
            match p {
                Pauli::X => out.flip(q),
                Pauli::Z => {
                    if bits.get(q) {
                        sign = -sign
                    }
                }
            }
        }
        (out, sign)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub string: PauliString,
    pub sign: Sign,
}

/// One measurement history with its probability and post-measurement state.
#[derive(Clone, Debug)]
pub struct Branch {
    pub outcomes: Vec<Outcome>,
    pub probability: f64,
    pub state: SparseState,
}

/// Projects onto the `±1` eigenspaces of `string`. Returns the nonzero
/// branches (one or two), `+1` first, each renormalised.
pub fn measure_pauli_string(state: &SparseState, string: &PauliString) -> Result<Vec<Branch>, StateError> {
    string.validate(state.num_qubits())?;
    // P|c⟩ = s(c)|τc⟩ with s(τc) = s(c), so (1 ± P)/2 maps amplitudes to
    // (a_b ± s(b)·a_{τb})/2.
    let tau = |b: &BitString| string.act(b).0;
    let [plus, minus] = state.pairwise(tau, |b, a, partner| {
        let image = partner * string.sign_of(b);
        [(a + image) * 0.5, (a - image) * 0.5]
    });
    let mut branches = Vec::with_capacity(2);
    for (sign, mut post) in [(Sign::Plus, plus), (Sign::Minus, minus)] {
        let probability = post.norm_sqr();
        if probability < NEGLIGIBLE_PROBABILITY || post.is_empty() {
            continue;
        }
        post.normalize()?;
        branches.push(Branch {
            outcomes: alloc::vec![Outcome { string: string.clone(), sign }],
            probability,
            state: post,
        });
    }
    Ok(branches)
}

/// Single-qubit `X` measurement.
pub fn measure_qubit_x(state: &SparseState, qubit: usize) -> Result<Vec<Branch>, StateError> {
    measure_pauli_string(state, &PauliString::x(qubit))
}

pub fn enumerate_branches(state: &SparseState, plan: &[PauliString]) -> Result<Vec<Branch>, StateError> {
    enumerate_branches_with_cap(state, plan, DEFAULT_BRANCH_CAP)
}

/// All nonzero-probability outcome sequences of `plan`, depth first.
pub fn enumerate_branches_with_cap(
    state: &SparseState,
    plan: &[PauliString],
    cap: usize,
) -> Result<Vec<Branch>, StateError> {
    for string in plan {
        string.validate(state.num_qubits())?;
    }
    let mut leaves = Vec::new();
    let mut stack = alloc::vec![(
        0usize,
        Branch {
            outcomes: Vec::new(),
            probability: 1.0,
            state: state.clone(),
        }
    )];
    while let Some((depth, branch)) = stack.pop() {
        if depth == plan.len() {
            leaves.push(branch);
            if leaves.len() > cap {
                return Err(StateError::EnumerationOverflow { cap });
            }
            continue;
        }
        let children = measure_pauli_string(&branch.state, &plan[depth])?;
        // reversed so that `+` is explored (and emitted) first
        for child in children.into_iter().rev() {
            let mut outcomes = branch.outcomes.clone();
            outcomes.extend(child.outcomes);
            stack.push((
                depth + 1,
                Branch {
                    outcomes,
                    probability: branch.probability * child.probability,
                    state: child.state,
                },
            ));
        }
        if stack.len() + leaves.len() > cap {
            return Err(StateError::EnumerationOverflow { cap });
        }
    }
    Ok(leaves)
}

/// Index of the branch selected by a uniform draw `u ∈ [0, 1)`.
pub fn choose_branch(probabilities: impl IntoIterator<Item = f64>, u: f64) -> usize {
    let probabilities: Vec<f64> = probabilities.into_iter().collect();
    let total: f64 = probabilities.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if target < acc {
            return i;
        }
    }
    probabilities.len().saturating_sub(1)
}
