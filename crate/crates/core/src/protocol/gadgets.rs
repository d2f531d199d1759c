//! Logical-qubit building blocks for general two-site interferometers.

use alloc::vec::Vec;

use super::ProtocolError;
use crate::statevec::{measure_pauli_string, Branch, Gate, PauliString, Site, SparseState};
use crate::Sign;

/// A qubit tagged with the site that holds it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteQubit {
    pub qubit: usize,
    pub site: Site,
}

/// Bell pair shared between two sites: `near` sits with the control, `far`
/// with the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BellPair {
    pub near: usize,
    pub far: usize,
}

fn require_one_excitation(state: &SparseState, e: usize, f: usize) -> Result<(), ProtocolError> {
    state.iter().all(|(bits, _)| bits.get(e) != bits.get(f)).then_some(()).ok_or(ProtocolError::NotOneExcitation(e, f))
}

/// 50-50 beam splitter on the one-excitation subspace of `(e, f)`:
/// `a|10⟩ + b|01⟩ → ((a+b)|10⟩ + (a-b)|01⟩)/√2`.
///
/// CNOT(e→f), H(e), CNOT(e→f) gives `(a+b)/√2` on `|01⟩` and `(b-a)/√2` on
/// `|10⟩`; a `Z` on `e` and an exchange of the two labels bring it to the
/// form above.
pub fn logical_beamsplitter(state: &SparseState, e: usize, f: usize) -> Result<SparseState, ProtocolError> {
    require_one_excitation(state, e, f)?;
    let mut out = state.clone();
    out.apply_all([Gate::Cnot { control: e, target: f }, Gate::H(e), Gate::Cnot { control: e, target: f }, Gate::Z(e)])?;
    out.relabel_swap(e, f)?;
    Ok(out)
}

/// `diag(1, e^{iφ})` on a logical qubit.
pub fn logical_phase(state: &SparseState, qubit: usize, phi: f64) -> Result<SparseState, ProtocolError> {
    let mut out = state.clone();
    out.apply(Gate::Phase(qubit, phi))?;
    Ok(out)
}

fn require_fresh_pair(state: &SparseState, pair: BellPair) -> Result<(), ProtocolError> {
    for string in [PauliString::xx(pair.near, pair.far), PauliString::zz(pair.near, pair.far)] {
        let branches = measure_pauli_string(state, &string)?;
        let fresh = branches.len() == 1 && branches[0].outcomes[0].sign == Sign::Plus;
        if !fresh {
            return Err(ProtocolError::StaleBellPair(pair.near, pair.far));
        }
    }
    Ok(())
}

/// CNOT between qubits at different sites by gate teleportation. Returns the
/// four measurement branches; in each the Pauli corrections have been applied
/// and the consumed pair is reset to `|00⟩`.
///
/// The outcome record holds the `Z` result on `near` followed by the `X`
/// result on `far`.
pub fn teleported_cnot(
    state: &SparseState,
    control: SiteQubit,
    target: SiteQubit,
    pair: BellPair,
) -> Result<Vec<Branch>, ProtocolError> {
    if control.site == target.site {
        return Err(ProtocolError::SameSite);
    }
    require_fresh_pair(state, pair)?;
    let mut start = state.clone();
    start.apply(Gate::Cnot { control: control.qubit, target: pair.near })?;
    let mut out = Vec::with_capacity(4);
    for first in measure_pauli_string(&start, &PauliString::z(pair.near))? {
        let mut s1 = first.state;
        if first.outcomes[0].sign == Sign::Minus {
            s1.apply(Gate::X(pair.far))?;
            s1.apply(Gate::X(pair.near))?;
        }
        s1.apply(Gate::Cnot { control: pair.far, target: target.qubit })?;
        for second in measure_pauli_string(&s1, &PauliString::x(pair.far))? {
            let mut s2 = second.state;
            s2.apply(Gate::H(pair.far))?;
            if second.outcomes[0].sign == Sign::Minus {
                s2.apply(Gate::Z(control.qubit))?;
                s2.apply(Gate::X(pair.far))?;
            }
            let mut outcomes = first.outcomes.clone();
            outcomes.extend(second.outcomes);
            out.push(Branch {
                outcomes,
                probability: first.probability * second.probability,
                state: s2,
            });
        }
    }
    Ok(out)
}

/// The beam splitter between logical qubits held at different sites: both
/// CNOTs are teleported, consuming `pairs[0]` and `pairs[1]`. Returns every
/// measurement branch.
pub fn remote_beamsplitter(
    state: &SparseState,
    e: SiteQubit,
    f: SiteQubit,
    pairs: [BellPair; 2],
) -> Result<Vec<Branch>, ProtocolError> {
    require_one_excitation(state, e.qubit, f.qubit)?;
    let mut out = Vec::new();
    for first in teleported_cnot(state, e, f, pairs[0])? {
        let mut mid = first.state;
        mid.apply(Gate::H(e.qubit))?;
        for second in teleported_cnot(&mid, e, f, pairs[1])? {
            let mut last = second.state;
            last.apply(Gate::Z(e.qubit))?;
            last.relabel_swap(e.qubit, f.qubit)?;
            let mut outcomes = first.outcomes.clone();
            outcomes.extend(second.outcomes);
            out.push(Branch {
                outcomes,
                probability: first.probability * second.probability,
                state: last,
            });
        }
    }
    Ok(out)
}
