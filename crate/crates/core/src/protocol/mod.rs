//! The entanglement-assisted pairwise measurement, qubit by qubit.
//!
//! One detected photon flows through
//! [`inject_photon`] → [`encode`] → [`measure_photons`] →
//! [`prepare_bell_ancillas`] → [`decode_cz`] → [`read_flip_pattern`] →
//! [`zeta_measure`], producing a [`PhotonRecord`] `(m, q, ±)`. The same
//! pipeline can be sampled ([`run_protocol_once`]) or enumerated exhaustively
//! ([`enumerate_protocol`]); both drive one shared state machine.
//!
//! [`gadgets`] holds the logical-qubit beam splitter, the teleported CNOT and
//! the logical phase used to build general interferometers from the same
//! memories.

mod config;
pub mod gadgets;
mod machine;
mod stages;

pub use config::{Conditioning, Fault, MeasurementMode, PipelineOptions, ProtocolConfig};
pub use machine::{
    enumerate_protocol, enumerate_protocol_leaves, enumerate_scene, run_block, run_protocol_once,
    run_protocol_traced, BlockOutcome, EnumeratedLeaf, RunTrace, StageCounts,
};
pub use stages::{
    decode_cz, encode, f_sign, inject_amplitudes, inject_photon, measure_photons,
    prepare_bell_ancillas, read_flip_pattern, zeta_decision, corrected_sign, zeta_measure, FlipPattern,
    XResultTable,
};

use alloc::string::String;
use thiserror::Error;

use crate::modes::ModeError;
use crate::statevec::StateError;
use crate::Sign;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("invalid protocol configuration: {0}")]
    InvalidConfig(String),
    #[error("qubit {qubit} must start in |0⟩ ({register})")]
    NotVacuum { qubit: usize, register: &'static str },
    #[error("no X result stored for temporal mode {m}, spatial mode {q}")]
    MissingXResult { m: usize, q: usize },
    #[error("decode integrity violated: {0}")]
    DecodeIntegrity(String),
    #[error("sparsity bound exceeded: {entries} entries > {bound}")]
    SparsityBound { entries: usize, bound: u128 },
    #[error("logical qubits ({0}, {1}) are not in the one-excitation subspace")]
    NotOneExcitation(usize, usize),
    #[error("Bell pair ({0}, {1}) is not a fresh φ+")]
    StaleBellPair(usize, usize),
    #[error("teleported CNOT needs control and target at different sites")]
    SameSite,
}

/// Result of one detected photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhotonRecord {
    /// Index of the source that emitted the photon (0-based).
    pub source: usize,
    /// Decoded temporal mode, `1..=M`.
    pub m: usize,
    /// Decoded spatial mode, `0..K`.
    pub q: usize,
    /// Pairwise outcome after the `f` correction.
    pub sign: Sign,
    /// Number of flipped Bell pairs `N_m`.
    pub flipped: usize,
    /// Parity of the photonic `X` results for `(m, q)`.
    pub f: Sign,
}
