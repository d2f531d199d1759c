//! Simulation and estimation core for entanglement-assisted two-telescope
//! interferometry.
//!
//! Light from a scene of weak point sources is collected by two telescopes,
//! sorted into `K` spatial modes at each site, loaded into quantum memories
//! with a logarithmic time-bin encoding and finally measured in a pairwise
//! symmetric/antisymmetric basis with the help of pre-shared Bell pairs. The
//! crate is organised bottom-up:
//!
//! - [`modes`]: aperture geometry, the sinc point spread function, spatial
//!   mode bases and the overlap coefficients `Γ_q(x)` / `η_q(x)`.
//! - [`statevec`]: a sparse state-vector engine over named qubit registers,
//!   with Pauli-string measurements and exact branch enumeration.
//! - [`protocol`]: the memory-assisted measurement pipeline, stage by stage,
//!   plus the logical beam-splitter, teleported CNOT and phase gadgets.
//! - [`fisher`]: analytic outcome probabilities, classical and quantum Fisher
//!   information, and the CFI/QFI chart.
//! - [`estimate`]: photon sampling, maximum-likelihood separation estimates
//!   and Cramér–Rao attainment experiments.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, configuration and
//! the command line live in the `entscope` companion crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod estimate;
pub mod fisher;
pub mod modes;
pub mod protocol;
pub mod rng;
pub mod statevec;

pub use num_complex::Complex64;

/// Outcome of a two-valued measurement: `+1` or `-1` eigenvalue, `ζ+` or `ζ-`,
/// `|+⟩` or `|-⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sign {
    #[cfg_attr(feature = "serde", serde(rename = "+"))]
    Plus,
    #[cfg_attr(feature = "serde", serde(rename = "-"))]
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn from_eigenvalue(value: i8) -> Self {
        if value >= 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn eigenvalue(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// Index used by tables laid out as `[+, -]`.
    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Product of two signs (`+·- = -`).
    pub fn times(self, other: Sign) -> Self {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl core::fmt::Display for Sign {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}
