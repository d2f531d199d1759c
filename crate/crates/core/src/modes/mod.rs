//! Aperture geometry, the single-aperture point spread function, spatial mode
//! bases and the overlap coefficients that parameterise every outcome
//! probability downstream.
//!
//! Angles (`x`, `θ`) are object-plane coordinates conjugate to the aperture
//! coordinate `u`; a source at `x` picks up the phase `e^{∓iβx}` at the two
//! telescopes located at `∓β`.

mod aperture;
mod basis;
mod overlap;
pub mod quadrature;

pub use aperture::{psf_eval, ApertureConfig, PointSource, Scene};
pub use basis::{build_basis, build_basis_with, BasisKind, ModeBasis, Psf, QuadratureSpec};
pub use overlap::{eta_at, overlaps, OverlapTable};

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    #[error("invalid aperture: {0}")]
    InvalidAperture(&'static str),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("mode count must be at least 1")]
    NoModes,
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(&'static str),
    #[error("mode basis is degenerate at q = {q} (relative residual {residual:e})")]
    BasisDegenerate { q: usize, residual: f64 },
    #[error("source {source_index} at x = {x} has no support in the first {modes} modes")]
    ProjectionDegenerate {
        source_index: usize,
        x: f64,
        modes: usize,
    },
}
