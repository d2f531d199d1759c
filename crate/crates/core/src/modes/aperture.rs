use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::ModeError;

/// Geometry of the two-telescope array: two apertures of length `delta`
/// centred at `∓beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ApertureConfig {
    delta: f64,
    beta: f64,
}

impl ApertureConfig {
    pub fn new(delta: f64, beta: f64) -> Result<Self, ModeError> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(ModeError::InvalidAperture("delta must be finite and > 0"));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(ModeError::InvalidAperture("beta must be finite and >= 0"));
        }
        Ok(Self { delta, beta })
    }

    /// Aperture from its length and the baseline ratio `r = 2β/δ`.
    pub fn from_ratio(delta: f64, r: f64) -> Result<Self, ModeError> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(ModeError::InvalidAperture("r must be finite and >= 0"));
        }
        Self::new(delta, r * delta / 2.0)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Single-telescope Rayleigh angle `2π/δ`.
    pub fn sigma(&self) -> f64 {
        2.0 * PI / self.delta
    }

    /// Baseline ratio `2β/δ`.
    pub fn r(&self) -> f64 {
        2.0 * self.beta / self.delta
    }

    pub fn with_ratio(&self, r: f64) -> Result<Self, ModeError> {
        Self::from_ratio(self.delta, r)
    }

    pub fn psf(&self, x: f64) -> f64 {
        psf_eval(self, x)
    }
}

/// L2-normalised sinc PSF `sqrt(δ/2π)·sin(δx/2)/(δx/2)`.
pub fn psf_eval(aperture: &ApertureConfig, x: f64) -> f64 {
    let delta = aperture.delta;
    libm::sqrt(delta / (2.0 * PI)) * sinc(delta * x / 2.0)
}

pub(crate) fn sinc(u: f64) -> f64 {
    if libm::fabs(u) < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        libm::sin(u) / u
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointSource {
    /// Object-plane angle.
    pub x: f64,
    /// Relative brightness; brightnesses of a scene sum to one.
    pub brightness: f64,
}

/// A scene of weak incoherent point sources.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scene {
    sources: Vec<PointSource>,
}

impl Scene {
    pub fn new(sources: Vec<PointSource>) -> Result<Self, ModeError> {
        if sources.is_empty() {
            return Err(ModeError::InvalidScene("scene has no sources".into()));
        }
        let mut total = 0.0;
        for (s, src) in sources.iter().enumerate() {
            if !src.x.is_finite() {
                return Err(ModeError::InvalidScene(format!("source {s} position is not finite")));
            }
            if !(src.brightness.is_finite() && src.brightness > 0.0) {
                return Err(ModeError::InvalidScene(format!(
                    "source {s} brightness {} is not positive",
                    src.brightness
                )));
            }
            total += src.brightness;
        }
        if libm::fabs(total - 1.0) > 1e-12 {
            return Err(ModeError::InvalidScene(format!("brightnesses sum to {total}, not 1")));
        }
        Ok(Self { sources })
    }

    pub fn single(x: f64) -> Result<Self, ModeError> {
        Self::new(alloc::vec![PointSource { x, brightness: 1.0 }])
    }

    /// Two equally bright sources at `±theta`.
    pub fn two_point(theta: f64) -> Result<Self, ModeError> {
        Self::two_point_weighted(theta, 0.5)
    }

    /// Sources at `-theta` (brightness `b_minus`) and `+theta` (`1 - b_minus`).
    pub fn two_point_weighted(theta: f64, b_minus: f64) -> Result<Self, ModeError> {
        Self::new(alloc::vec![
            PointSource { x: -theta, brightness: b_minus },
            PointSource { x: theta, brightness: 1.0 - b_minus },
        ])
    }

    pub fn sources(&self) -> &[PointSource] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }
}
