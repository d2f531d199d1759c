use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::quadrature::{self, Rule};
use super::{ApertureConfig, ModeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BasisKind {
    /// Gram–Schmidt on the sinc PSF and its derivatives `{ψ, ψ′, ψ″, …}`.
    PsfAdapted,
    /// Hermite–Gauss modes of a Gaussian PSF with the same `∫|ψ′|²` as the
    /// sinc PSF of the aperture. Closed-form cross-check path.
    GaussianHg,
}

/// The single-aperture PSF a basis is adapted to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psf {
    Sinc { delta: f64 },
    /// `(2πw²)^{-1/4} exp(-x²/4w²)`: `|ψ|²` is a normal density of std `width`.
    Gaussian { width: f64 },
}

impl Psf {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Psf::Sinc { delta } => {
                libm::sqrt(delta / (2.0 * PI)) * super::aperture::sinc(delta * x / 2.0)
            }
            Psf::Gaussian { width } => gaussian_psf(width, x),
        }
    }
}

fn gaussian_psf(width: f64, x: f64) -> f64 {
    libm::pow(2.0 * PI * width * width, -0.25) * libm::exp(-x * x / (4.0 * width * width))
}

/// Quadrature knobs.
///
/// The sinc basis is integrated in the pupil domain, where every function is
/// supported on `[-δ/2, δ/2]`: `pupil_nodes` Gauss–Legendre points integrate
/// the polynomial inner products exactly, and the overlap integrals converge
/// exponentially while `pupil_nodes ≫ δ|x|/2`. Gaussian bases are integrated
/// in the image domain with a composite rule over `|x| ≤ image_half_width·w`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    pub pupil_nodes: usize,
    pub image_half_width: f64,
    pub image_panels: usize,
    pub panel_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            pupil_nodes: 96,
            image_half_width: 24.0,
            image_panels: 96,
            panel_order: 16,
        }
    }
}

impl QuadratureSpec {
    /// Halves every resolution knob; used for refinement checks.
    pub fn halved(&self) -> Self {
        Self {
            pupil_nodes: (self.pupil_nodes / 2).max(1),
            image_half_width: self.image_half_width,
            image_panels: (self.image_panels / 2).max(1),
            panel_order: self.panel_order,
        }
    }

    fn validate(&self) -> Result<(), ModeError> {
        if self.pupil_nodes == 0 || self.image_panels == 0 || self.panel_order == 0 {
            return Err(ModeError::InvalidQuadrature("node counts must be positive"));
        }
        if !(self.image_half_width.is_finite() && self.image_half_width > 0.0) {
            return Err(ModeError::InvalidQuadrature("image half width must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    /// Samples are pupil-plane amplitudes `φ̃(u)`.
    Pupil,
    /// Samples are image-plane amplitudes `φ(x)`.
    Image,
}

/// `K` orthonormal spatial modes sampled on a quadrature grid. Mode 0 is the
/// normalised PSF.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    kind: BasisKind,
    psf: Psf,
    domain: Domain,
    rule: Rule,
    modes: Vec<Vec<Complex64>>,
}

pub fn build_basis(aperture: &ApertureConfig, k: usize, kind: BasisKind) -> Result<ModeBasis, ModeError> {
    build_basis_with(aperture, k, kind, &QuadratureSpec::default())
}

pub fn build_basis_with(
    aperture: &ApertureConfig,
    k: usize,
    kind: BasisKind,
    spec: &QuadratureSpec,
) -> Result<ModeBasis, ModeError> {
    if k == 0 {
        return Err(ModeError::NoModes);
    }
    spec.validate()?;
    match kind {
        BasisKind::PsfAdapted => psf_adapted(aperture.delta(), k, spec),
        BasisKind::GaussianHg => hermite_gauss(aperture.delta(), k, spec),
    }
}

fn inner(rule: &Rule, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    rule.weights
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&w, (x, y))| x.conj() * y * w)
        .sum()
}

fn psf_adapted(delta: f64, k: usize, spec: &QuadratureSpec) -> Result<ModeBasis, ModeError> {
    // The n-th PSF derivative is (iu)^n ψ̃(u) in the pupil; the positive factor
    // (δ/2)^n does not change the Gram–Schmidt output, so the inputs are
    // (i t)^n ψ̃ with t = 2u/δ ∈ [-1, 1].
    let rule = quadrature::mapped(spec.pupil_nodes, -delta / 2.0, delta / 2.0);
    let amplitude = 1.0 / libm::sqrt(delta);
    let mut modes: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for q in 0..k {
        let mut v: Vec<Complex64> = rule
            .nodes
            .iter()
            .map(|&u| {
                let t = 2.0 * u / delta;
                Complex64::i().powu(q as u32) * libm::pow(t, q as f64) * amplitude
            })
            .collect();
        let input_norm = libm::sqrt(inner(&rule, &v, &v).re);
        // modified Gram–Schmidt, run twice
        for _pass in 0..2 {
            for phi in &modes {
                let c = inner(&rule, phi, &v);
                for (vi, pi) in v.iter_mut().zip(phi) {
                    *vi -= c * pi;
                }
            }
        }
        let norm = libm::sqrt(inner(&rule, &v, &v).re);
        let residual = norm / input_norm;
        if !(residual >= 1e-10) {
            return Err(ModeError::BasisDegenerate { q, residual });
        }
        for vi in &mut v {
            *vi /= norm;
        }
        modes.push(v);
    }
    Ok(ModeBasis {
        kind: BasisKind::PsfAdapted,
        psf: Psf::Sinc { delta },
        domain: Domain::Pupil,
        rule,
        modes,
    })
}

/// Width of the Gaussian PSF whose `∫|ψ′|² = δ²/12` matches the sinc PSF.
pub(crate) fn matched_gaussian_width(delta: f64) -> f64 {
    libm::sqrt(3.0) / delta
}

/// Normalised probabilists' Hermite functions `He_n(y)/sqrt(n!)`.
fn hermite_normalized(k: usize, y: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(k);
    h.push(1.0);
    if k > 1 {
        h.push(y);
    }
    for n in 1..k.saturating_sub(1) {
        let nf = n as f64;
        let next = (y * h[n] - libm::sqrt(nf) * h[n - 1]) / libm::sqrt(nf + 1.0);
        h.push(next);
    }
    h
}

fn hermite_gauss(delta: f64, k: usize, spec: &QuadratureSpec) -> Result<ModeBasis, ModeError> {
    let width = matched_gaussian_width(delta);
    let half = spec.image_half_width * width;
    let rule = quadrature::composite(spec.panel_order, spec.image_panels, -half, half);
    let mut modes = alloc::vec![Vec::with_capacity(rule.len()); k];
    for &x in &rule.nodes {
        let envelope = gaussian_psf(width, x);
        for (q, h) in hermite_normalized(k, x / width).into_iter().enumerate() {
            modes[q].push(Complex64::new(envelope * h, 0.0));
        }
    }
    Ok(ModeBasis {
        kind: BasisKind::GaussianHg,
        psf: Psf::Gaussian { width },
        domain: Domain::Image,
        rule,
        modes,
    })
}

impl ModeBasis {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Number of modes `K`.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn psf(&self) -> Psf {
        self.psf
    }

    /// Number of quadrature points each mode is sampled on.
    pub fn grid_len(&self) -> usize {
        self.rule.len()
    }

    /// `⟨φ_i, φ_j⟩` on the quadrature grid.
    pub fn gram_matrix(&self) -> Vec<Vec<Complex64>> {
        self.modes
            .iter()
            .map(|a| self.modes.iter().map(|b| inner(&self.rule, a, b)).collect())
            .collect()
    }

    /// `max_{i,j} |⟨φ_i, φ_j⟩ - δ_ij|`.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.gram_matrix().iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// Image-plane mode function `φ_q(x)`.
    pub fn mode_value(&self, q: usize, x: f64) -> Complex64 {
        match self.domain {
            Domain::Pupil => {
                let sum: Complex64 = self
                    .rule
                    .nodes
                    .iter()
                    .zip(&self.rule.weights)
                    .zip(&self.modes[q])
                    .map(|((&u, &w), phi)| phi * Complex64::from_polar(w, u * x))
                    .sum();
                sum / libm::sqrt(2.0 * PI)
            }
            Domain::Image => {
                let Psf::Gaussian { width } = self.psf else {
                    unreachable!("image-domain bases are Gaussian")
                };
                let h = hermite_normalized(q + 1, x / width)[q];
                Complex64::new(gaussian_psf(width, x) * h, 0.0)
            }
        }
    }

    /// Overlap `Γ_q(x_s) = ∫ φ_q*(x) ψ(x - x_s) dx` for every mode.
    pub fn gammas(&self, x_s: f64) -> Vec<f64> {
        match self.domain {
            Domain::Pupil => {
                let Psf::Sinc { delta } = self.psf else {
                    unreachable!("pupil-domain bases are sinc")
                };
                let amplitude = 1.0 / libm::sqrt(delta);
                // ψ(x - x_s) ↔ ψ̃(u) e^{-iux_s}
                let shifted: Vec<Complex64> = self
                    .rule
                    .nodes
                    .iter()
                    .map(|&u| Complex64::from_polar(amplitude, -u * x_s))
                    .collect();
                self.modes
                    .iter()
                    .map(|phi| inner(&self.rule, phi, &shifted).re)
                    .collect()
            }
            Domain::Image => {
                let shifted: Vec<Complex64> = self
                    .rule
                    .nodes
                    .iter()
                    .map(|&x| Complex64::new(self.psf.eval(x - x_s), 0.0))
                    .collect();
                self.modes
                    .iter()
                    .map(|phi| inner(&self.rule, phi, &shifted).re)
                    .collect()
            }
        }
    }
}
