//! Analytic outcome law of the pairwise measurement, its classical Fisher
//! information, the two-point quantum Fisher information and the CFI/QFI
//! chart.

use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

use crate::modes::{build_basis_with, overlaps, ApertureConfig, BasisKind, ModeBasis, ModeError, QuadratureSpec, Scene};
use crate::Sign;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FisherError {
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error("separation must be positive, got {0}")]
    NonPositiveTheta(f64),
    #[error("derivative of P(q={q}, {sign}) is unreliable at theta = {theta}: {reason}")]
    Derivative {
        q: usize,
        sign: Sign,
        theta: f64,
        reason: &'static str,
    },
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),
}

/// Probabilities `P_{q±}`, indexed by spatial mode and sign.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OutcomeDistribution {
    probs: Vec<[f64; 2]>,
}

impl OutcomeDistribution {
    pub fn zeros(modes: usize) -> Self {
        Self { probs: alloc::vec![[0.0; 2]; modes] }
    }

    pub fn from_rows(probs: Vec<[f64; 2]>) -> Self {
        Self { probs }
    }

    pub fn modes(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, q: usize, sign: Sign) -> f64 {
        self.probs[q][sign.index()]
    }

    pub fn add(&mut self, q: usize, sign: Sign, p: f64) {
        self.probs[q][sign.index()] += p;
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.probs
    }

    /// Flat view in `(q, +), (q, -)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .flat_map(|(q, row)| Sign::BOTH.into_iter().map(move |s| (q, s, row[s.index()])))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().map(|r| r[0] + r[1]).sum()
    }

    /// `P(q) = P_{q+} + P_{q-}`.
    pub fn mode_marginal(&self, q: usize) -> f64 {
        self.probs[q][0] + self.probs[q][1]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.modes(), other.modes());
        self.iter()
            .zip(other.iter())
            .map(|((_, _, a), (_, _, b))| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    /// Total-variation distance `½ Σ |p - p'|`.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.modes(), other.modes());
        0.5 * self
            .iter()
            .zip(other.iter())
            .map(|((_, _, a), (_, _, b))| libm::fabs(a - b))
            .sum::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            probs: self.probs.iter().map(|r| [r[0] * factor, r[1] * factor]).collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Self, weight: f64) {
        for (a, b) in self.probs.iter_mut().zip(&other.probs) {
            a[0] += weight * b[0];
            a[1] += weight * b[1];
        }
    }
}

/// `P_{q+} = Σ_s b_s cos²(βx_s) η_q²(x_s)`, `P_{q-}` with `sin²`.
pub fn outcome_probs(aperture: &ApertureConfig, basis: &ModeBasis, scene: &Scene) -> Result<OutcomeDistribution, FisherError> {
    let table = overlaps(basis, scene)?;
    let mut dist = OutcomeDistribution::zeros(basis.len());
    for (src, eta) in scene.sources().iter().zip(table.eta()) {
        let phase = aperture.beta() * src.x;
        let (s, c) = (libm::sin(phase), libm::cos(phase));
        for (q, e) in eta.iter().enumerate() {
            let e2 = e * e;
            dist.add(q, Sign::Plus, src.brightness * c * c * e2);
            dist.add(q, Sign::Minus, src.brightness * s * s * e2);
        }
    }
    Ok(dist)
}

/// `(4π²/3σ²)(3r² + 1)`, the two-point separation QFI per photon.
pub fn qfi(aperture: &ApertureConfig) -> f64 {
    let sigma = aperture.sigma();
    let r = aperture.r();
    4.0 * PI * PI / (3.0 * sigma * sigma) * (3.0 * r * r + 1.0)
}

/// Finite-difference settings for [`cfi_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeSpec {
    /// First-derivative step in units of `σ`; Richardson uses `h` and `h/2`.
    pub step: f64,
    /// Step for the second derivative used at double zeros of `P`.
    pub curvature_step: f64,
}

impl Default for DerivativeSpec {
    fn default() -> Self {
        Self {
            step: 1e-6,
            curvature_step: 1e-3,
        }
    }
}

/// Outcome law of the equal-brightness pair at `±theta`.
pub fn two_point_probs(aperture: &ApertureConfig, basis: &ModeBasis, theta: f64) -> Result<OutcomeDistribution, FisherError> {
    outcome_probs(aperture, basis, &Scene::two_point(theta)?)
}

const ZERO_PROBABILITY: f64 = 1e-14;

/// Per-photon CFI `Σ_o (∂_θ P_o)² / P_o` of the pairwise measurement for the
/// equal-brightness pair at `±theta`.
pub fn cfi(aperture: &ApertureConfig, basis: &ModeBasis, theta: f64) -> Result<f64, FisherError> {
    cfi_with(aperture, basis, theta, DerivativeSpec::default())
}

pub fn cfi_with(aperture: &ApertureConfig, basis: &ModeBasis, theta: f64, spec: DerivativeSpec) -> Result<f64, FisherError> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(FisherError::NonPositiveTheta(theta));
    }
    let sigma = aperture.sigma();
    let p = |t: f64| two_point_probs(aperture, basis, t);
    let center = p(theta)?;
    let central = |h: f64| -> Result<Vec<f64>, FisherError> {
        let (hi, lo) = (p(theta + h)?, p(theta - h)?);
        Ok(hi.iter().zip(lo.iter()).map(|((_, _, a), (_, _, b))| (a - b) / (2.0 * h)).collect())
    };
    let h = spec.step * sigma;
    let (d1, d2) = (central(h)?, central(h / 2.0)?);
    let mut curvature: Option<Vec<f64>> = None;
    let mut total = 0.0;
    for (n, (q, sign, prob)) in center.iter().enumerate() {
        let dp = (4.0 * d2[n] - d1[n]) / 3.0;
        let fail = |reason| FisherError::Derivative { q, sign, theta, reason };
        if !dp.is_finite() {
            return Err(fail("non-finite difference quotient"));
        }
        if prob >= ZERO_PROBABILITY {
            total += dp * dp / prob;
            continue;
        }
        if libm::fabs(dp) * sigma > 1e-7 {
            return Err(fail("probability vanishes while its slope does not"));
        }
        // double zero: (P')²/P → 2P''
        if curvature.is_none() {
            curvature = Some(second_derivative(&p, theta, &center, spec.curvature_step * sigma)?);
        }
        let c = curvature.as_ref().expect("just computed")[n];
        if !c.is_finite() {
            return Err(fail("non-finite curvature"));
        }
        total += 2.0 * c.max(0.0);
    }
    Ok(total)
}

fn second_derivative(
    p: &impl Fn(f64) -> Result<OutcomeDistribution, FisherError>,
    theta: f64,
    center: &OutcomeDistribution,
    h: f64,
) -> Result<Vec<f64>, FisherError> {
    let at = |h: f64| -> Result<Vec<f64>, FisherError> {
        let (hi, lo) = (p(theta + h)?, p(theta - h)?);
        Ok(hi
            .iter()
            .zip(lo.iter())
            .zip(center.iter())
            .map(|(((_, _, a), (_, _, b)), (_, _, c))| (a - 2.0 * c + b) / (h * h))
            .collect())
    };
    let (c1, c2) = (at(h)?, at(h / 2.0)?);
    Ok(c1.iter().zip(&c2).map(|(a, b)| (4.0 * b - a) / 3.0).collect())
}

/// One point of the CFI/QFI chart.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FisherResult {
    pub theta_over_sigma: f64,
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(rename = "K"))]
    pub k: usize,
    pub cfi: f64,
    pub qfi: f64,
    pub ratio: f64,
}

/// CFI, QFI and their ratio at `θ = theta_over_sigma · σ`.
pub fn fisher_point(aperture: &ApertureConfig, basis: &ModeBasis, theta_over_sigma: f64) -> Result<FisherResult, FisherError> {
    let c = cfi(aperture, basis, theta_over_sigma * aperture.sigma())?;
    let q = qfi(aperture);
    Ok(FisherResult {
        theta_over_sigma,
        r: aperture.r(),
        k: basis.len(),
        cfi: c,
        qfi: q,
        ratio: c / q,
    })
}

/// Grid of the CFI/QFI chart.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChartGrid {
    pub theta_over_sigma: Vec<f64>,
    pub r: Vec<f64>,
    pub modes: Vec<usize>,
}

impl ChartGrid {
    /// `steps` evenly spaced values from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
        match steps {
            0 => Vec::new(),
            1 => alloc::vec![min],
            _ => (0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.theta_over_sigma.len() * self.r.len() * self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<(), FisherError> {
        if self.theta_over_sigma.is_empty() {
            return Err(FisherError::EmptyGrid("theta"));
        }
        if self.r.is_empty() {
            return Err(FisherError::EmptyGrid("r"));
        }
        if self.modes.is_empty() {
            return Err(FisherError::EmptyGrid("K"));
        }
        if let Some(&t) = self.theta_over_sigma.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(FisherError::NonPositiveTheta(t));
        }
        if self.r.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(FisherError::Mode(ModeError::InvalidAperture("baseline ratio must be finite and non-negative")));
        }
        if self.modes.contains(&0) {
            return Err(FisherError::Mode(ModeError::NoModes));
        }
        Ok(())
    }

    /// Grid points in chart order: `θ` outer, `r` middle, `K` inner.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.theta_over_sigma.iter().flat_map(move |&t| {
            self.r
                .iter()
                .flat_map(move |&r| self.modes.iter().map(move |&k| (t, r, k)))
        })
    }
}

/// One basis per distinct `K` (bases depend on `δ` only).
pub fn chart_bases(
    delta: f64,
    modes: &[usize],
    kind: BasisKind,
    quadrature: &QuadratureSpec,
) -> Result<Vec<(usize, ModeBasis)>, FisherError> {
    let aperture = ApertureConfig::new(delta, 0.0)?;
    let mut out: Vec<(usize, ModeBasis)> = Vec::new();
    for &k in modes {
        if out.iter().all(|(kk, _)| *kk != k) {
            out.push((k, build_basis_with(&aperture, k, kind, quadrature)?));
        }
    }
    Ok(out)
}

/// The CFI/QFI chart, rows in [`ChartGrid::points`] order.
pub fn ratio_chart(
    delta: f64,
    grid: &ChartGrid,
    kind: BasisKind,
    quadrature: &QuadratureSpec,
) -> Result<Vec<FisherResult>, FisherError> {
    grid.validate()?;
    let bases = chart_bases(delta, &grid.modes, kind, quadrature)?;
    grid.points()
        .map(|(t, r, k)| {
            let basis = &bases.iter().find(|(kk, _)| *kk == k).expect("basis built for every K").1;
            fisher_point(&ApertureConfig::from_ratio(delta, r)?, basis, t)
        })
        .collect()
}
