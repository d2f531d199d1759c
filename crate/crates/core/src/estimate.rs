//! Photon sampling, maximum-likelihood separation estimates and Cramér–Rao
//! attainment experiments for the equal-brightness pair at `±θ`.

use alloc::vec::Vec;

use rand::Rng;

use crate::fisher::{cfi, two_point_probs, FisherError, OutcomeDistribution};
use crate::modes::{ApertureConfig, ModeBasis, ModeError, Scene};
use crate::protocol::{run_protocol_once, PipelineOptions, ProtocolConfig, ProtocolError};
use crate::rng::stream_rng;
use crate::Sign;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Fisher(#[from] FisherError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("at least one photon is required")]
    NoPhotons,
    #[error("at least {min} trials are required, got {got}")]
    TooFewTrials { min: usize, got: usize },
    #[error("invalid search bracket: {0}")]
    InvalidSearch(&'static str),
    #[error("count table has {got} modes, expected {expected}")]
    ModeMismatch { expected: usize, got: usize },
    #[error("the likelihood is zero everywhere in the search bracket")]
    Impossible,
}

/// Photon counts `n_{q±}`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountTable {
    counts: Vec<[u64; 2]>,
}

impl CountTable {
    pub fn zeros(modes: usize) -> Self {
        Self {
            counts: alloc::vec![[0; 2]; modes],
        }
    }

    pub fn from_rows(counts: Vec<[u64; 2]>) -> Self {
        Self { counts }
    }

    pub fn modes(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, q: usize, sign: Sign) -> u64 {
        self.counts[q][sign.index()]
    }

    pub fn record(&mut self, q: usize, sign: Sign) {
        self.counts[q][sign.index()] += 1;
    }

    pub fn rows(&self) -> &[[u64; 2]] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|r| r[0] + r[1]).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(q, r)| Sign::BOTH.into_iter().map(move |s| (q, s, r[s.index()])))
    }

    /// Counts as real weights, for the weighted likelihood.
    pub fn weights(&self) -> OutcomeDistribution {
        OutcomeDistribution::from_rows(self.counts.iter().map(|r| [r[0] as f64, r[1] as f64]).collect())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SamplingMode {
    /// Categorical draws from the analytic outcome law.
    #[default]
    Fast,
    /// Every photon runs through the qubit-level protocol.
    Full,
}

/// Instrument and protocol settings shared by every trial.
#[derive(Clone, Debug)]
pub struct EstimationSetup {
    pub aperture: ApertureConfig,
    pub basis: ModeBasis,
    pub temporal_modes: usize,
    pub epsilon: f64,
    pub options: PipelineOptions,
}

impl EstimationSetup {
    /// Single temporal mode, `ε = 0.01`, default pipeline options.
    pub fn new(aperture: ApertureConfig, basis: ModeBasis) -> Self {
        Self {
            aperture,
            basis,
            temporal_modes: 1,
            epsilon: 0.01,
            options: PipelineOptions::default(),
        }
    }

    pub fn protocol_config(&self, theta: f64) -> Result<ProtocolConfig, EstimateError> {
        let config = ProtocolConfig::new(
            self.aperture,
            self.basis.clone(),
            Scene::two_point(theta)?,
            self.temporal_modes,
            self.epsilon,
        )?;
        Ok(config.with_options(self.options)?)
    }

    pub fn probabilities(&self, theta: f64) -> Result<OutcomeDistribution, EstimateError> {
        Ok(two_point_probs(&self.aperture, &self.basis, theta)?)
    }
}

/// `n` detected photons from the pair at `±theta`.
pub fn sample_photons<R: Rng + ?Sized>(
    setup: &EstimationSetup,
    theta: f64,
    n: u64,
    rng: &mut R,
    mode: SamplingMode,
) -> Result<CountTable, EstimateError> {
    if n == 0 {
        return Err(EstimateError::NoPhotons);
    }
    let mut table = CountTable::zeros(setup.basis.len());
    match mode {
        SamplingMode::Fast => {
            let probs = setup.probabilities(theta)?;
            let outcomes: Vec<(usize, Sign, f64)> = probs.iter().collect();
            let mut cumulative = Vec::with_capacity(outcomes.len());
            let mut acc = 0.0;
            for &(_, _, p) in &outcomes {
                acc += p;
                cumulative.push(acc);
            }
            for _ in 0..n {
                let u = rng.random::<f64>() * acc;
                let i = cumulative.partition_point(|&c| c <= u).min(outcomes.len() - 1);
                table.record(outcomes[i].0, outcomes[i].1);
            }
        }
        SamplingMode::Full => {
            let config = setup.protocol_config(theta)?;
            for _ in 0..n {
                let rec = run_protocol_once(&config, rng)?;
                table.record(rec.q, rec.sign);
            }
        }
    }
    Ok(table)
}

/// `Σ_o n_o log P_o(θ)`; `-∞` when an observed outcome is impossible at `θ`.
pub fn log_likelihood(setup: &EstimationSetup, theta: f64, counts: &CountTable) -> f64 {
    log_likelihood_weighted(setup, theta, &counts.weights())
}

/// [`log_likelihood`] with real-valued weights in place of counts.
pub fn log_likelihood_weighted(setup: &EstimationSetup, theta: f64, weights: &OutcomeDistribution) -> f64 {
    let Ok(probs) = setup.probabilities(theta) else {
        return f64::NEG_INFINITY;
    };
    let mut total = 0.0;
    for ((_, _, w), (_, _, p)) in weights.iter().zip(probs.iter()) {
        if w == 0.0 {
            continue;
        }
        if !(p > 0.0) {
            return f64::NEG_INFINITY;
        }
        total += w * libm::log(p);
    }
    total
}

/// Grid-then-golden-section search over `(0, θ_max]`. Lengths are in units
/// of `σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MleSearch {
    pub theta_max: f64,
    pub grid_points: usize,
    pub tolerance: f64,
}

impl Default for MleSearch {
    fn default() -> Self {
        Self {
            theta_max: 0.5,
            grid_points: 512,
            tolerance: 1e-6,
        }
    }
}

pub fn mle(setup: &EstimationSetup, counts: &CountTable, search: MleSearch) -> Result<f64, EstimateError> {
    check_modes(setup, counts.modes())?;
    mle_weighted(setup, &counts.weights(), search)
}

pub fn mle_weighted(setup: &EstimationSetup, weights: &OutcomeDistribution, search: MleSearch) -> Result<f64, EstimateError> {
    check_modes(setup, weights.modes())?;
    if !(search.theta_max > 0.0 && search.theta_max.is_finite()) {
        return Err(EstimateError::InvalidSearch("theta_max must be positive"));
    }
    if search.grid_points < 2 {
        return Err(EstimateError::InvalidSearch("at least two grid points"));
    }
    if !(search.tolerance > 0.0) {
        return Err(EstimateError::InvalidSearch("tolerance must be positive"));
    }
    let sigma = setup.aperture.sigma();
    let theta_max = search.theta_max * sigma;
    let spacing = theta_max / search.grid_points as f64;
    let ll = |t: f64| log_likelihood_weighted(setup, t, weights);

    let mut best = (0, f64::NEG_INFINITY);
    for i in 1..=search.grid_points {
        let v = ll(spacing * i as f64);
        if v > best.1 {
            best = (i, v);
        }
    }
    if best.1 == f64::NEG_INFINITY {
        return Err(EstimateError::Impossible);
    }
    let grid_theta = spacing * best.0 as f64;
    let lo = spacing * (best.0 - 1) as f64;
    let hi = (spacing * (best.0 + 1) as f64).min(theta_max);
    let (refined, value) = golden_max(&ll, lo, hi, search.tolerance * sigma);
    Ok(if value > best.1 { refined } else { grid_theta })
}

fn check_modes(setup: &EstimationSetup, got: usize) -> Result<(), EstimateError> {
    let expected = setup.basis.len();
    if got != expected {
        return Err(EstimateError::ModeMismatch { expected, got });
    }
    Ok(())
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximiser of `f` on `[a, b]` to absolute tolerance `tol`. Only interior
/// points are evaluated.
fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd { (c, fc) } else { (d, fd) }
}

/// Summary of a Cramér–Rao attainment experiment. Lengths are in the
/// aperture's units.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimationReport {
    pub theta_true: f64,
    pub theta_hat_mean: f64,
    pub sample_variance: f64,
    /// `1/(N·CFI)`.
    pub predicted_variance: f64,
    pub variance_ratio: f64,
    pub cfi: f64,
    pub trials: usize,
    pub photons: u64,
    pub seed: u64,
    pub mode: SamplingMode,
}

/// Smallest trial count for which the sample variance is meaningful.
pub const MIN_TRIALS: usize = 30;

/// Sample `photons` photons on the trial's own stream and estimate `θ`.
pub fn run_trial(
    setup: &EstimationSetup,
    theta_true: f64,
    photons: u64,
    seed: u64,
    trial: u64,
    mode: SamplingMode,
    search: MleSearch,
) -> Result<f64, EstimateError> {
    let mut rng = stream_rng(seed, "estimate", trial);
    let counts = sample_photons(setup, theta_true, photons, &mut rng, mode)?;
    mle(setup, &counts, search)
}

impl EstimationReport {
    /// Aggregates per-trial estimates given in trial order.
    pub fn from_estimates(
        setup: &EstimationSetup,
        theta_true: f64,
        photons: u64,
        seed: u64,
        mode: SamplingMode,
        estimates: &[f64],
    ) -> Result<Self, EstimateError> {
        if estimates.len() < MIN_TRIALS {
            return Err(EstimateError::TooFewTrials {
                min: MIN_TRIALS,
                got: estimates.len(),
            });
        }
        let n = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / n;
        let var = estimates.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0);
        let info = cfi(&setup.aperture, &setup.basis, theta_true)?;
        let predicted = 1.0 / (photons as f64 * info);
        Ok(Self {
            theta_true,
            theta_hat_mean: mean,
            sample_variance: var,
            predicted_variance: predicted,
            variance_ratio: var / predicted,
            cfi: info,
            trials: estimates.len(),
            photons,
            seed,
            mode,
        })
    }
}

/// Serial experiment: trial `t` uses `stream_rng(seed, "estimate", t)`, so any
/// parallel schedule that keeps trial order reproduces it.
pub fn crb_experiment(
    setup: &EstimationSetup,
    theta_true: f64,
    photons: u64,
    trials: usize,
    seed: u64,
    mode: SamplingMode,
    search: MleSearch,
) -> Result<(EstimationReport, Vec<f64>), EstimateError> {
    if trials < MIN_TRIALS {
        return Err(EstimateError::TooFewTrials { min: MIN_TRIALS, got: trials });
    }
    let estimates = (0..trials as u64)
        .map(|t| run_trial(setup, theta_true, photons, seed, t, mode, search))
        .collect::<Result<Vec<_>, _>>()?;
    let report = EstimationReport::from_estimates(setup, theta_true, photons, seed, mode, &estimates)?;
    Ok((report, estimates))
}
