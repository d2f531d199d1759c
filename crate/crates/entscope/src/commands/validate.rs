use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, PI};

use entscope_core::fisher::{cfi, outcome_probs, qfi};
use entscope_core::modes::{build_basis, ApertureConfig, BasisKind, Scene};
use entscope_core::protocol::gadgets::{logical_beamsplitter, teleported_cnot, BellPair, SiteQubit};
use entscope_core::protocol::{
    decode_cz, encode, enumerate_scene, inject_amplitudes, measure_photons, prepare_bell_ancillas, read_flip_pattern, Fault,
    MeasurementMode, PipelineOptions, ProtocolConfig,
};
use entscope_core::rng::stream_rng;
use entscope_core::statevec::{BitString, Gate, RegisterLayout, Site, SparseState};
use entscope_core::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::AppError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:4}  {:<24} max_deviation={:.3e}  tolerance={:.1e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_deviation,
                c.tolerance
            ));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {} failed\n", self.checks.len(), failed));
        out
    }
}

/// Knobs for the validation suite.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ValidateOptions {
    /// Defect injected into every protocol configuration the suite builds.
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

fn check(name: &'static str, max_deviation: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name,
        max_deviation,
        tolerance,
        passed: max_deviation <= tolerance,
    }
}

fn num<E: std::fmt::Display>(e: E) -> AppError {
    AppError::numerical(e)
}

/// Runs the suite. Individual check failures are reported, not returned as
/// errors; errors mean a check could not run at all.
pub fn validate(config: &RunConfig, options: ValidateOptions) -> Result<ValidationReport, AppError> {
    let delta = config.aperture.delta;
    let checks = vec![
        qfi_closed_form(delta)?,
        orthonormality(delta)?,
        enumeration_matrix(delta, options)?,
        pairwise_basis(delta, options)?,
        bell_identities(3, 2)?,
        injection_decode(3, 2, config.seed)?,
        beamsplitter_map(config.seed)?,
        teleported_cnot_check(config.seed)?,
        crb_ordering(delta)?,
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { checks, passed })
}

fn qfi_closed_form(delta: f64) -> Result<CheckResult, AppError> {
    let mut dev: f64 = 0.0;
    for r in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let ap = ApertureConfig::from_ratio(delta, r).map_err(num)?;
        let sigma = 2.0 * PI / delta;
        let want = 4.0 * PI * PI / (3.0 * sigma * sigma) * (3.0 * r * r + 1.0);
        dev = dev.max((qfi(&ap) - want).abs() / want);
    }
    Ok(check("qfi-closed-form", dev, 1e-15))
}

fn orthonormality(delta: f64) -> Result<CheckResult, AppError> {
    let ap = ApertureConfig::from_ratio(delta, 0.0).map_err(num)?;
    let mut dev: f64 = 0.0;
    for kind in [BasisKind::PsfAdapted, BasisKind::GaussianHg] {
        dev = dev.max(build_basis(&ap, 8, kind).map_err(num)?.orthonormality_deviation());
    }
    Ok(check("basis-orthonormality", dev, 1e-8))
}

fn protocol(ap: ApertureConfig, k: usize, scene: Scene, m: usize, options: ValidateOptions) -> Result<ProtocolConfig, AppError> {
    let basis = build_basis(&ap, k, BasisKind::PsfAdapted).map_err(num)?;
    ProtocolConfig::new(ap, basis, scene, m, 0.01)
        .and_then(|c| c.with_options(PipelineOptions { fault: options.fault, ..PipelineOptions::default() }))
        .map_err(num)
}

/// Exhaustive branch enumeration against the analytic law.
fn enumeration_matrix(delta: f64, options: ValidateOptions) -> Result<CheckResult, AppError> {
    let mut dev: f64 = 0.0;
    for r in [0.5, 2.0] {
        let ap = ApertureConfig::from_ratio(delta, r).map_err(num)?;
        for (m, k) in [(1, 1), (1, 2), (1, 3), (3, 1), (3, 2), (3, 3)] {
            for t in [0.13, 0.37] {
                let scene = Scene::two_point(t * ap.sigma()).map_err(num)?;
                let analytic = outcome_probs(&ap, &build_basis(&ap, k, BasisKind::PsfAdapted).map_err(num)?, &scene).map_err(num)?;
                let cfg = protocol(ap, k, scene, m, options)?;
                dev = dev.max(enumerate_scene(&cfg).map_err(num)?.max_abs_diff(&analytic));
            }
        }
    }
    Ok(check("enumerate-vs-analytic", dev, 1e-10))
}

/// `P(±) = {cos², sin²}(βx)` for a single source at `βx ∈ {0, π/3, π/2}`.
fn pairwise_basis(delta: f64, options: ValidateOptions) -> Result<CheckResult, AppError> {
    let ap = ApertureConfig::from_ratio(delta, 2.0).map_err(num)?;
    let mut dev: f64 = 0.0;
    for (phase, plus) in [(0.0, 1.0), (FRAC_PI_3, 0.25), (FRAC_PI_2, 0.0)] {
        let cfg = protocol(ap, 1, Scene::single(phase / ap.beta()).map_err(num)?, 1, options)?;
        let dist = enumerate_scene(&cfg).map_err(num)?;
        dev = dev.max((dist.rows()[0][0] - plus).abs()).max((dist.rows()[0][1] - (1.0 - plus)).abs());
    }
    Ok(check("pairwise-basis", dev, 1e-12))
}

fn bits_with(n: usize, ones: &[usize]) -> BitString {
    let mut b = BitString::zeros(n);
    for &q in ones {
        b.set(q, true);
    }
    b
}

/// Maximum deviation of the three CZ flip identities over every ancilla pair.
pub fn bell_identity_deviation(temporal_modes: usize, spatial_modes: usize) -> Result<f64, AppError> {
    let l = RegisterLayout::new(temporal_modes, spatial_modes);
    let n = l.num_qubits();
    let mut dev: f64 = 0.0;
    for k in 1..=l.memory_bits() {
        for i in 0..spatial_modes {
            let (ma, mb) = (l.memory(Site::A, k, i), l.memory(Site::B, k, i));
            let (c, d) = (l.ancilla(Site::A, k, i), l.ancilla(Site::B, k, i));
            let bell = |mem: &[usize], sign: f64| {
                let mut both = mem.to_vec();
                both.extend([c, d]);
                SparseState::from_entries(
                    n,
                    [
                        (bits_with(n, mem), Complex64::new(FRAC_1_SQRT_2, 0.0)),
                        (bits_with(n, &both), Complex64::new(sign * FRAC_1_SQRT_2, 0.0)),
                    ],
                )
            };
            for (mem, sign) in [(vec![mb], -1.0), (vec![ma], -1.0), (vec![], 1.0)] {
                let out = decode_cz(bell(&mem, 1.0).map_err(num)?, &l).map_err(num)?;
                dev = dev.max(out.max_abs_diff(&bell(&mem, sign).map_err(num)?));
            }
        }
    }
    Ok(dev)
}

fn bell_identities(temporal_modes: usize, spatial_modes: usize) -> Result<CheckResult, AppError> {
    Ok(check("bell-cz-identities", bell_identity_deviation(temporal_modes, spatial_modes)?, 1e-12))
}

/// Number of `(m, q)` injections whose flip pattern decodes to something else.
pub fn injection_decode_failures(temporal_modes: usize, spatial_modes: usize, seed: u64) -> Result<usize, AppError> {
    let l = RegisterLayout::new(temporal_modes, spatial_modes);
    let mut failures = 0;
    for m in 1..=temporal_modes {
        for q in 0..spatial_modes {
            let mut rng = stream_rng(seed, "validate-injection", (m * spatial_modes + q) as u64);
            let mut amps = vec![[Complex64::new(0.0, 0.0); 2]; spatial_modes];
            amps[q] = [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2)];
            let state = encode(inject_amplitudes(&l, m, &amps).map_err(num)?, &l).map_err(num)?;
            let (_, state) = measure_photons(state, &l, m, &mut rng).map_err(num)?;
            let state = decode_cz(prepare_bell_ancillas(state, &l).map_err(num)?, &l).map_err(num)?;
            let (pattern, _) = read_flip_pattern(state, &l, MeasurementMode::Parity, &mut rng).map_err(num)?;
            if (pattern.m, pattern.q) != (m, q) {
                failures += 1;
            }
        }
    }
    Ok(failures)
}

fn injection_decode(temporal_modes: usize, spatial_modes: usize, seed: u64) -> Result<CheckResult, AppError> {
    let failures = injection_decode_failures(temporal_modes, spatial_modes, seed)?;
    Ok(check("injection-decode", failures as f64, 0.0))
}

fn random_amplitude(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

fn beamsplitter_map(seed: u64) -> Result<CheckResult, AppError> {
    let mut rng = stream_rng(seed, "validate-beamsplitter", 0);
    let mut dev: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = (random_amplitude(&mut rng), random_amplitude(&mut rng));
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / norm, b / norm);
        let pair = |x: Complex64, y: Complex64| {
            SparseState::from_entries(2, [(BitString::from_bits(&[true, false]), x), (BitString::from_bits(&[false, true]), y)])
        };
        let start = pair(a, b).map_err(num)?;
        let once = logical_beamsplitter(&start, 0, 1).map_err(num)?;
        let twice = logical_beamsplitter(&once, 0, 1).map_err(num)?;
        let want = pair((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2).map_err(num)?;
        dev = dev.max(once.max_abs_diff(&want)).max(twice.max_abs_diff(&start));
    }
    Ok(check("gadget-beamsplitter", dev, 1e-12))
}

fn teleported_cnot_check(seed: u64) -> Result<CheckResult, AppError> {
    let control = SiteQubit { qubit: 0, site: Site::A };
    let target = SiteQubit { qubit: 1, site: Site::B };
    let pair = BellPair { near: 2, far: 3 };
    let mut rng = stream_rng(seed, "validate-teleport", 0);
    let mut dev: f64 = 0.0;
    for _ in 0..20 {
        let psi: Vec<Complex64> = (0..4).map(|_| random_amplitude(&mut rng)).collect();
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let mut with_pair = Vec::new();
        let mut plain = Vec::new();
        for (idx, a) in psi.iter().enumerate() {
            let (c, t) = (idx & 1 == 1, idx & 2 == 2);
            plain.push((BitString::from_bits(&[c, t, false, false]), a / norm));
            for p in [false, true] {
                with_pair.push((BitString::from_bits(&[c, t, p, p]), a / norm * FRAC_1_SQRT_2));
            }
        }
        let mut direct = SparseState::from_entries(4, plain).map_err(num)?;
        direct.apply(Gate::Cnot { control: 0, target: 1 }).map_err(num)?;
        let state = SparseState::from_entries(4, with_pair).map_err(num)?;
        for branch in teleported_cnot(&state, control, target, pair).map_err(num)? {
            dev = dev.max(branch.state.max_abs_diff(&direct));
        }
    }
    Ok(check("gadget-teleported-cnot", dev, 1e-12))
}

fn crb_ordering(delta: f64) -> Result<CheckResult, AppError> {
    let mut excess: f64 = 0.0;
    for r in [0.0, 2.0, 5.0] {
        let ap = ApertureConfig::from_ratio(delta, r).map_err(num)?;
        for k in [1, 2, 4] {
            let basis = build_basis(&ap, k, BasisKind::PsfAdapted).map_err(num)?;
            for t in [0.05, 0.3, 0.8] {
                let ratio = cfi(&ap, &basis, t * ap.sigma()).map_err(num)? / qfi(&ap);
                excess = excess.max(ratio - 1.0);
            }
        }
    }
    Ok(check("crb-ordering", excess.max(0.0), 1e-6))
}
