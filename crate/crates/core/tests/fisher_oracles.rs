use std::f64::consts::{FRAC_PI_4, PI};

use entscope_core::fisher::{
    cfi, cfi_with, fisher_point, outcome_probs, qfi, ratio_chart, two_point_probs, ChartGrid, DerivativeSpec,
    FisherError,
};
use entscope_core::modes::{build_basis, ApertureConfig, BasisKind, QuadratureSpec, Scene};
use entscope_core::protocol::{run_protocol_once, ProtocolConfig};
use entscope_core::rng::stream_rng;
use entscope_core::Sign;

fn aperture(r: f64) -> ApertureConfig {
    ApertureConfig::from_ratio(1.0, r).unwrap()
}

#[test]
fn qfi_closed_form() {
    for r in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let ap = aperture(r);
        let s = ap.sigma();
        let want = 4.0 * PI * PI / (3.0 * s * s) * (3.0 * r * r + 1.0);
        assert_eq!(qfi(&ap), want);
    }
    let s = aperture(0.0).sigma();
    assert!((qfi(&aperture(0.0)) - 4.0 * PI * PI / (3.0 * s * s)).abs() < 1e-12);
    assert!((qfi(&aperture(1.0)) - 16.0 * PI * PI / (3.0 * s * s)).abs() < 1e-12);
    let wide = ApertureConfig::from_ratio(0.5, 2.0).unwrap();
    assert!((qfi(&wide) * 4.0 - qfi(&aperture(2.0))).abs() < 1e-12);
}

#[test]
fn outcome_probs_examples() {
    let ap = ApertureConfig::new(1.0, 0.0).unwrap();
    let basis = build_basis(&ap, 3, BasisKind::PsfAdapted).unwrap();
    let scene = Scene::two_point(0.3 * ap.sigma()).unwrap();
    let dist = outcome_probs(&ap, &basis, &scene).unwrap();
    let table = entscope_core::modes::overlaps(&basis, &scene).unwrap();
    for q in 0..3 {
        assert_eq!(dist.get(q, Sign::Minus), 0.0);
        let want: f64 = table.eta().iter().map(|e| 0.5 * e[q] * e[q]).sum();
        assert!((dist.get(q, Sign::Plus) - want).abs() < 1e-15);
    }

    let ap = aperture(2.0);
    let basis = build_basis(&ap, 1, BasisKind::PsfAdapted).unwrap();
    let dist = outcome_probs(&ap, &basis, &Scene::single(FRAC_PI_4 / ap.beta()).unwrap()).unwrap();
    assert!((dist.get(0, Sign::Plus) - 0.5).abs() < 1e-14);
    assert!((dist.get(0, Sign::Minus) - 0.5).abs() < 1e-14);
}

#[test]
fn normalization_and_decomposition() {
    for (r, k, t) in [(0.5, 2, 0.1), (2.0, 4, 0.37), (5.0, 8, 0.9), (1.0, 3, 1.7)] {
        let ap = aperture(r);
        let basis = build_basis(&ap, k, BasisKind::PsfAdapted).unwrap();
        let scene = Scene::two_point_weighted(t * ap.sigma(), 0.3).unwrap();
        let dist = outcome_probs(&ap, &basis, &scene).unwrap();
        assert!((dist.total() - 1.0).abs() < 1e-12);
        let table = entscope_core::modes::overlaps(&basis, &scene).unwrap();
        for q in 0..k {
            let marginal: f64 = scene.sources().iter().zip(table.eta()).map(|(s, e)| s.brightness * e[q] * e[q]).sum();
            assert!((dist.mode_marginal(q) - marginal).abs() < 1e-12);
        }
        assert!(dist.iter().all(|(_, _, p)| p >= 0.0));
    }
}

/// Two-outcome law `P± = {cos², sin²}(βθ)` has `Σ(P′)²/P = 4β²` for every θ.
#[test]
fn single_mode_matches_hand_derivation() {
    for r in [0.0, 0.5, 2.0] {
        let ap = aperture(r);
        let basis = build_basis(&ap, 1, BasisKind::PsfAdapted).unwrap();
        for t in [0.003, 0.05, 0.2, 0.7] {
            let got = cfi(&ap, &basis, t * ap.sigma()).unwrap();
            let want = 4.0 * ap.beta() * ap.beta();
            assert!((got - want).abs() <= 1e-6 * want.max(1.0), "r={r} t={t}: {got} vs {want}");
        }
    }
    let ap = aperture(0.5);
    let point = fisher_point(&ap, &build_basis(&ap, 1, BasisKind::PsfAdapted).unwrap(), 0.2).unwrap();
    assert!((point.ratio - 0.75 / 1.75).abs() < 1e-6);
}

/// `η_q² ∝ y^{2q}/q!` with `y = θ/2w` for Hermite–Gauss modes of the matched
/// Gaussian (`w = √3/δ`); both sources share `η_q²` and `cos²(βθ)`.
fn hg_cfi_analytic(ap: &ApertureConfig, k: usize, theta: f64) -> f64 {
    let w = 3f64.sqrt() / ap.delta();
    let y = theta / (2.0 * w);
    let dy = 1.0 / (2.0 * w);
    let mut g = Vec::new();
    let mut dg = Vec::new();
    let mut fact = 1.0;
    for q in 0..k {
        if q > 0 {
            fact *= q as f64;
        }
        g.push(y.powi(2 * q as i32) / fact);
        dg.push(if q == 0 { 0.0 } else { 2.0 * q as f64 * y.powi(2 * q as i32 - 1) / fact * dy });
    }
    let sum: f64 = g.iter().sum();
    let dsum: f64 = dg.iter().sum();
    let b = ap.beta();
    let (c2, s2) = ((b * theta).cos().powi(2), (b * theta).sin().powi(2));
    let dc2 = -b * (2.0 * b * theta).sin();
    let mut total = 0.0;
    for q in 0..k {
        let e = g[q] / sum;
        let de = (dg[q] * sum - g[q] * dsum) / (sum * sum);
        for (p, dp) in [(c2 * e, dc2 * e + c2 * de), (s2 * e, -dc2 * e + s2 * de)] {
            if p > 1e-300 {
                total += dp * dp / p;
            }
        }
    }
    total
}

#[test]
fn gaussian_hg_cfi_matches_analytic_derivatives() {
    for (r, k) in [(0.5, 2), (2.0, 2), (1.0, 4), (5.0, 3)] {
        let ap = aperture(r);
        let basis = build_basis(&ap, k, BasisKind::GaussianHg).unwrap();
        for t in [0.02, 0.1, 0.35] {
            let theta = t * ap.sigma();
            let got = cfi(&ap, &basis, theta).unwrap();
            let want = hg_cfi_analytic(&ap, k, theta);
            assert!((got - want).abs() <= 1e-6 * want, "r={r} K={k} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn binary_sorter_attains_qfi_sub_rayleigh() {
    let ap = aperture(2.0);
    let basis = build_basis(&ap, 2, BasisKind::PsfAdapted).unwrap();
    let theta = 0.01 * ap.sigma();
    let coarse = cfi_with(&ap, &basis, theta, DerivativeSpec { step: 1e-6, ..Default::default() }).unwrap();
    let fine = cfi_with(&ap, &basis, theta, DerivativeSpec { step: 5e-7, ..Default::default() }).unwrap();
    assert!((coarse - fine).abs() <= 1e-4 * fine);
    let ratio = coarse / qfi(&ap);
    assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio}");
    assert!(ratio <= 1.0 + 1e-6);
}

#[test]
fn cfi_bounded_by_qfi_and_monotone_in_k() {
    for r in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let ap = aperture(r);
        let bases: Vec<_> = (1..=8).map(|k| build_basis(&ap, k, BasisKind::PsfAdapted).unwrap()).collect();
        for t in [0.01, 0.1, 0.3, 0.6, 0.9] {
            let theta = t * ap.sigma();
            let mut prev = 0.0;
            for basis in &bases {
                let c = cfi(&ap, basis, theta).unwrap();
                assert!(c <= qfi(&ap) * (1.0 + 1e-6), "r={r} t={t} K={}", basis.len());
                assert!(c >= prev - 1e-8, "r={r} t={t} K={}: {c} < {prev}", basis.len());
                prev = c;
            }
        }
    }
}

/// Past the first null the renormalised K-mode law conditions on the photon
/// staying in the sorted modes, and its per-photon CFI is no longer bounded
/// by the full-field QFI.
#[test]
fn truncated_law_exceeds_qfi_past_first_null() {
    let ap = aperture(0.5);
    let basis = build_basis(&ap, 2, BasisKind::PsfAdapted).unwrap();
    let below = fisher_point(&ap, &basis, 0.98).unwrap();
    let beyond = fisher_point(&ap, &basis, 1.4).unwrap();
    assert!(below.ratio <= 1.0 + 1e-6);
    assert!(beyond.ratio > 1.0);
}

#[test]
fn double_zero_at_first_null_is_finite() {
    // At θ = σ the PSF overlap vanishes quadratically in θ.
    let ap = aperture(1.0);
    let basis = build_basis(&ap, 2, BasisKind::PsfAdapted).unwrap();
    let c = cfi(&ap, &basis, ap.sigma()).unwrap();
    assert!(c.is_finite() && c >= 0.0 && c <= qfi(&ap) * (1.0 + 1e-6));
    let nearby = cfi(&ap, &basis, ap.sigma() * (1.0 + 1e-3)).unwrap();
    assert!((c - nearby).abs() < 0.05 * nearby.max(1e-3), "{c} vs {nearby}");
}

#[test]
fn invalid_theta_rejected() {
    let ap = aperture(1.0);
    let basis = build_basis(&ap, 2, BasisKind::PsfAdapted).unwrap();
    assert!(matches!(cfi(&ap, &basis, 0.0), Err(FisherError::NonPositiveTheta(_))));
    assert!(matches!(cfi(&ap, &basis, f64::NAN), Err(FisherError::NonPositiveTheta(_))));
}

#[test]
fn chart_is_stable_under_quadrature_halving() {
    let grid = ChartGrid {
        theta_over_sigma: ChartGrid::linspace(0.02, 0.92, 6),
        r: vec![0.5, 2.0, 5.0],
        modes: vec![1, 2, 4, 8],
    };
    let full = ratio_chart(1.0, &grid, BasisKind::PsfAdapted, &QuadratureSpec::default()).unwrap();
    let half = ratio_chart(1.0, &grid, BasisKind::PsfAdapted, &QuadratureSpec::default().halved()).unwrap();
    assert_eq!(full.len(), grid.len());
    for (a, b) in full.iter().zip(&half) {
        assert!((a.ratio - b.ratio).abs() <= 1e-3, "{a:?} vs {b:?}");
        assert!(a.ratio >= 0.0 && a.ratio <= 1.0 + 1e-6);
    }
    let order: Vec<_> = full.iter().map(|p| (p.theta_over_sigma, p.r, p.k)).collect();
    assert_eq!(order, grid.points().collect::<Vec<_>>());
}

fn monte_carlo_check(samples: usize) {
    let ap = aperture(1.0);
    let basis = build_basis(&ap, 4, BasisKind::PsfAdapted).unwrap();
    let theta = 0.2 * ap.sigma();
    let analytic = two_point_probs(&ap, &basis, theta).unwrap();
    let cfg = ProtocolConfig::new(ap, basis, Scene::two_point(theta).unwrap(), 1, 0.01).unwrap();
    let mut counts = [[0usize; 2]; 4];
    let mut rng = stream_rng(77, "fisher-monte-carlo", 0);
    for _ in 0..samples {
        let rec = run_protocol_once(&cfg, &mut rng).unwrap();
        counts[rec.q][rec.sign.index()] += 1;
    }
    for (q, sign, p) in analytic.iter() {
        let freq = counts[q][sign.index()] as f64 / samples as f64;
        let se = (p * (1.0 - p) / samples as f64).sqrt().max(1.0 / samples as f64);
        assert!((freq - p).abs() <= 4.0 * se, "q={q} {sign}: {freq} vs {p} (se {se})");
    }
}

#[test]
fn outcome_probs_match_protocol_sampling() {
    monte_carlo_check(20_000);
}

#[test]
#[ignore = "10^7 protocol runs; slow"]
fn outcome_probs_match_protocol_sampling_full() {
    monte_carlo_check(10_000_000);
}
