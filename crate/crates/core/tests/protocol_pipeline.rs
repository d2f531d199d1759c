use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3};

use entscope_core::fisher::{outcome_probs, OutcomeDistribution};
use entscope_core::modes::{build_basis, eta_at, ApertureConfig, BasisKind, Scene};
use entscope_core::protocol::*;
use entscope_core::rng::{rng_from_seed, stream_rng};
use entscope_core::statevec::{measure_pauli_string, BitString, PauliString, RegisterLayout, Site, SparseState};
use entscope_core::{Complex64, Sign};
use rand::Rng;

fn config(m: usize, k: usize, r: f64, scene: impl FnOnce(f64) -> Scene) -> ProtocolConfig {
    let ap = ApertureConfig::from_ratio(1.0, r).unwrap();
    let basis = build_basis(&ap, k, BasisKind::PsfAdapted).unwrap();
    let scene = scene(ap.sigma());
    ProtocolConfig::new(ap, basis, scene, m, 0.01).unwrap()
}

fn bits_with(n: usize, ones: &[usize]) -> BitString {
    let mut b = BitString::zeros(n);
    for &q in ones {
        b.set(q, true);
    }
    b
}

/// Runs the stages by hand up to the flip readout.
fn through_decode_cz(cfg: &ProtocolConfig, s: usize, m: usize, seed: u64) -> (XResultTable, SparseState) {
    let layout = cfg.layout();
    let mut rng = rng_from_seed(seed);
    let state = encode(inject_photon(cfg, s, m).unwrap(), layout).unwrap();
    let (table, state) = measure_photons(state, layout, m, &mut rng).unwrap();
    let state = decode_cz(prepare_bell_ancillas(state, layout).unwrap(), layout).unwrap();
    (table, state)
}

#[test]
fn single_mode_injection_amplitudes() {
    let cfg = config(1, 1, 2.0, |s| Scene::single(0.1 * s).unwrap());
    let l = cfg.layout();
    let state = inject_photon(&cfg, 0, 1).unwrap();
    let phase = cfg.aperture().beta() * 0.1 * cfg.aperture().sigma();
    let a = state.amplitude(&bits_with(l.num_qubits(), &[l.photonic(Site::A, 1, 0)]));
    let b = state.amplitude(&bits_with(l.num_qubits(), &[l.photonic(Site::B, 1, 0)]));
    assert!((a - Complex64::from_polar(FRAC_1_SQRT_2, -phase)).norm() < 1e-12);
    assert!((b - Complex64::from_polar(FRAC_1_SQRT_2, phase)).norm() < 1e-12);

    let cfg = config(1, 1, 0.0, |s| Scene::single(0.1 * s).unwrap());
    let state = inject_photon(&cfg, 0, 1).unwrap();
    for (_, amp) in state.iter() {
        assert!((amp - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn multimode_injection_matches_overlaps() {
    let cfg = config(3, 3, 1.0, |s| Scene::single(0.2 * s).unwrap());
    let l = cfg.layout();
    let state = inject_photon(&cfg, 0, 2).unwrap();
    assert_eq!(state.len(), 6);
    assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    let eta = eta_at(cfg.basis(), 0.2 * cfg.aperture().sigma()).unwrap();
    let phase = cfg.aperture().beta() * 0.2 * cfg.aperture().sigma();
    for (q, e) in eta.iter().enumerate() {
        let a = state.amplitude(&bits_with(l.num_qubits(), &[l.photonic(Site::A, 2, q)]));
        assert!((a - Complex64::from_polar(e * FRAC_1_SQRT_2, -phase)).norm() < 1e-12);
    }
}

#[test]
fn encode_writes_binary_time_bin() {
    let l = RegisterLayout::new(7, 3);
    let n = l.num_qubits();
    let photon = l.photonic(Site::A, 5, 1);
    let state = SparseState::from_entries(n, [(bits_with(n, &[photon]), Complex64::new(1.0, 0.0))]).unwrap();
    let encoded = encode(state, &l).unwrap();
    let expected = bits_with(n, &[photon, l.memory(Site::A, 1, 1), l.memory(Site::A, 3, 1)]);
    assert_eq!(encoded.entries(), vec![(expected, Complex64::new(1.0, 0.0))]);

    let photon = l.photonic(Site::B, 1, 2);
    let state = SparseState::from_entries(n, [(bits_with(n, &[photon]), Complex64::new(1.0, 0.0))]).unwrap();
    let encoded = encode(state, &l).unwrap();
    assert_eq!(encoded.entries()[0].0, bits_with(n, &[photon, l.memory(Site::B, 1, 2)]));
}

#[test]
fn encode_rejects_excited_memory() {
    let l = RegisterLayout::new(3, 1);
    let n = l.num_qubits();
    let state = SparseState::from_entries(n, [(bits_with(n, &[l.memory(Site::B, 2, 0)]), Complex64::new(1.0, 0.0))]).unwrap();
    assert!(matches!(encode(state, &l), Err(ProtocolError::NotVacuum { register: "memory", .. })));
}

/// Photon–memory state built term by term: every `(site, j, i)` excitation
/// is accompanied by the binary digits of `j` in register `(site, ·, i)`.
#[test]
fn encoded_superposition_matches_term_by_term_construction() {
    let l = RegisterLayout::new(3, 2);
    let n = l.num_qubits();
    let mut rng = rng_from_seed(11);
    let mut input = Vec::new();
    let mut expected = Vec::new();
    for site in Site::BOTH {
        for j in 1..=3 {
            for i in 0..2 {
                let a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                let photon = l.photonic(site, j, i);
                input.push((bits_with(n, &[photon]), a));
                let mut ones = vec![photon];
                ones.extend((1..=l.memory_bits()).filter(|&k| (j >> (k - 1)) & 1 == 1).map(|k| l.memory(site, k, i)));
                expected.push((bits_with(n, &ones), a));
            }
        }
    }
    let encoded = encode(SparseState::from_entries(n, input).unwrap(), &l).unwrap();
    let expected = SparseState::from_entries(n, expected).unwrap();
    assert!(encoded.max_abs_diff(&expected) < 1e-15);
}

#[test]
fn f_sign_bookkeeping() {
    let mut table = XResultTable::new(2, 2);
    table.record(Site::A, 0, Sign::Plus);
    table.record(Site::B, 0, Sign::Plus);
    table.record(Site::A, 1, Sign::Plus);
    table.record(Site::B, 1, Sign::Minus);
    assert_eq!(f_sign(&table, 2, 0).unwrap(), Sign::Plus);
    assert_eq!(f_sign(&table, 2, 1).unwrap(), Sign::Minus);
    assert!(table.is_complete());
    assert_eq!(f_sign(&table, 1, 0), Err(ProtocolError::MissingXResult { m: 1, q: 0 }));
    let partial = XResultTable::new(1, 1);
    assert_eq!(f_sign(&partial, 1, 0), Err(ProtocolError::MissingXResult { m: 1, q: 0 }));
}

/// After the photonic measurement the memory holds
/// `Σ_q η_q s_B,q (f_q e^{-iβx}|Ā: m,q⟩ + e^{iβx}|B̄: m,q⟩)/√2`.
#[test]
fn measured_memory_state_carries_f() {
    let cfg = config(3, 2, 2.0, |s| Scene::single(0.13 * s).unwrap());
    let l = cfg.layout();
    let n = l.num_qubits();
    let x = 0.13 * cfg.aperture().sigma();
    let phase = cfg.aperture().beta() * x;
    let eta = eta_at(cfg.basis(), x).unwrap();
    let m = 3;
    for seed in 0..16 {
        let mut rng = rng_from_seed(seed);
        let state = encode(inject_photon(&cfg, 0, m).unwrap(), l).unwrap();
        let (table, state) = measure_photons(state, l, m, &mut rng).unwrap();
        assert!(table.is_complete());
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        for q in l.temporal_support(m) {
            assert!(state.is_vacuum(q));
        }
        for q in 0..2 {
            let f = f_sign(&table, m, q).unwrap();
            let s_b = f64::from(table.get(Site::B, q).unwrap().eigenvalue());
            let mem = |site| bits_with(n, &(1..=2).map(|k| l.memory(site, k, q)).collect::<Vec<_>>());
            let a = state.amplitude(&mem(Site::A));
            let b = state.amplitude(&mem(Site::B));
            let f = f64::from(f.eigenvalue());
            assert!((a - Complex64::from_polar(s_b * f * eta[q] * FRAC_1_SQRT_2, -phase)).norm() < 1e-12);
            assert!((b - Complex64::from_polar(s_b * eta[q] * FRAC_1_SQRT_2, phase)).norm() < 1e-12);
        }
    }
}

#[test]
fn bell_preparation() {
    let l = RegisterLayout::new(1, 1);
    let state = prepare_bell_ancillas(SparseState::zero(l.num_qubits()), &l).unwrap();
    assert_eq!(state.len(), 2);
    for (_, a) in state.iter() {
        assert!((a - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    let l = RegisterLayout::new(3, 2);
    assert_eq!(l.memory_bits() * l.spatial_modes(), 4);
    let state = prepare_bell_ancillas(SparseState::zero(l.num_qubits()), &l).unwrap();
    assert_eq!(state.len(), 16);
    for (_, a) in state.iter() {
        assert!((a.norm() - 0.25).abs() < 1e-15);
    }
    for k in 1..=2 {
        for i in 0..2 {
            let br = measure_pauli_string(&state, &PauliString::xx(l.ancilla(Site::A, k, i), l.ancilla(Site::B, k, i))).unwrap();
            assert_eq!(br.len(), 1);
            assert_eq!(br[0].outcomes[0].sign, Sign::Plus);
            assert!((br[0].probability - 1.0).abs() < 1e-12);
        }
    }
    assert!(matches!(
        prepare_bell_ancillas(state, &l),
        Err(ProtocolError::NotVacuum { register: "ancilla", .. })
    ));
}

#[test]
fn cz_flip_identities() {
    let l = RegisterLayout::new(1, 1);
    let n = l.num_qubits();
    let (ma, mb) = (l.memory(Site::A, 1, 0), l.memory(Site::B, 1, 0));
    let (c, d) = (l.ancilla(Site::A, 1, 0), l.ancilla(Site::B, 1, 0));
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
        .unwrap()
    };
    for (mem, expected_sign) in [(vec![mb], -1.0), (vec![ma], -1.0), (vec![], 1.0)] {
        let start = bell(&mem, 1.0);
        let out = decode_cz(start, &l).unwrap();
        assert!(out.max_abs_diff(&bell(&mem, expected_sign)) < 1e-12, "memory {mem:?}");
    }
}

#[test]
fn flip_pattern_decodes_time_bin_and_mode() {
    let l = RegisterLayout::new(7, 3);
    let amps = [
        [Complex64::new(0.0, 0.0); 2],
        [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
        [Complex64::new(0.0, 0.0); 2],
    ];
    let mut rng = rng_from_seed(5);
    let state = encode(inject_amplitudes(&l, 5, &amps).unwrap(), &l).unwrap();
    let (_, state) = measure_photons(state, &l, 5, &mut rng).unwrap();
    let state = decode_cz(prepare_bell_ancillas(state, &l).unwrap(), &l).unwrap();
    for mode in [MeasurementMode::Parity, MeasurementMode::Individual] {
        let (pattern, after) = read_flip_pattern(state.clone(), &l, mode, &mut rng).unwrap();
        assert_eq!((pattern.m, pattern.q, pattern.flipped.clone()), (5, 1, vec![1, 3]));
        assert_eq!(pattern.n_m(), 2);
        for (k, i) in (1..=3).flat_map(|k| (0..3).map(move |i| (k, i))) {
            assert!(after.is_vacuum(l.ancilla(Site::A, k, i)) && after.is_vacuum(l.ancilla(Site::B, k, i)));
        }
    }
}

#[test]
fn missing_excitation_is_a_decode_error() {
    let l = RegisterLayout::new(3, 2);
    let state = decode_cz(prepare_bell_ancillas(SparseState::zero(l.num_qubits()), &l).unwrap(), &l).unwrap();
    let err = read_flip_pattern(state, &l, MeasurementMode::Parity, &mut rng_from_seed(1)).unwrap_err();
    assert!(matches!(err, ProtocolError::DecodeIntegrity(_)), "{err}");
}

#[test]
fn decision_rule() {
    assert_eq!(zeta_decision([Sign::Minus, Sign::Minus, Sign::Plus]), Sign::Plus);
    assert_eq!(zeta_decision([Sign::Minus]), Sign::Minus);
    assert_eq!(corrected_sign(Sign::Minus, Sign::Minus), Sign::Plus);
    assert_eq!(corrected_sign(Sign::Minus, Sign::Plus), Sign::Minus);
    assert_eq!(zeta_decision([]), Sign::Plus);
}

#[test]
fn zeta_on_zero_phase_is_always_plus() {
    let l = RegisterLayout::new(7, 2);
    let n = l.num_qubits();
    // f = +1 memory state with βx = 0 for m = 7 (three flipped pairs), q = 1
    let mem = |site| (1..=3).map(|k| l.memory(site, k, 1)).collect::<Vec<_>>();
    let state = SparseState::from_entries(
        n,
        [
            (bits_with(n, &mem(Site::A)), Complex64::new(1.0, 0.0)),
            (bits_with(n, &mem(Site::B)), Complex64::new(1.0, 0.0)),
        ],
    )
    .unwrap();
    for seed in 0..32 {
        for mode in [MeasurementMode::Parity, MeasurementMode::Individual] {
            let mut rng = rng_from_seed(seed);
            assert_eq!(zeta_measure(state.clone(), &l, 7, 1, Sign::Plus, mode, &mut rng).unwrap(), Sign::Plus);
            assert_eq!(zeta_measure(state.clone(), &l, 7, 1, Sign::Minus, mode, &mut rng).unwrap(), Sign::Minus);
        }
    }
}

#[test]
fn on_axis_source_always_reports_plus_in_mode_zero() {
    let cfg = config(3, 3, 2.0, |_| Scene::single(0.0).unwrap());
    let mut rng = rng_from_seed(3);
    for _ in 0..200 {
        let rec = run_protocol_once(&cfg, &mut rng).unwrap();
        assert_eq!((rec.q, rec.sign), (0, Sign::Plus));
    }
}

#[test]
fn quarter_wave_pair_always_reports_minus() {
    let ap = ApertureConfig::from_ratio(1.0, 2.0).unwrap();
    let theta = FRAC_PI_2 / ap.beta();
    let cfg = config(3, 2, 2.0, |_| Scene::two_point(theta).unwrap());
    let mut rng = rng_from_seed(4);
    for _ in 0..200 {
        assert_eq!(run_protocol_once(&cfg, &mut rng).unwrap().sign, Sign::Minus);
    }
}

#[test]
fn runs_record_time_bin_weight_and_ledger() {
    let cfg = config(7, 2, 1.0, |s| Scene::two_point(0.1 * s).unwrap());
    let mut rng = rng_from_seed(9);
    for _ in 0..100 {
        let t = run_protocol_traced(&cfg, &mut rng).unwrap();
        assert!((1..=7).contains(&t.record.m) && t.record.q < 2);
        assert_eq!(t.record.flipped, t.record.m.count_ones() as usize);
        assert_eq!(t.ebits, 3 * 2);
        assert_eq!(t.trivially_measured, 2 * 2 * 6);
        assert_eq!(t.counts.inject, 4);
        assert_eq!(t.counts.prepare, 4 * (1 << 6));
    }
}

#[test]
fn sampled_mode_distribution_for_single_source() {
    let x_over_sigma = 0.3;
    let cfg = config(1, 3, 1.0, |s| Scene::single(x_over_sigma * s).unwrap());
    let eta = eta_at(cfg.basis(), x_over_sigma * cfg.aperture().sigma()).unwrap();
    let n = 4000;
    let mut counts = [0usize; 3];
    let mut rng = stream_rng(2024, "mode-distribution", 0);
    for _ in 0..n {
        counts[run_protocol_once(&cfg, &mut rng).unwrap().q] += 1;
    }
    for q in 0..3 {
        let p = eta[q] * eta[q];
        let se = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
        let freq = counts[q] as f64 / n as f64;
        assert!((freq - p).abs() <= 3.0 * se, "q={q}: {freq} vs {p} (se {se})");
    }
}

fn analytic_single(cfg: &ProtocolConfig, s: usize) -> OutcomeDistribution {
    let x = cfg.scene().sources()[s].x;
    outcome_probs(cfg.aperture(), cfg.basis(), &Scene::single(x).unwrap()).unwrap()
}

#[test]
fn enumeration_single_mode_third_wave() {
    let ap = ApertureConfig::from_ratio(1.0, 2.0).unwrap();
    let x = FRAC_PI_3 / ap.beta();
    let cfg = config(1, 1, 2.0, |_| Scene::single(x).unwrap());
    let dist = enumerate_protocol(&cfg, 0, 1).unwrap();
    assert!((dist.get(0, Sign::Plus) - 0.25).abs() < 1e-12);
    assert!((dist.get(0, Sign::Minus) - 0.75).abs() < 1e-12);
}

#[test]
fn enumeration_matches_analytic_law() {
    let cfg = config(3, 2, 2.0, |s| Scene::two_point(0.15 * s).unwrap());
    for s in 0..2 {
        let analytic = analytic_single(&cfg, s);
        for m in 1..=3 {
            let dist = enumerate_protocol(&cfg, s, m).unwrap();
            assert!((dist.total() - 1.0).abs() < 1e-10);
            assert!(dist.max_abs_diff(&analytic) < 1e-10, "s={s} m={m}");
        }
    }
    let scene = enumerate_scene(&cfg).unwrap();
    let analytic = outcome_probs(cfg.aperture(), cfg.basis(), cfg.scene()).unwrap();
    assert!(scene.max_abs_diff(&analytic) < 1e-10);
}

#[test]
fn enumeration_exact_over_small_sizes() {
    let mut rng = rng_from_seed(77);
    for (mm, k) in [(1, 1), (1, 2), (1, 3), (3, 1), (3, 2), (3, 3), (7, 1), (7, 2)] {
        for r in [0.5, 2.0] {
            let t = 0.5 * (1.0 - rng.random::<f64>());
            let cfg = config(mm, k, r, |s| Scene::two_point(t * s).unwrap());
            for s in 0..2 {
                let analytic = analytic_single(&cfg, s);
                for m in 1..=mm {
                    let dist = enumerate_protocol(&cfg, s, m).unwrap();
                    assert!(dist.max_abs_diff(&analytic) < 1e-10, "M={mm} K={k} r={r} θ/σ={t} s={s} m={m}");
                }
            }
        }
    }
}

#[test]
fn parity_and_individual_readout_agree() {
    for (mm, k) in [(1, 1), (1, 2), (3, 1)] {
        let cfg = config(mm, k, 1.5, |s| Scene::two_point(0.21 * s).unwrap());
        let individual = cfg
            .clone()
            .with_options(PipelineOptions {
                measurement: MeasurementMode::Individual,
                ..PipelineOptions::default()
            })
            .unwrap();
        for m in 1..=mm {
            let a = enumerate_protocol(&cfg, 1, m).unwrap();
            let b = enumerate_protocol(&individual, 1, m).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12, "M={mm} K={k} m={m}");
        }
    }
}

/// The photonic parity `f` is a fair coin independent of the corrected
/// outcome.
#[test]
fn f_correction_invariance() {
    let cfg = config(3, 2, 2.0, |s| Scene::two_point(0.17 * s).unwrap());
    for s in 0..2 {
        for m in 1..=3 {
            let leaves = enumerate_protocol_leaves(&cfg, s, m).unwrap();
            let mut by_f = [OutcomeDistribution::zeros(2), OutcomeDistribution::zeros(2)];
            for leaf in &leaves {
                by_f[leaf.record.f.index()].add(leaf.record.q, leaf.record.sign, leaf.probability);
            }
            let (plus, minus) = (by_f[0].total(), by_f[1].total());
            assert!((plus - 0.5).abs() < 1e-12 && (minus - 0.5).abs() < 1e-12);
            assert!(by_f[0].scaled(1.0 / plus).max_abs_diff(&by_f[1].scaled(1.0 / minus)) < 1e-12);
        }
    }
}

#[test]
fn decode_integrity_under_enumeration() {
    let cfg = config(7, 3, 1.0, |s| Scene::single(0.25 * s).unwrap());
    let eta = eta_at(cfg.basis(), 0.25 * cfg.aperture().sigma()).unwrap();
    for m in [1, 6] {
        let leaves = enumerate_protocol_leaves(&cfg, 0, m).unwrap();
        let mut q_marginal = [0.0; 3];
        for leaf in &leaves {
            assert_eq!(leaf.record.m, m);
            assert_eq!(leaf.record.flipped, m.count_ones() as usize);
            q_marginal[leaf.record.q] += leaf.probability;
        }
        for q in 0..3 {
            assert!((q_marginal[q] - eta[q] * eta[q]).abs() < 1e-12);
        }
    }
}

#[test]
fn inverted_f_correction_breaks_exactness() {
    let cfg = config(1, 2, 2.0, |s| Scene::single(0.1 * s).unwrap());
    let faulty = cfg
        .clone()
        .with_options(PipelineOptions {
            fault: Some(Fault::InvertedFCorrection),
            ..PipelineOptions::default()
        })
        .unwrap();
    let analytic = analytic_single(&cfg, 0);
    assert!(enumerate_protocol(&faulty, 0, 1).unwrap().max_abs_diff(&analytic) > 0.1);
}

#[test]
fn unconditional_blocks() {
    let ap = ApertureConfig::from_ratio(1.0, 1.0).unwrap();
    let basis = build_basis(&ap, 1, BasisKind::PsfAdapted).unwrap();
    let scene = Scene::single(0.0).unwrap();
    let options = PipelineOptions {
        conditioning: Conditioning::Unconditional,
        ..PipelineOptions::default()
    };
    let too_bright = ProtocolConfig::new(ap, basis.clone(), scene.clone(), 7, 0.1).unwrap();
    assert!(matches!(too_bright.with_options(options), Err(ProtocolError::InvalidConfig(_))));

    let cfg = ProtocolConfig::new(ap, basis, scene, 3, 0.1).unwrap().with_options(options).unwrap();
    let mut rng = rng_from_seed(8);
    let n = 4000;
    let photons = (0..n)
        .filter(|_| matches!(run_block(&cfg, &mut rng).unwrap(), BlockOutcome::Photon(_)))
        .count();
    let p = 0.3;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((photons as f64 / n as f64 - p).abs() < 4.0 * se);
}

#[test]
fn config_validation() {
    let ap = ApertureConfig::from_ratio(1.0, 1.0).unwrap();
    let basis = build_basis(&ap, 1, BasisKind::PsfAdapted).unwrap();
    let scene = Scene::single(0.0).unwrap();
    assert!(ProtocolConfig::new(ap, basis.clone(), scene.clone(), 0, 0.01).is_err());
    assert!(ProtocolConfig::new(ap, basis.clone(), scene.clone(), 1, 0.0).is_err());
    assert!(ProtocolConfig::new(ap, basis.clone(), scene.clone(), 1, 0.2).is_err());
    let cfg = ProtocolConfig::new(ap, basis, scene, 1, 0.1).unwrap();
    assert!(inject_photon(&cfg, 1, 1).is_err());
    assert!(inject_photon(&cfg, 0, 2).is_err());
}

#[test]
fn tiny_branch_cap_overflows() {
    let cfg = config(3, 2, 1.0, |s| Scene::single(0.1 * s).unwrap());
    let capped = cfg
        .with_options(PipelineOptions {
            branch_cap: 8,
            ..PipelineOptions::default()
        })
        .unwrap();
    assert!(matches!(
        enumerate_protocol(&capped, 0, 1),
        Err(ProtocolError::State(entscope_core::statevec::StateError::EnumerationOverflow { cap: 8 }))
    ));
}

#[test]
fn stage_functions_compose_like_a_run() {
    let cfg = config(3, 2, 2.0, |s| Scene::single(0.12 * s).unwrap());
    let (table, state) = through_decode_cz(&cfg, 0, 2, 21);
    let mut rng = rng_from_seed(22);
    let (pattern, state) = read_flip_pattern(state, cfg.layout(), MeasurementMode::Parity, &mut rng).unwrap();
    assert_eq!(pattern.m, 2);
    let f = f_sign(&table, pattern.m, pattern.q).unwrap();
    let sign = zeta_measure(state, cfg.layout(), pattern.m, pattern.q, f, MeasurementMode::Parity, &mut rng).unwrap();
    assert!(Sign::BOTH.contains(&sign));
}

#[test]
fn seeded_runs_are_reproducible() {
    let cfg = config(3, 2, 2.0, |s| Scene::two_point(0.1 * s).unwrap());
    let run = |seed| {
        let mut rng = stream_rng(seed, "simulate", 0);
        (0..50).map(|_| run_protocol_once(&cfg, &mut rng).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1), run(2));
}
