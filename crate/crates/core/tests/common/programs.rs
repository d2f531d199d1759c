//! Random gate/measurement programs run on the sparse engine and the dense
//! reference side by side.
#![allow(dead_code)]

use entscope_core::rng::rng_from_seed;
use entscope_core::statevec::{measure_pauli_string, BitString, Gate, Pauli, PauliString, SparseState};
use entscope_core::{Complex64, Sign};
use rand::Rng;

use super::dense::Dense;

pub fn random_state(rng: &mut impl Rng, n: usize, entries: usize) -> SparseState {
    let items: Vec<_> = (0..entries)
        .map(|_| {
            let bits: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
            let a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            (BitString::from_bits(&bits), a)
        })
        .collect();
    SparseState::from_entries(n, items).unwrap()
}

pub fn random_gate(rng: &mut impl Rng, n: usize) -> Gate {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n);
    if n > 1 {
        while b == a {
            b = rng.random_range(0..n);
        }
    }
    match rng.random_range(0..6) {
        0 => Gate::X(a),
        1 => Gate::H(a),
        2 => Gate::Z(a),
        3 => Gate::Phase(a, rng.random_range(-3.2..3.2)),
        4 if n > 1 => Gate::Cnot { control: a, target: b },
        5 if n > 1 => Gate::Cz(a, b),
        _ => Gate::H(a),
    }
}

pub fn random_string(rng: &mut impl Rng, n: usize) -> PauliString {
    let len = rng.random_range(1..=n.min(3));
    let mut qubits: Vec<usize> = Vec::new();
    while qubits.len() < len {
        let q = rng.random_range(0..n);
        if !qubits.contains(&q) {
            qubits.push(q);
        }
    }
    PauliString::new(
        qubits
            .into_iter()
            .map(|q| (q, if rng.random::<bool>() { Pauli::X } else { Pauli::Z }))
            .collect(),
    )
}

/// Runs one random program on both engines and returns the worst deviation.
pub fn run_program(seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(1..=12);
    let entries = rng.random_range(1..=6);
    let mut sparse = random_state(&mut rng, n, entries);
    let mut dense = Dense::from_sparse(&sparse);
    let mut worst: f64 = 0.0;
    for _ in 0..rng.random_range(1..=25) {
        if rng.random_range(0..4) == 0 {
            let string = random_string(&mut rng, n);
            let branches = measure_pauli_string(&sparse, &string).unwrap();
            let reference = dense.measure(string.factors());
            let total: f64 = branches.iter().map(|b| b.probability).sum();
            worst = worst.max((total - 1.0).abs());
            for (sign, (p, post)) in Sign::BOTH.into_iter().zip(&reference) {
                match branches.iter().find(|b| b.outcomes[0].sign == sign) {
                    Some(b) => {
                        worst = worst.max((b.probability - p).abs());
                        worst = worst.max(Dense::from_sparse(&b.state).max_abs_diff(post));
                    }
                    None => worst = worst.max(*p),
                }
            }
            let pick = rng.random_range(0..branches.len());
            sparse = branches[pick].state.clone();
            dense = reference[Sign::BOTH.iter().position(|s| *s == branches[pick].outcomes[0].sign).unwrap()]
                .1
                .clone();
        } else {
            let gate = random_gate(&mut rng, n);
            sparse.apply(gate).unwrap();
            dense.apply(gate);
            worst = worst.max((sparse.norm_sqr() - 1.0).abs());
        }
        worst = worst.max(Dense::from_sparse(&sparse).max_abs_diff(&dense));
    }
    worst
}
