//! Straightforward dense `2^n` state vector used as a reference for the
//! sparse engine. Qubit `q` is bit `q` of the index.
#![allow(dead_code)]

use entscope_core::statevec::{BitString, Gate, Pauli, SparseState};
use entscope_core::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl Dense {
    pub fn from_sparse(state: &SparseState) -> Self {
        let n = state.num_qubits();
        assert!(n <= 16);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (bits, a) in state.iter() {
            let idx = (0..n).filter(|&q| bits.get(q)).map(|q| 1usize << q).sum::<usize>();
            amps[idx] = *a;
        }
        Dense { n, amps }
    }

    pub fn to_sparse(&self) -> SparseState {
        let entries = self.amps.iter().enumerate().filter(|(_, a)| a.norm() > 0.0).map(|(i, a)| {
            let bits: Vec<bool> = (0..self.n).map(|q| (i >> q) & 1 == 1).collect();
            (BitString::from_bits(&bits), *a)
        });
        SparseState::from_entries(self.n, entries).unwrap()
    }

    pub fn apply(&mut self, gate: Gate) {
        let dim = self.amps.len();
        match gate {
            Gate::X(q) => {
                for i in 0..dim {
                    if i & (1 << q) == 0 {
                        self.amps.swap(i, i | (1 << q));
                    }
                }
            }
            Gate::H(q) => {
                for i in 0..dim {
                    if i & (1 << q) == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | (1 << q)]);
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[i | (1 << q)] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::Z(q) => self.phase_where(|i| i & (1 << q) != 0, Complex64::new(-1.0, 0.0)),
            Gate::Phase(q, phi) => {
                self.phase_where(|i| i & (1 << q) != 0, Complex64::new(phi.cos(), phi.sin()))
            }
            Gate::Cz(a, b) => {
                self.phase_where(|i| i & (1 << a) != 0 && i & (1 << b) != 0, Complex64::new(-1.0, 0.0))
            }
            Gate::Cnot { control, target } => {
                for i in 0..dim {
                    if i & (1 << control) != 0 && i & (1 << target) == 0 {
                        self.amps.swap(i, i | (1 << target));
                    }
                }
            }
        }
    }

    fn phase_where(&mut self, pred: impl Fn(usize) -> bool, factor: Complex64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if pred(i) {
                *a *= factor;
            }
        }
    }

    fn apply_pauli(&self, string: &[(usize, Pauli)]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = i;
            let mut sign = 1.0;
            for &(q, p) in string {
                match p {
                    Pauli::X => j ^= 1 << q,
                    Pauli::Z => {
                        if i & (1 << q) != 0 {
                            sign = -sign
                        }
                    }
                }
            }
            out[j] += a * sign;
        }
        out
    }

    /// `(probability, normalised post-state)` for eigenvalue `+1` then `-1`.
    pub fn measure(&self, string: &[(usize, Pauli)]) -> [(f64, Dense); 2] {
        let image = self.apply_pauli(string);
        let project = |s: f64| {
            let v: Vec<Complex64> =
                self.amps.iter().zip(&image).map(|(a, b)| (a + b * s) * 0.5).collect();
            let p: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            let scale = if p > 0.0 { 1.0 / p.sqrt() } else { 0.0 };
            (p, Dense { n: self.n, amps: v.into_iter().map(|a| a * scale).collect() })
        };
        [project(1.0), project(-1.0)]
    }

    pub fn max_abs_diff(&self, other: &Dense) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
