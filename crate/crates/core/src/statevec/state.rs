use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{BitString, StateError};

/// Amplitudes with magnitude below this are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    X(usize),
    H(usize),
    Z(usize),
    /// `diag(1, e^{iφ})`.
    Phase(usize, f64),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

impl Gate {
    fn check(&self, num_qubits: usize) -> Result<(), StateError> {
        let in_range = |q: usize| {
            if q < num_qubits {
                Ok(())
            } else {
                Err(StateError::QubitOutOfRange { qubit: q, num_qubits })
            }
        };
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::Z(q) | Gate::Phase(q, _) => in_range(q),
            Gate::Cnot { control: a, target: b } | Gate::Cz(a, b) => {
                in_range(a)?;
                in_range(b)?;
                if a == b {
                    Err(StateError::DuplicateQubit(a))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Sparse state vector: basis bitstring → amplitude, nonzero entries only,
/// kept sorted by bitstring so every operation is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    num_qubits: usize,
    amps: Vec<(BitString, Complex64)>,
}

const PRUNE_SQR: f64 = PRUNE_THRESHOLD * PRUNE_THRESHOLD;

impl SparseState {
    /// `|bits⟩` with amplitude 1.
    pub fn basis(num_qubits: usize, bits: &[bool]) -> Result<Self, StateError> {
        if bits.len() != num_qubits {
            return Err(StateError::LengthMismatch {
                expected: num_qubits,
                got: bits.len(),
            });
        }
        Ok(Self {
            num_qubits,
            amps: alloc::vec![(BitString::from_bits(bits), Complex64::new(1.0, 0.0))],
        })
    }

    pub fn zero(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            amps: alloc::vec![(BitString::zeros(num_qubits), Complex64::new(1.0, 0.0))],
        }
    }

    /// Builds a state from raw entries (summing duplicates) and normalises it.
    pub fn from_entries(
        num_qubits: usize,
        entries: impl IntoIterator<Item = (BitString, Complex64)>,
    ) -> Result<Self, StateError> {
        let mut state = Self::collect(num_qubits, entries.into_iter().collect());
        state.normalize()?;
        Ok(state)
    }

    /// Sorts, sums duplicates and prunes.
    pub(crate) fn collect(num_qubits: usize, mut entries: Vec<(BitString, Complex64)>) -> Self {
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut amps: Vec<(BitString, Complex64)> = Vec::with_capacity(entries.len());
        for (bits, a) in entries {
            match amps.last_mut() {
                Some(last) if last.0 == bits => last.1 += a,
                _ => {
                    if amps.last().is_some_and(|l| l.1.norm_sqr() < PRUNE_SQR) {
                        amps.pop();
                    }
                    amps.push((bits, a));
                }
            }
        }
        if amps.last().is_some_and(|l| l.1.norm_sqr() < PRUNE_SQR) {
            amps.pop();
        }
        Self { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of stored (nonzero) amplitudes.
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, &Complex64)> {
        self.amps.iter().map(|(b, a)| (b, a))
    }

    pub fn amplitude(&self, bits: &BitString) -> Complex64 {
        match self.amps.binary_search_by(|(b, _)| b.cmp(bits)) {
            Ok(i) => self.amps[i].1,
            Err(_) => Complex64::default(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<(), StateError> {
        let norm = libm::sqrt(self.norm_sqr());
        if !(norm > 0.0) {
            return Err(StateError::ZeroNorm);
        }
        for (_, a) in self.amps.iter_mut() {
            *a /= norm;
        }
        Ok(())
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<(), StateError> {
        if q < self.num_qubits {
            Ok(())
        } else {
            Err(StateError::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits })
        }
    }

    /// True when qubit `q` is `|0⟩` in every stored entry, i.e. the state is
    /// a product of `|0⟩_q` with the rest.
    pub fn is_vacuum(&self, q: usize) -> bool {
        self.amps.iter().all(|(b, _)| !b.get(q))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SparseState) -> Complex64 {
        self.amps
            .iter()
            .map(|(b, a)| a.conj() * other.amplitude(b))
            .sum()
    }

    /// Largest entrywise amplitude difference.
    pub fn max_abs_diff(&self, other: &SparseState) -> f64 {
        let mut worst: f64 = 0.0;
        for (b, a) in &self.amps {
            worst = worst.max((a - other.amplitude(b)).norm());
        }
        for (b, a) in &other.amps {
            if self.amps.binary_search_by(|(x, _)| x.cmp(b)).is_err() {
                worst = worst.max(a.norm());
            }
        }
        worst
    }

    /// Exchanges the labels of qubits `a` and `b` (no physical gate).
    pub fn relabel_swap(&mut self, a: usize, b: usize) -> Result<(), StateError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Ok(());
        }
        self.remap(|bits| {
            let (va, vb) = (bits.get(a), bits.get(b));
            bits.set(a, vb);
            bits.set(b, va);
        });
        Ok(())
    }

    /// Applies a bijection of basis labels.
    fn remap(&mut self, mut f: impl FnMut(&mut BitString)) {
        for (bits, _) in self.amps.iter_mut() {
            f(bits);
        }
        self.amps.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    }

    /// Output amplitudes at every `b` in `S ∪ τ(S)` as `f(b, a_b, a_{τ(b)})`
    /// for a bit-flip involution `τ`, producing `N` states in one pass.
    /// Labels already in the support stay in order; only new partners need
    /// sorting.
    pub(crate) fn pairwise<const N: usize>(
        &self,
        tau: impl Fn(&BitString) -> BitString,
        f: impl Fn(&BitString, Complex64, Complex64) -> [Complex64; N],
    ) -> [Self; N] {
        let zero = Complex64::new(0.0, 0.0);
        let mut main: [Vec<(BitString, Complex64)>; N] = core::array::from_fn(|_| Vec::with_capacity(self.amps.len()));
        let mut extra: [Vec<(BitString, Complex64)>; N] = core::array::from_fn(|_| Vec::new());
        let push = |lists: &mut [Vec<(BitString, Complex64)>; N], b: &BitString, values: [Complex64; N]| {
            for (list, v) in lists.iter_mut().zip(values) {
                if v.norm_sqr() >= PRUNE_SQR {
                    list.push((b.clone(), v));
                }
            }
        };
        for (b, a) in &self.amps {
            let (a, t) = (*a, tau(b));
            match self.amps.binary_search_by(|(x, _)| x.cmp(&t)) {
                Ok(i) => push(&mut main, b, f(b, a, self.amps[i].1)),
                Err(_) => {
                    push(&mut main, b, f(b, a, zero));
                    push(&mut extra, &t, f(&t, zero, a));
                }
            }
        }
        let num_qubits = self.num_qubits;
        let mut extra = extra.into_iter();
        main.map(|main| {
            let mut extra = extra.next().expect("one extra list per output");
            if extra.is_empty() {
                return Self { num_qubits, amps: main };
            }
            extra.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            let mut amps = Vec::with_capacity(main.len() + extra.len());
            let (mut i, mut j) = (main.into_iter().peekable(), extra.into_iter().peekable());
            loop {
                let take_main = match (i.peek(), j.peek()) {
                    (Some(x), Some(y)) => x.0 < y.0,
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    (None, None) => break,
                };
                amps.push(if take_main { i.next() } else { j.next() }.expect("peeked"));
            }
            Self { num_qubits, amps }
        })
    }

    fn scale_where(&mut self, mut f: impl FnMut(&BitString) -> Option<Complex64>) {
        for (bits, a) in self.amps.iter_mut() {
            if let Some(factor) = f(bits) {
                *a *= factor;
            }
        }
    }

    pub fn apply(&mut self, gate: Gate) -> Result<(), StateError> {
        gate.check(self.num_qubits)?;
        let minus = Complex64::new(-1.0, 0.0);
        match gate {
            Gate::X(q) => self.amps = flip_sorted(core::mem::take(&mut self.amps), q),
            Gate::Cnot { control, target } => {
                let (on, off): (Vec<_>, Vec<_>) =
                    core::mem::take(&mut self.amps).into_iter().partition(|(b, _)| b.get(control));
                self.amps = merge_sorted(off, flip_sorted(on, target));
            }
            Gate::Z(q) => self.scale_where(|b| b.get(q).then_some(minus)),
            Gate::Phase(q, phi) => {
                let factor = Complex64::from_polar(1.0, phi);
                self.scale_where(|b| b.get(q).then_some(factor));
            }
            Gate::Cz(a, c) => self.scale_where(|b| (b.get(a) && b.get(c)).then_some(minus)),
            Gate::H(q) => {
                let [out] = self.pairwise(
                    |b| b.with_flipped(q),
                    |b, a, partner| {
                        [if b.get(q) {
                            (partner - a) * FRAC_1_SQRT_2
                        } else {
                            (a + partner) * FRAC_1_SQRT_2
                        }]
                    },
                );
                *self = out;
            }
        }
        Ok(())
    }

    pub fn apply_all(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<(), StateError> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(BitString, Complex64)> {
        self.amps.clone()
    }
}

/// Flips bit `q` of every label in a sorted list and restores the order:
/// within each run of labels that agree above `q`, the `q = 1` block moves
/// ahead of the `q = 0` block.
fn flip_sorted(amps: Vec<(BitString, Complex64)>, q: usize) -> Vec<(BitString, Complex64)> {
    let mut out = Vec::with_capacity(amps.len());
    let mut start = 0;
    while start < amps.len() {
        let mut end = start + 1;
        while end < amps.len() && amps[end].0.same_above(&amps[start].0, q) {
            end += 1;
        }
        let split = start + amps[start..end].partition_point(|(b, _)| !b.get(q));
        for (b, a) in amps[split..end].iter().chain(&amps[start..split]) {
            out.push((b.with_flipped(q), *a));
        }
        start = end;
    }
    out
}

fn merge_sorted(
    a: Vec<(BitString, Complex64)>,
    b: Vec<(BitString, Complex64)>,
) -> Vec<(BitString, Complex64)> {
    if b.is_empty() {
        return a;
    }
    if a.is_empty() {
        return b;
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut b = b.into_iter().peekable();
    for item in a {
        while b.peek().is_some_and(|x| x.0 < item.0) {
            out.extend(b.next());
        }
        out.push(item);
    }
    out.extend(b);
    out
}
