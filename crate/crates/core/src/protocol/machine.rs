//! The pipeline as an explicit state machine. Every measurement is a fork
//! into its nonzero-probability branches; sampling follows one branch by the
//! Born rule and enumeration walks them all.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::stages::{
    ancilla_qubits, corrected_sign, decode_cz, encode, f_sign, inject_photon, positions, prepare_bell_ancillas, FlipPattern,
    XResultTable,
};
use super::{Conditioning, Fault, MeasurementMode, PhotonRecord, ProtocolConfig, ProtocolError};
use crate::fisher::OutcomeDistribution;
use crate::statevec::{choose_branch, measure_pauli_string, Gate, Pauli, PauliString, RegisterLayout, Site, SparseState};
use crate::Sign;

/// Number of stored amplitudes after each stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageCounts {
    pub inject: usize,
    pub encode: usize,
    pub photons: usize,
    pub prepare: usize,
    pub decode_cz: usize,
    pub flips: usize,
    pub zeta: usize,
}

/// A sampled run with its bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub record: PhotonRecord,
    pub counts: StageCounts,
    /// Bell pairs consumed.
    pub ebits: usize,
    /// Photonic qubits outside the photon's temporal mode, skipped as vacuum.
    pub trivially_measured: usize,
}

/// One leaf of the exhaustive enumeration.
#[derive(Clone, Debug)]
pub struct EnumeratedLeaf {
    pub record: PhotonRecord,
    pub probability: f64,
    pub table: XResultTable,
}

/// A time block in unconditional mode either stays dark or carries one photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockOutcome {
    Vacuum,
    Photon(PhotonRecord),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Phase {
    Encode,
    Photons(usize),
    Prepare,
    DecodeCz,
    Flips(usize),
    Decode,
    FSign,
    Zeta(usize),
    Done,
}

/// Per-qubit count of Hadamard-like operations since the qubit was last
/// reset; bounds the number of stored amplitudes.
#[derive(Clone, Debug)]
struct SparsityGuard {
    spatial_modes: usize,
    h: Vec<u32>,
}

impl SparsityGuard {
    fn new(num_qubits: usize, spatial_modes: usize) -> Self {
        Self {
            spatial_modes,
            h: alloc::vec![0; num_qubits],
        }
    }

    fn bump(&mut self, qubit: usize) {
        self.h[qubit] += 1;
    }

    fn reset(&mut self, qubit: usize) {
        self.h[qubit] = 0;
    }

    fn check(&self, state: &SparseState) -> Result<(), ProtocolError> {
        let total: u32 = self.h.iter().sum();
        if total >= 120 {
            return Ok(());
        }
        let bound = (2 * self.spatial_modes as u128) << total;
        if state.len() as u128 > bound {
            return Err(ProtocolError::SparsityBound { entries: state.len(), bound });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub(super) struct Machine {
    layout: RegisterLayout,
    mode: MeasurementMode,
    fault: Option<Fault>,
    /// Temporal mode that received the photon, when known.
    injected: Option<usize>,
    /// Temporal mode whose photonic qubits are measured.
    support: usize,
    state: SparseState,
    phase: Phase,
    table: XResultTable,
    readouts: Vec<Sign>,
    pattern: Option<FlipPattern>,
    f: Sign,
    odd: usize,
    pending: Option<Sign>,
    sign: Option<Sign>,
    counts: StageCounts,
    ebits: usize,
    trivially_measured: usize,
    guard: SparsityGuard,
}

pub(super) enum Advance {
    Continue(Machine),
    Fork(Vec<(f64, Machine)>),
}

impl Machine {
    pub(super) fn at_phase(
        layout: RegisterLayout,
        mode: MeasurementMode,
        state: SparseState,
        support: usize,
        phase: Phase,
    ) -> Self {
        let guard = SparsityGuard::new(layout.num_qubits(), layout.spatial_modes());
        Self {
            table: XResultTable::new(support, layout.spatial_modes()),
            layout,
            mode,
            fault: None,
            injected: None,
            support,
            counts: StageCounts {
                inject: state.len(),
                ..StageCounts::default()
            },
            state,
            phase,
            readouts: Vec::new(),
            pattern: None,
            f: Sign::Plus,
            odd: 0,
            pending: None,
            sign: None,
            ebits: 0,
            trivially_measured: 0,
            guard,
        }
    }

    pub(super) fn at_zeta(
        layout: RegisterLayout,
        mode: MeasurementMode,
        state: SparseState,
        pattern: FlipPattern,
        f: Sign,
    ) -> Self {
        let mut machine = Self::at_phase(layout, mode, state, pattern.m, Phase::Zeta(0));
        machine.pattern = Some(pattern);
        machine.f = f;
        machine
    }

    /// Records that every `C_ki` went through one Hadamard (the prepared
    /// Bell pairs), for entry points that start after preparation.
    pub(super) fn assume_prepared(mut self) -> Self {
        for (k, i) in positions(&self.layout) {
            self.guard.bump(self.layout.ancilla(Site::A, k, i));
        }
        self
    }

    fn for_run(config: &ProtocolConfig, s: usize, m: usize) -> Result<Self, ProtocolError> {
        let state = inject_photon(config, s, m)?;
        let mut machine = Self::at_phase(*config.layout(), config.options().measurement, state, m, Phase::Encode);
        machine.fault = config.options().fault;
        machine.injected = Some(m);
        machine.guard.check(&machine.state)?;
        Ok(machine)
    }

    pub(super) fn sign(&self) -> Option<Sign> {
        self.sign
    }

    pub(super) fn into_table_and_state(self) -> (XResultTable, SparseState) {
        (self.table, self.state)
    }

    pub(super) fn into_pattern_and_state(self) -> Result<(FlipPattern, SparseState), ProtocolError> {
        let pattern = self
            .pattern
            .ok_or_else(|| ProtocolError::DecodeIntegrity("flip pattern was not read".into()))?;
        Ok((pattern, self.state))
    }

    fn record(&self, source: usize) -> Result<PhotonRecord, ProtocolError> {
        let pattern = self.pattern.as_ref().expect("finished runs carry a pattern");
        let expected = self.layout.memory_bits() * self.layout.spatial_modes();
        if self.ebits != expected {
            return Err(ProtocolError::DecodeIntegrity(format!(
                "consumed {} Bell pairs, expected {expected}",
                self.ebits
            )));
        }
        Ok(PhotonRecord {
            source,
            m: pattern.m,
            q: pattern.q,
            sign: self.sign.expect("finished runs carry a sign"),
            flipped: pattern.n_m(),
            f: self.f,
        })
    }

    fn take_state(&mut self) -> SparseState {
        core::mem::replace(&mut self.state, SparseState::zero(0))
    }

    /// Measures `string`, applies `then` to every branch and bumps the
    /// sparsity counters of its `X` factors.
    fn fork(
        mut self,
        string: PauliString,
        then: impl Fn(&mut Machine, Sign) -> Result<(), ProtocolError>,
    ) -> Result<Advance, ProtocolError> {
        let state = self.take_state();
        let branches = measure_pauli_string(&state, &string)?;
        for &(q, p) in string.factors() {
            if p == Pauli::X {
                self.guard.bump(q);
            }
        }
        let mut children = Vec::with_capacity(branches.len());
        let last = branches.len().saturating_sub(1);
        let mut parent = Some(self);
        for (n, branch) in branches.into_iter().enumerate() {
            let mut child = if n == last {
                parent.take().expect("parent used once")
            } else {
                parent.as_ref().expect("parent still present").clone()
            };
            child.state = branch.state;
            then(&mut child, branch.outcomes[0].sign)?;
            child.guard.check(&child.state)?;
            children.push((branch.probability, child));
        }
        Ok(Advance::Fork(children))
    }

    fn flip_steps(&self) -> usize {
        let pairs = self.layout.memory_bits() * self.layout.spatial_modes();
        match self.mode {
            MeasurementMode::Parity => pairs,
            MeasurementMode::Individual => 2 * pairs,
        }
    }

    fn pair_parity(&self, p: usize) -> Sign {
        match self.mode {
            MeasurementMode::Parity => self.readouts[p],
            MeasurementMode::Individual => self.readouts[2 * p].times(self.readouts[2 * p + 1]),
        }
    }

    fn ancilla_pair(&self, p: usize) -> (usize, usize) {
        let kk = self.layout.spatial_modes();
        let (k, i) = (p / kk + 1, p % kk);
        (self.layout.ancilla(Site::A, k, i), self.layout.ancilla(Site::B, k, i))
    }

    /// Returns pair `p` to `|0⟩|0⟩` once its readout is complete. Each pair
    /// is reset right after it is read, which keeps later readouts on the
    /// smaller state.
    fn reset_pair(&mut self, p: usize) -> Result<(), ProtocolError> {
        let (c, d) = self.ancilla_pair(p);
        match self.mode {
            MeasurementMode::Parity => {
                // φ± → |0⟩|0⟩ or |1⟩|0⟩
                self.state.apply(Gate::Cnot { control: c, target: d })?;
                self.state.apply(Gate::H(c))?;
                if self.readouts[p] == Sign::Minus {
                    self.state.apply(Gate::X(c))?;
                }
            }
            MeasurementMode::Individual => {
                for (qubit, sign) in [(c, self.readouts[2 * p]), (d, self.readouts[2 * p + 1])] {
                    self.state.apply(Gate::H(qubit))?;
                    if sign == Sign::Minus {
                        self.state.apply(Gate::X(qubit))?;
                    }
                }
            }
        }
        self.guard.reset(c);
        self.guard.reset(d);
        Ok(())
    }

    fn check_ancillas_reset(&self) -> Result<(), ProtocolError> {
        for q in ancilla_qubits(&self.layout) {
            if !self.state.is_vacuum(q) {
                return Err(ProtocolError::DecodeIntegrity(format!("ancilla {q} not reset after readout")));
            }
        }
        Ok(())
    }

    fn decode(&mut self) -> Result<(), ProtocolError> {
        let kk = self.layout.spatial_modes();
        let pairs = self.layout.memory_bits() * kk;
        let flipped: Vec<(usize, usize)> = (0..pairs)
            .filter(|&p| self.pair_parity(p) == Sign::Minus)
            .map(|p| (p / kk + 1, p % kk))
            .collect();
        let Some(&(_, q)) = flipped.first() else {
            return Err(ProtocolError::DecodeIntegrity("no Bell pair flipped".into()));
        };
        if flipped.iter().any(|&(_, i)| i != q) {
            return Err(ProtocolError::DecodeIntegrity(format!(
                "flips span several spatial modes: {flipped:?}"
            )));
        }
        let ks: Vec<usize> = flipped.iter().map(|&(k, _)| k).collect();
        let m: usize = ks.iter().map(|&k| 1usize << (k - 1)).sum();
        if m > self.layout.temporal_modes() {
            return Err(ProtocolError::DecodeIntegrity(format!("decoded temporal mode {m} exceeds M")));
        }
        if let Some(injected) = self.injected {
            if injected != m {
                return Err(ProtocolError::DecodeIntegrity(format!(
                    "photon injected in temporal mode {injected}, decoded {m}"
                )));
            }
        }
        self.pattern = Some(FlipPattern { m, q, flipped: ks });
        Ok(())
    }

    fn finish_zeta(&mut self) {
        let zeta = if self.odd % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let f = match self.fault {
            Some(Fault::InvertedFCorrection) => self.f.flip(),
            None => self.f,
        };
        self.sign = Some(corrected_sign(zeta, f));
    }

    pub(super) fn step(mut self) -> Result<Advance, ProtocolError> {
        let layout = self.layout;
        let kk = layout.spatial_modes();
        match self.phase {
            Phase::Encode => {
                self.state = encode(self.take_state(), &layout)?;
                self.counts.encode = self.state.len();
                self.phase = Phase::Photons(0);
                self.guard.check(&self.state)?;
                Ok(Advance::Continue(self))
            }
            Phase::Photons(next) => {
                if next == 0 {
                    for j in (1..=layout.temporal_modes()).filter(|&j| j != self.support) {
                        for q in layout.temporal_support(j) {
                            if !self.state.is_vacuum(q) {
                                return Err(ProtocolError::NotVacuum { qubit: q, register: "photonic" });
                            }
                            self.trivially_measured += 1;
                        }
                    }
                }
                if next == 2 * kk {
                    self.counts.photons = self.state.len();
                    self.phase = Phase::Prepare;
                    return Ok(Advance::Continue(self));
                }
                let (q, site) = (next / 2, Site::BOTH[next % 2]);
                let qubit = layout.photonic(site, self.support, q);
                self.fork(PauliString::x(qubit), move |child, sign| {
                    child.state.apply(Gate::H(qubit))?;
                    if sign == Sign::Minus {
                        child.state.apply(Gate::X(qubit))?;
                    }
                    child.guard.reset(qubit);
                    child.table.record(site, q, sign);
                    child.phase = Phase::Photons(next + 1);
                    Ok(())
                })
            }
            Phase::Prepare => {
                self.state = prepare_bell_ancillas(self.take_state(), &layout)?;
                for (k, i) in positions(&layout) {
                    self.guard.bump(layout.ancilla(Site::A, k, i));
                    self.ebits += 1;
                }
                self.counts.prepare = self.state.len();
                self.guard.check(&self.state)?;
                self.phase = Phase::DecodeCz;
                Ok(Advance::Continue(self))
            }
            Phase::DecodeCz => {
                self.state = decode_cz(self.take_state(), &layout)?;
                self.counts.decode_cz = self.state.len();
                self.phase = Phase::Flips(0);
                Ok(Advance::Continue(self))
            }
            Phase::Flips(next) => {
                if next == self.flip_steps() {
                    self.check_ancillas_reset()?;
                    self.counts.flips = self.state.len();
                    self.guard.check(&self.state)?;
                    self.phase = Phase::Decode;
                    return Ok(Advance::Continue(self));
                }
                let string = match self.mode {
                    MeasurementMode::Parity => {
                        let (c, d) = self.ancilla_pair(next);
                        PauliString::xx(c, d)
                    }
                    MeasurementMode::Individual => {
                        let (c, d) = self.ancilla_pair(next / 2);
                        PauliString::x(if next % 2 == 0 { c } else { d })
                    }
                };
                let mode = self.mode;
                self.fork(string, move |child, sign| {
                    child.readouts.push(sign);
                    match mode {
                        MeasurementMode::Parity => child.reset_pair(next)?,
                        MeasurementMode::Individual if next % 2 == 1 => child.reset_pair(next / 2)?,
                        MeasurementMode::Individual => {}
                    }
                    child.phase = Phase::Flips(next + 1);
                    Ok(())
                })
            }
            Phase::Decode => {
                self.decode()?;
                self.phase = Phase::FSign;
                Ok(Advance::Continue(self))
            }
            Phase::FSign => {
                let pattern = self.pattern.as_ref().expect("decode sets the pattern");
                self.f = f_sign(&self.table, pattern.m, pattern.q)?;
                self.phase = Phase::Zeta(0);
                Ok(Advance::Continue(self))
            }
            Phase::Zeta(next) => {
                let pattern = self.pattern.as_ref().expect("zeta needs a decoded pattern");
                let steps = match self.mode {
                    MeasurementMode::Parity => pattern.n_m(),
                    MeasurementMode::Individual => 2 * pattern.n_m(),
                };
                if next == steps {
                    self.finish_zeta();
                    self.counts.zeta = self.state.len();
                    self.phase = Phase::Done;
                    return Ok(Advance::Continue(self));
                }
                let q = pattern.q;
                let mode = self.mode;
                let k = match mode {
                    MeasurementMode::Parity => pattern.flipped[next],
                    MeasurementMode::Individual => pattern.flipped[next / 2],
                };
                let (a, b) = (layout.memory(Site::A, k, q), layout.memory(Site::B, k, q));
                let string = match mode {
                    MeasurementMode::Parity => PauliString::xx(a, b),
                    MeasurementMode::Individual => PauliString::x(if next % 2 == 0 { a } else { b }),
                };
                self.fork(string, move |child, sign| {
                    let parity = match mode {
                        MeasurementMode::Parity => Some(sign),
                        MeasurementMode::Individual if next % 2 == 0 => {
                            child.pending = Some(sign);
                            None
                        }
                        MeasurementMode::Individual => {
                            Some(child.pending.take().expect("first half measured").times(sign))
                        }
                    };
                    if parity == Some(Sign::Minus) {
                        child.odd += 1;
                    }
                    child.phase = Phase::Zeta(next + 1);
                    Ok(())
                })
            }
            Phase::Done => Ok(Advance::Continue(self)),
        }
    }
}

/// Follows one Born-rule path until `stop` holds.
pub(super) fn drive_sampled<R: Rng + ?Sized>(
    mut machine: Machine,
    rng: &mut R,
    stop: impl Fn(&Phase) -> bool,
) -> Result<Machine, ProtocolError> {
    while !stop(&machine.phase) {
        if machine.phase == Phase::Done {
            return Err(ProtocolError::DecodeIntegrity("run finished before the requested stage".into()));
        }
        machine = match machine.step()? {
            Advance::Continue(next) => next,
            Advance::Fork(mut children) => {
                let pick = if children.len() == 1 {
                    0
                } else {
                    choose_branch(children.iter().map(|(p, _)| *p), rng.random::<f64>())
                };
                children.swap_remove(pick).1
            }
        };
    }
    Ok(machine)
}

/// Every path to completion, depth first, with its probability.
fn drive_all(start: Machine, cap: usize) -> Result<Vec<(f64, Machine)>, ProtocolError> {
    let mut leaves = Vec::new();
    let mut stack = alloc::vec![(1.0, start)];
    while let Some((p, machine)) = stack.pop() {
        if machine.phase == Phase::Done {
            leaves.push((p, machine));
            continue;
        }
        match machine.step()? {
            Advance::Continue(next) => stack.push((p, next)),
            Advance::Fork(children) => {
                for (pc, child) in children.into_iter().rev() {
                    stack.push((p * pc, child));
                }
            }
        }
        if stack.len() + leaves.len() > cap {
            return Err(crate::statevec::StateError::EnumerationOverflow { cap }.into());
        }
    }
    Ok(leaves)
}

fn sample_source_and_mode<R: Rng + ?Sized>(config: &ProtocolConfig, rng: &mut R) -> (usize, usize) {
    let s = choose_branch(config.scene().sources().iter().map(|src| src.brightness), rng.random::<f64>());
    let m = rng.random_range(1..=config.temporal_modes());
    (s, m)
}

/// One detected photon, sampled through the whole pipeline.
pub fn run_protocol_traced<R: Rng + ?Sized>(config: &ProtocolConfig, rng: &mut R) -> Result<RunTrace, ProtocolError> {
    let (s, m) = sample_source_and_mode(config, rng);
    let machine = Machine::for_run(config, s, m)?;
    let done = drive_sampled(machine, rng, |p| *p == Phase::Done)?;
    Ok(RunTrace {
        record: done.record(s)?,
        counts: done.counts,
        ebits: done.ebits,
        trivially_measured: done.trivially_measured,
    })
}

pub fn run_protocol_once<R: Rng + ?Sized>(config: &ProtocolConfig, rng: &mut R) -> Result<PhotonRecord, ProtocolError> {
    run_protocol_traced(config, rng).map(|t| t.record)
}

/// One time block of `M` temporal modes. In conditional mode every block
/// carries a photon; in unconditional mode it does so with probability `Mε`.
pub fn run_block<R: Rng + ?Sized>(config: &ProtocolConfig, rng: &mut R) -> Result<BlockOutcome, ProtocolError> {
    if config.options().conditioning == Conditioning::Unconditional {
        let p_photon = config.temporal_modes() as f64 * config.epsilon();
        if rng.random::<f64>() >= p_photon {
            return Ok(BlockOutcome::Vacuum);
        }
    }
    run_protocol_once(config, rng).map(BlockOutcome::Photon)
}

/// All measurement histories for a photon from source `s` in temporal mode
/// `m`.
pub fn enumerate_protocol_leaves(config: &ProtocolConfig, s: usize, m: usize) -> Result<Vec<EnumeratedLeaf>, ProtocolError> {
    let machine = Machine::for_run(config, s, m)?;
    drive_all(machine, config.options().branch_cap)?
        .into_iter()
        .map(|(probability, leaf)| {
            Ok(EnumeratedLeaf {
                record: leaf.record(s)?,
                probability,
                table: leaf.table,
            })
        })
        .collect()
}

/// Exact `(q, ±)` distribution for source `s` and temporal mode `m`.
pub fn enumerate_protocol(config: &ProtocolConfig, s: usize, m: usize) -> Result<OutcomeDistribution, ProtocolError> {
    let mut dist = OutcomeDistribution::zeros(config.spatial_modes());
    for leaf in enumerate_protocol_leaves(config, s, m)? {
        dist.add(leaf.record.q, leaf.record.sign, leaf.probability);
    }
    Ok(dist)
}

/// Exact distribution over the whole scene: sources weighted by brightness,
/// temporal modes uniformly.
pub fn enumerate_scene(config: &ProtocolConfig) -> Result<OutcomeDistribution, ProtocolError> {
    let mut dist = OutcomeDistribution::zeros(config.spatial_modes());
    let weight_m = 1.0 / config.temporal_modes() as f64;
    for (s, src) in config.scene().sources().iter().enumerate() {
        for m in 1..=config.temporal_modes() {
            dist.accumulate(&enumerate_protocol(config, s, m)?, src.brightness * weight_m);
        }
    }
    Ok(dist)
}
