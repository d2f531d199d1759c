use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use super::machine::{drive_sampled, Machine, Phase};
use super::{MeasurementMode, ProtocolConfig, ProtocolError};
use crate::statevec::{BitString, Gate, RegisterLayout, Site, SparseState};
use crate::Sign;

/// Photonic `X` outcomes of the detected temporal mode, one `[A, B]` pair per
/// spatial mode.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct XResultTable {
    m: usize,
    outcomes: Vec<[Option<Sign>; 2]>,
}

impl XResultTable {
    pub fn new(m: usize, spatial_modes: usize) -> Self {
        Self {
            m,
            outcomes: alloc::vec![[None; 2]; spatial_modes],
        }
    }

    /// Temporal mode the table belongs to.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn record(&mut self, site: Site, q: usize, sign: Sign) {
        self.outcomes[q][site_index(site)] = Some(sign);
    }

    pub fn get(&self, site: Site, q: usize) -> Option<Sign> {
        self.outcomes.get(q).and_then(|pair| pair[site_index(site)])
    }

    /// Number of stored outcomes (`2K` once complete).
    pub fn len(&self) -> usize {
        self.outcomes.iter().flatten().filter(|o| o.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complete(&self) -> bool {
        self.len() == 2 * self.outcomes.len()
    }
}

fn site_index(site: Site) -> usize {
    match site {
        Site::A => 0,
        Site::B => 1,
    }
}

/// `f_mq`: `+` when the two sites measured the same photonic `X` result.
pub fn f_sign(table: &XResultTable, m: usize, q: usize) -> Result<Sign, ProtocolError> {
    let missing = ProtocolError::MissingXResult { m, q };
    if table.m != m {
        return Err(missing);
    }
    match (table.get(Site::A, q), table.get(Site::B, q)) {
        (Some(a), Some(b)) => Ok(a.times(b)),
        _ => Err(missing),
    }
}

/// `ζ+` when an even number of pair parities is odd, `ζ-` otherwise.
pub fn zeta_decision(parities: impl IntoIterator<Item = Sign>) -> Sign {
    let odd = parities.into_iter().filter(|&p| p == Sign::Minus).count();
    if odd % 2 == 0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// The reported sign: `ζ` flipped when `f = -1`.
pub fn corrected_sign(zeta: Sign, f: Sign) -> Sign {
    zeta.times(f)
}

/// Decoded location of the excitation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipPattern {
    pub m: usize,
    pub q: usize,
    /// Flipped memory positions `k`, ascending. `N_m` is its length.
    pub flipped: Vec<usize>,
}

impl FlipPattern {
    /// `N_m`.
    pub fn n_m(&self) -> usize {
        self.flipped.len()
    }
}

/// Single photon in temporal mode `m` with amplitudes `amps[q] = [A, B]`.
/// The state is normalised.
pub fn inject_amplitudes(
    layout: &RegisterLayout,
    m: usize,
    amps: &[[Complex64; 2]],
) -> Result<SparseState, ProtocolError> {
    if !(1..=layout.temporal_modes()).contains(&m) {
        return Err(ProtocolError::InvalidConfig(format!("temporal mode {m} outside 1..={}", layout.temporal_modes())));
    }
    if amps.len() != layout.spatial_modes() {
        return Err(ProtocolError::InvalidConfig(format!(
            "{} amplitude pairs for {} spatial modes",
            amps.len(),
            layout.spatial_modes()
        )));
    }
    let n = layout.num_qubits();
    let mut entries = Vec::with_capacity(2 * amps.len());
    for (q, pair) in amps.iter().enumerate() {
        for (site, a) in Site::BOTH.into_iter().zip(pair) {
            let mut bits = BitString::zeros(n);
            bits.set(layout.photonic(site, m, q), true);
            entries.push((bits, *a));
        }
    }
    Ok(SparseState::from_entries(n, entries)?)
}

/// Photon from source `s` arriving in temporal mode `m`: amplitude
/// `e^{∓iβx_s} η_q(x_s) / √2` on the `(A|B, m, q)` photonic qubit.
pub fn inject_photon(config: &ProtocolConfig, s: usize, m: usize) -> Result<SparseState, ProtocolError> {
    let eta = config
        .overlaps()
        .eta()
        .get(s)
        .ok_or_else(|| ProtocolError::InvalidConfig(format!("source index {s} out of range")))?;
    let x = config.scene().sources()[s].x;
    let phase = config.aperture().beta() * x;
    let a = Complex64::from_polar(core::f64::consts::FRAC_1_SQRT_2, -phase);
    let b = Complex64::from_polar(core::f64::consts::FRAC_1_SQRT_2, phase);
    let amps: Vec<[Complex64; 2]> = eta.iter().map(|&e| [a * e, b * e]).collect();
    inject_amplitudes(config.layout(), m, &amps)
}

fn require_vacuum(
    state: &SparseState,
    qubits: impl IntoIterator<Item = usize>,
    register: &'static str,
) -> Result<(), ProtocolError> {
    for q in qubits {
        if !state.is_vacuum(q) {
            return Err(ProtocolError::NotVacuum { qubit: q, register });
        }
    }
    Ok(())
}

pub(super) fn memory_qubits(layout: &RegisterLayout) -> impl Iterator<Item = usize> + '_ {
    positions(layout).flat_map(move |(k, i)| Site::BOTH.map(|site| layout.memory(site, k, i)))
}

pub(super) fn ancilla_qubits(layout: &RegisterLayout) -> impl Iterator<Item = usize> + '_ {
    positions(layout).flat_map(move |(k, i)| Site::BOTH.map(|site| layout.ancilla(site, k, i)))
}

/// Every `(k, i)` position, `k` outer.
pub(super) fn positions(layout: &RegisterLayout) -> impl Iterator<Item = (usize, usize)> {
    let kk = layout.spatial_modes();
    (1..=layout.memory_bits()).flat_map(move |k| (0..kk).map(move |i| (k, i)))
}

/// CNOT from photonic qubit `(α, j, i)` to memory qubit `(ᾱ, k, i)` for every
/// binary digit `w_kj = 1`.
pub fn encode(mut state: SparseState, layout: &RegisterLayout) -> Result<SparseState, ProtocolError> {
    require_vacuum(&state, memory_qubits(layout), "memory")?;
    for site in Site::BOTH {
        for j in 1..=layout.temporal_modes() {
            for k in (1..=layout.memory_bits()).filter(|&k| RegisterLayout::digit(j, k)) {
                for i in 0..layout.spatial_modes() {
                    state.apply(Gate::Cnot {
                        control: layout.photonic(site, j, i),
                        target: layout.memory(site, k, i),
                    })?;
                }
            }
        }
    }
    Ok(state)
}

/// Measures the `2K` photonic qubits of temporal mode `m` in `X` (Born-rule
/// sampled) and resets them to `|0⟩`. Photonic qubits of other temporal modes
/// must already be vacuum; they are trivially measured.
pub fn measure_photons<R: Rng + ?Sized>(
    state: SparseState,
    layout: &RegisterLayout,
    m: usize,
    rng: &mut R,
) -> Result<(XResultTable, SparseState), ProtocolError> {
    let machine = Machine::at_phase(*layout, MeasurementMode::Parity, state, m, Phase::Photons(0));
    let done = drive_sampled(machine, rng, |p| !matches!(p, Phase::Photons(_)))?;
    let (table, state) = done.into_table_and_state();
    Ok((table, state))
}

/// Puts every `(C_ki, D_ki)` pair into `φ+`.
pub fn prepare_bell_ancillas(mut state: SparseState, layout: &RegisterLayout) -> Result<SparseState, ProtocolError> {
    require_vacuum(&state, ancilla_qubits(layout), "ancilla")?;
    for (k, i) in positions(layout) {
        let (c, d) = (layout.ancilla(Site::A, k, i), layout.ancilla(Site::B, k, i));
        state.apply(Gate::H(c))?;
        state.apply(Gate::Cnot { control: c, target: d })?;
    }
    Ok(state)
}

/// `CZ(Ā_ki, C_ki) · CZ(B̄_ki, D_ki)` at every position: a single memory
/// excitation flips its Bell pair to `φ-`.
pub fn decode_cz(mut state: SparseState, layout: &RegisterLayout) -> Result<SparseState, ProtocolError> {
    for (k, i) in positions(layout) {
        for site in Site::BOTH {
            state.apply(Gate::Cz(layout.memory(site, k, i), layout.ancilla(site, k, i)))?;
        }
    }
    Ok(state)
}

/// Reads the parity of every Bell pair, decodes `(m, q)` from the flipped
/// positions and returns the collapsed state with the ancillas reset.
pub fn read_flip_pattern<R: Rng + ?Sized>(
    state: SparseState,
    layout: &RegisterLayout,
    mode: MeasurementMode,
    rng: &mut R,
) -> Result<(FlipPattern, SparseState), ProtocolError> {
    let machine = Machine::at_phase(*layout, mode, state, 0, Phase::Flips(0)).assume_prepared();
    let done = drive_sampled(machine, rng, |p| matches!(p, Phase::FSign))?;
    done.into_pattern_and_state()
}

/// The `ζ±` decision on the `N_m` flipped memory pairs of spatial mode `q`,
/// corrected by `f`.
#[allow(clippy::too_many_arguments)]
pub fn zeta_measure<R: Rng + ?Sized>(
    state: SparseState,
    layout: &RegisterLayout,
    m: usize,
    q: usize,
    f: Sign,
    mode: MeasurementMode,
    rng: &mut R,
) -> Result<Sign, ProtocolError> {
    if !(1..=layout.temporal_modes()).contains(&m) || q >= layout.spatial_modes() {
        return Err(ProtocolError::InvalidConfig(format!("(m, q) = ({m}, {q}) outside the layout")));
    }
    let flipped: Vec<usize> = (1..=layout.memory_bits()).filter(|&k| RegisterLayout::digit(m, k)).collect();
    for &k in &flipped {
        let (a, b) = (layout.memory(Site::A, k, q), layout.memory(Site::B, k, q));
        let one_excitation = state.iter().all(|(bits, _)| bits.get(a) != bits.get(b));
        if !one_excitation {
            return Err(ProtocolError::NotOneExcitation(a, b));
        }
    }
    let pattern = FlipPattern { m, q, flipped };
    let machine = Machine::at_zeta(*layout, mode, state, pattern, f);
    let done = drive_sampled(machine, rng, |p| matches!(p, Phase::Done))?;
    Ok(done.sign().expect("zeta phase sets the sign"))
}
