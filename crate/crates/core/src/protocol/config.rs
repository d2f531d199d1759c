use alloc::format;

use super::ProtocolError;
use crate::modes::{overlaps, ApertureConfig, ModeBasis, OverlapTable, Scene};
use crate::statevec::{RegisterLayout, DEFAULT_BRANCH_CAP};

/// How parities of qubit pairs are read out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum MeasurementMode {
    /// Joint `X⊗X` measurement per pair: one binary branch per pair.
    #[default]
    Parity,
    /// Every qubit measured in `X`; parities are products of the results.
    Individual,
}

/// Whether every block carries exactly one photon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Conditioning {
    #[default]
    Conditional,
    /// Blocks are empty with probability `1 - Mε`.
    Unconditional,
}

/// Deliberate defects used to check that the validation suite notices them.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Applies the sign flip when `f = +1` instead of `f = -1`.
    InvertedFCorrection,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOptions {
    pub measurement: MeasurementMode,
    pub conditioning: Conditioning,
    pub branch_cap: usize,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            measurement: MeasurementMode::Parity,
            conditioning: Conditioning::Conditional,
            branch_cap: DEFAULT_BRANCH_CAP,
            fault: None,
        }
    }
}

/// Everything one protocol run needs. Overlaps are computed once here.
#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    aperture: ApertureConfig,
    basis: ModeBasis,
    scene: Scene,
    temporal_modes: usize,
    epsilon: f64,
    options: PipelineOptions,
    overlaps: OverlapTable,
    layout: RegisterLayout,
}

impl ProtocolConfig {
    pub fn new(
        aperture: ApertureConfig,
        basis: ModeBasis,
        scene: Scene,
        temporal_modes: usize,
        epsilon: f64,
    ) -> Result<Self, ProtocolError> {
        if temporal_modes == 0 {
            return Err(ProtocolError::InvalidConfig("M must be at least 1".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 0.1) {
            return Err(ProtocolError::InvalidConfig(format!("epsilon {epsilon} outside (0, 0.1]")));
        }
        let table = overlaps(&basis, &scene)?;
        let layout = RegisterLayout::new(temporal_modes, basis.len());
        Ok(Self {
            aperture,
            basis,
            scene,
            temporal_modes,
            epsilon,
            options: PipelineOptions::default(),
            overlaps: table,
            layout,
        })
    }

    pub fn with_options(mut self, options: PipelineOptions) -> Result<Self, ProtocolError> {
        if options.conditioning == Conditioning::Unconditional
            && self.temporal_modes as f64 * self.epsilon > 0.5
        {
            return Err(ProtocolError::InvalidConfig(format!(
                "unconditional mode needs M·ε ≤ 0.5, got {}",
                self.temporal_modes as f64 * self.epsilon
            )));
        }
        self.options = options;
        Ok(self)
    }

    pub fn aperture(&self) -> &ApertureConfig {
        &self.aperture
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    /// `M`.
    pub fn temporal_modes(&self) -> usize {
        self.temporal_modes
    }

    /// `K`.
    pub fn spatial_modes(&self) -> usize {
        self.basis.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn options(&self) -> &PipelineOptions {
        &self.options
    }

    pub fn overlaps(&self) -> &OverlapTable {
        &self.overlaps
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }
}
