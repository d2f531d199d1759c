//! Run configuration: a TOML file with a `schema_version`, overridden by
//! command-line flags.

use std::path::{Path, PathBuf};

use entscope_core::estimate::{EstimationSetup, MleSearch, SamplingMode, MIN_TRIALS};
use entscope_core::fisher::ChartGrid;
use entscope_core::modes::{build_basis_with, ApertureConfig, BasisKind, ModeBasis, QuadratureSpec, Scene};
use entscope_core::protocol::{Conditioning, MeasurementMode, PipelineOptions, ProtocolConfig};
use entscope_core::statevec::DEFAULT_BRANCH_CAP;
use serde::{Deserialize, Serialize};

use crate::error::AppError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub aperture: ApertureSection,
    pub basis: BasisSection,
    pub scene: SceneSection,
    pub protocol: ProtocolSection,
    pub chart: ChartSection,
    pub simulate: SimulateSection,
    pub estimate: EstimateSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApertureSection {
    /// Pupil width `δ`; `σ = 2π/δ`.
    pub delta: f64,
    /// Baseline ratio `r = 2β/δ`.
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSection {
    pub kind: BasisKind,
    #[serde(rename = "K")]
    pub modes: usize,
    pub quadrature: QuadratureSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    /// Half-separation `θ` of the pair at `±θ`, in units of `σ`.
    pub theta_over_sigma: f64,
    /// Brightness of the source at `-θ`.
    pub b_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(rename = "M")]
    pub temporal_modes: usize,
    pub epsilon: f64,
    pub measurement: MeasurementMode,
    pub conditioning: Conditioning,
    pub branch_cap: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartSection {
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_steps: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub r_steps: usize,
    pub modes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub photons: u64,
    pub mode: SamplingMode,
    /// JSON-lines trace.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSection {
    pub photons: u64,
    pub trials: usize,
    pub mode: SamplingMode,
    pub search: MleSearch,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// `trial,theta_hat` CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 2026,
            threads: None,
            aperture: ApertureSection::default(),
            basis: BasisSection::default(),
            scene: SceneSection::default(),
            protocol: ProtocolSection::default(),
            chart: ChartSection::default(),
            simulate: SimulateSection::default(),
            estimate: EstimateSection::default(),
        }
    }
}

impl Default for ApertureSection {
    fn default() -> Self {
        Self { delta: 1.0, r: 2.0 }
    }
}

impl Default for BasisSection {
    fn default() -> Self {
        Self {
            kind: BasisKind::PsfAdapted,
            modes: 2,
            quadrature: QuadratureSpec::default(),
        }
    }
}

impl Default for SceneSection {
    fn default() -> Self {
        Self {
            theta_over_sigma: 0.1,
            b_minus: 0.5,
        }
    }
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            temporal_modes: 1,
            epsilon: 0.01,
            measurement: MeasurementMode::Parity,
            conditioning: Conditioning::Conditional,
            branch_cap: DEFAULT_BRANCH_CAP,
        }
    }
}

impl Default for ChartSection {
    fn default() -> Self {
        Self {
            theta_min: 0.02,
            theta_max: 0.9,
            theta_steps: 23,
            r_min: 0.0,
            r_max: 5.0,
            r_steps: 6,
            modes: vec![1, 2, 4, 8],
            out: None,
        }
    }
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            photons: 100_000,
            mode: SamplingMode::Full,
            out: None,
            summary: None,
        }
    }
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self {
            photons: 10_000,
            trials: 200,
            mode: SamplingMode::Fast,
            search: MleSearch::default(),
            out: None,
            estimates: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> AppError {
    AppError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, AppError> {
        let config: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, AppError> {
        toml::to_string(self).map_err(|e| invalid(e.to_string()))
    }

    pub fn aperture(&self) -> Result<ApertureConfig, AppError> {
        ApertureConfig::from_ratio(self.aperture.delta, self.aperture.r).map_err(|e| invalid(e.to_string()))
    }

    pub fn basis(&self) -> Result<ModeBasis, AppError> {
        build_basis_with(&self.aperture()?, self.basis.modes, self.basis.kind, &self.basis.quadrature)
            .map_err(|e| invalid(e.to_string()))
    }

    pub fn theta(&self) -> Result<f64, AppError> {
        Ok(self.scene.theta_over_sigma * self.aperture()?.sigma())
    }

    pub fn pipeline_options(&self) -> PipelineOptions {
        PipelineOptions {
            measurement: self.protocol.measurement,
            conditioning: self.protocol.conditioning,
            branch_cap: self.protocol.branch_cap,
            fault: None,
        }
    }

    pub fn protocol_config(&self) -> Result<ProtocolConfig, AppError> {
        let scene = Scene::two_point_weighted(self.theta()?, self.scene.b_minus).map_err(|e| invalid(e.to_string()))?;
        ProtocolConfig::new(self.aperture()?, self.basis()?, scene, self.protocol.temporal_modes, self.protocol.epsilon)
            .and_then(|c| c.with_options(self.pipeline_options()))
            .map_err(|e| invalid(e.to_string()))
    }

    pub fn estimation_setup(&self) -> Result<EstimationSetup, AppError> {
        Ok(EstimationSetup {
            aperture: self.aperture()?,
            basis: self.basis()?,
            temporal_modes: self.protocol.temporal_modes,
            epsilon: self.protocol.epsilon,
            options: self.pipeline_options(),
        })
    }

    pub fn chart_grid(&self) -> ChartGrid {
        let c = &self.chart;
        ChartGrid {
            theta_over_sigma: ChartGrid::linspace(c.theta_min, c.theta_max, c.theta_steps),
            r: ChartGrid::linspace(c.r_min, c.r_max, c.r_steps),
            modes: c.modes.clone(),
        }
    }

    /// Checks every section against the invariants of the modules it feeds.
    pub fn validate(&self) -> Result<(), AppError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }
        if !(self.scene.theta_over_sigma > 0.0 && self.scene.theta_over_sigma.is_finite()) {
            return Err(invalid("scene.theta_over_sigma must be positive"));
        }
        self.protocol_config()?;
        let c = &self.chart;
        if c.theta_min > c.theta_max || c.r_min > c.r_max {
            return Err(invalid("chart grid minimum exceeds maximum"));
        }
        self.chart_grid().validate().map_err(|e| invalid(format!("chart: {e}")))?;
        let e = &self.estimate;
        if e.photons == 0 {
            return Err(invalid("estimate.photons must be at least 1"));
        }
        if e.trials < MIN_TRIALS {
            return Err(invalid(format!("estimate.trials must be at least {MIN_TRIALS}")));
        }
        let s = e.search;
        if !(s.theta_max > 0.0 && s.theta_max.is_finite() && s.grid_points >= 2 && s.tolerance > 0.0) {
            return Err(invalid("estimate.search needs theta_max > 0, grid_points ≥ 2, tolerance > 0"));
        }
        Ok(())
    }
}
