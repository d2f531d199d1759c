//! Command-line interface. Precedence: built-in defaults, then the
//! `--config` file, then flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entscope_core::estimate::SamplingMode;
use entscope_core::modes::BasisKind;
use entscope_core::protocol::Fault;

use crate::commands::{chart, estimate, simulate, validate};
use crate::config::RunConfig;
use crate::error::AppError;
use crate::output::{emit, write_chart_csv, write_estimates_csv, write_json, write_overlap_csv};

#[derive(Debug, Parser)]
#[command(name = "entscope", version, about = "Entanglement-assisted two-telescope interferometry simulator")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Root seed for every random stream.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Primary output file (standard output when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CFI/QFI chart as CSV.
    Chart(ChartArgs),
    /// Protocol runs as a JSON-lines trace plus a JSON summary.
    Simulate(SimulateArgs),
    /// Cramér–Rao attainment experiment as a JSON report.
    Estimate(EstimateArgs),
    /// Oracle and identity checks; exits 3 if any fails.
    Validate(ValidateArgs),
    /// Mode overlap table as CSV (`q,x,gamma,eta`).
    Overlaps(OverlapArgs),
    /// Prints the effective configuration as TOML.
    ShowConfig,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Fast,
    Full,
}

impl From<ModeArg> for SamplingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fast => SamplingMode::Fast,
            ModeArg::Full => SamplingMode::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasisArg {
    PsfAdapted,
    GaussianHg,
}

impl From<BasisArg> for BasisKind {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::PsfAdapted => BasisKind::PsfAdapted,
            BasisArg::GaussianHg => BasisKind::GaussianHg,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FaultArg {
    InvertedFCorrection,
}

/// Instrument overrides shared by several commands.
#[derive(Debug, Args)]
pub struct SetupArgs {
    /// Spatial modes.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Temporal modes per block.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Half-separation in units of σ.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Baseline ratio.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
}

#[derive(Debug, Args)]
pub struct ChartArgs {
    #[arg(long)]
    pub theta_min: Option<f64>,
    #[arg(long)]
    pub theta_max: Option<f64>,
    #[arg(long)]
    pub theta_steps: Option<usize>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub r_steps: Option<usize>,
    /// Mode counts, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub modes: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub photons: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Summary file (standard output when omitted).
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub setup: SetupArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub photons: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Per-trial estimates as `trial,theta_hat` CSV.
    #[arg(long, value_name = "PATH")]
    pub estimates: Option<PathBuf>,
    #[command(flatten)]
    pub setup: SetupArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    /// Positions in units of σ.
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 41)]
    pub x_steps: usize,
    #[command(flatten)]
    pub setup: SetupArgs,
}

fn apply_setup(config: &mut RunConfig, s: &SetupArgs) {
    if let Some(k) = s.k {
        config.basis.modes = k;
    }
    if let Some(m) = s.m {
        config.protocol.temporal_modes = m;
    }
    if let Some(t) = s.theta {
        config.scene.theta_over_sigma = t;
    }
    if let Some(r) = s.r {
        config.aperture.r = r;
    }
    if let Some(b) = s.basis {
        config.basis.kind = b.into();
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Defaults, then the config file, then the flags.
pub fn effective_config(cli: &Cli) -> Result<RunConfig, AppError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut config.seed, cli.seed);
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    match &cli.command {
        Command::Chart(a) => {
            let c = &mut config.chart;
            set(&mut c.theta_min, a.theta_min);
            set(&mut c.theta_max, a.theta_max);
            set(&mut c.theta_steps, a.theta_steps);
            set(&mut c.r_min, a.r_min);
            set(&mut c.r_max, a.r_max);
            set(&mut c.r_steps, a.r_steps);
            set(&mut c.modes, a.modes.clone());
            if let Some(b) = a.basis {
                config.basis.kind = b.into();
            }
            if cli.out.is_some() {
                config.chart.out = cli.out.clone();
            }
        }
        Command::Simulate(a) => {
            apply_setup(&mut config, &a.setup);
            set(&mut config.simulate.photons, a.photons);
            set(&mut config.simulate.mode, a.mode.map(Into::into));
            if cli.out.is_some() {
                config.simulate.out = cli.out.clone();
            }
            if a.summary.is_some() {
                config.simulate.summary = a.summary.clone();
            }
        }
        Command::Estimate(a) => {
            apply_setup(&mut config, &a.setup);
            set(&mut config.estimate.photons, a.photons);
            set(&mut config.estimate.trials, a.trials);
            set(&mut config.estimate.mode, a.mode.map(Into::into));
            if cli.out.is_some() {
                config.estimate.out = cli.out.clone();
            }
            if a.estimates.is_some() {
                config.estimate.estimates = a.estimates.clone();
            }
        }
        Command::Overlaps(a) => apply_setup(&mut config, &a.setup),
        Command::Validate(_) | Command::ShowConfig => {}
    }
    config.validate()?;
    Ok(config)
}

pub fn run(cli: &Cli) -> Result<(), AppError> {
    let config = effective_config(cli)?;
    match &cli.command {
        Command::Chart(_) => {
            let rows = chart::chart(&config)?;
            emit(config.chart.out.as_deref(), |w| write_chart_csv(w, &rows))
        }
        Command::Simulate(_) => {
            let (trace, summary) = simulate::simulate(&config)?;
            if let Some(path) = config.simulate.out.as_deref() {
                emit(Some(path), |w| {
                    for rec in &trace {
                        serde_json::to_writer(&mut *w, rec).map_err(AppError::numerical)?;
                        writeln!(w)?;
                    }
                    Ok(())
                })?;
            }
            emit(config.simulate.summary.as_deref(), |w| write_json(w, &summary))
        }
        Command::Estimate(_) => {
            let (report, estimates) = estimate::estimate(&config)?;
            if let Some(path) = config.estimate.estimates.as_deref() {
                emit(Some(path), |w| write_estimates_csv(w, &estimates))?;
            }
            emit(config.estimate.out.as_deref(), |w| write_json(w, &report))
        }
        Command::Validate(a) => {
            let options = validate::ValidateOptions {
                fault: a.inject_fault.map(|FaultArg::InvertedFCorrection| Fault::InvertedFCorrection),
            };
            let report = validate::validate(&config, options)?;
            if let Some(path) = cli.out.as_deref() {
                emit(Some(path), |w| write_json(w, &report))?;
            }
            print!("{}", report.render());
            if report.passed {
                Ok(())
            } else {
                Err(AppError::Numerical("validation failed".into()))
            }
        }
        Command::Overlaps(a) => {
            if a.x_steps == 0 || !(a.x_min <= a.x_max) {
                return Err(AppError::Config("overlap grid needs x_min ≤ x_max and x_steps ≥ 1".into()));
            }
            let sigma = config.aperture()?.sigma();
            let xs: Vec<f64> = entscope_core::fisher::ChartGrid::linspace(a.x_min, a.x_max, a.x_steps)
                .into_iter()
                .map(|x| x * sigma)
                .collect();
            let basis = config.basis()?;
            emit(cli.out.as_deref(), |w| write_overlap_csv(w, &basis, &xs))
        }
        Command::ShowConfig => {
            let text = config.to_toml()?;
            emit(cli.out.as_deref(), |w| Ok(w.write_all(text.as_bytes())?))
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("entscope: {e}");
            e.exit_code()
        }
    }
}
