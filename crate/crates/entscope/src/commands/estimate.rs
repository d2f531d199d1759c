use entscope_core::estimate::{run_trial, EstimationReport};
use rayon::prelude::*;

use super::with_threads;
use crate::config::RunConfig;
use crate::error::AppError;

/// Cramér–Rao attainment experiment at the configured scene separation.
///
/// Trials run in parallel on their own random streams and are aggregated in
/// trial order, so the report matches the serial experiment exactly.
pub fn estimate(config: &RunConfig) -> Result<(EstimationReport, Vec<f64>), AppError> {
    let setup = config.estimation_setup()?;
    let theta = config.theta()?;
    let e = &config.estimate;
    let estimates = with_threads(config, || {
        (0..e.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(&setup, theta, e.photons, config.seed, t, e.mode, e.search))
            .collect::<Result<Vec<_>, _>>()
    })?
    .map_err(AppError::numerical)?;
    let report =
        EstimationReport::from_estimates(&setup, theta, e.photons, config.seed, e.mode, &estimates).map_err(AppError::numerical)?;
    Ok((report, estimates))
}
