use entscope_core::fisher::{chart_bases, fisher_point, FisherResult};
use entscope_core::modes::ApertureConfig;
use rayon::prelude::*;

use super::with_threads;
use crate::config::RunConfig;
use crate::error::AppError;

/// CFI/QFI chart rows in grid order, evaluated in parallel.
pub fn chart(config: &RunConfig) -> Result<Vec<FisherResult>, AppError> {
    let grid = config.chart_grid();
    grid.validate().map_err(|e| AppError::Config(format!("chart: {e}")))?;
    let delta = config.aperture.delta;
    let bases = chart_bases(delta, &grid.modes, config.basis.kind, &config.basis.quadrature).map_err(AppError::numerical)?;
    let points: Vec<_> = grid.points().collect();
    with_threads(config, || {
        points
            .par_iter()
            .map(|&(t, r, k)| {
                let basis = &bases.iter().find(|(kk, _)| *kk == k).expect("basis for every K").1;
                let aperture = ApertureConfig::from_ratio(delta, r).map_err(AppError::numerical)?;
                fisher_point(&aperture, basis, t).map_err(AppError::numerical)
            })
            .collect::<Result<Vec<_>, _>>()
    })?
}
