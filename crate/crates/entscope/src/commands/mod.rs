//! Subcommand implementations. Each takes a validated [`RunConfig`] and
//! returns its result; the CLI layer handles flags and files.

pub mod chart;
pub mod estimate;
pub mod simulate;
pub mod validate;

use crate::config::RunConfig;
use crate::error::AppError;

/// Runs `f` on a pool with the configured thread count, or on the global pool.
pub fn with_threads<T: Send>(config: &RunConfig, f: impl FnOnce() -> T + Send) -> Result<T, AppError> {
    match config.threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| AppError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
