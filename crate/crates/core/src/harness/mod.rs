//! Verification harness: exhaustive enumeration, statistical tests and the
//! experiment runner behind the command-line tool.

pub mod enumerate;
pub mod experiment;
pub mod output;
pub mod stats;

pub use enumerate::{enumerate_loops, for_each_geodesic_class, for_each_loop, tail_bound, EnumeratedSpectrum, LoopView};
pub use experiment::{run_experiment, run_to_dir, ExperimentConfig, ExperimentReport, Summary};
pub use stats::{poisson_fit, PoissonFit};

use crate::error::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "LOOPFORGE_THREADS";

/// Runs `f` on a thread pool sized by `LOOPFORGE_THREADS`, or on the global
/// pool when the variable is unset.
pub fn with_thread_limit<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let threads: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| Error::ConfigParse(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Io(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}
