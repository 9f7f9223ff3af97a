//! End-to-end experiments: BER sweeps, fit studies, seeding, configuration
//! and CSV/JSON output.

mod config;
mod fit;
mod output;
mod sweep;

pub use config::{parse_config, ExperimentConfig, Mode, DEFAULT_GRID_DB};
pub use fit::{collect_alpha_parallel, run_fit_study, FitReport, FitStudy};
pub use output::{
    curve_csv, histogram_csv, write_curve_csv, write_histogram_csv, write_json, write_run_metadata,
    CSV_HEADER,
};
pub use sweep::{
    run_sweep, simulate_point, AnalyticFailure, BerCurve, CurveMetadata, CurveRow, SimTally,
    BATCH_TRIALS, TRIAL_BITS,
};

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer: a bijection on `u64` with full avalanche.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `mix64(master ^ mix64(trial + golden))`. For a fixed master the map is a
/// bijection in the trial index and vice versa, so neither argument alone
/// can produce a collision.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    mix64(master_seed ^ mix64(trial_index.wrapping_add(GOLDEN_GAMMA)))
}

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Half-width of the 95% Wilson score interval for `errors` out of `n`.
pub fn wilson_half_width(errors: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Err(Error::invalid("threads", "need at least one worker"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    Ok(pool.install(f))
}

pub(crate) fn unix_time() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
