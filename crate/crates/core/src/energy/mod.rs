//! Statistics of the received energy `alpha`: sample collection, the
//! generalized gamma model and the competing fading laws.
//!
//! The models describe the envelope `sqrt(alpha)`, so the received energy is
//! the square of a generalized gamma variate. With `m = v = 1` the envelope
//! is Rayleigh and `alpha` is exponential, which lines the fit up with the
//! MGF series used by [`crate::analytic`].

mod candidates;
mod ggamma;
mod ks;

pub use candidates::{
    compare_candidates, fit_nakagami, fit_rayleigh, fit_rician, Candidate, CandidateComparison,
    CandidateFit,
};
pub use ggamma::{fit_ggamma, ggamma_moment, ggamma_pdf, GeneralizedGammaParams, MIN_FIT_SAMPLES};
pub use ks::{ks_from_sorted_cdf, ks_statistic};

use rand::Rng;
use serde::Serialize;

use crate::chaos::generate_sequence;
use crate::chaos::DEFAULT_BURN_IN;
use crate::error::{Error, Result};
use crate::modem::block_energy;
use crate::relay::{ChannelState, NetworkConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSample {
    pub values: Vec<f64>,
    pub config_fingerprint: String,
}

impl AlphaSample {
    /// `sqrt(alpha)` for each value.
    pub fn envelope(&self) -> Vec<f64> {
        self.values.iter().map(|a| a.sqrt()).collect()
    }
}

/// Appends `n_bits` alpha values drawn with `rng` to `out`: one chaotic orbit
/// supplies consecutive bit energies, each bit gets fresh channel draws.
pub(crate) fn extend_alpha<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    n_bits: usize,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> Result<()> {
    let seed = cfg.map.random_seed(rng);
    let chips = generate_sequence(cfg.map, seed, n_bits * cfg.beta, DEFAULT_BURN_IN)?;
    let mut state = ChannelState::draw(cfg, rng)?;
    for (l, block) in chips.chips.chunks_exact(cfg.beta).enumerate() {
        if l > 0 {
            state = ChannelState::draw(cfg, rng)?;
        }
        out.push(state.combining_gain(cfg) * block_energy(block));
    }
    Ok(())
}

pub fn collect_alpha<R: Rng + ?Sized>(cfg: &NetworkConfig, n_bits: usize, rng: &mut R) -> Result<AlphaSample> {
    cfg.validate()?;
    if n_bits == 0 {
        return Err(Error::invalid("n_bits", "must be at least 1"));
    }
    let mut values = Vec::with_capacity(n_bits);
    extend_alpha(cfg, n_bits, rng, &mut values)?;
    Ok(AlphaSample {
        values,
        config_fingerprint: cfg.fingerprint(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub density: f64,
}

const MAX_BINS: usize = 10_000;

/// Density histogram with Freedman-Diaconis bin width `2 IQR n^(-1/3)`.
pub fn histogram_fd(values: &[f64]) -> Result<Vec<HistogramBin>> {
    if values.is_empty() {
        return Err(Error::EmptySamples);
    }
    let s = ks::sorted(values);
    let n = s.len();
    let q = |p: f64| s[((p * (n - 1) as f64).round() as usize).min(n - 1)];
    let (lo, hi) = (s[0], s[n - 1]);
    if hi <= lo {
        return Ok(vec![HistogramBin { left: lo, right: hi, density: f64::INFINITY }]);
    }
    let iqr = q(0.75) - q(0.25);
    let mut width = 2.0 * iqr / (n as f64).cbrt();
    if !(width > 0.0) {
        width = (hi - lo) / (n as f64).sqrt().ceil();
    }
    let bins = (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &s {
        let i = (((x - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| HistogramBin {
            left: lo + i as f64 * width,
            right: lo + (i + 1) as f64 * width,
            density: c as f64 / (n as f64 * width),
        })
        .collect())
}
