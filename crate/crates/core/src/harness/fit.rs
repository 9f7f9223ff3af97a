use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::derive_trial_seed;
use super::sweep::TRIAL_BITS;
use crate::energy::{compare_candidates, extend_alpha, histogram_fd, AlphaSample, CandidateComparison, HistogramBin};
use crate::error::Result;
use crate::relay::NetworkConfig;

/// Index of the stream that seeds alpha collection, kept apart from the
/// trial streams of the BER simulation.
const ALPHA_STREAM: u64 = u64::MAX;

/// `n` alpha values in chunks of [`TRIAL_BITS`], chunk `k` seeded from the
/// alpha stream of `master_seed`. Identical for any worker count.
pub fn collect_alpha_parallel(net: &NetworkConfig, n: usize, master_seed: u64) -> Result<AlphaSample> {
    net.validate()?;
    if n == 0 {
        return Err(crate::Error::invalid("n_bits", "must be at least 1"));
    }
    let stream = derive_trial_seed(master_seed, ALPHA_STREAM);
    let chunks: Vec<Result<Vec<f64>>> = (0..n.div_ceil(TRIAL_BITS))
        .into_par_iter()
        .map(|k| {
            let len = TRIAL_BITS.min(n - k * TRIAL_BITS);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(stream, k as u64));
            let mut out = Vec::with_capacity(len);
            extend_alpha(net, len, &mut rng, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut values = Vec::with_capacity(n);
    for c in chunks {
        values.extend(c?);
    }
    Ok(AlphaSample { values, config_fingerprint: net.fingerprint() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub map: String,
    pub beta: usize,
    pub n_relays: usize,
    pub n_samples: usize,
    pub v: f64,
    pub m: f64,
    pub omega: f64,
    pub ks_ggamma: f64,
    pub ks_rayleigh: f64,
    pub ks_rician: f64,
    pub ks_nakagami: f64,
}

#[derive(Debug, Clone)]
pub struct FitStudy {
    pub report: FitReport,
    /// Density histogram of the envelope `sqrt(alpha)`, the variable the
    /// candidate laws describe.
    pub histogram: Vec<HistogramBin>,
    pub comparison: CandidateComparison,
}

/// Collects `n_bits` alpha samples and fits all four candidate laws to
/// their envelope.
pub fn run_fit_study(cfg: &ExperimentConfig) -> Result<FitStudy> {
    cfg.validate()?;
    let net = &cfg.network;
    let alpha = collect_alpha_parallel(net, cfg.n_bits, cfg.master_seed)?;
    let envelope = alpha.envelope();
    let comparison = compare_candidates(&envelope)?;
    let ks = |name| comparison.ks(name).expect("all four families are fitted");
    let gg = comparison.ggamma;
    let report = FitReport {
        map: net.map.name().into(),
        beta: net.beta,
        n_relays: net.n_relays,
        n_samples: envelope.len(),
        v: gg.v,
        m: gg.m,
        omega: gg.omega,
        ks_ggamma: ks("ggamma"),
        ks_rayleigh: ks("rayleigh"),
        ks_rician: ks("rician"),
        ks_nakagami: ks("nakagami"),
    };
    Ok(FitStudy { report, histogram: histogram_fd(&envelope)?, comparison })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::MapKind;
    use crate::harness::{with_threads, Mode};

    #[test]
    fn alpha_mean_for_five_relays() {
        let net = NetworkConfig::unit(MapKind::Cpf, 10, 5);
        let a = collect_alpha_parallel(&net, 200_000, 5).unwrap();
        let mean = a.values.iter().sum::<f64>() / a.values.len() as f64;
        assert!((mean / 60.0 - 1.0).abs() < 0.02, "{mean}");
        assert!(a.values.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn alpha_collection_independent_of_workers() {
        let net = NetworkConfig::unit(MapKind::Cpf, 5, 1);
        let a = with_threads(1, || collect_alpha_parallel(&net, 25_001, 8)).unwrap().unwrap();
        let b = with_threads(4, || collect_alpha_parallel(&net, 25_001, 8)).unwrap().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values.len(), 25_001);
    }

    #[test]
    fn small_fit_study_runs() {
        let mut cfg = ExperimentConfig::defaults();
        cfg.mode = Mode::Fit;
        cfg.n_bits = 20_000;
        cfg.network = NetworkConfig::unit(MapKind::Cpf, 10, 2);
        let s = run_fit_study(&cfg).unwrap();
        assert_eq!(s.report.n_samples, 20_000);
        assert!(s.report.ks_ggamma < s.report.ks_rayleigh);
        cfg.n_bits = 999;
        assert!(run_fit_study(&cfg).is_err());
    }
}
