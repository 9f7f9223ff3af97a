use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::fit::collect_alpha_parallel;
use super::{derive_trial_seed, unix_time, wilson_half_width};
use crate::analytic::{ber_mgf, ber_quadrature, BerMethod, BerPoint, MgfSeries, DEFAULT_PADE_ORDER, DEFAULT_SERIES_TERMS};
use crate::chaos::{generate_sequence, DEFAULT_BURN_IN};
use crate::energy::{fit_ggamma, GeneralizedGammaParams};
use crate::error::Result;
use crate::modem::SymbolFrame;
use crate::relay::{transmit_frame, NetworkConfig};

/// Bits per independently seeded trial.
pub const TRIAL_BITS: usize = 10_000;
/// Trials run between early-stopping checks. Fixed so that the stopping
/// point never depends on the worker count.
pub const BATCH_TRIALS: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SimTally {
    pub bits: u64,
    pub errors: u64,
}

impl SimTally {
    pub fn ber(&self) -> f64 {
        self.errors as f64 / self.bits as f64
    }

    pub fn half_width(&self) -> f64 {
        wilson_half_width(self.errors, self.bits)
    }
}

fn simulate_trial(net: &NetworkConfig, master_seed: u64, trial: u64, bits: usize) -> Result<SimTally> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(master_seed, trial));
    let seed = net.map.random_seed(&mut rng);
    let chips = generate_sequence(net.map, seed, bits * net.beta, DEFAULT_BURN_IN)?;
    let frame = SymbolFrame::random(bits, net.beta, &mut rng)?;
    let records = transmit_frame(net, &frame, &chips, &mut rng)?;
    Ok(SimTally {
        bits: bits as u64,
        errors: records.iter().filter(|r| r.is_error()).count() as u64,
    })
}

/// Monte Carlo BER at the noise level in `net`. Trial `t` always uses the
/// seed `derive_trial_seed(master_seed, t)`, so grid points share their
/// random numbers. Stops after a batch once `n_bits / 10` bits and
/// `min_errors` errors have been seen.
pub fn simulate_point(net: &NetworkConfig, n_bits: usize, min_errors: usize, master_seed: u64) -> Result<SimTally> {
    net.validate()?;
    let n_trials = n_bits.div_ceil(TRIAL_BITS);
    let mut tally = SimTally::default();
    let mut start = 0;
    while start < n_trials {
        let end = (start + BATCH_TRIALS).min(n_trials);
        let parts: Vec<Result<SimTally>> = (start..end)
            .into_par_iter()
            .map(|t| {
                let bits = TRIAL_BITS.min(n_bits - t * TRIAL_BITS);
                simulate_trial(net, master_seed, t as u64, bits)
            })
            .collect();
        for p in parts {
            let p = p?;
            tally.bits += p.bits;
            tally.errors += p.errors;
        }
        start = end;
        if tally.bits >= (n_bits / 10) as u64 && tally.errors >= min_errors as u64 {
            break;
        }
    }
    Ok(tally)
}

/// One CSV line of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub point: BerPoint,
    pub ci_half_width: Option<f64>,
    pub n_bits: Option<u64>,
    pub n_errors: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticFailure {
    pub eb_n0_db: f64,
    pub method: BerMethod,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveMetadata {
    pub config_fingerprint: String,
    pub map: String,
    pub beta: usize,
    pub n_relays: usize,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub fit: Option<GeneralizedGammaParams>,
    pub fit_error: Option<String>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerCurve {
    pub points: Vec<CurveRow>,
    /// Analytic evaluations that failed; they have no row in `points`.
    pub failures: Vec<AnalyticFailure>,
    pub metadata: CurveMetadata,
}

impl BerCurve {
    pub fn rows(&self, method: BerMethod) -> impl Iterator<Item = &CurveRow> {
        self.points.iter().filter(move |r| r.point.method == method)
    }

    pub fn row(&self, method: BerMethod, eb_n0_db: f64) -> Option<&CurveRow> {
        self.rows(method).find(|r| r.point.eb_n0_db == eb_n0_db)
    }
}

/// Noise density giving `Eb/N0 = E[alpha] / N0` of `db`.
pub(crate) fn n0_for(net: &NetworkConfig, db: f64) -> f64 {
    net.mean_alpha() / 10f64.powf(db / 10.0)
}

fn analytic_rows(fit: &GeneralizedGammaParams, db: f64, n0: f64) -> Vec<std::result::Result<BerPoint, AnalyticFailure>> {
    let fail = |method, e: crate::Error| AnalyticFailure { eb_n0_db: db, method, error: e.to_string() };
    let quad = ber_quadrature(fit, n0).map_err(|e| fail(BerMethod::Quadrature, e));
    let mgf = MgfSeries::for_noise(fit, n0, DEFAULT_SERIES_TERMS)
        .and_then(|s| ber_mgf(&s, DEFAULT_PADE_ORDER))
        .map_err(|e| fail(BerMethod::MgfPade, e));
    [quad, mgf]
        .into_iter()
        .map(|r| r.map(|p| BerPoint { eb_n0_db: db, ..p }))
        .collect()
}

/// Simulated and analytic BER over the configured grid.
///
/// The analytic rows come from a generalized gamma fit to `n_bits` samples
/// of the envelope `sqrt(alpha)`; failures there are collected in
/// [`BerCurve::failures`] and do not abort the sweep.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<BerCurve> {
    cfg.validate()?;
    let started = unix_time();
    let net = &cfg.network;

    let (fit, fit_error) = match collect_alpha_parallel(net, cfg.n_bits, cfg.master_seed)
        .and_then(|a| fit_ggamma(&a.envelope()))
    {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for &db in &cfg.eb_n0_grid_db {
        let n0 = n0_for(net, db);
        let point_net = net.clone().with_n0(n0);
        let tally = simulate_point(&point_net, cfg.n_bits, cfg.min_errors, cfg.master_seed)?;
        points.push(CurveRow {
            point: BerPoint { eb_n0_db: db, ber: tally.ber(), method: BerMethod::Simulated, diagnostics: None },
            ci_half_width: Some(tally.half_width()),
            n_bits: Some(tally.bits),
            n_errors: Some(tally.errors),
        });
        match &fit {
            Some(fit) => {
                for r in analytic_rows(fit, db, n0) {
                    match r {
                        Ok(point) => points.push(CurveRow { point, ci_half_width: None, n_bits: None, n_errors: None }),
                        Err(f) => failures.push(f),
                    }
                }
            }
            None => {
                for method in [BerMethod::Quadrature, BerMethod::MgfPade] {
                    failures.push(AnalyticFailure {
                        eb_n0_db: db,
                        method,
                        error: format!("no fit: {}", fit_error.as_deref().unwrap_or("")),
                    });
                }
            }
        }
    }

    Ok(BerCurve {
        points,
        failures,
        metadata: CurveMetadata {
            config_fingerprint: net.fingerprint(),
            map: net.map.name().into(),
            beta: net.beta,
            n_relays: net.n_relays,
            seed: cfg.master_seed,
            started_unix: started,
            finished_unix: unix_time(),
            fit,
            fit_error,
            config: cfg.clone(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::MapKind;

    #[test]
    fn early_stop_respects_floor_and_batches() {
        let net = NetworkConfig::unit(MapKind::Cpf, 5, 0).with_n0(n0_for(&NetworkConfig::unit(MapKind::Cpf, 5, 0), 0.0));
        let t = simulate_point(&net, 1_000_000, 100, 3).unwrap();
        // BER ~ 0.15 at 0 dB: the first batch already has far more than 100
        // errors, but n_bits / 10 bits are needed.
        assert_eq!(t.bits, (BATCH_TRIALS * 2 * TRIAL_BITS) as u64);
        assert!(t.errors > 1000);
    }

    #[test]
    fn partial_last_trial() {
        let net = NetworkConfig::unit(MapKind::Cpf, 5, 1).with_n0(1.0);
        let t = simulate_point(&net, 12_345, 1_000_000, 3).unwrap();
        assert_eq!(t.bits, 12_345);
    }

    #[test]
    fn tally_independent_of_workers() {
        let net = NetworkConfig::unit(MapKind::pwl_default(), 5, 1).with_n0(2.0);
        let a = super::super::with_threads(1, || simulate_point(&net, 50_000, 10, 9)).unwrap().unwrap();
        let b = super::super::with_threads(3, || simulate_point(&net, 50_000, 10, 9)).unwrap().unwrap();
        assert_eq!(a, b);
    }
}
