//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::Instant;

use csk_lab::analytic::{
    ber_mgf, ber_quadrature, ber_rayleigh, mgf_eval, mgf_quadrature, q_function, BerMethod, MgfSeries,
    DEFAULT_PADE_ORDER, DEFAULT_SERIES_TERMS,
};
use csk_lab::chaos::{generate_sequence, raw_orbit, sequence_stats, MapKind, DEFAULT_BURN_IN};
use csk_lab::energy::GeneralizedGammaParams;
use csk_lab::harness::{curve_csv, run_fit_study, run_sweep, with_threads, ExperimentConfig, Mode};
use csk_lab::relay::{transmit_symbol, ChannelState, NetworkConfig, Scratch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn maps() -> [MapKind; 2] {
    [MapKind::Cpf, MapKind::pwl_default()]
}

/// Simulated BER within 3 Wilson half-widths of the quadrature BER wherever
/// the simulated BER is at least 1e-4.
fn simulated_matches_analytic() -> Outcome {
    let mut worst: (f64, String) = (0.0, String::new());
    let mut checked = 0;
    let mut failures = Vec::new();
    for map in maps() {
        for beta in [5, 15, 30] {
            for relays in [1, 4] {
                let mut cfg = ExperimentConfig::defaults();
                cfg.network = NetworkConfig::unit(map, beta, relays);
                cfg.eb_n0_grid_db = vec![0.0, 5.0, 10.0, 15.0];
                cfg.n_bits = 1_000_000;
                cfg.master_seed = 2024;
                let curve = run_sweep(&cfg).map_err(|e| e.to_string())?;
                for &db in &cfg.eb_n0_grid_db {
                    let sim = curve.row(BerMethod::Simulated, db).ok_or("missing simulated row")?;
                    if sim.point.ber < 1e-4 {
                        continue;
                    }
                    let label = format!("{map} beta={beta} N={relays} {db} dB");
                    let Some(quad) = curve.row(BerMethod::Quadrature, db) else {
                        failures.push(format!("{label}: no quadrature value"));
                        continue;
                    };
                    let z = (sim.point.ber - quad.point.ber).abs() / sim.ci_half_width.unwrap();
                    checked += 1;
                    if z > worst.0 {
                        worst = (z, label.clone());
                    }
                    if z > 3.0 {
                        failures.push(format!("{label}: {:.3e} vs {:.3e} ({z:.2} half-widths)", sim.point.ber, quad.point.ber));
                    }
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{checked} points, worst {:.2} half-widths at {}", worst.0, worst.1))
    } else {
        Err(failures.join("; "))
    }
}

fn ggamma_fits_best() -> Outcome {
    let mut notes = Vec::new();
    for map in maps() {
        let mut cfg = ExperimentConfig::defaults();
        cfg.mode = Mode::Fit;
        cfg.network = NetworkConfig::unit(map, 10, 5);
        cfg.n_bits = 1_000_000;
        cfg.master_seed = 10;
        let r = run_fit_study(&cfg).map_err(|e| e.to_string())?.report;
        let line = format!(
            "{map}: ggamma {:.4} rayleigh {:.4} rician {:.4} nakagami {:.4}",
            r.ks_ggamma, r.ks_rayleigh, r.ks_rician, r.ks_nakagami
        );
        if !(r.ks_ggamma < r.ks_rayleigh && r.ks_ggamma < r.ks_rician && r.ks_ggamma < r.ks_nakagami) {
            return Err(line);
        }
        notes.push(line);
    }
    Ok(notes.join("; "))
}

fn rayleigh_closed_form() -> Outcome {
    let p = GeneralizedGammaParams::new(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for db in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let g = 10f64.powf(db / 10.0);
        let exact = ber_rayleigh(g);
        let quad = ber_quadrature(&p, 1.0 / g).map_err(|e| e.to_string())?.ber;
        let series = MgfSeries::new(&p, g, DEFAULT_SERIES_TERMS).map_err(|e| e.to_string())?;
        let mgf = ber_mgf(&series, DEFAULT_PADE_ORDER).map_err(|e| e.to_string())?.ber;
        for (name, v) in [("quadrature", quad), ("mgf", mgf)] {
            let d = (v - exact).abs();
            worst = worst.max(d);
            if d > 1e-4 {
                return Err(format!("{name} at {db} dB: {v} vs {exact}"));
            }
        }
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn decision_statistic_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut scratch = Scratch::default();
    let (mut worst_mean, mut worst_var) = (0.0f64, 0.0f64);
    for k in 0..10 {
        let mut cfg = NetworkConfig::unit(MapKind::Cpf, 10, if k % 2 == 0 { 1 } else { 4 });
        cfg.n0 = cfg.mean_alpha() / 10.0;
        let state = ChannelState::draw(&cfg, &mut rng).map_err(|e| e.to_string())?;
        let seed = cfg.map.random_seed(&mut rng);
        let chips = generate_sequence(cfg.map, seed, cfg.beta, DEFAULT_BURN_IN).map_err(|e| e.to_string())?;
        let s: i8 = if rng.random::<bool>() { 1 } else { -1 };
        let u: Vec<f64> = chips.chips.iter().map(|x| s as f64 * x).collect();
        let n = 100_000;
        let values: Vec<f64> = (0..n)
            .map(|i| transmit_symbol(&cfg, &state, &u, &chips.chips, s, i, &mut rng, &mut scratch).correlator_value)
            .collect();
        let rec = transmit_symbol(&cfg, &state, &u, &chips.chips, s, 0, &mut rng, &mut scratch);
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let em = (mean / rec.analytic_mean - 1.0).abs();
        let ev = (var / rec.analytic_variance - 1.0).abs();
        worst_mean = worst_mean.max(em);
        worst_var = worst_var.max(ev);
        if em > 0.01 || ev > 0.02 {
            return Err(format!("realization {k}: mean off {em:.4}, variance off {ev:.4}"));
        }
    }
    Ok(format!("worst relative error: mean {worst_mean:.4}, variance {worst_var:.4}"))
}

fn conditional_ber_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut scratch = Scratch::default();
    let mut notes = Vec::new();
    for ratio in [0.5, 2.0, 5.0] {
        let mut cfg = NetworkConfig::unit(MapKind::Cpf, 10, 1);
        let state = ChannelState::draw(&cfg, &mut rng).map_err(|e| e.to_string())?;
        let chips = generate_sequence(cfg.map, 0.3, cfg.beta, DEFAULT_BURN_IN).map_err(|e| e.to_string())?;
        let e_b: f64 = chips.chips.iter().map(|x| x * x).sum();
        cfg.n0 = state.combining_gain(&cfg) * e_b / ratio;
        let n = 1_000_000;
        let errors = (0..n)
            .filter(|&i| transmit_symbol(&cfg, &state, &chips.chips, &chips.chips, 1, i, &mut rng, &mut scratch).is_error())
            .count();
        let p = q_function((2.0 * ratio).sqrt());
        let ser = errors as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let z = (ser - p) / sigma;
        if z.abs() > 3.0 {
            return Err(format!("alpha/N0 = {ratio}: {ser} vs {p} ({z:.2} sigma)"));
        }
        notes.push(format!("{ratio}: {z:+.2} sigma"));
    }
    Ok(notes.join(", "))
}

fn chaotic_statistics() -> Outcome {
    let mut notes = Vec::new();
    for map in maps() {
        let s = generate_sequence(map, 0.3, 1_000_000, DEFAULT_BURN_IN).map_err(|e| e.to_string())?;
        let (m, v) = sequence_stats(&s).map_err(|e| e.to_string())?;
        if m.abs() >= 0.02 || (v - 1.0).abs() >= 0.05 {
            return Err(format!("{map}: mean {m}, variance {v}"));
        }
        notes.push(format!("{map} mean {m:+.4} var {v:.4}"));
    }
    let edges: Vec<f64> = (0..=10).map(|k| -(std::f64::consts::PI * k as f64 / 10.0).cos()).collect();
    let raw = raw_orbit(&MapKind::Cpf, 0.3, 1_000_000, DEFAULT_BURN_IN).map_err(|e| e.to_string())?;
    let mut counts = [0usize; 10];
    for x in &raw {
        counts[edges[1..10].iter().take_while(|&&e| *x >= e).count()] += 1;
    }
    let worst = counts
        .iter()
        .map(|&c| (c as f64 / raw.len() as f64 / 0.1 - 1.0).abs())
        .fold(0.0, f64::max);
    if worst >= 0.05 {
        return Err(format!("arcsine deciles off by {worst:.4}: {counts:?}"));
    }
    notes.push(format!("arcsine deciles within {worst:.4}"));
    Ok(notes.join("; "))
}

fn mgf_series_reduction() -> Outcome {
    let p = GeneralizedGammaParams::new(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for g in [0.5, 1.0, 4.77, 10.0] {
        let s = MgfSeries::new(&p, g, DEFAULT_SERIES_TERMS).map_err(|e| e.to_string())?;
        for (n, c) in s.coefficients.iter().enumerate() {
            let want = (-g).powi(n as i32);
            if (c - want).abs() > 1e-12 * want.abs() {
                return Err(format!("gamma_bar {g}: c_{n} = {c}, expected {want}"));
            }
        }
        for i in 0..=100 {
            let eps = -5.0 * i as f64 / 100.0;
            let pade = mgf_eval(eps, &s, DEFAULT_PADE_ORDER).map_err(|e| e.to_string())?;
            let oracle = mgf_quadrature(eps, &p, 1.0 / g).map_err(|e| e.to_string())?;
            let d = (pade - oracle).abs();
            worst = worst.max(d);
            if d > 1e-6 {
                return Err(format!("gamma_bar {g}, eps {eps}: {pade} vs {oracle}"));
            }
        }
    }
    Ok(format!("coefficients geometric; max |Pade - quadrature| {worst:.2e}"))
}

fn thread_count_determinism() -> Outcome {
    let mut cfg = ExperimentConfig::defaults();
    cfg.network = NetworkConfig::unit(MapKind::pwl_default(), 15, 4);
    cfg.eb_n0_grid_db = vec![0.0, 5.0, 10.0];
    cfg.n_bits = 100_000;
    cfg.master_seed = 8;
    let reference = curve_csv(&with_threads(1, || run_sweep(&cfg)).map_err(|e| e.to_string())?.map_err(|e| e.to_string())?);
    for threads in [2, 4, 7] {
        let csv = curve_csv(&with_threads(threads, || run_sweep(&cfg)).map_err(|e| e.to_string())?.map_err(|e| e.to_string())?);
        if csv != reference {
            return Err(format!("CSV differs between 1 and {threads} threads"));
        }
    }
    Ok(format!("{} bytes identical for 1, 2, 4, 7 threads", reference.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("simulated BER within 3 Wilson half-widths of quadrature BER", simulated_matches_analytic),
        ("generalized gamma has the smallest KS distance", ggamma_fits_best),
        ("Rayleigh closed form via quadrature and MGF", rayleigh_closed_form),
        ("correlator mean and variance laws", decision_statistic_laws),
        ("conditional BER law", conditional_ber_law),
        ("chaotic sequence statistics", chaotic_statistics),
        ("MGF series reduction and Pade accuracy", mgf_series_reduction),
        ("byte-identical CSV across thread counts", thread_count_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS: {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL: {name} ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
