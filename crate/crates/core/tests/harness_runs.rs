use csk_lab::analytic::{ber_rayleigh_mrc, conditional_ber, BerMethod};
use csk_lab::chaos::MapKind;
use csk_lab::harness::{curve_csv, parse_config, run_sweep, simulate_point, with_threads, ExperimentConfig, CSV_HEADER};
use csk_lab::relay::NetworkConfig;
use csk_lab::Error;

fn small_sweep() -> ExperimentConfig {
    parse_config(
        r#"
        seed = 77
        [network]
        map = "pwl"
        beta = 5
        relays = 1
        [sweep]
        grid_db = [0.0, 6.0, 12.0]
        n_bits = 30000
        min_errors = 50
        "#,
    )
    .unwrap()
}

#[test]
fn csv_is_identical_across_runs_and_worker_counts() {
    let cfg = small_sweep();
    let a = curve_csv(&with_threads(1, || run_sweep(&cfg)).unwrap().unwrap());
    let b = curve_csv(&with_threads(3, || run_sweep(&cfg)).unwrap().unwrap());
    let c = curve_csv(&run_sweep(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    let sim: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(sim[1], "simulated");
    assert_eq!(&sim[6..], ["pwl", "5", "1", "77"]);
    let quad: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(quad[1], "quadrature");
    assert_eq!(&quad[3..6], ["", "", ""]);

    let mut other = cfg.clone();
    other.master_seed = 78;
    assert_ne!(curve_csv(&run_sweep(&other).unwrap()), a);
}

#[test]
fn every_grid_point_once_per_method() {
    let curve = run_sweep(&small_sweep()).unwrap();
    for method in [BerMethod::Simulated, BerMethod::Quadrature, BerMethod::MgfPade] {
        let dbs: Vec<f64> = curve.rows(method).map(|r| r.point.eb_n0_db).collect();
        assert_eq!(dbs, vec![0.0, 6.0, 12.0]);
    }
    assert!(curve.failures.is_empty());
    for r in curve.rows(BerMethod::Simulated) {
        assert!(r.ci_half_width.unwrap() > 0.0);
    }
}

#[test]
fn empty_grid_is_a_config_error() {
    let mut cfg = small_sweep();
    cfg.eb_n0_grid_db.clear();
    assert!(matches!(run_sweep(&cfg), Err(Error::Config { .. })));
}

#[test]
fn diversity_ordering_at_15_db() {
    let mut tallies = Vec::new();
    for n in [0usize, 1, 4] {
        let net = NetworkConfig::unit(MapKind::Cpf, 5, n);
        let n0 = net.mean_alpha() / 10f64.powf(1.5);
        tallies.push(simulate_point(&net.with_n0(n0), 1_000_000, 100, 15).unwrap());
    }
    for w in tallies.windows(2) {
        let gap = w[0].ber() - w[1].ber();
        assert!(gap > 3.0 * (w[0].half_width() + w[1].half_width()), "{w:?}");
    }
}

#[test]
fn spreading_factor_mostly_shapes_the_energy_spread() {
    // Average of the conditional BER over collected alpha values: a
    // low-variance estimate of the average BER for each beta.
    let db = 10.0;
    let relays = 1;
    let avg = |beta| {
        let net = NetworkConfig::unit(MapKind::Cpf, beta, relays);
        let n0 = net.mean_alpha() / 10f64.powf(db / 10.0);
        let a = csk_lab::harness::collect_alpha_parallel(&net, 300_000, 16).unwrap();
        a.values.iter().map(|&x| conditional_ber(x, n0).unwrap()).sum::<f64>() / a.values.len() as f64
    };
    let b5 = avg(5);
    let b30 = avg(30);
    let constant = ber_rayleigh_mrc(10f64.powf(db / 10.0), relays + 1);
    assert!((b30 - b5).abs() < (b5 - constant).abs(), "{b5} {b30} {constant}");
}
