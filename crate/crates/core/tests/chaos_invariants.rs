use csk_lab::chaos::{generate_sequence, pwl_iterate, raw_orbit, sequence_stats, MapKind, DEFAULT_BURN_IN};
use proptest::prelude::*;

fn maps() -> [MapKind; 2] {
    [MapKind::Cpf, MapKind::pwl_default()]
}

#[test]
fn raw_orbits_stay_in_the_unit_interval() {
    for map in maps() {
        for seed in [0.3, -0.77, 0.123_456] {
            let orbit = raw_orbit(&map, seed, 1_000_000, 0).unwrap();
            assert!(orbit.iter().all(|x| x.abs() <= 1.0), "{map} from {seed}");
        }
    }
}

#[test]
fn nearby_seeds_decorrelate() {
    for map in maps() {
        let a = generate_sequence(map, 0.3, 10_000, 100).unwrap();
        let b = generate_sequence(map, 0.3 + 1e-9, 10_000, 100).unwrap();
        let (ma, va) = sequence_stats(&a).unwrap();
        let (mb, vb) = sequence_stats(&b).unwrap();
        let cov = a.chips.iter().zip(&b.chips).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / 10_000.0;
        let rho = cov / (va * vb).sqrt();
        assert!(rho.abs() < 0.1, "{map}: {rho}");
    }
}

#[test]
fn cpf_chips_follow_the_arcsine_law() {
    // Deciles of the density 1 / (pi sqrt(1 - x^2)): x_k = -cos(pi k / 10).
    let edges: Vec<f64> = (0..=10).map(|k| -(std::f64::consts::PI * k as f64 / 10.0).cos()).collect();
    let orbit = raw_orbit(&MapKind::Cpf, 0.3, 1_000_000, DEFAULT_BURN_IN).unwrap();
    let mut counts = [0usize; 10];
    for x in &orbit {
        let k = edges[1..10].iter().take_while(|&&e| *x >= e).count();
        counts[k] += 1;
    }
    for c in counts {
        let frac = c as f64 / orbit.len() as f64;
        assert!((frac / 0.1 - 1.0).abs() < 0.05, "{counts:?}");
    }
}

#[test]
fn normalized_runs_are_standardized() {
    for map in maps() {
        for seed in [0.3, -0.61] {
            let s = generate_sequence(map, seed, 1_000_000, DEFAULT_BURN_IN).unwrap();
            let (m, v) = sequence_stats(&s).unwrap();
            assert!(m.abs() < 0.02 && (v - 1.0).abs() < 0.02, "{map}: {m} {v}");
            assert!(s.normalized);
        }
    }
}

proptest! {
    #[test]
    fn pwl_is_odd(x in -1.0f64..1.0, l in 1u32..8, phi in 0.01f64..0.99) {
        prop_assume!(x != 0.0);
        let a = pwl_iterate(x, l, phi).unwrap();
        let b = pwl_iterate(-x, l, phi).unwrap();
        prop_assert_eq!(a, -b);
        prop_assert!(a.abs() <= 1.0);
    }

    #[test]
    fn raw_chips_bounded_from_any_valid_seed(seed in -0.999f64..0.999, pwl in any::<bool>()) {
        let map = if pwl { MapKind::pwl_default() } else { MapKind::Cpf };
        if let Ok(orbit) = raw_orbit(&map, seed, 20_000, 10) {
            prop_assert!(orbit.iter().all(|x| x.abs() <= 1.0));
        }
    }

    #[test]
    fn sequences_are_reproducible(seed in -0.9f64..0.9) {
        prop_assume!((seed - 0.5).abs() > 1e-3);
        let a = generate_sequence(MapKind::Cpf, seed, 500, 50).unwrap();
        let b = generate_sequence(MapKind::Cpf, seed, 500, 50).unwrap();
        prop_assert_eq!(a, b);
    }
}
