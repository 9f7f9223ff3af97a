use csk_lab::analytic::conditional_ber;
use csk_lab::chaos::{generate_sequence, MapKind, DEFAULT_BURN_IN};
use csk_lab::modem::SymbolFrame;
use csk_lab::relay::{transmit_frame, transmit_symbol, ChannelState, Fading, NetworkConfig, Scratch};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn conditional_moments_of_the_correlator() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let cfg = NetworkConfig::unit(MapKind::Cpf, 10, 1).with_n0(2.0);
    let chips = generate_sequence(cfg.map, 0.41, 10, DEFAULT_BURN_IN).unwrap();
    let state = ChannelState::draw(&cfg, &mut rng).unwrap();
    let mut scratch = Scratch::default();
    let n = 100_000;
    for s in [1i8, -1] {
        let u: Vec<f64> = chips.chips.iter().map(|x| s as f64 * x).collect();
        let recs: Vec<_> = (0..n)
            .map(|i| transmit_symbol(&cfg, &state, &u, &chips.chips, s, i, &mut rng, &mut scratch))
            .collect();
        let mean = recs.iter().map(|r| r.correlator_value).sum::<f64>() / n as f64;
        let var = recs.iter().map(|r| (r.correlator_value - mean).powi(2)).sum::<f64>() / n as f64;
        let r0 = recs[0];
        assert!((mean / r0.analytic_mean - 1.0).abs() < 0.01, "{mean} vs {}", r0.analytic_mean);
        assert!((var / r0.analytic_variance - 1.0).abs() < 0.02, "{var} vs {}", r0.analytic_variance);
    }
}

#[test]
fn single_awgn_link_matches_conditional_average() {
    // N = 0, h fixed at 1: BER is the average of Q(sqrt(2 E_b / N0)) over
    // the chaotic bit energies.
    let gamma: f64 = 10f64.powf(0.679);
    let cfg = NetworkConfig::unit(MapKind::Cpf, 10, 0).with_fading(Fading::None).with_n0(10.0 / gamma);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let bits = 400_000;
    let chips = generate_sequence(cfg.map, 0.2, bits * 10, DEFAULT_BURN_IN).unwrap();
    let frame = SymbolFrame::random(bits, 10, &mut rng).unwrap();
    let recs = transmit_frame(&cfg, &frame, &chips, &mut rng).unwrap();
    let errors = recs.iter().filter(|r| r.is_error()).count() as f64;
    let ber = errors / bits as f64;
    let oracle = recs.iter().map(|r| conditional_ber(r.alpha, cfg.n0).unwrap()).sum::<f64>() / bits as f64;
    let se = (oracle * (1.0 - oracle) / bits as f64).sqrt();
    assert!((ber - oracle).abs() < 3.0 * se, "{ber} vs {oracle} (se {se})");
    assert!(recs.iter().all(|r| r.alpha == r.e_b));
}

#[test]
fn scaling_powers_and_noise_together_changes_nothing() {
    let base = NetworkConfig::unit(MapKind::pwl_default(), 8, 2).with_n0(3.0);
    let mut scaled = base.clone();
    scaled.source_power *= 4.0;
    scaled.relay_powers.iter_mut().for_each(|p| *p *= 4.0);
    scaled.n0 *= 4.0;
    let chips = generate_sequence(base.map, -0.37, 8 * 5000, DEFAULT_BURN_IN).unwrap();
    let frame = SymbolFrame::random(5000, 8, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let a = transmit_frame(&base, &frame, &chips, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    let b = transmit_frame(&scaled, &frame, &chips, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    let da: Vec<i8> = a.iter().map(|r| r.decided).collect();
    let db: Vec<i8> = b.iter().map(|r| r.decided).collect();
    assert_eq!(da, db);
    assert!(a.iter().any(|r| r.is_error()));
}

#[test]
fn adding_a_relay_never_raises_conditional_ber() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let one = NetworkConfig::unit(MapKind::Cpf, 10, 1);
    let two = NetworkConfig::unit(MapKind::Cpf, 10, 2);
    for _ in 0..1000 {
        let s2 = ChannelState::draw(&two, &mut rng).unwrap();
        let s1 = ChannelState { h_sd: s2.h_sd, h_sr: s2.h_sr[..1].to_vec(), h_rd: s2.h_rd[..1].to_vec() };
        let e_b = 10.0;
        let b1 = conditional_ber(s1.combining_gain(&one) * e_b, 1.0).unwrap();
        let b2 = conditional_ber(s2.combining_gain(&two) * e_b, 1.0).unwrap();
        assert!(b2 <= b1);
    }
}
