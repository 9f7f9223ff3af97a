//! Two-phase error-free decode-and-forward network with MRC at the destination.
//!
//! Phase 1: the source broadcasts the CSK waveform to the destination and to
//! every relay. Phase 2: each relay re-sends the same waveform (ideal decode)
//! over its own fading link. The destination combines all copies with
//! conjugate channel weights, keeps the real part and correlates with the
//! chip replica.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chaos::{ChaoticSequence, MapKind};
use crate::channel::{apply_link_into, draw_channel, LinkRole, NoiseModel};
use crate::error::{Error, Result};
use crate::modem::{block_energy, correlate, decide, spread, Symbol, SymbolFrame, CHIP_PERIOD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fading {
    /// Complex Gaussian coefficients redrawn every symbol.
    Rayleigh,
    /// Every coefficient fixed at `1 + 0i` (pure AWGN links).
    None,
}

/// `E[|h|^2]` per link class; shared by all relays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkVariances {
    pub source_dest: f64,
    pub source_relay: f64,
    pub relay_dest: f64,
}

impl Default for LinkVariances {
    fn default() -> Self {
        LinkVariances {
            source_dest: 1.0,
            source_relay: 1.0,
            relay_dest: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub n_relays: usize,
    pub source_power: f64,
    pub relay_powers: Vec<f64>,
    pub link_variances: LinkVariances,
    pub beta: usize,
    pub map: MapKind,
    /// Noise density; `0` disables noise.
    pub n0: f64,
    pub fading: Fading,
    /// Also synthesize the noisy source-to-relay observations. The ideal
    /// relay discards them, so decisions do not depend on this flag, but
    /// the random stream does.
    pub simulate_relay_uplink: bool,
}

impl NetworkConfig {
    /// Unit powers, unit link variances, Rayleigh fading, `N0 = 1`.
    pub fn unit(map: MapKind, beta: usize, n_relays: usize) -> Self {
        NetworkConfig {
            n_relays,
            source_power: 1.0,
            relay_powers: vec![1.0; n_relays],
            link_variances: LinkVariances::default(),
            beta,
            map,
            n0: 1.0,
            fading: Fading::Rayleigh,
            simulate_relay_uplink: false,
        }
    }

    pub fn with_n0(mut self, n0: f64) -> Self {
        self.n0 = n0;
        self
    }

    pub fn with_fading(mut self, fading: Fading) -> Self {
        self.fading = fading;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        if self.beta == 0 {
            return Err(Error::invalid("beta", "spreading factor must be positive"));
        }
        if self.relay_powers.len() != self.n_relays {
            return Err(Error::LengthMismatch {
                context: "relay_powers vs n_relays",
                expected: self.n_relays,
                actual: self.relay_powers.len(),
            });
        }
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{v} must be positive")))
            }
        };
        positive("source_power", self.source_power)?;
        for &p in &self.relay_powers {
            positive("relay_powers", p)?;
        }
        positive("var_sd", self.link_variances.source_dest)?;
        positive("var_sr", self.link_variances.source_relay)?;
        positive("var_rd", self.link_variances.relay_dest)?;
        if !(self.n0 >= 0.0 && self.n0.is_finite()) {
            return Err(Error::invalid("N0", format!("{} must be nonnegative", self.n0)));
        }
        Ok(())
    }

    pub fn noise(&self) -> NoiseModel {
        if self.n0 == 0.0 {
            NoiseModel::noiseless()
        } else {
            NoiseModel::new(self.n0).expect("validated N0")
        }
    }

    /// `E[alpha]` for unit-variance chips: `beta T_c (P_s s_sd + sum P_j s_rd)`.
    pub fn mean_alpha(&self) -> f64 {
        let (sd, rd) = match self.fading {
            Fading::Rayleigh => (self.link_variances.source_dest, self.link_variances.relay_dest),
            Fading::None => (1.0, 1.0),
        };
        let gain = self.source_power * sd + self.relay_powers.iter().sum::<f64>() * rd;
        self.beta as f64 * CHIP_PERIOD * gain
    }
}

impl NetworkConfig {
    /// Short stable digest of the configuration (hex, 16 chars).
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Coefficients for one symbol period.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub h_sd: Complex64,
    pub h_sr: Vec<Complex64>,
    pub h_rd: Vec<Complex64>,
}

impl ChannelState {
    /// Draws source-destination, then source-relay and relay-destination per relay.
    pub fn draw<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<Self> {
        let mut state = ChannelState {
            h_sd: Complex64::new(1.0, 0.0),
            h_sr: vec![Complex64::new(1.0, 0.0); cfg.n_relays],
            h_rd: vec![Complex64::new(1.0, 0.0); cfg.n_relays],
        };
        state.redraw(cfg, rng)?;
        Ok(state)
    }

    fn redraw<R: Rng + ?Sized>(&mut self, cfg: &NetworkConfig, rng: &mut R) -> Result<()> {
        if cfg.fading == Fading::None {
            return Ok(());
        }
        let v = &cfg.link_variances;
        self.h_sd = draw_channel(LinkRole::SourceDest, v.source_dest, rng)?.h;
        for n in 0..cfg.n_relays {
            self.h_sr[n] = draw_channel(LinkRole::SourceRelay(n), v.source_relay, rng)?.h;
            self.h_rd[n] = draw_channel(LinkRole::RelayDest(n), v.relay_dest, rng)?.h;
        }
        Ok(())
    }

    /// Sum of powered destination-side gains `P_s|h_sd|^2 + sum P_j|h_rj,d|^2`.
    pub fn combining_gain(&self, cfg: &NetworkConfig) -> f64 {
        cfg.source_power * self.h_sd.norm_sqr()
            + self
                .h_rd
                .iter()
                .zip(&cfg.relay_powers)
                .map(|(h, p)| p * h.norm_sqr())
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord {
    pub symbol_index: usize,
    pub transmitted: Symbol,
    /// Correlator output on the scale where its mean is `alpha * s`.
    pub correlator_value: f64,
    pub decided: Symbol,
    pub alpha: f64,
    pub analytic_mean: f64,
    pub analytic_variance: f64,
    pub e_b: f64,
}

impl DecisionRecord {
    pub fn is_error(&self) -> bool {
        self.decided != self.transmitted
    }
}

/// `Re{a y_sd + sum_j a_j y_rj,d}` with `a = sqrt(P_s) h_sd^* / sigma`,
/// `a_j = sqrt(P_j) h_rj,d^* / sigma`.
pub fn mrc_combine(
    y_sd: &[Complex64],
    y_rd: &[Vec<Complex64>],
    h_sd: Complex64,
    h_rd: &[Complex64],
    p_s: f64,
    p_j: &[f64],
    sigma: f64,
) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("{sigma} must be positive")));
    }
    if y_rd.len() != h_rd.len() || h_rd.len() != p_j.len() {
        return Err(Error::LengthMismatch {
            context: "mrc_combine: relay observations, coefficients and powers",
            expected: h_rd.len(),
            actual: if y_rd.len() != h_rd.len() { y_rd.len() } else { p_j.len() },
        });
    }
    if let Some(bad) = y_rd.iter().find(|y| y.len() != y_sd.len()) {
        return Err(Error::LengthMismatch {
            context: "mrc_combine: sample lists",
            expected: y_sd.len(),
            actual: bad.len(),
        });
    }
    let mut out = Vec::with_capacity(y_sd.len());
    let weights = mrc_weights(h_sd, h_rd, p_s, p_j, sigma);
    mrc_into(y_sd, y_rd, &weights, &mut out);
    Ok(out)
}

fn mrc_weights(h_sd: Complex64, h_rd: &[Complex64], p_s: f64, p_j: &[f64], sigma: f64) -> Vec<Complex64> {
    std::iter::once(p_s.sqrt() * h_sd.conj() / sigma)
        .chain(h_rd.iter().zip(p_j).map(|(h, p)| p.sqrt() * h.conj() / sigma))
        .collect()
}

fn mrc_into(y_sd: &[Complex64], y_rd: &[Vec<Complex64>], weights: &[Complex64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(y_sd.iter().map(|y| (weights[0] * y).re));
    for (y, w) in y_rd.iter().zip(&weights[1..]) {
        for (acc, yk) in out.iter_mut().zip(y) {
            *acc += (w * yk).re;
        }
    }
}

/// `E[Ds_l] = alpha * s` with the bit energy folded into `alpha`.
pub fn decision_mean(alpha: f64, s: Symbol) -> f64 {
    alpha * s as f64
}

/// `Var[Ds_l] = (N0/2) * alpha`.
pub fn decision_variance(alpha: f64, n0: f64) -> Result<f64> {
    if !(n0 > 0.0) {
        return Err(Error::invalid("N0", format!("{n0} must be positive")));
    }
    Ok(0.5 * n0 * alpha)
}

/// `alpha = [P_s |h_sd|^2 + sum_j P_j |h_rj,d|^2] E_b`.
pub fn alpha_value(h_sd: Complex64, h_rd: &[Complex64], p_s: f64, p_j: &[f64], e_b: f64) -> Result<f64> {
    if h_rd.len() != p_j.len() {
        return Err(Error::LengthMismatch {
            context: "alpha_value: relay coefficients vs powers",
            expected: h_rd.len(),
            actual: p_j.len(),
        });
    }
    let gain = p_s * h_sd.norm_sqr() + h_rd.iter().zip(p_j).map(|(h, p)| p * h.norm_sqr()).sum::<f64>();
    Ok(gain * e_b)
}

/// Reusable buffers for per-symbol link simulation.
#[derive(Debug, Default)]
pub struct Scratch {
    y_sd: Vec<Complex64>,
    y_sr: Vec<Complex64>,
    y_rd: Vec<Vec<Complex64>>,
    combined: Vec<f64>,
    weights: Vec<Complex64>,
}

/// Sends one CSK symbol (its spread block `u_block`) through both phases
/// under fixed coefficients and detects it at the destination.
pub fn transmit_symbol<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    state: &ChannelState,
    u_block: &[f64],
    chip_block: &[f64],
    transmitted: Symbol,
    symbol_index: usize,
    rng: &mut R,
    scratch: &mut Scratch,
) -> DecisionRecord {
    let noise = cfg.noise();
    // Sigma of the MRC weights; any positive constant gives the same decision.
    let sigma = if noise.is_noiseless() { 1.0 } else { noise.sigma2().sqrt() };

    apply_link_into(u_block, state.h_sd, cfg.source_power, noise, rng, &mut scratch.y_sd);
    if cfg.simulate_relay_uplink {
        for &h in &state.h_sr {
            apply_link_into(u_block, h, cfg.source_power, noise, rng, &mut scratch.y_sr);
        }
    }
    scratch.y_rd.resize_with(cfg.n_relays, Vec::new);
    for ((y, &h), &p) in scratch.y_rd.iter_mut().zip(&state.h_rd).zip(&cfg.relay_powers) {
        apply_link_into(u_block, h, p, noise, rng, y);
    }

    scratch.weights.clear();
    scratch.weights.push(cfg.source_power.sqrt() * state.h_sd.conj() / sigma);
    scratch.weights.extend(
        state
            .h_rd
            .iter()
            .zip(&cfg.relay_powers)
            .map(|(h, p)| p.sqrt() * h.conj() / sigma),
    );
    mrc_into(&scratch.y_sd, &scratch.y_rd, &scratch.weights, &mut scratch.combined);

    let correlator_value = sigma * correlate(&scratch.combined, chip_block);
    let e_b = block_energy(chip_block);
    let alpha = state.combining_gain(cfg) * e_b;
    DecisionRecord {
        symbol_index,
        transmitted,
        correlator_value,
        decided: decide(correlator_value),
        alpha,
        analytic_mean: decision_mean(alpha, transmitted),
        analytic_variance: 0.5 * cfg.n0 * alpha,
        e_b,
    }
}

/// Runs a whole frame: per symbol, fresh coefficients for every link, both
/// phases, MRC and correlation detection.
pub fn transmit_frame<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    frame: &SymbolFrame,
    chips: &ChaoticSequence,
    rng: &mut R,
) -> Result<Vec<DecisionRecord>> {
    cfg.validate()?;
    if frame.beta() != cfg.beta {
        return Err(Error::LengthMismatch {
            context: "frame beta vs network beta",
            expected: cfg.beta,
            actual: frame.beta(),
        });
    }
    let u = spread(frame, chips)?;
    let beta = cfg.beta;
    let mut state = ChannelState::draw(cfg, rng)?;
    let mut scratch = Scratch::default();
    let mut records = Vec::with_capacity(frame.symbols().len());
    for (l, &s) in frame.symbols().iter().enumerate() {
        if l > 0 {
            state.redraw(cfg, rng)?;
        }
        let span = l * beta..(l + 1) * beta;
        records.push(transmit_symbol(
            cfg,
            &state,
            &u[span.clone()],
            &chips.chips[span],
            s,
            l,
            rng,
            &mut scratch,
        ));
    }
    Ok(records)
}
