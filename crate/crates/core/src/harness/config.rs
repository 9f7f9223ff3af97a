use serde::{Deserialize, Serialize};

use crate::chaos::MapKind;
use crate::energy::MIN_FIT_SAMPLES;
use crate::error::{Error, Result};
use crate::relay::{Fading, LinkVariances, NetworkConfig};

pub const DEFAULT_GRID_DB: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];
const DEFAULT_SEED: u64 = 1;
const DEFAULT_BETA: usize = 15;
const DEFAULT_RELAYS: usize = 1;
const DEFAULT_BITS: usize = 1_000_000;
const DEFAULT_MIN_ERRORS: usize = 100;
const DEFAULT_OUTPUT: &str = "csk-lab-out.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sweep,
    Fit,
    Compare,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub network: NetworkConfig,
    pub eb_n0_grid_db: Vec<f64>,
    /// Simulated bits per grid point; also the number of alpha samples
    /// behind every fit.
    pub n_bits: usize,
    pub master_seed: u64,
    pub output_path: String,
    pub min_errors: usize,
}

impl ExperimentConfig {
    /// Every setting at its documented default.
    pub fn defaults() -> Self {
        ExperimentConfig {
            mode: Mode::Sweep,
            network: NetworkConfig::unit(MapKind::Cpf, DEFAULT_BETA, DEFAULT_RELAYS),
            eb_n0_grid_db: DEFAULT_GRID_DB.to_vec(),
            n_bits: DEFAULT_BITS,
            master_seed: DEFAULT_SEED,
            output_path: DEFAULT_OUTPUT.into(),
            min_errors: DEFAULT_MIN_ERRORS,
        }
    }

    /// Changes the relay count, keeping unit powers for the new relays.
    pub fn set_relays(&mut self, n: usize) {
        self.network.n_relays = n;
        self.network.relay_powers.resize(n, 1.0);
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::config(format!("network.{name}"), reason),
            Error::LengthMismatch { expected, actual, .. } => Error::config(
                "network.relay_powers",
                format!("has {actual} entries for {expected} relays"),
            ),
            other => other,
        })?;
        let grid = &self.eb_n0_grid_db;
        if grid.is_empty() {
            return Err(Error::config("sweep.grid_db", "grid is empty"));
        }
        if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
            return Err(Error::config("sweep.grid_db", format!("entry {x} is not finite")));
        }
        for w in grid.windows(2) {
            if w[1] == w[0] {
                return Err(Error::config("sweep.grid_db", format!("duplicate entry {}", w[0])));
            }
            if w[1] < w[0] {
                return Err(Error::config("sweep.grid_db", format!("{} follows {}: not increasing", w[1], w[0])));
            }
        }
        if self.n_bits < self.network.beta.max(1) {
            return Err(Error::config(
                "sweep.n_bits",
                format!("{} is below the spreading factor {}", self.n_bits, self.network.beta),
            ));
        }
        if self.mode != Mode::Sweep && self.n_bits < MIN_FIT_SAMPLES {
            return Err(Error::config(
                "sweep.n_bits",
                format!("fits need at least {MIN_FIT_SAMPLES} samples, got {}", self.n_bits),
            ));
        }
        if self.min_errors == 0 {
            return Err(Error::config("sweep.min_errors", "must be at least 1"));
        }
        if self.output_path.is_empty() {
            return Err(Error::config("output.path", "empty path"));
        }
        Ok(())
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    seed: Option<u64>,
    network: Option<RawNetwork>,
    sweep: Option<RawSweep>,
    output: Option<RawOutput>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    map: Option<String>,
    beta: Option<i64>,
    relays: Option<i64>,
    source_power: Option<f64>,
    relay_powers: Option<Vec<f64>>,
    var_sd: Option<f64>,
    var_sr: Option<f64>,
    var_rd: Option<f64>,
    pwl_l: Option<i64>,
    pwl_phi: Option<f64>,
    fading: Option<Fading>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    grid_db: Option<Vec<f64>>,
    n_bits: Option<i64>,
    min_errors: Option<i64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<String>,
}

fn count(path: &str, v: Option<i64>, default: usize) -> Result<usize> {
    match v {
        None => Ok(default),
        Some(x) if x >= 0 => Ok(x as usize),
        Some(x) => Err(Error::config(path, format!("{x} is negative"))),
    }
}

/// Parses a TOML experiment description. Missing keys take their defaults
/// (see [`ExperimentConfig::defaults`]); unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        Error::config("<document>", msg)
    })?;
    let mut cfg = ExperimentConfig::defaults();
    if let Some(mode) = raw.mode {
        cfg.mode = mode;
    }
    if let Some(seed) = raw.seed {
        cfg.master_seed = seed;
    }

    let net = raw.network.unwrap_or_default();
    let l = net.pwl_l.unwrap_or(3);
    if !(1..=u32::MAX as i64).contains(&l) {
        return Err(Error::config("network.pwl_l", format!("{l} is not a positive integer")));
    }
    let phi = net.pwl_phi.unwrap_or(0.1);
    cfg.network.map = match net.map.as_deref().unwrap_or("cpf") {
        "cpf" => MapKind::Cpf,
        "pwl" => MapKind::Pwl { l: l as u32, phi },
        other => return Err(Error::config("network.map", format!("unknown map `{other}` (cpf, pwl)"))),
    };
    if matches!(cfg.network.map, MapKind::Cpf) && (net.pwl_l.is_some() || net.pwl_phi.is_some()) {
        return Err(Error::config("network.pwl_l", "PWL parameters given for the cpf map"));
    }
    cfg.network.beta = count("network.beta", net.beta, DEFAULT_BETA)?;
    let relays = count("network.relays", net.relays, DEFAULT_RELAYS)?;
    cfg.set_relays(relays);
    if let Some(p) = net.relay_powers {
        cfg.network.relay_powers = p;
    }
    if let Some(p) = net.source_power {
        cfg.network.source_power = p;
    }
    let d = LinkVariances::default();
    cfg.network.link_variances = LinkVariances {
        source_dest: net.var_sd.unwrap_or(d.source_dest),
        source_relay: net.var_sr.unwrap_or(d.source_relay),
        relay_dest: net.var_rd.unwrap_or(d.relay_dest),
    };
    if let Some(f) = net.fading {
        cfg.network.fading = f;
    }

    let sweep = raw.sweep.unwrap_or_default();
    if let Some(g) = sweep.grid_db {
        cfg.eb_n0_grid_db = g;
    }
    cfg.n_bits = count("sweep.n_bits", sweep.n_bits, DEFAULT_BITS)?;
    cfg.min_errors = count("sweep.min_errors", sweep.min_errors, DEFAULT_MIN_ERRORS)?;

    if let Some(p) = raw.output.and_then(|o| o.path) {
        cfg.output_path = p;
    }
    cfg.validate()?;
    Ok(cfg)
}
