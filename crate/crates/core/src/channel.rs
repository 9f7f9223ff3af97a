//! Block-fading links with additive white Gaussian noise.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkRole {
    SourceDest,
    SourceRelay(usize),
    RelayDest(usize),
}

/// One fading coefficient, held for exactly one symbol period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRealization {
    pub h: Complex64,
    pub role: LinkRole,
    /// `E[|h|^2]`.
    pub variance: f64,
}

/// AWGN with one-sided density `N0`; each complex dimension has variance `N0/2`.
///
/// `N0 = 0` is the noiseless limit, used for identity-link checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    n0: f64,
}

impl NoiseModel {
    pub fn new(n0: f64) -> Result<Self> {
        if n0 > 0.0 && n0.is_finite() {
            Ok(NoiseModel { n0 })
        } else {
            Err(Error::invalid("N0", format!("{n0} must be positive and finite")))
        }
    }

    pub const fn noiseless() -> Self {
        NoiseModel { n0: 0.0 }
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// Per-dimension variance `N0/2`.
    pub fn sigma2(&self) -> f64 {
        0.5 * self.n0
    }

    pub fn is_noiseless(&self) -> bool {
        self.n0 == 0.0
    }
}

#[inline]
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, std_per_dim: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(std_per_dim * re, std_per_dim * im)
}

/// Zero-mean circularly symmetric complex Gaussian with `E[|h|^2] = variance`.
pub fn draw_channel<R: Rng + ?Sized>(
    role: LinkRole,
    variance: f64,
    rng: &mut R,
) -> Result<LinkRealization> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::invalid("variance", format!("{variance} must be positive")));
    }
    Ok(LinkRealization {
        h: complex_gaussian(rng, (0.5 * variance).sqrt()),
        role,
        variance,
    })
}

/// `y_k = sqrt(power) * h * x_k + z_k`.
pub fn apply_link<R: Rng + ?Sized>(
    samples: &[f64],
    h: Complex64,
    power: f64,
    noise: NoiseModel,
    rng: &mut R,
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(samples.len());
    apply_link_into(samples, h, power, noise, rng, &mut out);
    out
}

pub(crate) fn apply_link_into<R: Rng + ?Sized>(
    samples: &[f64],
    h: Complex64,
    power: f64,
    noise: NoiseModel,
    rng: &mut R,
    out: &mut Vec<Complex64>,
) {
    out.clear();
    let gain = power.sqrt() * h;
    if noise.is_noiseless() {
        out.extend(samples.iter().map(|&x| gain * x));
    } else {
        let sd = noise.sigma2().sqrt();
        out.extend(samples.iter().map(|&x| gain * x + complex_gaussian(rng, sd)));
    }
}
