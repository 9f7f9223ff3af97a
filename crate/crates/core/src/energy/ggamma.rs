//! Generalized gamma law
//! `p(x) = 2v / ((Omega/m)^m Gamma(m)) x^(2mv-1) exp(-m x^(2v) / Omega)`, `x >= 0`,
//! and its method-of-moments fit.
//!
//! `W = m X^(2v) / Omega` is `Gamma(m, 1)`, which gives the moments, the CDF
//! and a sampler directly.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, gamma_lr, ln_gamma};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedGammaParams {
    pub v: f64,
    pub m: f64,
    pub omega: f64,
    /// KS distance to the data the parameters were fitted on.
    pub fit_ks: Option<f64>,
    /// Number of samples behind the fit; 0 for hand-built parameters.
    pub n_samples: usize,
}

impl GeneralizedGammaParams {
    pub fn new(v: f64, m: f64, omega: f64) -> Result<Self> {
        let p = GeneralizedGammaParams {
            v,
            m,
            omega,
            fit_ks: None,
            n_samples: 0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("v", self.v), ("m", self.m), ("omega", self.omega)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::invalid(name, format!("{x} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// `(Omega/m)^(1/(2v))`.
    pub fn scale(&self) -> f64 {
        (self.omega / self.m).powf(0.5 / self.v)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let lx = x.ln();
        (2.0 * self.v).ln() - self.m * (self.omega / self.m).ln() - ln_gamma(self.m)
            + (2.0 * self.m * self.v - 1.0) * lx
            - self.m * (2.0 * self.v * lx).exp() / self.omega
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x == 0.0 {
            let k = 2.0 * self.m * self.v;
            if k > 1.0 {
                0.0
            } else if k == 1.0 {
                (2.0 * self.v) / ((self.omega / self.m).powf(self.m) * ln_gamma(self.m).exp())
            } else {
                f64::INFINITY
            }
        } else {
            self.ln_pdf(x).exp()
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(self.m, self.m * x.powf(2.0 * self.v) / self.omega)
        }
    }

    /// `E[X^r] = (Omega/m)^(r/(2v)) Gamma(m + r/(2v)) / Gamma(m)` for real `r > -2mv`.
    pub fn moment_real(&self, r: f64) -> f64 {
        let a = r / (2.0 * self.v);
        (a * (self.omega / self.m).ln() + ln_gamma(self.m + a) - ln_gamma(self.m)).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let w: f64 = Gamma::new(self.m, 1.0).expect("validated shape").sample(rng);
        (self.omega * w / self.m).powf(0.5 / self.v)
    }
}

pub fn ggamma_pdf(x: f64, p: &GeneralizedGammaParams) -> Result<f64> {
    p.validate()?;
    Ok(p.pdf(x))
}

pub fn ggamma_moment(k: u32, p: &GeneralizedGammaParams) -> Result<f64> {
    p.validate()?;
    if k == 0 {
        return Err(Error::invalid("k", "moment order must be at least 1"));
    }
    Ok(p.moment_real(k as f64))
}

/// Minimum sample count accepted by [`fit_ggamma`].
pub const MIN_FIT_SAMPLES: usize = 1000;

const GRID_SIZE: usize = 40;
const GRID_LO: f64 = 0.1;
const GRID_HI: f64 = 20.0;
const NEWTON_MAX_ITERS: usize = 200;
const ACCEPT_RESIDUAL: f64 = 1e-10;

/// Log moment ratios `ln(mu2/mu1^2)`, `ln(mu3/mu1^3)` as functions of `(m, a = 1/(2v))`.
fn ratio_equations(m: f64, a: f64) -> [f64; 2] {
    let base = ln_gamma(m + a);
    let lm = ln_gamma(m);
    [
        ln_gamma(m + 2.0 * a) + lm - 2.0 * base,
        ln_gamma(m + 3.0 * a) + 2.0 * lm - 3.0 * base,
    ]
}

fn residual(x: [f64; 2], target: [f64; 2]) -> [f64; 2] {
    let (v, m) = (x[0].exp(), x[1].exp());
    let g = ratio_equations(m, 0.5 / v);
    [g[0] - target[0], g[1] - target[1]]
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// Jacobian of the residual in `(ln v, ln m)`.
fn jacobian(x: [f64; 2]) -> [[f64; 2]; 2] {
    let (v, m) = (x[0].exp(), x[1].exp());
    let a = 0.5 / v;
    let (d0, d1, d2, d3) = (digamma(m), digamma(m + a), digamma(m + 2.0 * a), digamma(m + 3.0 * a));
    let g2_m = d2 + d0 - 2.0 * d1;
    let g3_m = d3 + 2.0 * d0 - 3.0 * d1;
    let g2_a = 2.0 * (d2 - d1);
    let g3_a = 3.0 * (d3 - d1);
    // da/dln v = -a, dm/dln m = m
    [[-a * g2_a, m * g2_m], [-a * g3_a, m * g3_m]]
}

fn newton(mut x: [f64; 2], target: [f64; 2]) -> Option<([f64; 2], f64)> {
    let mut r = residual(x, target);
    let mut nr = norm(r);
    for _ in 0..NEWTON_MAX_ITERS {
        if nr < 1e-13 {
            break;
        }
        let j = jacobian(x);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det == 0.0 {
            return None;
        }
        let dx = [
            -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
            -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-6 {
            let cand = [x[0] + step * dx[0], x[1] + step * dx[1]];
            if cand[0].abs() < 12.0 && cand[1].abs() < 12.0 {
                let rc = residual(cand, target);
                let nc = norm(rc);
                if nc.is_finite() && nc < nr {
                    x = cand;
                    r = rc;
                    nr = nc;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    nr.is_finite().then_some((x, nr))
}

fn raw_moments(samples: &[f64]) -> [f64; 3] {
    let n = samples.len() as f64;
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    for &x in samples {
        let x2 = x * x;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
    }
    [s1 / n, s2 / n, s3 / n]
}

/// Method-of-moments fit matching the first three raw moments.
///
/// The two scale-free log moment ratios pin `(v, m)`: a 40x40 log grid over
/// `[0.1, 20]^2` seeds a damped Newton solve, and `Omega` then follows from
/// the mean.
pub fn fit_ggamma(samples: &[f64]) -> Result<GeneralizedGammaParams> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::DegenerateSamples(format!(
            "{} samples, need at least {MIN_FIT_SAMPLES}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        return Err(Error::DegenerateSamples(format!("sample {bad} is not a finite nonnegative value")));
    }
    let mu = raw_moments(samples);
    let variance = mu[1] - mu[0] * mu[0];
    if !(mu[0] > 0.0) || !(variance > 1e-12 * mu[0] * mu[0]) {
        return Err(Error::DegenerateSamples("zero sample variance".into()));
    }
    let target = [(mu[1] / (mu[0] * mu[0])).ln(), (mu[2] / mu[0].powi(3)).ln()];

    let step = (GRID_HI / GRID_LO).ln() / (GRID_SIZE - 1) as f64;
    let mut starts: Vec<(f64, [f64; 2])> = Vec::with_capacity(GRID_SIZE * GRID_SIZE);
    for i in 0..GRID_SIZE {
        for j in 0..GRID_SIZE {
            let x = [GRID_LO.ln() + i as f64 * step, GRID_LO.ln() + j as f64 * step];
            let r = norm(residual(x, target));
            if r.is_finite() {
                starts.push((r, x));
            }
        }
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best: Option<([f64; 2], f64)> = None;
    for &(_, x0) in starts.iter().take(8) {
        if let Some((x, r)) = newton(x0, target) {
            if best.is_none_or(|(_, br)| r < br) {
                best = Some((x, r));
            }
            if r < ACCEPT_RESIDUAL {
                break;
            }
        }
    }
    let (x, r) = best.ok_or_else(|| Error::NonConvergence("no usable Newton start".into()))?;
    if r >= ACCEPT_RESIDUAL {
        return Err(Error::NonConvergence(format!(
            "moment-ratio residual {r:e} (targets {:.6}, {:.6})",
            target[0], target[1]
        )));
    }
    let (v, m) = (x[0].exp(), x[1].exp());
    let a = 0.5 / v;
    let omega = m * ((mu[0].ln() + ln_gamma(m) - ln_gamma(m + a)) / a).exp();
    let mut p = GeneralizedGammaParams::new(v, m, omega)?;
    p.n_samples = samples.len();
    p.fit_ks = Some(super::ks::ks_statistic(samples, &p)?);
    Ok(p)
}
