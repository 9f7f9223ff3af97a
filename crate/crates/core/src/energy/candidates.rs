//! Competing envelope laws, each fitted by matching moments of the same data.

use serde::Serialize;
use statrs::function::gamma::gamma_lr;

use super::ggamma::{fit_ggamma, GeneralizedGammaParams};
use super::ks::{ks_from_sorted_cdf, sorted};
use crate::error::{Error, Result};
use crate::numeric::{bessel_i0e, bessel_i1e, gk15, integrate_adaptive};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Candidate {
    /// `2x/Omega exp(-x^2/Omega)`.
    Rayleigh { omega: f64 },
    Nakagami { m: f64, omega: f64 },
    Rician { nu: f64, sigma: f64 },
    GeneralizedGamma(GeneralizedGammaParams),
}

impl Candidate {
    pub fn name(&self) -> &'static str {
        match self {
            Candidate::Rayleigh { .. } => "rayleigh",
            Candidate::Nakagami { .. } => "nakagami",
            Candidate::Rician { .. } => "rician",
            Candidate::GeneralizedGamma(_) => "ggamma",
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match *self {
            Candidate::Rayleigh { omega } => 2.0 * x / omega * (-x * x / omega).exp(),
            Candidate::Nakagami { m, omega } => {
                GeneralizedGammaParams { v: 1.0, m, omega, fit_ks: None, n_samples: 0 }.pdf(x)
            }
            Candidate::Rician { nu, sigma } => rician_pdf(x, nu, sigma),
            Candidate::GeneralizedGamma(p) => p.pdf(x),
        }
    }

    /// CDF at each point of an ascending slice.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        match *self {
            Candidate::Rayleigh { omega } => xs.iter().map(|x| 1.0 - (-x * x / omega).exp()).collect(),
            Candidate::Nakagami { m, omega } => {
                xs.iter().map(|&x| if x <= 0.0 { 0.0 } else { gamma_lr(m, m * x * x / omega) }).collect()
            }
            Candidate::GeneralizedGamma(p) => xs.iter().map(|&x| p.cdf(x)).collect(),
            Candidate::Rician { nu, sigma } => {
                // No closed form without Marcum Q: accumulate the pdf between
                // consecutive sample points.
                let f = |t: f64| rician_pdf(t, nu, sigma);
                let mut acc = 0.0;
                let mut prev = 0.0;
                xs.iter()
                    .map(|&x| {
                        let x = x.max(0.0);
                        if x > prev {
                            acc += if x - prev > 0.25 * sigma {
                                integrate_adaptive(f, prev, x, &[], 1e-13, 2000)
                                    .map(|r| r.value)
                                    .unwrap_or_else(|_| gk15(&f, prev, x).0)
                            } else {
                                gk15(&f, prev, x).0
                            };
                            prev = x;
                        }
                        acc.min(1.0)
                    })
                    .collect()
            }
        }
    }
}

fn rician_pdf(x: f64, nu: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s2 = sigma * sigma;
    let z = x * nu / s2;
    // I0(z) e^{-(x^2+nu^2)/2s^2} = I0e(z) e^{-(x-nu)^2/2s^2}
    x / s2 * (-(x - nu).powi(2) / (2.0 * s2)).exp() * bessel_i0e(z)
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mut m1, mut m2, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let x2 = x * x;
        m1 += x;
        m2 += x2;
        m4 += x2 * x2;
    }
    (m1 / n, m2 / n, m4 / n)
}

pub fn fit_rayleigh(xs: &[f64]) -> Result<Candidate> {
    if xs.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (_, m2, _) = moments(xs);
    if !(m2 > 0.0) {
        return Err(Error::DegenerateSamples("zero second moment".into()));
    }
    Ok(Candidate::Rayleigh { omega: m2 })
}

/// `Omega = E[x^2]`, `m = Omega^2 / Var(x^2)`.
pub fn fit_nakagami(xs: &[f64]) -> Result<Candidate> {
    if xs.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (_, m2, m4) = moments(xs);
    let var2 = m4 - m2 * m2;
    if !(var2 > 0.0) {
        return Err(Error::DegenerateSamples("zero variance of x^2".into()));
    }
    Ok(Candidate::Nakagami { m: m2 * m2 / var2, omega: m2 })
}

/// `mean^2 / E[x^2]` of a Rician law as a function of `K = nu^2 / (2 sigma^2)`;
/// increases from pi/4 at K = 0 towards 1.
fn rician_mean_ratio(k: f64) -> f64 {
    let l = (1.0 + k) * bessel_i0e(k / 2.0) + k * bessel_i1e(k / 2.0);
    std::f64::consts::FRAC_PI_4 * l * l / (1.0 + k)
}

/// Matches mean and second moment; `K` is found by bisection. Samples less
/// concentrated than a Rayleigh law give `K = 0`.
pub fn fit_rician(xs: &[f64]) -> Result<Candidate> {
    if xs.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (m1, m2, _) = moments(xs);
    if !(m2 > 0.0) {
        return Err(Error::DegenerateSamples("zero second moment".into()));
    }
    let ratio = m1 * m1 / m2;
    if ratio >= 1.0 {
        return Err(Error::DegenerateSamples("zero sample variance".into()));
    }
    let k = if ratio <= std::f64::consts::FRAC_PI_4 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, 1e7);
        if rician_mean_ratio(hi) < ratio {
            return Err(Error::NonConvergence("Rician K factor beyond 1e7".into()));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rician_mean_ratio(mid) < ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let sigma = (m2 / (2.0 * (1.0 + k))).sqrt();
    Ok(Candidate::Rician { nu: (2.0 * k).sqrt() * sigma, sigma })
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateFit {
    pub candidate: Candidate,
    pub ks: f64,
}

/// All four families fitted to the same samples, with KS distances.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateComparison {
    pub ggamma: GeneralizedGammaParams,
    pub fits: Vec<CandidateFit>,
}

impl CandidateComparison {
    pub fn ks(&self, family: &str) -> Option<f64> {
        self.fits.iter().find(|f| f.candidate.name() == family).map(|f| f.ks)
    }

    pub fn best(&self) -> &CandidateFit {
        self.fits
            .iter()
            .min_by(|a, b| a.ks.total_cmp(&b.ks))
            .expect("four candidates")
    }
}

pub fn compare_candidates(xs: &[f64]) -> Result<CandidateComparison> {
    let gg = fit_ggamma(xs)?;
    let candidates = [
        Candidate::GeneralizedGamma(gg),
        fit_rayleigh(xs)?,
        fit_rician(xs)?,
        fit_nakagami(xs)?,
    ];
    let sorted = sorted(xs);
    let fits = candidates
        .into_iter()
        .map(|c| CandidateFit {
            ks: ks_from_sorted_cdf(&c.cdf_sorted(&sorted)),
            candidate: c,
        })
        .collect();
    Ok(CandidateComparison { ggamma: gg, fits })
}
