//! Average bit error rate of the cooperative link, by direct integration over
//! the fitted envelope law and through the MGF series with Padé resummation.
//!
//! With envelope `rho` the received energy is `rho^2` and the instantaneous
//! SNR is `gamma = rho^2 / N0`, so `gamma_bar = E[rho^2] / N0`.

mod mgf;
mod pade;

pub use mgf::{ber_mgf, mgf_eval, mgf_quadrature, MgfPade, MgfSeries, DEFAULT_PADE_ORDER, DEFAULT_SERIES_TERMS, GL_POINTS};
pub use pade::PadeApproximant;

use serde::Serialize;
use libm::erfc;

use crate::energy::GeneralizedGammaParams;
use crate::error::{Error, Result};
use crate::numeric::integrate_half_line;

/// Absolute error target of [`ber_quadrature`].
pub const QUADRATURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BerMethod {
    Quadrature,
    MgfPade,
    Simulated,
}

impl BerMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BerMethod::Quadrature => "quadrature",
            BerMethod::MgfPade => "mgf_pade",
            BerMethod::Simulated => "simulated",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BerDiagnostics {
    pub series_terms: Option<usize>,
    pub pade_requested: Option<(usize, usize)>,
    pub pade_order: Option<(usize, usize)>,
    pub quadrature_error: Option<f64>,
    pub quadrature_intervals: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerPoint {
    pub eb_n0_db: f64,
    pub ber: f64,
    pub method: BerMethod,
    pub diagnostics: Option<BerDiagnostics>,
}

pub(crate) fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Gaussian tail probability `P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `Q(sqrt(2 alpha / N0))`.
pub fn conditional_ber(alpha: f64, n0: f64) -> Result<f64> {
    if !(n0 > 0.0) {
        return Err(Error::invalid("n0", format!("{n0} must be positive")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid("alpha", format!("{alpha} must be nonnegative")));
    }
    Ok(q_function((2.0 * alpha / n0).sqrt()))
}

/// Snaps values within `tol` of `[lo, hi]` onto it; anything further out is
/// an error.
pub(crate) fn admit(what: &'static str, value: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if value >= lo && value <= hi {
        Ok(value)
    } else if value >= lo - tol && value < lo {
        Ok(lo)
    } else if value <= hi + tol && value > hi {
        Ok(hi)
    } else {
        Err(Error::OutOfAdmissibleRange { what, value, lo, hi })
    }
}

/// Average BER `int Q(rho sqrt(2/N0)) p(rho) drho` over the envelope law.
pub fn ber_quadrature(p: &GeneralizedGammaParams, n0: f64) -> Result<BerPoint> {
    p.validate()?;
    if !(n0 > 0.0) {
        return Err(Error::invalid("n0", format!("{n0} must be positive")));
    }
    let eb_n0_db = to_db(p.moment_real(2.0) / n0);
    if n0.is_infinite() {
        return Ok(BerPoint { eb_n0_db, ber: 0.5, method: BerMethod::Quadrature, diagnostics: None });
    }
    let k = (2.0 / n0).sqrt();
    let s = p.scale();
    // Q switches off around rho ~ 1/k; the density lives around s.
    let knee = 1.0 / k;
    let breaks = [0.25 * knee, knee, 4.0 * knee, 16.0 * knee, 0.5 * s, s, 2.0 * s];
    let r = integrate_half_line(|x| q_function(k * x) * p.pdf(x), s, &breaks, 0.01 * QUADRATURE_TOL, 20_000)
        .or_else(|_| integrate_half_line(|x| q_function(k * x) * p.pdf(x), s, &breaks, QUADRATURE_TOL, 50_000))?;
    let ber = admit("average BER", r.value, 0.0, 0.5, 1e-9)?;
    Ok(BerPoint {
        eb_n0_db,
        ber,
        method: BerMethod::Quadrature,
        diagnostics: Some(BerDiagnostics {
            quadrature_error: Some(r.error_estimate),
            quadrature_intervals: Some(r.intervals),
            ..Default::default()
        }),
    })
}

/// Closed form for BPSK over a single Rayleigh branch with mean SNR `gamma_bar`.
pub fn ber_rayleigh(gamma_bar: f64) -> f64 {
    0.5 * (1.0 - (gamma_bar / (1.0 + gamma_bar)).sqrt())
}

/// BPSK with `branches`-fold MRC over i.i.d. Rayleigh branches, `gamma_bar`
/// being the total mean SNR.
pub fn ber_rayleigh_mrc(gamma_bar: f64, branches: usize) -> f64 {
    let l = branches.max(1);
    let g = gamma_bar / l as f64;
    let mu = (g / (1.0 + g)).sqrt();
    let lo = 0.5 * (1.0 - mu);
    let hi = 0.5 * (1.0 + mu);
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..l {
        if k > 0 {
            binom *= (l - 1 + k) as f64 / k as f64;
        }
        sum += binom * hi.powi(k as i32);
    }
    lo.powi(l as i32) * sum
}
