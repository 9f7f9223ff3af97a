use super::ggamma::GeneralizedGammaParams;
use crate::error::{Error, Result};

/// `sup |F_n(x) - F(x)|` for already-sorted samples and the model CDF at
/// those samples.
pub fn ks_from_sorted_cdf(model_cdf: &[f64]) -> f64 {
    let n = model_cdf.len() as f64;
    model_cdf
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

pub(crate) fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// KS distance between the samples and a generalized gamma model.
pub fn ks_statistic(samples: &[f64], p: &GeneralizedGammaParams) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    p.validate()?;
    let cdf: Vec<f64> = sorted(samples).iter().map(|&x| p.cdf(x)).collect();
    Ok(ks_from_sorted_cdf(&cdf))
}
