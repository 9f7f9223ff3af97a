use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest acceptable condition number of the denominator system.
const MAX_CONDITION: f64 = 1e14;
/// Relative distance under which a pole and a zero are taken to cancel.
const CANCEL_TOL: f64 = 1e-6;
/// Relative guard band around a pole.
const POLE_GUARD: f64 = 1e-3;
/// Poles closer than this (relative) to the real axis count as real.
const REAL_AXIS_TOL: f64 = 1e-8;

/// `[L/M]` rational approximant `P(z)/Q(z)` of a power series, `Q(0) = 1`.
#[derive(Debug, Clone)]
pub struct PadeApproximant {
    pub requested: (usize, usize),
    pub order: (usize, usize),
    pub condition: f64,
    num: Vec<f64>,
    den: Vec<f64>,
    /// Uncancelled roots of `Q`.
    poles: Vec<Complex64>,
}

impl PadeApproximant {
    /// Builds the `[l/m]` approximant from `coeffs`, stepping down to
    /// `[l-1/m-1]` and so on while the system is singular or ill-conditioned.
    pub fn new(coeffs: &[f64], l: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("pade_order", "denominator degree must be at least 1"));
        }
        if l + m + 1 > coeffs.len() {
            return Err(Error::invalid(
                "pade_order",
                format!("[{l}/{m}] needs {} terms, series has {}", l + m + 1, coeffs.len()),
            ));
        }
        let (mut lc, mut mc) = (l, m);
        loop {
            if let Some((den, condition)) = solve_denominator(coeffs, lc, mc) {
                let num: Vec<f64> = (0..=lc)
                    .map(|i| (0..=i.min(mc)).map(|j| den[j] * coeffs[i - j]).sum())
                    .collect();
                let poles = uncancelled(poly_roots(&den), &poly_roots(&num));
                return Ok(PadeApproximant { requested: (l, m), order: (lc, mc), condition, num, den, poles });
            }
            if lc == 0 || mc == 1 {
                return Err(Error::PadeSingular { lowest_l: lc, lowest_m: mc });
            }
            lc -= 1;
            mc -= 1;
        }
    }

    pub fn fell_back(&self) -> bool {
        self.order != self.requested
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    /// `P(z)/Q(z)` without pole checks.
    pub fn eval_unchecked(&self, z: f64) -> f64 {
        if z.abs() <= 1.0 {
            horner(&self.num, z) / horner(&self.den, z)
        } else {
            // z^(L-M) P~(1/z) / Q~(1/z) with reversed coefficients keeps the
            // powers bounded.
            let w = 1.0 / z;
            let p = horner_rev(&self.num, w);
            let q = horner_rev(&self.den, w);
            let shift = self.num.len() as i32 - self.den.len() as i32;
            p / q * z.powi(shift)
        }
    }

    /// Evaluates at a real point `z >= 0`, refusing points at or beyond a
    /// real pole on `(0, z]` and points inside the guard band of any pole.
    /// Errors carry the offending pole in `z` units.
    pub fn eval_on_positive_axis(&self, z: f64) -> std::result::Result<f64, f64> {
        self.eval_checked(z, true)
    }

    /// Like [`Self::eval_on_positive_axis`] but only the guard band is
    /// enforced, for callers that verify the values some other way.
    pub fn eval_outside_guard(&self, z: f64) -> std::result::Result<f64, f64> {
        self.eval_checked(z, false)
    }

    fn eval_checked(&self, z: f64, refuse_crossing: bool) -> std::result::Result<f64, f64> {
        for p in &self.poles {
            let r = p.norm();
            let near = (Complex64::new(z, 0.0) - p).norm() <= POLE_GUARD * r;
            let crossed = refuse_crossing && p.re > 0.0 && p.im.abs() <= REAL_AXIS_TOL * r && p.re <= z;
            if near || crossed {
                return Err(p.re);
            }
        }
        Ok(self.eval_unchecked(z))
    }
}

fn horner(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * z + a)
}

fn horner_rev(c: &[f64], w: f64) -> f64 {
    c.iter().fold(0.0, |acc, &a| acc * w + a)
}

/// Solves `sum_j b_j c_{l+k-j} = -c_{l+k}`, `k = 1..=m`, for `b_1..b_m`.
fn solve_denominator(c: &[f64], l: usize, m: usize) -> Option<(Vec<f64>, f64)> {
    let at = |i: isize| if i < 0 { 0.0 } else { c[i as usize] };
    let a = DMatrix::from_fn(m, m, |k, j| at(l as isize + k as isize + 1 - (j as isize + 1)));
    let rhs = DVector::from_fn(m, |k, _| -c[l + k + 1]);
    let sv = a.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = smax / smin;
    if !(condition.is_finite() && condition <= MAX_CONDITION) {
        return None;
    }
    let b = a.lu().solve(&rhs)?;
    if b.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut den = Vec::with_capacity(m + 1);
    den.push(1.0);
    den.extend(b.iter());
    Some((den, condition))
}

/// Roots of `sum c_i z^i` from the companion matrix; leading zeros dropped.
fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let Some(deg) = c.iter().rposition(|&x| x != 0.0) else {
        return Vec::new();
    };
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    comp.complex_eigenvalues().iter().copied().collect()
}

fn uncancelled(poles: Vec<Complex64>, zeros: &[Complex64]) -> Vec<Complex64> {
    let mut used = vec![false; zeros.len()];
    poles
        .into_iter()
        .filter(|p| {
            let tol = CANCEL_TOL * p.norm().max(f64::MIN_POSITIVE);
            let hit = zeros
                .iter()
                .enumerate()
                .filter(|(i, z)| !used[*i] && (*p - **z).norm() <= tol)
                .min_by(|a, b| (*p - *a.1).norm().total_cmp(&(*p - *b.1).norm()))
                .map(|(i, _)| i);
            match hit {
                Some(i) => {
                    used[i] = true;
                    false
                }
                None => true,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series_is_exact_at_order_0_1() {
        let c: Vec<f64> = (0..10).map(|n| (-2.0f64).powi(n)).collect();
        let p = PadeApproximant::new(&c, 0, 1).unwrap();
        for z in [0.0, 0.3, 1.0, 7.0, 1e6] {
            assert!((p.eval_unchecked(z) - 1.0 / (1.0 + 2.0 * z)).abs() < 1e-14);
        }
        assert_eq!(p.poles().len(), 1);
        assert!((p.poles()[0].re + 0.5).abs() < 1e-14);
    }

    #[test]
    fn higher_orders_fall_back_on_rank_deficient_systems() {
        // A pure geometric series makes every [L/M] with M > 1 singular.
        let c: Vec<f64> = (0..40).map(|n| (-0.5f64).powi(n)).collect();
        let p = PadeApproximant::new(&c, 19, 20).unwrap();
        assert!(p.fell_back());
        for z in [0.0, 1.0, 100.0] {
            assert!((p.eval_unchecked(z) - 1.0 / (1.0 + 0.5 * z)).abs() < 1e-12);
        }
    }

    #[test]
    fn exponential_series_converges() {
        let mut c = vec![1.0];
        for n in 1..21 {
            c.push(c[n - 1] / n as f64);
        }
        let p = PadeApproximant::new(&c, 10, 10).unwrap();
        for z in [-3.0, -1.0, 0.5, 2.0] {
            let e: f64 = z;
            assert!((p.eval_unchecked(z) - e.exp()).abs() < 1e-9 * e.exp().max(1.0));
        }
    }

    #[test]
    fn crossed_real_pole_is_reported() {
        let c: Vec<f64> = (0..4).map(|_| 1.0).collect();
        let p = PadeApproximant::new(&c, 0, 1).unwrap();
        assert_eq!(p.eval_on_positive_axis(0.5), Ok(2.0));
        assert_eq!(p.eval_on_positive_axis(1.0), Err(1.0));
        assert_eq!(p.eval_on_positive_axis(3.0), Err(1.0));
        assert!((p.eval_outside_guard(3.0).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(p.eval_outside_guard(1.0005), Err(1.0));
    }

    #[test]
    fn order_validation() {
        let c = vec![1.0; 5];
        assert!(PadeApproximant::new(&c, 2, 3).is_err());
        assert!(PadeApproximant::new(&c, 2, 0).is_err());
    }
}
