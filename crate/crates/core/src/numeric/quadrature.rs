use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of a numerical integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// 15-point Kronrod rule on `[a, b]`, returning `(kronrod, |kronrod - gauss|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss-Kronrod integration over `[a, b]`.
///
/// `breakpoints` seeds the initial partition; points outside `(a, b)` are
/// ignored. The worst interval is bisected until the summed error estimate
/// drops below `abs_tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut parts: Vec<(f64, f64, f64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();

    loop {
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !err.is_finite() {
            return Err(Error::Quadrature {
                error_estimate: err,
                target: abs_tol,
            });
        }
        if err <= abs_tol {
            return Ok(Integral {
                value: parts.iter().map(|p| p.2).sum(),
                error_estimate: err,
                intervals: parts.len(),
            });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("partition is never empty");
        let (lo, hi, _, _) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if parts.len() >= max_intervals || mid <= lo || mid >= hi {
            return Err(Error::Quadrature {
                error_estimate: err,
                target: abs_tol,
            });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts[worst] = (lo, mid, v1, e1);
        parts.push((mid, hi, v2, e2));
    }
}

/// Integrates `f` over `[0, inf)` through `x = scale * tan(u)`, `u` in `[0, pi/2)`.
///
/// `x_breakpoints` are given in the original variable.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    f: F,
    scale: f64,
    x_breakpoints: &[f64],
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mapped = |u: f64| {
        let c = u.cos();
        if c <= 1e-300 {
            return 0.0;
        }
        let x = scale * u.tan();
        let jac = scale / (c * c);
        let y = f(x) * jac;
        if y.is_finite() {
            y
        } else {
            0.0
        }
    };
    let mut cuts: Vec<f64> = (1..32).map(|i| half_pi * i as f64 / 32.0).collect();
    cuts.extend(
        x_breakpoints
            .iter()
            .filter(|&&x| x > 0.0 && x.is_finite())
            .map(|&x| (x / scale).atan()),
    );
    integrate_adaptive(mapped, 0.0, half_pi, &cuts, abs_tol, max_intervals)
}

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

static GL_CACHE: LazyLock<Mutex<HashMap<usize, Rule>>> = LazyLock::new(Default::default);

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut cache = GL_CACHE.lock().expect("gauss-legendre cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| Arc::new(legendre_rule(n)))
        .clone()
}

fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_is_exact_for_polynomials() {
        let (v, e) = gk15(&|x: f64| x.powi(6) - 3.0 * x * x, 0.0, 2.0);
        let exact = 128.0 / 7.0 - 8.0;
        assert!((v - exact).abs() < 1e-12);
        assert!(e < 1e-10);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // integral of x^-1/2 on [0, 1] is 2
        let r = integrate_adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, &[], 1e-9, 5000).unwrap();
        assert!((r.value - 2.0).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn half_line_gaussian_integral() {
        let r = integrate_half_line(|x: f64| (-x * x).exp(), 1.0, &[], 1e-12, 2000).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let err = integrate_adaptive(|x: f64| (1.0 / x).sin(), 1e-9, 1.0, &[], 1e-15, 20);
        assert!(matches!(err, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn gauss_legendre_64_integrates_smooth_functions() {
        let rule = gauss_legendre(64);
        let (x, w) = (&rule.0, &rule.1);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        let v: f64 = x.iter().zip(w).map(|(&x, &w)| w * x.cos()).sum();
        assert!((v - 2.0 * 1f64.sin()).abs() < 1e-14);
        // odd degree 127 polynomial integrates to 0; x^126 to 2/127
        let v: f64 = x.iter().zip(w).map(|(&x, &w)| w * x.powi(126)).sum();
        assert!((v - 2.0 / 127.0).abs() < 1e-12);
    }
}
