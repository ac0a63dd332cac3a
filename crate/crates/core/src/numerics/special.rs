use std::f64::consts::FRAC_1_SQRT_2;

use crate::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF, via `erfc` so that both tails keep full relative
/// precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Rational approximation of the boundary-crossing function
///
/// ```text
/// nu(u) ~ (2/u)(Phi(u/2) - 1/2) / ((u/2) Phi(u/2) + phi(u/2))
/// ```
///
/// `Phi(u/2) - 1/2` is evaluated as `erf(u / (2 sqrt 2)) / 2` to avoid
/// cancellation as `u -> 0`, where the expression tends to 1.
pub fn nu_approx(u: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::domain(format!("nu(u) requires finite u > 0, got {u}")));
    }
    let half = 0.5 * u;
    let centred = 0.5 * libm::erf(half * FRAC_1_SQRT_2);
    let num = 2.0 / u * centred;
    let den = half * std_normal_cdf(half) + std_normal_pdf(half);
    Ok(num / den)
}

/// Asymptotic p-value of the one-sample Kolmogorov-Smirnov statistic `d`
/// computed from `n` observations (Stephens' small-sample correction).
pub fn kolmogorov_pvalue(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
