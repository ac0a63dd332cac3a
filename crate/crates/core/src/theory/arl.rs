use std::f64::consts::PI;

use crate::numerics::integrate_u_nu2;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArlQuery {
    pub m: usize,
    pub b: f64,
    pub w: usize,
}

impl ArlQuery {
    pub fn new(m: usize, b: f64, w: usize) -> Self {
        ArlQuery { m, b, w }
    }
}

/// Logarithm of the ARL approximation
///
/// ```text
/// ARL ≈ 2√π / c(M, b, w) · 1/(1 - M/2b) · 1/√M · (M/2b)^{M/2} · e^{b - M/2}
/// c(M, b, w) = ∫ u ν(u)² du  over  [√(2b/w)(1 - M/2b), √(2b)(1 - M/2b)]
/// ```
///
/// evaluated as a sum of logarithms.
pub fn log_arl_fixed(q: ArlQuery) -> Result<f64> {
    let ArlQuery { m, b, w } = q;
    if m == 0 {
        return Err(Error::domain("M must be positive"));
    }
    let mf = m as f64;
    if !(b > 0.5 * mf) || !b.is_finite() {
        return Err(Error::domain(format!("ARL requires b > M/2 = {}, got b = {b}", 0.5 * mf)));
    }
    if w < 2 {
        return Err(Error::domain(format!("ARL requires w >= 2, got {w}")));
    }
    let ratio = mf / (2.0 * b);
    let shrink = 1.0 - ratio;
    let lo = (2.0 * b / w as f64).sqrt() * shrink;
    let hi = (2.0 * b).sqrt() * shrink;
    let c = integrate_u_nu2(lo, hi)?;
    if !(c > 0.0) {
        return Err(Error::domain(format!(
            "degenerate integration interval [{lo}, {hi}] for M={m}, b={b}, w={w}"
        )));
    }
    Ok((2.0 * PI.sqrt()).ln() - c.ln() - shrink.ln() - 0.5 * mf.ln()
        + 0.5 * mf * ratio.ln()
        + b
        - 0.5 * mf)
}

pub fn arl_fixed(q: ArlQuery) -> Result<f64> {
    log_arl_fixed(q).map(f64::exp)
}

/// Threshold minimising the approximate ARL at `(M, w)`.
///
/// The approximation diverges as `b -> M/2` (both `c` and `1 - M/2b`
/// vanish), so it is monotone only to the right of this point.
pub fn log_arl_minimizer(m: usize, w: usize) -> Result<(f64, f64)> {
    let half = 0.5 * m as f64;
    let f = |b: f64| log_arl_fixed(ArlQuery::new(m, b, w));
    // geometric scan away from M/2 until the log ARL turns upward
    let mut step = 1e-6 * half.max(1.0);
    let mut prev = (half + step, f(half + step)?);
    let mut lo = half;
    loop {
        step *= 2.0;
        let b = half + step;
        let v = f(b)?;
        if v > prev.1 {
            break;
        }
        lo = prev.0;
        prev = (b, v);
        if step > 1e12 {
            return Err(Error::domain("could not bracket the ARL minimum"));
        }
    }
    let mut hi = half + step;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > 1e-10 * hi {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let b = 0.5 * (lo + hi);
    Ok((b, f(b)?))
}

/// Threshold `b` with `arl_fixed(M, b, w) = target_arl`, by bisection on
/// the increasing branch `[b_min, b_hi]`; `b_hi` is doubled (as a distance
/// from `b_min`) until the ARL exceeds the target.
pub fn calibrate_b(m: usize, w: usize, target_arl: f64) -> Result<f64> {
    if !(target_arl > 1.0) || !target_arl.is_finite() {
        return Err(Error::domain(format!("target ARL must exceed 1, got {target_arl}")));
    }
    let (b_min, log_min) = log_arl_minimizer(m, w)?;
    let log_target = target_arl.ln();
    if log_target < log_min {
        return Err(Error::domain(format!(
            "target ARL {target_arl} is below the smallest value {:.4} the approximation attains for M={m}, w={w}",
            log_min.exp()
        )));
    }
    let f = |b: f64| log_arl_fixed(ArlQuery::new(m, b, w));
    let mut width = 1.0;
    let mut hi = b_min + width;
    let mut doublings = 0;
    while f(hi)? < log_target {
        width *= 2.0;
        hi = b_min + width;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::domain("bracket expansion failed"));
        }
    }
    let mut lo = b_min;
    // |ARL - target| / target <= 1e-6  <=>  |log ARL - log target| <~ 1e-6
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v - log_target).abs() <= 1e-7 || hi - lo <= 1e-13 * hi {
            return Ok(mid);
        }
        if v < log_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// ARL of the subsampled (time-varying) procedure observing `M` of `N`
/// entries per step: the full-data ARL at threshold `b` dilated by the
/// sampling rate,
///
/// ```text
/// ARL_tv(b) = ARL_fixed(N, b, w) · N / M
/// ```
///
/// Identical to [`arl_fixed`] when `M = N`.
pub fn arl_timevarying(n: usize, m: usize, b: f64, w: usize) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::domain(format!("need 1 <= M <= N, got M={m}, N={n}")));
    }
    let base = log_arl_fixed(ArlQuery::new(n, b, w))?;
    if m == n {
        return Ok(base.exp());
    }
    Ok((base + (n as f64 / m as f64).ln()).exp())
}

/// The time-varying ARL with the rescaled threshold `b' = b N / M`
/// substituted into the fixed-projection formula at dimension `N`.
pub fn arl_timevarying_as_printed(n: usize, m: usize, b: f64, w: usize) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::domain(format!("need 1 <= M <= N, got M={m}, N={n}")));
    }
    arl_fixed(ArlQuery::new(n, b * n as f64 / m as f64, w))
}

/// Inverse of [`arl_timevarying`] in `b`.
pub fn calibrate_b_timevarying(n: usize, m: usize, w: usize, target_arl: f64) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::domain(format!("need 1 <= M <= N, got M={m}, N={n}")));
    }
    calibrate_b(n, w, target_arl * m as f64 / n as f64)
}
