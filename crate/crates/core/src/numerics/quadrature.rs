use crate::numerics::nu_approx;
use crate::{Error, Result};

pub const QUAD_ABS_TOL: f64 = 1e-9;
pub const QUAD_MAX_DEPTH: u32 = 60;

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute
/// tolerance `tol` and bisection depth capped at [`QUAD_MAX_DEPTH`].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    refine(&f, a, b, fa, fm, fb, whole, tol, QUAD_MAX_DEPTH)
}

/// `integral_lo^hi u nu(u)^2 du`, the constant `c(M, b, w)` of the ARL
/// approximation once the limits are fixed.
pub fn integrate_u_nu2(lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(Error::domain(format!(
            "integration limits must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let integrand = |u: f64| {
        let v = nu_approx(u).expect("u > 0 inside the integration range");
        u * v * v
    };
    Ok(adaptive_simpson(integrand, lo, hi, QUAD_ABS_TOL).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polynomial_is_exact() {
        let q = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((q - 0.0).abs() < 1e-12);
        let q = adaptive_simpson(|x| x.exp(), 0.0, 1.0, 1e-12);
        assert!((q - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn degenerate_interval() {
        assert_eq!(integrate_u_nu2(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_limits() {
        assert!(integrate_u_nu2(0.0, 1.0).is_err());
        assert!(integrate_u_nu2(-1.0, 1.0).is_err());
        assert!(integrate_u_nu2(2.0, 1.0).is_err());
    }

    #[test]
    fn matches_high_precision_reference() {
        // mpmath quad of u nu(u)^2 over [0.5, 3]
        let v = integrate_u_nu2(0.5, 3.0).unwrap();
        assert!((v - 0.552_010_843_282_960_5).abs() < 1e-9, "{v}");
    }

    #[test]
    fn table_one_constant() {
        // M=100, b=84.65, w=200: mpmath gives c = 0.714047266337735 and an
        // ARL of 5003.31.
        let (m, b, w): (f64, f64, f64) = (100.0, 84.65, 200.0);
        let f = 1.0 - m / (2.0 * b);
        let lo = (2.0 * b / w).sqrt() * f;
        let hi = (2.0 * b).sqrt() * f;
        let c = integrate_u_nu2(lo, hi).unwrap();
        assert!((c - 0.714_047_266_337_735).abs() < 1e-9, "{c}");
    }

    proptest! {
        #[test]
        fn additive_over_subintervals(a in 0.1f64..10.0, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let b = a + (10.0 - a) * t1.max(t2);
            let m = a + (b - a) * t1.min(t2);
            let whole = integrate_u_nu2(a, b).unwrap();
            let split = integrate_u_nu2(a, m).unwrap() + integrate_u_nu2(m, b).unwrap();
            prop_assert!((whole - split).abs() <= 2e-9);
            prop_assert!(whole >= 0.0);
        }
    }
}
