//! Direct-formula GLR evaluations used to cross-check the streaming
//! detectors. Both go through nalgebra's dense solvers rather than the
//! crate's own Cholesky code.

use nalgebra::{DMatrix, DVector};

use crate::projections::ProjectionMatrix;
use crate::{Error, Result};

fn to_dmatrix(a: &ProjectionMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.entries())
}

/// `(t - k)/2 · ȳᵀ (A Aᵀ)⁻¹ ȳ` with `ȳ` the mean of `ys[k..t]`, where
/// `ys = [y_1, ..., y_t]`.
pub fn glr_direct(a: &ProjectionMatrix, ys: &[Vec<f64>], k: usize) -> Result<f64> {
    let t = ys.len();
    if k >= t {
        return Err(Error::domain(format!("window start {k} must precede t = {t}")));
    }
    let m = a.rows();
    let mut s = DVector::zeros(m);
    for y in &ys[k..] {
        crate::error::check_dim(m, y.len())?;
        s += DVector::from_column_slice(y);
    }
    let am = to_dmatrix(a);
    let gram = &am * am.transpose();
    let sol = gram
        .lu()
        .solve(&s)
        .ok_or_else(|| Error::domain("A Aᵀ is singular"))?;
    Ok(s.dot(&sol) / (2.0 * (t - k) as f64))
}

/// Maximum of [`glr_direct`] over `k ∈ [max(0, t - w), t - 1]`.
pub fn glr_direct_max(a: &ProjectionMatrix, ys: &[Vec<f64>], window: usize) -> Result<f64> {
    let t = ys.len();
    let mut best = f64::NEG_INFINITY;
    for k in t.saturating_sub(window)..t {
        best = best.max(glr_direct(a, ys, k)?);
    }
    Ok(best)
}

/// Time-varying GLR over the interval spanned by the lists:
///
/// ```text
/// 1/2 · uᵀ B⁺ u,   u = Σ Aᵢᵀ(AᵢAᵢᵀ)⁻¹yᵢ,   B = Σ Aᵢᵀ(AᵢAᵢᵀ)⁻¹Aᵢ
/// ```
///
/// `B⁺` is the SVD pseudo-inverse with singular values below
/// `1e-10 · σ_max` dropped. Intended for small `N`.
pub fn glr_timevarying_pinv(a_list: &[ProjectionMatrix], y_list: &[Vec<f64>]) -> Result<f64> {
    crate::error::check_dim(a_list.len(), y_list.len())?;
    let Some(first) = a_list.first() else {
        return Ok(0.0);
    };
    let n = first.cols();
    let mut u = DVector::zeros(n);
    let mut b = DMatrix::zeros(n, n);
    for (a, y) in a_list.iter().zip(y_list) {
        crate::error::check_dim(n, a.cols())?;
        crate::error::check_dim(a.rows(), y.len())?;
        let am = to_dmatrix(a);
        let gram = &am * am.transpose();
        let lu = gram.lu();
        let gy = lu
            .solve(&DVector::from_column_slice(y))
            .ok_or_else(|| Error::domain("Aᵢ Aᵢᵀ is singular"))?;
        let ga = lu.solve(&am).ok_or_else(|| Error::domain("Aᵢ Aᵢᵀ is singular"))?;
        u += am.transpose() * gy;
        b += am.transpose() * ga;
    }
    let svd = b.svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Ok(0.0);
    }
    let pinv = svd
        .pseudo_inverse(1e-10 * smax)
        .map_err(|e| Error::domain(e.to_string()))?;
    Ok(0.5 * u.dot(&(pinv * &u)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_identity_sample() {
        let a = ProjectionMatrix::identity(3).unwrap();
        let y = vec![vec![1.0, -2.0, 2.0]];
        assert!((glr_direct(&a, &y, 0).unwrap() - 4.5).abs() < 1e-14);
        let a_list = vec![a.clone()];
        assert!((glr_timevarying_pinv(&a_list, &y).unwrap() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn zeros_are_zero() {
        let a = ProjectionMatrix::identity(2).unwrap();
        let ys = vec![vec![0.0; 2]; 4];
        assert_eq!(glr_direct_max(&a, &ys, 10).unwrap(), 0.0);
        assert_eq!(glr_timevarying_pinv(&vec![a; 4], &ys).unwrap(), 0.0);
    }

    #[test]
    fn bad_window_start() {
        let a = ProjectionMatrix::identity(1).unwrap();
        assert!(glr_direct(&a, &[vec![1.0]], 1).is_err());
    }
}
