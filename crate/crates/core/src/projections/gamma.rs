use super::matrix::ProjectionMatrix;
use crate::numerics::solve_lower;
use crate::{Error, Result};

/// `Γ = ‖Vᵀμ‖² / ‖μ‖² = μᵀAᵀ(AAᵀ)⁻¹Aμ / ‖μ‖²`, evaluated as
/// `‖L⁻¹Aμ‖² / ‖μ‖²` and clamped to `[0, 1]` against rounding.
pub fn gamma_coefficient(a: &ProjectionMatrix, mu: &[f64]) -> Result<f64> {
    let norm2: f64 = mu.iter().map(|x| x * x).sum();
    if !(norm2 > 0.0) {
        return Err(Error::domain("gamma requires a nonzero mean vector"));
    }
    let z = solve_lower(a.gram_factor(), &a.apply(mu)?)?;
    let proj: f64 = z.iter().map(|x| x * x).sum();
    Ok((proj / norm2).clamp(0.0, 1.0))
}

/// Beta law of Γ under a Gaussian projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLaw {
    pub alpha: f64,
    pub beta: f64,
    pub mean: f64,
    /// `M >= N`: Γ is identically 1.
    pub degenerate: bool,
}

pub fn gamma_law_params(m: usize, n: usize) -> GammaLaw {
    if m >= n {
        return GammaLaw {
            alpha: m as f64 / 2.0,
            beta: 0.0,
            mean: 1.0,
            degenerate: true,
        };
    }
    GammaLaw {
        alpha: m as f64 / 2.0,
        beta: (n - m) as f64 / 2.0,
        mean: m as f64 / n as f64,
        degenerate: false,
    }
}

/// `M (1 - ε) / (d N)`.
pub fn expander_gamma_lower_bound(m: usize, n: usize, d: usize, epsilon: f64) -> f64 {
    m as f64 * (1.0 - epsilon) / (d as f64 * n as f64)
}
