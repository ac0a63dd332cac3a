use crate::numerics::{std_normal_cdf, std_normal_pdf, RngStream};
use crate::{Error, Result};

pub const DEFAULT_CORRECTION_REPLICATES: usize = 100_000;
pub const DEFAULT_CORRECTION_SEED: u64 = 0x5eed_c0de;

/// Correction terms of the EDD expansion for a Gaussian random walk with
/// increments `N(Δ²/2, Δ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkCorrections {
    /// Mean overshoot over a distant boundary.
    pub rho: f64,
    /// `E{min_{t>=0} S_t}`, nonpositive.
    pub emin: f64,
    /// Standard error of `rho`.
    pub mc_stderr: f64,
}

/// `emin` from the series `-Σ_i E{S_i⁻}` with
/// `E{S_i⁻} = σ_i φ(m_i/σ_i) - m_i Φ(-m_i/σ_i)`, `m_i = iΔ²/2`,
/// `σ_i = Δ√i`, stopped once a term drops below 1e-12. `rho` is the
/// Monte Carlo mean overshoot over the boundary `50 Δ²`.
pub fn walk_corrections(delta: f64, rng: &mut RngStream, replicates: usize) -> Result<WalkCorrections> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    if replicates < 2 {
        return Err(Error::domain("need at least two replicates for rho"));
    }
    let d2 = delta * delta;

    let mut emin = 0.0;
    for i in 1.. {
        let fi = i as f64;
        let mean = 0.5 * fi * d2;
        let sd = delta * fi.sqrt();
        let r = mean / sd;
        let term = sd * std_normal_pdf(r) - mean * std_normal_cdf(-r);
        emin -= term.max(0.0);
        if term < 1e-12 {
            break;
        }
    }

    let boundary = 50.0 * d2;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..replicates {
        let mut s = 0.0;
        while s <= boundary {
            s += 0.5 * d2 + delta * rng.normal();
        }
        let o = s - boundary;
        sum += o;
        sum2 += o * o;
    }
    let n = replicates as f64;
    let rho = sum / n;
    let var = (sum2 - n * rho * rho) / (n - 1.0);
    Ok(WalkCorrections {
        rho,
        emin,
        mc_stderr: (var.max(0.0) / n).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EddQuery {
    pub b: f64,
    pub m: usize,
    /// `Δ = ‖Vᵀμ‖`.
    pub delta: f64,
    /// Computed with [`DEFAULT_CORRECTION_SEED`] and
    /// [`DEFAULT_CORRECTION_REPLICATES`] when absent.
    pub corrections: Option<WalkCorrections>,
}

/// `(b + ρ - M/2 - E{min S}) / (Δ²/2)`.
pub fn edd_fixed(q: &EddQuery) -> Result<f64> {
    if !(q.delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive, got {}", q.delta)));
    }
    let c = match q.corrections {
        Some(c) => c,
        None => walk_corrections(
            q.delta,
            &mut RngStream::new(DEFAULT_CORRECTION_SEED, 0),
            DEFAULT_CORRECTION_REPLICATES,
        )?,
    };
    let half_d2 = 0.5 * q.delta * q.delta;
    Ok((q.b + c.rho - 0.5 * q.m as f64 - c.emin) / half_d2)
}

/// First-order EDD `b / (Δ²/2)`.
pub fn edd_first_order(b: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    Ok(2.0 * b / (delta * delta))
}

fn check_tv(b: f64, n: usize, m: usize, energy: f64) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::domain(format!("need 1 <= M <= N, got M={m}, N={n}")));
    }
    if !(2.0 * b > n as f64) {
        return Err(Error::domain(format!("need 2b > N, got b={b}, N={n}")));
    }
    if !(energy > 0.0) {
        return Err(Error::domain("signal energy must be positive"));
    }
    Ok(())
}

/// `((2b - N) / Σμ² - 1) · N / M`.
pub fn edd_timevarying(b: f64, n: usize, m: usize, energy: f64) -> Result<f64> {
    check_tv(b, n, m, energy)?;
    Ok(((2.0 * b - n as f64) / energy - 1.0) * n as f64 / m as f64)
}

/// `(2b - N) / Σμ² · N / M`.
pub fn edd_timevarying_without_minus_one(b: f64, n: usize, m: usize, energy: f64) -> Result<f64> {
    check_tv(b, n, m, energy)?;
    Ok((2.0 * b - n as f64) / energy * n as f64 / m as f64)
}

/// Ratio of sketched to full-data EDD, `(N/M) Γ`.
pub fn edd_ratio(n: usize, m: usize, gamma: f64) -> f64 {
    n as f64 / m as f64 * gamma
}
