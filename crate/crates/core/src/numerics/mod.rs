//! Scalar special functions, quadrature, SPD factorisation and seeded
//! random streams shared by the rest of the crate.

mod linalg;
mod quadrature;
mod rng;
mod special;

pub use linalg::{cholesky_spd, solve_lower, sq_dist, SpdFactor};
pub use quadrature::{adaptive_simpson, integrate_u_nu2, QUAD_ABS_TOL, QUAD_MAX_DEPTH};
pub use rng::{splitmix64, RngStream};
pub use special::{kolmogorov_pvalue, nu_approx, std_normal_cdf, std_normal_pdf};
