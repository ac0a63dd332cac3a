//! Sketching operators and the signal-power ratio Gamma.

mod expander;
mod gamma;
mod io;
mod mask;
mod matrix;
mod topology;

pub use expander::expander_projection;
pub use gamma::{expander_gamma_lower_bound, gamma_coefficient, gamma_law_params, GammaLaw};
pub use mask::{subsample_mask, ObservationMask};
pub use matrix::{gaussian_projection, ProjectionKind, ProjectionMatrix, ProjectionMeta};
pub use topology::{sample_sensing_nodes, topology_projection, GridTopology, SensingSampler};
