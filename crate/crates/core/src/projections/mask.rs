use rand::seq::index;

use super::matrix::ProjectionMatrix;
use crate::numerics::RngStream;
use crate::{Error, Result};

/// The coordinates observed at one time step. Indices are zero-based,
/// sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    n: usize,
    observed: Vec<usize>,
}

impl ObservationMask {
    pub fn new(n: usize, mut observed: Vec<usize>) -> Result<Self> {
        observed.sort_unstable();
        if observed.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("observation mask has repeated indices"));
        }
        if let Some(&last) = observed.last() {
            if last >= n {
                return Err(Error::domain(format!("mask index {last} out of range 0..{n}")));
            }
        }
        Ok(ObservationMask { n, observed })
    }

    pub fn full(n: usize) -> Self {
        ObservationMask {
            n,
            observed: (0..n).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn to_projection(&self) -> Result<ProjectionMatrix> {
        ProjectionMatrix::row_selection(self.n, &self.observed)
    }
}

/// Uniformly random `m`-subset of `0..n`.
pub fn subsample_mask(n: usize, m: usize, rng: &mut RngStream) -> Result<ObservationMask> {
    if m == 0 || m > n {
        return Err(Error::domain(format!("subsample needs 1 <= M <= N, got M={m}, N={n}")));
    }
    let mut observed = index::sample(rng, n, m).into_vec();
    observed.sort_unstable();
    Ok(ObservationMask { n, observed })
}
