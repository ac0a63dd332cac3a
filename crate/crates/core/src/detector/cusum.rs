use super::run::{Alarm, SequentialDetector};
use crate::error::check_dim;
use crate::{Error, Result};

/// Independent one-sided CUSUMs per coordinate against a prescribed
/// post-change mean `r`, ignoring any cross-covariance:
///
/// ```text
/// s_n <- max(0, s_n + (y_n - r_n / 2) r_n),   alarm when Σ s_n > b
/// ```
#[derive(Debug, Clone)]
pub struct CusumBaseline {
    reference: Vec<f64>,
    states: Vec<f64>,
    last_zero: Vec<usize>,
    threshold: f64,
    t: usize,
}

impl CusumBaseline {
    pub fn new(reference: Vec<f64>, threshold: f64) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::domain("reference mean must be nonempty"));
        }
        let m = reference.len();
        Ok(CusumBaseline {
            reference,
            states: vec![0.0; m],
            last_zero: vec![0; m],
            threshold,
            t: 0,
        })
    }

    /// All-ones reference mean.
    pub fn all_ones(dim: usize, threshold: f64) -> Result<Self> {
        Self::new(vec![1.0; dim], threshold)
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn reset(&mut self) {
        self.states.iter_mut().for_each(|s| *s = 0.0);
        self.last_zero.iter_mut().for_each(|s| *s = 0);
        self.t = 0;
    }

    /// Advances and returns `(Σ s_n, khat)` with `khat` the last time the
    /// largest state was zero.
    pub fn push(&mut self, y: &[f64]) -> (f64, usize) {
        self.t += 1;
        let mut total = 0.0;
        let mut top = (f64::NEG_INFINITY, 0);
        for (n, (s, (&yn, &r))) in self
            .states
            .iter_mut()
            .zip(y.iter().zip(&self.reference))
            .enumerate()
        {
            *s = (*s + (yn - 0.5 * r) * r).max(0.0);
            if *s == 0.0 {
                self.last_zero[n] = self.t;
            }
            total += *s;
            if *s > top.0 {
                top = (*s, n);
            }
        }
        (total, self.last_zero[top.1])
    }

    pub fn step_cusum(&mut self, y: &[f64]) -> Result<Alarm> {
        check_dim(self.reference.len(), y.len())?;
        let (statistic, khat) = self.push(y);
        Ok(Alarm {
            time: self.t,
            statistic,
            khat,
            fired: statistic > self.threshold,
        })
    }
}

impl SequentialDetector for CusumBaseline {
    type Obs = [f64];

    fn step(&mut self, obs: &[f64]) -> Result<Alarm> {
        self.step_cusum(obs)
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn time(&self) -> usize {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_drift_stays_at_zero() {
        let mut c = CusumBaseline::all_ones(3, 10.0).unwrap();
        for _ in 0..10 {
            let a = c.step_cusum(&[0.0; 3]).unwrap();
            assert_eq!(a.statistic, 0.0);
        }
        assert!(c.states().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn grows_by_half_r_squared() {
        let r = vec![1.0, 2.0];
        let mut c = CusumBaseline::new(r.clone(), f64::INFINITY).unwrap();
        for t in 1..=5 {
            c.step_cusum(&r).unwrap();
            assert_eq!(c.states(), &[0.5 * t as f64, 2.0 * t as f64]);
        }
    }

    #[test]
    fn khat_is_last_reset() {
        let mut c = CusumBaseline::all_ones(1, 2.0).unwrap();
        c.step_cusum(&[0.0]).unwrap();
        c.step_cusum(&[0.0]).unwrap();
        let a = loop {
            let a = c.step_cusum(&[3.0]).unwrap();
            if a.fired {
                break a;
            }
        };
        assert_eq!(a.khat, 2);
        assert!(c.step_cusum(&[0.0, 1.0]).is_err());
    }
}
