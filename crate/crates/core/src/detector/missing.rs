use std::collections::VecDeque;

use super::run::{Alarm, SequentialDetector};
use crate::projections::ObservationMask;
use crate::{Error, Result};

/// Observed entries at one time step, aligned with `mask.observed()`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedSample {
    pub mask: ObservationMask,
    pub values: Vec<f64>,
}

/// Windowed GLR for entry-subsampled observations:
///
/// ```text
/// stat_t = max_k 1/2 sum_n (sum of x_n observed in (k, t])² / V_n(k, t)
/// ```
///
/// where `V_n(k, t)` counts the observations of entry `n` in `(k, t]`;
/// entries never observed contribute 0.
///
/// Each candidate `k` keeps its running value `G_k`. An observation of
/// entry `n` walks the entry's recent history once to update every live
/// `G_k`, so a step costs O(w · observed) regardless of `N`.
#[derive(Debug, Clone)]
pub struct MissingDataDetector {
    n: usize,
    window: usize,
    threshold: f64,
    t: usize,
    history: Vec<VecDeque<(usize, f64)>>,
    g: Vec<f64>,
}

impl MissingDataDetector {
    pub fn new(n: usize, window: usize, threshold: f64) -> Result<Self> {
        if n == 0 || window == 0 {
            return Err(Error::domain("dimension and window must be positive"));
        }
        if threshold.is_nan() {
            return Err(Error::domain("threshold is NaN"));
        }
        Ok(MissingDataDetector {
            n,
            window,
            threshold,
            t: 0,
            history: vec![VecDeque::new(); n],
            g: vec![0.0; window + 1],
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn reset(&mut self) {
        self.t = 0;
        self.history.iter_mut().for_each(VecDeque::clear);
    }

    pub fn step_missing(&mut self, mask: &ObservationMask, values: &[f64]) -> Result<Alarm> {
        if mask.dim() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: mask.dim(),
            });
        }
        self.step_observed(mask.observed(), values)
    }

    /// `observed` must be strictly increasing entry indices below `N`.
    pub fn step_observed(&mut self, observed: &[usize], values: &[f64]) -> Result<Alarm> {
        crate::error::check_dim(observed.len(), values.len())?;
        if observed.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("observed indices must be strictly increasing"));
        }
        if let Some(&last) = observed.last() {
            if last >= self.n {
                return Err(Error::domain(format!("observed index {last} out of range 0..{}", self.n)));
            }
        }

        let ring = self.window + 1;
        let t = self.t;
        let first = (t + 1).saturating_sub(self.window);
        self.g[t % ring] = 0.0;
        for (&n, &x) in observed.iter().zip(values) {
            let hist = &mut self.history[n];
            while hist.front().is_some_and(|&(time, _)| time <= first) {
                hist.pop_front();
            }
            // s, v: sum and count of entry n over (k, t], built up as k
            // moves back from t
            let (mut s, mut v) = (0.0, 0u32);
            let mut idx = hist.len();
            for k in (first..=t).rev() {
                while idx > 0 && hist[idx - 1].0 > k {
                    idx -= 1;
                    s += hist[idx].1;
                    v += 1;
                }
                let old = if v > 0 { s * s / v as f64 } else { 0.0 };
                let s1 = s + x;
                self.g[k % ring] += 0.5 * (s1 * s1 / (v + 1) as f64 - old);
            }
            hist.push_back((t + 1, x));
        }
        self.t += 1;

        let mut best = f64::NEG_INFINITY;
        let mut khat = first;
        for k in first..=t {
            let v = self.g[k % ring];
            if v > best {
                best = v;
                khat = k;
            }
        }
        let statistic = best.max(0.0);
        Ok(Alarm {
            time: self.t,
            statistic,
            khat,
            fired: statistic > self.threshold,
        })
    }
}

impl SequentialDetector for MissingDataDetector {
    type Obs = MaskedSample;

    fn step(&mut self, obs: &MaskedSample) -> Result<Alarm> {
        self.step_missing(&obs.mask, &obs.values)
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
    fn single_term() {
        let mut d = MissingDataDetector::new(2, 10, 100.0).unwrap();
        let a = d.step_observed(&[0], &[2.0]).unwrap();
        assert_eq!((a.statistic, a.khat, a.time), (2.0, 0, 1));
    }

    #[test]
    fn distinct_entries_add_squares() {
        let mut d = MissingDataDetector::new(5, 10, 100.0).unwrap();
        let vals = [1.5, -2.0, 0.5];
        let mut last = None;
        for (i, v) in vals.iter().enumerate() {
            last = Some(d.step_observed(&[i], &[*v]).unwrap());
        }
        let expect = 0.5 * vals.iter().map(|v| v * v).sum::<f64>();
        assert!((last.unwrap().statistic - expect).abs() < 1e-14);
    }

    #[test]
    fn repeated_entry_averages() {
        // entry 0 observed twice with 1 and 3: best k=0 gives (4)^2/(2*2) = 4
        let mut d = MissingDataDetector::new(1, 10, 100.0).unwrap();
        d.step_observed(&[0], &[1.0]).unwrap();
        let a = d.step_observed(&[0], &[3.0]).unwrap();
        assert_eq!((a.statistic, a.khat), (4.5, 1));
        let mut d = MissingDataDetector::new(1, 10, 100.0).unwrap();
        d.step_observed(&[0], &[3.0]).unwrap();
        let a = d.step_observed(&[0], &[3.0]).unwrap();
        assert_eq!((a.statistic, a.khat), (9.0, 0));
    }

    #[test]
    fn old_observations_leave_window() {
        let mut d = MissingDataDetector::new(2, 2, 100.0).unwrap();
        d.step_observed(&[0], &[10.0]).unwrap();
        d.step_observed(&[], &[]).unwrap();
        let a = d.step_observed(&[1], &[1.0]).unwrap();
        assert_eq!(a.statistic, 0.5);
    }

    #[test]
    fn empty_step_keeps_statistic() {
        let mut d = MissingDataDetector::new(3, 10, 100.0).unwrap();
        d.step_observed(&[1], &[3.0]).unwrap();
        let a = d.step_observed(&[], &[]).unwrap();
        assert_eq!(a.statistic, 4.5);
    }

    #[test]
    fn rejects_bad_indices() {
        let mut d = MissingDataDetector::new(3, 10, 1.0).unwrap();
        assert!(d.step_observed(&[3], &[1.0]).is_err());
        assert!(d.step_observed(&[1, 1], &[1.0, 1.0]).is_err());
        assert!(d.step_observed(&[0], &[]).is_err());
        assert!(d.step_missing(&ObservationMask::full(4), &[0.0; 4]).is_err());
    }
}
