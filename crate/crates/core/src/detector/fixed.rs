use super::run::{Alarm, SequentialDetector};
use crate::error::check_dim;
use crate::numerics::{sq_dist, SpdFactor};
use crate::projections::ProjectionMatrix;
use crate::{Error, Result};

/// Maps sketches `y` to unit-covariance coordinates `z = L⁻¹y` where
/// `L Lᵀ = A Aᵀ`.
#[derive(Debug, Clone)]
pub struct Whitener {
    factor: SpdFactor,
}

impl Whitener {
    pub fn new(factor: SpdFactor) -> Self {
        Whitener { factor }
    }

    pub fn from_projection(a: &ProjectionMatrix) -> Self {
        Whitener {
            factor: a.gram_factor().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn factor(&self) -> &SpdFactor {
        &self.factor
    }

    pub fn whiten_into(&self, y: &[f64], z: &mut [f64]) -> Result<()> {
        check_dim(self.dim(), y.len())?;
        check_dim(self.dim(), z.len())?;
        z.copy_from_slice(y);
        self.factor.solve_in_place(z);
        Ok(())
    }
}

/// Windowed GLR on unit-covariance inputs:
///
/// ```text
/// stat_t = max_{max(0, t-w) <= k < t} ‖S_t - S_k‖² / (2 (t - k))
/// ```
///
/// with `S_t` the running sum. The last `w + 1` sums live in a ring.
#[derive(Debug, Clone)]
pub struct WindowedGlr {
    dim: usize,
    window: usize,
    threshold: f64,
    ring: Vec<f64>,
    t: usize,
}

impl WindowedGlr {
    pub fn new(dim: usize, window: usize, threshold: f64) -> Result<Self> {
        if dim == 0 || window == 0 {
            return Err(Error::domain("dimension and window must be positive"));
        }
        if threshold.is_nan() {
            return Err(Error::domain("threshold is NaN"));
        }
        Ok(WindowedGlr {
            dim,
            window,
            threshold,
            ring: vec![0.0; (window + 1) * dim],
            t: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn reset(&mut self) {
        self.ring.iter_mut().for_each(|x| *x = 0.0);
        self.t = 0;
    }

    #[inline]
    fn slot(&self, k: usize) -> std::ops::Range<usize> {
        let s = k % (self.window + 1) * self.dim;
        s..s + self.dim
    }

    /// Advances with a whitened sample and returns `(statistic, khat)`.
    pub fn push(&mut self, z: &[f64]) -> (f64, usize) {
        debug_assert_eq!(z.len(), self.dim);
        let prev = self.slot(self.t);
        self.t += 1;
        let cur = self.slot(self.t);
        for (i, zi) in z.iter().enumerate() {
            self.ring[cur.start + i] = self.ring[prev.start + i] + zi;
        }

        let t = self.t;
        let first = t.saturating_sub(self.window);
        let ring = self.window + 1;
        let dim = self.dim;
        let s_t = &self.ring[cur];
        let mut best = f64::NEG_INFINITY;
        let mut khat = first;
        let mut slot = first % ring;
        for k in first..t {
            let start = slot * dim;
            let v = sq_dist(s_t, &self.ring[start..start + dim]) / (2 * (t - k)) as f64;
            if v > best {
                best = v;
                khat = k;
            }
            slot += 1;
            if slot == ring {
                slot = 0;
            }
        }
        (best, khat)
    }

    pub fn step_whitened(&mut self, z: &[f64]) -> Result<Alarm> {
        check_dim(self.dim, z.len())?;
        let (statistic, khat) = self.push(z);
        Ok(Alarm {
            time: self.t,
            statistic,
            khat,
            fired: statistic > self.threshold,
        })
    }
}

/// Fixed-projection detector: whitens each sketch, then runs
/// [`WindowedGlr`].
#[derive(Debug, Clone)]
pub struct FixedSketchDetector {
    whitener: Whitener,
    glr: WindowedGlr,
    scratch: Vec<f64>,
}

impl FixedSketchDetector {
    pub fn new(whitener: Whitener, window: usize, threshold: f64) -> Result<Self> {
        let m = whitener.dim();
        Ok(FixedSketchDetector {
            whitener,
            glr: WindowedGlr::new(m, window, threshold)?,
            scratch: vec![0.0; m],
        })
    }

    pub fn for_projection(a: &ProjectionMatrix, window: usize, threshold: f64) -> Result<Self> {
        Self::new(Whitener::from_projection(a), window, threshold)
    }

    pub fn whitener(&self) -> &Whitener {
        &self.whitener
    }

    pub fn window(&self) -> usize {
        self.glr.window()
    }

    pub fn step_fixed(&mut self, y: &[f64]) -> Result<Alarm> {
        self.whitener.whiten_into(y, &mut self.scratch)?;
        let (statistic, khat) = self.glr.push(&self.scratch);
        Ok(Alarm {
            time: self.glr.time(),
            statistic,
            khat,
            fired: statistic > self.glr.threshold(),
        })
    }
}

impl SequentialDetector for FixedSketchDetector {
    type Obs = [f64];

    fn step(&mut self, obs: &[f64]) -> Result<Alarm> {
        self.step_fixed(obs)
    }

    fn threshold(&self) -> f64 {
        self.glr.threshold()
    }

    fn time(&self) -> usize {
        self.glr.time()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::run::{run_to_alarm, RunOutcome};

    fn scalar(window: usize, b: f64) -> FixedSketchDetector {
        FixedSketchDetector::new(Whitener::new(SpdFactor::identity(1)), window, b).unwrap()
    }

    #[test]
    fn hand_arithmetic() {
        let mut d = scalar(5, 10.0);
        let a1 = d.step_fixed(&[1.0]).unwrap();
        assert_eq!((a1.time, a1.statistic, a1.khat), (1, 0.5, 0));
        let a2 = d.step_fixed(&[1.0]).unwrap();
        assert_eq!(a2.statistic, 1.0);
        assert_eq!(a2.khat, 0);
        assert!(!a2.fired);
    }

    #[test]
    fn zeros_give_zero() {
        let mut d = FixedSketchDetector::new(Whitener::new(SpdFactor::identity(3)), 4, 1.0).unwrap();
        for t in 1..20usize {
            let a = d.step_fixed(&[0.0; 3]).unwrap();
            assert_eq!(a.statistic, 0.0);
            assert!(a.khat >= t.saturating_sub(4) && a.khat < t);
        }
        assert!(d.step_fixed(&[0.0; 2]).is_err());
    }

    #[test]
    fn window_restricts_k() {
        // After a burst the best start is right before it; with w=1 only
        // the latest sample counts.
        let mut d = scalar(1, f64::INFINITY);
        for x in [3.0, 0.0, 0.0] {
            d.step_fixed(&[x]).unwrap();
        }
        let a = d.step_fixed(&[2.0]).unwrap();
        assert_eq!((a.statistic, a.khat), (2.0, 3));
    }

    #[test]
    fn tiny_threshold_fires_at_once() {
        let mut d = scalar(10, 1e-12);
        let out = run_to_alarm(&mut d, [[0.3]].iter().map(|x| &x[..]), 100).unwrap();
        assert_eq!(out.fired().unwrap().time, 1);
    }

    #[test]
    fn infinite_threshold_caps() {
        let mut d = scalar(10, f64::INFINITY);
        let data = vec![[5.0]; 50];
        match run_to_alarm(&mut d, data.iter().map(|x| &x[..]), 20).unwrap() {
            RunOutcome::Capped(a) => assert_eq!(a.time, 20),
            other => panic!("{other:?}"),
        }
        let mut d = scalar(10, f64::INFINITY);
        match run_to_alarm(&mut d, data.iter().take(5).map(|x| &x[..]), 20).unwrap() {
            RunOutcome::Exhausted { steps, .. } => assert_eq!(steps, 5),
            other => panic!("{other:?}"),
        }
    }
}
