use rayon::prelude::*;

use super::engine::{PathRecord, Prepared};
use super::plan::{ChangeTime, Method, ProjectionSpec, SimPlan};
use crate::theory::{calibrate_b, calibrate_b_timevarying};
use crate::{Error, Result};

/// Replicate-parallel map with results returned in replicate order.
pub struct Executor {
    pool: rayon::ThreadPool,
}

impl Executor {
    /// `None` uses the machine's available parallelism.
    pub fn new(threads: Option<usize>) -> Result<Self> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            if t == 0 {
                return Err(Error::domain("thread count must be positive"));
            }
            builder = builder.num_threads(t);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::domain(format!("cannot start thread pool: {e}")))?;
        Ok(Executor { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..n as u64).into_par_iter().map(&f).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub mean: f64,
    /// Standard error of `mean`.
    pub stderr: f64,
    /// Replicate standard deviation.
    pub std_dev: f64,
    pub replicates_used: usize,
    /// Replicates that hit the horizon cap; they enter the mean at the cap,
    /// so a nonzero count means `mean` is biased low.
    pub capped_count: usize,
}

impl SimResult {
    pub fn is_clean(&self) -> bool {
        self.capped_count == 0
    }

    fn from_paths(paths: &[PathRecord], b: f64, cap: usize) -> SimResult {
        let n = paths.len() as f64;
        let (mut sum, mut sum2, mut capped) = (0.0, 0.0, 0);
        for p in paths {
            let len = match p.run_length(b) {
                Some(t) => t as f64,
                None => {
                    capped += 1;
                    cap as f64
                }
            };
            sum += len;
            sum2 += len * len;
        }
        let mean = sum / n;
        let var = if paths.len() > 1 {
            ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        SimResult {
            mean,
            stderr: (var / n).sqrt(),
            std_dev: var.sqrt(),
            replicates_used: paths.len(),
            capped_count: capped,
        }
    }
}

/// Simulates every replicate of `plan` up to the stopping level `b_stop`.
pub fn simulate_paths(plan: &SimPlan, b_stop: f64, exec: &Executor) -> Result<Vec<PathRecord>> {
    let prep = Prepared::new(plan)?;
    exec.map(plan.replicates, |r| prep.run_path(plan, r, b_stop, plan.horizon_cap))
        .into_iter()
        .collect()
}

/// Mean run length at the plan's threshold.
pub fn simulate(plan: &SimPlan, exec: &Executor) -> Result<SimResult> {
    let b = plan.detector.threshold;
    let paths = simulate_paths(plan, b, exec)?;
    Ok(SimResult::from_paths(&paths, b, plan.horizon_cap))
}

/// ARL estimate; fails if every replicate reaches the horizon cap.
pub fn simulate_arl(plan: &SimPlan, exec: &Executor) -> Result<SimResult> {
    if plan.data.change != ChangeTime::Never {
        return Err(Error::domain("ARL plans must have no change"));
    }
    let r = simulate(plan, exec)?;
    if r.capped_count == r.replicates_used {
        return Err(Error::Estimation(format!(
            "all {} replicates reached the horizon cap {}",
            r.replicates_used, plan.horizon_cap
        )));
    }
    Ok(r)
}

/// EDD estimate with the change active from the first sample.
pub fn simulate_edd(plan: &SimPlan, exec: &Executor) -> Result<SimResult> {
    if plan.data.change != ChangeTime::Immediate {
        return Err(Error::domain("EDD plans must have the change at time 0"));
    }
    simulate(plan, exec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub b: f64,
    /// Simulated ARL at `b` on the calibration paths.
    pub estimate: SimResult,
    /// Final stopping level of the simulated paths.
    pub b_stop: f64,
    /// Number of times the paths were re-simulated to a higher level.
    pub expansions: usize,
}

fn initial_level(plan: &SimPlan, target: f64) -> f64 {
    let b = plan.detector.threshold;
    if b.is_finite() && b > 0.0 {
        return b;
    }
    let n = plan.data.n;
    let w = plan.detector.window;
    let theory = match (&plan.detector.method, &plan.detector.projection) {
        (Method::CusumBaseline, _) => None,
        (_, ProjectionSpec::Subsample { m }) => calibrate_b_timevarying(n, *m, w, target).ok(),
        (_, ProjectionSpec::GridNodes { topology, m, .. }) => {
            calibrate_b_timevarying(topology.node_count(), *m, w, target).ok()
        }
        (_, spec) => calibrate_b(spec.sketch_dim(n), w, target).ok(),
    };
    theory.map_or(10.0, |b| b + 1.0)
}

/// Threshold whose simulated ARL matches `target_arl` within `rel_tol`.
///
/// All replicate paths are simulated once up to a stopping level
/// `b_stop` and their record values kept; the run length at any
/// `b <= b_stop` is then read off exactly, so bisection reuses the same
/// paths for every candidate (common random numbers) and the ARL estimate
/// is monotone in `b`. If `b_stop` is too low the same seeded paths are
/// re-simulated to a higher level.
pub fn calibrate_b_mc(plan: &SimPlan, target_arl: f64, rel_tol: f64, exec: &Executor) -> Result<Calibration> {
    if !(rel_tol >= 0.01) {
        return Err(Error::domain(format!("rel_tol must be at least 0.01, got {rel_tol}")));
    }
    if !(target_arl > 1.0) || !target_arl.is_finite() {
        return Err(Error::domain(format!("target ARL must exceed 1, got {target_arl}")));
    }
    if plan.data.change != ChangeTime::Never {
        return Err(Error::domain("calibration plans must have no change"));
    }
    let cap = plan.horizon_cap;
    let arl_at = |paths: &[PathRecord], b: f64| SimResult::from_paths(paths, b, cap);

    let mut b_stop = initial_level(plan, target_arl);
    let mut prev: Option<(f64, f64)> = None;
    let mut expansions = 0;
    let paths = loop {
        let paths = simulate_paths(plan, b_stop, exec)?;
        let est = arl_at(&paths, b_stop);
        if est.mean >= target_arl {
            break paths;
        }
        if est.capped_count == est.replicates_used {
            return Err(Error::Estimation(format!(
                "horizon cap {cap} too small to reach ARL {target_arl}"
            )));
        }
        expansions += 1;
        if expansions > 40 {
            return Err(Error::Estimation("could not bracket the target ARL".into()));
        }
        let log_a = est.mean.ln();
        let next = match prev {
            Some((b0, log_a0)) if log_a > log_a0 => {
                let slope = (log_a - log_a0) / (b_stop - b0);
                b_stop + 1.2 * (target_arl.ln() - log_a) / slope
            }
            _ => 1.25 * b_stop,
        };
        prev = Some((b_stop, log_a));
        b_stop = next.clamp(1.05 * b_stop, 2.0 * b_stop);
    };

    let (mut lo, mut hi) = (0.0f64, b_stop);
    if arl_at(&paths, lo).mean > target_arl {
        return Err(Error::Estimation("target ARL below the ARL at b = 0".into()));
    }
    let mut best = (hi, arl_at(&paths, hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let est = arl_at(&paths, mid);
        if (est.mean - target_arl).abs() < (best.1.mean - target_arl).abs() {
            best = (mid, est);
        }
        if (est.mean - target_arl).abs() <= rel_tol * target_arl || hi - lo <= 1e-9 * hi {
            break;
        }
        if est.mean < target_arl {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Calibration {
        b: best.0,
        estimate: best.1,
        b_stop,
        expansions,
    })
}
