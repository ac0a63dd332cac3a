use crate::detector::{CusumBaseline, MissingDataDetector, WindowedGlr};
use crate::numerics::{solve_lower, RngStream};
use crate::projections::{ProjectionMatrix, SensingSampler};
use crate::Result;

use super::plan::{Method, ProjectionSpec, SimPlan};

/// Record values of one simulated statistic path: `(t, stat_t)` for every
/// `t` at which the statistic exceeded all earlier values. The path stops
/// once the statistic exceeds the stopping level or after the horizon cap.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub records: Vec<(u32, f64)>,
    pub steps: u32,
}

impl PathRecord {
    /// First alarm time at threshold `b`, `None` if the path never
    /// exceeded `b`. Only meaningful for `b` not above the stopping level.
    pub fn run_length(&self, b: f64) -> Option<u32> {
        self.records.iter().find(|&&(_, s)| s > b).map(|&(t, _)| t)
    }

    fn push(&mut self, t: u32, stat: f64) {
        if self.records.last().is_none_or(|&(_, s)| stat > s) {
            self.records.push((t, stat));
        }
    }
}

/// Plan-level state shared by all replicates.
pub(crate) struct Prepared {
    fixed: Option<ProjectionMatrix>,
    sampler: Option<SensingSampler>,
}

impl Prepared {
    pub(crate) fn new(plan: &SimPlan) -> Result<Self> {
        plan.validate()?;
        let spec = &plan.detector.projection;
        let fixed = plan.fixed_projection()?;
        let sampler = match spec {
            ProjectionSpec::GridNodes { topology, .. } => Some(SensingSampler::new(topology)),
            _ => None,
        };
        Ok(Prepared { fixed, sampler })
    }

    /// Simulates replicate `r` until the statistic exceeds `b_stop` or
    /// `cap` steps have been taken.
    pub(crate) fn run_path(&self, plan: &SimPlan, r: u64, b_stop: f64, cap: usize) -> Result<PathRecord> {
        let mut rng = RngStream::new(plan.root_seed, r);
        let spec = &plan.detector.projection;
        let n = plan.data.n;
        match spec {
            ProjectionSpec::Subsample { m } => {
                let mu = plan.data.draw_mean(&mut rng)?;
                subsample_path(n, *m, mu.as_deref(), plan.detector.window, &mut rng, b_stop, cap)
            }
            ProjectionSpec::GridNodes { topology, m, .. } => {
                let mu = plan.data.draw_mean(&mut rng)?;
                let sampler = self.sampler.as_ref().expect("sampler prepared for grid plans");
                grid_path(topology, sampler, *m, mu.as_deref(), plan.detector.window, &mut rng, b_stop, cap)
            }
            _ => {
                let fresh;
                let a = match &self.fixed {
                    Some(a) => a,
                    None => {
                        fresh = spec.build(n, &mut rng)?;
                        &fresh
                    }
                };
                let mu = plan.data.draw_mean(&mut rng)?;
                sketch_path(a, mu.as_deref(), &plan.detector.method, plan.detector.window, &mut rng, b_stop, cap)
            }
        }
    }
}

/// Fixed projection. The whitened sketch is `z = θ + ε` with
/// `θ = L⁻¹Aμ` and `ε ~ N(0, I_M)`; the raw sketch for the baseline is
/// `y = Aμ + Lε` from the same `ε`.
fn sketch_path(
    a: &ProjectionMatrix,
    mu: Option<&[f64]>,
    method: &Method,
    window: usize,
    rng: &mut RngStream,
    b_stop: f64,
    cap: usize,
) -> Result<PathRecord> {
    let m = a.rows();
    let shift = match mu {
        Some(mu) => Some(a.apply(mu)?),
        None => None,
    };
    let mut rec = PathRecord {
        records: Vec::new(),
        steps: 0,
    };
    let mut eps = vec![0.0; m];
    let mut v = vec![0.0; m];
    match method {
        Method::Glr => {
            let theta = match &shift {
                Some(s) => Some(solve_lower(a.gram_factor(), s)?),
                None => None,
            };
            let mut glr = WindowedGlr::new(m, window, f64::INFINITY)?;
            for t in 1..=cap {
                rng.fill_normal(&mut eps);
                if let Some(th) = &theta {
                    for ((vi, e), s) in v.iter_mut().zip(&eps).zip(th) {
                        *vi = e + s;
                    }
                } else {
                    v.copy_from_slice(&eps);
                }
                let (stat, _) = glr.push(&v);
                rec.steps = t as u32;
                rec.push(t as u32, stat);
                if stat > b_stop {
                    break;
                }
            }
        }
        Method::CusumBaseline => {
            let mut cusum = CusumBaseline::all_ones(m, f64::INFINITY)?;
            let l = a.gram_factor();
            for t in 1..=cap {
                rng.fill_normal(&mut eps);
                l.mul_into(&eps, &mut v);
                if let Some(s) = &shift {
                    v.iter_mut().zip(s).for_each(|(vi, si)| *vi += si);
                }
                let (stat, _) = cusum.push(&v);
                rec.steps = t as u32;
                rec.push(t as u32, stat);
                if stat > b_stop {
                    break;
                }
            }
        }
    }
    Ok(rec)
}

fn subsample_path(
    n: usize,
    m: usize,
    mu: Option<&[f64]>,
    window: usize,
    rng: &mut RngStream,
    b_stop: f64,
    cap: usize,
) -> Result<PathRecord> {
    let mut det = MissingDataDetector::new(n, window, f64::INFINITY)?;
    let mut rec = PathRecord {
        records: Vec::new(),
        steps: 0,
    };
    let mut idx = Vec::with_capacity(m);
    let mut vals = vec![0.0; m];
    for t in 1..=cap {
        idx.clear();
        idx.extend(rand::seq::index::sample(rng, n, m));
        idx.sort_unstable();
        for (v, &i) in vals.iter_mut().zip(&idx) {
            *v = rng.normal() + mu.map_or(0.0, |mu| mu[i]);
        }
        let stat = det.step_observed(&idx, &vals)?.statistic;
        rec.steps = t as u32;
        rec.push(t as u32, stat);
        if stat > b_stop {
            break;
        }
    }
    Ok(rec)
}

/// Network sensing: each selected node reports the sum of its incident
/// edge values scaled by `1/√deg`, which has unit variance. Edge noise is
/// shared by the two endpoints. Node reports go to the missing-data GLR
/// over node space, i.e. `AᵢAᵢᵀ` is replaced by its diagonal.
#[allow(clippy::too_many_arguments)]
fn grid_path(
    topo: &crate::projections::GridTopology,
    sampler: &SensingSampler,
    m: usize,
    mu: Option<&[f64]>,
    window: usize,
    rng: &mut RngStream,
    b_stop: f64,
    cap: usize,
) -> Result<PathRecord> {
    let mut det = MissingDataDetector::new(topo.node_count(), window, f64::INFINITY)?;
    let mut rec = PathRecord {
        records: Vec::new(),
        steps: 0,
    };
    let mut nodes = Vec::with_capacity(m);
    let mut vals = vec![0.0; m];
    let mut stamp = vec![0u32; topo.edge_count()];
    let mut edge_value = vec![0.0; topo.edge_count()];
    for t in 1..=cap {
        sampler.sample_into(m, rng, &mut nodes)?;
        let tt = t as u32;
        for (v, &node) in vals.iter_mut().zip(&nodes) {
            let inc = topo.incident(node);
            let mut s = 0.0;
            for &e in inc {
                if stamp[e] != tt {
                    stamp[e] = tt;
                    edge_value[e] = rng.normal() + mu.map_or(0.0, |mu| mu[e]);
                }
                s += edge_value[e];
            }
            *v = s / (inc.len() as f64).sqrt();
        }
        let stat = det.step_observed(&nodes, &vals)?.statistic;
        rec.steps = tt;
        rec.push(tt, stat);
        if stat > b_stop {
            break;
        }
    }
    Ok(rec)
}
