use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::{derive_seed, edd_at, join, plan, Cell, ExperimentConfig, ExperimentReport};
use crate::montecarlo::{ChangeTime, Executor, MeanSpec, Method, ProjectionSpec, SimPlan, SimResult};
use crate::theory::{calibrate_b, calibrate_b_timevarying};
use crate::{Error, Result};

/// Ambient dimension of the EDD curves.
pub const CURVE_N: usize = 500;

const DESK_M: [usize; 3] = [30, 100, 300];
const PAPER_M: [usize; 8] = [10, 30, 50, 100, 150, 200, 300, 400];
const EXPANDER_MIN_DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Gaussian,
    Expander,
    TimeVarying,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Gaussian => "gaussian",
            CurveKind::Expander => "expander",
            CurveKind::TimeVarying => "timevarying",
        }
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(CurveKind::Gaussian),
            "expander" => Ok(CurveKind::Expander),
            "timevarying" => Ok(CurveKind::TimeVarying),
            _ => Err(Error::domain(format!(
                "unknown curve kind `{s}` (gaussian, expander, timevarying)"
            ))),
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Post-change mean family swept along a curve.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Every entry equal to `mu0`, one point per value.
    Mu0(Vec<f64>),
    /// A random `p` fraction of entries equal to `value`, one point per `p`.
    Sparsity { p: Vec<f64>, value: f64 },
}

impl Sweep {
    pub fn default_mu0() -> Self {
        Sweep::Mu0(vec![0.3, 0.5, 0.7, 1.0, 1.2])
    }

    pub fn default_sparsity() -> Self {
        Sweep::Sparsity {
            p: vec![0.05, 0.1, 0.2, 0.3, 0.5, 0.7],
            value: 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Mu0(_) => "mu0",
            Sweep::Sparsity { .. } => "p",
        }
    }

    pub fn points(&self) -> &[f64] {
        match self {
            Sweep::Mu0(v) => v,
            Sweep::Sparsity { p, .. } => p,
        }
    }

    pub(crate) fn mean(&self, x: f64) -> MeanSpec {
        match self {
            Sweep::Mu0(_) => MeanSpec::Uniform(x),
            Sweep::Sparsity { value, .. } => MeanSpec::Sparse {
                fraction: x,
                value: *value,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.points().is_empty() || self.points().iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("sweep needs finite points"));
        }
        if let Sweep::Sparsity { p, .. } = self {
            if p.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
                return Err(Error::domain("sparsity points must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

/// Smallest `M` whose EDD is within one sample of the full-data EDD.
pub fn minimum_m(edd_o: f64, points: &[(usize, f64)]) -> Option<usize> {
    points
        .iter()
        .filter(|&&(_, edd)| edd <= edd_o + 1.0)
        .map(|&(m, _)| m)
        .min()
}

/// Smallest column degree `d ≥ 3` with `M | N·d` (so the row degree is an
/// integer).
fn expander_degree(m: usize, n: usize) -> Result<usize> {
    (EXPANDER_MIN_DEGREE..=m)
        .find(|d| (n * d) % m == 0)
        .ok_or_else(|| Error::domain(format!("no biregular expander with M={m}, N={n}")))
}

fn sketch_spec(kind: CurveKind, m: usize, n: usize) -> Result<(ProjectionSpec, Option<usize>)> {
    Ok(match kind {
        CurveKind::Gaussian => (ProjectionSpec::Gaussian { m, variance: None }, None),
        CurveKind::Expander => {
            let d = expander_degree(m, n)?;
            (ProjectionSpec::Expander { m, d }, Some(d))
        }
        CurveKind::TimeVarying => (ProjectionSpec::Subsample { m }, None),
    })
}

fn threshold(kind: CurveKind, m: usize, n: usize, cfg: &ExperimentConfig) -> Result<f64> {
    match kind {
        CurveKind::TimeVarying => calibrate_b_timevarying(n, m, cfg.window, cfg.target_arl),
        _ => calibrate_b(m, cfg.window, cfg.target_arl),
    }
}

/// EDD versus the sweep for each M on the grid plus the full-data
/// reference (`A = I`), with the minimum M per sweep point. Thresholds
/// come from the ARL approximation at the target ARL; each M uses one
/// seeded matrix for all sweep points.
pub fn run_edd_curves(
    kind: CurveKind,
    sweep: &Sweep,
    cfg: &ExperimentConfig,
    exec: &Executor,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    sweep.validate()?;
    let start = Instant::now();
    let n = CURVE_N;
    let grid = cfg.m_grid_or(&DESK_M, &PAPER_M);
    if let Some(&m) = grid.iter().find(|&&m| m > n) {
        return Err(Error::domain(format!("M={m} exceeds N={n}")));
    }
    let name = format!("curves_{}_{}", kind.as_str(), sweep.name());
    let mut report = ExperimentReport::new(
        &name,
        &[
            "series", sweep.name(), "M", "d", "b_theo", "edd_simu", "edd_std", "edd_stderr", "capped",
            "m_star",
        ],
    );
    report.metadata.merge(&cfg.to_kv());
    report.metadata.set("N", n.to_string());
    report.metadata.set("M_grid", join(&grid));
    report.metadata.set("kind", kind.as_str());
    report.metadata.set("sweep", join(sweep.points()));
    if let Sweep::Sparsity { value, .. } = sweep {
        report.metadata.set("shift", value.to_string());
    }
    report.metadata.set(
        "b_theo",
        match kind {
            CurveKind::TimeVarying => "theory::calibrate_b_timevarying (original: theory::calibrate_b)",
            _ => "theory::calibrate_b",
        },
    );
    report.metadata.set("m_star", "smallest M with edd_simu <= original edd_simu + 1");

    let push = |report: &mut ExperimentReport,
                series: &str,
                x: f64,
                m: usize,
                d: Option<usize>,
                b: f64,
                e: &SimResult,
                m_star: Cell| {
        report.push(vec![
            series.into(),
            x.into(),
            m.into(),
            d.into(),
            b.into(),
            e.mean.into(),
            e.std_dev.into(),
            e.stderr.into(),
            e.capped_count.into(),
            m_star,
        ]);
    };

    let mut sketch = Vec::new();
    for &m in &grid {
        let (spec, d) = sketch_spec(kind, m, n)?;
        let b = threshold(kind, m, n, cfg)?;
        let base = null_plan(cfg, n, spec, &format!("{name}/sketch"), m);
        let mut edds = Vec::new();
        for &x in sweep.points() {
            edds.push(edd_at(&base, b, sweep.mean(x), exec)?);
        }
        sketch.push((m, d, b, edds));
    }
    for (i, &x) in sweep.points().iter().enumerate() {
        for (m, d, b, edds) in &sketch {
            push(&mut report, "sketch", x, *m, *d, *b, &edds[i], Cell::Empty);
        }
    }

    let b_o = calibrate_b(n, cfg.window, cfg.target_arl)?;
    let base = null_plan(cfg, n, ProjectionSpec::Identity, &format!("{name}/original"), n);
    for (i, &x) in sweep.points().iter().enumerate() {
        let e = edd_at(&base, b_o, sweep.mean(x), exec)?;
        let points: Vec<(usize, f64)> = sketch.iter().map(|(m, _, _, edds)| (*m, edds[i].mean)).collect();
        let m_star = minimum_m(e.mean, &points);
        push(&mut report, "original", x, n, None, b_o, &e, m_star.into());
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

fn null_plan(cfg: &ExperimentConfig, n: usize, spec: ProjectionSpec, tag: &str, m: usize) -> SimPlan {
    plan(
        cfg,
        n,
        spec,
        Method::Glr,
        MeanSpec::Uniform(0.0),
        ChangeTime::Never,
        f64::INFINITY,
        derive_seed(cfg.seed, tag, m as u64),
    )
}
