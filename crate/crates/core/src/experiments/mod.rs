//! Scripted reproduction runs emitting CSV reports: threshold/EDD tables
//! for fixed and time-varying projections, EDD curves, the CUSUM baseline
//! comparison, the network failure scenario and a KS normality check.
//!
//! Every report is a pure function of its configuration (including the
//! seed); wall time is kept on the report but never written to the CSV.

mod baseline;
mod curves;
mod grid;
mod normality;
mod report;
mod tables;

use std::fmt;
use std::str::FromStr;

use crate::config::KeyValues;
use crate::montecarlo::{
    calibrate_b_mc, simulate_edd, Calibration, ChangeTime, DataSpec, DetectorSpec, Executor,
    MatrixMode, MeanSpec, Method, ProjectionSpec, SimPlan, SimResult,
};
use crate::numerics::splitmix64;
use crate::{Error, Result};

pub use baseline::{run_baseline_comparison, BASELINE_N};
pub use curves::{minimum_m, run_edd_curves, CurveKind, Sweep, CURVE_N};
pub use grid::{run_power_grid, FailureScenario};
pub use normality::{ks_normality, ks_test, KsResult};
pub use report::{Cell, ExperimentReport};
pub use tables::{run_table1, run_timevarying_tables, TABLE_N};

/// Sketch dimensions of the threshold tables.
pub const TABLE_M_GRID: [usize; 5] = [100, 70, 50, 30, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Paper,
}

impl Scale {
    pub fn as_str(self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        }
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            _ => Err(Error::domain(format!("unknown scale `{s}` (desk, paper)"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Settings shared by all experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scale: Scale,
    pub seed: u64,
    /// Replicates per simulated quantity (calibration and EDD alike).
    pub replicates: usize,
    pub target_arl: f64,
    pub window: usize,
    pub horizon_cap: usize,
    /// Relative tolerance of Monte Carlo threshold calibration.
    pub calibration_tol: f64,
    /// Overrides the experiment's default M grid.
    pub m_grid: Option<Vec<usize>>,
}

impl ExperimentConfig {
    pub fn desk(seed: u64) -> Self {
        ExperimentConfig {
            scale: Scale::Desk,
            seed,
            replicates: 2000,
            target_arl: 5000.0,
            window: 200,
            horizon_cap: 100_000,
            calibration_tol: 0.01,
            m_grid: None,
        }
    }

    pub fn paper(seed: u64) -> Self {
        ExperimentConfig {
            scale: Scale::Paper,
            replicates: 10_000,
            ..Self::desk(seed)
        }
    }

    pub fn for_scale(scale: Scale, seed: u64) -> Self {
        match scale {
            Scale::Desk => Self::desk(seed),
            Scale::Paper => Self::paper(seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 || self.window == 0 || self.horizon_cap == 0 {
            return Err(Error::domain("need replicates >= 2 and positive window and horizon cap"));
        }
        if !(self.target_arl > 1.0) || !self.target_arl.is_finite() {
            return Err(Error::domain(format!("target ARL must exceed 1, got {}", self.target_arl)));
        }
        if let Some(grid) = &self.m_grid {
            if grid.is_empty() || grid.contains(&0) {
                return Err(Error::domain("M grid must be non-empty and positive"));
            }
        }
        Ok(())
    }

    pub(crate) fn m_grid_or(&self, desk: &[usize], paper: &[usize]) -> Vec<usize> {
        match (&self.m_grid, self.scale) {
            (Some(g), _) => g.clone(),
            (None, Scale::Desk) => desk.to_vec(),
            (None, Scale::Paper) => paper.to_vec(),
        }
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("scale", self.scale.as_str());
        kv.set("seed", self.seed.to_string());
        kv.set("replicates", self.replicates.to_string());
        kv.set("arl", self.target_arl.to_string());
        kv.set("w", self.window.to_string());
        kv.set("horizon_cap", self.horizon_cap.to_string());
        kv.set("calibration_tol", self.calibration_tol.to_string());
        if let Some(g) = &self.m_grid {
            kv.set("M_grid", join(g));
        }
        kv
    }
}

pub(crate) fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Root seed of one simulated configuration, derived from the experiment
/// seed, a tag and an index so that configurations get unrelated streams.
pub(crate) fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in tag.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(seed ^ splitmix64(h ^ splitmix64(index)))
}

/// A simulation plan with the experiment-wide window, replicate count
/// and horizon.
pub(crate) fn plan(
    cfg: &ExperimentConfig,
    n: usize,
    projection: ProjectionSpec,
    method: Method,
    mean: MeanSpec,
    change: ChangeTime,
    threshold: f64,
    root_seed: u64,
) -> SimPlan {
    SimPlan {
        detector: DetectorSpec {
            projection,
            matrix_mode: MatrixMode::Fixed,
            method,
            window: cfg.window,
            threshold,
        },
        data: DataSpec { n, mean, change },
        replicates: cfg.replicates,
        horizon_cap: cfg.horizon_cap,
        root_seed,
    }
}

/// Monte Carlo threshold of `null_plan` at the configured target ARL.
pub(crate) fn calibrate(cfg: &ExperimentConfig, null_plan: &SimPlan, exec: &Executor) -> Result<Calibration> {
    calibrate_b_mc(null_plan, cfg.target_arl, cfg.calibration_tol, exec)
}

/// EDD of `plan` with the threshold replaced by `b` and the change at 0.
pub(crate) fn edd_at(plan: &SimPlan, b: f64, mean: MeanSpec, exec: &Executor) -> Result<SimResult> {
    let mut p = plan.clone();
    p.detector.threshold = b;
    p.data.mean = mean;
    p.data.change = ChangeTime::Immediate;
    simulate_edd(&p, exec)
}
