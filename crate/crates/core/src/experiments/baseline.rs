use std::time::Instant;

use super::{calibrate, derive_seed, edd_at, join, plan, ExperimentConfig, ExperimentReport};
use crate::montecarlo::{ChangeTime, Executor, MeanSpec, Method, ProjectionSpec};
use crate::Result;

/// Ambient dimension of the baseline comparison.
pub const BASELINE_N: usize = 100;

const DESK_M: [usize; 3] = [10, 30, 50];
const PAPER_M: [usize; 10] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100];

/// Sketch GLR against per-coordinate CUSUMs on the raw sketches (reference
/// mean all ones). Both thresholds are Monte Carlo calibrated to the
/// target ARL on the same matrix and the same noise paths; EDDs are
/// reported for a uniform shift of 0.2 and for 10% of entries equal to 1.
pub fn run_baseline_comparison(cfg: &ExperimentConfig, exec: &Executor) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let n = BASELINE_N;
    let grid = cfg.m_grid_or(&DESK_M, &PAPER_M);
    let means = [
        ("uniform_0.2", MeanSpec::Uniform(0.2)),
        (
            "sparse_0.1",
            MeanSpec::Sparse {
                fraction: 0.1,
                value: 1.0,
            },
        ),
    ];
    let mut report = ExperimentReport::new(
        "baseline",
        &[
            "mean", "M", "b_glr", "arl_glr", "arl_glr_stderr", "b_cusum", "arl_cusum", "arl_cusum_stderr",
            "edd_glr", "edd_glr_std", "edd_glr_stderr", "edd_cusum", "edd_cusum_std", "edd_cusum_stderr",
        ],
    );
    report.metadata.merge(&cfg.to_kv());
    report.metadata.set("N", n.to_string());
    report.metadata.set("M_grid", join(&grid));
    report.metadata.set("projection", "gaussian fixed, one seeded draw per M");
    report.metadata.set("baseline", "sum of per-coordinate CUSUMs on raw sketches, reference mean all ones");
    report
        .metadata
        .set("thresholds", "montecarlo::calibrate_b_mc for both methods, common random numbers");

    let mut rows: Vec<Vec<_>> = vec![Vec::new(); means.len()];
    for &m in &grid {
        let seed = derive_seed(cfg.seed, "baseline", m as u64);
        let glr = plan(
            cfg,
            n,
            ProjectionSpec::Gaussian { m, variance: None },
            Method::Glr,
            MeanSpec::Uniform(0.0),
            ChangeTime::Never,
            f64::INFINITY,
            seed,
        );
        let mut cusum = glr.clone();
        cusum.detector.method = Method::CusumBaseline;
        let cal_glr = calibrate(cfg, &glr, exec)?;
        let cal_cusum = calibrate(cfg, &cusum, exec)?;
        for (i, (_, mean)) in means.iter().enumerate() {
            let eg = edd_at(&glr, cal_glr.b, mean.clone(), exec)?;
            let ec = edd_at(&cusum, cal_cusum.b, mean.clone(), exec)?;
            rows[i].push(vec![
                means[i].0.into(),
                m.into(),
                cal_glr.b.into(),
                cal_glr.estimate.mean.into(),
                cal_glr.estimate.stderr.into(),
                cal_cusum.b.into(),
                cal_cusum.estimate.mean.into(),
                cal_cusum.estimate.stderr.into(),
                eg.mean.into(),
                eg.std_dev.into(),
                eg.stderr.into(),
                ec.mean.into(),
                ec.std_dev.into(),
                ec.stderr.into(),
            ]);
        }
    }
    for r in rows.into_iter().flatten() {
        report.push(r);
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matched_arl_and_row_layout() {
        let cfg = ExperimentConfig {
            replicates: 60,
            target_arl: 200.0,
            window: 50,
            calibration_tol: 0.02,
            m_grid: Some(vec![10]),
            ..ExperimentConfig::desk(11)
        };
        let exec = Executor::new(Some(1)).unwrap();
        let r = run_baseline_comparison(&cfg, &exec).unwrap();
        assert_eq!(r.rows.len(), 2);
        for col in ["arl_glr", "arl_cusum"] {
            let a = r.value(0, col).unwrap();
            assert!((a - 200.0).abs() <= 0.05 * 200.0, "{col} {a}");
        }
        assert_eq!(r.value(0, "b_glr"), r.value(1, "b_glr"));
    }
}
