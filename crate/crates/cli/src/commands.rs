use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use clap::ArgMatches;
use sketchcpd::config::KeyValues;
use sketchcpd::detector::{parse_stream_row, FixedSketchDetector, MissingDataDetector, ALARM_CSV_HEADER};
use sketchcpd::experiments::{
    ks_normality, run_baseline_comparison, run_edd_curves, run_power_grid, run_table1, run_timevarying_tables,
    CurveKind, ExperimentConfig, ExperimentReport, FailureScenario, Scale, Sweep,
};
use sketchcpd::montecarlo::{
    calibrate_b_mc, load_topology, simulate, simulate_arl, simulate_edd, Executor, SimPlan, SimResult,
    PROJECTION_STREAM,
};
use sketchcpd::numerics::RngStream;
use sketchcpd::projections::ProjectionMatrix;
use sketchcpd::theory::{
    arl_fixed, arl_timevarying, calibrate_b, calibrate_b_timevarying, edd_fixed, edd_timevarying,
    edd_timevarying_without_minus_one, ArlQuery, EddQuery,
};
use sketchcpd::{Error, Result};

use crate::args::{plan_kv, resolve, threads};

/// Exit code when a stream ends without an alarm.
const NO_ALARM: u8 = 3;

pub fn dispatch(matches: &ArgMatches) -> Result<ExitCode> {
    let (name, m) = matches.subcommand().expect("subcommand required");
    let kv = resolve(name, m)?;
    match name {
        "calibrate" => calibrate(&kv, m),
        "arl" => arl(&kv, m),
        "edd" => edd(&kv, m),
        "simulate" => simulate_cmd(&kv, m),
        "detect" => detect(&kv, m),
        "experiment" => experiment(&kv, m),
        "normality" => normality(&kv, m),
        "projection" => projection(&kv),
        _ => unreachable!(),
    }
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn header(command: &str, kv: &KeyValues) -> String {
    let mut s = format!("# command = {command}\n");
    for line in kv.to_string().lines() {
        s.push_str("# ");
        s.push_str(line);
        s.push('\n');
    }
    s
}

fn executor(m: &ArgMatches) -> Result<Executor> {
    Executor::new(threads(m)?)
}

#[derive(Clone, Copy, PartialEq)]
enum Via {
    Theory,
    MonteCarlo,
}

fn via(kv: &KeyValues) -> Result<Via> {
    match kv.get("method").unwrap_or("theory") {
        "theory" => Ok(Via::Theory),
        "montecarlo" => Ok(Via::MonteCarlo),
        other => Err(domain(format!("unknown method `{other}` (theory, montecarlo)"))),
    }
}

/// Sketch dimension and, for time-varying sensing, the ambient dimension
/// entering the theory formulas.
fn theory_dims(kv: &KeyValues) -> Result<(usize, Option<usize>)> {
    match kv.get("projection").unwrap_or("gaussian") {
        "gaussian" | "expander" | "custom" => Ok((kv.require("M")?, None)),
        "identity" => Ok((kv.require("N")?, None)),
        "subsample" => Ok((kv.require("M")?, Some(kv.require("N")?))),
        "grid" => {
            let source: String = kv.require("topology")?;
            Ok((kv.require("M")?, Some(load_topology(&source)?.node_count())))
        }
        other => Err(domain(format!("unknown projection `{other}`"))),
    }
}

fn window(kv: &KeyValues) -> Result<usize> {
    Ok(kv.get_parsed("w")?.unwrap_or(200))
}

fn sim_row(r: &SimResult) -> String {
    format!(
        "{},{},{},{},{}",
        r.mean, r.stderr, r.std_dev, r.replicates_used, r.capped_count
    )
}

fn calibrate(kv: &KeyValues, m: &ArgMatches) -> Result<ExitCode> {
    let target: f64 = kv.get_parsed("arl")?.unwrap_or(5000.0);
    let mut out = header("calibrate", kv);
    match via(kv)? {
        Via::Theory => {
            let w = window(kv)?;
            let b = match theory_dims(kv)? {
                (m, None) => calibrate_b(m, w, target)?,
                (m, Some(n)) => calibrate_b_timevarying(n, m, w, target)?,
            };
            out.push_str(&format!("b\n{b}\n"));
        }
        Via::MonteCarlo => {
            let plan = SimPlan::from_kv(&plan_kv(kv))?;
            let tol = kv.get_parsed("tol")?.unwrap_or(0.01);
            let cal = calibrate_b_mc(&plan, target, tol, &executor(m)?)?;
            out.push_str("b,arl_simu,arl_stderr,b_stop,expansions\n");
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                cal.b, cal.estimate.mean, cal.estimate.stderr, cal.b_stop, cal.expansions
            ));
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn arl(kv: &KeyValues, m: &ArgMatches) -> Result<ExitCode> {
    let mut out = header("arl", kv);
    match via(kv)? {
        Via::Theory => {
            let b: f64 = kv.require("b")?;
            let w = window(kv)?;
            let arl = match theory_dims(kv)? {
                (m, None) => arl_fixed(ArlQuery::new(m, b, w))?,
                (m, Some(n)) => arl_timevarying(n, m, b, w)?,
            };
            out.push_str(&format!("arl\n{arl}\n"));
        }
        Via::MonteCarlo => {
            let plan = SimPlan::from_kv(&plan_kv(kv))?;
            let r = simulate_arl(&plan, &executor(m)?)?;
            out.push_str(&format!("arl,stderr,std_dev,replicates,capped\n{}\n", sim_row(&r)));
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

/// `Σμ²` of the configured post-change mean (expected value for a sparse
/// mean with a random support).
fn mean_energy(kv: &KeyValues, n: usize) -> Result<f64> {
    if let Some(v) = kv.get("mean_vector").filter(|s| !s.is_empty()) {
        return v
            .split_whitespace()
            .map(|x| x.parse::<f64>().map(|x| x * x))
            .sum::<std::result::Result<f64, _>>()
            .map_err(|_| domain("bad mean_vector"));
    }
    let value: f64 = kv.require("mean")?;
    let count = match kv.get_parsed::<f64>("mean_fraction")? {
        Some(f) => (f * n as f64).round(),
        None => n as f64,
    };
    Ok(count * value * value)
}

fn edd(kv: &KeyValues, m: &ArgMatches) -> Result<ExitCode> {
    let mut out = header("edd", kv);
    match via(kv)? {
        Via::Theory => {
            let b: f64 = kv.require("b")?;
            match theory_dims(kv)? {
                (m, None) => {
                    let delta = match kv.get_parsed::<f64>("delta")? {
                        Some(d) => d,
                        None => {
                            let n: usize = kv.require("N")?;
                            (m as f64 / n as f64 * mean_energy(kv, n)?).sqrt()
                        }
                    };
                    let e = edd_fixed(&EddQuery {
                        b,
                        m,
                        delta,
                        corrections: None,
                    })?;
                    out.push_str(&format!("edd,delta\n{e},{delta}\n"));
                }
                (m, Some(n)) => {
                    let energy = mean_energy(kv, n)?;
                    let e = edd_timevarying(b, n, m, energy)?;
                    let e2 = edd_timevarying_without_minus_one(b, n, m, energy)?;
                    out.push_str(&format!("edd,edd_without_minus_one\n{e},{e2}\n"));
                }
            }
        }
        Via::MonteCarlo => {
            let plan = SimPlan::from_kv(&plan_kv(kv))?;
            let r = simulate_edd(&plan, &executor(m)?)?;
            out.push_str(&format!("edd,stderr,std_dev,replicates,capped\n{}\n", sim_row(&r)));
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn simulate_cmd(kv: &KeyValues, m: &ArgMatches) -> Result<ExitCode> {
    let plan = SimPlan::from_kv(&plan_kv(kv))?;
    let r = simulate(&plan, &executor(m)?)?;
    print!(
        "{}mean,stderr,std_dev,replicates,capped\n{}\n",
        header("simulate", kv),
        sim_row(&r)
    );
    Ok(ExitCode::SUCCESS)
}

fn open_stream(kv: &KeyValues, m: &ArgMatches) -> Result<Box<dyn BufRead>> {
    match (m.get_flag("stdin"), kv.get("stream")) {
        (true, None) => Ok(Box::new(BufReader::new(io::stdin()))),
        (false, Some(path)) => Ok(Box::new(BufReader::new(fs::File::open(Path::new(path))?))),
        (true, Some(_)) => Err(domain("give either --stream or --stdin, not both")),
        (false, None) => Err(domain("missing input: give --stream FILE or --stdin")),
    }
}

/// Data lines of a stream with their 1-based line numbers; blank and `#`
/// lines are skipped.
fn data_lines(reader: Box<dyn BufRead>) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::from(e))),
            Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
            Ok(l) => Some(Ok((i + 1, l))),
        })
}

enum Detector {
    Fixed(FixedSketchDetector),
    Missing(MissingDataDetector),
}

fn detect(kv: &KeyValues, m: &ArgMatches) -> Result<ExitCode> {
    let b: f64 = kv.require("b")?;
    let w = window(kv)?;
    let declared: Option<usize> = kv.get_parsed("dim")?;
    let missing = match kv.get("mode").unwrap_or("fixed") {
        "fixed" => false,
        "missing" => true,
        other => return Err(domain(format!("unknown mode `{other}` (fixed, missing)"))),
    };
    let (mut det, dim) = if missing {
        if kv.get("projection_file").is_some() {
            return Err(domain("missing mode takes raw N-dimensional rows, not a projection file"));
        }
        let n = declared.ok_or_else(|| domain("missing mode needs `dim` (N)"))?;
        (Detector::Missing(MissingDataDetector::new(n, w, b)?), n)
    } else {
        let a = match kv.get("projection_file") {
            Some(path) => ProjectionMatrix::from_csv(&fs::read_to_string(Path::new(path))?)?,
            None => ProjectionMatrix::identity(declared.ok_or_else(|| domain("fixed mode needs `dim` or `projection_file`"))?)?,
        };
        if let Some(d) = declared {
            if d != a.rows() {
                return Err(Error::Dimension {
                    expected: a.rows(),
                    got: d,
                });
            }
        }
        let rows = a.rows();
        (Detector::Fixed(FixedSketchDetector::for_projection(&a, w, b)?), rows)
    };
    let reader = open_stream(kv, m)?;

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    write!(out, "{}{ALARM_CSV_HEADER}\n", header("detect", kv))?;
    let mut steps = 0;
    let mut idx = Vec::with_capacity(dim);
    let mut vals = Vec::with_capacity(dim);
    for item in data_lines(reader) {
        let (line_no, line) = item?;
        let fields = parse_stream_row(&line, line_no, dim, missing)?;
        let alarm = match &mut det {
            Detector::Fixed(d) => {
                vals.clear();
                vals.extend(fields.iter().map(|f| f.expect("fixed mode rejects empty fields")));
                d.step_fixed(&vals)?
            }
            Detector::Missing(d) => {
                idx.clear();
                vals.clear();
                for (i, f) in fields.iter().enumerate() {
                    if let Some(v) = f {
                        idx.push(i);
                        vals.push(*v);
                    }
                }
                d.step_observed(&idx, &vals)?
            }
        };
        steps += 1;
        writeln!(out, "{alarm}")?;
        if alarm.fired {
            out.flush()?;
            eprintln!(
                "alarm: t={} statistic={} khat={}",
                alarm.time, alarm.statistic, alarm.khat
            );
            return Ok(ExitCode::SUCCESS);
        }
    }
    out.flush()?;
    eprintln!("no alarm after {steps} steps");
    Ok(ExitCode::from(NO_ALARM))
}

fn parse_list<T: std::str::FromStr>(kv: &KeyValues, key: &str) -> Result<Option<Vec<T>>> {
    let Some(s) = kv.get(key).filter(|s| !s.trim().is_empty()) else {
        return Ok(None);
    };
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| domain(format!("{key}: bad list entry `{t}`"))))
        .collect::<Result<Vec<T>>>()
        .map(Some)
}

fn experiment_config(kv: &KeyValues) -> Result<ExperimentConfig> {
    let scale: Scale = kv.get("scale").unwrap_or("desk").parse()?;
    let mut cfg = ExperimentConfig::for_scale(scale, kv.get_parsed("seed")?.unwrap_or(0));
    if let Some(r) = kv.get_parsed("replicates")? {
        cfg.replicates = r;
    }
    if let Some(a) = kv.get_parsed("arl")? {
        cfg.target_arl = a;
    }
    if let Some(w) = kv.get_parsed("w")? {
        cfg.window = w;
    }
    if let Some(h) = kv.get_parsed("horizon_cap")? {
        cfg.horizon_cap = h;
    }
    if let Some(t) = kv.get_parsed("calibration_tol")? {
        cfg.calibration_tol = t;
    }
    cfg.m_grid = parse_list(kv, "M_grid")?;
    cfg.validate()?;
    Ok(cfg)
}

const DESK_TOPOLOGY: &str = "synthetic:200:300:1";

fn run_experiment(kv: &KeyValues, cfg: &ExperimentConfig, exec: &Executor) -> Result<ExperimentReport> {
    let name: String = kv.require("name")?;
    match name.as_str() {
        "table1" => run_table1(cfg, exec),
        "timevarying" => run_timevarying_tables(cfg, exec),
        "baseline" => run_baseline_comparison(cfg, exec),
        "curves" => {
            let kind: CurveKind = kv.get("kind").unwrap_or("gaussian").parse()?;
            let points: Option<Vec<f64>> = parse_list(kv, "points")?;
            let sweep = match kv.get("sweep").unwrap_or("mu0") {
                "mu0" => points.map_or_else(Sweep::default_mu0, Sweep::Mu0),
                "p" => match points {
                    Some(p) => Sweep::Sparsity {
                        p,
                        value: kv.get_parsed("shift")?.unwrap_or(1.0),
                    },
                    None => Sweep::default_sparsity(),
                },
                other => return Err(domain(format!("unknown sweep `{other}` (mu0, p)"))),
            };
            run_edd_curves(kind, &sweep, cfg, exec)
        }
        "grid" => {
            let source = kv.get("topology").unwrap_or(DESK_TOPOLOGY).to_string();
            let topology = Arc::new(load_topology(&source)?);
            let mu0: Option<f64> = kv.get_parsed("mu0")?;
            let points: Option<Vec<f64>> = parse_list(kv, "points")?;
            let sweep = match kv.get("sweep").unwrap_or("mu0") {
                "mu0" => Sweep::Mu0(points.or(mu0.map(|x| vec![x])).unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0])),
                "p" => Sweep::Sparsity {
                    p: points.unwrap_or_else(|| vec![0.05, 0.1, 0.2, 0.3, 0.5]),
                    value: mu0.unwrap_or(1.0),
                },
                other => return Err(domain(format!("unknown sweep `{other}` (mu0, p)"))),
            };
            let scenario = FailureScenario {
                topology,
                source,
                fraction: kv.get_parsed("fraction")?.unwrap_or(0.05),
                mu0: mu0.unwrap_or(1.0),
                m: kv.get_parsed("M")?.unwrap_or(20),
            };
            run_power_grid(&scenario, &sweep, cfg, exec)
        }
        other => Err(domain(format!(
            "unknown experiment `{other}` (table1, timevarying, curves, baseline, grid)"
        ))),
    }
}

fn experiment(kv: &KeyValues, m: &ArgMatches) -> Result<ExitCode> {
    let cfg = experiment_config(kv)?;
    let exec = executor(m)?;
    let report = run_experiment(kv, &cfg, &exec)?;
    // The output location is not part of the result.
    let mut echoed = KeyValues::new();
    for (k, v) in kv.iter().filter(|&(k, _)| k != "out") {
        echoed.set(k, v);
    }
    let text = format!("{}{}", header("experiment", &echoed), report.to_csv());
    match kv.get("out") {
        Some(path) => {
            fs::write(Path::new(path), text)?;
            println!("{path}");
        }
        None => print!("{text}"),
    }
    eprintln!("{}: {:.1} s", report.name, report.wall_time.as_secs_f64());
    Ok(ExitCode::SUCCESS)
}

fn normality(kv: &KeyValues, m: &ArgMatches) -> Result<ExitCode> {
    let row: Option<usize> = kv.get_parsed("row")?;
    if row == Some(0) {
        return Err(domain("row is 1-based"));
    }
    let standardize = match kv.get("standardize").unwrap_or("true") {
        "true" | "1" | "yes" => true,
        "false" | "0" | "no" => false,
        other => return Err(domain(format!("standardize = {other}: expected true or false"))),
    };
    let mut values = Vec::new();
    for (i, item) in data_lines(open_stream(kv, m)?).enumerate() {
        let (line_no, line) = item?;
        if row.is_some_and(|r| r != i + 1) {
            continue;
        }
        let dim = line.split(',').count();
        values.extend(parse_stream_row(&line, line_no, dim, true)?.into_iter().flatten());
    }
    let r = ks_normality(&values, standardize)?;
    print!(
        "{}n,statistic,p_value\n{},{},{}\n",
        header("normality", kv),
        r.n,
        r.statistic,
        r.p_value
    );
    Ok(ExitCode::SUCCESS)
}

fn projection(kv: &KeyValues) -> Result<ExitCode> {
    use sketchcpd::montecarlo::ProjectionSpec;
    let n: usize = kv.require("N")?;
    let spec = match kv.get("projection").unwrap_or("gaussian") {
        "gaussian" => ProjectionSpec::Gaussian {
            m: kv.require("M")?,
            variance: kv.get_parsed("variance")?,
        },
        "expander" => ProjectionSpec::Expander {
            m: kv.require("M")?,
            d: kv.require("d")?,
        },
        "identity" => ProjectionSpec::Identity,
        other => return Err(domain(format!("unknown projection `{other}` (gaussian, expander, identity)"))),
    };
    let seed = kv.get_parsed("seed")?.unwrap_or(0);
    // Same stream as the fixed matrix of a simulation plan with this seed.
    let a = spec.build(n, &mut RngStream::new(seed, PROJECTION_STREAM))?;
    eprint!("{}", header("projection", kv));
    match kv.get("out") {
        Some(path) => {
            fs::write(Path::new(path), a.to_csv())?;
            println!("{path}");
        }
        None => print!("{}", a.to_csv()),
    }
    Ok(ExitCode::SUCCESS)
}
