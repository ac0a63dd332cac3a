//! Command-line grammar. Every option `--key VALUE` mirrors a `key = value`
//! line of the optional `--config` file; flags override the file.

use std::fs;
use std::path::Path;

use clap::{Arg, ArgAction, ArgMatches, Command};
use sketchcpd::config::KeyValues;
use sketchcpd::montecarlo::PLAN_KEYS;
use sketchcpd::{Error, Result};

/// Plan keys as spelled on the command line: the detector family is
/// `detector` because `method` selects theory vs Monte Carlo.
pub fn plan_keys() -> Vec<&'static str> {
    PLAN_KEYS
        .iter()
        .map(|&k| if k == "method" { "detector" } else { k })
        .collect()
}

pub fn keys_for(command: &str) -> Vec<&'static str> {
    let mut keys = match command {
        "calibrate" => vec!["method", "arl", "tol"],
        "arl" => vec!["method"],
        "edd" => vec!["method", "delta"],
        "simulate" => vec![],
        "detect" => return vec!["mode", "b", "w", "dim", "projection_file", "stream"],
        "experiment" => {
            return vec![
                "name",
                "scale",
                "seed",
                "replicates",
                "arl",
                "w",
                "horizon_cap",
                "calibration_tol",
                "M_grid",
                "out",
                "kind",
                "sweep",
                "points",
                "shift",
                "topology",
                "M",
                "fraction",
                "mu0",
            ]
        }
        "normality" => return vec!["stream", "row", "standardize"],
        "projection" => return vec!["projection", "M", "N", "d", "variance", "seed", "out"],
        _ => unreachable!("unknown command {command}"),
    };
    keys.extend(plan_keys());
    keys
}

fn about(command: &str) -> &'static str {
    match command {
        "calibrate" => "Threshold b for a target ARL (theory or Monte Carlo)",
        "arl" => "ARL at threshold b (theory or Monte Carlo)",
        "edd" => "Expected detection delay (theory or Monte Carlo)",
        "simulate" => "Monte Carlo run-length estimate of a simulation plan",
        "detect" => "Run the detector over a CSV stream",
        "experiment" => "Reproduce a table or curve as a CSV report",
        "normality" => "Kolmogorov-Smirnov normality check of residuals",
        "projection" => "Sample a projection matrix and write it as CSV",
        _ => "",
    }
}

const COMMANDS: [&str; 8] = [
    "calibrate",
    "arl",
    "edd",
    "simulate",
    "detect",
    "experiment",
    "normality",
    "projection",
];

pub fn build() -> Command {
    let mut cmd = Command::new("sketchcpd")
        .about("Sequential change-point detection on linear sketches")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for name in COMMANDS {
        let mut sub = Command::new(name).about(about(name)).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("Plain-text `key = value` file; flags override it"),
        );
        if matches!(name, "calibrate" | "arl" | "edd" | "simulate" | "experiment") {
            sub = sub.arg(
                Arg::new("threads")
                    .long("threads")
                    .value_name("N")
                    .value_parser(clap::value_parser!(usize))
                    .help("Worker threads (default: SKETCHCPD_THREADS or all cores)"),
            );
        }
        if matches!(name, "detect" | "normality") {
            sub = sub.arg(
                Arg::new("stdin")
                    .long("stdin")
                    .action(ArgAction::SetTrue)
                    .help("Read the stream from standard input"),
            );
        }
        if name == "experiment" {
            sub = sub
                .arg(
                    Arg::new("experiment")
                        .value_name("NAME")
                        .help("table1, timevarying, curves, baseline or grid"),
                )
                .arg(
                    Arg::new("paper-scale")
                        .long("paper-scale")
                        .action(ArgAction::SetTrue)
                        .help("Same as --scale paper"),
                );
        }
        for key in keys_for(name) {
            sub = sub.arg(Arg::new(key).long(key).value_name("VALUE"));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// Config file overlaid with flags, restricted to the command's keys.
pub fn resolve(command: &str, m: &ArgMatches) -> Result<KeyValues> {
    let mut kv = match m.get_one::<String>("config") {
        Some(path) => KeyValues::parse(&fs::read_to_string(Path::new(path))?)?,
        None => KeyValues::new(),
    };
    let keys = keys_for(command);
    kv.check_keys(&keys)?;
    for key in &keys {
        if let Some(v) = m.get_one::<String>(key) {
            kv.set(key, v.clone());
        }
    }
    apply_defaults(command, &mut kv);
    if command == "experiment" {
        if let Some(name) = m.get_one::<String>("experiment") {
            kv.set("name", name.clone());
        }
        if m.get_flag("paper-scale") {
            kv.set("scale", "paper");
        }
    }
    Ok(kv)
}

/// Fills absent keys with their defaults so the echoed config is complete.
fn apply_defaults(command: &str, kv: &mut KeyValues) {
    let mut defaults: Vec<(&str, &str)> = match command {
        "calibrate" => vec![("method", "theory"), ("arl", "5000"), ("w", "200"), ("projection", "gaussian")],
        "arl" | "edd" => vec![("method", "theory"), ("w", "200"), ("projection", "gaussian")],
        "simulate" => vec![("w", "200"), ("projection", "gaussian")],
        "detect" => vec![("mode", "fixed"), ("w", "200")],
        "experiment" => vec![("scale", "desk"), ("seed", "0")],
        "normality" => vec![("standardize", "true")],
        "projection" => vec![("projection", "gaussian"), ("seed", "0")],
        _ => vec![],
    };
    let simulated = command == "simulate" || kv.get("method") == Some("montecarlo");
    if simulated && command != "experiment" {
        defaults.extend([
            ("detector", "glr"),
            ("matrix_mode", "fixed"),
            ("change", if command == "edd" { "immediate" } else { "never" }),
            ("replicates", "2000"),
            ("horizon_cap", "100000"),
            ("seed", "0"),
        ]);
        if command == "calibrate" {
            defaults.push(("tol", "0.01"));
        }
    }
    for (k, v) in defaults {
        if kv.get(k).is_none() {
            kv.set(k, v);
        }
    }
}

/// The plan part of a resolved config, in `SimPlan::from_kv` spelling.
pub fn plan_kv(kv: &KeyValues) -> KeyValues {
    let plan = plan_keys();
    let mut out = KeyValues::new();
    for (k, v) in kv.iter() {
        if plan.contains(&k) {
            out.set(if k == "detector" { "method" } else { k }, v);
        }
    }
    out
}

pub fn threads(m: &ArgMatches) -> Result<Option<usize>> {
    if let Some(&n) = m.get_one::<usize>("threads") {
        return Ok(Some(n));
    }
    match std::env::var("SKETCHCPD_THREADS") {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Domain(format!("SKETCHCPD_THREADS = {s}: not a thread count"))),
        _ => Ok(None),
    }
}
