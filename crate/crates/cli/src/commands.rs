use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use zoo_opt::function_space::FunctionClassParams;
use zoo_opt::optimizer::run;
use zoo_opt::verification::{fit_loglog_slope, lower_bound_audit, regret_sweep, BoundCheckReport, SweepFamily};
use zoo_opt::NoiseModel;

use crate::config::{Command, ExperimentConfig, FamilySpec};
use crate::record::{check_table, fmt_f64, write_outputs, ExperimentRecord, Table};
use crate::suites::{default_suite, run_check, CHECK_NAMES};
use crate::CliError;

/// Accepted range for the fitted regret exponent.
pub const SLOPE_WINDOW: (f64, f64) = (-0.85, -0.5);
/// Mean regret at the largest budget must not exceed this multiple of
/// `d rho^(2/3) T^(-2/3) / M`.
pub const RATE_MULTIPLE: f64 = 100.0;
pub const DEFAULT_T_LIST: [u64; 5] = [10_000, 30_000, 100_000, 300_000, 1_000_000];
pub const DEFAULT_OUT_DIR: &str = "zoo-opt-out";

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Overrides the config's output directory.
    pub out: Option<PathBuf>,
    /// Overrides the config's seed.
    pub seed: Option<u64>,
    /// Check name for `verify`.
    pub check: Option<String>,
    /// Fill `wall_ms` with measured times; leaves CSVs non-reproducible.
    pub record_timing: bool,
    /// Multiplier on the bias bound (1 in normal use).
    pub bound_scale: f64,
    /// Fit injected `c T^(-2/3)` regrets instead of running the sweep.
    pub synthetic_fit: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out: None, seed: None, check: None, record_timing: false, bound_scale: 1.0, synthetic_fit: false }
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone)]
pub struct Completed {
    pub pass: bool,
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Runs one command; `Ok` carries the pass flag and the written files.
pub fn execute(config: Option<ExperimentConfig>, command: Command, opts: &RunOptions) -> Result<Completed, CliError> {
    let mut cfg = config.unwrap_or_else(|| ExperimentConfig::empty(command));
    if cfg.command != command {
        return Err(CliError::Usage(format!(
            "config is for `{}` but `{}` was invoked",
            cfg.command.name(),
            command.name()
        )));
    }
    if let Some(seed) = opts.seed {
        cfg.seed = Some(seed);
    }
    let seed = *cfg.seed.get_or_insert(0);
    let out = opts.out.clone().or_else(|| cfg.output.clone().map(PathBuf::from)).unwrap_or_else(|| DEFAULT_OUT_DIR.into());

    match command {
        Command::Optimize => optimize(cfg, seed, &out, opts),
        Command::Verify => verify(cfg, seed, &out, opts),
        Command::RegretSweep => sweep(cfg, seed, &out, opts),
        Command::AuditLowerBound => audit(cfg, seed, &out),
    }
}

fn unit_params() -> FunctionClassParams {
    FunctionClassParams::new(1.0, 1.0, 1.0).expect("unit parameters are valid")
}

#[derive(Debug, Serialize)]
struct TrialRow {
    trial: u64,
    seed: u64,
    regret: f64,
    regret_bootstrap: f64,
    queries_used: u64,
    wall_ms: f64,
}

fn optimize(mut cfg: ExperimentConfig, seed: u64, out: &std::path::Path, opts: &RunOptions) -> Result<Completed, CliError> {
    let family = cfg
        .family
        .get_or_insert(FamilySpec::BenchmarkQuadratic { params: unit_params(), d: 2 })
        .clone();
    let t = *cfg.t.get_or_insert(100_000);
    let trials = *cfg.trials.get_or_insert(1);
    let noise = *cfg.noise.get_or_insert(NoiseModel::StdGaussian);
    noise.validate()?;
    let objective = family.build()?;
    let params = objective
        .class_params()
        .ok_or_else(|| CliError::Config("optimize needs a strongly convex family".into()))?;

    let rows = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = seed.wrapping_add(trial);
            let start = Instant::now();
            let r = run(objective.as_ref(), t, trial_seed, noise)?;
            let wall_ms = if opts.record_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            Ok(TrialRow {
                trial,
                seed: trial_seed,
                regret: r.regret,
                regret_bootstrap: r.regret_bootstrap,
                queries_used: r.queries_used,
                wall_ms,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table =
        Table::new(&["T", "d", "rho", "M", "seed", "trial", "regret", "regret_bootstrap", "queries_used", "wall_ms"]);
    for r in &rows {
        table.push(vec![
            t.to_string(),
            objective.dim().to_string(),
            fmt_f64(params.rho),
            fmt_f64(params.m),
            r.seed.to_string(),
            r.trial.to_string(),
            fmt_f64(r.regret),
            fmt_f64(r.regret_bootstrap),
            r.queries_used.to_string(),
            fmt_f64(r.wall_ms),
        ]);
    }
    let mean = rows.iter().map(|r| r.regret).sum::<f64>() / trials.max(1) as f64;
    let summary = json!({ "mean_regret": mean, "rows": rows });
    let record = ExperimentRecord::new(&cfg, seed, true, summary);
    let (csv, json) = write_outputs(out, "optimize", &table, &record)?;
    Ok(Completed { pass: true, csv, json })
}

fn verify(cfg: ExperimentConfig, seed: u64, out: &std::path::Path, opts: &RunOptions) -> Result<Completed, CliError> {
    let name = opts
        .check
        .clone()
        .ok_or_else(|| CliError::Usage(format!("verify needs a check name, one of {CHECK_NAMES:?}")))?;
    let Some(defaults) = default_suite(&name) else {
        return Err(CliError::Usage(format!("unknown check `{name}`, expected one of {CHECK_NAMES:?}")));
    };
    let cells = match &cfg.check {
        Some(spec) if spec.name() != name => {
            return Err(CliError::Usage(format!("config describes `{}` but `{name}` was requested", spec.name())));
        }
        Some(_) => vec![cfg.clone()],
        None => defaults,
    };

    let mut reports: Vec<BoundCheckReport> = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        reports.extend(run_check(cell, seed.wrapping_add(i as u64), opts.bound_scale)?);
    }
    let pass = reports.iter().all(|r| r.pass);
    let stem = format!("verify_{}", name.replace('-', "_"));
    let summary = json!({
        "check": name,
        "bound_scale": opts.bound_scale,
        "cells": cells,
        "reports": reports,
    });
    let record = ExperimentRecord::new(&cfg, seed, pass, summary);
    let (csv, json) = write_outputs(out, &stem, &check_table(&reports), &record)?;
    Ok(Completed { pass, csv, json })
}

#[derive(Debug, Serialize)]
struct FitSummary {
    d: usize,
    slope: Option<f64>,
    intercept: Option<f64>,
    slope_stderr: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    slope_in_window: bool,
    error: Option<String>,
}

fn sweep(mut cfg: ExperimentConfig, seed: u64, out: &std::path::Path, opts: &RunOptions) -> Result<Completed, CliError> {
    let family = *cfg.sweep_family.get_or_insert(SweepFamily::Quadratic { params: unit_params() });
    let d_list = cfg.d_list.get_or_insert_with(|| vec![2]).clone();
    let t_list = cfg.t_list.get_or_insert_with(|| DEFAULT_T_LIST.to_vec()).clone();
    let trials = *cfg.trials.get_or_insert(20);
    let noise = *cfg.noise.get_or_insert(NoiseModel::StdGaussian);
    let params = family.params();
    let rate = |d: usize, t: u64| d as f64 * params.rho.powf(2.0 / 3.0) * (t as f64).powf(-2.0 / 3.0) / params.m;

    let mut table = Table::new(&[
        "family",
        "d",
        "T",
        "trials",
        "mean_regret",
        "stderr",
        "mean_regret_bootstrap",
        "mean_queries_used",
        "rate_ratio",
    ]);
    let family_name = match family {
        SweepFamily::Quadratic { .. } => "quadratic",
        SweepFamily::HardInstance { .. } => "hard_instance",
    };

    // (d, T, mean regret) per cell, from a real sweep or injected values.
    let mut means: Vec<(usize, u64, f64)> = Vec::new();
    if opts.synthetic_fit {
        for &d in &d_list {
            for &t in &t_list {
                let m = 0.5 * rate(d, t);
                means.push((d, t, m));
                table.push(vec![
                    "synthetic".into(),
                    d.to_string(),
                    t.to_string(),
                    "0".into(),
                    fmt_f64(m),
                    fmt_f64(0.0),
                    fmt_f64(0.0),
                    fmt_f64(0.0),
                    fmt_f64(m / rate(d, t)),
                ]);
            }
        }
    } else {
        let result = regret_sweep(family, &d_list, &t_list, trials, seed, noise)?;
        for c in &result.cells {
            means.push((c.d, c.t, c.mean_regret));
            table.push(vec![
                family_name.into(),
                c.d.to_string(),
                c.t.to_string(),
                c.trials.to_string(),
                fmt_f64(c.mean_regret),
                fmt_f64(c.stderr),
                fmt_f64(c.mean_regret_bootstrap),
                fmt_f64(c.mean_queries_used),
                fmt_f64(c.mean_regret / rate(c.d, c.t)),
            ]);
        }
    }

    let mut pass = true;
    let mut fits = Vec::new();
    let mut rate_checks = Vec::new();
    for &d in &d_list {
        let points: Vec<(f64, f64)> = means.iter().filter(|m| m.0 == d).map(|m| (m.1 as f64, m.2)).collect();
        let summary = match fit_loglog_slope(&points) {
            Ok(f) => {
                let in_window = (SLOPE_WINDOW.0..=SLOPE_WINDOW.1).contains(&f.slope);
                FitSummary {
                    d,
                    slope: Some(f.slope),
                    intercept: Some(f.intercept),
                    slope_stderr: Some(f.slope_stderr),
                    ci_low: Some(f.ci_low),
                    ci_high: Some(f.ci_high),
                    slope_in_window: in_window,
                    error: None,
                }
            }
            Err(e) => FitSummary {
                d,
                slope: None,
                intercept: None,
                slope_stderr: None,
                ci_low: None,
                ci_high: None,
                slope_in_window: false,
                error: Some(e.to_string()),
            },
        };
        pass &= summary.slope_in_window;
        fits.push(summary);

        if let Some(&(_, t_max, m)) = means.iter().filter(|m| m.0 == d).max_by_key(|m| m.1) {
            let limit = RATE_MULTIPLE * rate(d, t_max);
            pass &= m <= limit;
            rate_checks.push(json!({ "d": d, "T": t_max, "mean_regret": m, "limit": limit, "pass": m <= limit }));
        }
    }

    let summary = json!({
        "synthetic": opts.synthetic_fit,
        "slope_window": SLOPE_WINDOW,
        "fits": fits,
        "rate_checks": rate_checks,
    });
    let record = ExperimentRecord::new(&cfg, seed, pass, summary);
    let (csv, json) = write_outputs(out, "regret_sweep", &table, &record)?;
    Ok(Completed { pass, csv, json })
}

fn audit(mut cfg: ExperimentConfig, seed: u64, out: &std::path::Path) -> Result<Completed, CliError> {
    let t = *cfg.t.get_or_insert(100_000_000);
    let d = *cfg.d.get_or_insert(1);
    let params = *cfg.params.get_or_insert_with(unit_params);
    let report = lower_bound_audit(t, d, params)?;

    let mut table = Table::new(&["check", "value", "relation", "threshold", "pass"]);
    for c in &report.checks {
        let relation = match c.relation {
            zoo_opt::verification::Relation::AtMost => "<=",
            zoo_opt::verification::Relation::AtLeast => ">=",
        };
        table.push(vec![c.name.clone(), fmt_f64(c.value), relation.into(), fmt_f64(c.threshold), c.pass.to_string()]);
    }
    let pass = report.pass();
    let record = ExperimentRecord::new(&cfg, seed, pass, serde_json::to_value(&report).expect("report serializes"));
    let (csv, json) = write_outputs(out, "audit_lower_bound", &table, &record)?;
    Ok(Completed { pass, csv, json })
}
