//! Regret-versus-budget sweeps and per-dimension rate fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_loglog_slope, LogLogFit};
use crate::error::{Error, Result};
use crate::function_space::{make_hard_instance_product, FunctionClassParams, HardSign, Objective, Quadratic};
use crate::optimizer::run;
use crate::oracle::NoiseModel;

/// Objective family swept over `(d, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepFamily {
    /// [`Quadratic::benchmark`] in each dimension.
    Quadratic { params: FunctionClassParams },
    /// Product hard instance built for each budget; signs alternate across
    /// coordinates and flip with the trial index.
    HardInstance { params: FunctionClassParams },
}

impl SweepFamily {
    pub fn params(&self) -> FunctionClassParams {
        match *self {
            Self::Quadratic { params } | Self::HardInstance { params } => params,
        }
    }

    fn objective(&self, d: usize, t: u64, trial: u64) -> Result<Box<dyn Objective>> {
        match *self {
            Self::Quadratic { params } => Ok(Box::new(Quadratic::benchmark(d, params)?)),
            Self::HardInstance { params } => {
                let signs = (0..d as u64)
                    .map(|j| if (j + trial).is_multiple_of(2) { HardSign::One } else { HardSign::Two })
                    .collect();
                Ok(Box::new(make_hard_instance_product(signs, t, params)?))
            }
        }
    }
}

/// Aggregate over the trials of one `(d, T)` cell.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub d: usize,
    pub t: u64,
    pub trials: u64,
    pub mean_regret: f64,
    pub stderr: f64,
    pub mean_regret_bootstrap: f64,
    pub mean_queries_used: f64,
    pub regrets: Vec<f64>,
    pub regrets_bootstrap: Vec<f64>,
}

/// Log-log fit of mean regret against `T` for one dimension.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionFit {
    pub d: usize,
    pub fit: Option<LogLogFit>,
    /// Why the fit is missing, if it is.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegretSweepResult {
    pub family: SweepFamily,
    pub noise: NoiseModel,
    pub seed0: u64,
    pub cells: Vec<SweepCell>,
    pub fits: Vec<DimensionFit>,
}

impl RegretSweepResult {
    pub fn cell(&self, d: usize, t: u64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.d == d && c.t == t)
    }

    pub fn fit(&self, d: usize) -> Option<&LogLogFit> {
        self.fits.iter().find(|f| f.d == d)?.fit.as_ref()
    }
}

/// Runs `trials` independent optimizations per `(d, T)` cell with seeds
/// `seed0 + trial` and fits the regret exponent per dimension.
///
/// Trials run on the current rayon pool; results are aggregated in trial
/// order so the output does not depend on the thread count.
pub fn regret_sweep(
    family: SweepFamily,
    d_list: &[usize],
    t_list: &[u64],
    trials: u64,
    seed0: u64,
    noise: NoiseModel,
) -> Result<RegretSweepResult> {
    if trials == 0 || d_list.is_empty() || t_list.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one dimension, budget and trial".into()));
    }
    noise.validate()?;
    let mut cells = Vec::with_capacity(d_list.len() * t_list.len());
    for &d in d_list {
        for &t in t_list {
            let runs = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let objective = family.objective(d, t, trial)?;
                    run(objective.as_ref(), t, seed0.wrapping_add(trial), noise)
                })
                .collect::<Result<Vec<_>>>()?;
            let regrets: Vec<f64> = runs.iter().map(|r| r.regret).collect();
            let regrets_bootstrap: Vec<f64> = runs.iter().map(|r| r.regret_bootstrap).collect();
            let n = trials as f64;
            let mean = regrets.iter().sum::<f64>() / n;
            let stderr = if trials > 1 {
                (regrets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
            cells.push(SweepCell {
                d,
                t,
                trials,
                mean_regret: mean,
                stderr,
                mean_regret_bootstrap: regrets_bootstrap.iter().sum::<f64>() / n,
                mean_queries_used: runs.iter().map(|r| r.queries_used as f64).sum::<f64>() / n,
                regrets,
                regrets_bootstrap,
            });
        }
    }

    let fits = d_list
        .iter()
        .map(|&d| {
            let points: Vec<(f64, f64)> =
                cells.iter().filter(|c| c.d == d).map(|c| (c.t as f64, c.mean_regret)).collect();
            match fit_loglog_slope(&points) {
                Ok(fit) => DimensionFit { d, fit: Some(fit), error: None },
                Err(e) => DimensionFit { d, fit: None, error: Some(e.to_string()) },
            }
        })
        .collect();

    Ok(RegretSweepResult { family, noise, seed0, cells, fits })
}
