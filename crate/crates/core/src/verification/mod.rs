//! Experiment harness turning the estimator bounds, perturbation
//! inequalities, lower-bound construction and regret rate into measured
//! pass/fail reports.
//!
//! Statistical checks carry their slack multiplier: mean-based checks use 5
//! standard errors, tail frequencies use 3 binomial standard errors.

mod audit;
mod estimator_checks;
mod fit;
mod fuzz;
mod sweep;

use std::collections::BTreeMap;

use serde::Serialize;

pub use audit::{lower_bound_audit, AuditCheck, AuditReport, Relation, AUDIT_GRID_POINTS};
pub use estimator_checks::{
    bias_bound, bias_experiment, concentration_experiment, concentration_scale, measure_bias, noise_tail_check,
    variance_bound, variance_experiment, BiasMeasurement, ConcentrationKind,
};
pub use fit::{fit_loglog_slope, LogLogFit};
pub use fuzz::{
    newton_bound_check, newton_fuzz, prop13_fuzz, prop13_instance, random_newton_instance, FuzzReport, NewtonBoundReport,
    Prop13Outcome, PROP13_ABS_SLACK,
};
pub use sweep::{regret_sweep, DimensionFit, RegretSweepResult, SweepCell, SweepFamily};

/// Slack multiplier for mean-based statistical checks.
pub const MEAN_SLACK_K: f64 = 5.0;
/// Slack multiplier for tail-frequency checks.
pub const TAIL_SLACK_K: f64 = 3.0;

/// One measured claim: `pass <=> empirical <= bound + slack_k * stderr + abs_slack`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheckReport {
    pub claim: String,
    pub params: BTreeMap<String, f64>,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    pub slack_k: f64,
    /// Absolute floating-point allowance, zero for purely statistical checks.
    pub abs_slack: f64,
    /// `bound + slack_k * stderr + abs_slack - empirical`; nonnegative iff pass.
    pub margin: f64,
    pub pass: bool,
}

impl BoundCheckReport {
    pub fn new(
        claim: impl Into<String>,
        params: impl IntoIterator<Item = (&'static str, f64)>,
        empirical: f64,
        stderr: f64,
        bound: f64,
        slack_k: f64,
    ) -> Self {
        Self::with_abs_slack(claim, params, empirical, stderr, bound, slack_k, 0.0)
    }

    pub fn with_abs_slack(
        claim: impl Into<String>,
        params: impl IntoIterator<Item = (&'static str, f64)>,
        empirical: f64,
        stderr: f64,
        bound: f64,
        slack_k: f64,
        abs_slack: f64,
    ) -> Self {
        let margin = bound + slack_k * stderr + abs_slack - empirical;
        Self {
            claim: claim.into(),
            params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            empirical,
            stderr,
            bound,
            slack_k,
            abs_slack,
            margin,
            pass: margin >= 0.0 && empirical.is_finite(),
        }
    }

    /// `k=v;k=v` rendering of the parameters, keys sorted.
    pub fn params_string(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}
