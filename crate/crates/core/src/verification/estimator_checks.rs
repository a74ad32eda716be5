//! Monte Carlo checks of the estimator bias, variance and tail bounds, and of
//! the sub-Gaussian noise tail.

use serde::{Deserialize, Serialize};

use super::{BoundCheckReport, MEAN_SLACK_K, TAIL_SLACK_K};
use crate::error::{Error, Result};
use crate::estimators::{bootstrapping_est, gradient_est, hessian_est, query_cost, EstimatorKind};
use crate::function_space::Objective;
use crate::oracle::{NoiseModel, NoisyOracle};
use crate::rng::{direction_stream, noise_stream};
use crate::spectral::{max_singular_value, SymmetricMatrix};
use crate::Point;

/// `lambda_Z^3 rho sqrt(d) / (2 (d + 2))`.
pub fn bias_bound(d: usize, rho: f64, lambda_z: f64) -> f64 {
    let df = d as f64;
    lambda_z.powi(3) * rho * df.sqrt() / (2.0 * (df + 2.0))
}

/// `(2d/n) ||Z grad f||^2 + (d^2 / 18n) (rho lambda_Z^3)^2 + d^2 / 2n`.
pub fn variance_bound(d: usize, n: u64, shaped_grad_norm: f64, rho: f64, lambda_z: f64) -> f64 {
    let df = d as f64;
    let nf = n as f64;
    2.0 * df / nf * shaped_grad_norm.powi(2) + df * df / (18.0 * nf) * (rho * lambda_z.powi(3)).powi(2)
        + df * df / (2.0 * nf)
}

/// Monte Carlo estimate of `E[g_hat] - Z grad f(x)` for single-sample
/// gradient estimates.
#[derive(Debug, Clone)]
pub struct BiasMeasurement {
    pub bias: Point,
    /// `||bias||`.
    pub empirical: f64,
    /// `sqrt(sum_i Var(g_i) / n_mc)`.
    pub stderr: f64,
    pub bound: f64,
    pub n_mc: u64,
}

/// Averages `n_mc` noiseless single-sample gradient estimates.
pub fn measure_bias(objective: &dyn Objective, x: &Point, z: &SymmetricMatrix, n_mc: u64, seed: u64) -> Result<BiasMeasurement> {
    if n_mc < 2 {
        return Err(Error::InvalidParameter("n_mc must be at least 2".into()));
    }
    let d = objective.dim();
    let mut oracle = NoisyOracle::new(objective, NoiseModel::Zero, query_cost(EstimatorKind::Gradient, d, n_mc), seed)?;
    let mut rng = direction_stream(seed);
    let (mean, var) = welford(n_mc, d, || Ok(gradient_est(&mut oracle, x, z, 1, &mut rng)?.g))?;

    let target = z.mul_vec(&objective.gradient(x));
    let bias = mean - target;
    let lambda = max_singular_value(z)?;
    Ok(BiasMeasurement {
        empirical: bias.norm(),
        stderr: (var.sum() / n_mc as f64).sqrt(),
        bound: bias_bound(d, objective.rho(), lambda),
        bias,
        n_mc,
    })
}

/// Checks `||E[g_hat] - Z grad f|| <= bound_scale * bound + 5 stderr`.
///
/// `bound_scale` is 1 in normal use; smaller values make the check
/// deliberately stricter to confirm it can fail.
pub fn bias_experiment(
    objective: &dyn Objective,
    x: &Point,
    z: &SymmetricMatrix,
    n_mc: u64,
    seed: u64,
    bound_scale: f64,
) -> Result<BoundCheckReport> {
    let m = measure_bias(objective, x, z, n_mc, seed)?;
    let lambda = max_singular_value(z)?;
    let bound = bound_scale * m.bound;
    // The equality instance has zero sampling variance, so rounding alone
    // would decide it without an absolute allowance.
    Ok(BoundCheckReport::with_abs_slack(
        "gradient_bias",
        [("d", objective.dim() as f64), ("lambda_z", lambda), ("n_mc", n_mc as f64), ("bound_scale", bound_scale)],
        m.empirical,
        m.stderr,
        bound,
        MEAN_SLACK_K,
        1e-12 * (1.0 + bound),
    ))
}

/// Empirical `Tr(Cov[g_hat])` over `n_mc` repetitions of `gradient_est(n)`
/// against the three-term bound.
pub fn variance_experiment(
    objective: &dyn Objective,
    x: &Point,
    z: &SymmetricMatrix,
    n: u64,
    n_mc: u64,
    noise: NoiseModel,
    seed: u64,
) -> Result<BoundCheckReport> {
    if n_mc < 2 {
        return Err(Error::InvalidParameter("n_mc must be at least 2".into()));
    }
    let d = objective.dim();
    let budget = query_cost(EstimatorKind::Gradient, d, n) * n_mc;
    let mut oracle = NoisyOracle::new(objective, noise, budget, seed)?;
    let mut rng = direction_stream(seed);
    let mut samples = Vec::with_capacity(n_mc as usize);
    for _ in 0..n_mc {
        samples.push(gradient_est(&mut oracle, x, z, n, &mut rng)?.g);
    }
    let nf = n_mc as f64;
    let mean = samples.iter().fold(Point::zeros(d), |acc, g| acc + g) / nf;
    // Tr(Cov) is the mean of ||g - mean||^2 (Bessel-corrected); its standard
    // error comes from the spread of those squared deviations.
    let sq: Vec<f64> = samples.iter().map(|g| (g - &mean).norm_squared()).collect();
    let sq_mean = sq.iter().sum::<f64>() / nf;
    let trace = sq_mean * nf / (nf - 1.0);
    let sq_var = sq.iter().map(|s| (s - sq_mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let stderr = (sq_var / nf).sqrt() * nf / (nf - 1.0);

    let lambda = max_singular_value(z)?;
    let shaped = z.mul_vec(&objective.gradient(x)).norm();
    let bound = variance_bound(d, n, shaped, objective.rho(), lambda);
    Ok(BoundCheckReport::new(
        "gradient_variance",
        [("d", d as f64), ("n", n as f64), ("lambda_z", lambda), ("n_mc", nf)],
        trace,
        stderr,
        bound,
        MEAN_SLACK_K,
    ))
}

/// Which coordinate-wise estimator a tail check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationKind {
    Bootstrap,
    Hessian,
}

/// Squared scale `s^2` of the sub-Gaussian tail `2 exp(-K^2 / s^2)`:
/// `3 d rho^2 r^4 / 4 + 12 d / (n r^2)` for the gradient,
/// `2 d^2 rho^2 r^2 + 144 d^2 / (n r^4)` for the Hessian.
pub fn concentration_scale(kind: ConcentrationKind, d: usize, rho: f64, r: f64, n: u64) -> f64 {
    let df = d as f64;
    let nf = n as f64;
    match kind {
        ConcentrationKind::Bootstrap => 0.75 * df * rho * rho * r.powi(4) + 12.0 * df / (nf * r * r),
        ConcentrationKind::Hessian => 2.0 * df * df * rho * rho * r * r + 144.0 * df * df / (nf * r.powi(4)),
    }
}

/// Empirical exceedance `P[err >= K]` for `K = multiplier * scale` against
/// `2 exp(-K^2 / scale^2)`, over `n_mc` independent estimator calls.
#[allow(clippy::too_many_arguments)]
pub fn concentration_experiment(
    kind: ConcentrationKind,
    objective: &dyn Objective,
    x: &Point,
    r: f64,
    n: u64,
    k_multipliers: &[f64],
    n_mc: u64,
    noise: NoiseModel,
    seed: u64,
) -> Result<Vec<BoundCheckReport>> {
    if n_mc == 0 {
        return Err(Error::InvalidParameter("n_mc must be positive".into()));
    }
    let d = objective.dim();
    let rho = objective.rho();
    let floor = objective.class_params().map_or(f64::NEG_INFINITY, |p| p.m);
    let per_call = match kind {
        ConcentrationKind::Bootstrap => query_cost(EstimatorKind::Bootstrap, d, n),
        ConcentrationKind::Hessian => query_cost(EstimatorKind::Hessian, d, n),
    };
    let mut oracle = NoisyOracle::new(objective, noise, per_call * n_mc, seed)?;
    let truth_grad = objective.gradient(x);
    let truth_hess = objective.hessian(x);

    let mut errors = Vec::with_capacity(n_mc as usize);
    for _ in 0..n_mc {
        let e = match kind {
            ConcentrationKind::Bootstrap => (bootstrapping_est(&mut oracle, x, r, n)? - &truth_grad).norm(),
            ConcentrationKind::Hessian => hessian_est(&mut oracle, x, r, n, floor)?.h.frobenius_distance(&truth_hess),
        };
        errors.push(e);
    }

    let scale2 = concentration_scale(kind, d, rho, r, n);
    let claim = match kind {
        ConcentrationKind::Bootstrap => "bootstrap_tail",
        ConcentrationKind::Hessian => "hessian_tail",
    };
    let nf = n_mc as f64;
    Ok(k_multipliers
        .iter()
        .map(|&mult| {
            let k = mult * scale2.sqrt();
            let p = errors.iter().filter(|&&e| e >= k).count() as f64 / nf;
            let stderr = (p * (1.0 - p) / nf).sqrt();
            let bound = 2.0 * (-k * k / scale2).exp();
            BoundCheckReport::new(
                claim,
                [("d", d as f64), ("n", n as f64), ("r", r), ("K", k), ("n_mc", nf)],
                p,
                stderr,
                bound,
                TAIL_SLACK_K,
            )
        })
        .collect())
}

/// Empirical `P[|w| > s]` over `n_draws` against `2 exp(-s^2)`.
pub fn noise_tail_check(noise: NoiseModel, s_grid: &[f64], n_draws: u64, seed: u64) -> Result<Vec<BoundCheckReport>> {
    noise.validate()?;
    if n_draws == 0 {
        return Err(Error::InvalidParameter("n_draws must be positive".into()));
    }
    let mut rng = noise_stream(seed);
    let draws: Vec<f64> = (0..n_draws).map(|_| noise.sample(&mut rng).abs()).collect();
    let nf = n_draws as f64;
    Ok(s_grid
        .iter()
        .map(|&s| {
            let p = draws.iter().filter(|&&w| w > s).count() as f64 / nf;
            let stderr = (p * (1.0 - p) / nf).sqrt();
            BoundCheckReport::new(
                "noise_tail",
                [("s", s), ("variance", noise.variance()), ("n_draws", nf)],
                p,
                stderr,
                2.0 * (-s * s).exp(),
                TAIL_SLACK_K,
            )
        })
        .collect())
}

/// Running mean and (unbiased) per-coordinate variance.
fn welford(n: u64, d: usize, mut sample: impl FnMut() -> Result<Point>) -> Result<(Point, Point)> {
    let mut mean = Point::zeros(d);
    let mut m2 = Point::zeros(d);
    for i in 1..=n {
        let x = sample()?;
        let delta = &x - &mean;
        mean += &delta / i as f64;
        let delta2 = &x - &mean;
        m2 += delta.component_mul(&delta2);
    }
    Ok((mean, m2 / (n - 1) as f64))
}
