//! Two-stage zeroth-order optimizer and the noiseless modified-Newton
//! reference sequence.
//!
//! The first (bootstrapping) stage starts at the origin and takes
//! `floor(T^0.1)` clipped Newton steps built from coordinate-wise gradient and
//! Hessian estimates; every step has norm at most `M / rho`. The final stage
//! estimates the Hessian at the bootstrapped point, reshapes the sampling
//! ellipsoid by `H^{-1/2}`, and takes one projected Newton step from a
//! hyperellipsoid gradient estimate.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{bootstrapping_est, gradient_est, hessian_est, query_cost, EstimatorKind};
use crate::function_space::{FunctionClassParams, Objective};
use crate::oracle::{NoiseModel, NoisyOracle};
use crate::rng::direction_stream;
use crate::spectral::{inv_sqrt_sym, inverse_spd, max_singular_value, solve_mstar, SymmetricMatrix};
use crate::Point;

/// Sample sizes and radii for both stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageConfig {
    pub t: u64,
    pub d: usize,
    pub rho: f64,
    pub m: f64,
    /// Number of bootstrapping iterations, `floor(T^0.1)`.
    pub n_boot: u64,
    pub n_m: u64,
    pub n_h_boot: u64,
    pub r_m: f64,
    pub r_h_boot: f64,
    pub n_g: u64,
    pub n_h_final: u64,
    pub r_g: f64,
    pub r_h_final: f64,
}

impl StageConfig {
    pub fn bootstrap_iteration_cost(&self) -> u64 {
        query_cost(EstimatorKind::Bootstrap, self.d, self.n_m) + query_cost(EstimatorKind::Hessian, self.d, self.n_h_boot)
    }

    pub fn final_stage_cost(&self) -> u64 {
        query_cost(EstimatorKind::Hessian, self.d, self.n_h_final) + query_cost(EstimatorKind::Gradient, self.d, self.n_g)
    }

    /// Total queries the plan will consume.
    pub fn planned_cost(&self) -> u64 {
        self.n_boot * self.bootstrap_iteration_cost() + self.final_stage_cost()
    }

    /// Radius of the step-norm cap, `M / rho`.
    pub fn step_radius(&self) -> f64 {
        self.m / self.rho
    }
}

/// Derives the stage parameters from `(T, d, rho, M)`.
///
/// - `n_m = floor(T^0.9 / 10d)`, `n_H = floor(T^0.9 / 10d^2)`,
///   `r_m = (8 / (n_m rho^2))^(1/6)`, `r_H = (144 / (n_H rho^2))^(1/6)`;
/// - `n_g = floor(T / 10)`, `n_H' = floor(T / 10d^2)`,
///   `r_g = (d^3 / (n_g rho^2))^(1/6)`, `r_H' = (144 / (n_H' rho^2))^(1/6)`.
pub fn plan_stages(t: u64, d: usize, rho: f64, m: f64) -> Result<StageConfig> {
    if t == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!("T and d must be positive (T = {t}, d = {d})")));
    }
    if !(rho > 0.0 && m > 0.0) {
        return Err(Error::InvalidParameter(format!("rho and M must be positive (rho = {rho}, M = {m})")));
    }
    let tf = t as f64;
    let df = d as f64;
    let t09 = tf.powf(0.9);
    let rho2 = rho * rho;

    let n_boot = tf.powf(0.1).floor() as u64;
    let n_m = (t09 / (10.0 * df)).floor() as u64;
    let n_h_boot = (t09 / (10.0 * df * df)).floor() as u64;
    let n_g = (tf / 10.0).floor() as u64;
    let n_h_final = (tf / (10.0 * df * df)).floor() as u64;

    for (name, v) in [("N_boot", n_boot), ("n_m", n_m), ("n_H_boot", n_h_boot), ("n_g", n_g), ("n_H_final", n_h_final)] {
        if v == 0 {
            return Err(Error::TooSmallBudget(format!("T = {t}, d = {d}: {name} rounds down to 0")));
        }
    }

    let cfg = StageConfig {
        t,
        d,
        rho,
        m,
        n_boot,
        n_m,
        n_h_boot,
        r_m: (8.0 / (n_m as f64 * rho2)).powf(1.0 / 6.0),
        r_h_boot: (144.0 / (n_h_boot as f64 * rho2)).powf(1.0 / 6.0),
        n_g,
        n_h_final,
        r_g: (df.powi(3) / (n_g as f64 * rho2)).powf(1.0 / 6.0),
        r_h_final: (144.0 / (n_h_final as f64 * rho2)).powf(1.0 / 6.0),
    };
    if cfg.planned_cost() > t {
        return Err(Error::TooSmallBudget(format!("planned cost {} exceeds T = {t}", cfg.planned_cost())));
    }
    Ok(cfg)
}

/// Diagnostics for one bootstrapping iteration.
#[derive(Debug, Clone, Serialize)]
pub struct BootstrapIteration {
    pub m_star: f64,
    pub gradient_estimate_norm: f64,
    pub hessian_min_eigenvalue: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone)]
pub struct BootstrapOutcome {
    pub x_b: Point,
    pub iterations: Vec<BootstrapIteration>,
}

/// First stage: `floor(T^0.1)` clipped Newton steps from the origin.
pub fn bootstrap_stage(oracle: &mut NoisyOracle<'_>, cfg: &StageConfig) -> Result<BootstrapOutcome> {
    oracle.ensure_available(cfg.n_boot * cfg.bootstrap_iteration_cost())?;
    let mut x = Point::zeros(cfg.d);
    let mut iterations = Vec::with_capacity(cfg.n_boot as usize);
    for _ in 0..cfg.n_boot {
        let m_hat = bootstrapping_est(oracle, &x, cfg.r_m, cfg.n_m)?;
        let h_hat = hessian_est(oracle, &x, cfg.r_h_boot, cfg.n_h_boot, cfg.m)?;
        let newton = solve_mstar(&h_hat.h, &m_hat, cfg.step_radius())?;
        x -= &newton.step;
        iterations.push(BootstrapIteration {
            m_star: newton.m_star,
            gradient_estimate_norm: m_hat.norm(),
            hessian_min_eigenvalue: h_hat.h.min_eigenvalue()?,
            step_norm: newton.step.norm(),
        });
    }
    Ok(BootstrapOutcome { x_b: x, iterations })
}

/// Final-stage step `r = -(lambda / r_g) Z_H g_hat`, projected onto the ball of
/// radius `radius`.
///
/// With `Z = (r_g / lambda) Z_H` and `Z_H^2 = H^{-1}` this equals
/// `-H^{-1} Z^{-1} g_hat` before projection.
pub fn final_step(z_h: &SymmetricMatrix, lambda: f64, r_g: f64, g_hat: &Point, radius: f64) -> Point {
    let r = z_h.mul_vec(g_hat) * (-lambda / r_g);
    project_to_ball(r, radius)
}

/// `-H^{-1} Z^{-1} g_hat` computed through explicit inverses.
pub fn newton_from_shaped_gradient(h_hat: &SymmetricMatrix, z: &SymmetricMatrix, g_hat: &Point) -> Result<Point> {
    let h_inv = inverse_spd(h_hat)?;
    let z_inv = inverse_spd(z)?;
    Ok(-h_inv.mul_vec(&z_inv.mul_vec(g_hat)))
}

/// `r * min(1, radius / ||r||)`.
pub fn project_to_ball(r: Point, radius: f64) -> Point {
    let norm = r.norm();
    if norm > radius {
        r * (radius / norm)
    } else {
        r
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalStageDiagnostics {
    pub hessian_min_eigenvalue: f64,
    /// Largest eigenvalue of `Z_H`.
    pub lambda_zh: f64,
    pub gradient_estimate_norm: f64,
    pub step_norm: f64,
    pub projected: bool,
}

#[derive(Debug, Clone)]
pub struct FinalOutcome {
    pub x_t: Point,
    pub diagnostics: FinalStageDiagnostics,
}

/// Final stage: one shaped-gradient Newton step from `x_b`.
pub fn final_stage<R: Rng + ?Sized>(
    oracle: &mut NoisyOracle<'_>,
    x_b: &Point,
    cfg: &StageConfig,
    rng: &mut R,
) -> Result<FinalOutcome> {
    oracle.ensure_available(cfg.final_stage_cost())?;
    let h_hat = hessian_est(oracle, x_b, cfg.r_h_final, cfg.n_h_final, cfg.m)?;
    let z_h = inv_sqrt_sym(&h_hat.h)?;
    let lambda = max_singular_value(&z_h)?;
    let z = z_h.scale(cfg.r_g / lambda);
    let g_hat = gradient_est(oracle, x_b, &z, cfg.n_g, rng)?;

    let radius = cfg.step_radius();
    let unprojected = z_h.mul_vec(&g_hat.g) * (-lambda / cfg.r_g);
    let projected = unprojected.norm() > radius;
    let step = project_to_ball(unprojected, radius);
    Ok(FinalOutcome {
        x_t: x_b + &step,
        diagnostics: FinalStageDiagnostics {
            hessian_min_eigenvalue: h_hat.h.min_eigenvalue()?,
            lambda_zh: lambda,
            gradient_estimate_norm: g_hat.g.norm(),
            step_norm: step.norm(),
            projected,
        },
    })
}

/// Outcome of one full run.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub x_t: Vec<f64>,
    pub x_b: Vec<f64>,
    pub budget: u64,
    pub queries_used: u64,
    pub bootstrap_queries: u64,
    pub final_queries: u64,
    pub bootstrap: Vec<BootstrapIteration>,
    pub final_stage: FinalStageDiagnostics,
    /// `f(x_T) - f(x*)`.
    pub regret: f64,
    /// `f(x_B) - f(x*)`.
    pub regret_bootstrap: f64,
}

/// Runs both stages against a fresh oracle seeded with `seed`.
pub fn run(objective: &dyn Objective, t: u64, seed: u64, noise: NoiseModel) -> Result<RunResult> {
    let params = class_params(objective)?;
    let x_star = objective
        .minimizer()
        .ok_or_else(|| Error::NotInClass("objective has no known minimizer".into()))?;
    let cfg = plan_stages(t, objective.dim(), params.rho, params.m)?;

    let mut oracle = NoisyOracle::new(objective, noise, t, seed)?;
    let mut directions = direction_stream(seed);

    let boot = bootstrap_stage(&mut oracle, &cfg)?;
    let bootstrap_queries = oracle.used();
    let fin = final_stage(&mut oracle, &boot.x_b, &cfg, &mut directions)?;
    let queries_used = oracle.used();
    debug_assert!(queries_used <= t);

    let f_star = objective.value(&x_star);
    Ok(RunResult {
        regret: objective.value(&fin.x_t) - f_star,
        regret_bootstrap: objective.value(&boot.x_b) - f_star,
        x_t: fin.x_t.iter().copied().collect(),
        x_b: boot.x_b.iter().copied().collect(),
        budget: t,
        queries_used,
        bootstrap_queries,
        final_queries: queries_used - bootstrap_queries,
        bootstrap: boot.iterations,
        final_stage: fin.diagnostics,
    })
}

fn class_params(objective: &dyn Objective) -> Result<FunctionClassParams> {
    objective.class_params().ok_or_else(|| {
        Error::NotInClass(format!("{:?} objective is estimator-only (not strongly convex)", objective.family()))
    })
}

/// Noiseless modified-Newton sequence `z_1 = 0`,
/// `z_{t+1} = z_t - H_{m*}^{-1} grad f(z_t)` with exact derivatives and
/// radius `M / rho`. Returns `z_1, ..., z_{t_max}`.
pub fn noiseless_newton_seq(objective: &dyn Objective, t_max: usize) -> Result<Vec<Point>> {
    let params = class_params(objective)?;
    let radius = params.step_radius();
    let mut z = Point::zeros(objective.dim());
    let mut seq = Vec::with_capacity(t_max);
    for t in 0..t_max {
        seq.push(z.clone());
        if t + 1 == t_max {
            break;
        }
        let step = solve_mstar(&objective.hessian(&z), &objective.gradient(&z), radius)?.step;
        z -= step;
    }
    Ok(seq)
}
