//! Randomized checks of the clipped-Newton step: perturbation inequalities
//! and the noiseless convergence threshold.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function_space::{make_hard_instance_product, make_quadratic, FunctionClassParams, HardSign, Objective};
use crate::optimizer::noiseless_newton_seq;
use crate::spectral::{clip_min_eig, random_orthogonal, sample_unit_sphere, solve_mstar, with_spectrum, SymmetricMatrix};
use crate::Point;

/// Absolute floating-point allowance for the perturbation inequalities.
pub const PROP13_ABS_SLACK: f64 = 1e-8;

/// Both sides of the two perturbation inequalities for one instance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Prop13Outcome {
    /// `||m - m'|| + R0 ||H - H'||_F`.
    pub perturbation: f64,
    pub step_diff_norm: f64,
    pub lhs_a: f64,
    pub rhs_a: f64,
    /// `None` when the step difference vanishes.
    pub lhs_b: Option<f64>,
    pub rhs_b: Option<f64>,
}

impl Prop13Outcome {
    pub fn slack_a(&self) -> f64 {
        self.rhs_a - self.lhs_a
    }

    pub fn slack_b(&self) -> Option<f64> {
        Some(self.rhs_b? - self.lhs_b?)
    }
}

/// Evaluates both inequalities for `(m, H)` against `(m', H')` at radius `r0`.
///
/// `m_floor` is the common lower bound on the spectra of `H` and `H'`.
pub fn prop13_instance(
    h: &SymmetricMatrix,
    m: &Point,
    hp: &SymmetricMatrix,
    mp: &Point,
    r0: f64,
    m_floor: f64,
) -> Result<Prop13Outcome> {
    if !(r0 > 0.0 && m_floor > 0.0) {
        return Err(Error::InvalidParameter(format!("need R0 > 0 and M > 0, got {r0}, {m_floor}")));
    }
    let s = solve_mstar(h, m, r0)?;
    let sp = solve_mstar(hp, mp, r0)?;
    let delta = &s.step - &sp.step;
    let dn = delta.norm();
    let perturbation = (m - mp).norm() + r0 * h.frobenius_distance(hp);

    let (lhs_b, rhs_b) = if dn > 0.0 {
        let hp_clipped = clip_min_eig(hp, sp.m_star)?;
        (Some(hp_clipped.mul_vec(&delta).norm()), Some((3.0 + 2.0 * r0 / dn) * perturbation))
    } else {
        (None, None)
    };
    Ok(Prop13Outcome {
        perturbation,
        step_diff_norm: dn,
        lhs_a: dn * dn,
        rhs_a: 2.0 * r0 / m_floor * perturbation,
        lhs_b,
        rhs_b,
    })
}

/// Aggregate of a fuzzing campaign.
#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub d: usize,
    pub m: f64,
    pub n_instances: u64,
    pub violations_a: u64,
    pub violations_b: u64,
    /// Smallest `rhs - lhs` seen (negative means violated).
    pub worst_slack_a: f64,
    pub worst_slack_b: f64,
    pub abs_slack: f64,
}

impl FuzzReport {
    pub fn pass(&self) -> bool {
        self.violations_a == 0 && self.violations_b == 0
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

fn random_spd<R: Rng + ?Sized>(d: usize, m: f64, rng: &mut R) -> SymmetricMatrix {
    let q = random_orthogonal(d, rng);
    let spectrum: Vec<f64> = (0..d)
        .map(|_| if rng.random_bool(0.1) { m } else { m * (1.0 + log_uniform(rng, -2.0, 2.0)) })
        .collect();
    with_spectrum(&q, &spectrum)
}

fn random_vec<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Point {
    sample_unit_sphere(d, rng) * (scale * log_uniform(rng, -3.0, 3.0))
}

/// Draws `n_instances` random `(m, m', H, H', R0)` with spectra `>= m_floor`
/// and counts violations beyond [`PROP13_ABS_SLACK`].
pub fn prop13_fuzz<R: Rng + ?Sized>(
    n_instances: u64,
    d: usize,
    m_floor: f64,
    r0_range: (f64, f64),
    rng: &mut R,
) -> Result<FuzzReport> {
    if d == 0 || !(m_floor > 0.0) || !(0.0 < r0_range.0 && r0_range.0 <= r0_range.1) {
        return Err(Error::InvalidParameter(format!(
            "invalid fuzz setup d={d}, M={m_floor}, R0 range {r0_range:?}"
        )));
    }
    let mut report = FuzzReport {
        d,
        m: m_floor,
        n_instances,
        violations_a: 0,
        violations_b: 0,
        worst_slack_a: f64::INFINITY,
        worst_slack_b: f64::INFINITY,
        abs_slack: PROP13_ABS_SLACK,
    };
    for _ in 0..n_instances {
        let r0 = if r0_range.0 == r0_range.1 {
            r0_range.0
        } else {
            (rng.random_range(r0_range.0.ln()..r0_range.1.ln())).exp()
        };
        let h = random_spd(d, m_floor, rng);
        let hp = if rng.random_bool(0.5) {
            random_spd(d, m_floor, rng)
        } else {
            let scale = m_floor * log_uniform(rng, -6.0, 1.0);
            let e = SymmetricMatrix::from_fn(d, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
            clip_min_eig(&SymmetricMatrix::symmetrize(&(h.as_matrix() + e.as_matrix())), m_floor)?
        };
        let m = random_vec(d, m_floor * r0, rng);
        let mp = match rng.random_range(0..4u8) {
            0 => &m + random_vec(d, m.norm().max(m_floor * r0) * 1e-3, rng),
            1 => random_vec(d, m_floor * r0, rng),
            2 => Point::zeros(d),
            _ => m.clone(),
        };
        let out = prop13_instance(&h, &m, &hp, &mp, r0, m_floor)?;
        let sa = out.slack_a();
        report.worst_slack_a = report.worst_slack_a.min(sa);
        if sa < -PROP13_ABS_SLACK || !sa.is_finite() {
            report.violations_a += 1;
        }
        if let Some(sb) = out.slack_b() {
            report.worst_slack_b = report.worst_slack_b.min(sb);
            if sb < -PROP13_ABS_SLACK || !sb.is_finite() {
                report.violations_b += 1;
            }
        }
    }
    Ok(report)
}

/// Convergence of the noiseless modified-Newton sequence past its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct NewtonBoundReport {
    /// First (1-indexed) iteration covered by the claim, `ceil(5 R^2 rho^2 / M^2 + 1)`.
    pub t0: usize,
    pub checked_through: usize,
    /// `M^2 / (2 rho)`.
    pub threshold: f64,
    /// Largest `||grad f(z_t)||` for `t >= t0`.
    pub max_grad_after_t0: f64,
    pub violations: usize,
    /// Steps past `t0` where `||grad f(z_{t+1})|| > (rho/2)(||grad f(z_t)||/M)^2`.
    pub contraction_violations: usize,
    pub grad_norms: Vec<f64>,
}

impl NewtonBoundReport {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.contraction_violations == 0
    }
}

/// Runs the exact modified-Newton iteration `extra` steps past the threshold.
pub fn newton_bound_check(objective: &dyn Objective, extra: usize) -> Result<NewtonBoundReport> {
    let p = objective
        .class_params()
        .ok_or_else(|| Error::NotInClass("objective is estimator-only".into()))?;
    let t0 = (5.0 * (p.r * p.rho / p.m).powi(2) + 1.0).ceil() as usize;
    let t_max = t0 + extra;
    let seq = noiseless_newton_seq(objective, t_max)?;
    let grad_norms: Vec<f64> = seq.iter().map(|z| objective.gradient(z).norm()).collect();
    let threshold = p.m * p.m / (2.0 * p.rho);
    let abs_slack = 1e-10 * (1.0 + p.m * p.r);

    let tail = &grad_norms[t0 - 1..];
    let violations = tail.iter().filter(|&&g| g > threshold + abs_slack).count();
    let contraction_violations = tail
        .windows(2)
        .filter(|w| w[1] > p.rho / 2.0 * (w[0] / p.m).powi(2) + abs_slack)
        .count();
    Ok(NewtonBoundReport {
        t0,
        checked_through: t_max,
        threshold,
        max_grad_after_t0: tail.iter().copied().fold(0.0, f64::max),
        violations,
        contraction_violations,
        grad_norms,
    })
}

/// Budget used to build the hard instances in [`newton_fuzz`].
const NEWTON_FUZZ_HARD_T: u64 = 100_000_000;

/// Random member of the class with `R^2 rho^2 / M^2 <= max_ratio`: a quadratic
/// with a random spectrum in `[M, 10M]` and minimizer inside the ball, or a
/// product hard instance.
pub fn random_newton_instance<R: Rng + ?Sized>(max_d: usize, max_ratio: f64, rng: &mut R) -> Result<Box<dyn Objective>> {
    let d = rng.random_range(1..=max_d);
    let rho = log_uniform(rng, -0.7, 0.7);
    let m = log_uniform(rng, -0.3, 0.7);
    let r = m / rho * (max_ratio * rng.random_range(0.01..1.0)).sqrt();
    let params = FunctionClassParams::new(rho, m, r)?;
    if rng.random_bool(0.5) {
        let q = random_orthogonal(d, rng);
        let spectrum: Vec<f64> = (0..d).map(|_| m * rng.random_range(1.0..10.0)).collect();
        let a = with_spectrum(&q, &spectrum);
        let x_star = sample_unit_sphere(d, rng) * (r * rng.random_range(0.0..1.0));
        let b = -a.mul_vec(&x_star);
        Ok(Box::new(make_quadratic(a, b, params)?))
    } else {
        let signs = (0..d).map(|_| if rng.random_bool(0.5) { HardSign::One } else { HardSign::Two }).collect();
        Ok(Box::new(make_hard_instance_product(signs, NEWTON_FUZZ_HARD_T, params)?))
    }
}

/// [`newton_bound_check`] over `n_instances` draws of [`random_newton_instance`].
pub fn newton_fuzz<R: Rng + ?Sized>(
    n_instances: usize,
    max_d: usize,
    max_ratio: f64,
    extra: usize,
    rng: &mut R,
) -> Result<Vec<NewtonBoundReport>> {
    (0..n_instances)
        .map(|_| newton_bound_check(random_newton_instance(max_d, max_ratio, rng)?.as_ref(), extra))
        .collect()
}
