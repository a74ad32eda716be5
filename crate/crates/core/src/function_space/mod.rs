//! Objective functions and the class `F(rho, M, R)`.
//!
//! A function belongs to `F(rho, M, R)` when
//!
//! - its Hessian is `rho`-Lipschitz in Frobenius norm (A1),
//! - every Hessian eigenvalue is at least `M` (A2),
//! - its global minimizer lies in the ball of radius `R` (A3).

mod cubic;
mod hard;
mod quadratic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SymmetricMatrix;
use crate::Point;

pub use cubic::{make_cubic_perturbed, CubicPerturbed};
pub use hard::{
    g_antideriv, g_base, g_derivative, make_hard_instance_1d, make_hard_instance_product,
    HardInstance, HardInstanceParams, HardSign,
};
pub use quadratic::{make_quadratic, Quadratic};

/// The triple `(rho, M, R)` defining `F(rho, M, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct FunctionClassParams {
    /// Hessian Lipschitz constant (Frobenius norm).
    pub rho: f64,
    /// Strong-convexity floor on Hessian eigenvalues.
    #[serde(rename = "M")]
    pub m: f64,
    /// Radius bounding the minimizer.
    #[serde(rename = "R")]
    pub r: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    rho: f64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "R")]
    r: f64,
}

impl TryFrom<RawParams> for FunctionClassParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Self::new(raw.rho, raw.m, raw.r)
    }
}

impl FunctionClassParams {
    pub fn new(rho: f64, m: f64, r: f64) -> Result<Self> {
        for (name, v) in [("rho", rho), ("M", m), ("R", r)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { rho, m, r })
    }

    /// Step radius `M / rho` used by the clipped Newton updates.
    pub fn step_radius(&self) -> f64 {
        self.m / self.rho
    }
}

/// Tag identifying which family an objective belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Quadratic,
    CubicPerturbed,
    HardInstance,
    Custom,
}

/// An evaluatable test function with ground-truth derivatives.
///
/// Implementations are immutable after construction and may be shared across
/// threads.
pub trait Objective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &Point) -> f64;

    fn gradient(&self, x: &Point) -> Point;

    fn hessian(&self, x: &Point) -> SymmetricMatrix;

    /// Hessian Lipschitz constant the objective satisfies.
    fn rho(&self) -> f64;

    /// Class parameters, or `None` for fixtures that are not strongly convex
    /// and may only be used to exercise the estimators.
    fn class_params(&self) -> Option<FunctionClassParams>;

    /// Global minimizer when known.
    fn minimizer(&self) -> Option<Point>;

    fn family(&self) -> FamilyKind {
        FamilyKind::Custom
    }

    fn estimator_only(&self) -> bool {
        self.class_params().is_none()
    }

    /// `f(x) - f(x*)`, when the minimizer is known.
    fn regret(&self, x: &Point) -> Option<f64> {
        self.minimizer().map(|xs| self.value(x) - self.value(&xs))
    }
}

/// Tolerance on `|f'(x*)|` relative to `M` for bisection minimizers.
pub const MINIMIZER_GRAD_TOL: f64 = 1e-12;

/// Global minimizer of a strongly convex objective.
pub fn true_minimizer(obj: &dyn Objective) -> Result<Point> {
    obj.minimizer()
        .ok_or_else(|| Error::NotInClass(format!("{:?} objective has no known global minimizer", obj.family())))
}

/// Root of a monotone increasing scalar function on `[lo, hi]` by bisection.
///
/// Stops when `|f(x)| <= tol` or the bracket collapses to adjacent floats.
pub fn bisect_increasing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Adjacent floats: return the endpoint with the smaller residual.
            return Ok(if f(a).abs() <= f(b).abs() { a } else { b });
        }
        let fm = f(mid);
        if fm.abs() <= tol {
            return Ok(mid);
        }
        if fm < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
}

/// Outcome of a numeric check of conditions A1-A3.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub a1_lipschitz_hessian: bool,
    pub a2_strong_convexity: bool,
    pub a3_bounded_minimizer: bool,
    /// Largest observed `||H(x) - H(x')||_F / (rho ||x - x'||)`.
    pub worst_lipschitz_ratio: f64,
    /// Smallest Hessian eigenvalue seen over the grid.
    pub min_eigenvalue: f64,
    pub minimizer_norm: Option<f64>,
}

impl MembershipReport {
    pub fn all_pass(&self) -> bool {
        self.a1_lipschitz_hessian && self.a2_strong_convexity && self.a3_bounded_minimizer
    }
}

/// Default slack for membership checks on analytically exact families.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Checks A1 on every pair, A2 at every point of every pair, and A3 once.
///
/// Failures are reported, never raised. Estimator-only fixtures fail A2/A3.
pub fn check_membership(obj: &dyn Objective, grid: &[(Point, Point)], tol: f64) -> Result<MembershipReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("membership grid is empty".into()));
    }
    let rho = obj.rho();
    let params = obj.class_params();

    let mut a1 = true;
    let mut worst_ratio: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for (x, xp) in grid {
        let hx = obj.hessian(x);
        let hxp = obj.hessian(xp);
        let diff = hx.frobenius_distance(&hxp);
        let dist = (x - xp).norm();
        if diff > rho * dist * (1.0 + tol) {
            a1 = false;
        }
        if dist > 0.0 {
            worst_ratio = worst_ratio.max(diff / (rho * dist));
        }
        min_eig = min_eig.min(hx.min_eigenvalue()?).min(hxp.min_eigenvalue()?);
    }

    let (a2, a3, minimizer_norm) = match params {
        Some(p) => {
            let a2 = min_eig >= p.m * (1.0 - tol);
            let norm = obj.minimizer().map(|xs| xs.norm());
            (a2, norm.is_some_and(|n| n <= p.r), norm)
        }
        None => (false, false, obj.minimizer().map(|xs| xs.norm())),
    };

    Ok(MembershipReport {
        a1_lipschitz_hessian: a1,
        a2_strong_convexity: a2,
        a3_bounded_minimizer: a3,
        worst_lipschitz_ratio: worst_ratio,
        min_eigenvalue: min_eig,
        minimizer_norm,
    })
}
