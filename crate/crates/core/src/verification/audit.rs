//! Grid audit of the hard-instance pair used for the lower bound.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function_space::{
    check_membership, make_hard_instance_1d, make_hard_instance_product, FunctionClassParams, HardInstance,
    HardInstanceParams, HardSign, Objective, MEMBERSHIP_TOL,
};
use crate::rng::fuzz_stream;
use crate::Point;

/// Points in the fine grid over `[-4 pi x0, 4 pi x0]`.
pub const AUDIT_GRID_POINTS: usize = 10_000;
const COARSE_GRID_POINTS: usize = 1_001;
const PRODUCT_PAIRS: usize = 2_000;
const AUDIT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Passes when `value <= threshold`.
    AtMost,
    /// Passes when `value >= threshold`.
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl AuditCheck {
    fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
        };
        Self { name: name.into(), value, threshold, relation, pass }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Relation::AtLeast, 1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub t: u64,
    pub d: usize,
    pub params: FunctionClassParams,
    pub hard: HardInstanceParams,
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Fine grid around the bump plus a coarse grid over `[-R, R]`, sorted.
fn audit_grid(hard: &HardInstanceParams, r: f64) -> Vec<f64> {
    let span = 4.0 * PI * hard.x0;
    let mut grid: Vec<f64> = linspace(-span, span, AUDIT_GRID_POINTS).chain(linspace(-r, r, COARSE_GRID_POINTS)).collect();
    grid.push(0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn scalar(x: f64) -> Point {
    Point::from_element(1, x)
}

/// Checks the stated properties of the hard pair `f1`, `f2` at budget `T`:
/// class membership, the `4 eps` optimality gap at the origin, the maximum
/// local variance, the `eps T^(2/3)` limit and the uniform sampling error.
/// For `d > 1` the product construction is also checked for separability
/// and membership.
pub fn lower_bound_audit(t: u64, d: usize, params: FunctionClassParams) -> Result<AuditReport> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let f1 = make_hard_instance_1d(HardSign::One, t, params)?;
    let f2 = make_hard_instance_1d(HardSign::Two, t, params)?;
    let hard = *f1.hard_params();
    let grid = audit_grid(&hard, params.r);
    let mut checks = Vec::new();

    let pairs: Vec<(Point, Point)> = grid
        .windows(2)
        .map(|w| (scalar(w[0]), scalar(w[1])))
        .chain(grid.iter().map(|&x| (scalar(x), scalar(-x))))
        .collect();
    for (label, f) in [("f1", &f1), ("f2", &f2)] {
        let rep = check_membership(f, &pairs, MEMBERSHIP_TOL)?;
        checks.push(AuditCheck::new(
            format!("{label}_lipschitz_hessian_ratio"),
            rep.worst_lipschitz_ratio,
            Relation::AtMost,
            1.0 + MEMBERSHIP_TOL,
        ));
        checks.push(AuditCheck::new(
            format!("{label}_min_curvature"),
            rep.min_eigenvalue,
            Relation::AtLeast,
            params.m,
        ));
        checks.push(AuditCheck::new(
            format!("{label}_minimizer_norm"),
            rep.minimizer_norm.unwrap_or(f64::INFINITY),
            Relation::AtMost,
            params.r,
        ));
    }

    let inf = f1.min_value_1d();
    let four_eps = 4.0 * hard.eps;
    for (label, which) in [("f1", HardSign::One), ("f2", HardSign::Two)] {
        checks.push(AuditCheck::new(
            format!("{label}_gap_at_origin"),
            f1.value_1d(which, 0.0) - inf,
            Relation::AtLeast,
            four_eps,
        ));
        // The bisection minimum must not be undercut anywhere on the grid.
        let grid_min = grid.iter().map(|&x| f1.value_1d(which, x)).fold(f64::INFINITY, f64::min);
        checks.push(AuditCheck::new(
            format!("{label}_grid_min_minus_inf"),
            grid_min - inf,
            Relation::AtLeast,
            -1e-12 * (1.0 + inf.abs()),
        ));
    }

    let max_var = grid
        .iter()
        .map(|&x| (0.5 * (f1.value_1d(HardSign::One, x) - f2.value_1d(HardSign::Two, x))).powi(2))
        .fold(0.0, f64::max);
    checks.push(AuditCheck::new("max_local_variance", max_var, Relation::AtMost, 1.0 / t as f64));

    let limit = params.rho.powf(2.0 / 3.0) / (128.0 * PI.powf(4.0 / 3.0) * params.m);
    let scaled = hard.eps * (t as f64).powf(2.0 / 3.0);
    checks.push(AuditCheck::new("eps_t23_relative_error", (scaled / limit - 1.0).abs(), Relation::AtMost, 0.05));

    // Fraction of {f1, f2} at least 4 eps above their infimum, minimized over x.
    let sampling_error = grid
        .iter()
        .map(|&x| {
            [HardSign::One, HardSign::Two].iter().filter(|&&w| f1.value_1d(w, x) - inf >= four_eps).count() as f64 / 2.0
        })
        .fold(1.0, f64::min);
    checks.push(AuditCheck::new("uniform_sampling_error", sampling_error, Relation::AtLeast, 0.5));

    if d > 1 {
        checks.extend(product_checks(&f1, &grid, t, d, params)?);
    }
    Ok(AuditReport { t, d, params, hard, checks })
}

fn product_checks(f1: &HardInstance, grid: &[f64], t: u64, d: usize, params: FunctionClassParams) -> Result<Vec<AuditCheck>> {
    let signs: Vec<HardSign> = (0..d).map(|j| if j % 2 == 0 { HardSign::One } else { HardSign::Two }).collect();
    let fs = make_hard_instance_product(signs.clone(), t, params)?;
    let mut rng = fuzz_stream(AUDIT_SEED);
    let mut pick = || Point::from_fn(d, |_, _| grid[rng.random_range(0..grid.len())]);
    let pairs: Vec<(Point, Point)> = (0..PRODUCT_PAIRS).map(|_| (pick(), pick())).collect();

    let sep_err = pairs
        .iter()
        .flat_map(|(a, b)| [a, b])
        .map(|x| {
            let sum: f64 = signs.iter().zip(x.iter()).map(|(&s, &xj)| f1.value_1d(s, xj)).sum();
            (fs.value(x) - sum).abs() / (1.0 + sum.abs())
        })
        .fold(0.0, f64::max);
    let rep = check_membership(&fs, &pairs, MEMBERSHIP_TOL)?;
    let inf = fs.value(&fs.minimizer().expect("hard instances know their minimizer"));
    let gap = fs.value(&Point::zeros(d)) - inf;
    Ok(vec![
        AuditCheck::new("product_separability_error", sep_err, Relation::AtMost, 1e-12),
        AuditCheck::flag("product_membership", rep.all_pass()),
        AuditCheck::new("product_gap_at_origin", gap, Relation::AtLeast, 4.0 * fs.hard_params().eps * d as f64),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> FunctionClassParams {
        FunctionClassParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn audit_passes_at_large_budget() {
        let rep = lower_bound_audit(100_000_000, 1, unit()).unwrap();
        assert!(rep.pass(), "{:#?}", rep.checks);
        assert!(rep.check("product_membership").is_none());
    }

    #[test]
    fn product_audit_passes() {
        let rep = lower_bound_audit(100_000_000, 3, unit()).unwrap();
        assert!(rep.pass(), "{:#?}", rep.checks);
    }

    #[test]
    fn small_budget_is_rejected() {
        let steep = FunctionClassParams::new(100.0, 1.0, 1.0).unwrap();
        assert!(matches!(lower_bound_audit(10, 1, steep), Err(Error::TooSmallBudget(_))));
    }

    #[test]
    fn eps_limit_is_exact() {
        let rep = lower_bound_audit(10_000_000_000, 1, unit()).unwrap();
        assert!(rep.check("eps_t23_relative_error").unwrap().value < 1e-12);
    }
}
