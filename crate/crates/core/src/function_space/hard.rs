//! Lower-bound hard instances.
//!
//! `f1(x) = M x^2 + y0 G(x / x0)` and `f2(x) = M x^2 + y0 G(-x / x0)` where
//! `G` is the antiderivative of the bump `g` from `-pi`. In `d` dimensions the
//! instance is the separable sum `f_s(x) = sum_j f_{s_j}(x_j)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SymmetricMatrix;
use crate::Point;

use super::{bisect_increasing, FamilyKind, FunctionClassParams, Objective, MINIMIZER_GRAD_TOL};

/// The bump `g`: `(sin(x/2) + 1)/2` on `(-pi, 3pi]`, `-cos(x) - 1` on
/// `(-3pi, -pi]`, zero elsewhere. Continuous, `|g| <= 2`.
pub fn g_base(x: f64) -> f64 {
    if x > -PI && x <= 3.0 * PI {
        0.5 * ((0.5 * x).sin() + 1.0)
    } else if x > -3.0 * PI && x <= -PI {
        -x.cos() - 1.0
    } else {
        0.0
    }
}

/// `g'(x)`; bounded by 1 and 1-Lipschitz.
pub fn g_derivative(x: f64) -> f64 {
    if x > -PI && x <= 3.0 * PI {
        0.25 * (0.5 * x).cos()
    } else if x > -3.0 * PI && x <= -PI {
        x.sin()
    } else {
        0.0
    }
}

/// `G(x) = int_{-pi}^{x} g(z) dz` in closed form. `G` takes values in
/// `[0, 2pi]` and is constant outside `(-3pi, 3pi]`.
pub fn g_antideriv(x: f64) -> f64 {
    if x <= -3.0 * PI {
        2.0 * PI
    } else if x <= -PI {
        -PI - x.sin() - x
    } else if x <= 3.0 * PI {
        -(0.5 * x).cos() + 0.5 * (x + PI)
    } else {
        2.0 * PI
    }
}

/// Which of the two 1-D hard functions a coordinate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum HardSign {
    One,
    Two,
}

impl HardSign {
    fn orientation(self) -> f64 {
        match self {
            HardSign::One => 1.0,
            HardSign::Two => -1.0,
        }
    }
}

impl TryFrom<u8> for HardSign {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(HardSign::One),
            2 => Ok(HardSign::Two),
            other => Err(Error::InvalidParameter(format!("hard-instance index must be 1 or 2, got {other}"))),
        }
    }
}

impl From<HardSign> for u8 {
    fn from(s: HardSign) -> u8 {
        match s {
            HardSign::One => 1,
            HardSign::Two => 2,
        }
    }
}

/// Normalization of the hard instances for a budget `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardInstanceParams {
    pub t: u64,
    pub y0: f64,
    pub x0: f64,
    /// Target regret gap.
    pub eps: f64,
}

impl HardInstanceParams {
    /// `y0 = 1/(pi sqrt T)`, `x0 = (y0/rho)^(1/3)`, `eps = (y0/x0)^2 / (128 M)`.
    pub fn new(t: u64, params: &FunctionClassParams) -> Result<Self> {
        if t == 0 {
            return Err(Error::TooSmallBudget("T must be positive".into()));
        }
        let y0 = 1.0 / (PI * (t as f64).sqrt());
        let x0 = (y0 / params.rho).cbrt();
        let eps = (y0 / x0).powi(2) / (128.0 * params.m);
        Ok(Self { t, y0, x0, eps })
    }

    /// `y0 / x0^2`, the amplitude of the bump's contribution to `f''`.
    pub fn curvature_spread(&self) -> f64 {
        self.y0 / (self.x0 * self.x0)
    }

    /// Lower bound on `f''` used to reject budgets that are too small.
    pub fn guarded_curvature(&self, params: &FunctionClassParams) -> f64 {
        2.0 * params.m - 1.25 * self.curvature_spread()
    }
}

/// Separable product of 1-D hard instances.
#[derive(Debug, Clone)]
pub struct HardInstance {
    signs: Vec<HardSign>,
    hard: HardInstanceParams,
    params: FunctionClassParams,
    /// Minimizer of `f1`; the minimizer of `f2` is its negation.
    x1_star: f64,
}

/// One-dimensional hard instance `f1` or `f2`.
pub fn make_hard_instance_1d(which: HardSign, t: u64, params: FunctionClassParams) -> Result<HardInstance> {
    make_hard_instance_product(vec![which], t, params)
}

/// `f_s(x) = sum_j f_{s_j}(x_j)`.
pub fn make_hard_instance_product(signs: Vec<HardSign>, t: u64, params: FunctionClassParams) -> Result<HardInstance> {
    if signs.is_empty() {
        return Err(Error::InvalidParameter("sign vector must be nonempty".into()));
    }
    let hard = HardInstanceParams::new(t, &params)?;
    let floor = hard.guarded_curvature(&params);
    if floor <= params.m {
        return Err(Error::TooSmallBudget(format!(
            "T = {t}: curvature floor 2M - 5/4 y0/x0^2 = {floor} does not exceed M = {}",
            params.m
        )));
    }
    let mut inst = HardInstance { signs, hard, params, x1_star: 0.0 };
    let tol = MINIMIZER_GRAD_TOL * params.m;
    inst.x1_star = bisect_increasing(|x| inst.deriv_1d(HardSign::One, x), -params.r, params.r, tol)?;
    Ok(inst)
}

impl HardInstance {
    pub fn hard_params(&self) -> &HardInstanceParams {
        &self.hard
    }

    pub fn signs(&self) -> &[HardSign] {
        &self.signs
    }

    pub fn value_1d(&self, which: HardSign, x: f64) -> f64 {
        let HardInstanceParams { y0, x0, .. } = self.hard;
        self.params.m * x * x + y0 * g_antideriv(which.orientation() * x / x0)
    }

    pub fn deriv_1d(&self, which: HardSign, x: f64) -> f64 {
        let HardInstanceParams { y0, x0, .. } = self.hard;
        let s = which.orientation();
        2.0 * self.params.m * x + s * (y0 / x0) * g_base(s * x / x0)
    }

    pub fn second_deriv_1d(&self, which: HardSign, x: f64) -> f64 {
        let s = which.orientation();
        2.0 * self.params.m + self.hard.curvature_spread() * g_derivative(s * x / self.hard.x0)
    }

    /// Minimizer of the 1-D function `f_which`.
    pub fn minimizer_1d(&self, which: HardSign) -> f64 {
        which.orientation() * self.x1_star
    }

    /// `inf f_which`, identical for both functions.
    pub fn min_value_1d(&self) -> f64 {
        self.value_1d(HardSign::One, self.x1_star)
    }
}

impl Objective for HardInstance {
    fn dim(&self) -> usize {
        self.signs.len()
    }

    fn value(&self, x: &Point) -> f64 {
        self.signs.iter().zip(x.iter()).map(|(&s, &xi)| self.value_1d(s, xi)).sum()
    }

    fn gradient(&self, x: &Point) -> Point {
        Point::from_iterator(self.dim(), self.signs.iter().zip(x.iter()).map(|(&s, &xi)| self.deriv_1d(s, xi)))
    }

    fn hessian(&self, x: &Point) -> SymmetricMatrix {
        let diag: Vec<f64> = self.signs.iter().zip(x.iter()).map(|(&s, &xi)| self.second_deriv_1d(s, xi)).collect();
        SymmetricMatrix::from_diagonal(&diag)
    }

    fn rho(&self) -> f64 {
        self.params.rho
    }

    fn class_params(&self) -> Option<FunctionClassParams> {
        Some(self.params)
    }

    fn minimizer(&self) -> Option<Point> {
        Some(Point::from_iterator(self.dim(), self.signs.iter().map(|&s| self.minimizer_1d(s))))
    }

    fn family(&self) -> FamilyKind {
        FamilyKind::HardInstance
    }
}
