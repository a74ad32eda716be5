use crate::error::{Error, Result};
use crate::spectral::{eig_sym, inverse_spd, SymmetricMatrix};
use crate::Point;

use super::{FamilyKind, FunctionClassParams, Objective};

/// `f(x) = 1/2 x^T A x + b^T x`.
///
/// The Hessian is constant, so A1 holds for every `rho`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: SymmetricMatrix,
    b: Point,
    params: FunctionClassParams,
    minimizer: Option<Point>,
}

/// Quadratic objective checked against `F(rho, M, R)`.
pub fn make_quadratic(a: SymmetricMatrix, b: Point, params: FunctionClassParams) -> Result<Quadratic> {
    if a.dim() != b.len() || a.dim() == 0 {
        return Err(Error::InvalidParameter(format!(
            "A is {0}x{0} but b has length {1}",
            a.dim(),
            b.len()
        )));
    }
    let min_eig = eig_sym(&a)?.min();
    if min_eig < params.m {
        return Err(Error::NotInClass(format!("min eigenvalue {min_eig} of A is below M = {}", params.m)));
    }
    let q = Quadratic::unchecked(a, b, params);
    let norm = q.minimizer.as_ref().map(|x| x.norm()).unwrap_or(f64::INFINITY);
    if norm > params.r {
        return Err(Error::NotInClass(format!("||A^-1 b|| = {norm} exceeds R = {}", params.r)));
    }
    Ok(q)
}

impl Quadratic {
    /// Builds the quadratic without class checks (for negative tests).
    pub fn unchecked(a: SymmetricMatrix, b: Point, params: FunctionClassParams) -> Self {
        let minimizer = inverse_spd(&a).ok().map(|inv| -inv.mul_vec(&b));
        Self { a, b, params, minimizer }
    }

    /// Benchmark quadratic used by the regret sweeps.
    ///
    /// `A` is tridiagonal with `2M` on the diagonal and `M/2` off it, so its
    /// spectrum lies in `(M, 3M)`; the minimizer is `(R/2) 1/sqrt(d)`.
    pub fn benchmark(d: usize, params: FunctionClassParams) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let a = SymmetricMatrix::from_fn(d, |i, j| match j - i {
            0 => 2.0 * params.m,
            1 => 0.5 * params.m,
            _ => 0.0,
        });
        let x_star = Point::from_element(d, 0.5 * params.r / (d as f64).sqrt());
        let b = -a.mul_vec(&x_star);
        make_quadratic(a, b, params)
    }

    pub fn a(&self) -> &SymmetricMatrix {
        &self.a
    }

    pub fn b(&self) -> &Point {
        &self.b
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Point) -> f64 {
        0.5 * x.dot(&self.a.mul_vec(x)) + self.b.dot(x)
    }

    fn gradient(&self, x: &Point) -> Point {
        self.a.mul_vec(x) + &self.b
    }

    fn hessian(&self, _x: &Point) -> SymmetricMatrix {
        self.a.clone()
    }

    fn rho(&self) -> f64 {
        self.params.rho
    }

    fn class_params(&self) -> Option<FunctionClassParams> {
        Some(self.params)
    }

    fn minimizer(&self) -> Option<Point> {
        self.minimizer.clone()
    }

    fn family(&self) -> FamilyKind {
        FamilyKind::Quadratic
    }
}
