use crate::error::{Error, Result};
use crate::spectral::SymmetricMatrix;
use crate::Point;

use super::{FamilyKind, FunctionClassParams, Objective};

/// `f(x) = (M/2) ||x||^2 + (rho/6) sum_i x_i^3`.
///
/// `||hess(x) - hess(x')||_F = rho ||x - x'||` exactly, so A1 is tight. The
/// function is not globally convex and is only used for estimator checks.
#[derive(Debug, Clone)]
pub struct CubicPerturbed {
    dim: usize,
    rho: f64,
    curvature: f64,
}

/// Cubic-perturbed quadratic. `curvature` may be zero (pure cubic).
pub fn make_cubic_perturbed(rho: f64, curvature: f64, d: usize) -> Result<CubicPerturbed> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if !(curvature >= 0.0 && curvature.is_finite()) {
        return Err(Error::InvalidParameter(format!("curvature must be nonnegative, got {curvature}")));
    }
    Ok(CubicPerturbed { dim: d, rho, curvature })
}

impl CubicPerturbed {
    pub fn curvature(&self) -> f64 {
        self.curvature
    }
}

impl Objective for CubicPerturbed {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Point) -> f64 {
        let cubic: f64 = x.iter().map(|v| v * v * v).sum();
        0.5 * self.curvature * x.norm_squared() + self.rho / 6.0 * cubic
    }

    fn gradient(&self, x: &Point) -> Point {
        x.map(|v| self.curvature * v + 0.5 * self.rho * v * v)
    }

    fn hessian(&self, x: &Point) -> SymmetricMatrix {
        let diag: Vec<f64> = x.iter().map(|v| self.curvature + self.rho * v).collect();
        SymmetricMatrix::from_diagonal(&diag)
    }

    fn rho(&self) -> f64 {
        self.rho
    }

    fn class_params(&self) -> Option<FunctionClassParams> {
        None
    }

    fn minimizer(&self) -> Option<Point> {
        None
    }

    fn family(&self) -> FamilyKind {
        FamilyKind::CubicPerturbed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::fuzz_stream;
    use nalgebra::dvector;
    use rand::Rng;

    #[test]
    fn origin_values() {
        let f = make_cubic_perturbed(2.0, 0.5, 3).unwrap();
        let zero = Point::zeros(3);
        assert_eq!(f.gradient(&zero).norm(), 0.0);
        assert_eq!(f.hessian(&zero), SymmetricMatrix::scaled_identity(3, 0.5));
        assert!(f.estimator_only());
    }

    #[test]
    fn pure_cubic_is_odd() {
        let f = make_cubic_perturbed(1.0, 0.0, 1).unwrap();
        for r in [0.1, 0.5, 1.0, 3.0] {
            let diff = f.value(&dvector![r]) - f.value(&dvector![-r]);
            assert!((diff - r * r * r / 3.0).abs() < 1e-14 * (1.0 + r * r * r));
        }
    }

    #[test]
    fn hessian_lipschitz_is_exact() {
        let f = make_cubic_perturbed(1.7, 1.0, 4).unwrap();
        let mut rng = fuzz_stream(1);
        for _ in 0..200 {
            let x = Point::from_fn(4, |_, _| rng.random_range(-3.0..3.0));
            let y = Point::from_fn(4, |_, _| rng.random_range(-3.0..3.0));
            let lhs = f.hessian(&x).frobenius_distance(&f.hessian(&y));
            let rhs = 1.7 * (&x - &y).norm();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_cubic_perturbed(1.0, 1.0, 0).is_err());
        assert!(make_cubic_perturbed(0.0, 1.0, 1).is_err());
        assert!(make_cubic_perturbed(1.0, -0.1, 1).is_err());
    }
}
