//! Budgeted noisy evaluation channel.
//!
//! Every observation is `y = f(x) + w` with zero-mean noise `w`. The oracle is
//! the only handle the estimators and the optimizer get on an objective.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::Objective;
use crate::rng::{noise_stream, TrialRng};
use crate::Point;

/// Zero-mean additive noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    Zero,
    StdGaussian,
    /// Uniform on `[-a, a]`, variance `a^2 / 3`.
    UniformBounded { a: f64 },
}

impl NoiseModel {
    /// Rejects uniform half-widths outside `(0, sqrt 3]` (variance must be at most 1).
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::UniformBounded { a } if !(a > 0.0 && a <= 3f64.sqrt()) => Err(Error::InvalidParameter(
                format!("uniform noise half-width must lie in (0, sqrt 3], got {a}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseModel::Zero => 0.0,
            NoiseModel::StdGaussian => 1.0,
            NoiseModel::UniformBounded { a } => a * a / 3.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Zero => 0.0,
            NoiseModel::StdGaussian => rng.sample(StandardNormal),
            NoiseModel::UniformBounded { a } => rng.random_range(-a..=a),
        }
    }
}

/// Budgeted, seeded oracle around an objective.
#[derive(Debug)]
pub struct NoisyOracle<'a> {
    objective: &'a dyn Objective,
    noise: NoiseModel,
    budget: u64,
    used: u64,
    rng: TrialRng,
}

impl<'a> NoisyOracle<'a> {
    pub fn new(objective: &'a dyn Objective, noise: NoiseModel, budget: u64, seed: u64) -> Result<Self> {
        noise.validate()?;
        Ok(Self { objective, noise, budget, used: 0, rng: noise_stream(seed) })
    }

    pub fn objective(&self) -> &'a dyn Objective {
        self.objective
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    /// `T - used`.
    pub fn remaining(&self) -> u64 {
        self.budget - self.used
    }

    /// Fails without consuming anything unless `n` queries are available.
    pub fn ensure_available(&self, n: u64) -> Result<()> {
        if n > self.remaining() {
            return Err(Error::BudgetExhausted { requested: n, remaining: self.remaining() });
        }
        Ok(())
    }

    fn observe(&mut self, x: &Point) -> f64 {
        debug_assert!(self.used < self.budget);
        self.used += 1;
        self.objective.value(x) + self.noise.sample(&mut self.rng)
    }

    /// One noisy observation `f(x) + w`.
    pub fn query(&mut self, x: &Point) -> Result<f64> {
        self.ensure_available(1)?;
        Ok(self.observe(x))
    }

    /// Mean of `n` fresh observations at `x`.
    pub fn query_mean(&mut self, x: &Point, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        self.ensure_available(n)?;
        let sum: f64 = (0..n).map(|_| self.observe(x)).sum();
        Ok(sum / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{make_quadratic, FunctionClassParams};
    use crate::spectral::SymmetricMatrix;
    use nalgebra::dvector;

    fn quad() -> impl Objective {
        let p = FunctionClassParams::new(1.0, 1.0, 1.0).unwrap();
        make_quadratic(SymmetricMatrix::identity(2), dvector![0.0, 0.0], p).unwrap()
    }

    #[derive(Debug)]
    struct Flat;

    impl Objective for Flat {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, _x: &Point) -> f64 {
            0.0
        }
        fn gradient(&self, _x: &Point) -> Point {
            dvector![0.0]
        }
        fn hessian(&self, _x: &Point) -> SymmetricMatrix {
            SymmetricMatrix::zeros(1)
        }
        fn rho(&self) -> f64 {
            1.0
        }
        fn class_params(&self) -> Option<FunctionClassParams> {
            None
        }
        fn minimizer(&self) -> Option<Point> {
            None
        }
    }

    #[test]
    fn noiseless_query_is_exact() {
        let f = quad();
        let mut o = NoisyOracle::new(&f, NoiseModel::Zero, 10, 0).unwrap();
        assert_eq!(o.query(&dvector![1.0, 0.0]).unwrap(), 0.5);
        assert_eq!(o.query_mean(&dvector![1.0, 0.0], 7).unwrap(), 0.5);
        assert_eq!(o.used(), 8);
    }

    #[test]
    fn gaussian_mean_is_centered() {
        let f = Flat;
        let n = 1_000_000;
        let mut o = NoisyOracle::new(&f, NoiseModel::StdGaussian, n, 42).unwrap();
        let mean = o.query_mean(&dvector![0.0], n).unwrap();
        assert!(mean.abs() <= 0.005, "mean {mean}");
    }

    #[test]
    fn query_mean_concentrates() {
        let f = quad();
        let mut o = NoisyOracle::new(&f, NoiseModel::StdGaussian, 10_000, 9).unwrap();
        let m = o.query_mean(&dvector![1.0, 0.0], 10_000).unwrap();
        assert!((m - 0.5).abs() <= 0.05);
    }

    #[test]
    fn query_mean_of_one_is_query() {
        let f = quad();
        let mut a = NoisyOracle::new(&f, NoiseModel::StdGaussian, 5, 3).unwrap();
        let mut b = NoisyOracle::new(&f, NoiseModel::StdGaussian, 5, 3).unwrap();
        let x = dvector![0.3, -0.2];
        assert_eq!(a.query_mean(&x, 1).unwrap(), b.query(&x).unwrap());
    }

    #[test]
    fn budget_accounting() {
        let f = quad();
        let mut o = NoisyOracle::new(&f, NoiseModel::StdGaussian, 3, 1).unwrap();
        assert_eq!(o.remaining(), 3);
        o.query(&dvector![0.0, 0.0]).unwrap();
        assert_eq!(o.remaining(), 2);
        // A failed call consumes nothing.
        assert!(matches!(o.query_mean(&dvector![0.0, 0.0], 3), Err(Error::BudgetExhausted { .. })));
        assert_eq!(o.remaining(), 2);
        o.query_mean(&dvector![0.0, 0.0], 2).unwrap();
        assert_eq!(o.remaining(), 0);
        assert!(matches!(o.query(&dvector![0.0, 0.0]), Err(Error::BudgetExhausted { requested: 1, remaining: 0 })));
    }

    #[test]
    fn uniform_noise_validated() {
        assert!(NoiseModel::UniformBounded { a: 1.8 }.validate().is_err());
        assert!(NoiseModel::UniformBounded { a: 0.0 }.validate().is_err());
        assert!(NoiseModel::UniformBounded { a: 3f64.sqrt() }.validate().is_ok());
        assert!((NoiseModel::UniformBounded { a: 3f64.sqrt() }.variance() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noise_json() {
        let n: NoiseModel = serde_json::from_str(r#"{"kind":"uniform_bounded","a":1.5}"#).unwrap();
        assert_eq!(n, NoiseModel::UniformBounded { a: 1.5 });
        let n: NoiseModel = serde_json::from_str(r#"{"kind":"std_gaussian"}"#).unwrap();
        assert_eq!(n, NoiseModel::StdGaussian);
        assert!(serde_json::from_str::<NoiseModel>(r#"{"kind":"cauchy"}"#).is_err());
    }
}
