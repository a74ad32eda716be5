//! Finite-difference estimators built on noisy function values.
//!
//! - [`gradient_est`]: two-point estimator of `Z grad f(x)` sampling the
//!   hyperellipsoid `x + Z S^{d-1}`.
//! - [`bootstrapping_est`]: coordinate-wise central differences of `grad f`.
//! - [`hessian_est`]: coordinate-wise second differences of the Hessian,
//!   projected onto `{H : H - M I >= 0}`.
//!
//! Each call checks its full query cost up front, so a call that would run
//! out of budget consumes nothing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::NoisyOracle;
use crate::spectral::{clip_min_eig, sample_unit_sphere, SymmetricMatrix};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Gradient,
    Bootstrap,
    Hessian,
}

/// Exact number of oracle queries an estimator call consumes.
pub fn query_cost(kind: EstimatorKind, d: usize, n: u64) -> u64 {
    let d = d as u64;
    match kind {
        EstimatorKind::Gradient => 2 * n,
        EstimatorKind::Bootstrap => 2 * n * d,
        EstimatorKind::Hessian => n * (2 * d * d + 1),
    }
}

/// Estimate of `Z grad f(x)`.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    pub g: Point,
    pub n_used: u64,
    pub shape: SymmetricMatrix,
}

/// Projected Hessian estimate.
#[derive(Debug, Clone)]
pub struct HessianEstimate {
    /// Estimate after eigenvalue clipping at the strong-convexity floor.
    pub h: SymmetricMatrix,
    /// Raw finite-difference matrix before clipping.
    pub raw: SymmetricMatrix,
    pub n_used: u64,
}

fn check_inputs(oracle: &NoisyOracle<'_>, x: &Point, n: u64) -> Result<()> {
    if x.len() != oracle.dim() {
        return Err(Error::InvalidParameter(format!(
            "point has dimension {} but objective has {}",
            x.len(),
            oracle.dim()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    Ok(())
}

fn basis_offset(x: &Point, k: usize, delta: f64) -> Point {
    let mut p = x.clone();
    p[k] += delta;
    p
}

/// `g_hat = (1/n) sum_k (d/2)(y+ - y-) u_k` with `y+-` single queries at
/// `x +- Z u_k` and `u_k` uniform on the sphere. Consumes `2n` queries.
pub fn gradient_est<R: Rng + ?Sized>(
    oracle: &mut NoisyOracle<'_>,
    x: &Point,
    z: &SymmetricMatrix,
    n: u64,
    rng: &mut R,
) -> Result<GradientEstimate> {
    let d = oracle.dim();
    gradient_est_with(oracle, x, z, n, || sample_unit_sphere(d, rng))
}

/// [`gradient_est`] with caller-supplied directions (one per sample).
pub fn gradient_est_from_directions(
    oracle: &mut NoisyOracle<'_>,
    x: &Point,
    z: &SymmetricMatrix,
    directions: &[Point],
) -> Result<GradientEstimate> {
    let mut it = directions.iter().cloned();
    gradient_est_with(oracle, x, z, directions.len() as u64, || it.next().expect("one direction per sample"))
}

fn gradient_est_with(
    oracle: &mut NoisyOracle<'_>,
    x: &Point,
    z: &SymmetricMatrix,
    n: u64,
    mut next_direction: impl FnMut() -> Point,
) -> Result<GradientEstimate> {
    check_inputs(oracle, x, n)?;
    let d = oracle.dim();
    if z.dim() != d {
        return Err(Error::InvalidParameter(format!("shape is {0}x{0}, expected {d}x{d}", z.dim())));
    }
    oracle.ensure_available(query_cost(EstimatorKind::Gradient, d, n))?;

    let half_d = 0.5 * d as f64;
    let mut acc = Point::zeros(d);
    for _ in 0..n {
        let u = next_direction();
        let v = z.mul_vec(&u);
        let y_plus = oracle.query(&(x + &v))?;
        let y_minus = oracle.query(&(x - &v))?;
        acc.axpy(half_d * (y_plus - y_minus), &u, 1.0);
    }
    Ok(GradientEstimate { g: acc / n as f64, n_used: 2 * n, shape: z.clone() })
}

/// Central differences `m_k = (y+_k - y-_k) / 2r` along the standard basis,
/// each side averaged over `n` queries. Consumes `2nd` queries.
pub fn bootstrapping_est(oracle: &mut NoisyOracle<'_>, x: &Point, r: f64, n: u64) -> Result<Point> {
    check_inputs(oracle, x, n)?;
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let d = oracle.dim();
    oracle.ensure_available(query_cost(EstimatorKind::Bootstrap, d, n))?;

    let mut m = Point::zeros(d);
    for k in 0..d {
        let y_plus = oracle.query_mean(&basis_offset(x, k, r), n)?;
        let y_minus = oracle.query_mean(&basis_offset(x, k, -r), n)?;
        m[k] = (y_plus - y_minus) / (2.0 * r);
    }
    Ok(m)
}

/// Second differences along the standard basis, then eigenvalue clipping at
/// `floor`. Consumes `n (2 d^2 + 1)` queries: `n` at `x`, `2nd` for the
/// diagonal, and `n` four-point stencils for each of the `d(d-1)/2` pairs.
pub fn hessian_est(oracle: &mut NoisyOracle<'_>, x: &Point, r: f64, n: u64, floor: f64) -> Result<HessianEstimate> {
    check_inputs(oracle, x, n)?;
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let d = oracle.dim();
    let cost = query_cost(EstimatorKind::Hessian, d, n);
    oracle.ensure_available(cost)?;

    let r2 = r * r;
    let center = oracle.query_mean(x, n)?;
    let mut raw = nalgebra::DMatrix::zeros(d, d);
    for k in 0..d {
        let y_plus = oracle.query_mean(&basis_offset(x, k, r), n)?;
        let y_minus = oracle.query_mean(&basis_offset(x, k, -r), n)?;
        raw[(k, k)] = (y_plus + y_minus - 2.0 * center) / r2;
        for l in (k + 1)..d {
            let corner = |sk: f64, sl: f64| {
                let mut p = x.clone();
                p[k] += sk * r;
                p[l] += sl * r;
                p
            };
            let (pp, mm, pm, mp) = (corner(1.0, 1.0), corner(-1.0, -1.0), corner(1.0, -1.0), corner(-1.0, 1.0));
            let mut sum = 0.0;
            for _ in 0..n {
                let stencil = oracle.query(&pp)? + oracle.query(&mm)? - oracle.query(&pm)? - oracle.query(&mp)?;
                sum += stencil / (4.0 * r2);
            }
            raw[(k, l)] = sum / n as f64;
        }
    }
    let raw = SymmetricMatrix::from_upper(&raw);
    let h = clip_min_eig(&raw, floor)?;
    Ok(HessianEstimate { h, raw, n_used: cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{make_cubic_perturbed, make_quadratic, FunctionClassParams, Objective};
    use crate::oracle::NoiseModel;
    use crate::rng::direction_stream;
    use nalgebra::dvector;

    #[derive(Debug)]
    struct Poly1d {
        f: fn(f64) -> f64,
    }

    impl Objective for Poly1d {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &Point) -> f64 {
            (self.f)(x[0])
        }
        fn gradient(&self, _x: &Point) -> Point {
            unimplemented!("not needed by estimator tests")
        }
        fn hessian(&self, _x: &Point) -> SymmetricMatrix {
            unimplemented!("not needed by estimator tests")
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

    #[derive(Debug)]
    struct Constant(usize);

    impl Objective for Constant {
        fn dim(&self) -> usize {
            self.0
        }
        fn value(&self, _x: &Point) -> f64 {
            3.25
        }
        fn gradient(&self, _x: &Point) -> Point {
            Point::zeros(self.0)
        }
        fn hessian(&self, _x: &Point) -> SymmetricMatrix {
            SymmetricMatrix::zeros(self.0)
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

    fn params() -> FunctionClassParams {
        FunctionClassParams::new(1.0, 1.0, 10.0).unwrap()
    }

    #[test]
    fn query_costs() {
        assert_eq!(query_cost(EstimatorKind::Gradient, 7, 5), 10);
        assert_eq!(query_cost(EstimatorKind::Bootstrap, 3, 2), 12);
        assert_eq!(query_cost(EstimatorKind::Hessian, 2, 1), 9);
    }

    #[test]
    fn gradient_single_forced_direction() {
        let f = make_quadratic(SymmetricMatrix::identity(2), dvector![0.0, 0.0], params()).unwrap();
        let mut o = NoisyOracle::new(&f, NoiseModel::Zero, 2, 0).unwrap();
        let est =
            gradient_est_from_directions(&mut o, &dvector![1.0, 0.0], &SymmetricMatrix::identity(2), &[dvector![1.0, 0.0]])
                .unwrap();
        // (2/2)(f(2,0) - f(0,0)) (1,0)
        assert_eq!(est.g, dvector![2.0, 0.0]);
        assert_eq!(est.n_used, 2);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let f = Constant(3);
        let mut o = NoisyOracle::new(&f, NoiseModel::Zero, 1000, 0).unwrap();
        let mut rng = direction_stream(0);
        let est = gradient_est(&mut o, &Point::zeros(3), &SymmetricMatrix::identity(3), 50, &mut rng).unwrap();
        assert_eq!(est.g.norm(), 0.0);
    }

    #[test]
    fn gradient_bias_equality_case() {
        let f = make_cubic_perturbed(1.0, 0.0, 1).unwrap();
        for r in [0.1, 0.5, 1.0] {
            let mut o = NoisyOracle::new(&f, NoiseModel::Zero, 200, 0).unwrap();
            let mut rng = direction_stream(1);
            let est = gradient_est(&mut o, &dvector![0.0], &SymmetricMatrix::from_diagonal(&[r]), 100, &mut rng).unwrap();
            let expected = r * r * r / 6.0;
            assert!((est.g[0] - expected).abs() <= 1e-15, "r={r}: {} vs {expected}", est.g[0]);
        }
    }

    #[test]
    fn bootstrap_is_exact_on_quadratics() {
        let a = SymmetricMatrix::try_from(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let b = dvector![1.0, -1.0];
        let f = make_quadratic(a.clone(), b.clone(), params()).unwrap();
        let x = dvector![0.3, -0.7];
        for r in [0.01, 0.5, 2.0] {
            let mut o = NoisyOracle::new(&f, NoiseModel::Zero, 100, 0).unwrap();
            let m = bootstrapping_est(&mut o, &x, r, 3).unwrap();
            assert!((m - (a.mul_vec(&x) + &b)).norm() < 1e-12);
            assert_eq!(o.used(), query_cost(EstimatorKind::Bootstrap, 2, 3));
        }
    }

    #[test]
    fn bootstrap_cubic_bias() {
        let f = Poly1d { f: |x| x * x * x / 6.0 };
        for r in [0.1, 0.5, 1.0] {
            let mut o = NoisyOracle::new(&f, NoiseModel::Zero, 2, 0).unwrap();
            let m = bootstrapping_est(&mut o, &dvector![0.0], r, 1).unwrap();
            assert!((m[0] - r * r / 6.0).abs() < 1e-15);
        }
        let c = Constant(2);
        let mut o = NoisyOracle::new(&c, NoiseModel::Zero, 8, 0).unwrap();
        assert_eq!(bootstrapping_est(&mut o, &dvector![1.0, 1.0], 0.3, 2).unwrap().norm(), 0.0);
    }

    #[test]
    fn hessian_exact_on_quadratics() {
        let a = SymmetricMatrix::try_from(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let f = make_quadratic(a.clone(), dvector![1.0, -1.0], params()).unwrap();
        for r in [0.01, 0.3, 2.0] {
            let mut o = NoisyOracle::new(&f, NoiseModel::Zero, 100, 0).unwrap();
            let est = hessian_est(&mut o, &dvector![0.5, 0.5], r, 2, 1.0).unwrap();
            assert!(est.h.frobenius_distance(&a) < 1e-9, "r={r}: {:?}", est.h);
            assert_eq!(o.used(), 2 * 9);
        }
    }

    #[test]
    fn hessian_projection_active() {
        let p = FunctionClassParams::new(1.0, 0.5, 10.0).unwrap();
        let f = make_quadratic(SymmetricMatrix::from_diagonal(&[0.5, 3.0]), dvector![0.0, 0.0], p).unwrap();
        let mut o = NoisyOracle::new(&f, NoiseModel::Zero, 9, 0).unwrap();
        let est = hessian_est(&mut o, &dvector![0.0, 0.0], 0.1, 1, 1.0).unwrap();
        assert!(est.h.frobenius_distance(&SymmetricMatrix::from_diagonal(&[1.0, 3.0])) < 1e-10);
        assert!(est.raw.frobenius_distance(&SymmetricMatrix::from_diagonal(&[0.5, 3.0])) < 1e-10);
    }

    #[test]
    fn hessian_quartic_bias() {
        let f = Poly1d { f: |x| x.powi(4) };
        for r in [0.1, 0.5, 1.0] {
            let mut o = NoisyOracle::new(&f, NoiseModel::Zero, 3, 0).unwrap();
            let est = hessian_est(&mut o, &dvector![0.0], r, 1, -1.0).unwrap();
            assert!((est.raw.get(0, 0) - 2.0 * r * r).abs() < 1e-14);
        }
    }

    #[test]
    fn failed_call_consumes_nothing() {
        let f = Constant(2);
        let mut o = NoisyOracle::new(&f, NoiseModel::StdGaussian, 8, 0).unwrap();
        assert!(matches!(hessian_est(&mut o, &dvector![0.0, 0.0], 0.1, 1, 1.0), Err(Error::BudgetExhausted { .. })));
        let mut rng = direction_stream(0);
        assert!(gradient_est(&mut o, &dvector![0.0, 0.0], &SymmetricMatrix::identity(2), 5, &mut rng).is_err());
        assert_eq!(o.used(), 0);
    }
}
