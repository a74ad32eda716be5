//! Zeroth-order stochastic optimization for strongly convex functions whose
//! Hessian is Lipschitz in Frobenius norm.
//!
//! The crate contains:
//!
//! - [`function_space`]: objective abstraction, test families (quadratics,
//!   cubic-perturbed quadratics, lower-bound hard instances) and numeric
//!   membership checks for the class `F(rho, M, R)`.
//! - [`oracle`]: the budgeted, seeded, noisy evaluation channel.
//! - [`spectral`]: dense symmetric linear algebra (eigenvalue clipping,
//!   inverse square roots, the clipped-Newton `m*` search).
//! - [`estimators`]: hyperellipsoid gradient estimator plus coordinate-wise
//!   gradient and Hessian finite differences.
//! - [`optimizer`]: the two-stage algorithm and the noiseless modified-Newton
//!   reference sequence.
//! - [`verification`]: Monte Carlo checks of the estimator bounds, the
//!   perturbation inequalities, the lower-bound construction and the regret
//!   rate.

pub mod error;
pub mod estimators;
pub mod function_space;
pub mod optimizer;
pub mod oracle;
pub mod rng;
pub mod spectral;
pub mod verification;

pub use error::{Error, Result};
pub use function_space::{FunctionClassParams, Objective};
pub use oracle::{NoiseModel, NoisyOracle};
pub use spectral::SymmetricMatrix;

/// A point in `R^d`.
pub type Point = nalgebra::DVector<f64>;
