//! Dense symmetric linear algebra: eigendecomposition, eigenvalue clipping,
//! inverse square roots, the clipped-Newton `m*` search and uniform sphere
//! sampling.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Point;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// Dense symmetric `d x d` matrix.
///
/// The upper triangle is authoritative; the lower triangle is mirrored on
/// construction so the stored matrix is exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    /// Takes the upper triangle of a square matrix.
    pub fn from_upper(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "matrix must be square");
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    /// Symmetrizes `(m + m^T) / 2`.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "matrix must be square");
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, d))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// `scale * I_d`.
    pub fn scaled_identity(d: usize, scale: f64) -> Self {
        Self(DMatrix::identity(d, d) * scale)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// `||self - other||_F`.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.0[(i, j)] == 0.0))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eig_sym(self)?.values[0])
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymmetricMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter(format!(
                "matrix must be square, got {d} rows with lengths {:?}",
                rows.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(d, |i, j| rows[i][j]))
    }
}

impl From<SymmetricMatrix> for Vec<Vec<f64>> {
    fn from(m: SymmetricMatrix) -> Self {
        let d = m.dim();
        (0..d).map(|i| (0..d).map(|j| m.0[(i, j)]).collect()).collect()
    }
}

/// Eigendecomposition `H = V diag(values) V^T` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomp {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Applies `f` to every eigenvalue and reassembles `V diag(f(values)) V^T`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let mapped = self.values.map(f);
        let scaled = &self.vectors * DMatrix::from_diagonal(&mapped);
        let full = scaled * self.vectors.transpose();
        SymmetricMatrix::symmetrize(&full)
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.map_spectrum(|l| l)
    }

    /// Coordinates of `v` in the eigenbasis, `V^T v`.
    pub fn coefficients(&self, v: &DVector<f64>) -> DVector<f64> {
        self.vectors.tr_mul(v)
    }
}

/// Full symmetric eigendecomposition, eigenvalues sorted ascending.
pub fn eig_sym(h: &SymmetricMatrix) -> Result<EigenDecomp> {
    if !h.is_finite() {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }
    let d = h.dim();
    let eig = SymmetricEigen::try_new(h.0.clone(), EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(d, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok(EigenDecomp { values, vectors })
}

/// Replaces each eigenvalue `l` by `max(l, m)`, keeping the eigenvectors.
///
/// This is the Frobenius projection onto `{S : S - m I >= 0}`.
pub fn clip_min_eig(h: &SymmetricMatrix, m: f64) -> Result<SymmetricMatrix> {
    let eig = eig_sym(h)?;
    if eig.min() >= m {
        return Ok(h.clone());
    }
    Ok(eig.map_spectrum(|l| l.max(m)))
}

/// Symmetric positive definite `Z` with `Z * Z = H^{-1}`.
pub fn inv_sqrt_sym(h: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = eig_sym(h)?;
    if eig.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite(eig.min()));
    }
    Ok(eig.map_spectrum(|l| 1.0 / l.sqrt()))
}

/// `H^{-1}` for a positive definite `H`.
pub fn inverse_spd(h: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = eig_sym(h)?;
    if eig.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite(eig.min()));
    }
    Ok(eig.map_spectrum(|l| 1.0 / l))
}

/// Largest singular value, i.e. `max |eigenvalue|` for a symmetric matrix.
pub fn max_singular_value(z: &SymmetricMatrix) -> Result<f64> {
    let eig = eig_sym(z)?;
    Ok(eig.min().abs().max(eig.max().abs()))
}

/// Result of the clipped-Newton step search.
#[derive(Debug, Clone)]
pub struct MStarStep {
    /// Clipping level applied to the spectrum.
    pub m_star: f64,
    /// `H_{m*}^{-1} m_hat`.
    pub step: Point,
}

const MSTAR_REL_TOL: f64 = 1e-12;
const MSTAR_MAX_ITER: usize = 200;

/// Smallest clipping level `m*` such that `||H_{m*}^{-1} m_hat|| <= r0`,
/// together with the step `H_{m*}^{-1} m_hat`.
///
/// `H_m` keeps the eigenvectors of `H` and replaces each eigenvalue `l` by
/// `max(l, m)`. When no clipping is needed `m*` is reported as the minimum
/// eigenvalue of `H`. `H` must be positive definite.
pub fn solve_mstar(h: &SymmetricMatrix, m_hat: &Point, r0: f64) -> Result<MStarStep> {
    if !(r0 > 0.0) {
        return Err(Error::InvalidParameter(format!("r0 must be positive, got {r0}")));
    }
    let eig = eig_sym(h)?;
    let lambda_min = eig.min();
    if !(lambda_min > 0.0) {
        return Err(Error::NotPositiveDefinite(lambda_min));
    }
    let coeffs = eig.coefficients(m_hat);
    let step_for = |m: f64| -> Point {
        let scaled = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(eig.values.iter()).map(|(c, l)| c / l.max(m)),
        );
        &eig.vectors * scaled
    };
    // phi(m) = ||H_m^{-1} m_hat||^2, nonincreasing in m.
    let phi = |m: f64| -> f64 {
        coeffs
            .iter()
            .zip(eig.values.iter())
            .map(|(c, l)| (c / l.max(m)).powi(2))
            .sum()
    };

    let target = r0 * r0;
    if phi(lambda_min) <= target {
        return Ok(MStarStep { m_star: lambda_min, step: step_for(lambda_min) });
    }

    // phi(||m_hat|| / r0) <= r0^2 always, since every clipped eigenvalue is
    // at least ||m_hat|| / r0.
    let mut lo = lambda_min;
    let mut hi = m_hat.norm() / r0;
    for _ in 0..MSTAR_MAX_ITER {
        if hi - lo <= MSTAR_REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MStarStep { m_star: hi, step: step_for(hi) })
}

/// Uniform draw from the unit sphere `S^{d-1}` via normalized Gaussians.
pub fn sample_unit_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Point {
    assert!(d >= 1, "dimension must be at least 1");
    loop {
        let v = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let n = v.norm();
        if n > f64::MIN_POSITIVE && n.is_finite() {
            return v / n;
        }
    }
}

/// Random `d x d` orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `Q diag(spectrum) Q^T`.
pub fn with_spectrum(q: &DMatrix<f64>, spectrum: &[f64]) -> SymmetricMatrix {
    let lam = DMatrix::from_diagonal(&DVector::from_column_slice(spectrum));
    SymmetricMatrix::symmetrize(&(q * lam * q.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::fuzz_stream;
    use nalgebra::dvector;
    use proptest::prelude::*;
    use rand::Rng;

    fn rotation(theta: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
    }

    fn assert_mat_close(a: &SymmetricMatrix, b: &SymmetricMatrix, tol: f64) {
        let err = a.frobenius_distance(b);
        assert!(err <= tol, "||a - b||_F = {err:e} > {tol:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn eig_of_diagonal() {
        let e = eig_sym(&SymmetricMatrix::from_diagonal(&[5.0, 2.0])).unwrap();
        assert_eq!(e.values.as_slice(), &[2.0, 5.0]);
        let e = eig_sym(&SymmetricMatrix::identity(3)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn eig_of_rotated_spectrum() {
        let h = with_spectrum(&rotation(0.7), &[1.0, 3.0]);
        let e = eig_sym(&h).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_nan() {
        let h = SymmetricMatrix::from_diagonal(&[f64::NAN, 1.0]);
        assert!(matches!(eig_sym(&h), Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn clip_examples() {
        let c = clip_min_eig(&SymmetricMatrix::from_diagonal(&[-1.0, 2.0]), 0.5).unwrap();
        assert_mat_close(&c, &SymmetricMatrix::from_diagonal(&[0.5, 2.0]), 1e-12);

        let h = with_spectrum(&rotation(0.3), &[1.0, 4.0]);
        assert_mat_close(&clip_min_eig(&h, 0.9).unwrap(), &h, 1e-10);
    }

    #[test]
    fn clip_is_frobenius_projection() {
        // Any S with spectrum >= m is at least as far from H as clip(H, m).
        let mut rng = fuzz_stream(11);
        let m = 0.5;
        for _ in 0..100 {
            let d = 3;
            let h = with_spectrum(
                &random_orthogonal(d, &mut rng),
                &[rng.random_range(-2.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0)],
            );
            let clipped = clip_min_eig(&h, m).unwrap();
            let s = with_spectrum(
                &random_orthogonal(d, &mut rng),
                &[m + rng.random::<f64>(), m + rng.random::<f64>() * 2.0, m + rng.random::<f64>() * 3.0],
            );
            assert!(clipped.frobenius_distance(&h) <= s.frobenius_distance(&h) + 1e-12);
        }
    }

    #[test]
    fn inv_sqrt_examples() {
        let z = inv_sqrt_sym(&SymmetricMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_mat_close(&z, &SymmetricMatrix::from_diagonal(&[0.5, 1.0 / 3.0]), 1e-14);
        assert_mat_close(&inv_sqrt_sym(&SymmetricMatrix::identity(3)).unwrap(), &SymmetricMatrix::identity(3), 1e-14);

        let q = rotation(1.1);
        let z = inv_sqrt_sym(&with_spectrum(&q, &[4.0, 9.0])).unwrap();
        assert_mat_close(&z, &with_spectrum(&q, &[0.5, 1.0 / 3.0]), 1e-12);
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let r = inv_sqrt_sym(&SymmetricMatrix::from_diagonal(&[1.0, -1.0]));
        assert!(matches!(r, Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn max_singular_value_examples() {
        assert_eq!(max_singular_value(&SymmetricMatrix::from_diagonal(&[1.0, -3.0])).unwrap(), 3.0);
        assert!((max_singular_value(&SymmetricMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-15);
        assert!((max_singular_value(&SymmetricMatrix::scaled_identity(3, 0.25)).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mstar_clipping_active() {
        let h = SymmetricMatrix::from_diagonal(&[2.0, 5.0]);
        let s = solve_mstar(&h, &dvector![3.0, 4.0], 1.0).unwrap();
        // 9/m^2 + 16/m^2 = 1 at m = 5.
        assert!((s.m_star - 5.0).abs() < 1e-10, "m* = {}", s.m_star);
        assert!((s.step.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mstar_slack_constraint() {
        let h = SymmetricMatrix::from_diagonal(&[2.0, 5.0]);
        let s = solve_mstar(&h, &dvector![3.0, 4.0], 10.0).unwrap();
        assert_eq!(s.m_star, 2.0);
        assert!((&s.step - dvector![1.5, 0.8]).norm() < 1e-14);
        assert!((s.step.norm_squared() - (9.0 / 4.0 + 16.0 / 25.0)).abs() < 1e-12);
    }

    #[test]
    fn mstar_zero_gradient() {
        let h = SymmetricMatrix::from_diagonal(&[2.0, 5.0]);
        let s = solve_mstar(&h, &dvector![0.0, 0.0], 1.0).unwrap();
        assert_eq!(s.step.norm(), 0.0);
        assert_eq!(s.m_star, 2.0);
    }

    #[test]
    fn sphere_draws_are_unit() {
        let mut rng = fuzz_stream(3);
        for d in 1..=8 {
            for _ in 0..1000 {
                assert!((sample_unit_sphere(d, &mut rng).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_moments() {
        let mut rng = fuzz_stream(5);
        let n = 1_000_000;
        for d in [2usize, 5, 8] {
            let mut mean = DVector::zeros(d);
            let mut second = DMatrix::zeros(d, d);
            for _ in 0..n {
                let u = sample_unit_sphere(d, &mut rng);
                second += &u * u.transpose();
                mean += u;
            }
            mean /= n as f64;
            second /= n as f64;
            assert!(mean.norm() <= 0.005, "d={d} mean norm {}", mean.norm());
            let err = (second - DMatrix::identity(d, d) / d as f64).abs().max();
            assert!(err <= 0.01, "d={d} second-moment error {err}");
        }
    }

    fn spd_strategy() -> impl Strategy<Value = (SymmetricMatrix, Point)> {
        (1usize..=4, any::<u64>()).prop_map(|(d, seed)| {
            let mut rng = fuzz_stream(seed);
            let spec: Vec<f64> = (0..d).map(|_| 0.1 + 5.0 * rng.random::<f64>()).collect();
            let h = with_spectrum(&random_orthogonal(d, &mut rng), &spec);
            let m = DVector::from_fn(d, |_, _| 10.0 * (rng.random::<f64>() - 0.5));
            (h, m)
        })
    }

    proptest! {
        #[test]
        fn clip_is_idempotent_and_floored((h, _) in spd_strategy(), m in 0.0f64..4.0) {
            let once = clip_min_eig(&h, m).unwrap();
            let twice = clip_min_eig(&once, m).unwrap();
            prop_assert!(once.frobenius_distance(&twice) <= 1e-10 * (1.0 + h.frobenius_norm()));
            prop_assert!(once.min_eigenvalue().unwrap() >= m - 1e-10);
        }

        #[test]
        fn eig_reconstructs((h, _) in spd_strategy()) {
            let e = eig_sym(&h).unwrap();
            let recon = e.reconstruct();
            prop_assert!(recon.frobenius_distance(&h) <= 1e-10 * (1.0 + h.frobenius_norm()));
            let d = h.dim();
            let orth = (e.vectors.transpose() * &e.vectors - DMatrix::identity(d, d)).norm();
            prop_assert!(orth <= 1e-10);
        }

        #[test]
        fn inv_sqrt_squares_to_inverse((h, _) in spd_strategy()) {
            let z = inv_sqrt_sym(&h).unwrap();
            let inv = inverse_spd(&h).unwrap();
            let zz = z.as_matrix() * z.as_matrix();
            prop_assert!((zz - inv.as_matrix()).norm() <= 1e-9 * inv.frobenius_norm());
        }

        #[test]
        fn mstar_step_respects_radius((h, m) in spd_strategy(), r0 in 0.01f64..5.0) {
            let s = solve_mstar(&h, &m, r0).unwrap();
            prop_assert!(s.step.norm() <= r0 * (1.0 + 1e-9));
            if s.m_star > h.min_eigenvalue().unwrap() {
                prop_assert!((s.step.norm() - r0).abs() <= 1e-9 * r0);
            }
        }

        #[test]
        fn mstar_monotone_in_radius((h, m) in spd_strategy(), r0 in 0.01f64..5.0, factor in 1.0f64..4.0) {
            let small = solve_mstar(&h, &m, r0).unwrap();
            let large = solve_mstar(&h, &m, r0 * factor).unwrap();
            prop_assert!(large.m_star <= small.m_star * (1.0 + 1e-10));
        }
    }
}
