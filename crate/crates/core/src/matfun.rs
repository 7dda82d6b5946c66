//! Dense symmetric eigendecomposition and the spectral matrix functions built on it.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Accepted asymmetry of an eigensolver input, absolute.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Bound on `‖VᵀV − I‖_max` and `‖QQᵀ − I‖_max`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
/// Bound on `‖V diag(λ) Vᵀ − M‖_max`, relative to `max(1, ‖M‖_max)`.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Sweeps stop once the off-diagonal Frobenius norm falls below this fraction
/// of the full Frobenius norm.
const SWEEP_THRESHOLD: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Largest absolute entry.
pub fn max_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `‖a − b‖_max`; panics on shape mismatch.
pub fn max_dev(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_dev");
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

fn square_dim(m: &DMatrix<f64>) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    Ok(rows)
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors (as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map(|x| x).expect("identity is finite on finite eigenvalues")
    }

    /// `V diag(f(λ)) Vᵀ`, symmetrized. Fails if `f` is not finite on some eigenvalue.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        let mut values = Vec::with_capacity(self.dim());
        for &lambda in self.eigenvalues.iter() {
            let y = f(lambda);
            if !y.is_finite() {
                return Err(Error::DomainError { eigenvalue: lambda });
            }
            values.push(y);
        }
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (mut col, y) in scaled.column_iter_mut().zip(&values) {
            col *= *y;
        }
        let r = scaled * v.transpose();
        Ok((&r + r.transpose()) * 0.5)
    }
}

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
///
/// The input must be symmetric to within [`SYMMETRY_TOL`]; it is symmetrized
/// before iterating. Results are deterministic for identical input bits.
pub fn eig_symmetric(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = square_dim(m)?;
    for i in 0..n {
        for j in i + 1..n {
            let deviation = (m[(i, j)] - m[(j, i)]).abs();
            if deviation > SYMMETRY_TOL {
                return Err(Error::AsymmetricInput { i, j, deviation });
            }
        }
    }

    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm();

    let mut sweep = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= SWEEP_THRESHOLD * scale {
            break;
        }
        if sweep == MAX_SWEEPS || !off.is_finite() {
            return Err(Error::NoConvergence { sweeps: sweep });
        }
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| a[(k, k)]));
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { eigenvalues, eigenvectors })
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    // tan of the rotation angle, smaller root; 1/(2θ) avoids overflow of θ².
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.nrows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Applies a scalar function to a symmetric matrix through its eigendecomposition.
pub fn spd_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    eig_symmetric(m)?.map(f)
}

/// A square matrix with orthonormal rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix(DMatrix<f64>);

impl OrthogonalMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = square_dim(&m)?;
        let deviation = max_dev(&(&m * m.transpose()), &DMatrix::identity(n, n));
        if !(deviation <= ORTHOGONALITY_TOL) {
            return Err(Error::InvariantViolation {
                what: "orthogonality QQᵀ = I",
                deviation,
                tolerance: ORTHOGONALITY_TOL,
            });
        }
        Ok(OrthogonalMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        OrthogonalMatrix(DMatrix::identity(n, n))
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
}

/// Haar-distributed random orthogonal matrix.
///
/// Draws a standard-normal matrix from a ChaCha20 stream seeded by `seed`,
/// takes its QR factorization and flips column signs so that every diagonal
/// entry of R is positive.
pub fn random_orthogonal(n: usize, seed: u64) -> OrthogonalMatrix {
    assert!(n >= 1, "random_orthogonal needs n >= 1");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let gaussian = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        if r[(k, k)] < 0.0 {
            col.neg_mut();
        }
    }
    OrthogonalMatrix(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::path4;

    /// Roots of λ⁴ − 3λ² + 1 (the 4-node path) by plain bisection.
    fn path4_spectrum_by_bisection() -> Vec<f64> {
        let p = |x: f64| x.powi(4) - 3.0 * x * x + 1.0;
        let brackets = [(-2.0, -1.0), (-1.0, 0.0), (0.0, 1.0), (1.0, 2.0)];
        brackets
            .iter()
            .map(|&(mut lo, mut hi)| {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if (p(lo) < 0.0) == (p(mid) < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    fn check_invariants(m: &DMatrix<f64>, e: &SymmetricEigen) {
        let n = m.nrows();
        let scale = max_norm(m).max(1.0);
        assert!(max_dev(&e.reconstruct(), m) <= RECONSTRUCTION_TOL * scale);
        let vtv = e.eigenvectors.transpose() * &e.eigenvectors;
        assert!(max_dev(&vtv, &DMatrix::identity(n, n)) <= ORTHOGONALITY_TOL);
        assert!(e.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_eigenvalues() {
        let m = DMatrix::identity(3, 3);
        let e = eig_symmetric(&m).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 1.0, 1.0]);
        check_invariants(&m, &e);
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let e = eig_symmetric(&m).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 2.0, 3.0]);
        check_invariants(&m, &e);
    }

    #[test]
    fn path_spectrum_matches_bisection() {
        let expected = path4_spectrum_by_bisection();
        // frozen from the bisection oracle: 2cos(kπ/5)
        for (x, frozen) in expected.iter().zip([-1.618033988749895, -0.6180339887498949, 0.6180339887498949, 1.618033988749895]) {
            assert!((x - frozen).abs() < 1e-14);
        }
        let a = path4().weights().clone();
        let e = eig_symmetric(&a).unwrap();
        for (got, want) in e.eigenvalues.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        check_invariants(&a, &e);
    }

    #[test]
    fn rejects_asymmetric_and_non_square() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(eig_symmetric(&m), Err(Error::AsymmetricInput { i: 0, j: 1, .. })));
        assert!(matches!(eig_symmetric(&DMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5 + 1e-13, 2.0]);
        let e = eig_symmetric(&m).unwrap();
        assert!(max_dev(&e.reconstruct(), &((&m + m.transpose()) * 0.5)) < 1e-12);
    }

    #[test]
    fn non_finite_input_does_not_converge() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, f64::NAN, f64::NAN, 0.0]);
        assert!(matches!(eig_symmetric(&m), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn zero_and_one_by_one() {
        let e = eig_symmetric(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[0.0; 3]);
        let e = eig_symmetric(&DMatrix::from_element(1, 1, -4.0)).unwrap();
        assert_eq!(e.eigenvalues[0], -4.0);
    }

    #[test]
    fn square_function_matches_product() {
        let a = path4().weights().clone();
        let sq = spd_function(&a, |x| x * x).unwrap();
        assert!(max_dev(&sq, &(&a * &a)) <= 1e-12);
    }

    #[test]
    fn inverse_sqrt_of_zero_is_identity() {
        let a = DMatrix::<f64>::zeros(4, 4);
        let w = spd_function(&(&a * &a), |x| (1.0 + x).powf(-0.5)).unwrap();
        assert_eq!(w, DMatrix::identity(4, 4));
    }

    #[test]
    fn inverse_sqrt_defining_identity() {
        let a = path4().weights().clone();
        let a2 = &a * &a;
        let w = spd_function(&a2, |x| (1.0 + x).powf(-0.5)).unwrap();
        let one_plus = DMatrix::identity(4, 4) + &a2;
        assert!(max_dev(&(&w * one_plus * &w), &DMatrix::identity(4, 4)) <= 1e-10);
        assert!(max_dev(&w, &w.transpose()) <= 1e-12);
        assert!(max_dev(&(&w * &a2), &(&a2 * &w)) <= 1e-10);
    }

    #[test]
    fn sqrt_of_negative_eigenvalue_is_domain_error() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0]));
        assert_eq!(spd_function(&m, f64::sqrt).unwrap_err(), Error::DomainError { eigenvalue: -2.0 });
    }

    #[test]
    fn random_orthogonal_one_by_one() {
        for seed in 0..10 {
            let q = random_orthogonal(1, seed);
            assert_eq!(q.as_matrix()[(0, 0)].abs(), 1.0);
        }
    }

    #[test]
    fn random_orthogonal_invariant_and_determinism() {
        let q = random_orthogonal(5, 42);
        let qqt = q.as_matrix() * q.as_matrix().transpose();
        assert!(max_dev(&qqt, &DMatrix::identity(5, 5)) <= ORTHOGONALITY_TOL);
        assert_eq!(q, random_orthogonal(5, 42));
        assert!(OrthogonalMatrix::new(q.as_matrix().clone()).is_ok());
    }

    #[test]
    fn different_seeds_give_different_matrices() {
        for seed in 0..100u64 {
            let a = random_orthogonal(4, 2 * seed);
            let b = random_orthogonal(4, 2 * seed + 1);
            assert!(max_dev(a.as_matrix(), b.as_matrix()) > 1e-6, "seeds {} and {}", 2 * seed, 2 * seed + 1);
        }
    }

    #[test]
    fn orthogonal_constructor_rejects_non_orthogonal() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(OrthogonalMatrix::new(m), Err(Error::InvariantViolation { .. })));
    }
}
