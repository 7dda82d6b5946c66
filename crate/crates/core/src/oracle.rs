//! Gaussian covariance-matrix simulation of cluster-state generation.
//!
//! This path never touches the closed-form coefficients: it prepares `n`
//! squeezed vacua, applies the phase-space image of the synthesized unitary
//! and measures each nullifier as a quadratic form of the covariance matrix.
//!
//! Quadratures are ordered `(x̂_1..x̂_n, ŷ_1..ŷ_n)` with `[x̂_j, ŷ_k] = (i/2)δ_jk`
//! and `σ_kl = ⟨δq̂_k δq̂_l + δq̂_l δq̂_k⟩ / 2`, so the vacuum is `σ = I/4`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bogoliubov::{nullifier_rows_cluster_basis, synthesize_u, BogoliubovTransform, STRUCTURE_TOL};
use crate::criteria::{nullifier_variance_coefficients, SqueezingLevel};
use crate::error::{Error, Result};
use crate::graph::ClusterGraph;
use crate::matfun::{eig_symmetric, max_dev, max_norm, OrthogonalMatrix};

/// Slack on the uncertainty relation, relative to `max(1, ‖σ‖_max)`.
pub const UNCERTAINTY_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

/// Commutator form `Ω = [[0, I/2], [−I/2, 0]]`, i.e. `[q̂_k, q̂_l] = iΩ_kl`.
pub fn omega(n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        w[(k, n + k)] = 0.5;
        w[(n + k, k)] = -0.5;
    }
    w
}

/// Covariance matrix of a zero-mean Gaussian state of `n` modes.
///
/// Alongside `σ` the state carries a factor `F` with `σ = F Fᵀ`. Variances
/// are measured as `‖rF‖²`, which keeps nullifier variances many orders of
/// magnitude below the antisqueezed quadratures accurate to full relative
/// precision; forming `rσrᵀ` would cancel them into rounding noise.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    sigma: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl CovarianceState {
    /// Validates an explicit covariance matrix.
    pub fn from_sigma(sigma: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = sigma.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows % 2 != 0 {
            return Err(Error::DimensionMismatch { expected: rows + 1, found: rows });
        }
        for i in 0..rows {
            for j in i + 1..rows {
                let deviation = (sigma[(i, j)] - sigma[(j, i)]).abs();
                if deviation > SYMMETRY_TOL {
                    return Err(Error::AsymmetricInput { i, j, deviation });
                }
            }
        }
        let sym = (&sigma + sigma.transpose()) * 0.5;
        let scale = max_norm(&sym).max(1.0);
        let factor = eig_symmetric(&sym)?.map(|l| {
            if l >= -UNCERTAINTY_TOL * scale {
                l.max(0.0).sqrt()
            } else {
                f64::NAN
            }
        });
        let factor = factor.map_err(|_| Error::InvariantViolation {
            what: "positive semidefinite covariance",
            deviation: f64::NAN,
            tolerance: UNCERTAINTY_TOL,
        })?;
        let state = CovarianceState { sigma: sym, factor };
        state.check()?;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.sigma.nrows() / 2
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Smallest eigenvalue of `σ + (i/2)Ω`, computed through the real
    /// symmetric embedding `[[σ, −Ω/2], [Ω/2, σ]]`. Nonnegative for physical states.
    pub fn uncertainty_margin(&self) -> Result<f64> {
        let dim = self.sigma.nrows();
        let half_omega = omega(self.n()) * 0.5;
        let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
        embed.view_mut((0, 0), (dim, dim)).copy_from(&self.sigma);
        embed.view_mut((dim, dim), (dim, dim)).copy_from(&self.sigma);
        embed.view_mut((0, dim), (dim, dim)).copy_from(&(-&half_omega));
        embed.view_mut((dim, 0), (dim, dim)).copy_from(&half_omega);
        Ok(eig_symmetric(&embed)?.eigenvalues[0])
    }

    /// Determinants of the single-mode `2×2` blocks; each is at least 1/16.
    pub fn mode_determinants(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|k| {
                let s = &self.sigma;
                s[(k, k)] * s[(n + k, n + k)] - s[(k, n + k)] * s[(n + k, k)]
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        let scale = max_norm(&self.sigma).max(1.0);
        let tolerance = UNCERTAINTY_TOL * scale;
        let margin = self.uncertainty_margin()?;
        if !(margin >= -tolerance) {
            return Err(Error::InvariantViolation {
                what: "uncertainty relation σ + (i/2)Ω ⪰ 0",
                deviation: -margin,
                tolerance,
            });
        }
        for det in self.mode_determinants() {
            if !(det >= 1.0 / 16.0 - 1e-12 * scale * scale) {
                return Err(Error::InvariantViolation {
                    what: "single-mode determinant ≥ 1/16",
                    deviation: 1.0 / 16.0 - det,
                    tolerance: 1e-12,
                });
            }
        }
        Ok(())
    }

    /// `det σ`.
    pub fn determinant(&self) -> f64 {
        self.sigma.clone().determinant()
    }
}

/// `n` independent oscillators, ŷ variance `v`, x̂ variance `1/(16v)`.
pub fn initial_state(n: usize, s: SqueezingLevel) -> CovarianceState {
    initial_state_with_antisqueezing(n, s, s.antisqueezed_variance())
        .expect("minimum-uncertainty state is physical")
}

/// Like [`initial_state`] but with an explicit x̂ variance, which must satisfy
/// `x_variance · v ≥ 1/16`.
pub fn initial_state_with_antisqueezing(
    n: usize,
    s: SqueezingLevel,
    x_variance: f64,
) -> Result<CovarianceState> {
    let v = s.variance();
    let diag = DVector::from_fn(2 * n, |k, _| if k < n { x_variance } else { v });
    let state = CovarianceState {
        sigma: DMatrix::from_diagonal(&diag),
        factor: DMatrix::from_diagonal(&diag.map(f64::sqrt)),
    };
    state.check()?;
    Ok(state)
}

/// Real `2n × 2n` matrix preserving `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix(DMatrix<f64>);

impl SymplecticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols || rows % 2 != 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let w = omega(rows / 2);
        let deviation = max_dev(&(&m * &w * m.transpose()), &w);
        if !(deviation <= STRUCTURE_TOL) {
            return Err(Error::InvariantViolation {
                what: "symplectic condition SΩSᵀ = Ω",
                deviation,
                tolerance: STRUCTURE_TOL,
            });
        }
        Ok(SymplecticMatrix(m))
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `‖SΩSᵀ − Ω‖_max`.
    pub fn symplectic_deviation(&self) -> f64 {
        let w = omega(self.0.nrows() / 2);
        max_dev(&(&self.0 * &w * self.0.transpose()), &w)
    }
}

/// `S = [[Re U, −Im U], [Im U, Re U]]`: the action of `U` on `(x̂, ŷ)`.
pub fn symplectic_from_u(t: &BogoliubovTransform) -> Result<SymplecticMatrix> {
    let n = t.n();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(t.re_u());
    s.view_mut((0, n), (n, n)).copy_from(&(-t.im_u()));
    s.view_mut((n, 0), (n, n)).copy_from(t.im_u());
    s.view_mut((n, n), (n, n)).copy_from(t.re_u());
    SymplecticMatrix::new(s)
}

/// `σ → SσSᵀ`.
pub fn evolve(state: &CovarianceState, s: &SymplecticMatrix) -> Result<CovarianceState> {
    let dim = state.sigma.nrows();
    if s.0.nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: s.0.nrows() });
    }
    let sigma = &s.0 * &state.sigma * s.0.transpose();
    let next = CovarianceState {
        sigma: (&sigma + sigma.transpose()) * 0.5,
        factor: &s.0 * &state.factor,
    };
    next.check()?;
    Ok(next)
}

/// Variance of the quadrature combination `Σ_k row_k q̂_k`.
pub fn measure_variance(state: &CovarianceState, row: &[f64]) -> Result<f64> {
    let dim = state.sigma.nrows();
    if row.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
    }
    Ok(state
        .factor
        .column_iter()
        .map(|col| {
            let p: f64 = row.iter().zip(col.iter()).map(|(r, f)| r * f).sum();
            p * p
        })
        .sum())
}

/// Runs the full simulation from `initial` and measures every nullifier `(−A | I)`.
pub fn measured_nullifier_variances(
    g: &ClusterGraph,
    initial: &CovarianceState,
    q: &OrthogonalMatrix,
) -> Result<Vec<f64>> {
    if initial.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), found: initial.n() });
    }
    let t = synthesize_u(g, q)?;
    let evolved = evolve(initial, &symplectic_from_u(&t)?)?;
    let rows = nullifier_rows_cluster_basis(g);
    rows.row_iter()
        .map(|r| {
            let r: Vec<f64> = r.iter().copied().collect();
            measure_variance(&evolved, &r)
        })
        .collect()
}

/// Simulated versus closed-form nullifier variances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub measured: Vec<f64>,
    pub formula: Vec<f64>,
    pub max_rel_dev: f64,
}

impl TheoremCheck {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("check serializes")
    }
}

pub fn verify_theorem(
    g: &ClusterGraph,
    s: SqueezingLevel,
    q: &OrthogonalMatrix,
) -> Result<TheoremCheck> {
    let measured = measured_nullifier_variances(g, &initial_state(g.n(), s), q)?;
    let formula: Vec<f64> = nullifier_variance_coefficients(g)
        .into_iter()
        .map(|c| c * s.variance())
        .collect();
    let max_rel_dev = measured
        .iter()
        .zip(&formula)
        .map(|(m, f)| ((m - f) / f).abs())
        .fold(0.0, f64::max);
    Ok(TheoremCheck { measured, formula, max_rel_dev })
}
