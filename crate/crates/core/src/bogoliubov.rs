//! Synthesis of the Bogoliubov transformation that maps independent
//! ŷ-squeezed oscillators onto the cluster state of a given graph.
//!
//! The unitary is `U = (I + iA)(I + A²)^(-1/2) Q` for an arbitrary orthogonal
//! `Q`. Complex matrices are carried as `(Re U, Im U)` pairs.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::ClusterGraph;
use crate::matfun::{eig_symmetric, max_dev, OrthogonalMatrix};

/// Tolerance, in max norm, for every structural identity of the transform.
pub const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovTransform {
    re_u: DMatrix<f64>,
    im_u: DMatrix<f64>,
    q: OrthogonalMatrix,
}

/// Max-norm deviations of the identities every synthesized transform satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuralReport {
    /// `‖ReUᵀReU + ImUᵀImU − I‖`
    pub unitarity: f64,
    /// `‖ReUᵀImU − ImUᵀReU‖`
    pub unitarity_skew: f64,
    /// `‖ImU − A·ReU‖`
    pub constraint: f64,
    /// `‖ReU·ReUᵀ − (I + A²)⁻¹‖`
    pub gram: f64,
}

impl StructuralReport {
    pub fn max(&self) -> f64 {
        [self.unitarity, self.unitarity_skew, self.constraint, self.gram]
            .into_iter()
            .fold(0.0, f64::max)
    }

    fn enforce(self) -> Result<Self> {
        let checks = [
            ("unitarity of U", self.unitarity),
            ("unitarity of U (skew part)", self.unitarity_skew),
            ("constraint Im U = A Re U", self.constraint),
            ("Gram identity Re U Re Uᵀ = (I + A²)⁻¹", self.gram),
        ];
        for (what, deviation) in checks {
            if !(deviation <= STRUCTURE_TOL) {
                return Err(Error::InvariantViolation { what, deviation, tolerance: STRUCTURE_TOL });
            }
        }
        Ok(self)
    }
}

fn check_dim(g: &ClusterGraph, found: usize) -> Result<()> {
    if g.n() != found {
        return Err(Error::DimensionMismatch { expected: g.n(), found });
    }
    Ok(())
}

/// Builds `U` for graph `g` and free factor `q`, checking all structural identities.
pub fn synthesize_u(g: &ClusterGraph, q: &OrthogonalMatrix) -> Result<BogoliubovTransform> {
    check_dim(g, q.dim())?;
    let a = g.weights();
    // (I + A²)^(-1/2) shares A's eigenvectors, so decompose A itself.
    let polar = eig_symmetric(a)?.map(|l| 1.0 / (1.0 + l * l).sqrt())?;
    let re_u = polar * q.as_matrix();
    let im_u = a * &re_u;
    let t = BogoliubovTransform { re_u, im_u, q: q.clone() };
    t.structural_check(g)?.enforce()?;
    Ok(t)
}

impl BogoliubovTransform {
    pub fn n(&self) -> usize {
        self.re_u.nrows()
    }

    pub fn re_u(&self) -> &DMatrix<f64> {
        &self.re_u
    }

    pub fn im_u(&self) -> &DMatrix<f64> {
        &self.im_u
    }

    pub fn q(&self) -> &OrthogonalMatrix {
        &self.q
    }

    /// The symmetric polar factor `(I + A²)^(-1/2) = Re U · Qᵀ`.
    pub fn polar_factor(&self) -> DMatrix<f64> {
        &self.re_u * self.q.as_matrix().transpose()
    }

    /// Measures the structural identities against `g`. The inverse of
    /// `I + A²` comes from an LU factorization, not from the eigensolver.
    pub fn structural_check(&self, g: &ClusterGraph) -> Result<StructuralReport> {
        let n = self.n();
        check_dim(g, n)?;
        let a = g.weights();
        let id = DMatrix::<f64>::identity(n, n);
        let (re, im) = (&self.re_u, &self.im_u);
        let gram_target = (&id + a * a)
            .try_inverse()
            .expect("I + A² is positive definite");
        Ok(StructuralReport {
            unitarity: max_dev(&(re.transpose() * re + im.transpose() * im), &id),
            unitarity_skew: max_dev(&(re.transpose() * im), &(im.transpose() * re)),
            constraint: max_dev(im, &(a * re)),
            gram: max_dev(&(re * re.transpose()), &gram_target),
        })
    }

    /// JSON document `{"n", "re", "im", "q"}` with row-major nested arrays.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc {
            n: usize,
            re: Vec<Vec<f64>>,
            im: Vec<Vec<f64>>,
            q: Vec<Vec<f64>>,
        }
        let doc = Doc {
            n: self.n(),
            re: rows(&self.re_u),
            im: rows(&self.im_u),
            q: rows(self.q.as_matrix()),
        };
        serde_json::to_string_pretty(&doc).expect("transform serializes")
    }
}

pub(crate) fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Nullifier coefficients expressed over the input oscillators' quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct NullifierCoefficients {
    /// Row `j`: coefficients of `x̂_1..x̂_n` in `N̂_j`.
    pub x_part: DMatrix<f64>,
    /// Row `j`: coefficients of `ŷ_1..ŷ_n` in `N̂_j`.
    pub y_part: DMatrix<f64>,
}

impl NullifierCoefficients {
    /// The `n × 2n` row block `(x_part | y_part)`.
    pub fn rows(&self) -> DMatrix<f64> {
        let n = self.x_part.nrows();
        let mut out = DMatrix::zeros(n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&self.x_part);
        out.view_mut((0, n), (n, n)).copy_from(&self.y_part);
        out
    }
}

/// `x_part = Im U − A·Re U`, `y_part = Re U + A·Im U`.
///
/// For a transform synthesized from `g` the x-part vanishes: nullifiers carry
/// no antisqueezed noise.
pub fn nullifier_coefficients_input_basis(
    t: &BogoliubovTransform,
    g: &ClusterGraph,
) -> Result<NullifierCoefficients> {
    check_dim(g, t.n())?;
    let a = g.weights();
    Ok(NullifierCoefficients {
        x_part: &t.im_u - a * &t.re_u,
        y_part: &t.re_u + a * &t.im_u,
    })
}

/// Nullifier rows `N̂_j = Ŷ_j − Σ_i a_ji X̂_i` over `(X̂_1..X̂_n, Ŷ_1..Ŷ_n)`: the block `(−A | I)`.
pub fn nullifier_rows_cluster_basis(g: &ClusterGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut out = DMatrix::zeros(n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&(-g.weights()));
    out.view_mut((0, n), (n, n)).fill_with_identity();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{path4, weighted6};
    use crate::matfun::{max_norm, random_orthogonal, spd_function};

    #[test]
    fn edgeless_graph_gives_identity() {
        for n in 1..5 {
            let g = ClusterGraph::empty(n).unwrap();
            let t = synthesize_u(&g, &OrthogonalMatrix::identity(n)).unwrap();
            assert_eq!(t.re_u(), &DMatrix::identity(n, n));
            assert_eq!(t.im_u(), &DMatrix::zeros(n, n));
        }
    }

    #[test]
    fn path_transform_passes_invariants() {
        let g = path4();
        let t = synthesize_u(&g, &OrthogonalMatrix::identity(4)).unwrap();
        assert!(t.structural_check(&g).unwrap().max() <= STRUCTURE_TOL);
        // Q = I makes Re U the symmetric polar factor
        assert!(max_dev(t.re_u(), &t.re_u().transpose()) <= 1e-12);
    }

    #[test]
    fn weighted_transform_with_random_q() {
        let g = weighted6();
        let q = random_orthogonal(6, 7);
        let t = synthesize_u(&g, &q).unwrap();
        let report = t.structural_check(&g).unwrap();
        assert!(report.max() <= STRUCTURE_TOL, "{report:?}");
        let s = t.polar_factor();
        assert!(max_dev(&s, &s.transpose()) <= 1e-10);
    }

    #[test]
    fn dimension_mismatch() {
        let err = synthesize_u(&path4(), &OrthogonalMatrix::identity(3)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 4, found: 3 });
        let t = synthesize_u(&path4(), &OrthogonalMatrix::identity(4)).unwrap();
        assert!(nullifier_coefficients_input_basis(&t, &weighted6()).is_err());
    }

    #[test]
    fn input_basis_coefficients_edgeless() {
        let g = ClusterGraph::empty(3).unwrap();
        let t = synthesize_u(&g, &OrthogonalMatrix::identity(3)).unwrap();
        let c = nullifier_coefficients_input_basis(&t, &g).unwrap();
        assert_eq!(c.x_part, DMatrix::zeros(3, 3));
        assert_eq!(c.y_part, DMatrix::identity(3, 3));
    }

    #[test]
    fn input_basis_y_part_is_sqrt_one_plus_a_squared() {
        let g = path4();
        let t = synthesize_u(&g, &OrthogonalMatrix::identity(4)).unwrap();
        let c = nullifier_coefficients_input_basis(&t, &g).unwrap();
        let a = g.weights();
        let v = spd_function(&(a * a), |x| (1.0 + x).sqrt()).unwrap();
        assert!(max_dev(&c.y_part, &v) <= 1e-10);
        assert!(max_norm(&c.x_part) <= 1e-10);
    }

    #[test]
    fn input_basis_y_part_with_random_q() {
        let g = weighted6();
        let q = random_orthogonal(6, 19);
        let t = synthesize_u(&g, &q).unwrap();
        let c = nullifier_coefficients_input_basis(&t, &g).unwrap();
        let a = g.weights();
        let v = spd_function(&(a * a), |x| (1.0 + x).sqrt()).unwrap();
        assert!(max_dev(&c.y_part, &(v * q.as_matrix())) <= 1e-10);
        assert!(max_norm(&c.x_part) <= 1e-10);
    }

    #[test]
    fn cluster_basis_rows() {
        let rows = nullifier_rows_cluster_basis(&path4());
        let r0: Vec<f64> = rows.row(0).iter().copied().collect();
        assert_eq!(r0, vec![0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);

        let rows = nullifier_rows_cluster_basis(&weighted6());
        let r1: Vec<f64> = rows.row(1).iter().copied().collect();
        assert_eq!(
            r1,
            vec![0.5, 0.0, 0.5, -0.5, 0.0, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]
        );

        let rows = nullifier_rows_cluster_basis(&ClusterGraph::empty(3).unwrap());
        assert_eq!(rows.columns(0, 3).into_owned(), DMatrix::zeros(3, 3));
        assert_eq!(rows.columns(3, 3).into_owned(), DMatrix::identity(3, 3));
    }

    #[test]
    fn json_layout() {
        let g = ClusterGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let t = synthesize_u(&g, &OrthogonalMatrix::identity(2)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["q"], serde_json::json!([[1.0, 0.0], [0.0, 1.0]]));
        let re = v["re"][0][0].as_f64().unwrap();
        assert!((re - 0.5_f64.sqrt()).abs() < 1e-15);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
    }
}
