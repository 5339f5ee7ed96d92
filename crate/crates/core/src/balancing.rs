//! Common balancing of a pair of Gramians, generalized Hankel singular
//! values with multiplicity grouping, truncation, and assembly of the
//! reduced-dimension QMI set via block projectors.
//!
//! The balancing transformation `T` satisfies `T P Tᵀ = T⁻ᵀ Q T⁻¹ = Σ_H`
//! with `Σ_H` diagonal and positive. It is computed by the square-root
//! algorithm for numerical stability, with a deterministic sign
//! convention so repeated runs produce identical output.

use crate::data::StateSpaceModel;
use crate::error::{Error, Result};
use crate::linalg::{DMat, SymMatrix};
use crate::qmi::{block_with_identity, ProjectionPair, QmiSet};
use crate::Dims;
use serde::Serialize;

/// Relative gap below which consecutive singular values are grouped
/// into one multiplicity: `(σᵢ − σᵢ₊₁)/σ₁ < MULTIPLICITY_GAP`.
pub const MULTIPLICITY_GAP: f64 = 1e-8;

/// Balancing transformation and generalized Hankel singular values.
#[derive(Debug, Clone, Serialize)]
pub struct BalancingResult {
    /// Balancing transformation, `n × n` nonsingular.
    pub t: DMat,
    /// Inverse of `t`.
    pub tinv: DMat,
    /// Singular values in descending order, length `n`.
    pub hsv: Vec<f64>,
    /// Multiplicity of each distinct singular value group; sums to `n`.
    pub multiplicities: Vec<usize>,
    /// Number of distinct singular value groups.
    pub kappa: usize,
}

impl BalancingResult {
    /// State dimension.
    pub fn n(&self) -> usize {
        self.hsv.len()
    }

    /// Admissible truncation orders: cumulative multiplicity sums
    /// `0, m₁, m₁+m₂, …, n`.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = vec![0];
        let mut acc = 0;
        for &mi in &self.multiplicities {
            acc += mi;
            out.push(acc);
        }
        out
    }

    /// Checks that `r` sits at a multiplicity boundary; on failure
    /// reports the nearest admissible orders below and above.
    pub fn check_boundary(&self, r: usize) -> Result<()> {
        let bounds = self.boundaries();
        if bounds.contains(&r) {
            return Ok(());
        }
        let lower = *bounds.iter().filter(|&&b| b < r).max().unwrap_or(&0);
        let upper = *bounds
            .iter()
            .filter(|&&b| b > r)
            .min()
            .unwrap_or(&self.n());
        Err(Error::MultiplicitySplit { r, lower, upper })
    }
}

/// Reduced-order projection data: the order, the block projectors, and
/// the reduced QMI set.
#[derive(Debug, Clone)]
pub struct ReductionSetup {
    /// Reduced order.
    pub r: usize,
    /// Block projectors `(Ŵ, V̂)` with `ŴᵀV̂ = I`.
    pub proj: ProjectionPair,
    /// The reduced-dimension QMI set.
    pub nred: QmiSet,
}

/// Balances a pair of positive definite Gramians by the square-root
/// algorithm: factor `P = L_P L_Pᵀ`, `Q = L_Q L_Qᵀ`, take the SVD
/// `L_Qᵀ L_P = U S Vᵀ`, and set `T = S^{−1/2} Uᵀ L_Qᵀ`. The singular
/// values `diag(S)` are the generalized Hankel singular values.
pub fn balance_from_gramians(p: &SymMatrix, q: &SymMatrix) -> Result<BalancingResult> {
    let n = p.dim();
    if q.dim() != n {
        return Err(Error::DimensionMismatch("Gramian dimensions differ".into()));
    }
    let lp = p
        .as_mat()
        .clone()
        .cholesky()
        .ok_or(Error::NotPd(p.lambda_min()))?
        .l();
    let lq = q
        .as_mat()
        .clone()
        .cholesky()
        .ok_or(Error::NotPd(q.lambda_min()))?
        .l();
    let prod = lq.transpose() * &lp;
    let svd = prod.svd(true, true);
    let mut u = svd.u.ok_or_else(|| Error::SolverError("SVD failed".into()))?;
    let mut vt = svd
        .v_t
        .ok_or_else(|| Error::SolverError("SVD failed".into()))?;
    let s = svd.singular_values;
    // Deterministic signs: make the first nonzero entry of each right
    // singular vector positive, flipping the matching left vector too.
    for j in 0..n {
        let mut flip = false;
        for i in 0..n {
            let v = vt[(j, i)];
            if v.abs() > 1e-12 {
                flip = v < 0.0;
                break;
            }
        }
        if flip {
            for i in 0..n {
                vt[(j, i)] = -vt[(j, i)];
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
    let smin = s.min();
    if smin <= 0.0 {
        return Err(Error::NotPd(smin));
    }
    let s_inv_half = DMat::from_diagonal(&s.map(|x| x.powf(-0.5)));
    let t = s_inv_half * u.transpose() * lq.transpose();
    let tinv = t
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::SolverError("singular balancing transform".into()))?;

    let hsv: Vec<f64> = s.iter().copied().collect();
    let mut multiplicities = Vec::new();
    let sigma1 = hsv[0];
    let mut count = 1;
    for i in 1..n {
        if (hsv[i - 1] - hsv[i]) / sigma1 < MULTIPLICITY_GAP {
            count += 1;
        } else {
            multiplicities.push(count);
            count = 1;
        }
    }
    multiplicities.push(count);
    let kappa = multiplicities.len();
    Ok(BalancingResult {
        t,
        tinv,
        hsv,
        multiplicities,
        kappa,
    })
}

/// Truncates a model in balanced coordinates at an admissible order:
/// returns `(ŴᵀAV̂, ŴᵀB, CV̂, D)` with `Ŵ = TᵀΠ`, `V̂ = T⁻¹Π`.
pub fn truncate_model(
    model: &StateSpaceModel,
    bal: &BalancingResult,
    r: usize,
) -> Result<StateSpaceModel> {
    let n = bal.n();
    if model.n() != n {
        return Err(Error::DimensionMismatch(
            "model order does not match balancing".into(),
        ));
    }
    bal.check_boundary(r)?;
    let w_hat = bal.t.transpose().columns(0, r).into_owned();
    let v_hat = bal.tinv.columns(0, r).into_owned();
    let a = w_hat.transpose() * &model.a * &v_hat;
    let b = w_hat.transpose() * &model.b;
    let c = &model.c * &v_hat;
    StateSpaceModel::new(a, b, c, model.d.clone())
}

/// Builds the block projectors `Ŵ = blkdiag(TᵀΠ, I_p)`,
/// `V̂ = blkdiag(T⁻¹Π, I_m)` and the reduced QMI set `N_{V,W}` by
/// applying [`QmiSet::reduce`].
pub fn build_reduction_setup(
    n_set: &QmiSet,
    bal: &BalancingResult,
    r: usize,
    dims: &Dims,
) -> Result<ReductionSetup> {
    let n = bal.n();
    if n_set.row_dim() != n + dims.p || n_set.col_dim() != n + dims.m {
        return Err(Error::DimensionMismatch(
            "QMI set dimensions do not match system dimensions".into(),
        ));
    }
    bal.check_boundary(r)?;
    let w_hat = block_with_identity(&bal.t.transpose().columns(0, r).into_owned(), dims.p);
    let v_hat = block_with_identity(&bal.tinv.columns(0, r).into_owned(), dims.m);
    let proj = ProjectionPair::new(w_hat, v_hat)?;
    let nred = n_set.reduce(&proj)?;
    Ok(ReductionSetup { r, proj, nred })
}

/// Twice the sum of the neglected singular values (with multiplicity):
/// the classical balanced-truncation error bound.
pub fn classical_bound(bal: &BalancingResult, r: usize) -> Result<f64> {
    bal.check_boundary(r)?;
    Ok(2.0 * bal.hsv[r..].iter().sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn diag_sym(vals: &[f64]) -> SymMatrix {
        SymMatrix::new(DMat::from_diagonal(&nalgebra::DVector::from_row_slice(
            vals,
        )))
        .unwrap()
    }

    #[test]
    fn identity_gramians() {
        let bal = balance_from_gramians(&diag_sym(&[1.0, 1.0]), &diag_sym(&[1.0, 1.0])).unwrap();
        assert_eq!(bal.kappa, 1);
        assert_eq!(bal.multiplicities, vec![2]);
        for s in &bal.hsv {
            assert!((s - 1.0).abs() < 1e-12);
        }
        // T orthogonal.
        let tt = &bal.t * bal.t.transpose();
        assert!((tt - DMat::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn hand_checked_diagonal_pair() {
        // P = diag(4, 1), Q = diag(1, 1/4) -> sigma = sqrt(eig(PQ)) = (2, 1/2).
        let bal = balance_from_gramians(&diag_sym(&[4.0, 1.0]), &diag_sym(&[1.0, 0.25])).unwrap();
        assert!((bal.hsv[0] - 2.0).abs() < 1e-12);
        assert!((bal.hsv[1] - 0.5).abs() < 1e-12);
        // T diagonal up to sign.
        assert!(bal.t[(0, 1)].abs() < 1e-12 && bal.t[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn defining_property() {
        let p = SymMatrix::new(dmatrix![3.0, 0.5, 0.1; 0.5, 2.0, 0.3; 0.1, 0.3, 1.0]).unwrap();
        let q = SymMatrix::new(dmatrix![1.5, -0.2, 0.0; -0.2, 2.5, 0.4; 0.0, 0.4, 0.8]).unwrap();
        let bal = balance_from_gramians(&p, &q).unwrap();
        let sig = DMat::from_diagonal(&nalgebra::DVector::from_vec(bal.hsv.clone()));
        let tp = &bal.t * p.as_mat() * bal.t.transpose();
        let tq = bal.tinv.transpose() * q.as_mat() * &bal.tinv;
        let scale = sig.norm();
        assert!((tp - &sig).norm() < 1e-8 * scale);
        assert!((tq - &sig).norm() < 1e-8 * scale);
        // Determinism.
        let bal2 = balance_from_gramians(&p, &q).unwrap();
        assert_eq!(bal.t, bal2.t);
    }

    #[test]
    fn not_pd_rejected() {
        let res = balance_from_gramians(&diag_sym(&[1.0, -1.0]), &diag_sym(&[1.0, 1.0]));
        assert!(matches!(res, Err(Error::NotPd(_))));
    }

    #[test]
    fn split_refused_with_boundaries() {
        let bal = balance_from_gramians(&diag_sym(&[1.0, 1.0, 0.25]), &diag_sym(&[1.0, 1.0, 0.25]))
            .unwrap();
        assert_eq!(bal.multiplicities, vec![2, 1]);
        match bal.check_boundary(1) {
            Err(Error::MultiplicitySplit { r, lower, upper }) => {
                assert_eq!((r, lower, upper), (1, 0, 2));
            }
            other => panic!("expected MultiplicitySplit, got {other:?}"),
        }
        assert!(bal.check_boundary(2).is_ok());
    }

    #[test]
    fn classical_bound_properties() {
        let bal =
            balance_from_gramians(&diag_sym(&[4.0, 1.0, 0.04]), &diag_sym(&[4.0, 1.0, 0.04]))
                .unwrap();
        assert_eq!(classical_bound(&bal, 3).unwrap(), 0.0);
        let b1 = classical_bound(&bal, 1).unwrap();
        let b2 = classical_bound(&bal, 2).unwrap();
        assert!(b1 > b2 && b2 > 0.0);
        assert!((b2 - 2.0 * 0.04).abs() < 1e-12);
    }

    #[test]
    fn projector_biorthogonality() {
        let p = SymMatrix::new(dmatrix![3.0, 0.5; 0.5, 2.0]).unwrap();
        let q = SymMatrix::new(dmatrix![1.5, -0.2; -0.2, 2.5]).unwrap();
        let bal = balance_from_gramians(&p, &q).unwrap();
        let w = bal.t.transpose().columns(0, 1).into_owned();
        let v = bal.tinv.columns(0, 1).into_owned();
        let prod = w.transpose() * v;
        assert!((prod - DMat::identity(1, 1)).norm() < 1e-10);
    }
}
