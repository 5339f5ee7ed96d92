//! Model-based ground truth used to validate the data-driven pipeline:
//! discrete Lyapunov solutions, ordinary balanced truncation, and the
//! builtin benchmark system (a cart with a double pendulum, 6 states).

use crate::balancing::{balance_from_gramians, truncate_model};
use crate::data::StateSpaceModel;
use crate::error::{Error, Result};
use crate::linalg::{spectral_radius, DMat, SymMatrix};
use nalgebra::DMatrix;

/// Ordinary (equality) controllability and observability Gramians.
#[derive(Debug, Clone)]
pub struct OrdinaryGramians {
    /// Controllability Gramian: `A P0 A^T - P0 + B B^T = 0`.
    pub p0: SymMatrix,
    /// Observability Gramian: `A^T Q0 A - Q0 + C^T C = 0`.
    pub q0: SymMatrix,
}

/// Solves `A X A^T - X + W = 0` for a Schur-stable `A` via the
/// Kronecker-vectorized linear system, gating on the residual.
pub fn solve_discrete_lyapunov(a: &DMat, wrhs: &SymMatrix) -> Result<SymMatrix> {
    let n = a.nrows();
    if !a.is_square() || wrhs.dim() != n {
        return Err(Error::DimensionMismatch("Lyapunov operands".into()));
    }
    let rho = spectral_radius(a);
    if rho >= 1.0 {
        return Err(Error::Unstable(rho));
    }
    // vec(X) = (I - A (x) A)^{-1} vec(W), Kronecker product column-major.
    let n2 = n * n;
    let kron = a.kronecker(a);
    let lhs = DMatrix::identity(n2, n2) - kron;
    let wvec = nalgebra::DVector::from_iterator(n2, wrhs.as_mat().iter().copied());
    let xvec = lhs
        .lu()
        .solve(&wvec)
        .ok_or_else(|| Error::SolverError("singular Lyapunov operator".into()))?;
    let x = DMat::from_iterator(n, n, xvec.iter().copied());
    let x = SymMatrix::symmetrize(&x);
    let residual = a * x.as_mat() * a.transpose() - x.as_mat() + wrhs.as_mat();
    let scale = x.as_mat().norm() + wrhs.as_mat().norm();
    if residual.norm() >= 1e-10 * scale.max(1.0) {
        return Err(Error::ResidualGate(format!(
            "Lyapunov residual {:.3e} vs scale {:.3e}",
            residual.norm(),
            scale
        )));
    }
    Ok(x)
}

/// Ordinary Gramians of a stable model.
pub fn ordinary_gramians(model: &StateSpaceModel) -> Result<OrdinaryGramians> {
    let p0 = solve_discrete_lyapunov(
        &model.a,
        &SymMatrix::symmetrize(&(&model.b * model.b.transpose())),
    )?;
    let q0 = solve_discrete_lyapunov(
        &model.a.transpose(),
        &SymMatrix::symmetrize(&(model.c.transpose() * &model.c)),
    )?;
    Ok(OrdinaryGramians { p0, q0 })
}

/// Ordinary balanced truncation at order `r`: balances the equality
/// Gramians and truncates. Returns the reduced model and the ordinary
/// Hankel singular values.
pub fn ordinary_balanced_truncation(
    model: &StateSpaceModel,
    r: usize,
) -> Result<(StateSpaceModel, Vec<f64>)> {
    let gram = ordinary_gramians(model)?;
    let bal = balance_from_gramians(&gram.p0, &gram.q0)?;
    let rom = truncate_model(model, &bal, r)?;
    Ok((rom, bal.hsv.clone()))
}

/// The builtin 6-state benchmark system (cart with double pendulum),
/// taken verbatim from its published 4-decimal state-space matrices.
pub fn builtin_true_system() -> StateSpaceModel {
    let a = DMat::from_row_slice(
        6,
        6,
        &[
            0.9299, 0.4160, 0.7447, 0.2291, 0.2452, 0.0592, //
            -0.1869, 0.7430, 0.3318, 0.7617, 1.0859, 0.3560, //
            0.0380, 0.0477, -0.3644, 0.0647, 0.1370, 0.0766, //
            0.0169, 0.0549, -0.0972, -0.3693, -0.8685, 0.0484, //
            0.0250, 0.0285, 0.2741, 0.1393, -0.0474, 0.1615, //
            0.1108, 0.1358, -1.7370, 0.1855, -1.8002, -0.2311,
        ],
    );
    let b = DMat::from_row_slice(6, 1, &[0.0701, 0.1869, -0.0380, -0.0169, -0.0250, -0.1108]);
    let c = DMat::from_row_slice(1, 6, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let d = DMat::zeros(1, 1);
    StateSpaceModel::new(a, b, c, d).expect("builtin system is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn scalar_lyapunov() {
        // A = 0.5, W = 1 -> X = 1 / (1 - 0.25) = 4/3.
        let x = solve_discrete_lyapunov(
            &dmatrix![0.5],
            &SymMatrix::new(dmatrix![1.0]).unwrap(),
        )
        .unwrap();
        assert!((x.as_mat()[(0, 0)] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_a_returns_w() {
        let w = SymMatrix::new(dmatrix![2.0, 0.5; 0.5, 1.0]).unwrap();
        let x = solve_discrete_lyapunov(&DMat::zeros(2, 2), &w).unwrap();
        assert!((x.as_mat() - w.as_mat()).norm() < 1e-14);
    }

    #[test]
    fn unstable_rejected() {
        let res = solve_discrete_lyapunov(
            &dmatrix![1.1],
            &SymMatrix::new(dmatrix![1.0]).unwrap(),
        );
        assert!(matches!(res, Err(Error::Unstable(_))));
    }

    #[test]
    fn builtin_system_shape_and_stability() {
        let sys = builtin_true_system();
        assert_eq!((sys.n(), sys.m(), sys.p()), (6, 1, 1));
        assert_eq!(sys.c[(0, 0)], 1.0);
        assert_eq!(sys.c.view((0, 1), (1, 5)).norm(), 0.0);
        assert_eq!(sys.d[(0, 0)], 0.0);
        assert!(spectral_radius(&sys.a) < 1.0);
    }

    #[test]
    fn full_order_truncation_is_similarity() {
        let sys = builtin_true_system();
        let (rom, hsv) = ordinary_balanced_truncation(&sys, 6).unwrap();
        assert_eq!(hsv.len(), 6);
        // Same eigenvalues.
        let mut e1: Vec<f64> = sys.a.complex_eigenvalues().iter().map(|l| l.norm()).collect();
        let mut e2: Vec<f64> = rom.a.complex_eigenvalues().iter().map(|l| l.norm()).collect();
        e1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in e1.iter().zip(e2.iter()) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
