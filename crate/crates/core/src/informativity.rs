//! Informativity analysis for generalized Lyapunov balancing: decides
//! whether the noisy data set admits a common pair of generalized
//! Gramians, by solving two LMI feasibility problems over the projected
//! QMI set and its dual.
//!
//! Every point returned by the backend is re-verified with eigenvalue
//! checks in the original (unwhitened) coordinates; a certificate is
//! only issued when the residual matrices are positive definite.

use crate::error::{Error, Result};
use crate::linalg::{block_diag, DMat, SymMatrix};
use crate::qmi::QmiSet;
use crate::sdp::{LinearIneq, LmiBlock, SdpProblem};
use crate::Dims;
use serde_json::json;

/// Cap on `trace(P) + alpha` in the margin-maximization fallback; keeps
/// the feasibility subproblem bounded.
pub const TRACE_CAP: f64 = 1e4;

/// A verified pair of generalized Gramians with their LMI multipliers.
#[derive(Debug, Clone)]
pub struct InformativityCertificate {
    /// Controllability-side Gramian, `P > 0`.
    pub p: SymMatrix,
    /// Observability-side Gramian, `Q > 0`.
    pub q: SymMatrix,
    /// Multiplier of the controllability LMI.
    pub alpha: f64,
    /// Multiplier of the observability LMI.
    pub beta: f64,
    /// Smallest eigenvalue of the controllability LMI residual.
    pub margin_p: f64,
    /// Smallest eigenvalue of the observability LMI residual.
    pub margin_q: f64,
    /// Backend status strings for the two solves.
    pub solver_status: (String, String),
    /// Trace of `P`.
    pub trace_p: f64,
    /// Trace of `Q`.
    pub trace_q: f64,
}

impl InformativityCertificate {
    /// Serializes the certificate to a JSON value.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "P": mat_rows(self.p.as_mat()),
            "Q": mat_rows(self.q.as_mat()),
            "alpha": self.alpha,
            "beta": self.beta,
            "margins": { "P": self.margin_p, "Q": self.margin_q },
            "solver_status": [self.solver_status.0, self.solver_status.1],
            "trace_P": self.trace_p,
            "trace_Q": self.trace_q,
        })
    }
}

/// Row-major nested-vector view of a matrix, for JSON export.
pub fn mat_rows(m: &DMat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// The controllability-side projected set: rows restricted to the state
/// block (`W = [I_n; 0]`).
pub fn controllability_set(n_set: &QmiSet, dims: &Dims) -> Result<QmiSet> {
    let w = selector(dims.n, dims.p);
    n_set.project_rows(&w)
}

/// The observability-side projected set: the dual set with rows
/// restricted to the state block.
pub fn observability_set(n_set: &QmiSet, dims: &Dims) -> Result<QmiSet> {
    let w = selector(dims.n, dims.m);
    n_set.dual()?.project_rows(&w)
}

fn selector(n: usize, extra: usize) -> DMat {
    let mut w = DMat::zeros(n + extra, n);
    for i in 0..n {
        w[(i, i)] = 1.0;
    }
    w
}

/// Outcome of one one-sided LMI solve.
struct OneSided {
    gram: SymMatrix,
    mult: f64,
    margin: f64,
    status: String,
}

/// Solves `blkdiag(P, -P, -I_k) - alpha * M > 0`, `P > 0`, `alpha > 0`
/// for the given projected QMI matrix `M` (dimension `2n + k`).
/// Minimizes `trace(P)` when requested; falls back to maximizing the
/// margin when the trace-minimal point fails verification.
fn solve_one_side(m: &QmiSet, n: usize, k: usize, minimize_trace: bool) -> Result<OneSided> {
    let mmat = m.psi().as_mat().clone();
    let d = 2 * n + k;
    if mmat.nrows() != d {
        return Err(Error::DimensionMismatch("projected QMI dimension".into()));
    }
    // Whitening congruence: solve in coordinates where the data matrix
    // has unit scale, verify in the original coordinates.
    let dw = SymMatrix::symmetrize(&mmat).whitener();
    let mw = dw.as_mat() * &mmat * dw.as_mat();
    let eps_w = 1e-7;

    let attempt = |trace_obj: bool| -> Result<(SymMatrix, f64, String)> {
        let mut prob = SdpProblem::new();
        let pv = prob.add_sym_var(n);
        let alpha = prob.add_scalar_var();
        let mut lmi = LmiBlock::new(d);
        // Constant part: the -I_k block of blkdiag(P, -P, -I_k), whitened,
        // plus the strictness margin.
        let mut s0 = DMat::zeros(d, d);
        s0.view_mut((2 * n, 2 * n), (k, k))
            .copy_from(&(-DMat::identity(k, k)));
        lmi.f0 = dw.as_mat() * s0 * dw.as_mat() - eps_w * DMat::identity(d, d);
        for (var, e) in pv.basis() {
            let mut s = DMat::zeros(d, d);
            s.view_mut((0, 0), (n, n)).copy_from(&e);
            s.view_mut((n, n), (n, n)).copy_from(&(-&e));
            lmi.add_term(var, dw.as_mat() * s * dw.as_mat());
        }
        lmi.add_term(alpha, -&mw);
        let mut tvar = None;
        if !trace_obj {
            let t = prob.add_scalar_var();
            let mut eye = DMat::identity(d, d);
            eye.neg_mut();
            lmi.add_term(t, eye);
            prob.set_objective(t, -1.0);
            // Bound trace(P) + alpha to keep the margin objective finite.
            let mut coeffs = pv.trace_coeffs();
            coeffs.iter_mut().for_each(|c| c.1 = -c.1);
            coeffs.push((alpha, -1.0));
            prob.add_nonneg(LinearIneq {
                constant: TRACE_CAP,
                coeffs,
            });
            tvar = Some(t);
        }
        prob.add_lmi(lmi);
        // P >= eps I, alpha >= eps.
        let mut ppd = LmiBlock::new(n);
        ppd.f0 = -eps_w * DMat::identity(n, n);
        for (var, e) in pv.basis() {
            ppd.add_term(var, e);
        }
        prob.add_lmi(ppd);
        prob.add_nonneg(LinearIneq {
            constant: -eps_w,
            coeffs: vec![(alpha, 1.0)],
        });
        if trace_obj {
            for (var, c) in pv.trace_coeffs() {
                prob.set_objective(var, c);
            }
        }
        let sol = prob.solve()?;
        if !sol.claimed_solved {
            let lower = sol.status.to_lowercase();
            if lower.contains("infeasible") {
                return Err(Error::Infeasible(format!(
                    "LMI reported infeasible ({})",
                    sol.status
                )));
            }
            if let Some(t) = tvar {
                if sol.x[t] <= 0.0 {
                    return Err(Error::SolverError(format!(
                        "backend status {} with nonpositive margin",
                        sol.status
                    )));
                }
            } else {
                return Err(Error::SolverError(format!(
                    "backend status {}",
                    sol.status
                )));
            }
        }
        Ok((pv.value(&sol.x), sol.x[alpha], sol.status))
    };

    let verify = |p: &SymMatrix, alpha: f64| -> f64 {
        let s = block_diag(p.as_mat(), &(-p.as_mat()));
        let s = block_diag(&s, &(-DMat::identity(k, k)));
        let resid = SymMatrix::symmetrize(&(&s - alpha * &mmat));
        resid.lambda_min().min(p.lambda_min())
    };

    let mut last_err: Option<Error> = None;
    if minimize_trace {
        match attempt(true) {
            Ok((p, alpha, status)) => {
                let margin = verify(&p, alpha);
                if margin > 0.0 && alpha > 0.0 {
                    return Ok(OneSided {
                        gram: p,
                        mult: alpha,
                        margin,
                        status,
                    });
                }
                last_err = Some(Error::SolverError(format!(
                    "trace-minimal point failed verification (margin {margin:.3e})"
                )));
            }
            Err(e @ Error::Infeasible(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    // Margin maximization: either requested directly or as a fallback.
    match attempt(false) {
        Ok((p, alpha, status)) => {
            let margin = verify(&p, alpha);
            if margin > 0.0 && alpha > 0.0 {
                Ok(OneSided {
                    gram: p,
                    mult: alpha,
                    margin,
                    status,
                })
            } else {
                Err(Error::Infeasible(format!(
                    "no verifiable LMI solution (margin {margin:.3e}, status {status})"
                )))
            }
        }
        Err(e @ Error::Infeasible(_)) => Err(e),
        Err(e) => Err(last_err.unwrap_or(e)),
    }
}

/// Decides informativity for generalized Lyapunov balancing. Returns a
/// verified certificate `(P, Q, alpha, beta)` on success; an
/// [`Error::Infeasible`] is a valid negative answer (the data are not
/// informative), not a fault.
pub fn check_informativity(
    n_set: &QmiSet,
    dims: &Dims,
    minimize_trace: bool,
) -> Result<InformativityCertificate> {
    if !n_set.check_slater_by_inertia() {
        return Err(Error::Infeasible(
            "Slater condition fails: the data matrix does not have inertia (q, 0, p)".into(),
        ));
    }
    let nc = controllability_set(n_set, dims)?;
    let no = observability_set(n_set, dims)?;
    let side_p = solve_one_side(&nc, dims.n, dims.m, minimize_trace)?;
    let side_q = solve_one_side(&no, dims.n, dims.p, minimize_trace)?;
    let trace_p = side_p.gram.as_mat().trace();
    let trace_q = side_q.gram.as_mat().trace();
    Ok(InformativityCertificate {
        p: side_p.gram,
        q: side_q.gram,
        alpha: side_p.mult,
        beta: side_q.mult,
        margin_p: side_p.margin,
        margin_q: side_q.margin,
        solver_status: (side_p.status, side_q.status),
        trace_p,
        trace_q,
    })
}

/// Strict Loewner dominance: true iff `P - Pref` is positive definite
/// (smallest eigenvalue above `-1e-8` slack and strictly positive
/// largest eigenvalue, so `P = Pref` returns false).
pub fn gramian_dominance(p: &SymMatrix, pref: &SymMatrix) -> bool {
    if p.dim() != pref.dim() {
        return false;
    }
    let diff = SymMatrix::symmetrize(&(p.as_mat() - pref.as_mat()));
    let scale = 1.0 + pref.norm2();
    diff.lambda_min() > -1e-8 * scale && diff.lambda_max() > 1e-8 * scale
}
