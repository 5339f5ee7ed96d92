//! A small semidefinite-programming layer: affine LMI constraints over
//! scalar and symmetric-matrix decision variables, solved with the Clarabel
//! interior-point backend.
//!
//! Solver output is never trusted blindly by the callers in this crate:
//! every consumer re-checks the returned point with eigenvalue tests in the
//! original problem coordinates (see `informativity` and `bounds`).

use crate::error::{Error, Result};
use crate::linalg::{DMat, SymMatrix};
use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

/// A symmetric-matrix decision variable packed as its upper triangle
/// (column-major, `dim*(dim+1)/2` scalar slots).
#[derive(Debug, Clone, Copy)]
pub struct SymVar {
    /// First scalar slot index.
    pub start: usize,
    /// Matrix dimension.
    pub dim: usize,
}

impl SymVar {
    /// Number of scalar slots.
    pub fn len(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    /// True iff the variable has no entries.
    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    /// Iterates `(variable index, basis matrix)` pairs so that the matrix
    /// value equals the sum of `x[k] * basis_k`.
    pub fn basis(&self) -> Vec<(usize, DMat)> {
        let mut out = Vec::with_capacity(self.len());
        let mut k = self.start;
        for j in 0..self.dim {
            for i in 0..=j {
                let mut e = DMat::zeros(self.dim, self.dim);
                if i == j {
                    e[(i, i)] = 1.0;
                } else {
                    e[(i, j)] = 1.0;
                    e[(j, i)] = 1.0;
                }
                out.push((k, e));
                k += 1;
            }
        }
        out
    }

    /// Extracts the matrix value from a solution vector.
    pub fn value(&self, x: &[f64]) -> SymMatrix {
        let mut m = DMat::zeros(self.dim, self.dim);
        let mut k = self.start;
        for j in 0..self.dim {
            for i in 0..=j {
                m[(i, j)] = x[k];
                m[(j, i)] = x[k];
                k += 1;
            }
        }
        SymMatrix::symmetrize(&m)
    }

    /// `(variable index, coefficient)` pairs of the trace functional.
    pub fn trace_coeffs(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.dim);
        let mut k = self.start;
        for j in 0..self.dim {
            for i in 0..=j {
                if i == j {
                    out.push((k, 1.0));
                }
                k += 1;
            }
        }
        out
    }
}

/// One affine LMI constraint `F0 + sum_k x_{i_k} F_k >= 0` (PSD).
#[derive(Debug, Clone)]
pub struct LmiBlock {
    /// Constraint dimension.
    pub dim: usize,
    /// Constant term.
    pub f0: DMat,
    /// `(variable index, coefficient matrix)` terms.
    pub terms: Vec<(usize, DMat)>,
}

impl LmiBlock {
    /// Creates an empty constraint of the given dimension.
    pub fn new(dim: usize) -> Self {
        Self { dim, f0: DMat::zeros(dim, dim), terms: Vec::new() }
    }

    /// Adds a coefficient matrix for a variable (accumulating).
    pub fn add_term(&mut self, var: usize, coeff: DMat) {
        debug_assert_eq!(coeff.nrows(), self.dim);
        self.terms.push((var, coeff));
    }

    /// Evaluates the constraint matrix at a solution vector.
    pub fn eval(&self, x: &[f64]) -> SymMatrix {
        let mut m = self.f0.clone();
        for (k, f) in &self.terms {
            m += f * x[*k];
        }
        SymMatrix::symmetrize(&m)
    }
}

/// A linear inequality `constant + sum coeff_k x_{i_k} >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearIneq {
    /// Constant offset.
    pub constant: f64,
    /// `(variable index, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
}

/// Solution status and primal point of an SDP solve.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal variables.
    pub x: Vec<f64>,
    /// Backend status string.
    pub status: String,
    /// True when the backend claims (almost) optimality.
    pub claimed_solved: bool,
    /// Objective value reported by the backend.
    pub objective: f64,
}

/// An SDP: minimize a linear objective subject to LMI and linear
/// inequality constraints.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    n_vars: usize,
    objective: Vec<f64>,
    lmis: Vec<LmiBlock>,
    nonneg: Vec<LinearIneq>,
}

impl SdpProblem {
    /// Creates an empty problem.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a scalar decision variable, returning its index.
    pub fn add_scalar_var(&mut self) -> usize {
        self.n_vars += 1;
        self.objective.push(0.0);
        self.n_vars - 1
    }

    /// Adds a symmetric matrix variable of the given dimension.
    pub fn add_sym_var(&mut self, dim: usize) -> SymVar {
        let start = self.n_vars;
        let len = dim * (dim + 1) / 2;
        self.n_vars += len;
        self.objective.extend(std::iter::repeat(0.0).take(len));
        SymVar { start, dim }
    }

    /// Sets the minimization coefficient of one variable.
    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    /// Adds an LMI constraint.
    pub fn add_lmi(&mut self, block: LmiBlock) {
        self.lmis.push(block);
    }

    /// Adds a linear inequality constraint.
    pub fn add_nonneg(&mut self, ineq: LinearIneq) {
        self.nonneg.push(ineq);
    }

    /// Number of declared scalar slots.
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Solves the problem. Backend exceptions and non-optimal statuses are
    /// reported through the solution record, never panicking; callers are
    /// expected to verify the returned point independently.
    pub fn solve(&self) -> Result<SdpSolution> {
        let n = self.n_vars;
        let total_rows: usize =
            self.nonneg.len() + self.lmis.iter().map(|l| svec_len(l.dim)).sum::<usize>();

        // Column-wise assembly of A (rows: nonneg block, then each LMI).
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut b = vec![0.0; total_rows];
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        let mut row0 = 0;

        if !self.nonneg.is_empty() {
            for (i, ineq) in self.nonneg.iter().enumerate() {
                b[row0 + i] = ineq.constant;
                for &(var, coeff) in &ineq.coeffs {
                    cols[var].push((row0 + i, -coeff));
                }
            }
            cones.push(SupportedConeT::NonnegativeConeT(self.nonneg.len()));
            row0 += self.nonneg.len();
        }

        for lmi in &self.lmis {
            let len = svec_len(lmi.dim);
            let f0v = svec(&lmi.f0);
            b[row0..row0 + len].copy_from_slice(&f0v);
            for (var, coeff) in &lmi.terms {
                let cv = svec(coeff);
                for (i, &v) in cv.iter().enumerate() {
                    if v != 0.0 {
                        cols[*var].push((row0 + i, -v));
                    }
                }
            }
            cones.push(SupportedConeT::PSDTriangleConeT(lmi.dim));
            row0 += len;
        }

        // Merge duplicate entries and build CSC.
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        for col in cols.iter_mut() {
            col.sort_by_key(|&(r, _)| r);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for &(r, v) in col.iter() {
                if let Some(last) = merged.last_mut() {
                    if last.0 == r {
                        last.1 += v;
                        continue;
                    }
                }
                merged.push((r, v));
            }
            for (r, v) in merged {
                rowval.push(r);
                nzval.push(v);
            }
            colptr.push(rowval.len());
        }
        let a = CscMatrix::new(total_rows, n, colptr, rowval, nzval);
        let p = CscMatrix::zeros((n, n));
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .tol_gap_abs(1e-11)
            .tol_gap_rel(1e-11)
            .tol_feas(1e-11)
            .static_regularization_constant(1e-12)
            .iterative_refinement_reltol(1e-14)
            .iterative_refinement_abstol(1e-14)
            .max_iter(400)
            .build()
            .map_err(|e| Error::SolverError(format!("settings: {e:?}")))?;

        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            let mut solver = DefaultSolver::new(&p, &self.objective, &a, &b, &cones, settings);
            solver.solve();
            (
                solver.solution.x.clone(),
                format!("{:?}", solver.solution.status),
                matches!(
                    solver.solution.status,
                    SolverStatus::Solved | SolverStatus::AlmostSolved
                ),
                solver.solution.obj_val,
            )
        }));
        match result {
            Ok((x, status, claimed_solved, objective)) => Ok(SdpSolution {
                x,
                status,
                claimed_solved,
                objective,
            }),
            Err(_) => Ok(SdpSolution {
                x: vec![0.0; n],
                status: "BackendPanic".into(),
                claimed_solved: false,
                objective: f64::NAN,
            }),
        }
    }
}

fn svec_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Scaled upper-triangle vectorization (column-major, off-diagonals times
/// sqrt(2)) matching the backend's PSD triangle cone convention.
pub fn svec(m: &DMat) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(svec_len(d));
    let s2 = std::f64::consts::SQRT_2;
    for j in 0..d {
        for i in 0..=j {
            if i == j {
                out.push(m[(i, i)]);
            } else {
                out.push(s2 * 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
    }
    out
}
