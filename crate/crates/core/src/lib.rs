//! Data-driven model order reduction of discrete-time LTI systems from noisy
//! input/state/output data.
//!
//! The pipeline characterizes every system consistent with measured data as a
//! quadratic matrix inequality (QMI), certifies common generalized Gramians
//! via linear matrix inequalities, computes a balancing transformation and a
//! set of reduced-order models by projecting the QMI, and certifies a priori
//! and a posteriori H-infinity error bounds via semidefinite programming.
//!
//! Module overview:
//! - [`linalg`]: dense symmetric primitives (inertia, Schur complements,
//!   matrix square roots, spectral radius).
//! - [`qmi`]: QMI solution sets — membership, duals, Slater checks,
//!   Petrov-Galerkin reduction, and constructive lifting.
//! - [`data`]: trajectory simulation, noise validation, and assembly of the
//!   data matrix `N`.
//! - [`sdp`]: a small LMI/SDP problem builder over the Clarabel backend with
//!   eigenvalue-verified solutions.
//! - [`informativity`]: LMI certificates for common generalized Gramians.
//! - [`balancing`]: square-root balancing, Hankel singular values,
//!   truncation, and data-reduction setup.
//! - [`bounds`]: uniform (a priori) and model-specific (a posteriori)
//!   H-infinity error bounds, plus a bounded-real-lemma norm computation.
//! - [`oracle`]: model-based ground truth (Lyapunov solves, ordinary
//!   balanced truncation, the builtin benchmark system).

// Link the system BLAS/LAPACK used by the SDP backend.
extern crate openblas_src;

pub mod balancing;
pub mod bounds;
pub mod data;
pub mod error;
pub mod informativity;
pub mod linalg;
pub mod oracle;
pub mod qmi;
pub mod sdp;

pub use balancing::{BalancingResult, ReductionSetup};
pub use bounds::{AposterioriBound, AprioriBound, HinfResult};
pub use data::{NoiseModel, StateSpaceModel, TrajectoryData};
pub use error::{Error, Result};
pub use informativity::InformativityCertificate;
pub use linalg::{Inertia, SymMatrix};
pub use qmi::{ProjectionPair, QmiSet};

/// Problem dimensions shared across the pipeline: state, input, and output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    /// State dimension n.
    pub n: usize,
    /// Input dimension m.
    pub m: usize,
    /// Output dimension p.
    pub p: usize,
}

impl Dims {
    /// Convenience constructor.
    pub fn new(n: usize, m: usize, p: usize) -> Self {
        Self { n, m, p }
    }
}
