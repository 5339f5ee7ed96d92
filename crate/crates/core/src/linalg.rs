//! Deterministic dense symmetric linear algebra primitives shared by all
//! modules: inertia computation, Schur complements, positive-definiteness
//! tests, symmetric matrix square roots, and spectral radii.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Dense real matrix alias used throughout the crate.
pub type DMat = DMatrix<f64>;

/// Relative symmetry tolerance: inputs whose asymmetric part exceeds
/// `SYM_TOL * ||M||_F` are rejected; below it they are symmetrized.
pub const SYM_TOL: f64 = 1e-10;

/// Default relative eigenvalue zero-threshold for [`inertia`].
pub const INERTIA_ZERO_TOL: f64 = 1e-9;

/// A validated symmetric matrix. Construction symmetrizes round-off
/// asymmetry and rejects genuinely non-symmetric inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    mat: DMat,
}

impl SymMatrix {
    /// Wraps `m`, symmetrizing `(M + M^T)/2` when the asymmetric part is
    /// within `SYM_TOL * ||M||_F`, and rejecting it otherwise.
    ///
    /// ```
    /// # use gbt_core::linalg::SymMatrix;
    /// # use nalgebra::dmatrix;
    /// let s = SymMatrix::new(dmatrix![2.0, 1.0; 1.0, 1.0]).unwrap();
    /// assert_eq!(s.dim(), 2);
    /// assert!(SymMatrix::new(dmatrix![0.0, 1.0; -1.0, 0.0]).is_err());
    /// ```
    pub fn new(m: DMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::NotSymmetric);
        }
        let asym = (&m - m.transpose()) * 0.5;
        if asym.norm() > SYM_TOL * m.norm().max(1.0) {
            return Err(Error::NotSymmetric);
        }
        Ok(Self::symmetrize(&m))
    }

    /// Wraps `(M + M^T)/2` without a symmetry check; used when asymmetry is
    /// known round-off (e.g. products of the form `G G^T`).
    pub fn symmetrize(m: &DMat) -> Self {
        let mat = (m + m.transpose()) * 0.5;
        Self { mat }
    }

    /// Dimension of the matrix.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Borrow the underlying matrix.
    pub fn as_mat(&self) -> &DMat {
        &self.mat
    }

    /// Consume into the underlying matrix.
    pub fn into_mat(self) -> DMat {
        self.mat
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> DVector<f64> {
        let mut ev: Vec<f64> = self
            .mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        DVector::from_vec(ev)
    }

    /// Smallest eigenvalue.
    pub fn lambda_min(&self) -> f64 {
        self.mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest eigenvalue.
    pub fn lambda_max(&self) -> f64 {
        self.mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Spectral norm (largest absolute eigenvalue).
    pub fn norm2(&self) -> f64 {
        self.mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0, |acc, &l| acc.max(l.abs()))
    }

    /// `|M|^s` via eigendecomposition: `V diag(|lambda|^s) V^T`.
    /// Absolute eigenvalues below `1e-300` are clamped to avoid infinities.
    pub fn abs_power(&self, s: f64) -> SymMatrix {
        let eig = self.mat.clone().symmetric_eigen();
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.abs().max(1e-300).powf(s)));
        SymMatrix::symmetrize(&(&eig.eigenvectors * d * eig.eigenvectors.transpose()))
    }

    /// The whitening congruence factor `|M|^{-1/2}` used to rescale badly
    /// conditioned LMI blocks; `D M D` has eigenvalues of unit magnitude.
    pub fn whitener(&self) -> SymMatrix {
        self.abs_power(-0.5)
    }

    /// The matrix sign `V diag(sign lambda) V^T`.
    pub fn sign(&self) -> SymMatrix {
        let eig = self.mat.clone().symmetric_eigen();
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.signum()));
        SymMatrix::symmetrize(&(&eig.eigenvectors * d * eig.eigenvectors.transpose()))
    }
}

impl std::ops::Deref for SymMatrix {
    type Target = DMat;

    fn deref(&self) -> &DMat {
        &self.mat
    }
}

/// Counts of negative, zero, and positive eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    /// Number of eigenvalues below `-zero_tol`.
    pub n_neg: usize,
    /// Number of eigenvalues within `[-zero_tol, zero_tol]`.
    pub n_zero: usize,
    /// Number of eigenvalues above `zero_tol`.
    pub n_pos: usize,
}

/// Computes the inertia of `m` with the given absolute zero threshold; pass
/// `None` for the scale-aware default `1e-9 * ||M||_2`.
///
/// ```
/// # use gbt_core::linalg::{inertia, SymMatrix, Inertia};
/// # use nalgebra::DMatrix;
/// let m = SymMatrix::new(DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0, 0.0])).unwrap();
/// assert_eq!(inertia(&m, Some(1e-10)), Inertia { n_neg: 1, n_zero: 1, n_pos: 1 });
/// ```
pub fn inertia(m: &SymMatrix, zero_tol: Option<f64>) -> Inertia {
    let tol = zero_tol.unwrap_or_else(|| INERTIA_ZERO_TOL * m.norm2());
    let mut out = Inertia { n_neg: 0, n_zero: 0, n_pos: 0 };
    for &l in m.eigenvalues().iter() {
        if l < -tol {
            out.n_neg += 1;
        } else if l > tol {
            out.n_pos += 1;
        } else {
            out.n_zero += 1;
        }
    }
    out
}

/// Schur complement `M11 - M12 M22^{-1} M12^T` with respect to the
/// lower-right block starting at `split` (so `M11` is `split x split`).
/// The inner solve uses an SVD factorization of `M22`; a numerically
/// singular `M22` is rejected.
///
/// ```
/// # use gbt_core::linalg::{schur_complement, SymMatrix};
/// # use nalgebra::dmatrix;
/// let m = SymMatrix::new(dmatrix![2.0, 1.0; 1.0, 1.0]).unwrap();
/// let s = schur_complement(&m, 1).unwrap();
/// assert!((s.as_mat()[(0, 0)] - 1.0).abs() < 1e-14);
/// ```
pub fn schur_complement(m: &SymMatrix, split: usize) -> Result<SymMatrix> {
    let d = m.dim();
    if split == 0 || split >= d {
        return Err(Error::DimensionMismatch(format!(
            "split index {split} out of range for dimension {d}"
        )));
    }
    let q = d - split;
    let m11 = m.view((0, 0), (split, split)).into_owned();
    let m12 = m.view((0, split), (split, q)).into_owned();
    let m22 = m.view((split, split), (q, q)).into_owned();
    let svd = m22.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin / smax < 1e-13 {
        return Err(Error::SingularBlock);
    }
    let solved = svd
        .solve(&m12.transpose(), 0.0)
        .map_err(|_| Error::SingularBlock)?;
    Ok(SymMatrix::symmetrize(&(m11 - m12 * solved)))
}

/// True iff the smallest eigenvalue of `m` exceeds `margin`.
pub fn is_pos_def(m: &SymMatrix, margin: f64) -> bool {
    m.lambda_min() > margin
}

/// Symmetric PSD square root: returns `S` with `S = S^T >= 0` and
/// `S * S = M` to relative tolerance `1e-10`. Indefinite input is rejected.
///
/// ```
/// # use gbt_core::linalg::{sym_sqrt, SymMatrix};
/// # use nalgebra::DMatrix;
/// let m = SymMatrix::new(DMatrix::from_diagonal(&nalgebra::dvector![4.0, 9.0])).unwrap();
/// let s = sym_sqrt(&m).unwrap();
/// assert!((s.as_mat()[(0, 0)] - 2.0).abs() < 1e-12);
/// assert!((s.as_mat()[(1, 1)] - 3.0).abs() < 1e-12);
/// ```
pub fn sym_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    let scale = m.norm2();
    let lmin = m.lambda_min();
    if lmin < -1e-8 * (1.0 + scale) {
        return Err(Error::NotPsd(lmin));
    }
    let eig = m.as_mat().clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    Ok(SymMatrix::symmetrize(
        &(&eig.eigenvectors * d * eig.eigenvectors.transpose()),
    ))
}

/// Largest modulus of the eigenvalues of a general square matrix.
///
/// ```
/// # use gbt_core::linalg::spectral_radius;
/// # use nalgebra::dmatrix;
/// assert!((spectral_radius(&dmatrix![0.5, 0.0; 0.0, -0.9]) - 0.9).abs() < 1e-12);
/// assert!(spectral_radius(&dmatrix![0.0, 1.0; 0.0, 0.0]) < 1e-12);
/// ```
pub fn spectral_radius(a: &DMat) -> f64 {
    assert!(a.is_square(), "spectral radius requires a square matrix");
    a.complex_eigenvalues()
        .iter()
        .fold(0.0, |acc, l| acc.max(l.norm()))
}

/// Spectral norm (largest singular value) of a general matrix.
pub fn norm2(a: &DMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

/// Orthonormal basis of the orthogonal complement of `range(w)` for a full
/// column rank `w` (p x r, r <= p), returned as a `p x (p-r)` matrix.
/// Built deterministically by modified Gram-Schmidt over `[w | I]`.
pub fn orthonormal_complement(w: &DMat) -> Result<DMat> {
    let (p, r) = (w.nrows(), w.ncols());
    if r > p {
        return Err(Error::DimensionMismatch(format!(
            "complement of a {p}x{r} matrix with r > p"
        )));
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(p);
    let candidates: Vec<DVector<f64>> = (0..r)
        .map(|j| w.column(j).into_owned())
        .chain((0..p).map(|j| DVector::from_fn(p, |i, _| if i == j { 1.0 } else { 0.0 })))
        .collect();
    for (idx, cand) in candidates.into_iter().enumerate() {
        let mut v = cand;
        // Two rounds of Gram-Schmidt for numerical orthogonality.
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let nv = v.norm();
        if nv > 1e-10 {
            basis.push(v / nv);
        } else if idx < r {
            return Err(Error::RankDeficientProjector);
        }
        if basis.len() == p {
            break;
        }
    }
    if basis.len() != p {
        return Err(Error::RankDeficientProjector);
    }
    let mut out = DMat::zeros(p, p - r);
    for (j, b) in basis[r..].iter().enumerate() {
        out.set_column(j, b);
    }
    Ok(out)
}

/// Block-diagonal concatenation of two matrices.
pub fn block_diag(a: &DMat, b: &DMat) -> DMat {
    let mut out = DMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn diag(v: &[f64]) -> SymMatrix {
        SymMatrix::new(DMatrix::from_diagonal(&DVector::from_row_slice(v))).unwrap()
    }

    #[test]
    fn inertia_diagonal_cases() {
        let m = diag(&[1.0, -1.0, 0.0]);
        assert_eq!(
            inertia(&m, Some(1e-10)),
            Inertia { n_neg: 1, n_zero: 1, n_pos: 1 }
        );
        let id = diag(&[1.0, 1.0, 1.0]);
        assert_eq!(
            inertia(&id, None),
            Inertia { n_neg: 0, n_zero: 0, n_pos: 3 }
        );
    }

    #[test]
    fn schur_hand_computed() {
        let m = SymMatrix::new(dmatrix![2.0, 1.0; 1.0, 1.0]).unwrap();
        let s = schur_complement(&m, 1).unwrap();
        assert!((s.as_mat()[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schur_block_diagonal_returns_top_block() {
        let a = dmatrix![3.0, 0.5; 0.5, 2.0];
        let b = dmatrix![4.0, 1.0; 1.0, 5.0];
        let m = SymMatrix::new(block_diag(&a, &b)).unwrap();
        let s = schur_complement(&m, 2).unwrap();
        assert!((s.as_mat() - &a).norm() < 1e-14);
    }

    #[test]
    fn schur_singular_block_rejected() {
        let m = diag(&[1.0, 0.0]);
        assert!(matches!(schur_complement(&m, 1), Err(Error::SingularBlock)));
    }

    #[test]
    fn pos_def_checks() {
        assert!(is_pos_def(&diag(&[1.0, 1.0]), 0.0));
        assert!(!is_pos_def(&diag(&[0.0, 0.0]), 0.0));
    }

    #[test]
    fn sym_sqrt_diag_and_identity() {
        let s = sym_sqrt(&diag(&[4.0, 9.0])).unwrap();
        assert!((s.as_mat() - DMatrix::from_diagonal(&nalgebra::dvector![2.0, 3.0])).norm() < 1e-12);
        let i = sym_sqrt(&diag(&[1.0, 1.0, 1.0])).unwrap();
        assert!((i.as_mat() - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!(matches!(sym_sqrt(&diag(&[1.0, -1.0])), Err(Error::NotPsd(_))));
    }

    #[test]
    fn spectral_radius_cases() {
        assert!((spectral_radius(&dmatrix![0.5, 0.0; 0.0, -0.9]) - 0.9).abs() < 1e-12);
        assert!(spectral_radius(&dmatrix![0.0, 1.0; 0.0, 0.0]) < 1e-12);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal_to_w() {
        let w = dmatrix![1.0, 0.0; 1.0, 1.0; 0.0, 2.0];
        let c = orthonormal_complement(&w).unwrap();
        assert_eq!((c.nrows(), c.ncols()), (3, 1));
        assert!((c.transpose() * &c - DMatrix::identity(1, 1)).norm() < 1e-10);
        assert!((w.transpose() * &c).norm() < 1e-10);
    }

    #[test]
    fn whitener_normalizes_spectrum() {
        let m = diag(&[1e6, -1e-4, 3.0]);
        let d = m.whitener();
        let w = SymMatrix::symmetrize(&(d.as_mat() * m.as_mat() * d.as_mat()));
        for &l in w.eigenvalues().iter() {
            assert!((l.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(SymMatrix::new(dmatrix![0.0, 1.0; -1.0, 0.0]).is_err());
    }
}
