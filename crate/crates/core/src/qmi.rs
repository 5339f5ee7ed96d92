//! Quadratic matrix inequality (QMI) solution sets and their
//! transformations.
//!
//! A [`QmiSet`] with defining symmetric matrix `Psi` (partitioned into
//! `Psi11` of size `p`, `Psi12`, and `Psi22` of size `q`) represents
//! `{ Z in R^{p x q} : [I; Z^T]^T Psi [I; Z^T] >= 0 }`.
//!
//! For *regular* sets (`Psi22` negative definite, Schur complement
//! `Psi|Psi22` positive definite) the set is a bounded matrix ellipsoid with
//! nonempty interior. This module provides membership tests, the dual set,
//! Slater checks via inertia, two-sided Petrov-Galerkin reduction, row
//! projection, the analytic center, exact member sampling, and a
//! constructive lift from the reduced set back into the original set.

use crate::error::{Error, Result};
use crate::linalg::{
    block_diag, inertia, is_pos_def, orthonormal_complement, schur_complement, sym_sqrt, DMat,
    SymMatrix,
};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Relative eigenvalue zero-threshold for the Slater inertia test. Tighter
/// than the general-purpose default because the data matrix `N` carries a
/// wide spread of genuinely nonzero eigenvalues.
pub const SLATER_ZERO_TOL: f64 = 1e-12;

/// A QMI solution set `{ Z : [I; Z^T]^T Psi [I; Z^T] >= 0 }`.
#[derive(Debug, Clone)]
pub struct QmiSet {
    psi: SymMatrix,
    row_dim: usize,
    col_dim: usize,
}

/// A pair of full-column-rank projection matrices `(W, V)` used to reduce a
/// QMI set to `{ W^T Z V }`.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    /// Row projector, `p x p_hat`.
    pub w: DMat,
    /// Column projector, `q x q_hat`.
    pub v: DMat,
}

impl ProjectionPair {
    /// Constructs a projection pair, verifying full column rank.
    pub fn new(w: DMat, v: DMat) -> Result<Self> {
        for m in [&w, &v] {
            if m.ncols() > m.nrows() {
                return Err(Error::RankDeficientProjector);
            }
            let sv = m.clone().svd(false, false).singular_values;
            if sv.min() <= 1e-12 * sv.max().max(1.0) {
                return Err(Error::RankDeficientProjector);
            }
        }
        Ok(Self { w, v })
    }

    /// Identity pair of the given dimensions.
    pub fn identity(p: usize, q: usize) -> Self {
        Self { w: DMat::identity(p, p), v: DMat::identity(q, q) }
    }
}

impl QmiSet {
    /// Creates a QMI set from its defining matrix and row dimension `p`
    /// (the column dimension is inferred from `psi`).
    pub fn new(psi: SymMatrix, row_dim: usize) -> Result<Self> {
        let d = psi.dim();
        if row_dim == 0 || row_dim >= d {
            return Err(Error::DimensionMismatch(format!(
                "row dimension {row_dim} out of range for Psi of dimension {d}"
            )));
        }
        Ok(Self { psi, row_dim, col_dim: d - row_dim })
    }

    /// The defining symmetric matrix.
    pub fn psi(&self) -> &SymMatrix {
        &self.psi
    }

    /// Row dimension `p` of the members.
    pub fn row_dim(&self) -> usize {
        self.row_dim
    }

    /// Column dimension `q` of the members.
    pub fn col_dim(&self) -> usize {
        self.col_dim
    }

    /// Block `Psi11` (p x p).
    pub fn psi11(&self) -> DMat {
        self.psi.view((0, 0), (self.row_dim, self.row_dim)).into_owned()
    }

    /// Block `Psi12` (p x q).
    pub fn psi12(&self) -> DMat {
        self.psi
            .view((0, self.row_dim), (self.row_dim, self.col_dim))
            .into_owned()
    }

    /// Block `Psi22` (q x q).
    pub fn psi22(&self) -> DMat {
        self.psi
            .view((self.row_dim, self.row_dim), (self.col_dim, self.col_dim))
            .into_owned()
    }

    /// Scale-aware membership tolerance `1e-8 * (1 + ||Psi||_2)`.
    pub fn membership_tol(&self) -> f64 {
        1e-8 * (1.0 + self.psi.norm2())
    }

    /// The symmetric residual `[I; Z^T]^T Psi [I; Z^T]`; `Z` is a member iff
    /// the residual is positive semidefinite within tolerance.
    pub fn member_residual(&self, z: &DMat) -> Result<SymMatrix> {
        if z.nrows() != self.row_dim || z.ncols() != self.col_dim {
            return Err(Error::DimensionMismatch(format!(
                "member must be {}x{}, got {}x{}",
                self.row_dim,
                self.col_dim,
                z.nrows(),
                z.ncols()
            )));
        }
        let mut stack = DMat::zeros(self.row_dim + self.col_dim, self.row_dim);
        stack
            .view_mut((0, 0), (self.row_dim, self.row_dim))
            .copy_from(&DMat::identity(self.row_dim, self.row_dim));
        stack
            .view_mut((self.row_dim, 0), (self.col_dim, self.row_dim))
            .copy_from(&z.transpose());
        Ok(SymMatrix::symmetrize(
            &(stack.transpose() * self.psi.as_mat() * stack),
        ))
    }

    /// True iff `Z` satisfies the QMI within the scale-aware tolerance.
    pub fn is_member(&self, z: &DMat) -> Result<bool> {
        Ok(self.member_residual(z)?.lambda_min() >= -self.membership_tol())
    }

    /// Regularity test: `Psi22` negative definite and the Schur complement
    /// `Psi|Psi22` positive definite (bounded set with nonempty interior).
    pub fn check_regularity(&self) -> bool {
        let psi22 = SymMatrix::symmetrize(&self.psi22());
        let margin = 1e-12 * (1.0 + self.psi.norm2());
        if psi22.lambda_max() >= -margin {
            return false;
        }
        match schur_complement(&self.psi, self.row_dim) {
            Ok(s) => is_pos_def(&s, margin),
            Err(_) => false,
        }
    }

    /// Generalized Slater condition by inertia: true iff the eigenvalue
    /// signature of `Psi` is `(q, 0, p)` (negatives, zeros, positives).
    pub fn check_slater_by_inertia(&self) -> bool {
        let tol = SLATER_ZERO_TOL * self.psi.norm2();
        let i = inertia(&self.psi, Some(tol));
        i.n_neg == self.col_dim && i.n_zero == 0 && i.n_pos == self.row_dim
    }

    /// The dual QMI set with defining matrix
    /// `[0, -I_q; I_p, 0] Psi^{-1} [0, -I_p; I_q, 0]`, whose members are
    /// exactly the transposes of this set's members. The result has row
    /// dimension `q` and column dimension `p`.
    pub fn dual(&self) -> Result<QmiSet> {
        let (p, q) = (self.row_dim, self.col_dim);
        let tol = SLATER_ZERO_TOL * self.psi.norm2();
        if inertia(&self.psi, Some(tol)).n_zero > 0 {
            return Err(Error::SingularPsi);
        }
        let inv = self
            .psi
            .as_mat()
            .clone()
            .try_inverse()
            .ok_or(Error::SingularPsi)?;
        let mut j1 = DMat::zeros(p + q, p + q);
        j1.view_mut((0, p), (q, q))
            .copy_from(&(-DMat::identity(q, q)));
        j1.view_mut((q, 0), (p, p)).copy_from(&DMat::identity(p, p));
        let mut j2 = DMat::zeros(p + q, p + q);
        j2.view_mut((0, q), (p, p))
            .copy_from(&(-DMat::identity(p, p)));
        j2.view_mut((p, 0), (q, q)).copy_from(&DMat::identity(q, q));
        QmiSet::new(SymMatrix::symmetrize(&(j1 * inv * j2)), q)
    }

    /// Two-sided Petrov-Galerkin reduction: the QMI set whose members are
    /// exactly `{ W^T Z V : Z member }`. Requires regularity.
    pub fn reduce(&self, proj: &ProjectionPair) -> Result<QmiSet> {
        if proj.w.nrows() != self.row_dim || proj.v.nrows() != self.col_dim {
            return Err(Error::DimensionMismatch(
                "projector row counts must match the QMI partition".into(),
            ));
        }
        if !self.check_regularity() {
            return Err(Error::NotRegular);
        }
        let (p_hat, q_hat) = (proj.w.ncols(), proj.v.ncols());
        let s = schur_complement(&self.psi, self.row_dim)?;
        let psi12 = self.psi12();
        let psi22 = self.psi22();
        let psi22_inv = psi22.clone().try_inverse().ok_or(Error::SingularBlock)?;
        let p22iv = &psi22_inv * &proj.v;
        let g = (proj.v.transpose() * &p22iv)
            .try_inverse()
            .ok_or(Error::RankDeficientProjector)?;
        let cross = &psi12 * &p22iv * &g;
        let top = proj.w.transpose()
            * (s.as_mat() + &cross * p22iv.transpose() * psi12.transpose())
            * &proj.w;
        let off = proj.w.transpose() * &cross;
        let mut out = DMat::zeros(p_hat + q_hat, p_hat + q_hat);
        out.view_mut((0, 0), (p_hat, p_hat)).copy_from(&top);
        out.view_mut((0, p_hat), (p_hat, q_hat)).copy_from(&off);
        out.view_mut((p_hat, 0), (q_hat, p_hat))
            .copy_from(&off.transpose());
        out.view_mut((p_hat, p_hat), (q_hat, q_hat)).copy_from(&g);
        QmiSet::new(SymMatrix::symmetrize(&out), p_hat)
    }

    /// Single-sided row projection: replaces `Psi11` by `W^T Psi11 W` and
    /// `Psi12` by `W^T Psi12`, leaving `Psi22` unchanged. With the selector
    /// `W = [I_n; 0]` this builds the controllability-type data matrix from
    /// `N` and the observability-type one from `dual(N)`.
    pub fn project_rows(&self, w: &DMat) -> Result<QmiSet> {
        if w.nrows() != self.row_dim {
            return Err(Error::DimensionMismatch(
                "row projector must have p rows".into(),
            ));
        }
        let p_hat = w.ncols();
        let q = self.col_dim;
        let top = w.transpose() * self.psi11() * w;
        let off = w.transpose() * self.psi12();
        let mut out = DMat::zeros(p_hat + q, p_hat + q);
        out.view_mut((0, 0), (p_hat, p_hat)).copy_from(&top);
        out.view_mut((0, p_hat), (p_hat, q)).copy_from(&off);
        out.view_mut((p_hat, 0), (q, p_hat))
            .copy_from(&off.transpose());
        out.view_mut((p_hat, p_hat), (q, q)).copy_from(&self.psi22());
        QmiSet::new(SymMatrix::symmetrize(&out), p_hat)
    }

    /// The center `-Psi12 Psi22^{-1}` of the matrix ellipsoid; always a
    /// member of a regular set, with residual equal to `Psi|Psi22`.
    pub fn center(&self) -> Result<DMat> {
        if !self.check_regularity() {
            return Err(Error::NotRegular);
        }
        let psi22_inv = self
            .psi22()
            .try_inverse()
            .ok_or(Error::SingularBlock)?;
        Ok(-self.psi12() * psi22_inv)
    }

    /// Samples an exact member `Z = center + (Psi|Psi22)^{1/2} S (-Psi22)^{-1/2}`
    /// with a random contraction `S` (`||S||_2 <= 1`); `boundary` samples on
    /// the ellipsoid boundary (`||S||_2 = 1`).
    pub fn sample_member<R: Rng>(&self, rng: &mut R, boundary: bool) -> Result<DMat> {
        if !self.check_regularity() {
            return Err(Error::NotRegular);
        }
        let (p, q) = (self.row_dim, self.col_dim);
        let s = schur_complement(&self.psi, p)?;
        let s_half = sym_sqrt(&s)?;
        let neg22 = SymMatrix::symmetrize(&(-self.psi22()));
        let neg22_inv_half = neg22.abs_power(-0.5);
        let mut contraction = DMat::from_fn(p, q, |_, _| StandardNormal.sample(rng));
        let nrm = crate::linalg::norm2(&contraction);
        let scale = if boundary { nrm } else { nrm * (1.0 + rng.random::<f64>()) };
        contraction /= scale.max(1e-300);
        Ok(self.center()? + s_half.as_mat() * contraction * neg22_inv_half.as_mat())
    }

    /// Constructive lift: given `reduced = self.reduce(proj)` and a member
    /// `z_hat` of `reduced`, returns a member `Z` of `self` with
    /// `W^T Z V = z_hat` (to `1e-8`).
    ///
    /// The construction lifts the rows against the column-projected set
    /// first and then repeats on the dual side. Each row lift completes the
    /// fixed block with a minimum-norm contraction, which coincides with
    /// choosing the free diagonal block as the full Schur complement bound.
    pub fn lift(&self, reduced: &QmiSet, proj: &ProjectionPair, z_hat: &DMat) -> Result<DMat> {
        if !self.check_regularity() {
            return Err(Error::NotRegular);
        }
        let res = reduced.member_residual(z_hat)?.lambda_min();
        if res < -reduced.membership_tol() {
            return Err(Error::NotAMember(res));
        }
        // Column-projected set Psi_V = reduce(Psi, (I, V)).
        let p = self.row_dim;
        let psi_v = self.reduce(&ProjectionPair {
            w: DMat::identity(p, p),
            v: proj.v.clone(),
        })?;
        // Stage 1: lift the rows so that W^T Z_V = z_hat, Z_V in Psi_V.
        let z_v = lift_rows(&psi_v, &proj.w, z_hat)?;
        // Stage 2: lift the columns through the dual set.
        let dual = self.dual()?;
        let z_dual = lift_rows(&dual, &proj.v, &z_v.transpose())?;
        Ok(z_dual.transpose())
    }
}

/// Row lift (the core of the reverse inclusion): given `z_w` (`r x q`)
/// satisfying the QMI of `set.project_rows(w)`, returns `Z` (`p x q`) with
/// `W^T Z = z_w` satisfying `set`'s QMI.
fn lift_rows(set: &QmiSet, w: &DMat, z_w: &DMat) -> Result<DMat> {
    let (p, q) = (set.row_dim(), set.col_dim());
    let r = w.ncols();
    if w.nrows() != p || z_w.nrows() != r || z_w.ncols() != q {
        return Err(Error::DimensionMismatch("lift_rows operand shapes".into()));
    }
    let psi12 = set.psi12();
    let psi22 = set.psi22();
    let psi22_inv = psi22.clone().try_inverse().ok_or(Error::SingularBlock)?;
    let s = schur_complement(set.psi(), p)?;
    // Shifted member: Z_bar = z_w + W^T Psi12 Psi22^{-1}.
    let z_bar = z_w + w.transpose() * &psi12 * &psi22_inv;
    // Complete an orthonormal basis T = [W, W_tilde].
    let w_tilde = orthonormal_complement(w)?;
    let mut t = DMat::zeros(p, p);
    t.view_mut((0, 0), (p, r)).copy_from(w);
    t.view_mut((0, r), (p, p - r)).copy_from(&w_tilde);
    let t_inv = t.clone().try_inverse().ok_or(Error::LiftDegenerate(
        "completion basis is singular".into(),
    ))?;
    // L = (T^T S T)^{1/2}, split into the W-part and the complement part.
    let b = SymMatrix::symmetrize(&(t.transpose() * s.as_mat() * &t));
    let l = sym_sqrt(&b)?;
    let la = l.view((0, 0), (p, r)).into_owned();
    let lb = l.view((0, r), (p, p - r)).into_owned();
    // X = (-Psi22)^{1/2} Z_bar^T; its Gram is bounded by La^T La.
    let neg22 = SymMatrix::symmetrize(&(-&psi22));
    let neg22_half = sym_sqrt(&neg22)?;
    let x = neg22_half.as_mat() * z_bar.transpose();
    // Minimum-norm solution of C La = X; a contraction up to round-off.
    let gram = la.transpose() * &la;
    let gram_inv = gram
        .try_inverse()
        .ok_or(Error::LiftDegenerate("singular W-side Gram factor".into()))?;
    let c0 = &x * gram_inv * la.transpose();
    let c0_norm = crate::linalg::norm2(&c0);
    if c0_norm > 1.0 + 1e-6 {
        return Err(Error::NotAMember(1.0 - c0_norm));
    }
    // Free block and final assembly.
    let k = &c0 * &lb;
    let neg22_inv_half = neg22.abs_power(-0.5);
    let z_tilde_t = neg22_inv_half.as_mat() * k; // q x (p - r)
    let mut stacked_t = DMat::zeros(q, p);
    stacked_t.view_mut((0, 0), (q, r)).copy_from(&z_bar.transpose());
    stacked_t.view_mut((0, r), (q, p - r)).copy_from(&z_tilde_t);
    let z_t = stacked_t * t_inv - psi22_inv * psi12.transpose();
    Ok(z_t.transpose())
}

/// Convenience: the block projector `blkdiag(a, I_k)`.
pub fn block_with_identity(a: &DMat, k: usize) -> DMat {
    block_diag(a, &DMat::identity(k, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn blkdiag_pm(p: usize, q: usize) -> QmiSet {
        // Psi = blkdiag(I_p, -I_q): the unit-ball QMI {Z : Z Z^T <= I}.
        let psi = block_diag(&DMat::identity(p, p), &(-DMat::identity(q, q)));
        QmiSet::new(SymMatrix::new(psi).unwrap(), p).unwrap()
    }

    fn random_regular<R: Rng>(p: usize, q: usize, rng: &mut R) -> QmiSet {
        let g = DMat::from_fn(q, q, |_, _| StandardNormal.sample(rng));
        let psi22 = -(&g * g.transpose() + DMat::identity(q, q) * 0.5);
        let h = DMat::from_fn(p, p, |_, _| StandardNormal.sample(rng));
        let s = &h * h.transpose() + DMat::identity(p, p) * 0.5;
        let psi12 = DMat::from_fn(p, q, |_, _| StandardNormal.sample(rng));
        let psi22_inv = psi22.clone().try_inverse().unwrap();
        let psi11 = &s + &psi12 * &psi22_inv * psi12.transpose();
        let mut psi = DMat::zeros(p + q, p + q);
        psi.view_mut((0, 0), (p, p)).copy_from(&psi11);
        psi.view_mut((0, p), (p, q)).copy_from(&psi12);
        psi.view_mut((p, 0), (q, p)).copy_from(&psi12.transpose());
        psi.view_mut((p, p), (q, q)).copy_from(&psi22);
        QmiSet::new(SymMatrix::symmetrize(&psi), p).unwrap()
    }

    #[test]
    fn membership_unit_ball() {
        let set = blkdiag_pm(2, 3);
        let z0 = DMat::zeros(2, 3);
        let r = set.member_residual(&z0).unwrap();
        assert!((r.as_mat() - DMat::identity(2, 2)).norm() < 1e-14);
        // ||Z||_2 > 1 is not a member.
        let z = DMat::identity(2, 3) * 2.0;
        assert!(!set.is_member(&z).unwrap());
    }

    #[test]
    fn regularity_and_slater_on_block_diagonals() {
        assert!(blkdiag_pm(2, 3).check_regularity());
        assert!(blkdiag_pm(2, 3).check_slater_by_inertia());
        let bad = QmiSet::new(
            SymMatrix::new(-DMat::identity(5, 5)).unwrap(),
            2,
        )
        .unwrap();
        assert!(!bad.check_regularity());
        assert!(!bad.check_slater_by_inertia());
    }

    #[test]
    fn dual_of_block_diagonal_is_itself() {
        let set = blkdiag_pm(2, 3);
        let d = set.dual().unwrap();
        assert_eq!(d.row_dim(), 3);
        let expect = block_diag(&DMat::identity(3, 3), &(-DMat::identity(2, 2)));
        assert!((d.psi().as_mat() - expect).norm() < 1e-12);
    }

    #[test]
    fn dual_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let set = random_regular(3, 4, &mut rng);
        let dd = set.dual().unwrap().dual().unwrap();
        assert!((dd.psi().as_mat() - set.psi().as_mat()).norm() < 1e-10 * set.psi().norm2());
    }

    #[test]
    fn reduce_identity_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let set = random_regular(3, 4, &mut rng);
        let red = set.reduce(&ProjectionPair::identity(3, 4)).unwrap();
        assert!((red.psi().as_mat() - set.psi().as_mat()).norm() < 1e-12 * set.psi().norm2());
    }

    #[test]
    fn center_is_member_with_schur_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let set = random_regular(3, 4, &mut rng);
        let c = set.center().unwrap();
        let res = set.member_residual(&c).unwrap();
        let s = schur_complement(set.psi(), 3).unwrap();
        assert!((res.as_mat() - s.as_mat()).norm() < 1e-10 * set.psi().norm2());
    }

    #[test]
    fn sampled_members_are_members_and_transpose_in_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let set = random_regular(3, 4, &mut rng);
        let dual = set.dual().unwrap();
        for i in 0..20 {
            let z = set.sample_member(&mut rng, i % 2 == 0).unwrap();
            assert!(set.is_member(&z).unwrap());
            assert!(dual.is_member(&z.transpose()).unwrap());
        }
    }

    #[test]
    fn lift_identity_projection_returns_member_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let set = random_regular(3, 4, &mut rng);
        let proj = ProjectionPair::identity(3, 4);
        let red = set.reduce(&proj).unwrap();
        let z = set.sample_member(&mut rng, false).unwrap();
        let lifted = set.lift(&red, &proj, &z).unwrap();
        assert!((&lifted - &z).norm() < 1e-8 * (1.0 + z.norm()));
    }

    #[test]
    fn lift_random_projections_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for trial in 0..25 {
            let p = 2 + (trial % 4);
            let q = 2 + ((trial / 2) % 4);
            let set = random_regular(p, q, &mut rng);
            let ph = 1 + trial % p;
            let qh = 1 + (trial / 3) % q;
            let w = DMat::from_fn(p, ph, |_, _| StandardNormal.sample(&mut rng));
            let v = DMat::from_fn(q, qh, |_, _| StandardNormal.sample(&mut rng));
            let proj = ProjectionPair::new(w, v).unwrap();
            let red = set.reduce(&proj).unwrap();
            assert!(red.check_regularity());
            let z_hat = red.sample_member(&mut rng, trial % 2 == 0).unwrap();
            let z = set.lift(&red, &proj, &z_hat).unwrap();
            let back = proj.w.transpose() * &z * &proj.v;
            assert!((&back - &z_hat).norm() < 1e-8 * (1.0 + z_hat.norm()));
            let res = set.member_residual(&z).unwrap().lambda_min();
            assert!(res >= -set.membership_tol(), "residual {res}");
        }
    }

    #[test]
    fn lift_rejects_non_member() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let set = random_regular(3, 3, &mut rng);
        let proj = ProjectionPair::identity(3, 3);
        let red = set.reduce(&proj).unwrap();
        // A far-outside point.
        let z = DMat::identity(3, 3) * 1e6;
        assert!(matches!(
            set.lift(&red, &proj, &z),
            Err(Error::NotAMember(_))
        ));
    }
}
