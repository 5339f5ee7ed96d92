//! Randomized property tests for the linear-algebra and QMI layers.

use gbt_core::linalg::{inertia, schur_complement, sym_sqrt, SymMatrix};
use gbt_core::qmi::{ProjectionPair, QmiSet};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn rand_mat(rng: &mut ChaCha12Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn rand_spd(rng: &mut ChaCha12Rng, n: usize) -> DMatrix<f64> {
    let g = rand_mat(rng, n, n);
    &g * g.transpose() + DMatrix::identity(n, n) * 0.1
}

/// Random regular QMI set built from its Schur decomposition.
fn rand_regular_set(rng: &mut ChaCha12Rng, p: usize, q: usize) -> QmiSet {
    let s = rand_spd(rng, p);
    let e = rand_spd(rng, q);
    let psi12 = rand_mat(rng, p, q);
    let e_inv = e.clone().try_inverse().unwrap();
    let psi11 = &s + &psi12 * &e_inv * psi12.transpose();
    let mut psi = DMatrix::zeros(p + q, p + q);
    psi.view_mut((0, 0), (p, p)).copy_from(&psi11);
    psi.view_mut((0, p), (p, q)).copy_from(&psi12);
    psi.view_mut((p, 0), (q, p)).copy_from(&psi12.transpose());
    psi.view_mut((p, p), (q, q)).copy_from(&(-e));
    QmiSet::new(SymMatrix::symmetrize(&psi), p).unwrap()
}

/// Matrix with orthonormal columns (thin Q factor of a random matrix).
fn rand_orthonormal(rng: &mut ChaCha12Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    loop {
        let m = rand_mat(rng, rows, cols);
        let qr = m.qr();
        let q = qr.q();
        if qr.r().determinant().abs() > 1e-8 {
            return q.columns(0, cols).into_owned();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inertia_is_congruence_invariant(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let m = SymMatrix::symmetrize(&rand_mat(&mut rng, n, n));
        let t = rand_mat(&mut rng, n, n) + DMatrix::identity(n, n) * 2.0;
        prop_assume!(t.clone().lu().determinant().abs() > 1e-6);
        let cong = SymMatrix::symmetrize(&(t.transpose() * m.as_mat() * &t));
        let i1 = inertia(&m, None);
        let i2 = inertia(&cong, None);
        prop_assert_eq!((i1.n_pos, i1.n_neg), (i2.n_pos, i2.n_neg));
    }

    #[test]
    fn haynsworth_inertia_additivity(seed in any::<u64>(), p in 1usize..5, q in 1usize..5) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let d = p + q;
        let m = SymMatrix::symmetrize(&rand_mat(&mut rng, d, d));
        let m22 = SymMatrix::symmetrize(&m.as_mat().view((p, p), (q, q)).into_owned());
        // Skip instances where the trailing block is near-singular.
        prop_assume!(m22.eigenvalues().iter().all(|l| l.abs() > 1e-4));
        let s = schur_complement(&m, p).unwrap();
        let i_m = inertia(&m, None);
        let i_22 = inertia(&m22, None);
        let i_s = inertia(&s, None);
        prop_assert_eq!(i_m.n_pos, i_22.n_pos + i_s.n_pos);
        prop_assert_eq!(i_m.n_neg, i_22.n_neg + i_s.n_neg);
    }

    #[test]
    fn sym_sqrt_squares_back(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let m = SymMatrix::symmetrize(&rand_spd(&mut rng, n));
        let root = sym_sqrt(&m).unwrap();
        let back = root.as_mat() * root.as_mat();
        let dev = (back - m.as_mat()).amax() / m.norm2();
        prop_assert!(dev < 1e-10, "squared root deviates by {dev}");
    }

    #[test]
    fn dual_is_an_involution(seed in any::<u64>(), p in 1usize..6, q in 1usize..6) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let set = rand_regular_set(&mut rng, p, q);
        let dd = set.dual().unwrap().dual().unwrap();
        let dev = (dd.psi().as_mat() - set.psi().as_mat()).amax() / set.psi().norm2();
        prop_assert!(dev < 1e-8, "dual o dual deviates by {dev}");
    }

    #[test]
    fn identity_reduction_is_identity(seed in any::<u64>(), p in 1usize..6, q in 1usize..6) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let set = rand_regular_set(&mut rng, p, q);
        let red = set.reduce(&ProjectionPair::identity(p, q)).unwrap();
        let dev = (red.psi().as_mat() - set.psi().as_mat()).amax() / set.psi().norm2();
        prop_assert!(dev < 1e-10, "identity reduction deviates by {dev}");
    }

    #[test]
    fn sampled_members_satisfy_the_qmi(seed in any::<u64>(), p in 1usize..6, q in 1usize..6) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let set = rand_regular_set(&mut rng, p, q);
        for boundary in [false, true] {
            let z = set.sample_member(&mut rng, boundary).unwrap();
            prop_assert!(set.is_member(&z).unwrap());
        }
    }

    #[test]
    fn project_then_lift_roundtrip(
        seed in any::<u64>(),
        p in 2usize..6,
        q in 2usize..6,
        rw in 1usize..4,
        rv in 1usize..4,
    ) {
        let rw = rw.min(p - 1);
        let rv = rv.min(q - 1);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let set = rand_regular_set(&mut rng, p, q);
        let w = rand_orthonormal(&mut rng, p, rw);
        let v = rand_orthonormal(&mut rng, q, rv);
        let proj = ProjectionPair::new(w, v).unwrap();
        let red = set.reduce(&proj).unwrap();

        // Projection direction: members of the big set project into the
        // reduced set.
        let z = set.sample_member(&mut rng, false).unwrap();
        let z_hat = proj.w.transpose() * &z * &proj.v;
        let lam = red.member_residual(&z_hat).unwrap().lambda_min();
        prop_assert!(
            lam >= -1e-8 * (1.0 + red.psi().norm2()),
            "projected member violates reduced QMI: {lam}"
        );

        // Lift direction: reduced members lift back with the projection
        // relation preserved.
        let z_hat = red.sample_member(&mut rng, false).unwrap();
        let z = set.lift(&red, &proj, &z_hat).unwrap();
        prop_assert!(set.is_member(&z).unwrap());
        let recon = proj.w.transpose() * &z * &proj.v;
        let dev = (recon - &z_hat).amax();
        prop_assert!(dev < 1e-8 * (1.0 + z_hat.amax()), "W' Z V deviates by {dev}");
    }
}
