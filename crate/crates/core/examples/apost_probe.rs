//! Developer probe: empirically brackets the a posteriori bound by
//! sampling full-order members against the center reduced model.

use gbt_core::balancing::{balance_from_gramians, build_reduction_setup};
use gbt_core::bounds::{
    aposteriori_bound, apriori_bound, assemble_error_system, hinf_norm, BoundDims,
};
use gbt_core::data::{build_n, draw_noise, noise_model_for, benchmark_input, simulate};
use gbt_core::informativity::check_informativity;
use gbt_core::oracle::builtin_true_system;
use gbt_core::{Dims, StateSpaceModel};
use rand::SeedableRng;

fn main() {
    let sigma: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.002);
    let seed: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let sys = builtin_true_system();
    let (n, m, p, l, r) = (6usize, 1usize, 1usize, 200usize, 3usize);
    let dims = Dims::new(n, m, p);
    let u = benchmark_input(l);
    let draw = draw_noise(n, p, l, sigma, 1.35, seed).unwrap();
    let traj = simulate(&sys, &u, &draw.x0, &draw.w, &draw.z).unwrap();
    let (noise, _) = noise_model_for(n, p, l, sigma, 1.35, &draw.w, &draw.z).unwrap();
    let n_set = build_n(&traj, &noise).unwrap();
    let cert = check_informativity(&n_set, &dims, true).unwrap();
    let bal = balance_from_gramians(&cert.p, &cert.q).unwrap();
    let setup = build_reduction_setup(&n_set, &bal, r, &dims).unwrap();
    let rom = StateSpaceModel::from_stack(&setup.nred.center().unwrap(), r).unwrap();
    let bdims = BoundDims { n, r, m, p };
    let apriori = apriori_bound(&n_set, &setup.nred, &bdims).unwrap();
    let apost = aposteriori_bound(&n_set, &rom, &bdims).unwrap();
    println!("sigma={sigma} seed={seed} gamma={} gamma0={}", apriori.gamma, apost.gamma0);

    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
    let mut worst_fixed = 0.0f64; // sup over Sigma of ||Sigma - center||
    let mut worst_pair = 0.0f64; // sup over Sigma, Sigma_hat samples
    for k in 0..200 {
        let z = n_set.sample_member(&mut rng, true).unwrap();
        let full = StateSpaceModel::from_stack(&z, n).unwrap();
        let e0 = hinf_norm(&assemble_error_system(&full, &rom).unwrap(), 1e-6)
            .unwrap()
            .norm;
        worst_fixed = worst_fixed.max(e0);
        if k < 100 {
            let zh = setup.nred.sample_member(&mut rng, true).unwrap();
            let red = StateSpaceModel::from_stack(&zh, r).unwrap();
            let e = hinf_norm(&assemble_error_system(&full, &red).unwrap(), 1e-6)
                .unwrap()
                .norm;
            worst_pair = worst_pair.max(e);
        }
    }
    println!("sampled sup ||Sigma - center||   = {worst_fixed}  (should be < gamma0 {})", apost.gamma0);
    println!("sampled sup ||Sigma - Sigma_hat|| = {worst_pair}  (should be < gamma {})", apriori.gamma);
}
