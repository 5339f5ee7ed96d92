//! Developer probe: empirically validates the a priori bound gamma by
//! sampling system pairs from the data set and its reduction.

use gbt_core::balancing::{balance_from_gramians, build_reduction_setup};
use gbt_core::bounds::{apriori_bound, assemble_error_system, hinf_norm, BoundDims};
use gbt_core::data::{build_n, draw_noise, noise_model_for, benchmark_input, simulate};
use gbt_core::informativity::check_informativity;
use gbt_core::oracle::builtin_true_system;
use gbt_core::{Dims, StateSpaceModel};

fn main() {
    let sigma: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.002);
    let sys = builtin_true_system();
    let (n, m, p, l, r) = (6usize, 1usize, 1usize, 200usize, 3usize);
    let dims = Dims::new(n, m, p);
    let u = benchmark_input(l);
    let draw = draw_noise(n, p, l, sigma, 1.35, 0).unwrap();
    let traj = simulate(&sys, &u, &draw.x0, &draw.w, &draw.z).unwrap();
    let (noise, _) = noise_model_for(n, p, l, sigma, 1.35, &draw.w, &draw.z).unwrap();
    let n_set = build_n(&traj, &noise).unwrap();
    let cert = check_informativity(&n_set, &dims, true).unwrap();
    let bal = balance_from_gramians(&cert.p, &cert.q).unwrap();
    let setup = build_reduction_setup(&n_set, &bal, r, &dims).unwrap();
    let bdims = BoundDims { n, r, m, p };
    let bound = apriori_bound(&n_set, &setup.nred, &bdims).unwrap();
    println!("sigma={sigma} gamma={}", bound.gamma);

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1234);
    let mut worst = 0.0f64;
    for k in 0..25 {
        let z_full = n_set.sample_member(&mut rng, k % 2 == 0).unwrap();
        let z_red = setup.nred.sample_member(&mut rng, k % 2 == 1).unwrap();
        let full = StateSpaceModel::from_stack(&z_full, n).unwrap();
        let red = StateSpaceModel::from_stack(&z_red, r).unwrap();
        let err = assemble_error_system(&full, &red).unwrap();
        let norm = hinf_norm(&err, 1e-6).unwrap().norm;
        worst = worst.max(norm);
        if norm >= bound.gamma {
            println!("VIOLATION pair {k}: error {norm} >= gamma {}", bound.gamma);
        }
    }
    println!("worst sampled error = {worst} (gamma = {})", bound.gamma);
}
