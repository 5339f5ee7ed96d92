//! Developer probe: prints the oracle baselines used by the test suite.

use gbt_core::balancing::classical_bound;
use gbt_core::bounds::{assemble_error_system, hinf_norm};
use gbt_core::oracle::{builtin_true_system, ordinary_balanced_truncation, ordinary_gramians};

fn main() {
    let sys = builtin_true_system();
    let gram = ordinary_gramians(&sys).unwrap();
    let bal = gbt_core::balancing::balance_from_gramians(&gram.p0, &gram.q0).unwrap();
    println!("hsv = {:?}", bal.hsv);
    let (rom, _) = ordinary_balanced_truncation(&sys, 3).unwrap();
    let err = assemble_error_system(&sys, &rom).unwrap();
    let t0 = std::time::Instant::now();
    let res = hinf_norm(&err, 1e-8).unwrap();
    println!(
        "bt error = {:.16} certified={} elapsed={:?}",
        res.norm,
        res.certified,
        t0.elapsed()
    );
    println!("reference 0.0314081111423348 rel dev {:.3e}",
        (res.norm - 0.0314081111423348f64).abs() / 0.0314081111423348);
    println!("classical bound r=3: {}", classical_bound(&bal, 3).unwrap());
}
