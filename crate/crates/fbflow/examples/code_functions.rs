// Usage: cargo run --example code_functions
//
// Any input policy is a mixture of deterministic feedback strategies (code
// functions). Enumerate them, recover the mixing weights, and confirm the
// mixture plays back the policy it came from.

use fbflow::codefn::{
    enumerate_code_functions, good_distribution_from_policy, residual_density_table,
    verify_codefn_information_decomposition, CodeFunction,
};
use fbflow::joint::{build_joint_fxyz, induced_policy, Caps};
use fbflow::kernel::{Kernel, SystemShape};
use fbflow::rng::SplitMix64;
use fbflow::system::sampling;

fn main() {
    let caps = Caps::default();
    let shape = SystemShape::new(2, 2, 2).unwrap();
    let n = 2;

    for horizon in 1..=3 {
        println!(
            "binary, n = {horizon}: {} code-function sequences",
            CodeFunction::sequence_count(horizon, 2, 2).unwrap()
        );
    }

    let mut rng = SplitMix64::new(404);
    let policy = sampling::random_policy(&mut rng, n, shape);
    let dist = good_distribution_from_policy(&policy, &caps).unwrap();
    let functions = enumerate_code_functions(n, 2, 2, &caps).unwrap();
    println!(
        "\nweights of the {} sequences under a random policy:",
        functions.len()
    );
    for (i, f) in functions.iter().enumerate() {
        println!(
            "  f{i}: tables {:?}  weight {:.6}",
            f.tables(),
            dist.prob(i)
        );
    }

    // Push the mixture through a channel and a noisy link, then read the
    // per-step input law back off the joint. It is the policy again.
    let channel = Kernel::bsc_channel(n, 0.1).unwrap();
    let feedback = sampling::random_feedback(&mut rng, n, shape);
    let joint = build_joint_fxyz(&dist, &channel, &feedback, &caps).unwrap();
    let round_trip = induced_policy(&joint)
        .unwrap()
        .max_deviation(&policy)
        .unwrap();
    println!("\nround-trip deviation from the generating policy: {round_trip:.3e}");

    let decomp = verify_codefn_information_decomposition(&joint).unwrap();
    println!("I(F^n;Y^n)       = {:.9}", decomp.mutual_information_bits);
    println!("I(X^n->Y^n||Z^n) = {:.9}", decomp.causal_conditioned_bits);
    println!("I(F^n;Z^n|Y^n)   = {:.9}", decomp.leaked_bits);

    let density = residual_density_table(&joint).unwrap();
    let qs = density.quantiles(&[0.05, 0.5, 0.95]).unwrap();
    println!("\nresidual information density per symbol:");
    for (q, v) in qs {
        println!("  quantile {q:5.2}: {:+.6}", v / n as f64);
    }
}
