// Usage: cargo run --example capacity_bounds
//
// Bracket what a noisy-feedback channel can carry: maximize the causally
// conditioned rate over input policies for the upper bound, subtract the
// link-noise entropy for the lower one, and cross-check the one-step case
// against the alternating-maximization capacity solver.

use fbflow::bounds::{optimize_upper_bound, single_letter_capacity, OptimizerConfig};
use fbflow::joint::Caps;
use fbflow::kernel::{Kernel, NoiseProcess, SystemShape};

fn main() {
    let shape = SystemShape::new(2, 2, 2).unwrap();
    let n = 2;
    let channel = Kernel::bsc_channel(n, 0.1).unwrap();
    let noise = NoiseProcess::binary_flip(n, 0.05).unwrap();
    let feedback = Kernel::additive_feedback(n, shape, &noise).unwrap();

    let cfg = OptimizerConfig {
        grid_resolution: 8,
        ..OptimizerConfig::default()
    };
    let result = optimize_upper_bound(&channel, &feedback, &cfg, &Caps::default()).unwrap();
    println!("two-step BSC(0.1), 5% flip on the return link");
    println!(
        "  upper bound    {:.9} bits/use ({})",
        result.upper_bits_per_use, result.method
    );
    println!("  evaluations    {}", result.evaluations);
    let lower = result.lower.as_ref().unwrap();
    println!(
        "  lower bound    {:.9} bits/use (link noise costs {:.9}/symbol)",
        lower.value_bits_per_use, lower.noise_entropy_bits_per_symbol
    );

    // Feedback cannot lift a memoryless channel's rate, so the upper bound
    // recovers the plain capacity and the argmax policy ignores the link.
    let (capacity, prior) = single_letter_capacity(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
    println!("\nsingle-letter capacity {capacity:.9} at input {prior:?}");
    println!(
        "optimizer - capacity   {:+.3e}",
        result.upper_bits_per_use - capacity
    );

    // A fair-coin link destroys the additive lower bound entirely.
    let fair = NoiseProcess::binary_flip(n, 0.5).unwrap();
    let fair_link = Kernel::additive_feedback(n, shape, &fair).unwrap();
    let fair_result = optimize_upper_bound(&channel, &fair_link, &cfg, &Caps::default()).unwrap();
    let clamped = fair_result.lower.as_ref().unwrap();
    println!(
        "\nfair-coin link: lower bound {:.1} (clamped = {})",
        clamped.value_bits_per_use, clamped.clamped
    );
}
