// Usage: cargo run --example classify_link
//
// Is the feedback noisy? Equivalently: can an encoder that knows its own
// inputs and everything the link returned always reconstruct the outputs?
// The verdict is exact, with a concrete ambiguity witness when it fails.

use fbflow::feedback::classify_feedback_noisy;
use fbflow::kernel::{Kernel, NoiseProcess, SystemShape};

fn main() {
    let shape = SystemShape::new(2, 2, 2).unwrap();
    let n = 2;
    let channel = Kernel::bsc_channel(n, 0.1).unwrap();

    let perfect = Kernel::perfect_feedback(n, shape).unwrap();
    let verdict = classify_feedback_noisy(&channel, &perfect).unwrap();
    println!("perfect link: noisy = {}", verdict.noisy);

    let noise = NoiseProcess::binary_flip(n, 0.05).unwrap();
    let flipped = Kernel::additive_feedback(n, shape, &noise).unwrap();
    let verdict = classify_feedback_noisy(&channel, &flipped).unwrap();
    println!("5% flip link: noisy = {}", verdict.noisy);
    let w = verdict.witness.unwrap();
    println!(
        "  witness at time {}: inputs {:?}, link returned {:?},",
        w.time, w.x_history, w.z_history
    );
    println!(
        "  but the outputs could be {:?} or {:?}",
        w.y_first, w.y_second
    );

    // A silent link on a deterministic channel is still clean: the encoder
    // can reconstruct y from x without being told anything.
    let ident = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let wire = Kernel::memoryless_channel(n, shape, &ident).unwrap();
    let silent = Kernel::new(
        fbflow::kernel::KernelRole::Feedback,
        shape,
        vec![vec![vec![1.0, 0.0]; 2], vec![vec![1.0, 0.0]; 8]],
    )
    .unwrap();
    let verdict = classify_feedback_noisy(&wire, &silent).unwrap();
    println!("silent link, noiseless wire: noisy = {}", verdict.noisy);
}
