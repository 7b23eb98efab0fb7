// Usage: cargo run --example flow_decomposition
//
// When the feedback is the output plus additive noise, the directed
// information splits exactly into what the outputs carry about the message,
// what they carry about the link noise, and an entangled remainder.

use fbflow::codefn::{CodeFunction, MessageEncoder};
use fbflow::feedback::decompose_flows;
use fbflow::joint::{build_joint_wxyvz, Caps};
use fbflow::kernel::{Kernel, NoiseProcess};

fn main() {
    let n = 3;
    let channel = Kernel::bsc_channel(n, 0.15).unwrap();
    let noise = NoiseProcess::binary_flip(n, 0.1).unwrap();

    // Message 0 echoes the feedback from time 2 on; message 1 repeats 1.
    // The echo drags link noise back through the channel, which is what
    // makes the noise and mixed shares nonzero.
    let echo = CodeFunction::new(2, 2, vec![vec![0], vec![0, 1], vec![0, 1, 0, 1]]).unwrap();
    let ones = CodeFunction::constant(2, 2, &[1, 1, 1]).unwrap();
    let encoder = MessageEncoder::new(vec![echo, ones]).unwrap();

    let joint =
        build_joint_wxyvz(&encoder, &[0.5, 0.5], &channel, &noise, &Caps::default()).unwrap();
    let flows = decompose_flows(&joint, "W").unwrap();

    println!("I(X^n -> Y^n)        = {:.9}", flows.total_bits);
    println!("  message I(W;Y^n)       {:.9}", flows.message_bits);
    println!("  noise   I(V^n-1;Y^n)   {:.9}", flows.noise_bits);
    println!("  mixed   I(W;V^n-1|Y^n) {:.9}", flows.mixed_bits);
    println!("  unaccounted            {:.3e}", flows.residual_bits);
    assert!(flows.residual_bits < 1e-9);

    let share = flows.message_bits / flows.total_bits;
    println!(
        "\n{:.1}% of the directed information is about the message",
        100.0 * share
    );
}
