// Usage: cargo run --example message_identity
//
// What the outputs learn about the message equals the directed information
// minus its message-conditioned remainder. Checked on a random system, then
// on a perfect-feedback one where the remainder vanishes entirely.

use fbflow::feedback::verify_message_information_identity;
use fbflow::joint::{build_joint_wxyz, Caps};
use fbflow::kernel::{Kernel, SystemShape};
use fbflow::rng::SplitMix64;
use fbflow::system::sampling;

fn main() {
    let shape = SystemShape::new(2, 2, 2).unwrap();
    let mut rng = SplitMix64::new(11);
    let n = 3;
    let prior = vec![0.25; 4];

    let channel = sampling::random_channel(&mut rng, n, shape);
    let feedback = sampling::random_feedback(&mut rng, n, shape);
    let encoder = sampling::random_encoder(&mut rng, n, 4, shape);
    let joint = build_joint_wxyz(&encoder, &prior, &channel, &feedback, &Caps::default()).unwrap();

    let (check, r) = verify_message_information_identity(&joint, "W").unwrap();
    println!("noisy link, 4 messages, n = {n}");
    println!("  I(W; Y^n)                = {:.12}", check.lhs_bits);
    println!("  I(X^n->Y^n) - I(..|W)    = {:.12}", check.rhs_bits);
    println!("  residual                 = {:.3e}", check.residual_bits);
    println!("  I(X^n->Y^n)              = {:.12}", r.directed_bits);
    println!("  I(X^n->Y^n | W)          = {:.12}", r.conditioned_bits);
    assert!(check.passes(1e-9));

    // With the outputs echoed back exactly, the code functions pin the
    // inputs once W is known: nothing of the directed information is left.
    let perfect = Kernel::perfect_feedback(n, shape).unwrap();
    let encoder = sampling::random_encoder(&mut rng, n, 4, shape);
    let joint = build_joint_wxyz(&encoder, &prior, &channel, &perfect, &Caps::default()).unwrap();
    let (check, r) = verify_message_information_identity(&joint, "W").unwrap();
    println!("\nperfect link, same channel");
    println!("  I(X^n->Y^n | W)          = {:.3e}", r.conditioned_bits);
    println!(
        "  I(W; Y^n) = I(X^n->Y^n)? residual {:.3e}",
        (check.lhs_bits - r.directed_bits).abs()
    );
    assert!(r.conditioned_bits.abs() < 1e-12);
}
