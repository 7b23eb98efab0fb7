// Usage: cargo run --example build_a_system
//
// Define a two-step system as JSON, build the exact joint distribution,
// and read a few marginals back out of it. Kernel tables are listed per
// time step, one row per history, one probability per output symbol. A
// history row index codes the kernel's own input block first and the
// strictly earlier opposite block after it, earliest symbol most
// significant: channel rows at time 2 run over (x1, x2, y1), feedback
// rows over (y1, y2, z1), policy rows over (x1, z1).

use fbflow::joint::Caps;
use fbflow::system::SystemSpec;

const SYSTEM: &str = r#"{
  "n": 2,
  "alphabets": { "X": 2, "Y": 2, "Z": 2 },
  "channel": [
    [[0.9, 0.1], [0.1, 0.9]],
    [[0.9, 0.1], [0.9, 0.1], [0.1, 0.9], [0.1, 0.9],
     [0.9, 0.1], [0.9, 0.1], [0.1, 0.9], [0.1, 0.9]]
  ],
  "feedback": [
    [[0.95, 0.05], [0.05, 0.95]],
    [[0.95, 0.05], [0.95, 0.05], [0.05, 0.95], [0.05, 0.95],
     [0.95, 0.05], [0.95, 0.05], [0.05, 0.95], [0.05, 0.95]]
  ],
  "policy": [
    [[0.5, 0.5]],
    [[0.5, 0.5], [0.9, 0.1], [0.1, 0.9], [0.5, 0.5]]
  ]
}"#;

fn main() {
    let spec = SystemSpec::from_json(SYSTEM).expect("well-formed system");
    let parts = spec.build().expect("kernels agree on shape");
    let joint = parts
        .policy_joint(&Caps::default())
        .expect("fits in the caps");

    let layout = joint.layout();
    let names: Vec<&str> = layout.vars().iter().map(|v| v.name.as_str()).collect();
    println!("variables: {names:?}");
    println!("cells:     {}", layout.cells());

    // Marginal of the first input/output pair.
    let pair = joint.marginal(&["X1", "Y1"]).unwrap();
    println!("\np(x1, y1):");
    for (idx, p) in pair.support_probs() {
        let d = pair.layout().digits_of(idx);
        println!("  x1={} y1={}  {p:.6}", d[0], d[1]);
    }

    // The joint is exact: total mass is 1 up to float rounding.
    let mass: f64 = joint.probs().iter().sum();
    println!("\ntotal mass: {mass:.15}");
}
