//! Exact information-flow analysis for finite-alphabet channels with noisy
//! feedback.
//!
//! A system here is a forward channel `p(y_i | x^i, y^{i-1})`, a feedback
//! link `p(z_i | y^i, z^{i-1})` reporting the outputs back to the input
//! side, and either a randomized input policy `p(x_i | x^{i-1}, z^{i-1})`
//! or a deterministic message encoder (one code-function sequence per
//! message). Everything is finite and every probability is enumerated, so
//! the directed-information measures, the identities tying them together,
//! and the capacity bound searches are exact up to floating point; nothing
//! is sampled except where a module says so.
//!
//! The crate is organized around one object: the joint distribution of a
//! full transmission, laid out time-interleaved per step. [`joint`] builds
//! it from kernels, [`measures`] evaluates entropies and the directed
//! information family on it, [`feedback`] classifies links and certifies
//! the exact identities, [`codefn`] works on the code-function ensemble
//! view of a policy, [`bounds`] searches policies for the per-symbol
//! capacity bounds, and [`bcec`] simulates the codeword-erasure signaling
//! scheme. [`cli`] wires it all into the `fbflow` binary.
//!
//! The `examples/` directory is the guided tour: each file is a runnable
//! walk through one capability, starting from `build_a_system`.

pub mod alphabet;
pub mod bcec;
pub mod bounds;
pub mod cli;
pub mod codefn;
pub mod error;
pub mod feedback;
pub mod joint;
pub mod kernel;
pub mod measures;
pub mod report;
pub mod rng;
pub mod system;

pub use error::{Error, Result};
pub use joint::{Caps, JointTable, Layout};
pub use kernel::{Kernel, KernelRole, NoiseProcess, SystemShape};
pub use report::InfoReport;
pub use system::{SystemParts, SystemSpec};
