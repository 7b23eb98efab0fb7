//! Feedback-link classification and the exact identities tying message
//! information, residual directed information and feedback flows together.
//!
//! The checks here recompute both sides of each identity from the joint by
//! unrelated routes and report the residual; nothing is assumed to hold.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::joint::JointTable;
use crate::kernel::{Kernel, KernelRole};
use crate::measures::{
    conditional_directed_information, conditional_entropy, delayed_directed_information,
    directed_information, mutual_information, residual_directed_information,
    ResidualDirectedInformation,
};

/// Flows below this are treated as zero when classifying encoders.
pub const FLOW_TOL: f64 = 1e-9;

/// Concrete evidence that the feedback link loses information: one input
/// and feedback history compatible with two different output histories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackWitness {
    /// One-based time of the earliest ambiguity.
    pub time: usize,
    pub x_history: Vec<usize>,
    pub z_history: Vec<usize>,
    pub y_first: Vec<usize>,
    pub y_second: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackClassification {
    /// True when some reachable `(x^i, z^i)` fails to pin down `y^i`.
    pub noisy: bool,
    pub witness: Option<FeedbackWitness>,
}

fn decode_fixed(code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0usize; len];
    let mut c = code;
    for slot in (0..len).rev() {
        digits[slot] = c % base;
        c /= base;
    }
    digits
}

/// Decide whether the feedback link is noisy for this channel: whether an
/// encoder that knows its own inputs and the fed-back symbols can always
/// reconstruct the output sequence.
///
/// The support of `(x^i, y^i, z^i)` under an arbitrary input process equals
/// the union of its supports under all fixed input sequences, because the
/// channel and the link read the inputs but not how they were chosen. So
/// probing every codeword in `X^n` is exhaustive, and the verdict is exact
/// rather than sampled.
pub fn classify_feedback_noisy(
    channel: &Kernel,
    feedback: &Kernel,
) -> Result<FeedbackClassification> {
    if channel.role() != KernelRole::Channel || feedback.role() != KernelRole::Feedback {
        return Err(Error::InvalidParameter(
            "classification takes a channel and a feedback kernel".into(),
        ));
    }
    if channel.shape() != feedback.shape() || channel.horizon() != feedback.horizon() {
        return Err(Error::DimensionMismatch(
            "channel and feedback link disagree on shape or horizon".into(),
        ));
    }
    let n = channel.horizon();
    let shape = channel.shape();
    // (time, x^i code, z^i code) -> y^i code first seen there.
    let mut seen: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut witness: Option<FeedbackWitness> = None;

    struct Walk<'a> {
        channel: &'a Kernel,
        feedback: &'a Kernel,
        codeword: &'a [usize],
        n: usize,
        sy: usize,
        sz: usize,
        seen: &'a mut HashMap<(usize, usize, usize), usize>,
        witness: &'a mut Option<FeedbackWitness>,
    }
    fn step(w: &mut Walk, t: usize, xc: usize, yc: usize, zc: usize) {
        if t == w.n || w.witness.is_some() {
            return;
        }
        let sx = w.channel.shape().x;
        let xc2 = xc * sx + w.codeword[t];
        let ch = w.channel.history_code(t, xc2, yc);
        for y in 0..w.sy {
            if w.channel.prob(t, ch, y) == 0.0 {
                continue;
            }
            let yc2 = yc * w.sy + y;
            let fh = w.feedback.history_code(t, yc2, zc);
            for z in 0..w.sz {
                if w.feedback.prob(t, fh, z) == 0.0 {
                    continue;
                }
                let zc2 = zc * w.sz + z;
                let key = (t + 1, xc2, zc2);
                match w.seen.get(&key) {
                    None => {
                        w.seen.insert(key, yc2);
                    }
                    Some(&other) if other != yc2 => {
                        *w.witness = Some(FeedbackWitness {
                            time: t + 1,
                            x_history: decode_fixed(xc2, sx, t + 1),
                            z_history: decode_fixed(zc2, w.sz, t + 1),
                            y_first: decode_fixed(other, w.sy, t + 1),
                            y_second: decode_fixed(yc2, w.sy, t + 1),
                        });
                        return;
                    }
                    Some(_) => {}
                }
                step(w, t + 1, xc2, yc2, zc2);
                if w.witness.is_some() {
                    return;
                }
            }
        }
    }

    let codewords = shape.x.pow(n as u32);
    'probe: for cw in 0..codewords {
        let codeword = decode_fixed(cw, shape.x, n);
        let mut walk = Walk {
            channel,
            feedback,
            codeword: &codeword,
            n,
            sy: shape.y,
            sz: shape.z,
            seen: &mut seen,
            witness: &mut witness,
        };
        step(&mut walk, 0, 0, 0, 0);
        if witness.is_some() {
            break 'probe;
        }
    }
    Ok(FeedbackClassification {
        noisy: witness.is_some(),
        witness,
    })
}

/// Running averages of a per-step information series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalitySeries {
    /// Step terms, index `i - 1` holding the time-`i` term.
    pub per_step_bits: Vec<f64>,
    /// Prefix means `(1/m) sum_{i<=m}`.
    pub running_bits: Vec<f64>,
    /// Full-horizon mean, the last running value.
    pub value_bits: f64,
}

fn series_from_terms(per_step_bits: Vec<f64>) -> TypicalitySeries {
    let mut running = Vec::with_capacity(per_step_bits.len());
    let mut acc = 0.0f64;
    for (i, &term) in per_step_bits.iter().enumerate() {
        acc += term;
        running.push(acc / (i + 1) as f64);
    }
    let value = running.last().copied().unwrap_or(0.0);
    TypicalitySeries {
        per_step_bits,
        running_bits: running,
        value_bits: value,
    }
}

/// Growth rate of the encoder's residual uncertainty about the outputs:
/// terms `H(Z^{i-1} | Y^{i-1})` averaged over the horizon. Zero exactly
/// when the fed-back symbols are a function of the outputs they report on.
pub fn feedback_typicality(joint: &JointTable) -> Result<TypicalitySeries> {
    let layout = joint.layout();
    let n = layout.horizon("Y");
    if n == 0 {
        return Err(Error::UnknownVariable("Y1".into()));
    }
    let mut terms = Vec::with_capacity(n);
    for i in 1..=n {
        let z = layout.time_group("Z", i - 1)?;
        let y = layout.time_group("Y", i - 1)?;
        terms.push(if z.is_empty() {
            0.0
        } else {
            conditional_entropy(joint, &z, &y)?
        });
    }
    Ok(series_from_terms(terms))
}

/// How strongly the realized input process leans on the feedback link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderClassification {
    /// `(1/n) sum_i I(Z^{i-1}; Y_i | Y^{i-1})`: the feedback-to-output flow.
    pub closed_loop_value_bits: f64,
    pub per_step_bits: Vec<f64>,
    /// For additive links carrying a `V` series: `(1/n) I(V^{n-1}; Y^n)`,
    /// the same flow through the noise variables.
    pub noise_flow_bits: Option<f64>,
    /// Disagreement between the two flow computations when both exist.
    pub equivalence_residual_bits: Option<f64>,
    /// True when the flow exceeds `FLOW_TOL`.
    pub uses_feedback: bool,
}

/// Classify the encoder behind a joint by the feedback-to-output flow.
/// Open-loop inputs make every term vanish identically.
pub fn encoder_typicality(joint: &JointTable) -> Result<EncoderClassification> {
    let layout = joint.layout();
    let n = layout.horizon("Y");
    if n == 0 {
        return Err(Error::UnknownVariable("Y1".into()));
    }
    let mut terms = Vec::with_capacity(n);
    for i in 1..=n {
        let z = layout.time_group("Z", i - 1)?;
        let y_i = vec![layout.index_of(&format!("Y{i}"))?];
        let y_past = layout.time_group("Y", i - 1)?;
        terms.push(if z.is_empty() {
            0.0
        } else {
            mutual_information(joint, &z, &y_i, &y_past)?
        });
    }
    let total: f64 = terms.iter().sum();
    let value = total / n as f64;
    let (noise_flow, residual) =
        if layout.horizon("V") >= n.saturating_sub(1) && n > 1 && layout.position("V1").is_some() {
            let v = layout.time_group("V", n - 1)?;
            let y = layout.time_group("Y", n)?;
            let flow = mutual_information(joint, &v, &y, &[])? / n as f64;
            (Some(flow), Some((value - flow).abs()))
        } else if layout.position("V1").is_some() {
            (Some(0.0), Some(value.abs()))
        } else {
            (None, None)
        };
    Ok(EncoderClassification {
        closed_loop_value_bits: value,
        per_step_bits: terms,
        noise_flow_bits: noise_flow,
        equivalence_residual_bits: residual,
        uses_feedback: value > FLOW_TOL,
    })
}

/// Two sides of one identity, each computed independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    /// The identity in formula form, e.g.
    /// `I(W;Y^n) = I(X^n->Y^n) - I(X^n->Y^n|W)`.
    pub identity: String,
    pub lhs_bits: f64,
    pub rhs_bits: f64,
    pub residual_bits: f64,
}

impl IdentityCheck {
    fn new(name: &str, identity: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_owned(),
            identity: identity.to_owned(),
            lhs_bits: lhs,
            rhs_bits: rhs,
            residual_bits: (lhs - rhs).abs(),
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residual_bits <= tol
    }
}

/// Check that the information the outputs carry about the message equals the
/// part of the directed information that survives conditioning on it:
/// `I(W;Y^n) = I(X^n->Y^n) - I(X^n->Y^n|W)`.
pub fn verify_message_information_identity(
    joint: &JointTable,
    message_var: &str,
) -> Result<(IdentityCheck, ResidualDirectedInformation)> {
    let layout = joint.layout();
    let w = layout.index_of(message_var)?;
    let n = layout.horizon("Y");
    let y = layout.time_group("Y", n)?;
    let lhs = mutual_information(joint, &[w], &y, &[])?;
    let r = residual_directed_information(joint, "X", "Y", message_var)?;
    let check = IdentityCheck::new(
        "message_information_identity",
        "I(W;Y^n) = I(X^n->Y^n) - I(X^n->Y^n|W)",
        lhs,
        r.value_bits,
    );
    Ok((check, r))
}

/// The ordering `0 <= I(W;Y^n) <= I(X^n->Y^n) <= I(X^n;Y^n)` with the
/// largest violation found (zero when the chain holds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingChain {
    pub residual_bits: f64,
    pub directed_bits: f64,
    pub mutual_bits: f64,
    pub max_violation_bits: f64,
}

pub fn ordering_chain(joint: &JointTable, message_var: &str) -> Result<OrderingChain> {
    let r = residual_directed_information(joint, "X", "Y", message_var)?;
    let layout = joint.layout();
    let n = layout.horizon("Y");
    let x = layout.time_group("X", n)?;
    let y = layout.time_group("Y", n)?;
    let mi = mutual_information(joint, &x, &y, &[])?;
    let violation = (-r.value_bits)
        .max(r.value_bits - r.directed_bits)
        .max(r.directed_bits - mi)
        .max(0.0);
    Ok(OrderingChain {
        residual_bits: r.value_bits,
        directed_bits: r.directed_bits,
        mutual_bits: mi,
        max_violation_bits: violation,
    })
}

/// Additive split of the input-output directed information into message,
/// feedback-noise and entangled parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowDecomposition {
    /// `I(X^n -> Y^n)`.
    pub total_bits: f64,
    /// `I(W; Y^n)`.
    pub message_bits: f64,
    /// `I(V^{n-1}; Y^n)`.
    pub noise_bits: f64,
    /// `I(W; V^{n-1} | Y^n)`.
    pub mixed_bits: f64,
    /// `|total - (message + noise + mixed)|`.
    pub residual_bits: f64,
}

/// Decompose the directed information of an additive-feedback message
/// system. The joint must carry `W`, the series, and the noise series `V`.
pub fn decompose_flows(joint: &JointTable, message_var: &str) -> Result<FlowDecomposition> {
    let layout = joint.layout();
    let w = layout.index_of(message_var)?;
    let n = layout.horizon("Y");
    if layout.horizon("V") + 1 < n {
        return Err(Error::HorizonMismatch(
            "flow decomposition needs the feedback-noise series V".into(),
        ));
    }
    let y = layout.time_group("Y", n)?;
    let v = layout.time_group("V", n - 1)?;
    let total = directed_information(joint, "X", "Y")?;
    let message = mutual_information(joint, &[w], &y, &[])?;
    let noise = mutual_information(joint, &v, &y, &[])?;
    let mixed = mutual_information(joint, &[w], &v, &y)?;
    Ok(FlowDecomposition {
        total_bits: total,
        message_bits: message,
        noise_bits: noise,
        mixed_bits: mixed,
        residual_bits: (total - (message + noise + mixed)).abs(),
    })
}

/// Check the feedback-flow identity
/// `I(Z^{n-1}->Y^n) = I(X^n->Y^n|W) - I(W;Z^{n-1}|Y^n)`, both sides from
/// scratch.
pub fn verify_feedback_flow_identity(
    joint: &JointTable,
    message_var: &str,
) -> Result<IdentityCheck> {
    let layout = joint.layout();
    let w = layout.index_of(message_var)?;
    let n = layout.horizon("Y");
    let lhs = delayed_directed_information(joint, "Z", "Y")?;
    let conditioned = conditional_directed_information(joint, "X", "Y", &[w])?;
    let z = layout.time_group("Z", n - 1)?;
    let y = layout.time_group("Y", n)?;
    let leak = if z.is_empty() {
        0.0
    } else {
        mutual_information(joint, &[w], &z, &y)?
    };
    Ok(IdentityCheck::new(
        "feedback_flow_identity",
        "I(Z^{n-1}->Y^n) = I(X^n->Y^n|W) - I(W;Z^{n-1}|Y^n)",
        lhs,
        conditioned - leak,
    ))
}

/// Finite-horizon rate-loss bound for memoryless channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateLossCheck {
    pub horizon: usize,
    /// Single-letter capacity of the channel matrix, bits per use.
    pub capacity_bits_per_use: f64,
    /// `n C - I(W;Y^n)`: capacity left unused by the message.
    pub gap_bits: f64,
    /// `I(X^n->Y^n|W)`: the floor the gap cannot go below.
    pub floor_bits: f64,
    /// `gap - floor`; nonnegative up to rounding when the bound holds.
    pub margin_bits: f64,
}

/// Check `n C - I(W;Y^n) >= I(X^n->Y^n|W)` on a memoryless channel: input
/// randomness beyond the message is capacity spent on something other than
/// the message.
pub fn rate_loss_bound(
    joint: &JointTable,
    channel: &Kernel,
    message_var: &str,
) -> Result<RateLossCheck> {
    let matrix = channel.memoryless_matrix().ok_or(Error::NotMemoryless)?;
    let (capacity, _) = crate::bounds::single_letter_capacity(&matrix)?;
    let layout = joint.layout();
    let w = layout.index_of(message_var)?;
    let n = layout.horizon("Y");
    if channel.horizon() != n {
        return Err(Error::HorizonMismatch(format!(
            "channel horizon {} vs joint horizon {n}",
            channel.horizon()
        )));
    }
    let y = layout.time_group("Y", n)?;
    let message = mutual_information(joint, &[w], &y, &[])?;
    let floor = conditional_directed_information(joint, "X", "Y", &[w])?;
    let gap = n as f64 * capacity - message;
    Ok(RateLossCheck {
        horizon: n,
        capacity_bits_per_use: capacity,
        gap_bits: gap,
        floor_bits: floor,
        margin_bits: gap - floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codefn::{CodeFunction, MessageEncoder};
    use crate::joint::{build_joint_wxyvz, build_joint_wxyz, Caps};
    use crate::kernel::{NoiseProcess, SystemShape};
    use crate::rng::SplitMix64;

    #[test]
    fn perfect_feedback_is_not_noisy() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(2, 0.1).unwrap();
        let feedback = Kernel::perfect_feedback(2, shape).unwrap();
        let c = classify_feedback_noisy(&channel, &feedback).unwrap();
        assert!(!c.noisy);
        assert!(c.witness.is_none());
    }

    #[test]
    fn flipping_feedback_is_noisy_with_witness() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(2, 0.1).unwrap();
        let noise = NoiseProcess::binary_flip(2, 0.1).unwrap();
        let feedback = Kernel::additive_feedback(2, shape, &noise).unwrap();
        let c = classify_feedback_noisy(&channel, &feedback).unwrap();
        assert!(c.noisy);
        let w = c.witness.unwrap();
        assert_eq!(w.y_first.len(), w.time);
        assert_ne!(w.y_first, w.y_second);
    }

    #[test]
    fn zero_noise_additive_link_is_clean() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(2, 0.1).unwrap();
        let noise = NoiseProcess::binary_flip(2, 0.0).unwrap();
        let feedback = Kernel::additive_feedback(2, shape, &noise).unwrap();
        assert!(!classify_feedback_noisy(&channel, &feedback).unwrap().noisy);
    }

    #[test]
    fn silent_link_with_noisy_channel_is_noisy() {
        // Feedback always reports 0; a flip channel then leaves the encoder
        // guessing, so the link counts as noisy.
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(1, 0.1).unwrap();
        let silent =
            Kernel::new(KernelRole::Feedback, shape, vec![vec![vec![1.0, 0.0]; 2]]).unwrap();
        let c = classify_feedback_noisy(&channel, &silent).unwrap();
        assert!(c.noisy);
        assert_eq!(c.witness.unwrap().time, 1);
    }

    #[test]
    fn silent_link_with_deterministic_channel_is_clean() {
        // The encoder knows y = x without any feedback at all.
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let ident = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let channel = Kernel::memoryless_channel(2, shape, &ident).unwrap();
        let silent = Kernel::new(
            KernelRole::Feedback,
            shape,
            vec![vec![vec![1.0, 0.0]; 2], vec![vec![1.0, 0.0]; 8]],
        )
        .unwrap();
        assert!(!classify_feedback_noisy(&channel, &silent).unwrap().noisy);
    }

    fn additive_message_joint(beta: f64, n: usize) -> JointTable {
        let channel = Kernel::bsc_channel(n, 0.2).unwrap();
        let noise = NoiseProcess::binary_flip(n, beta).unwrap();
        let mut functions = Vec::new();
        // One echoing message, one constant message.
        let mut tables: Vec<Vec<usize>> = Vec::new();
        for t in 0..n {
            if t == 0 {
                tables.push(vec![0]);
            } else {
                tables.push((0..2usize.pow(t as u32)).map(|code| code % 2).collect());
            }
        }
        functions.push(CodeFunction::new(2, 2, tables).unwrap());
        functions.push(CodeFunction::constant(2, 2, &vec![1; n]).unwrap());
        let encoder = MessageEncoder::new(functions).unwrap();
        build_joint_wxyvz(&encoder, &[0.5, 0.5], &channel, &noise, &Caps::default()).unwrap()
    }

    #[test]
    fn fair_coin_noise_grows_one_bit_per_step() {
        // Open-loop codewords: the link noise never re-enters the loop, so
        // the residual uncertainty is exactly the accumulated noise entropy.
        let channel = Kernel::bsc_channel(3, 0.2).unwrap();
        let noise = NoiseProcess::binary_flip(3, 0.5).unwrap();
        let encoder =
            MessageEncoder::from_codewords(2, 2, &[vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
        let joint =
            build_joint_wxyvz(&encoder, &[0.5, 0.5], &channel, &noise, &Caps::default()).unwrap();
        let t = feedback_typicality(&joint).unwrap();
        assert_eq!(t.per_step_bits.len(), 3);
        assert!((t.per_step_bits[0] - 0.0).abs() < 1e-12);
        assert!((t.per_step_bits[1] - 1.0).abs() < 1e-9);
        assert!((t.per_step_bits[2] - 2.0).abs() < 1e-9);
        assert!((t.value_bits - 1.0).abs() < 1e-9);
    }

    #[test]
    fn echoing_encoder_leaks_noise_into_outputs() {
        // Closed loop: X2 replays Z1 = Y1 + V1, so later outputs carry
        // information about the link noise and H(Z^2 | Y^2) drops below 2.
        let joint = additive_message_joint(0.5, 3);
        let t = feedback_typicality(&joint).unwrap();
        assert!((t.per_step_bits[1] - 1.0).abs() < 1e-9);
        assert!(t.per_step_bits[2] < 2.0 - 1e-6);
        assert!(t.per_step_bits[2] > 1.0 + 1e-6);
    }

    #[test]
    fn skewed_noise_rate_matches_its_entropy() {
        let joint = additive_message_joint(0.1, 2);
        let t = feedback_typicality(&joint).unwrap();
        // (1/2) (0 + H(0.1)).
        assert!((t.value_bits - 0.2344977967946406).abs() < 1e-9);
    }

    #[test]
    fn open_loop_encoders_have_no_feedback_flow() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(2, 0.2).unwrap();
        let feedback = Kernel::perfect_feedback(2, shape).unwrap();
        let encoder = MessageEncoder::from_codewords(2, 2, &[vec![0, 0], vec![1, 1]]).unwrap();
        let joint =
            build_joint_wxyz(&encoder, &[0.5, 0.5], &channel, &feedback, &Caps::default()).unwrap();
        let c = encoder_typicality(&joint).unwrap();
        assert!(c.closed_loop_value_bits.abs() < 1e-12);
        assert!(!c.uses_feedback);
    }

    #[test]
    fn echoing_encoder_flow_matches_noise_route() {
        let joint = additive_message_joint(0.1, 2);
        let c = encoder_typicality(&joint).unwrap();
        assert!(c.uses_feedback, "flow is {}", c.closed_loop_value_bits);
        let residual = c.equivalence_residual_bits.unwrap();
        assert!(residual < 1e-9, "flow routes disagree by {residual}");
    }

    fn random_message_joint(seed: u64, n: usize, messages: usize) -> JointTable {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let mut rng = SplitMix64::new(seed);
        let channel = crate::system::sampling::random_channel(&mut rng, n, shape);
        let feedback = crate::system::sampling::random_feedback(&mut rng, n, shape);
        let encoder = crate::system::sampling::random_encoder(&mut rng, n, messages, shape);
        let prior = vec![1.0 / messages as f64; messages];
        build_joint_wxyz(&encoder, &prior, &channel, &feedback, &Caps::default()).unwrap()
    }

    #[test]
    fn message_information_identity_holds() {
        for seed in [11, 12, 13] {
            let joint = random_message_joint(seed, 2, 4);
            let (check, _) = verify_message_information_identity(&joint, "W").unwrap();
            assert!(check.passes(1e-9), "seed {seed}: {}", check.residual_bits);
        }
    }

    #[test]
    fn ordering_chain_never_inverts() {
        for seed in [21, 22, 23] {
            let joint = random_message_joint(seed, 2, 2);
            let chain = ordering_chain(&joint, "W").unwrap();
            assert!(
                chain.max_violation_bits < 1e-9,
                "seed {seed}: {}",
                chain.max_violation_bits
            );
        }
    }

    #[test]
    fn flows_add_up_for_additive_links() {
        for beta in [0.1, 0.3] {
            let joint = additive_message_joint(beta, 3);
            let d = decompose_flows(&joint, "W").unwrap();
            assert!(d.residual_bits < 1e-9, "beta {beta}: {}", d.residual_bits);
            assert!(d.noise_bits >= -1e-12);
            assert!(d.mixed_bits >= -1e-12);
        }
    }

    #[test]
    fn feedback_flow_identity_holds() {
        for seed in [31, 32] {
            let joint = random_message_joint(seed, 3, 2);
            let check = verify_feedback_flow_identity(&joint, "W").unwrap();
            assert!(check.passes(1e-9), "seed {seed}: {}", check.residual_bits);
        }
    }

    #[test]
    fn rate_loss_holds_on_memoryless_channels() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(2, 0.2).unwrap();
        let noise = NoiseProcess::binary_flip(2, 0.1).unwrap();
        let feedback = Kernel::additive_feedback(2, shape, &noise).unwrap();
        let f0 = CodeFunction::new(2, 2, vec![vec![0], vec![0, 1]]).unwrap();
        let f1 = CodeFunction::new(2, 2, vec![vec![1], vec![1, 0]]).unwrap();
        let encoder = MessageEncoder::new(vec![f0, f1]).unwrap();
        let joint =
            build_joint_wxyz(&encoder, &[0.5, 0.5], &channel, &feedback, &Caps::default()).unwrap();
        let check = rate_loss_bound(&joint, &channel, "W").unwrap();
        assert!(check.margin_bits > -1e-9, "margin {}", check.margin_bits);
        assert!(check.capacity_bits_per_use > 0.0);
    }

    #[test]
    fn rate_loss_rejects_channels_with_memory() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let mut rng = SplitMix64::new(5);
        let channel = crate::system::sampling::random_channel(&mut rng, 2, shape);
        let joint = random_message_joint(77, 2, 2);
        assert!(matches!(
            rate_loss_bound(&joint, &channel, "W"),
            Err(Error::NotMemoryless)
        ));
    }

    // Frozen flow split for a two-message echo encoder on BSC(0.2) with a
    // 10% flip on the return link. Drift means a measure changed.
    #[test]
    fn echo_encoder_flow_regression() {
        let channel = Kernel::bsc_channel(2, 0.2).unwrap();
        let noise = NoiseProcess::binary_flip(2, 0.1).unwrap();
        let echo = CodeFunction::new(2, 2, vec![vec![0], vec![0, 1]]).unwrap();
        let ones = CodeFunction::constant(2, 2, &[1, 1]).unwrap();
        let encoder = MessageEncoder::new(vec![echo, ones]).unwrap();
        let joint =
            build_joint_wxyvz(&encoder, &[0.5, 0.5], &channel, &noise, &Caps::default()).unwrap();

        let flows = decompose_flows(&joint, "W").unwrap();
        assert!((flows.total_bits - 0.40334999349939626).abs() < 1e-12);
        assert!((flows.message_bits - 0.3509408546967683).abs() < 1e-12);
        assert!((flows.noise_bits - 0.0340514069681926).abs() < 1e-12);
        assert!((flows.mixed_bits - 0.018357731834435054).abs() < 1e-12);
        assert!(flows.residual_bits < 1e-12);

        let enc = encoder_typicality(&joint).unwrap();
        assert!((enc.closed_loop_value_bits - 0.017025703484096218).abs() < 1e-12);
        assert!(enc.per_step_bits[0].abs() < 1e-15);
        assert!(enc.equivalence_residual_bits.unwrap() < 1e-12);
        assert!(enc.uses_feedback);

        // H(0.1) / 2: only the first link symbol is ever uncertain.
        let fb = feedback_typicality(&joint).unwrap();
        assert!((fb.value_bits - 0.2344977967946406).abs() < 1e-12);
    }
}
