//! On-disk system descriptions.
//!
//! A system file is JSON naming the horizon, the three alphabet sizes, the
//! channel and feedback tables, and optionally an input policy, a
//! deterministic message encoder, and a message prior. Kernel tables are
//! `[time][history][output]` with histories in the mixed-radix code
//! (earliest symbol most significant); the conditioning order per kernel is
//! channel `(x^i, y^{i-1})`, feedback `(y^i, z^{i-1})`, policy
//! `(x^{i-1}, z^{i-1})`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codefn::{CodeFunction, MessageEncoder};
use crate::error::{Error, Result};
use crate::joint::{build_joint_wxyz, build_joint_xyz, Caps, JointTable};
use crate::kernel::{Kernel, KernelRole, NoiseProcess, SystemShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphabetSpec {
    #[serde(rename = "X")]
    pub x: usize,
    #[serde(rename = "Y")]
    pub y: usize,
    #[serde(rename = "Z")]
    pub z: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    /// Number of messages.
    #[serde(rename = "M")]
    pub messages: usize,
    /// `[message][time][z-history] -> input symbol`.
    pub code_functions: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n: usize,
    pub alphabets: AlphabetSpec,
    pub channel: Vec<Vec<Vec<f64>>>,
    pub feedback: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder: Option<EncoderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_prior: Option<Vec<f64>>,
}

/// A parsed and validated system, ready to drive the joint builders.
#[derive(Debug, Clone)]
pub struct SystemParts {
    pub n: usize,
    pub shape: SystemShape,
    pub channel: Kernel,
    pub feedback: Kernel,
    pub policy: Option<Kernel>,
    pub encoder: Option<MessageEncoder>,
    /// Explicit prior, or uniform when an encoder is present without one.
    pub prior: Option<Vec<f64>>,
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidSystem(format!("system spec does not parse: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSystem(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn shape(&self) -> Result<SystemShape> {
        SystemShape::new(self.alphabets.x, self.alphabets.y, self.alphabets.z)
    }

    fn kernel(&self, role: KernelRole, tables: &[Vec<Vec<f64>>]) -> Result<Kernel> {
        if tables.len() != self.n {
            return Err(Error::HorizonMismatch(format!(
                "{} has {} time steps, spec says n = {}",
                role.label(),
                tables.len(),
                self.n
            )));
        }
        Kernel::new(role, self.shape()?, tables.to_vec())
    }

    /// Validate everything and produce kernels, encoder and prior.
    pub fn build(&self) -> Result<SystemParts> {
        if self.n == 0 {
            return Err(Error::InvalidSystem("horizon must be positive".into()));
        }
        let shape = self.shape()?;
        let channel = self.kernel(KernelRole::Channel, &self.channel)?;
        let feedback = self.kernel(KernelRole::Feedback, &self.feedback)?;
        let policy = match &self.policy {
            Some(tables) => Some(self.kernel(KernelRole::Policy, tables)?),
            None => None,
        };
        let encoder = match &self.encoder {
            Some(spec) => {
                if spec.code_functions.len() != spec.messages {
                    return Err(Error::InvalidSystem(format!(
                        "encoder declares M = {} but lists {} code-function sequences",
                        spec.messages,
                        spec.code_functions.len()
                    )));
                }
                let functions = spec
                    .code_functions
                    .iter()
                    .map(|tables| CodeFunction::new(shape.x, shape.z, tables.clone()))
                    .collect::<Result<Vec<_>>>()?;
                let enc = MessageEncoder::new(functions)?;
                if enc.horizon() != self.n {
                    return Err(Error::HorizonMismatch(format!(
                        "encoder horizon {} vs spec n = {}",
                        enc.horizon(),
                        self.n
                    )));
                }
                Some(enc)
            }
            None => None,
        };
        let prior = match (&self.message_prior, &encoder) {
            (Some(p), Some(enc)) => {
                if p.len() != enc.message_count() {
                    return Err(Error::PriorLengthMismatch {
                        got: p.len(),
                        expected: enc.message_count(),
                    });
                }
                Some(p.clone())
            }
            (Some(_), None) => {
                return Err(Error::InvalidSystem(
                    "message prior given without an encoder".into(),
                ));
            }
            (None, Some(enc)) => Some(vec![1.0 / enc.message_count() as f64; enc.message_count()]),
            (None, None) => None,
        };
        Ok(SystemParts {
            n: self.n,
            shape,
            channel,
            feedback,
            policy,
            encoder,
            prior,
        })
    }

    /// Spec from built parts, for writing files back out.
    pub fn from_parts(parts: &SystemParts) -> Self {
        Self {
            n: parts.n,
            alphabets: AlphabetSpec {
                x: parts.shape.x,
                y: parts.shape.y,
                z: parts.shape.z,
            },
            channel: parts.channel.tables().to_vec(),
            feedback: parts.feedback.tables().to_vec(),
            policy: parts.policy.as_ref().map(|k| k.tables().to_vec()),
            encoder: parts.encoder.as_ref().map(|enc| EncoderSpec {
                messages: enc.message_count(),
                code_functions: enc
                    .functions()
                    .iter()
                    .map(|f| f.tables().to_vec())
                    .collect(),
            }),
            message_prior: parts.prior.clone(),
        }
    }
}

impl SystemParts {
    /// Joint over `(X, Y, Z)` from the input policy.
    pub fn policy_joint(&self, caps: &Caps) -> Result<JointTable> {
        let policy = self.policy.as_ref().ok_or_else(|| {
            Error::InvalidSystem("this analysis needs a policy in the system spec".into())
        })?;
        build_joint_xyz(policy, &self.channel, &self.feedback, caps)
    }

    /// Joint over `(W, X, Y, Z)` from the message encoder.
    pub fn message_joint(&self, caps: &Caps) -> Result<JointTable> {
        let encoder = self.encoder.as_ref().ok_or_else(|| {
            Error::InvalidSystem("this analysis needs an encoder in the system spec".into())
        })?;
        let prior = self.prior.as_ref().expect("prior defaults with encoder");
        build_joint_wxyz(encoder, prior, &self.channel, &self.feedback, caps)
    }
}

/// Re-roll a channel and feedback pair at a different horizon. Works when
/// the channel is memoryless and the feedback link is either exact or
/// additive with time-invariant, history-free noise; anything else has no
/// canonical extension and is refused.
pub fn extend_links(channel: &Kernel, feedback: &Kernel, n: usize) -> Result<(Kernel, Kernel)> {
    if n == channel.horizon() && n == feedback.horizon() {
        return Ok((channel.clone(), feedback.clone()));
    }
    let shape = channel.shape();
    let matrix = channel.memoryless_matrix().ok_or_else(|| {
        Error::InvalidSystem("horizon override needs a memoryless channel".into())
    })?;
    let noise = feedback.additive_noise_decomposition().ok_or_else(|| {
        Error::InvalidSystem("horizon override needs additive (or exact) feedback".into())
    })?;
    let base = noise.row(0, 0).to_vec();
    for t in 0..noise.horizon() {
        for h in 0..noise.alphabet().pow(t as u32) {
            let row = noise.row(t, h);
            if row
                .iter()
                .zip(base.iter())
                .any(|(a, b)| (a - b).abs() > 1e-12)
            {
                return Err(Error::InvalidSystem(
                    "horizon override needs time-invariant feedback noise".into(),
                ));
            }
        }
    }
    let channel_n = Kernel::memoryless_channel(n, shape, &matrix)?;
    let noise_n = NoiseProcess::iid(n, &base)?;
    let feedback_n = Kernel::additive_feedback(n, shape, &noise_n)?;
    Ok((channel_n, feedback_n))
}

/// Seeded generators for the randomized verification suites. All draws go
/// through the portable generator so suites are reproducible everywhere.
pub mod sampling {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_row(rng: &mut SplitMix64, width: usize) -> Vec<f64> {
        // Exponential spacings: a uniform point on the simplex, so every
        // symbol keeps positive probability and supports stay full.
        let mut row: Vec<f64> = (0..width).map(|_| -rng.next_f64_open().ln()).collect();
        let sum: f64 = row.iter().sum();
        for v in &mut row {
            *v /= sum;
        }
        row
    }

    fn random_tables(
        rng: &mut SplitMix64,
        n: usize,
        rows_at: impl Fn(usize) -> usize,
        width: usize,
    ) -> Vec<Vec<Vec<f64>>> {
        (0..n)
            .map(|t| (0..rows_at(t)).map(|_| random_row(rng, width)).collect())
            .collect()
    }

    pub fn random_channel(rng: &mut SplitMix64, n: usize, shape: SystemShape) -> Kernel {
        let tables = random_tables(
            rng,
            n,
            |t| shape.x.pow(t as u32 + 1) * shape.y.pow(t as u32),
            shape.y,
        );
        Kernel::new(KernelRole::Channel, shape, tables).expect("rows are normalized")
    }

    pub fn random_feedback(rng: &mut SplitMix64, n: usize, shape: SystemShape) -> Kernel {
        let tables = random_tables(
            rng,
            n,
            |t| shape.y.pow(t as u32 + 1) * shape.z.pow(t as u32),
            shape.z,
        );
        Kernel::new(KernelRole::Feedback, shape, tables).expect("rows are normalized")
    }

    pub fn random_policy(rng: &mut SplitMix64, n: usize, shape: SystemShape) -> Kernel {
        let tables = random_tables(
            rng,
            n,
            |t| shape.x.pow(t as u32) * shape.z.pow(t as u32),
            shape.x,
        );
        Kernel::new(KernelRole::Policy, shape, tables).expect("rows are normalized")
    }

    /// Random policy whose rows ignore the feedback block: the same row is
    /// tiled across every `z` history of a given input history.
    pub fn no_feedback_policy(rng: &mut SplitMix64, n: usize, shape: SystemShape) -> Kernel {
        let tables = (0..n)
            .map(|t| {
                let x_hists = shape.x.pow(t as u32);
                let z_hists = shape.z.pow(t as u32);
                let mut rows = Vec::with_capacity(x_hists * z_hists);
                for _ in 0..x_hists {
                    let row = random_row(rng, shape.x);
                    for _ in 0..z_hists {
                        rows.push(row.clone());
                    }
                }
                rows
            })
            .collect();
        Kernel::new(KernelRole::Policy, shape, tables).expect("rows are normalized")
    }

    /// Uniformly random deterministic encoder: every code-function table
    /// slot is an independent uniform symbol.
    pub fn random_encoder(
        rng: &mut SplitMix64,
        n: usize,
        messages: usize,
        shape: SystemShape,
    ) -> MessageEncoder {
        let functions = (0..messages)
            .map(|_| {
                let tables: Vec<Vec<usize>> = (0..n)
                    .map(|t| {
                        (0..shape.z.pow(t as u32))
                            .map(|_| rng.next_below(shape.x))
                            .collect()
                    })
                    .collect();
                CodeFunction::new(shape.x, shape.z, tables).expect("symbols in range")
            })
            .collect();
        MessageEncoder::new(functions).expect("shapes match")
    }

    /// Random encoder that never reads the feedback: fixed codewords.
    pub fn open_loop_encoder(
        rng: &mut SplitMix64,
        n: usize,
        messages: usize,
        shape: SystemShape,
    ) -> MessageEncoder {
        let codewords: Vec<Vec<usize>> = (0..messages)
            .map(|_| (0..n).map(|_| rng.next_below(shape.x)).collect())
            .collect();
        MessageEncoder::from_codewords(shape.x, shape.z, &codewords).expect("symbols in range")
    }

    pub fn random_memoryless_matrix(
        rng: &mut SplitMix64,
        inputs: usize,
        outputs: usize,
    ) -> Vec<Vec<f64>> {
        (0..inputs).map(|_| random_row(rng, outputs)).collect()
    }

    pub fn random_iid_noise(rng: &mut SplitMix64, n: usize, alphabet: usize) -> NoiseProcess {
        let dist = random_row(rng, alphabet);
        NoiseProcess::iid(n, &dist).expect("distribution is normalized")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn bsc_spec() -> SystemSpec {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let parts = SystemParts {
            n: 2,
            shape,
            channel: Kernel::bsc_channel(2, 0.1).unwrap(),
            feedback: Kernel::perfect_feedback(2, shape).unwrap(),
            policy: Some(Kernel::uniform_policy(2, shape).unwrap()),
            encoder: None,
            prior: None,
        };
        SystemSpec::from_parts(&parts)
    }

    #[test]
    fn json_round_trip_preserves_the_spec() {
        let spec = bsc_spec();
        let text = serde_json::to_string_pretty(&spec).unwrap();
        assert!(text.contains("\"alphabets\""));
        assert!(text.contains("\"X\": 2"));
        let back = SystemSpec::from_json(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn build_validates_and_produces_kernels() {
        let parts = bsc_spec().build().unwrap();
        assert_eq!(parts.n, 2);
        assert!(parts.policy.is_some());
        assert!(parts.encoder.is_none());
        let joint = parts.policy_joint(&Caps::default()).unwrap();
        assert_eq!(joint.layout().cells(), 64);
    }

    #[test]
    fn missing_rows_name_the_history() {
        let mut spec = bsc_spec();
        spec.channel[1].pop();
        let err = spec.build().unwrap_err().to_string();
        assert!(err.contains("time 2"), "{err}");
        assert!(err.contains("history index 7"), "{err}");
    }

    #[test]
    fn encoder_counts_must_match() {
        let mut spec = bsc_spec();
        spec.policy = None;
        spec.encoder = Some(EncoderSpec {
            messages: 3,
            code_functions: vec![vec![vec![0], vec![0, 0]], vec![vec![1], vec![1, 1]]],
        });
        assert!(matches!(spec.build(), Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn prior_defaults_to_uniform_with_an_encoder() {
        let mut spec = bsc_spec();
        spec.encoder = Some(EncoderSpec {
            messages: 2,
            code_functions: vec![vec![vec![0], vec![0, 0]], vec![vec![1], vec![1, 1]]],
        });
        let parts = spec.build().unwrap();
        assert_eq!(parts.prior, Some(vec![0.5, 0.5]));
        let joint = parts.message_joint(&Caps::default()).unwrap();
        assert_eq!(joint.layout().var(0).name, "W");
    }

    #[test]
    fn stray_prior_is_rejected() {
        let mut spec = bsc_spec();
        spec.message_prior = Some(vec![0.5, 0.5]);
        assert!(spec.build().is_err());
    }

    #[test]
    fn links_extend_when_memoryless_and_additive() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(1, 0.1).unwrap();
        let noise = NoiseProcess::binary_flip(1, 0.05).unwrap();
        let feedback = Kernel::additive_feedback(1, shape, &noise).unwrap();
        let (c3, f3) = extend_links(&channel, &feedback, 3).unwrap();
        assert_eq!(c3.horizon(), 3);
        assert_eq!(c3, Kernel::bsc_channel(3, 0.1).unwrap());
        let n3 = NoiseProcess::binary_flip(3, 0.05).unwrap();
        assert_eq!(f3, Kernel::additive_feedback(3, shape, &n3).unwrap());
        // Exact feedback extends too.
        let perfect = Kernel::perfect_feedback(1, shape).unwrap();
        let (_, p2) = extend_links(&channel, &perfect, 2).unwrap();
        assert_eq!(p2, Kernel::perfect_feedback(2, shape).unwrap());
    }

    #[test]
    fn history_dependent_links_refuse_extension() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let mut rng = SplitMix64::new(8);
        let channel = sampling::random_channel(&mut rng, 2, shape);
        let feedback = Kernel::perfect_feedback(2, shape).unwrap();
        assert!(extend_links(&channel, &feedback, 3).is_err());
        let bsc = Kernel::bsc_channel(2, 0.1).unwrap();
        let fb = sampling::random_feedback(&mut rng, 2, shape);
        assert!(extend_links(&bsc, &fb, 3).is_err());
    }

    #[test]
    fn sampled_systems_are_valid_and_reproducible() {
        let shape = SystemShape::new(2, 3, 2).unwrap();
        let mut a = SplitMix64::new(77);
        let mut b = SplitMix64::new(77);
        let ka = sampling::random_channel(&mut a, 3, shape);
        let kb = sampling::random_channel(&mut b, 3, shape);
        assert_eq!(ka, kb);
        let pa = sampling::no_feedback_policy(&mut a, 2, shape);
        assert!(pa.ignores_feedback());
        let enc = sampling::open_loop_encoder(&mut a, 2, 4, shape);
        assert!(enc.is_open_loop());
    }
}
