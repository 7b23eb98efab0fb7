//! Finite-horizon capacity bounds for channels with noisy feedback.
//!
//! The upper bound is the best per-symbol causally conditioned directed
//! information `(1/n) I(X^n -> Y^n || Z^n)` over input policies, found by
//! exact search on a simplex grid when the grid is small enough and by
//! multiplicative-weights ascent otherwise; the grid winner is always
//! polished by ascent so both routes reach local-optimum accuracy. For
//! additive feedback noise the entropy rate of the noise gives a matching
//! lower bound, clamped at zero.

use crate::error::{Error, Result};
use crate::joint::{build_joint_xyz, Caps, JointTable};
use crate::kernel::{Kernel, KernelRole, SystemShape};
use crate::rng::SplitMix64;

/// Search settings. Defaults are deterministic: the same seed reproduces
/// the same trajectory bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Simplex grid step is `1 / grid_resolution`.
    pub grid_resolution: usize,
    /// Use the grid only when it needs at most this many evaluations.
    pub max_grid_evals: u64,
    /// Ascent restarts when the grid is too large; restart 0 starts from
    /// the uniform policy, later restarts from random points.
    pub restarts: usize,
    pub max_iterations: usize,
    /// Initial multiplicative step size, halved on failed steps.
    pub initial_step: f64,
    /// Central finite-difference half-width.
    pub fd_step: f64,
    /// Stop when the window's total gain drops below `convergence_gain`.
    pub convergence_window: usize,
    pub convergence_gain: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 16,
            max_grid_evals: 1_000_000,
            restarts: 32,
            max_iterations: 2000,
            initial_step: 0.5,
            fd_step: 1e-5,
            convergence_window: 50,
            convergence_gain: 1e-10,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.grid_resolution == 0 {
            return Err(Error::InvalidParameter(
                "grid resolution must be positive".into(),
            ));
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "restarts and iterations must be positive".into(),
            ));
        }
        if !(self.fd_step > 0.0) || !(self.initial_step > 0.0) {
            return Err(Error::InvalidParameter(
                "step sizes must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The additive-noise lower bound attached to an upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    /// `max(0, upper - H(V^n)/n)` in bits per use.
    pub value_bits_per_use: f64,
    /// `H(V^n)/n`.
    pub noise_entropy_bits_per_symbol: f64,
    /// True when the subtraction went negative and was clamped.
    pub clamped: bool,
}

/// Outcome of the bound search.
#[derive(Debug, Clone)]
pub struct BoundResult {
    pub horizon: usize,
    pub upper_bits_per_use: f64,
    /// The policy achieving the reported value.
    pub argmax_policy: Kernel,
    /// "grid+polish" or "multiplicative_weights".
    pub method: String,
    pub evaluations: u64,
    pub restarts_used: usize,
    /// Best value after the grid phase (if any) and after each ascent.
    pub trace: Vec<f64>,
    /// Present when the feedback link has an additive-noise decomposition.
    pub lower: Option<LowerBound>,
}

/// Per-symbol causally conditioned directed information of an `(X, Y, Z)`
/// joint, by direct projection arithmetic on the known interleaved layout.
/// Matches the measure-module computation; exists because the optimizer
/// calls it once per evaluation.
fn causal_objective(joint: &JointTable, n: usize, shape: SystemShape) -> f64 {
    let mut total = 0.0f64;
    for i in 1..=n {
        // Variable positions: X_j at 3(j-1), Y_j at +1, Z_j at +2.
        let mut abc: Vec<usize> = Vec::with_capacity(3 * i);
        for j in 0..i {
            abc.push(3 * j);
        }
        abc.push(3 * (i - 1) + 1);
        let mut c: Vec<usize> = Vec::with_capacity(2 * (i - 1));
        for j in 0..i - 1 {
            c.push(3 * j + 1);
            c.push(3 * j + 2);
        }
        abc.extend(c.iter().copied());
        let a_cells = shape.x.pow(i as u32);
        let b_cells = shape.y;
        let c_cells: usize = (shape.y * shape.z).pow((i - 1) as u32);

        let p_abc = joint.project(&abc);
        // Orders (a, c), (b, c), (c) are sub-orders of (a, b, c); their
        // codes come from the abc code by dropping blocks.
        let mut p_ac = vec![0.0f64; a_cells * c_cells];
        let mut p_bc = vec![0.0f64; b_cells * c_cells];
        let mut p_c = vec![0.0f64; c_cells];
        for (code, &p) in p_abc.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let cc = code % c_cells;
            let ab = code / c_cells;
            let a = ab / b_cells;
            let b = ab % b_cells;
            p_ac[a * c_cells + cc] += p;
            p_bc[b * c_cells + cc] += p;
            p_c[cc] += p;
        }
        for (code, &p) in p_abc.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let cc = code % c_cells;
            let ab = code / c_cells;
            let a = ab / b_cells;
            let b = ab % b_cells;
            let num = p * p_c[cc];
            let den = p_ac[a * c_cells + cc] * p_bc[b * c_cells + cc];
            total += p * (num.log2() - den.log2());
        }
    }
    total / n as f64
}

struct Objective<'a> {
    channel: &'a Kernel,
    feedback: &'a Kernel,
    caps: &'a Caps,
    shape: SystemShape,
    n: usize,
    row_counts: Vec<usize>,
    evaluations: u64,
}

impl<'a> Objective<'a> {
    fn policy_from(&self, params: &[Vec<f64>]) -> Kernel {
        let mut tables = Vec::with_capacity(self.n);
        let mut row = 0usize;
        for t in 0..self.n {
            let mut level = Vec::with_capacity(self.row_counts[t]);
            for _ in 0..self.row_counts[t] {
                let w = &params[row];
                let sum: f64 = w.iter().sum();
                level.push(w.iter().map(|&v| v / sum).collect::<Vec<f64>>());
                row += 1;
            }
            tables.push(level);
        }
        Kernel::from_tables_unchecked(KernelRole::Policy, self.shape, tables)
    }

    fn eval(&mut self, params: &[Vec<f64>]) -> f64 {
        self.evaluations += 1;
        let policy = self.policy_from(params);
        let joint = build_joint_xyz(&policy, self.channel, self.feedback, self.caps)
            .expect("objective systems are pre-validated");
        causal_objective(&joint, self.n, self.shape)
    }
}

fn normalize_rows(params: &mut [Vec<f64>]) {
    for row in params.iter_mut() {
        let sum: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Multiplicative-weights ascent from `start`; returns the best point and
/// value. `start` rows must be normalized.
fn ascend(
    obj: &mut Objective,
    mut point: Vec<Vec<f64>>,
    start_value: f64,
    cfg: &OptimizerConfig,
) -> (Vec<Vec<f64>>, f64) {
    let mut value = start_value;
    let mut eta = cfg.initial_step;
    let h = cfg.fd_step;
    let mut history: Vec<f64> = Vec::with_capacity(cfg.max_iterations);
    for iter in 0..cfg.max_iterations {
        // Central differences on the normalized point, clamping at the
        // simplex boundary; optima of these objectives that sit on a face
        // are still found because the clamped probe stays feasible.
        let mut grad: Vec<Vec<f64>> = point.iter().map(|row| vec![0.0f64; row.len()]).collect();
        for r in 0..point.len() {
            for k in 0..point[r].len() {
                let saved = point[r][k];
                point[r][k] = saved + h;
                let up = obj.eval(&point);
                point[r][k] = (saved - h).max(0.0);
                let down = obj.eval(&point);
                point[r][k] = saved;
                grad[r][k] = (up - down) / (2.0 * h);
            }
        }
        let mut candidate = point.clone();
        for r in 0..candidate.len() {
            for k in 0..candidate[r].len() {
                candidate[r][k] *= (eta * grad[r][k]).exp();
            }
        }
        normalize_rows(&mut candidate);
        let cand_value = obj.eval(&candidate);
        if cand_value > value {
            point = candidate;
            value = cand_value;
        } else {
            eta *= 0.5;
            if eta < 1e-14 {
                break;
            }
        }
        history.push(value);
        if iter + 1 >= cfg.convergence_window {
            let past = history[iter + 1 - cfg.convergence_window];
            if value - past < cfg.convergence_gain {
                break;
            }
        }
    }
    (point, value)
}

fn uniform_point(rows: usize, width: usize) -> Vec<Vec<f64>> {
    vec![vec![1.0 / width as f64; width]; rows]
}

fn random_point(rng: &mut SplitMix64, rows: usize, width: usize) -> Vec<Vec<f64>> {
    let mut point = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut row = Vec::with_capacity(width);
        for _ in 0..width {
            // Exponential spacings give a uniform draw on the simplex.
            row.push(-rng.next_f64_open().ln());
        }
        point.push(row);
    }
    let mut p = point;
    normalize_rows(&mut p);
    p
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut num: u128 = 1;
    for i in 0..k {
        num = num.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    num
}

/// All nonnegative integer vectors of the given length summing to `total`,
/// lexicographic by first entry ascending.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            let mut v = Vec::with_capacity(parts);
            v.push(first);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Maximize `(1/n) I(X^n -> Y^n || Z^n)` over input policies for the given
/// links. Deterministic for a fixed config.
pub fn optimize_upper_bound(
    channel: &Kernel,
    feedback: &Kernel,
    cfg: &OptimizerConfig,
    caps: &Caps,
) -> Result<BoundResult> {
    cfg.validate()?;
    if channel.role() != KernelRole::Channel || feedback.role() != KernelRole::Feedback {
        return Err(Error::InvalidParameter(
            "bound search takes a channel and a feedback kernel".into(),
        ));
    }
    if channel.shape() != feedback.shape() || channel.horizon() != feedback.horizon() {
        return Err(Error::DimensionMismatch(
            "channel and feedback link disagree on shape or horizon".into(),
        ));
    }
    let n = channel.horizon();
    let shape = channel.shape();
    caps.check_shape(shape)?;
    caps.check_horizon(n)?;

    let row_counts: Vec<usize> = (0..n)
        .map(|t| shape.x.pow(t as u32) * shape.z.pow(t as u32))
        .collect();
    let rows: usize = row_counts.iter().sum();
    let width = shape.x;

    let mut obj = Objective {
        channel,
        feedback,
        caps,
        shape,
        n,
        row_counts,
        evaluations: 0,
    };

    let per_row = binomial((cfg.grid_resolution + width - 1) as u64, (width - 1) as u64);
    let mut grid_points: u128 = 1;
    for _ in 0..rows {
        grid_points = grid_points.saturating_mul(per_row);
    }
    let use_grid = grid_points <= cfg.max_grid_evals as u128;

    let mut trace = Vec::new();
    let mut best_point;
    let mut best_value;
    let method;
    let mut restarts_used = 0usize;

    if use_grid {
        method = "grid+polish".to_owned();
        let atoms: Vec<Vec<f64>> = compositions(cfg.grid_resolution, width)
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .map(|k| k as f64 / cfg.grid_resolution as f64)
                    .collect()
            })
            .collect();
        // Odometer over rows; strict improvement keeps the first maximizer.
        let mut choice = vec![0usize; rows];
        let mut point: Vec<Vec<f64>> = vec![atoms[0].clone(); rows];
        best_value = f64::NEG_INFINITY;
        best_point = point.clone();
        'grid: loop {
            for (r, &c) in choice.iter().enumerate() {
                point[r] = atoms[c].clone();
            }
            let v = obj.eval(&point);
            if v > best_value {
                best_value = v;
                best_point = point.clone();
            }
            let mut r = rows;
            loop {
                if r == 0 {
                    break 'grid;
                }
                r -= 1;
                choice[r] += 1;
                if choice[r] < atoms.len() {
                    break;
                }
                choice[r] = 0;
            }
        }
        trace.push(best_value);
        // Grid points can sit on the boundary; nudge inside so the
        // multiplicative update can move every coordinate.
        let mut start = best_point.clone();
        for row in start.iter_mut() {
            for v in row.iter_mut() {
                *v = v.max(1e-9);
            }
        }
        normalize_rows(&mut start);
        let sv = obj.eval(&start);
        let (p, v) = ascend(&mut obj, start, sv, cfg);
        if v > best_value {
            best_value = v;
            best_point = p;
        }
        trace.push(best_value);
    } else {
        method = "multiplicative_weights".to_owned();
        let mut rng = SplitMix64::new(cfg.seed);
        best_value = f64::NEG_INFINITY;
        best_point = uniform_point(rows, width);
        for restart in 0..cfg.restarts {
            restarts_used += 1;
            let start = if restart == 0 {
                uniform_point(rows, width)
            } else {
                random_point(&mut rng, rows, width)
            };
            let sv = obj.eval(&start);
            let (p, v) = ascend(&mut obj, start, sv, cfg);
            if v > best_value {
                best_value = v;
                best_point = p;
            }
            trace.push(best_value);
        }
    }

    let argmax = {
        let mut point = best_point;
        normalize_rows(&mut point);
        let unchecked = obj.policy_from(&point);
        Kernel::new(KernelRole::Policy, shape, unchecked.tables().to_vec())?
    };
    let lower = feedback.additive_noise_decomposition().map(|noise| {
        let per_symbol = noise
            .block_entropy_bits(n)
            .expect("noise from a valid kernel")
            / n as f64;
        let raw = best_value - per_symbol;
        LowerBound {
            value_bits_per_use: raw.max(0.0),
            noise_entropy_bits_per_symbol: per_symbol,
            clamped: raw < 0.0,
        }
    });
    Ok(BoundResult {
        horizon: n,
        upper_bits_per_use: best_value,
        argmax_policy: argmax,
        method,
        evaluations: obj.evaluations,
        restarts_used,
        trace,
        lower,
    })
}

/// Single-letter capacity of a memoryless channel matrix `p[x][y]` by the
/// alternating maximization of Arimoto and Blahut, in bits per use. Also
/// returns the maximizing input distribution. Iterates until the duality
/// gap `max_x D(x) - I` drops to 1e-10 (or an iteration safety cap).
pub fn single_letter_capacity(matrix: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let inputs = matrix.len();
    if inputs == 0 {
        return Err(Error::EmptyAlphabet);
    }
    let outputs = matrix[0].len();
    if outputs == 0 {
        return Err(Error::EmptyAlphabet);
    }
    for (x, row) in matrix.iter().enumerate() {
        if row.len() != outputs {
            return Err(Error::DimensionMismatch(format!(
                "channel matrix row {x} has {} entries, expected {outputs}",
                row.len()
            )));
        }
        if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::BadProbability {
                time: 1,
                history: x,
                value: *row.iter().find(|&&p| !p.is_finite() || p < 0.0).unwrap(),
            });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::UnnormalizedRow {
                time: 1,
                history: x,
                sum,
                tol: 1e-9,
            });
        }
    }

    let mut r = vec![1.0 / inputs as f64; inputs];
    let mut capacity = 0.0f64;
    for _ in 0..200_000 {
        let mut q = vec![0.0f64; outputs];
        for (x, row) in matrix.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                q[y] += r[x] * p;
            }
        }
        // Per-input relative entropy against the output mixture.
        let mut d = vec![0.0f64; inputs];
        for (x, row) in matrix.iter().enumerate() {
            let mut acc = 0.0f64;
            for (y, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    acc += p * (p.log2() - q[y].log2());
                }
            }
            d[x] = acc;
        }
        let mut avg = 0.0f64;
        let mut top = f64::NEG_INFINITY;
        for x in 0..inputs {
            avg += r[x] * d[x];
            if d[x] > top {
                top = d[x];
            }
        }
        capacity = avg;
        if top - avg <= 1e-10 {
            break;
        }
        let mut z = 0.0f64;
        for x in 0..inputs {
            // Exponentiate relative to the best input to avoid overflow.
            r[x] *= (std::f64::consts::LN_2 * (d[x] - top)).exp();
            z += r[x];
        }
        for v in r.iter_mut() {
            *v /= z;
        }
    }
    Ok((capacity.max(0.0), r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::causal_conditional_directed_information;

    #[test]
    fn flip_channel_capacity() {
        let (c, r) = single_letter_capacity(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        assert!((c - 0.5310044064107188).abs() < 1e-9, "got {c}");
        assert!((r[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn erasure_channel_capacity() {
        let (c, _) =
            single_letter_capacity(&[vec![0.75, 0.25, 0.0], vec![0.0, 0.25, 0.75]]).unwrap();
        assert!((c - 0.75).abs() < 1e-9, "got {c}");
    }

    #[test]
    fn skewed_channel_capacity_beats_uniform_input() {
        // Z-channel: uniform input is suboptimal, the solver must move.
        let (c, r) = single_letter_capacity(&[vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        // Known closed form: log2(1 + 2^(-1)) ... for the Z-channel with
        // flip 0.5 the capacity is log2(5) - 2 = 0.3219281.
        assert!((c - (5.0f64.log2() - 2.0)).abs() < 1e-8, "got {c}");
        assert!(r[0] > 0.5, "input tilts toward the clean symbol");
    }

    #[test]
    fn fast_objective_matches_measures() {
        use crate::rng::SplitMix64;
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let mut rng = SplitMix64::new(31337);
        for n in [1usize, 2, 3] {
            let policy = crate::system::sampling::random_policy(&mut rng, n, shape);
            let channel = crate::system::sampling::random_channel(&mut rng, n, shape);
            let feedback = crate::system::sampling::random_feedback(&mut rng, n, shape);
            let joint = build_joint_xyz(&policy, &channel, &feedback, &Caps::default()).unwrap();
            let fast = causal_objective(&joint, n, shape);
            let slow =
                causal_conditional_directed_information(&joint, "X", "Y", "Z").unwrap() / n as f64;
            assert!((fast - slow).abs() < 1e-12, "n={n}: {fast} vs {slow}");
        }
    }

    #[test]
    fn one_step_flip_bound_hits_capacity() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(1, 0.1).unwrap();
        let feedback = Kernel::perfect_feedback(1, shape).unwrap();
        let cfg = OptimizerConfig::default();
        let r = optimize_upper_bound(&channel, &feedback, &cfg, &Caps::default()).unwrap();
        assert_eq!(r.method, "grid+polish");
        assert!(
            (r.upper_bits_per_use - 0.5310044064107188).abs() < 1e-6,
            "got {}",
            r.upper_bits_per_use
        );
        // The maximizer is the uniform input.
        let row = r.argmax_policy.row(0, 0);
        assert!((row[0] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn ascent_path_matches_grid_path() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(1, 0.1).unwrap();
        let feedback = Kernel::perfect_feedback(1, shape).unwrap();
        let cfg = OptimizerConfig {
            max_grid_evals: 0,
            restarts: 4,
            ..OptimizerConfig::default()
        };
        let r = optimize_upper_bound(&channel, &feedback, &cfg, &Caps::default()).unwrap();
        assert_eq!(r.method, "multiplicative_weights");
        assert!(
            (r.upper_bits_per_use - 0.5310044064107188).abs() < 1e-6,
            "got {}",
            r.upper_bits_per_use
        );
    }

    #[test]
    fn fair_noise_clamps_the_lower_bound() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(1, 0.1).unwrap();
        let noise = crate::kernel::NoiseProcess::binary_flip(1, 0.5).unwrap();
        let feedback = Kernel::additive_feedback(1, shape, &noise).unwrap();
        let r = optimize_upper_bound(
            &channel,
            &feedback,
            &OptimizerConfig::default(),
            &Caps::default(),
        )
        .unwrap();
        let lower = r.lower.unwrap();
        assert!(lower.clamped);
        assert_eq!(lower.value_bits_per_use, 0.0);
        assert!((lower.noise_entropy_bits_per_symbol - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_degenerate_settings() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(1, 0.1).unwrap();
        let feedback = Kernel::perfect_feedback(1, shape).unwrap();
        let cfg = OptimizerConfig {
            grid_resolution: 0,
            ..OptimizerConfig::default()
        };
        assert!(optimize_upper_bound(&channel, &feedback, &cfg, &Caps::default()).is_err());
    }

    #[test]
    fn compositions_cover_the_simplex_grid() {
        let c = compositions(4, 3);
        assert_eq!(c.len() as u128, binomial(6, 2));
        assert!(c.iter().all(|v| v.iter().sum::<usize>() == 4));
        let mut sorted = c.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), c.len());
    }
}
