//! Time-indexed stochastic kernels.
//!
//! A [`Kernel`] holds one row-stochastic table per time step. Row indices are
//! mixed-radix history codes (earliest symbol most significant, see
//! [`crate::alphabet`]); which symbols make up a history is fixed by the
//! kernel's role:
//!
//! | role     | output at time i | conditioned on                      |
//! |----------|------------------|-------------------------------------|
//! | channel  | `y_i`            | `x_1..x_i`, then `y_1..y_{i-1}`     |
//! | feedback | `z_i`            | `y_1..y_i`, then `z_1..z_{i-1}`     |
//! | policy   | `x_i`            | `x_1..x_{i-1}`, then `z_1..z_{i-1}` |
//!
//! Each block is ordered by time with the earliest symbol most significant.
//! The concatenation order (first block, then second) is likewise part of the
//! table format.

use crate::alphabet::HistoryIndex;
use crate::error::{Error, Result};

/// Row-sum tolerance for a valid kernel table.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRole {
    Channel,
    Feedback,
    Policy,
}

impl KernelRole {
    pub fn label(&self) -> &'static str {
        match self {
            KernelRole::Channel => "channel",
            KernelRole::Feedback => "feedback",
            KernelRole::Policy => "policy",
        }
    }
}

/// Alphabet sizes a kernel's histories are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemShape {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl SystemShape {
    pub fn new(x: usize, y: usize, z: usize) -> Result<Self> {
        if x == 0 || y == 0 || z == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Self { x, y, z })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    role: KernelRole,
    shape: SystemShape,
    horizon: usize,
    /// `tables[t][history][symbol]`, `t` zero-based (time `t + 1`).
    tables: Vec<Vec<Vec<f64>>>,
}

impl Kernel {
    /// Validate and wrap raw tables. Row counts must match the role's history
    /// layout exactly and every row must be a probability vector.
    pub fn new(role: KernelRole, shape: SystemShape, tables: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let horizon = tables.len();
        if horizon == 0 {
            return Err(Error::InvalidParameter(
                "kernel needs at least one time step".into(),
            ));
        }
        let k = Self {
            role,
            shape,
            horizon,
            tables,
        };
        k.validate()?;
        Ok(k)
    }

    /// Same as [`Kernel::new`] without the validation pass. For internal hot
    /// paths that construct rows already normalized.
    pub(crate) fn from_tables_unchecked(
        role: KernelRole,
        shape: SystemShape,
        tables: Vec<Vec<Vec<f64>>>,
    ) -> Self {
        let horizon = tables.len();
        Self {
            role,
            shape,
            horizon,
            tables,
        }
    }

    fn validate(&self) -> Result<()> {
        let out = self.out_size();
        for t in 0..self.horizon {
            let expect = self.history_count(t);
            let got = self.tables[t].len();
            if got != expect {
                return Err(Error::DimensionMismatch(format!(
                    "{} table at time {} has {} rows, expected {} (first missing history index {})",
                    self.role.label(),
                    t + 1,
                    got,
                    expect,
                    got.min(expect)
                )));
            }
            for (h, row) in self.tables[t].iter().enumerate() {
                if row.len() != out {
                    return Err(Error::DimensionMismatch(format!(
                        "{} row {} at time {} has {} entries, expected {}",
                        self.role.label(),
                        h,
                        t + 1,
                        row.len(),
                        out
                    )));
                }
                let mut sum = 0.0;
                for &p in row {
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::BadProbability {
                            time: t + 1,
                            history: h,
                            value: p,
                        });
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::UnnormalizedRow {
                        time: t + 1,
                        history: h,
                        sum,
                        tol: ROW_SUM_TOL,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn role(&self) -> KernelRole {
        self.role
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Size of the output alphabet this kernel draws from.
    pub fn out_size(&self) -> usize {
        match self.role {
            KernelRole::Channel => self.shape.y,
            KernelRole::Feedback => self.shape.z,
            KernelRole::Policy => self.shape.x,
        }
    }

    /// Radices of the history at zero-based time `t`, in row-index order.
    pub fn history_radices(&self, t: usize) -> Vec<usize> {
        let i = t + 1;
        let (first, first_len, second, second_len) = match self.role {
            KernelRole::Channel => (self.shape.x, i, self.shape.y, i - 1),
            KernelRole::Feedback => (self.shape.y, i, self.shape.z, i - 1),
            KernelRole::Policy => (self.shape.x, i - 1, self.shape.z, i - 1),
        };
        let mut radices = vec![first; first_len];
        radices.extend(std::iter::repeat(second).take(second_len));
        radices
    }

    /// Number of history rows at zero-based time `t`.
    pub fn history_count(&self, t: usize) -> usize {
        HistoryIndex::capacity(&self.history_radices(t))
    }

    /// Combine the two prefix codes into a row index at zero-based time `t`.
    ///
    /// `first` is the code of the leading block (inputs for channel/policy
    /// histories, outputs for feedback histories) and `second` the code of the
    /// trailing block; both use the radix conventions of
    /// [`Kernel::history_radices`].
    #[inline]
    pub fn history_code(&self, t: usize, first: usize, second: usize) -> usize {
        let i = t + 1;
        let (second_size, second_len) = match self.role {
            KernelRole::Channel => (self.shape.y, i - 1),
            KernelRole::Feedback => (self.shape.z, i - 1),
            KernelRole::Policy => (self.shape.z, i - 1),
        };
        first * second_size.pow(second_len as u32) + second
    }

    #[inline]
    pub fn prob(&self, t: usize, history: usize, symbol: usize) -> f64 {
        self.tables[t][history][symbol]
    }

    pub fn row(&self, t: usize, history: usize) -> &[f64] {
        &self.tables[t][history]
    }

    pub fn tables(&self) -> &[Vec<Vec<f64>>] {
        &self.tables
    }

    // ---- constructors for common pieces -----------------------------------

    /// Memoryless channel from a single-letter matrix `p(y|x)`, repeated at
    /// every time step and every history.
    pub fn memoryless_channel(n: usize, shape: SystemShape, matrix: &[Vec<f64>]) -> Result<Self> {
        if matrix.len() != shape.x {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} input rows, alphabet has {}",
                matrix.len(),
                shape.x
            )));
        }
        let mut tables = Vec::with_capacity(n);
        for t in 0..n {
            let radices_tail = shape.y.pow(t as u32);
            let rows = shape.x.pow((t + 1) as u32) * radices_tail;
            let mut table = Vec::with_capacity(rows);
            for h in 0..rows {
                // x_i is the last digit of the input block.
                let x_i = (h / radices_tail) % shape.x;
                table.push(matrix[x_i].clone());
            }
            tables.push(table);
        }
        Kernel::new(KernelRole::Channel, shape, tables)
    }

    /// Binary symmetric channel with crossover `alpha`, memoryless.
    pub fn bsc_channel(n: usize, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "crossover {alpha} outside [0, 1]"
            )));
        }
        let shape = SystemShape::new(2, 2, 2)?;
        let matrix = vec![vec![1.0 - alpha, alpha], vec![alpha, 1.0 - alpha]];
        Self::memoryless_channel(n, shape, &matrix)
    }

    /// Perfect feedback: `z_i = y_i` with probability one.
    pub fn perfect_feedback(n: usize, shape: SystemShape) -> Result<Self> {
        if shape.z != shape.y {
            return Err(Error::DimensionMismatch(format!(
                "perfect feedback needs |Z| = |Y|, got {} and {}",
                shape.z, shape.y
            )));
        }
        let mut tables = Vec::with_capacity(n);
        for t in 0..n {
            let tail = shape.z.pow(t as u32);
            let rows = shape.y.pow((t + 1) as u32) * tail;
            let mut table = Vec::with_capacity(rows);
            for h in 0..rows {
                let y_i = (h / tail) % shape.y;
                let mut row = vec![0.0; shape.z];
                row[y_i] = 1.0;
                table.push(row);
            }
            tables.push(table);
        }
        Kernel::new(KernelRole::Feedback, shape, tables)
    }

    /// Feedback through independent additive noise: `z_i = y_i + v_i mod |Z|`
    /// with `v_i` drawn from `noise` given the past noise symbols.
    pub fn additive_feedback(n: usize, shape: SystemShape, noise: &NoiseProcess) -> Result<Self> {
        if shape.z != shape.y {
            return Err(Error::DimensionMismatch(format!(
                "additive feedback needs |Z| = |Y|, got {} and {}",
                shape.z, shape.y
            )));
        }
        if noise.alphabet() != shape.z {
            return Err(Error::DimensionMismatch(format!(
                "noise alphabet {} does not match |Z| = {}",
                noise.alphabet(),
                shape.z
            )));
        }
        if noise.horizon() < n {
            return Err(Error::HorizonMismatch(format!(
                "noise horizon {} shorter than {}",
                noise.horizon(),
                n
            )));
        }
        let s = shape.z;
        let mut tables = Vec::with_capacity(n);
        for t in 0..n {
            let radices = {
                let mut r = vec![shape.y; t + 1];
                r.extend(std::iter::repeat(s).take(t));
                r
            };
            let rows = HistoryIndex::capacity(&radices);
            let mut table = Vec::with_capacity(rows);
            for h in 0..rows {
                let digits = HistoryIndex::decode(&radices, h)?.digits();
                let (ys, zs) = digits.split_at(t + 1);
                let y_i = ys[t];
                // Recover the noise history v_j = z_j - y_j mod s.
                let mut v_hist = 0usize;
                for j in 0..t {
                    let v_j = (zs[j] + s - ys[j]) % s;
                    v_hist = v_hist * s + v_j;
                }
                let mut row = vec![0.0; s];
                for (z_i, slot) in row.iter_mut().enumerate() {
                    let v_i = (z_i + s - y_i) % s;
                    *slot = noise.prob(t, v_hist, v_i);
                }
                table.push(row);
            }
            tables.push(table);
        }
        Kernel::new(KernelRole::Feedback, shape, tables)
    }

    /// Policy that ignores all history: `p(x_i) = dist` at every step.
    pub fn iid_policy(n: usize, shape: SystemShape, dist: &[f64]) -> Result<Self> {
        if dist.len() != shape.x {
            return Err(Error::DimensionMismatch(format!(
                "distribution over {} symbols for |X| = {}",
                dist.len(),
                shape.x
            )));
        }
        let mut tables = Vec::with_capacity(n);
        for t in 0..n {
            let rows = (shape.x * shape.z).pow(t as u32);
            tables.push(vec![dist.to_vec(); rows]);
        }
        Kernel::new(KernelRole::Policy, shape, tables)
    }

    /// Uniform policy over the input alphabet.
    pub fn uniform_policy(n: usize, shape: SystemShape) -> Result<Self> {
        let dist = vec![1.0 / shape.x as f64; shape.x];
        Self::iid_policy(n, shape, &dist)
    }

    // ---- structural probes -------------------------------------------------

    /// If the channel is memoryless and time invariant, return the
    /// single-letter matrix `p(y|x)`; otherwise `None`.
    pub fn memoryless_matrix(&self) -> Option<Vec<Vec<f64>>> {
        if self.role != KernelRole::Channel {
            return None;
        }
        let mut matrix: Vec<Option<Vec<f64>>> = vec![None; self.shape.x];
        for t in 0..self.horizon {
            let tail = self.shape.y.pow(t as u32);
            for (h, row) in self.tables[t].iter().enumerate() {
                let x_i = (h / tail) % self.shape.x;
                match &matrix[x_i] {
                    None => matrix[x_i] = Some(row.clone()),
                    Some(seen) => {
                        let same = seen
                            .iter()
                            .zip(row)
                            .all(|(a, b)| (a - b).abs() <= ROW_SUM_TOL);
                        if !same {
                            return None;
                        }
                    }
                }
            }
        }
        matrix.into_iter().collect()
    }

    /// If the feedback link is `z_i = y_i + v_i mod |Z|` with noise
    /// independent of the output sequence, recover the noise process.
    pub fn additive_noise_decomposition(&self) -> Option<NoiseProcess> {
        if self.role != KernelRole::Feedback || self.shape.z != self.shape.y {
            return None;
        }
        let s = self.shape.z;
        let mut tables: Vec<Vec<Vec<f64>>> = Vec::with_capacity(self.horizon);
        for t in 0..self.horizon {
            let v_rows = s.pow(t as u32);
            let mut noise_rows: Vec<Option<Vec<f64>>> = vec![None; v_rows];
            let radices = {
                let mut r = vec![self.shape.y; t + 1];
                r.extend(std::iter::repeat(s).take(t));
                r
            };
            for (h, row) in self.tables[t].iter().enumerate() {
                let digits = HistoryIndex::decode(&radices, h).ok()?.digits();
                let (ys, zs) = digits.split_at(t + 1);
                let y_i = ys[t];
                let mut v_hist = 0usize;
                for j in 0..t {
                    v_hist = v_hist * s + (zs[j] + s - ys[j]) % s;
                }
                let mut v_row = vec![0.0; s];
                for v_i in 0..s {
                    v_row[v_i] = row[(y_i + v_i) % s];
                }
                match &noise_rows[v_hist] {
                    None => noise_rows[v_hist] = Some(v_row),
                    Some(seen) => {
                        let same = seen.iter().zip(&v_row).all(|(a, b)| (a - b).abs() <= 1e-9);
                        if !same {
                            return None;
                        }
                    }
                }
            }
            let table: Option<Vec<Vec<f64>>> = noise_rows.into_iter().collect();
            tables.push(table?);
        }
        NoiseProcess::new(s, tables).ok()
    }

    /// True when no policy row depends on the feedback block of its history.
    pub fn ignores_feedback(&self) -> bool {
        if self.role != KernelRole::Policy {
            return false;
        }
        for t in 0..self.horizon {
            let z_block = self.shape.z.pow(t as u32);
            let x_block = self.shape.x.pow(t as u32);
            for xh in 0..x_block {
                let first = &self.tables[t][xh * z_block];
                for zh in 1..z_block {
                    let row = &self.tables[t][xh * z_block + zh];
                    if first
                        .iter()
                        .zip(row)
                        .any(|(a, b)| (a - b).abs() > ROW_SUM_TOL)
                    {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A noise process `p(v_i | v^{i-1})` on its own alphabet, independent of the
/// rest of the system. Used to describe additive feedback links and to give
/// lower bounds their entropy term.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProcess {
    alphabet: usize,
    /// `tables[t][v_history][v]`, history mixed-radix earliest-first.
    tables: Vec<Vec<Vec<f64>>>,
}

impl NoiseProcess {
    pub fn new(alphabet: usize, tables: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::EmptyAlphabet);
        }
        for (t, table) in tables.iter().enumerate() {
            let expect = alphabet.pow(t as u32);
            if table.len() != expect {
                return Err(Error::DimensionMismatch(format!(
                    "noise table at time {} has {} rows, expected {}",
                    t + 1,
                    table.len(),
                    expect
                )));
            }
            for (h, row) in table.iter().enumerate() {
                if row.len() != alphabet {
                    return Err(Error::DimensionMismatch(format!(
                        "noise row {} at time {} has {} entries, expected {}",
                        h,
                        t + 1,
                        row.len(),
                        alphabet
                    )));
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                    return Err(Error::BadProbability {
                        time: t + 1,
                        history: h,
                        value: *row.iter().find(|&&p| !p.is_finite() || p < 0.0).unwrap(),
                    });
                }
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::UnnormalizedRow {
                        time: t + 1,
                        history: h,
                        sum,
                        tol: ROW_SUM_TOL,
                    });
                }
            }
        }
        Ok(Self { alphabet, tables })
    }

    /// Independent and identically distributed noise.
    pub fn iid(n: usize, dist: &[f64]) -> Result<Self> {
        let alphabet = dist.len();
        let mut tables = Vec::with_capacity(n);
        for t in 0..n {
            tables.push(vec![dist.to_vec(); alphabet.pow(t as u32)]);
        }
        Self::new(alphabet, tables)
    }

    /// Binary flip noise: `v = 1` with probability `beta`.
    pub fn binary_flip(n: usize, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "flip probability {beta} outside [0, 1]"
            )));
        }
        Self::iid(n, &[1.0 - beta, beta])
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn horizon(&self) -> usize {
        self.tables.len()
    }

    #[inline]
    pub fn prob(&self, t: usize, v_history: usize, v: usize) -> f64 {
        self.tables[t][v_history][v]
    }

    pub fn row(&self, t: usize, v_history: usize) -> &[f64] {
        &self.tables[t][v_history]
    }

    /// Exact `H(V^n)` in bits over the first `n` steps.
    pub fn block_entropy_bits(&self, n: usize) -> Result<f64> {
        if n > self.horizon() {
            return Err(Error::HorizonMismatch(format!(
                "requested {} steps of a horizon-{} noise process",
                n,
                self.horizon()
            )));
        }
        // H(V^n) = sum_i E[H(V_i | V^{i-1})]; walk histories with their
        // probabilities.
        let s = self.alphabet;
        let mut total = 0.0;
        let mut hist_probs = vec![1.0f64]; // p(v^0) = 1
        for t in 0..n {
            let mut row_entropy = 0.0;
            let mut next = vec![0.0f64; s.pow((t + 1) as u32)];
            for (h, &ph) in hist_probs.iter().enumerate() {
                if ph == 0.0 {
                    continue;
                }
                let row = &self.tables[t][h];
                let mut hrow = 0.0;
                for (v, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        hrow -= p * p.log2();
                        next[h * s + v] = ph * p;
                    }
                }
                row_entropy += ph * hrow;
            }
            total += row_entropy;
            hist_probs = next;
        }
        Ok(total)
    }
}

/// Binary entropy in bits. `h2(0) = h2(1) = 0`.
pub fn binary_entropy_bits(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_shape() -> SystemShape {
        SystemShape::new(2, 2, 2).unwrap()
    }

    #[test]
    fn bsc_tables_have_role_shaped_rows() {
        let k = Kernel::bsc_channel(3, 0.1).unwrap();
        // time i: |X|^i * |Y|^{i-1} rows.
        assert_eq!(k.tables()[0].len(), 2);
        assert_eq!(k.tables()[1].len(), 8);
        assert_eq!(k.tables()[2].len(), 32);
        for t in 0..3 {
            for h in 0..k.history_count(t) {
                let s: f64 = k.row(t, h).iter().sum();
                assert!((s - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unnormalized_row_is_rejected_with_location() {
        let shape = binary_shape();
        let tables = vec![vec![vec![0.6, 0.5], vec![0.5, 0.5]]];
        let err = Kernel::new(KernelRole::Channel, shape, tables).unwrap_err();
        match err {
            Error::UnnormalizedRow { time, history, .. } => {
                assert_eq!(time, 1);
                assert_eq!(history, 0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn wrong_row_count_is_rejected() {
        let shape = binary_shape();
        // time 2 channel table needs 8 rows, give 4.
        let t1 = vec![vec![0.5, 0.5]; 2];
        let t2 = vec![vec![0.5, 0.5]; 4];
        let err = Kernel::new(KernelRole::Channel, shape, vec![t1, t2]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn history_code_matches_explicit_encoding() {
        let k = Kernel::bsc_channel(3, 0.2).unwrap();
        // time 3 history (x1,x2,x3, y1,y2) = (1,0,1, 1,0).
        let radices = k.history_radices(2);
        assert_eq!(radices, vec![2, 2, 2, 2, 2]);
        let full = HistoryIndex::encode(&radices, &[1, 0, 1, 1, 0])
            .unwrap()
            .code();
        let x_code = HistoryIndex::encode(&[2, 2, 2], &[1, 0, 1]).unwrap().code();
        let y_code = HistoryIndex::encode(&[2, 2], &[1, 0]).unwrap().code();
        assert_eq!(k.history_code(2, x_code, y_code), full);
    }

    #[test]
    fn perfect_feedback_is_deterministic_copy() {
        let k = Kernel::perfect_feedback(2, binary_shape()).unwrap();
        // time 2, history (y1,y2,z1) = (0,1,0): copies y2 = 1.
        let h = HistoryIndex::encode(&[2, 2, 2], &[0, 1, 0]).unwrap().code();
        assert_eq!(k.prob(1, h, 0), 0.0);
        assert_eq!(k.prob(1, h, 1), 1.0);
    }

    #[test]
    fn additive_feedback_round_trips_through_decomposition() {
        let noise = NoiseProcess::binary_flip(3, 0.1).unwrap();
        let k = Kernel::additive_feedback(3, binary_shape(), &noise).unwrap();
        let back = k.additive_noise_decomposition().expect("additive");
        for t in 0..3 {
            for h in 0..2usize.pow(t as u32) {
                for v in 0..2 {
                    assert!((back.prob(t, h, v) - noise.prob(t, h, v)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn perfect_feedback_decomposes_to_zero_noise() {
        let k = Kernel::perfect_feedback(2, binary_shape()).unwrap();
        let noise = k.additive_noise_decomposition().expect("additive");
        assert_eq!(noise.prob(0, 0, 0), 1.0);
        assert_eq!(noise.prob(0, 0, 1), 0.0);
        assert!((noise.block_entropy_bits(2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn history_dependent_feedback_is_not_additive() {
        let shape = binary_shape();
        // z1 copies y1; at time 2 the flip probability depends on y1, which an
        // independent additive description cannot express.
        let t1 = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let mut t2 = Vec::new();
        for h in 0..8 {
            let digits = HistoryIndex::decode(&[2, 2, 2], h).unwrap().digits();
            let (y1, y2) = (digits[0], digits[1]);
            let beta = if y1 == 0 { 0.1 } else { 0.3 };
            let mut row = vec![0.0, 0.0];
            row[y2] = 1.0 - beta;
            row[1 - y2] = beta;
            t2.push(row);
        }
        let k = Kernel::new(KernelRole::Feedback, shape, vec![t1, t2]).unwrap();
        assert!(k.additive_noise_decomposition().is_none());
    }

    #[test]
    fn memoryless_probe_accepts_bsc_rejects_history_dependence() {
        let k = Kernel::bsc_channel(2, 0.1).unwrap();
        let m = k.memoryless_matrix().expect("memoryless");
        assert!((m[0][0] - 0.9).abs() < 1e-15);
        assert!((m[1][0] - 0.1).abs() < 1e-15);

        let shape = binary_shape();
        let t1 = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
        let mut t2 = vec![vec![0.9, 0.1]; 8];
        t2[3] = vec![0.2, 0.8]; // depends on more than x_2
        let k2 = Kernel::new(KernelRole::Channel, shape, vec![t1, t2]).unwrap();
        assert!(k2.memoryless_matrix().is_none());
    }

    #[test]
    fn iid_policy_ignores_feedback() {
        let k = Kernel::uniform_policy(3, binary_shape()).unwrap();
        assert!(k.ignores_feedback());
    }

    #[test]
    fn block_entropy_of_iid_flip_noise() {
        let noise = NoiseProcess::binary_flip(3, 0.1).unwrap();
        let h = noise.block_entropy_bits(3).unwrap();
        assert!((h - 3.0 * binary_entropy_bits(0.1)).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_known_points() {
        assert_eq!(binary_entropy_bits(0.0), 0.0);
        assert_eq!(binary_entropy_bits(1.0), 0.0);
        assert!((binary_entropy_bits(0.5) - 1.0).abs() < 1e-15);
        // Oracle for later tests: H(0.1) and H(0.05).
        assert!((binary_entropy_bits(0.1) - 0.46899559358928117).abs() < 1e-15);
        assert!((binary_entropy_bits(0.05) - 0.28639695711595625).abs() < 1e-15);
    }
}
