//! Code-functions: deterministic maps from feedback histories to inputs.
//!
//! A code-function sequence fixes, for every time step, the input symbol to
//! send for each possible feedback history. A message encoder is a set of
//! such sequences, one per message. Randomizing over code-function sequences
//! with the right product distribution reproduces any given input policy;
//! this module enumerates the sequences, builds that distribution, and checks
//! the exact identities that make the representation trustworthy.

use crate::error::{Error, Result};
use crate::joint::{build_joint_fxyz, Caps, JointTable};
use crate::kernel::{Kernel, KernelRole};
use crate::measures::{causal_conditional_directed_information, mutual_information, DensityTable};

/// One deterministic input map per time step: `tables[t][z_history] = x`.
///
/// The table at zero-based time `t` has `|Z|^t` entries, indexed by the
/// mixed-radix code of `z_1..z_t` (earliest most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeFunction {
    x_size: usize,
    z_size: usize,
    tables: Vec<Vec<usize>>,
}

impl CodeFunction {
    pub fn new(x_size: usize, z_size: usize, tables: Vec<Vec<usize>>) -> Result<Self> {
        if x_size == 0 || z_size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        for (t, table) in tables.iter().enumerate() {
            let expect = z_size.pow(t as u32);
            if table.len() != expect {
                return Err(Error::DimensionMismatch(format!(
                    "code-function table at time {} has {} entries, expected {}",
                    t + 1,
                    table.len(),
                    expect
                )));
            }
            if let Some(&bad) = table.iter().find(|&&x| x >= x_size) {
                return Err(Error::InvalidParameter(format!(
                    "code-function emits symbol {bad} outside alphabet of size {x_size}"
                )));
            }
        }
        Ok(Self {
            x_size,
            z_size,
            tables,
        })
    }

    /// Constant map: ignores feedback, sends `symbols[t]` at time `t + 1`.
    pub fn constant(x_size: usize, z_size: usize, symbols: &[usize]) -> Result<Self> {
        let tables = symbols
            .iter()
            .enumerate()
            .map(|(t, &s)| vec![s; z_size.pow(t as u32)])
            .collect();
        Self::new(x_size, z_size, tables)
    }

    /// Sends 0 everywhere except at `pivot_time` (one-based, >= 2), where it
    /// sends 1 exactly when the last feedback symbol equals `watch`.
    /// Requires a binary-or-larger input alphabet.
    pub fn single_switch(
        x_size: usize,
        z_size: usize,
        n: usize,
        pivot_time: usize,
        watch: usize,
    ) -> Result<Self> {
        if x_size < 2 {
            return Err(Error::InvalidParameter(
                "single-switch maps need |X| >= 2".into(),
            ));
        }
        if pivot_time < 2 || pivot_time > n {
            return Err(Error::InvalidParameter(format!(
                "pivot time {pivot_time} outside 2..={n}"
            )));
        }
        if watch >= z_size {
            return Err(Error::InvalidParameter(format!(
                "watched symbol {watch} outside alphabet of size {z_size}"
            )));
        }
        let mut tables: Vec<Vec<usize>> =
            (0..n).map(|t| vec![0usize; z_size.pow(t as u32)]).collect();
        let t = pivot_time - 1;
        for (code, slot) in tables[t].iter_mut().enumerate() {
            let last = code % z_size;
            *slot = usize::from(last == watch);
        }
        Self::new(x_size, z_size, tables)
    }

    pub fn horizon(&self) -> usize {
        self.tables.len()
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    /// Input symbol at zero-based time `t` for the feedback history code.
    #[inline]
    pub fn evaluate(&self, t: usize, z_history: usize) -> usize {
        self.tables[t][z_history]
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.tables
    }

    /// True when no table entry depends on its feedback history.
    pub fn is_open_loop(&self) -> bool {
        self.tables
            .iter()
            .all(|table| table.iter().all(|&x| x == table[0]))
    }

    /// Number of distinct time-`t` maps (zero-based `t`): `|X|^(|Z|^t)`.
    /// `None` on overflow.
    pub fn time_map_count(x_size: usize, z_size: usize, t: usize) -> Option<usize> {
        let slots = z_size.checked_pow(t as u32)?;
        let mut count: usize = 1;
        for _ in 0..slots {
            count = count.checked_mul(x_size)?;
        }
        Some(count)
    }

    /// Total number of horizon-`n` code-function sequences. `None` on
    /// overflow of `u128`.
    pub fn sequence_count(n: usize, x_size: usize, z_size: usize) -> Option<u128> {
        let mut total: u128 = 1;
        for t in 0..n {
            let c = Self::time_map_count(x_size, z_size, t)? as u128;
            total = total.checked_mul(c)?;
        }
        Some(total)
    }

    /// Decode the canonical index of a single time-`t` map into its table.
    /// Slot 0 (the all-zero history) is most significant, symbols are the
    /// digits.
    pub fn map_from_index(x_size: usize, z_size: usize, t: usize, index: usize) -> Vec<usize> {
        let slots = z_size.pow(t as u32);
        let mut table = vec![0usize; slots];
        let mut c = index;
        for slot in (0..slots).rev() {
            table[slot] = c % x_size;
            c /= x_size;
        }
        table
    }

    /// Canonical index of this function's time-`t` map.
    pub fn map_index(&self, t: usize) -> usize {
        let mut idx = 0usize;
        for &x in &self.tables[t] {
            idx = idx * self.x_size + x;
        }
        idx
    }

    /// Canonical index of the whole sequence: mixed radix over per-time map
    /// indices, time 1 most significant.
    pub fn sequence_index(&self) -> usize {
        let mut idx = 0usize;
        for t in 0..self.horizon() {
            let radix = Self::time_map_count(self.x_size, self.z_size, t)
                .expect("map count fits in usize for enumerable sizes");
            idx = idx * radix + self.map_index(t);
        }
        idx
    }
}

/// Eagerly enumerate all horizon-`n` code-function sequences in canonical
/// order (lexicographic by time, then by z-history slot, then by symbol).
pub fn enumerate_code_functions(
    n: usize,
    x_size: usize,
    z_size: usize,
    caps: &Caps,
) -> Result<Vec<CodeFunction>> {
    if n == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let total = CodeFunction::sequence_count(n, x_size, z_size).ok_or_else(|| {
        Error::CapExceeded(format!(
            "code-function count overflows for n={n}, |X|={x_size}, |Z|={z_size}"
        ))
    })?;
    if total > caps.max_code_functions as u128 {
        return Err(Error::CapExceeded(format!(
            "{total} code-function sequences exceed the cap of {}",
            caps.max_code_functions
        )));
    }
    let total = total as usize;
    let radices: Vec<usize> = (0..n)
        .map(|t| CodeFunction::time_map_count(x_size, z_size, t).unwrap())
        .collect();
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut c = idx;
        let mut map_indices = vec![0usize; n];
        for t in (0..n).rev() {
            map_indices[t] = c % radices[t];
            c /= radices[t];
        }
        let tables: Vec<Vec<usize>> = (0..n)
            .map(|t| CodeFunction::map_from_index(x_size, z_size, t, map_indices[t]))
            .collect();
        out.push(CodeFunction::new(x_size, z_size, tables)?);
    }
    Ok(out)
}

/// A deterministic encoder: one code-function sequence per message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageEncoder {
    functions: Vec<CodeFunction>,
}

impl MessageEncoder {
    pub fn new(functions: Vec<CodeFunction>) -> Result<Self> {
        let first = functions
            .first()
            .ok_or_else(|| Error::InvalidParameter("encoder needs at least one message".into()))?;
        let (h, x, z) = (first.horizon(), first.x_size(), first.z_size());
        for f in &functions {
            if f.horizon() != h || f.x_size() != x || f.z_size() != z {
                return Err(Error::DimensionMismatch(
                    "all code-function sequences in an encoder must share shape".into(),
                ));
            }
        }
        Ok(Self { functions })
    }

    pub fn message_count(&self) -> usize {
        self.functions.len()
    }

    pub fn horizon(&self) -> usize {
        self.functions[0].horizon()
    }

    pub fn x_size(&self) -> usize {
        self.functions[0].x_size()
    }

    pub fn z_size(&self) -> usize {
        self.functions[0].z_size()
    }

    pub fn function(&self, message: usize) -> &CodeFunction {
        &self.functions[message]
    }

    pub fn functions(&self) -> &[CodeFunction] {
        &self.functions
    }

    pub fn is_open_loop(&self) -> bool {
        self.functions.iter().all(CodeFunction::is_open_loop)
    }

    /// Encoder whose messages are fixed codewords, one per message.
    pub fn from_codewords(x_size: usize, z_size: usize, codewords: &[Vec<usize>]) -> Result<Self> {
        let functions = codewords
            .iter()
            .map(|w| CodeFunction::constant(x_size, z_size, w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(functions)
    }
}

/// A probability vector over the canonical code-function enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeFunctionDistribution {
    horizon: usize,
    x_size: usize,
    z_size: usize,
    probs: Vec<f64>,
}

impl CodeFunctionDistribution {
    pub fn new(horizon: usize, x_size: usize, z_size: usize, probs: Vec<f64>) -> Result<Self> {
        let expect = CodeFunction::sequence_count(horizon, x_size, z_size)
            .ok_or_else(|| Error::CapExceeded("code-function count overflows".into()))?;
        if probs.len() as u128 != expect {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for {} code-function sequences",
                probs.len(),
                expect
            )));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter(
                "code-function probabilities must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "code-function distribution sums to {sum}, expected 1 within 1e-10"
            )));
        }
        Ok(Self {
            horizon,
            x_size,
            z_size,
            probs,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, sequence_index: usize) -> f64 {
        self.probs[sequence_index]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Indices with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (i, p))
    }
}

/// The distribution over code-function sequences that reproduces `policy`:
/// each table slot is filled independently from the policy conditioned on the
/// inputs the sequence itself produces along that feedback branch.
pub fn good_distribution_from_policy(
    policy: &Kernel,
    caps: &Caps,
) -> Result<CodeFunctionDistribution> {
    if policy.role() != KernelRole::Policy {
        return Err(Error::InvalidParameter(
            "good distributions are built from policy kernels".into(),
        ));
    }
    let n = policy.horizon();
    let shape = policy.shape();
    let functions = enumerate_code_functions(n, shape.x, shape.z, caps)?;
    let mut probs = Vec::with_capacity(functions.len());
    for f in &functions {
        probs.push(sequence_weight(policy, f));
    }
    let sum: f64 = probs.iter().sum();
    debug_assert!((sum - 1.0).abs() < 1e-9, "weights sum to {sum}");
    CodeFunctionDistribution::new(n, shape.x, shape.z, probs)
}

/// Policy weight of one code-function sequence: the product over times and
/// feedback branches of the policy probability of the symbol the sequence
/// commits to on that branch.
pub fn sequence_weight(policy: &Kernel, f: &CodeFunction) -> f64 {
    let shape = policy.shape();
    let n = policy.horizon().min(f.horizon());
    let mut weight = 1.0f64;
    for t in 0..n {
        let branches = shape.z.pow(t as u32);
        for z_code in 0..branches {
            // Inputs this sequence already produced along the branch:
            // x_{j+1} = f_{j+1}(z^j), where z^j is the length-j prefix.
            let mut x_code = 0usize;
            for j in 0..t {
                let prefix = z_code / shape.z.pow((t - j) as u32);
                x_code = x_code * shape.x + f.evaluate(j, prefix);
            }
            let hist = policy.history_code(t, x_code, z_code);
            weight *= policy.prob(t, hist, f.evaluate(t, z_code));
            if weight == 0.0 {
                return 0.0;
            }
        }
    }
    weight
}

/// Per-time conditional `p(f_t | f^{t-1})` implied by the policy, computed by
/// the sequential product over that time's branches alone. Used to check the
/// stored vector against its claimed factorization.
pub fn sequential_factor(policy: &Kernel, f: &CodeFunction, t: usize) -> f64 {
    let shape = policy.shape();
    let branches = shape.z.pow(t as u32);
    let mut weight = 1.0f64;
    for z_code in 0..branches {
        let mut x_code = 0usize;
        for j in 0..t {
            let prefix = z_code / shape.z.pow((t - j) as u32);
            x_code = x_code * shape.x + f.evaluate(j, prefix);
        }
        let hist = policy.history_code(t, x_code, z_code);
        weight *= policy.prob(t, hist, f.evaluate(t, z_code));
    }
    weight
}

/// Outcome of the pointwise density identity check on a joint with
/// code-function, input and output variables.
#[derive(Debug, Clone)]
pub struct DensityEqualityCheck {
    /// Largest pointwise `|i(F;Y) - (i(X->Y) - i(X->Y||F))|` over the support.
    pub max_abs_residual: f64,
    /// `I(F^n;Y^n)` from the joint.
    pub mutual_information_bits: f64,
    /// Probability-weighted mean of the residual density.
    pub mean_residual_density_bits: f64,
    /// `|I(F^n;Y^n) - E[residual density]|`.
    pub expectation_residual: f64,
}

/// Check that the code-function information density equals the residual
/// density pointwise on the support:
/// `i(F^n;Y^n) = i(X^n->Y^n) - i(X^n->Y^n||F^n)`.
///
/// The causal conditioning on `F` includes the current step's map (the block
/// `F^i`), matching the time ordering in which `f_i` is fixed before `x_i`.
pub fn verify_density_equality(joint: &JointTable) -> Result<DensityEqualityCheck> {
    let density = residual_density_table(joint)?;
    let layout = density.layout().clone();
    let n = layout.horizon("Y");

    // Independent left side: i(F;Y) per outcome from the (F, Y) marginals.
    let f_group = layout.time_group("F", n)?;
    let y_group = layout.time_group("Y", n)?;
    let fy_group: Vec<usize> = f_group.iter().chain(y_group.iter()).copied().collect();
    let p_f = table_projection(density.table(), &f_group);
    let p_y = table_projection(density.table(), &y_group);
    let p_fy = table_projection(density.table(), &fy_group);

    let mut max_abs = 0.0f64;
    let mut mean_rhs = 0.0f64;
    let mut mi = 0.0f64;
    for (idx, p, rhs) in density.support() {
        let lf = p_f[layout.subcode(idx, &f_group)].log2();
        let ly = p_y[layout.subcode(idx, &y_group)].log2();
        let lfy = p_fy[layout.subcode(idx, &fy_group)].log2();
        let lhs = lfy - lf - ly;
        let r = (lhs - rhs).abs();
        if r > max_abs {
            max_abs = r;
        }
        mi += p * lhs;
        mean_rhs += p * rhs;
    }
    Ok(DensityEqualityCheck {
        max_abs_residual: max_abs,
        mutual_information_bits: mi,
        mean_residual_density_bits: mean_rhs,
        expectation_residual: (mi - mean_rhs).abs(),
    })
}

/// Residual density `i(X^n->Y^n) - i(X^n->Y^n||F^n)` per outcome, over the
/// `(F, X, Y)` marginal of `joint`.
pub fn residual_density_table(joint: &JointTable) -> Result<DensityTable> {
    let src = joint.layout();
    let n = src.horizon("Y");
    if n == 0 || src.horizon("X") != n || src.horizon("F") != n {
        return Err(Error::HorizonMismatch(
            "need matching F, X and Y series to form the residual density".into(),
        ));
    }
    let mut keep: Vec<usize> = Vec::new();
    for i in 1..=n {
        keep.push(src.index_of(&format!("F{i}"))?);
        keep.push(src.index_of(&format!("X{i}"))?);
        keep.push(src.index_of(&format!("Y{i}"))?);
    }
    let table = joint.marginal_by_indices(&keep)?;
    let layout = table.layout();

    // Prefix groups, reused across outcomes.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut push = |g: Vec<usize>| -> usize {
        groups.push(g);
        groups.len() - 1
    };
    let mut g_xy = Vec::new(); // (x^i, y^i)
    let mut g_xy_prev = Vec::new(); // (x^i, y^{i-1})
    let mut g_y = Vec::new(); // y^i
    let mut g_y_prev = Vec::new(); // y^{i-1}
    let mut g_fxy = Vec::new();
    let mut g_fxy_prev = Vec::new();
    let mut g_fy = Vec::new();
    let mut g_fy_prev = Vec::new();
    for i in 1..=n {
        let x_i = layout.time_group("X", i)?;
        let y_i = layout.time_group("Y", i)?;
        let y_im1 = layout.time_group("Y", i - 1)?;
        let f_i = layout.time_group("F", i)?;
        let join =
            |a: &[usize], b: &[usize]| a.iter().chain(b.iter()).copied().collect::<Vec<usize>>();
        g_xy.push(push(join(&x_i, &y_i)));
        g_xy_prev.push(push(join(&x_i, &y_im1)));
        g_y.push(push(y_i.clone()));
        g_y_prev.push(push(y_im1.clone()));
        g_fxy.push(push(join(&f_i, &join(&x_i, &y_i))));
        g_fxy_prev.push(push(join(&f_i, &join(&x_i, &y_im1))));
        g_fy.push(push(join(&f_i, &y_i)));
        g_fy_prev.push(push(join(&f_i, &y_im1)));
    }
    let projections: Vec<Vec<f64>> = groups.iter().map(|g| table_projection(&table, g)).collect();
    let lg = |gi: usize, idx: usize| -> f64 {
        projections[gi][table.layout().subcode(idx, &groups[gi])].log2()
    };

    let mut values = vec![0.0f64; table.probs().len()];
    for (idx, _p) in table.support_probs() {
        let mut v = 0.0f64;
        for i in 0..n {
            // i(X->Y) term: lg p(y_i | x^i, y^{i-1}) - lg p(y_i | y^{i-1})
            v += lg(g_xy[i], idx) - lg(g_xy_prev[i], idx);
            v -= lg(g_y[i], idx) - lg(g_y_prev[i], idx);
            // minus i(X->Y||F) term
            v -= lg(g_fxy[i], idx) - lg(g_fxy_prev[i], idx);
            v += lg(g_fy[i], idx) - lg(g_fy_prev[i], idx);
        }
        values[idx] = v;
    }
    DensityTable::new(table, values)
}

fn table_projection(table: &JointTable, group: &[usize]) -> Vec<f64> {
    table.project(group)
}

/// Outcome of the expectation-level decomposition check
/// `I(F^n;Y^n) = I(X^n->Y^n||Z^n) - I(F^n;Z^n|Y^n)`.
#[derive(Debug, Clone)]
pub struct CodefnDecompositionCheck {
    pub mutual_information_bits: f64,
    pub causal_conditioned_bits: f64,
    pub leaked_bits: f64,
    pub residual: f64,
}

/// Check the decomposition on a joint carrying `F`, `X`, `Y` and `Z` series.
/// Each of the three terms is computed independently from the joint.
pub fn verify_codefn_information_decomposition(
    joint: &JointTable,
) -> Result<CodefnDecompositionCheck> {
    let layout = joint.layout();
    let n = layout.horizon("Y");
    let f_group = layout.time_group("F", n)?;
    let y_group = layout.time_group("Y", n)?;
    let z_group = layout.time_group("Z", n)?;
    let mi = mutual_information(joint, &f_group, &y_group, &[])?;
    let causal = causal_conditional_directed_information(joint, "X", "Y", "Z")?;
    let leaked = mutual_information(joint, &f_group, &z_group, &y_group)?;
    Ok(CodefnDecompositionCheck {
        mutual_information_bits: mi,
        causal_conditioned_bits: causal,
        leaked_bits: leaked,
        residual: (mi - (causal - leaked)).abs(),
    })
}

/// Quantile summary of the per-symbol residual density for a policy-driven
/// code-function ensemble.
#[derive(Debug, Clone)]
pub struct ResidualDensityReport {
    pub horizon: usize,
    /// Requested quantiles of the residual density divided by the horizon.
    pub quantiles_per_symbol: Vec<(f64, f64)>,
    /// Probability-weighted mean of the unscaled residual density; equals
    /// `I(F^n;Y^n)`.
    pub mean_bits: f64,
    pub density: DensityTable,
}

/// Build the good distribution for `policy`, form the joint with the channel
/// and feedback link, and summarize the residual density at the requested
/// quantiles (per symbol, i.e. divided by the horizon).
pub fn residual_density_statistics(
    policy: &Kernel,
    channel: &Kernel,
    feedback: &Kernel,
    quantiles: &[f64],
    caps: &Caps,
) -> Result<ResidualDensityReport> {
    let dist = good_distribution_from_policy(policy, caps)?;
    let joint = build_joint_fxyz(&dist, channel, feedback, caps)?;
    let density = residual_density_table(&joint)?;
    let n = policy.horizon();
    let mut qs = Vec::with_capacity(quantiles.len());
    for &q in quantiles {
        qs.push((q, density.quantile(q)? / n as f64));
    }
    Ok(ResidualDensityReport {
        horizon: n,
        quantiles_per_symbol: qs,
        mean_bits: density.mean_bits(),
        density,
    })
}

/// Default quantiles reported for residual densities.
pub const DEFAULT_RESIDUAL_QUANTILES: [f64; 3] = [0.01, 0.05, 0.5];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joint::Caps;
    use crate::kernel::SystemShape;

    #[test]
    fn sequence_counts_for_binary_alphabets() {
        // Oracle: prod_i |X|^(|Z|^(i-1)) = 2, 2*4, 2*4*16.
        assert_eq!(CodeFunction::sequence_count(1, 2, 2), Some(2));
        assert_eq!(CodeFunction::sequence_count(2, 2, 2), Some(8));
        assert_eq!(CodeFunction::sequence_count(3, 2, 2), Some(128));
    }

    #[test]
    fn enumeration_matches_count_and_is_canonical() {
        let caps = Caps::default();
        for n in 1..=3 {
            let fns = enumerate_code_functions(n, 2, 2, &caps).unwrap();
            assert_eq!(
                fns.len() as u128,
                CodeFunction::sequence_count(n, 2, 2).unwrap()
            );
            for (i, f) in fns.iter().enumerate() {
                assert_eq!(f.sequence_index(), i, "enumeration order is canonical");
            }
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let caps = Caps {
            max_code_functions: 100,
            ..Caps::default()
        };
        assert!(matches!(
            enumerate_code_functions(3, 2, 2, &caps),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn map_index_round_trip() {
        for t in 0..3 {
            let count = CodeFunction::time_map_count(2, 2, t).unwrap();
            for idx in 0..count {
                let table = CodeFunction::map_from_index(2, 2, t, idx);
                let f = CodeFunction::new(2, 2, {
                    let mut tables: Vec<Vec<usize>> =
                        (0..t).map(|s| vec![0; 2usize.pow(s as u32)]).collect();
                    tables.push(table);
                    tables
                })
                .unwrap();
                assert_eq!(f.map_index(t), idx);
            }
        }
    }

    #[test]
    fn constant_functions_are_open_loop_switches_are_not() {
        let c = CodeFunction::constant(2, 2, &[1, 0, 1]).unwrap();
        assert!(c.is_open_loop());
        let s = CodeFunction::single_switch(2, 2, 3, 2, 1).unwrap();
        assert!(!s.is_open_loop());
        // The switch reacts to z_1 at time 2.
        assert_eq!(s.evaluate(1, 0), 0);
        assert_eq!(s.evaluate(1, 1), 1);
    }

    #[test]
    fn good_distribution_normalizes_for_random_policies() {
        use crate::rng::SplitMix64;
        let caps = Caps::default();
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let mut rng = SplitMix64::new(2024);
        for _ in 0..10 {
            let policy = crate::system::sampling::random_policy(&mut rng, 2, shape);
            let dist = good_distribution_from_policy(&policy, &caps).unwrap();
            let sum: f64 = dist.probs().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn good_distribution_respects_sequential_factorization() {
        use crate::rng::SplitMix64;
        let caps = Caps::default();
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let mut rng = SplitMix64::new(7);
        let policy = crate::system::sampling::random_policy(&mut rng, 2, shape);
        let dist = good_distribution_from_policy(&policy, &caps).unwrap();
        let fns = enumerate_code_functions(2, 2, 2, &caps).unwrap();
        for (i, f) in fns.iter().enumerate() {
            let product: f64 = (0..2).map(|t| sequential_factor(&policy, f, t)).product();
            assert!((dist.prob(i) - product).abs() < 1e-14);
        }
    }

    #[test]
    fn iid_policy_weights_are_products_of_marginals() {
        let caps = Caps::default();
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let policy = Kernel::iid_policy(2, shape, &[0.7, 0.3]).unwrap();
        let dist = good_distribution_from_policy(&policy, &caps).unwrap();
        // Weight of a sequence = prod over its three committed symbols
        // (one at time 1, two branches at time 2).
        let fns = enumerate_code_functions(2, 2, 2, &caps).unwrap();
        let p = [0.7, 0.3];
        for (i, f) in fns.iter().enumerate() {
            let expect = p[f.evaluate(0, 0)] * p[f.evaluate(1, 0)] * p[f.evaluate(1, 1)];
            assert!((dist.prob(i) - expect).abs() < 1e-14);
        }
    }

    // Frozen values for a seeded three-step system; any drift here means the
    // enumeration order, the weights, or the density pipeline changed.
    #[test]
    fn seeded_policy_density_regression() {
        use crate::joint::{build_joint_fxyz, induced_policy};
        use crate::rng::SplitMix64;
        let caps = Caps::default();
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let channel = Kernel::bsc_channel(3, 0.1).unwrap();
        let feedback = Kernel::perfect_feedback(3, shape).unwrap();
        let mut rng = SplitMix64::new(0x5EED);
        let policy = crate::system::sampling::random_policy(&mut rng, 3, shape);
        let dist = good_distribution_from_policy(&policy, &caps).unwrap();
        let joint = build_joint_fxyz(&dist, &channel, &feedback, &caps).unwrap();

        let decomp = verify_codefn_information_decomposition(&joint).unwrap();
        assert!((decomp.mutual_information_bits - 0.9285684681302891).abs() < 1e-12);
        assert!((decomp.causal_conditioned_bits - 0.9285684681302906).abs() < 1e-12);
        // Perfect feedback: Z = Y, so the functions leak nothing past Y.
        assert_eq!(decomp.leaked_bits, 0.0);

        let induced = induced_policy(&joint).unwrap();
        assert!(induced.max_deviation(&policy).unwrap() < 1e-12);

        let density = residual_density_table(&joint).unwrap();
        assert!((density.mean_bits() - 0.9285684681302903).abs() < 1e-12);
        let qs = density.quantiles(&DEFAULT_RESIDUAL_QUANTILES).unwrap();
        assert!((qs[0].1 / 3.0 - -0.7932398122562621).abs() < 1e-12);
        assert!((qs[1].1 / 3.0 - -0.5611983922931464).abs() < 1e-12);
        assert!((qs[2].1 / 3.0 - 0.2708954366377035).abs() < 1e-12);
    }
}
