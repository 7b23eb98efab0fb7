//! Exact joint distributions over the system variables.
//!
//! Everything downstream (information measures, identity checks, bounds)
//! reads from a single dense table: a `Layout` naming the variables in time
//! order and a probability vector indexed by their mixed-radix product code.
//! Builders unroll the defining factorization of each system, so a table is
//! exact up to floating-point rounding, never sampled.
//!
//! Variable naming: series use `X1, X2, ...` (time one-based); the message is
//! `W`; per-time code-function maps are `F1, ..., Fn`; additive feedback
//! noise is `V1, ..., Vn`. Within a time step the order is
//! `F_i, X_i, Y_i, V_i, Z_i` (whichever of those the system has), matching
//! the order in which the symbols are drawn.

use crate::codefn::{CodeFunction, CodeFunctionDistribution, MessageEncoder};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelRole, NoiseProcess, SystemShape};

/// Total-mass tolerance for validated joint tables.
pub const JOINT_MASS_TOL: f64 = 1e-10;

/// Size limits on exact enumeration. All fields can be raised explicitly;
/// the defaults keep every table comfortably in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest `|X|`, `|Y|`, `|Z|` alphabet (does not bind code-function
    /// variables, whose sizes grow as `|X|^(|Z|^t)`).
    pub max_alphabet: usize,
    /// Largest horizon `n`.
    pub max_horizon: usize,
    /// Largest dense table size.
    pub max_cells: usize,
    /// Largest code-function ensemble to enumerate.
    pub max_code_functions: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_alphabet: 4,
            max_horizon: 4,
            max_cells: 1 << 24,
            max_code_functions: 65_536,
        }
    }
}

impl Caps {
    pub fn check_shape(&self, shape: SystemShape) -> Result<()> {
        let m = shape.x.max(shape.y).max(shape.z);
        if m > self.max_alphabet {
            return Err(Error::CapExceeded(format!(
                "alphabet size {m} exceeds the cap of {}",
                self.max_alphabet
            )));
        }
        Ok(())
    }

    pub fn check_horizon(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        if n > self.max_horizon {
            return Err(Error::CapExceeded(format!(
                "horizon {n} exceeds the cap of {}",
                self.max_horizon
            )));
        }
        Ok(())
    }

    pub fn check_cells(&self, cells: usize) -> Result<()> {
        if cells > self.max_cells {
            return Err(Error::CapExceeded(format!(
                "table of {cells} cells exceeds the cap of {}",
                self.max_cells
            )));
        }
        Ok(())
    }
}

/// One named finite-alphabet variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Var {
    pub name: String,
    pub size: usize,
}

impl Var {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Self {
            name: name.into(),
            size,
        }
    }
}

/// Ordered variable list with precomputed strides. Cell index of an
/// assignment is its mixed-radix code, first variable most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    vars: Vec<Var>,
    strides: Vec<usize>,
    cells: usize,
}

impl Layout {
    pub fn new(vars: Vec<Var>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidParameter("layout needs variables".into()));
        }
        for v in &vars {
            if v.size == 0 {
                return Err(Error::EmptyAlphabet);
            }
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|u| u.name == v.name) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate variable name {}",
                    v.name
                )));
            }
        }
        let mut cells: usize = 1;
        for v in &vars {
            cells = cells
                .checked_mul(v.size)
                .ok_or_else(|| Error::CapExceeded("layout cell count overflows".into()))?;
        }
        let mut strides = vec![1usize; vars.len()];
        for i in (0..vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * vars[i + 1].size;
        }
        Ok(Self {
            vars,
            strides,
            cells,
        })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> &Var {
        &self.vars[i]
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.position(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_owned()))
    }

    /// Value of variable `var` in cell `idx`.
    #[inline]
    pub fn digit(&self, idx: usize, var: usize) -> usize {
        (idx / self.strides[var]) % self.vars[var].size
    }

    /// All variable values in cell `idx`, in layout order.
    pub fn digits_of(&self, idx: usize) -> Vec<usize> {
        (0..self.vars.len()).map(|v| self.digit(idx, v)).collect()
    }

    /// Cell index of a full assignment. Panics on wrong length or
    /// out-of-range values; addressing errors are bugs, not input errors.
    pub fn encode(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.vars.len());
        let mut code = 0usize;
        for (v, &d) in digits.iter().enumerate() {
            assert!(d < self.vars[v].size);
            code = code * self.vars[v].size + d;
        }
        code
    }

    /// Mixed-radix code of the values of `group` (in group order) within
    /// cell `idx`.
    #[inline]
    pub fn subcode(&self, idx: usize, group: &[usize]) -> usize {
        let mut code = 0usize;
        for &g in group {
            code = code * self.vars[g].size + self.digit(idx, g);
        }
        code
    }

    pub fn group_radices(&self, group: &[usize]) -> Vec<usize> {
        group.iter().map(|&g| self.vars[g].size).collect()
    }

    pub fn group_cells(&self, group: &[usize]) -> usize {
        group.iter().map(|&g| self.vars[g].size).product()
    }

    /// Indices of `prefix1..prefixk` for `k = upto`. `upto = 0` gives the
    /// empty group; missing members are an error.
    pub fn time_group(&self, prefix: &str, upto: usize) -> Result<Vec<usize>> {
        (1..=upto)
            .map(|i| self.index_of(&format!("{prefix}{i}")))
            .collect()
    }

    /// Largest `k` such that `prefix1..prefixk` all exist.
    pub fn horizon(&self, prefix: &str) -> usize {
        let mut k = 0;
        while self.position(&format!("{prefix}{}", k + 1)).is_some() {
            k += 1;
        }
        k
    }
}

/// Dense probability table over a `Layout`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    layout: Layout,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(layout: Layout, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != layout.cells() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for a layout of {} cells",
                probs.len(),
                layout.cells()
            )));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter(
                "joint probabilities must be finite and nonnegative".into(),
            ));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > JOINT_MASS_TOL {
            return Err(Error::InvalidParameter(format!(
                "joint mass is {mass}, expected 1 within {JOINT_MASS_TOL}"
            )));
        }
        Ok(Self { layout, probs })
    }

    /// Skips validation; for internal builders whose output is exact by
    /// construction.
    pub(crate) fn new_unchecked(layout: Layout, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), layout.cells());
        Self { layout, probs }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    pub fn support_probs(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (i, p))
    }

    /// Marginal probabilities of `group`, indexed by the group's own
    /// mixed-radix code (group order).
    pub fn project(&self, group: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0f64; self.layout.group_cells(group)];
        for (idx, p) in self.support_probs() {
            out[self.layout.subcode(idx, group)] += p;
        }
        out
    }

    /// Marginal table over the listed variables, in the listed order.
    pub fn marginal_by_indices(&self, keep: &[usize]) -> Result<JointTable> {
        let vars: Vec<Var> = keep.iter().map(|&g| self.layout.vars[g].clone()).collect();
        let layout = Layout::new(vars)?;
        let probs = self.project(keep);
        Ok(JointTable::new_unchecked(layout, probs))
    }

    pub fn marginal(&self, names: &[&str]) -> Result<JointTable> {
        let keep: Vec<usize> = names
            .iter()
            .map(|name| self.layout.index_of(name))
            .collect::<Result<_>>()?;
        self.marginal_by_indices(&keep)
    }

    /// Condition on `var = value`. Returns the event probability and the
    /// normalized table over the remaining variables, or `None` when the
    /// event has zero probability.
    pub fn condition_single(&self, var: usize, value: usize) -> Option<(f64, JointTable)> {
        let keep: Vec<usize> = (0..self.layout.vars.len()).filter(|&v| v != var).collect();
        let vars: Vec<Var> = keep.iter().map(|&g| self.layout.vars[g].clone()).collect();
        let layout = Layout::new(vars).expect("sublayout of a valid layout");
        let mut probs = vec![0.0f64; layout.cells()];
        let mut mass = 0.0f64;
        for (idx, p) in self.support_probs() {
            if self.layout.digit(idx, var) == value {
                probs[self.layout.subcode(idx, &keep)] += p;
                mass += p;
            }
        }
        if mass <= 0.0 {
            return None;
        }
        for q in &mut probs {
            *q /= mass;
        }
        Some((mass, JointTable::new_unchecked(layout, probs)))
    }
}

fn check_link_pair(channel: &Kernel, feedback: &Kernel) -> Result<(usize, SystemShape)> {
    if channel.role() != KernelRole::Channel {
        return Err(Error::InvalidParameter(format!(
            "expected a channel kernel, got {}",
            channel.role().label()
        )));
    }
    if feedback.role() != KernelRole::Feedback {
        return Err(Error::InvalidParameter(format!(
            "expected a feedback kernel, got {}",
            feedback.role().label()
        )));
    }
    if channel.shape() != feedback.shape() {
        return Err(Error::DimensionMismatch(
            "channel and feedback link disagree on alphabet sizes".into(),
        ));
    }
    if channel.horizon() != feedback.horizon() {
        return Err(Error::HorizonMismatch(format!(
            "channel horizon {} vs feedback horizon {}",
            channel.horizon(),
            feedback.horizon()
        )));
    }
    Ok((channel.horizon(), channel.shape()))
}

fn series_vars(n: usize, shape: SystemShape) -> Vec<Var> {
    let mut vars = Vec::with_capacity(3 * n);
    for i in 1..=n {
        vars.push(Var::new(format!("X{i}"), shape.x));
        vars.push(Var::new(format!("Y{i}"), shape.y));
        vars.push(Var::new(format!("Z{i}"), shape.z));
    }
    vars
}

/// Joint over `(X^n, Y^n, Z^n)` for a randomized input policy driving the
/// channel and feedback link.
pub fn build_joint_xyz(
    policy: &Kernel,
    channel: &Kernel,
    feedback: &Kernel,
    caps: &Caps,
) -> Result<JointTable> {
    if policy.role() != KernelRole::Policy {
        return Err(Error::InvalidParameter(format!(
            "expected a policy kernel, got {}",
            policy.role().label()
        )));
    }
    let (n, shape) = check_link_pair(channel, feedback)?;
    if policy.shape() != shape || policy.horizon() != n {
        return Err(Error::DimensionMismatch(
            "policy disagrees with the links on shape or horizon".into(),
        ));
    }
    caps.check_shape(shape)?;
    caps.check_horizon(n)?;
    let layout = Layout::new(series_vars(n, shape))?;
    caps.check_cells(layout.cells())?;

    let mut probs = vec![0.0f64; layout.cells()];
    // Depth-first unroll of p(x|·) p(y|·) p(z|·) per step, carrying the
    // running prefix codes each kernel conditions on.
    struct Walk<'a> {
        policy: &'a Kernel,
        channel: &'a Kernel,
        feedback: &'a Kernel,
        shape: SystemShape,
        n: usize,
        probs: &'a mut [f64],
    }
    fn step(w: &mut Walk, t: usize, cell: usize, xc: usize, yc: usize, zc: usize, weight: f64) {
        if t == w.n {
            w.probs[cell] += weight;
            return;
        }
        let ph = w.policy.history_code(t, xc, zc);
        for x in 0..w.shape.x {
            let wx = w.policy.prob(t, ph, x) * weight;
            if wx == 0.0 {
                continue;
            }
            let xc2 = xc * w.shape.x + x;
            let ch = w.channel.history_code(t, xc2, yc);
            for y in 0..w.shape.y {
                let wy = w.channel.prob(t, ch, y) * wx;
                if wy == 0.0 {
                    continue;
                }
                let yc2 = yc * w.shape.y + y;
                let fh = w.feedback.history_code(t, yc2, zc);
                for z in 0..w.shape.z {
                    let wz = w.feedback.prob(t, fh, z) * wy;
                    if wz == 0.0 {
                        continue;
                    }
                    let cell2 = ((cell * w.shape.x + x) * w.shape.y + y) * w.shape.z + z;
                    step(w, t + 1, cell2, xc2, yc2, zc * w.shape.z + z, wz);
                }
            }
        }
    }
    let mut walk = Walk {
        policy,
        channel,
        feedback,
        shape,
        n,
        probs: &mut probs,
    };
    step(&mut walk, 0, 0, 0, 0, 0, 1.0);
    Ok(JointTable::new_unchecked(layout, probs))
}

fn check_prior(prior: &[f64], messages: usize) -> Result<()> {
    if prior.len() != messages {
        return Err(Error::PriorLengthMismatch {
            got: prior.len(),
            expected: messages,
        });
    }
    if prior.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(Error::BadProbability {
            time: 0,
            history: 0,
            value: *prior.iter().find(|&&p| !p.is_finite() || p < 0.0).unwrap(),
        });
    }
    let sum: f64 = prior.iter().sum();
    if (sum - 1.0).abs() > JOINT_MASS_TOL {
        return Err(Error::InvalidParameter(format!(
            "message prior sums to {sum}, expected 1 within {JOINT_MASS_TOL}"
        )));
    }
    Ok(())
}

/// Joint over `(W, X^n, Y^n, Z^n)` for a deterministic encoder with message
/// prior `prior`.
pub fn build_joint_wxyz(
    encoder: &MessageEncoder,
    prior: &[f64],
    channel: &Kernel,
    feedback: &Kernel,
    caps: &Caps,
) -> Result<JointTable> {
    let (n, shape) = check_link_pair(channel, feedback)?;
    if encoder.horizon() != n {
        return Err(Error::HorizonMismatch(format!(
            "encoder horizon {} vs link horizon {n}",
            encoder.horizon()
        )));
    }
    if encoder.x_size() != shape.x || encoder.z_size() != shape.z {
        return Err(Error::DimensionMismatch(
            "encoder disagrees with the links on alphabet sizes".into(),
        ));
    }
    check_prior(prior, encoder.message_count())?;
    caps.check_shape(shape)?;
    caps.check_horizon(n)?;
    let mut vars = vec![Var::new("W", encoder.message_count())];
    vars.extend(series_vars(n, shape));
    let layout = Layout::new(vars)?;
    caps.check_cells(layout.cells())?;

    let mut probs = vec![0.0f64; layout.cells()];
    struct Walk<'a> {
        f: &'a CodeFunction,
        channel: &'a Kernel,
        feedback: &'a Kernel,
        shape: SystemShape,
        n: usize,
        probs: &'a mut [f64],
    }
    fn step(w: &mut Walk, t: usize, cell: usize, xc: usize, yc: usize, zc: usize, weight: f64) {
        if t == w.n {
            w.probs[cell] += weight;
            return;
        }
        let x = w.f.evaluate(t, zc);
        let xc2 = xc * w.shape.x + x;
        let ch = w.channel.history_code(t, xc2, yc);
        for y in 0..w.shape.y {
            let wy = w.channel.prob(t, ch, y) * weight;
            if wy == 0.0 {
                continue;
            }
            let yc2 = yc * w.shape.y + y;
            let fh = w.feedback.history_code(t, yc2, zc);
            for z in 0..w.shape.z {
                let wz = w.feedback.prob(t, fh, z) * wy;
                if wz == 0.0 {
                    continue;
                }
                let cell2 = ((cell * w.shape.x + x) * w.shape.y + y) * w.shape.z + z;
                step(w, t + 1, cell2, xc2, yc2, zc * w.shape.z + z, wz);
            }
        }
    }
    for (wm, &pw) in prior.iter().enumerate() {
        if pw == 0.0 {
            continue;
        }
        let mut walk = Walk {
            f: encoder.function(wm),
            channel,
            feedback,
            shape,
            n,
            probs: &mut probs,
        };
        step(&mut walk, 0, wm, 0, 0, 0, pw);
    }
    Ok(JointTable::new_unchecked(layout, probs))
}

/// Joint over `(W, X^n, Y^n, V^n, Z^n)` for a deterministic encoder over a
/// link with additive feedback noise: `z_i = y_i + v_i (mod s)`.
///
/// Requires `|Y| = |Z| = s` equal to the noise alphabet.
pub fn build_joint_wxyvz(
    encoder: &MessageEncoder,
    prior: &[f64],
    channel: &Kernel,
    noise: &NoiseProcess,
    caps: &Caps,
) -> Result<JointTable> {
    if channel.role() != KernelRole::Channel {
        return Err(Error::InvalidParameter(format!(
            "expected a channel kernel, got {}",
            channel.role().label()
        )));
    }
    let n = channel.horizon();
    let shape = channel.shape();
    let s = noise.alphabet();
    if shape.y != s || shape.z != s {
        return Err(Error::DimensionMismatch(format!(
            "additive feedback needs |Y| = |Z| = noise alphabet, got |Y|={}, |Z|={}, noise {s}",
            shape.y, shape.z
        )));
    }
    if noise.horizon() < n {
        return Err(Error::HorizonMismatch(format!(
            "noise horizon {} vs channel horizon {n}",
            noise.horizon()
        )));
    }
    if encoder.horizon() != n || encoder.x_size() != shape.x || encoder.z_size() != shape.z {
        return Err(Error::DimensionMismatch(
            "encoder disagrees with the channel on shape or horizon".into(),
        ));
    }
    check_prior(prior, encoder.message_count())?;
    caps.check_shape(shape)?;
    caps.check_horizon(n)?;
    let mut vars = vec![Var::new("W", encoder.message_count())];
    for i in 1..=n {
        vars.push(Var::new(format!("X{i}"), shape.x));
        vars.push(Var::new(format!("Y{i}"), shape.y));
        vars.push(Var::new(format!("V{i}"), s));
        vars.push(Var::new(format!("Z{i}"), shape.z));
    }
    let layout = Layout::new(vars)?;
    caps.check_cells(layout.cells())?;

    let mut probs = vec![0.0f64; layout.cells()];
    struct Walk<'a> {
        f: &'a CodeFunction,
        channel: &'a Kernel,
        noise: &'a NoiseProcess,
        shape: SystemShape,
        s: usize,
        n: usize,
        probs: &'a mut [f64],
    }
    fn step(
        w: &mut Walk,
        t: usize,
        cell: usize,
        xc: usize,
        yc: usize,
        vc: usize,
        zc: usize,
        weight: f64,
    ) {
        if t == w.n {
            w.probs[cell] += weight;
            return;
        }
        let x = w.f.evaluate(t, zc);
        let xc2 = xc * w.shape.x + x;
        let ch = w.channel.history_code(t, xc2, yc);
        for y in 0..w.shape.y {
            let wy = w.channel.prob(t, ch, y) * weight;
            if wy == 0.0 {
                continue;
            }
            for v in 0..w.s {
                let wv = w.noise.prob(t, vc, v) * wy;
                if wv == 0.0 {
                    continue;
                }
                let z = (y + v) % w.s;
                let cell2 = (((cell * w.shape.x + x) * w.shape.y + y) * w.s + v) * w.shape.z + z;
                step(
                    w,
                    t + 1,
                    cell2,
                    xc2,
                    yc * w.shape.y + y,
                    vc * w.s + v,
                    zc * w.shape.z + z,
                    wv,
                );
            }
        }
    }
    for (wm, &pw) in prior.iter().enumerate() {
        if pw == 0.0 {
            continue;
        }
        let mut walk = Walk {
            f: encoder.function(wm),
            channel,
            noise,
            shape,
            s,
            n,
            probs: &mut probs,
        };
        step(&mut walk, 0, wm, 0, 0, 0, 0, pw);
    }
    Ok(JointTable::new_unchecked(layout, probs))
}

/// Joint over `(F^n, X^n, Y^n, Z^n)` for a randomized code-function ensemble.
/// `F_i` is the time-`i` map, an alphabet of size `|X|^(|Z|^(i-1))` indexed
/// canonically; within each step the order is `F_i, X_i, Y_i, Z_i`.
pub fn build_joint_fxyz(
    dist: &CodeFunctionDistribution,
    channel: &Kernel,
    feedback: &Kernel,
    caps: &Caps,
) -> Result<JointTable> {
    let (n, shape) = check_link_pair(channel, feedback)?;
    if dist.horizon() != n || dist.x_size() != shape.x || dist.z_size() != shape.z {
        return Err(Error::DimensionMismatch(
            "code-function ensemble disagrees with the links on shape or horizon".into(),
        ));
    }
    caps.check_shape(shape)?;
    caps.check_horizon(n)?;
    let fcounts: Vec<usize> = (0..n)
        .map(|t| {
            CodeFunction::time_map_count(shape.x, shape.z, t)
                .ok_or_else(|| Error::CapExceeded("code-function alphabet overflows".into()))
        })
        .collect::<Result<_>>()?;
    let mut vars = Vec::with_capacity(4 * n);
    for i in 1..=n {
        vars.push(Var::new(format!("F{i}"), fcounts[i - 1]));
        vars.push(Var::new(format!("X{i}"), shape.x));
        vars.push(Var::new(format!("Y{i}"), shape.y));
        vars.push(Var::new(format!("Z{i}"), shape.z));
    }
    let layout = Layout::new(vars)?;
    caps.check_cells(layout.cells())?;

    let mut probs = vec![0.0f64; layout.cells()];
    struct Walk<'a> {
        f: &'a CodeFunction,
        maps: &'a [usize],
        fcounts: &'a [usize],
        channel: &'a Kernel,
        feedback: &'a Kernel,
        shape: SystemShape,
        n: usize,
        probs: &'a mut [f64],
    }
    fn step(w: &mut Walk, t: usize, cell: usize, xc: usize, yc: usize, zc: usize, weight: f64) {
        if t == w.n {
            w.probs[cell] += weight;
            return;
        }
        let cell_f = cell * w.fcounts[t] + w.maps[t];
        let x = w.f.evaluate(t, zc);
        let xc2 = xc * w.shape.x + x;
        let ch = w.channel.history_code(t, xc2, yc);
        for y in 0..w.shape.y {
            let wy = w.channel.prob(t, ch, y) * weight;
            if wy == 0.0 {
                continue;
            }
            let yc2 = yc * w.shape.y + y;
            let fh = w.feedback.history_code(t, yc2, zc);
            for z in 0..w.shape.z {
                let wz = w.feedback.prob(t, fh, z) * wy;
                if wz == 0.0 {
                    continue;
                }
                let cell2 = ((cell_f * w.shape.x + x) * w.shape.y + y) * w.shape.z + z;
                step(w, t + 1, cell2, xc2, yc2, zc * w.shape.z + z, wz);
            }
        }
    }
    for (seq, pf) in dist.support() {
        let mut c = seq;
        let mut maps = vec![0usize; n];
        for t in (0..n).rev() {
            maps[t] = c % fcounts[t];
            c /= fcounts[t];
        }
        let tables: Vec<Vec<usize>> = (0..n)
            .map(|t| CodeFunction::map_from_index(shape.x, shape.z, t, maps[t]))
            .collect();
        let f = CodeFunction::new(shape.x, shape.z, tables)?;
        let mut walk = Walk {
            f: &f,
            maps: &maps,
            fcounts: &fcounts,
            channel,
            feedback,
            shape,
            n,
            probs: &mut probs,
        };
        step(&mut walk, 0, 0, 0, 0, 0, pf);
    }
    Ok(JointTable::new_unchecked(layout, probs))
}

/// The input policy a joint induces: `p(x_i | x^{i-1}, z^{i-1})` wherever the
/// conditioning event has positive probability. Rows over zero-probability
/// histories are undefined and stay `None` rather than being invented.
#[derive(Debug, Clone)]
pub struct InducedPolicy {
    shape: SystemShape,
    horizon: usize,
    /// `rows[t][history]`, history code `x_code * |Z|^t + z_code`.
    rows: Vec<Vec<Option<Vec<f64>>>>,
}

impl InducedPolicy {
    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn row(&self, t: usize, history: usize) -> Option<&[f64]> {
        self.rows[t][history].as_deref()
    }

    /// `(t, history)` pairs with no defined conditional.
    pub fn undefined_histories(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (t, rows) in self.rows.iter().enumerate() {
            for (h, row) in rows.iter().enumerate() {
                if row.is_none() {
                    out.push((t, h));
                }
            }
        }
        out
    }

    /// Largest entrywise deviation from `policy` over defined rows.
    pub fn max_deviation(&self, policy: &Kernel) -> Result<f64> {
        if policy.role() != KernelRole::Policy {
            return Err(Error::InvalidParameter(
                "induced policies compare against policy kernels".into(),
            ));
        }
        if policy.shape() != self.shape || policy.horizon() != self.horizon {
            return Err(Error::DimensionMismatch(
                "policy disagrees with the induced policy on shape or horizon".into(),
            ));
        }
        let mut worst = 0.0f64;
        for t in 0..self.horizon {
            for (h, row) in self.rows[t].iter().enumerate() {
                let Some(row) = row else { continue };
                for (x, &p) in row.iter().enumerate() {
                    let d = (p - policy.prob(t, h, x)).abs();
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Promote to a kernel; fails if any reachable-history row is undefined.
    pub fn to_kernel(&self) -> Result<Kernel> {
        let mut tables = Vec::with_capacity(self.horizon);
        for t in 0..self.horizon {
            let mut rows = Vec::with_capacity(self.rows[t].len());
            for (h, row) in self.rows[t].iter().enumerate() {
                match row {
                    Some(r) => rows.push(r.clone()),
                    None => {
                        return Err(Error::InvalidSystem(format!(
                            "induced policy row at time {} history {h} is undefined",
                            t + 1
                        )))
                    }
                }
            }
            tables.push(rows);
        }
        Kernel::new(KernelRole::Policy, self.shape, tables)
    }
}

/// Extract the induced input policy from any joint carrying `X`, `Y` and `Z`
/// series.
pub fn induced_policy(joint: &JointTable) -> Result<InducedPolicy> {
    let layout = joint.layout();
    let n = layout.horizon("X");
    if n == 0 {
        return Err(Error::UnknownVariable("X1".into()));
    }
    let shape = SystemShape::new(
        layout.var(layout.index_of("X1")?).size,
        layout.var(layout.index_of("Y1")?).size,
        layout.var(layout.index_of("Z1")?).size,
    )?;
    let mut rows = Vec::with_capacity(n);
    for t in 0..n {
        // Group order (x^t, z^t, x_{t+1}) makes the projection code equal
        // history_code * |X| + symbol under the kernel row convention.
        let mut group = layout.time_group("X", t)?;
        group.extend(layout.time_group("Z", t)?);
        group.push(layout.index_of(&format!("X{}", t + 1))?);
        let proj = joint.project(&group);
        let histories = shape.x.pow(t as u32) * shape.z.pow(t as u32);
        let mut level = Vec::with_capacity(histories);
        for h in 0..histories {
            let slice = &proj[h * shape.x..(h + 1) * shape.x];
            let mass: f64 = slice.iter().sum();
            if mass > 0.0 {
                level.push(Some(slice.iter().map(|&p| p / mass).collect()));
            } else {
                level.push(None);
            }
        }
        rows.push(level);
    }
    Ok(InducedPolicy {
        shape,
        horizon: n,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::HistoryIndex;
    use crate::kernel::Kernel;

    fn bsc_system(n: usize, alpha: f64) -> (Kernel, Kernel, Kernel) {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let policy = Kernel::uniform_policy(n, shape).unwrap();
        let channel = Kernel::bsc_channel(n, alpha).unwrap();
        let feedback = Kernel::perfect_feedback(n, shape).unwrap();
        (policy, channel, feedback)
    }

    #[test]
    fn one_step_flip_joint_is_exact() {
        let (policy, channel, feedback) = bsc_system(1, 0.1);
        let joint = build_joint_xyz(&policy, &channel, &feedback, &Caps::default()).unwrap();
        // Perfect feedback forces z = y; each (x, y) pair has mass
        // 0.5 * flip probability.
        let expect = [0.45, 0.0, 0.0, 0.05, 0.05, 0.0, 0.0, 0.45];
        for (idx, &e) in expect.iter().enumerate() {
            assert!((joint.prob(idx) - e).abs() < 1e-15, "cell {idx}");
        }
        let y = joint.marginal(&["Y1"]).unwrap();
        assert!((y.prob(0) - 0.5).abs() < 1e-15);
        assert!((y.prob(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn builder_matches_cellwise_factorization() {
        // Independent oracle: recompute every cell probability from the
        // defining product, decoding prefixes with HistoryIndex directly.
        use crate::rng::SplitMix64;
        let shape = SystemShape::new(2, 3, 2).unwrap();
        let n = 2;
        let mut rng = SplitMix64::new(99);
        let policy = crate::system::sampling::random_policy(&mut rng, n, shape);
        let channel = crate::system::sampling::random_channel(&mut rng, n, shape);
        let feedback = crate::system::sampling::random_feedback(&mut rng, n, shape);
        let joint = build_joint_xyz(&policy, &channel, &feedback, &Caps::default()).unwrap();
        let layout = joint.layout();
        for idx in 0..layout.cells() {
            let d = layout.digits_of(idx);
            let (xs, ys, zs): (Vec<_>, Vec<_>, Vec<_>) = (
                (0..n).map(|i| d[3 * i]).collect(),
                (0..n).map(|i| d[3 * i + 1]).collect(),
                (0..n).map(|i| d[3 * i + 2]).collect(),
            );
            let mut expect = 1.0f64;
            for t in 0..n {
                let xr = vec![shape.x; t];
                let yr = vec![shape.y; t];
                let zr = vec![shape.z; t];
                let xh = HistoryIndex::encode(&xr, &xs[..t]).unwrap().code();
                let yh = HistoryIndex::encode(&yr, &ys[..t]).unwrap().code();
                let zh = HistoryIndex::encode(&zr, &zs[..t]).unwrap().code();
                let xh_inc = HistoryIndex::encode(&vec![shape.x; t + 1], &xs[..=t])
                    .unwrap()
                    .code();
                let yh_inc = HistoryIndex::encode(&vec![shape.y; t + 1], &ys[..=t])
                    .unwrap()
                    .code();
                expect *= policy.prob(t, policy.history_code(t, xh, zh), xs[t]);
                expect *= channel.prob(t, channel.history_code(t, xh_inc, yh), ys[t]);
                expect *= feedback.prob(t, feedback.history_code(t, yh_inc, zh), zs[t]);
            }
            assert!(
                (joint.prob(idx) - expect).abs() < 1e-12,
                "cell {idx}: {} vs {expect}",
                joint.prob(idx)
            );
        }
    }

    #[test]
    fn message_joint_marginalizes_to_prior() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let encoder =
            crate::codefn::MessageEncoder::from_codewords(2, 2, &[vec![0, 0], vec![1, 1]]).unwrap();
        let channel = Kernel::bsc_channel(2, 0.2).unwrap();
        let feedback = Kernel::perfect_feedback(2, shape).unwrap();
        let prior = [0.3, 0.7];
        let joint =
            build_joint_wxyz(&encoder, &prior, &channel, &feedback, &Caps::default()).unwrap();
        let w = joint.marginal(&["W"]).unwrap();
        assert!((w.prob(0) - 0.3).abs() < 1e-15);
        assert!((w.prob(1) - 0.7).abs() < 1e-15);
        let mass: f64 = joint.probs().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn additive_builder_agrees_with_kernel_route() {
        use crate::codefn::CodeFunction;
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let n = 2;
        let noise = NoiseProcess::binary_flip(n, 0.1).unwrap();
        let channel = Kernel::bsc_channel(n, 0.2).unwrap();
        let feedback = Kernel::additive_feedback(n, shape, &noise).unwrap();
        let f0 = CodeFunction::new(2, 2, vec![vec![0], vec![0, 1]]).unwrap();
        let f1 = CodeFunction::new(2, 2, vec![vec![1], vec![1, 0]]).unwrap();
        let encoder = crate::codefn::MessageEncoder::new(vec![f0, f1]).unwrap();
        let prior = [0.5, 0.5];
        let with_v =
            build_joint_wxyvz(&encoder, &prior, &channel, &noise, &Caps::default()).unwrap();
        let direct =
            build_joint_wxyz(&encoder, &prior, &channel, &feedback, &Caps::default()).unwrap();
        let folded = with_v
            .marginal(&["W", "X1", "Y1", "Z1", "X2", "Y2", "Z2"])
            .unwrap();
        assert_eq!(folded.layout(), direct.layout());
        for idx in 0..direct.layout().cells() {
            assert!((folded.prob(idx) - direct.prob(idx)).abs() < 1e-12);
        }
    }

    #[test]
    fn conditioning_splits_mass() {
        let (policy, channel, feedback) = bsc_system(1, 0.1);
        let joint = build_joint_xyz(&policy, &channel, &feedback, &Caps::default()).unwrap();
        let x1 = joint.layout().index_of("X1").unwrap();
        let (p0, slice0) = joint.condition_single(x1, 0).unwrap();
        let (p1, _) = joint.condition_single(x1, 1).unwrap();
        assert!((p0 + p1 - 1.0).abs() < 1e-15);
        let mass: f64 = slice0.probs().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
        // Conditioned on x = 0 the flip channel puts 0.9 on y = 0.
        let y = slice0.marginal(&["Y1"]).unwrap();
        assert!((y.prob(0) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn induced_policy_round_trips() {
        use crate::rng::SplitMix64;
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let mut rng = SplitMix64::new(4242);
        for _ in 0..5 {
            let policy = crate::system::sampling::random_policy(&mut rng, 2, shape);
            let channel = crate::system::sampling::random_channel(&mut rng, 2, shape);
            let feedback = crate::system::sampling::random_feedback(&mut rng, 2, shape);
            let joint = build_joint_xyz(&policy, &channel, &feedback, &Caps::default()).unwrap();
            let induced = induced_policy(&joint).unwrap();
            assert!(induced.undefined_histories().is_empty());
            assert!(induced.max_deviation(&policy).unwrap() < 1e-10);
        }
    }

    #[test]
    fn unreachable_histories_stay_undefined() {
        // A deterministic channel with perfect feedback leaves most
        // (x, z) histories unreachable; those rows must stay None.
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let ident = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let channel = Kernel::memoryless_channel(2, shape, &ident).unwrap();
        let feedback = Kernel::perfect_feedback(2, shape).unwrap();
        let policy = Kernel::iid_policy(2, shape, &[1.0, 0.0]).unwrap();
        let joint = build_joint_xyz(&policy, &channel, &feedback, &Caps::default()).unwrap();
        let induced = induced_policy(&joint).unwrap();
        // Reachable time-2 history: x1 = 0, z1 = 0 only.
        assert!(induced.row(1, 0).is_some());
        assert!(induced.row(1, 1).is_none());
        assert!(induced.row(1, 2).is_none());
        assert!(induced.row(1, 3).is_none());
        assert_eq!(induced.undefined_histories().len(), 3);
        assert!(induced.to_kernel().is_err());
    }

    #[test]
    fn caps_bound_table_sizes() {
        let (policy, channel, feedback) = bsc_system(2, 0.1);
        let caps = Caps {
            max_cells: 32,
            ..Caps::default()
        };
        assert!(matches!(
            build_joint_xyz(&policy, &channel, &feedback, &caps),
            Err(Error::CapExceeded(_))
        ));
        let caps = Caps {
            max_horizon: 1,
            ..Caps::default()
        };
        assert!(matches!(
            build_joint_xyz(&policy, &channel, &feedback, &caps),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn subcode_matches_group_encoding() {
        let layout =
            Layout::new(vec![Var::new("A", 2), Var::new("B", 3), Var::new("C", 4)]).unwrap();
        for idx in 0..layout.cells() {
            let d = layout.digits_of(idx);
            assert_eq!(layout.encode(&d), idx);
            // Group (C, A): code = c * 2 + a.
            let g = [2usize, 0usize];
            assert_eq!(layout.subcode(idx, &g), d[2] * 2 + d[0]);
        }
    }
}
