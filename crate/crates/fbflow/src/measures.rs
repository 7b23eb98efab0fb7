//! Information measures over exact joint tables, in bits.
//!
//! Every quantity is a direct sum over the support in single-log form, e.g.
//! `I(A;B|C) = sum p(a,b,c) log2(p(a,b,c) p(c) / (p(a,c) p(b,c)))`, never a
//! difference of separately computed entropies. That keeps each term finite
//! on the support and avoids cancellation between large entropy values.
//!
//! Directed quantities follow the step decomposition
//! `I(A^n -> B^n) = sum_i I(A^i; B_i | B^{i-1})`, with conditioning variants
//! adding either a fixed group or the strict past of a third series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::JointTable;

fn check_disjoint(groups: &[&[usize]]) -> Result<()> {
    let mut seen: Vec<usize> = Vec::new();
    for g in groups {
        for &v in *g {
            if seen.contains(&v) {
                return Err(Error::OverlappingGroups);
            }
            seen.push(v);
        }
    }
    Ok(())
}

/// `H(group)` in bits.
pub fn entropy(joint: &JointTable, group: &[usize]) -> f64 {
    let proj = joint.project(group);
    -proj
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// `H(group | given)` in bits.
pub fn conditional_entropy(joint: &JointTable, group: &[usize], given: &[usize]) -> Result<f64> {
    check_disjoint(&[group, given])?;
    let keep: Vec<usize> = group.iter().chain(given.iter()).copied().collect();
    let m = joint.marginal_by_indices(&keep)?;
    let g: Vec<usize> = (group.len()..keep.len()).collect();
    let p_g = m.project(&g);
    let mut h = 0.0f64;
    for (idx, p) in m.support_probs() {
        let pc = p_g[m.layout().subcode(idx, &g)];
        h += p * (pc.log2() - p.log2());
    }
    Ok(h)
}

/// `I(a; b | given)` in bits; pass an empty `given` for plain mutual
/// information. The three groups must not share variables.
pub fn mutual_information(
    joint: &JointTable,
    a: &[usize],
    b: &[usize],
    given: &[usize],
) -> Result<f64> {
    check_disjoint(&[a, b, given])?;
    let keep: Vec<usize> = a
        .iter()
        .chain(b.iter())
        .chain(given.iter())
        .copied()
        .collect();
    let m = joint.marginal_by_indices(&keep)?;
    let ga: Vec<usize> = (0..a.len()).collect();
    let gb: Vec<usize> = (a.len()..a.len() + b.len()).collect();
    let gc: Vec<usize> = (a.len() + b.len()..keep.len()).collect();
    let ac: Vec<usize> = ga.iter().chain(gc.iter()).copied().collect();
    let bc: Vec<usize> = gb.iter().chain(gc.iter()).copied().collect();
    let p_ac = m.project(&ac);
    let p_bc = m.project(&bc);
    let p_c = m.project(&gc);
    let layout = m.layout();
    let mut total = 0.0f64;
    for (idx, p) in m.support_probs() {
        let pac = p_ac[layout.subcode(idx, &ac)];
        let pbc = p_bc[layout.subcode(idx, &bc)];
        let pc = p_c[layout.subcode(idx, &gc)];
        total += p * ((p * pc).log2() - (pac * pbc).log2());
    }
    Ok(total)
}

fn series_horizon(joint: &JointTable, from: &str, to: &str) -> Result<usize> {
    let n = joint.layout().horizon(to);
    if n == 0 {
        return Err(Error::UnknownVariable(format!("{to}1")));
    }
    if joint.layout().horizon(from) < n {
        return Err(Error::HorizonMismatch(format!(
            "series {from} is shorter than series {to}"
        )));
    }
    Ok(n)
}

/// `I(from^n -> to^n) = sum_i I(from^i; to_i | to^{i-1})` in bits.
pub fn directed_information(joint: &JointTable, from: &str, to: &str) -> Result<f64> {
    let n = series_horizon(joint, from, to)?;
    let layout = joint.layout();
    let mut total = 0.0f64;
    for i in 1..=n {
        let a = layout.time_group(from, i)?;
        let b = vec![layout.index_of(&format!("{to}{i}"))?];
        let c = layout.time_group(to, i - 1)?;
        total += mutual_information(joint, &a, &b, &c)?;
    }
    Ok(total)
}

/// `I(from^n -> to^n || cond^n)` with the conditioning series entering
/// strictly delayed: `sum_i I(from^i; to_i | to^{i-1}, cond^{i-1})`.
pub fn causal_conditional_directed_information(
    joint: &JointTable,
    from: &str,
    to: &str,
    cond: &str,
) -> Result<f64> {
    let n = series_horizon(joint, from, to)?;
    if joint.layout().horizon(cond) + 1 < n {
        return Err(Error::HorizonMismatch(format!(
            "series {cond} is too short to condition on"
        )));
    }
    let layout = joint.layout();
    let mut total = 0.0f64;
    for i in 1..=n {
        let a = layout.time_group(from, i)?;
        let b = vec![layout.index_of(&format!("{to}{i}"))?];
        let mut c = layout.time_group(to, i - 1)?;
        c.extend(layout.time_group(cond, i - 1)?);
        total += mutual_information(joint, &a, &b, &c)?;
    }
    Ok(total)
}

/// `I(from^n -> to^n | given) = sum_i I(from^i; to_i | to^{i-1}, given)`,
/// the whole fixed group entering every step.
pub fn conditional_directed_information(
    joint: &JointTable,
    from: &str,
    to: &str,
    given: &[usize],
) -> Result<f64> {
    let n = series_horizon(joint, from, to)?;
    let layout = joint.layout();
    let mut total = 0.0f64;
    for i in 1..=n {
        let a = layout.time_group(from, i)?;
        let b = vec![layout.index_of(&format!("{to}{i}"))?];
        let mut c = layout.time_group(to, i - 1)?;
        c.extend(given.iter().copied());
        total += mutual_information(joint, &a, &b, &c)?;
    }
    Ok(total)
}

/// Same conditional directed information, computed the long way: slice the
/// joint on each value of `var`, take plain directed information per slice,
/// and average. Exists to cross-check `conditional_directed_information`
/// through an unrelated code path.
pub fn conditional_directed_information_by_slicing(
    joint: &JointTable,
    from: &str,
    to: &str,
    var: usize,
) -> Result<f64> {
    let size = joint.layout().var(var).size;
    let mut total = 0.0f64;
    for value in 0..size {
        if let Some((p, slice)) = joint.condition_single(var, value) {
            total += p * directed_information(&slice, from, to)?;
        }
    }
    Ok(total)
}

/// `sum_i I(from^{i-1}; to_i | to^{i-1})` in bits: the `from` series enters
/// with one step of delay. The first step contributes nothing.
pub fn delayed_directed_information(joint: &JointTable, from: &str, to: &str) -> Result<f64> {
    let layout = joint.layout();
    let n = layout.horizon(to);
    if n == 0 {
        return Err(Error::UnknownVariable(format!("{to}1")));
    }
    if layout.horizon(from) + 1 < n {
        return Err(Error::HorizonMismatch(format!(
            "series {from} is too short to delay against {to}"
        )));
    }
    let mut total = 0.0f64;
    for i in 2..=n {
        let a = layout.time_group(from, i - 1)?;
        let b = vec![layout.index_of(&format!("{to}{i}"))?];
        let c = layout.time_group(to, i - 1)?;
        total += mutual_information(joint, &a, &b, &c)?;
    }
    Ok(total)
}

/// The residual part of the input-output directed information once a fixed
/// variable (usually the message) is known.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualDirectedInformation {
    /// `I(X^n -> Y^n)`.
    pub directed_bits: f64,
    /// `I(X^n -> Y^n | given)` by per-step conditional mutual informations.
    pub conditioned_bits: f64,
    /// The same conditioned quantity by slice-and-average.
    pub conditioned_bits_by_slicing: f64,
    /// `directed_bits - conditioned_bits`.
    pub value_bits: f64,
    /// Disagreement between the two conditioned computations.
    pub equivalence_residual_bits: f64,
}

/// Residual directed information of `from -> to` given the single variable
/// `given_name`. Both conditioned forms are computed; their disagreement is
/// reported rather than hidden.
pub fn residual_directed_information(
    joint: &JointTable,
    from: &str,
    to: &str,
    given_name: &str,
) -> Result<ResidualDirectedInformation> {
    let var = joint.layout().index_of(given_name)?;
    let directed = directed_information(joint, from, to)?;
    let conditioned = conditional_directed_information(joint, from, to, &[var])?;
    let sliced = conditional_directed_information_by_slicing(joint, from, to, var)?;
    Ok(ResidualDirectedInformation {
        directed_bits: directed,
        conditioned_bits: conditioned,
        conditioned_bits_by_slicing: sliced,
        value_bits: directed - conditioned,
        equivalence_residual_bits: (conditioned - sliced).abs(),
    })
}

/// A named information quantity, resolvable against any joint whose layout
/// carries the referenced variables. Serialized form uses a `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InfoQuery {
    /// `H(vars)`.
    Entropy { vars: Vec<String> },
    /// `H(vars | given)`.
    ConditionalEntropy {
        vars: Vec<String>,
        given: Vec<String>,
    },
    /// `I(a; b | given)`, `given` optional.
    MutualInformation {
        a: Vec<String>,
        b: Vec<String>,
        #[serde(default)]
        given: Vec<String>,
    },
    /// `I(from^n -> to^n)` over series prefixes.
    DirectedInformation { from: String, to: String },
    /// `I(from^n -> to^n || cond^n)` with strictly delayed conditioning.
    CausalConditionalDirectedInformation {
        from: String,
        to: String,
        cond: String,
    },
    /// `I(from^n -> to^n | given)` with a fixed conditioning group.
    ConditionalDirectedInformation {
        from: String,
        to: String,
        given: Vec<String>,
    },
    /// `sum_i I(from^{i-1}; to_i | to^{i-1})`.
    DelayedDirectedInformation { from: String, to: String },
    /// `I(from^n -> to^n) - I(from^n -> to^n | message)`.
    ResidualDirectedInformation {
        from: String,
        to: String,
        message: String,
    },
}

fn resolve(joint: &JointTable, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|name| joint.layout().index_of(name))
        .collect()
}

impl InfoQuery {
    pub fn evaluate(&self, joint: &JointTable) -> Result<f64> {
        match self {
            InfoQuery::Entropy { vars } => Ok(entropy(joint, &resolve(joint, vars)?)),
            InfoQuery::ConditionalEntropy { vars, given } => {
                conditional_entropy(joint, &resolve(joint, vars)?, &resolve(joint, given)?)
            }
            InfoQuery::MutualInformation { a, b, given } => mutual_information(
                joint,
                &resolve(joint, a)?,
                &resolve(joint, b)?,
                &resolve(joint, given)?,
            ),
            InfoQuery::DirectedInformation { from, to } => directed_information(joint, from, to),
            InfoQuery::CausalConditionalDirectedInformation { from, to, cond } => {
                causal_conditional_directed_information(joint, from, to, cond)
            }
            InfoQuery::ConditionalDirectedInformation { from, to, given } => {
                conditional_directed_information(joint, from, to, &resolve(joint, given)?)
            }
            InfoQuery::DelayedDirectedInformation { from, to } => {
                delayed_directed_information(joint, from, to)
            }
            InfoQuery::ResidualDirectedInformation { from, to, message } => {
                Ok(residual_directed_information(joint, from, to, message)?.value_bits)
            }
        }
    }

    /// Stable name used in reports and CSV output.
    pub fn name(&self) -> String {
        match self {
            InfoQuery::Entropy { vars } => format!("H({})", vars.join(",")),
            InfoQuery::ConditionalEntropy { vars, given } => {
                format!("H({}|{})", vars.join(","), given.join(","))
            }
            InfoQuery::MutualInformation { a, b, given } if given.is_empty() => {
                format!("I({};{})", a.join(","), b.join(","))
            }
            InfoQuery::MutualInformation { a, b, given } => {
                format!("I({};{}|{})", a.join(","), b.join(","), given.join(","))
            }
            InfoQuery::DirectedInformation { from, to } => format!("I({from}->{to})"),
            InfoQuery::CausalConditionalDirectedInformation { from, to, cond } => {
                format!("I({from}->{to}||{cond})")
            }
            InfoQuery::ConditionalDirectedInformation { from, to, given } => {
                format!("I({from}->{to}|{})", given.join(","))
            }
            InfoQuery::DelayedDirectedInformation { from, to } => {
                format!("Idelay({from}->{to})")
            }
            InfoQuery::ResidualDirectedInformation { from, to, message } => {
                format!("IR({from}->{to};{message})")
            }
        }
    }
}

/// A real-valued function of the outcome together with the outcome
/// probabilities: an information density and the distribution it lives on.
#[derive(Debug, Clone)]
pub struct DensityTable {
    table: JointTable,
    values_bits: Vec<f64>,
}

/// Values closer than this are treated as one atom when forming quantiles.
pub const DENSITY_VALUE_TOL: f64 = 1e-12;

impl DensityTable {
    pub fn new(table: JointTable, values_bits: Vec<f64>) -> Result<Self> {
        if values_bits.len() != table.layout().cells() {
            return Err(Error::DimensionMismatch(format!(
                "{} density values for {} cells",
                values_bits.len(),
                table.layout().cells()
            )));
        }
        Ok(Self { table, values_bits })
    }

    pub fn layout(&self) -> &crate::joint::Layout {
        self.table.layout()
    }

    /// The distribution the density lives on.
    pub fn table(&self) -> &JointTable {
        &self.table
    }

    pub fn probs(&self) -> &[f64] {
        self.table.probs()
    }

    pub fn values_bits(&self) -> &[f64] {
        &self.values_bits
    }

    /// `(cell, probability, value)` over the support.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.table
            .support_probs()
            .map(move |(i, p)| (i, p, self.values_bits[i]))
    }

    /// Support of the underlying distribution without values.
    pub fn support_probs(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.table.support_probs()
    }

    pub fn mean_bits(&self) -> f64 {
        self.support().map(|(_, p, v)| p * v).sum()
    }

    /// Value atoms sorted ascending, near-equal values merged.
    fn atoms(&self) -> Vec<(f64, f64)> {
        let mut atoms: Vec<(f64, f64)> = self.support().map(|(_, p, v)| (v, p)).collect();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite density values"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if (v - last.0).abs() <= DENSITY_VALUE_TOL => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        merged
    }

    /// Lower quantile: the smallest atom whose cumulative probability
    /// reaches `q`. When the cumulative probability lands exactly on `q`
    /// (within rounding), the midpoint with the next atom is returned, so
    /// the median of a symmetric two-point distribution is their average.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::QuantileOutOfRange(q));
        }
        let atoms = self.atoms();
        if atoms.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut cdf = 0.0f64;
        for (k, &(v, p)) in atoms.iter().enumerate() {
            cdf += p;
            if cdf >= q - DENSITY_VALUE_TOL {
                if (cdf - q).abs() <= DENSITY_VALUE_TOL {
                    if let Some(&(next, _)) = atoms.get(k + 1) {
                        return Ok((v + next) / 2.0);
                    }
                }
                return Ok(v);
            }
        }
        Ok(atoms.last().expect("nonempty").0)
    }

    pub fn quantiles(&self, qs: &[f64]) -> Result<Vec<(f64, f64)>> {
        qs.iter().map(|&q| Ok((q, self.quantile(q)?))).collect()
    }
}

/// Pointwise `i(a; b) = log2 p(a,b) - log2 p(a) - log2 p(b)` over the
/// `(a, b)` marginal. Its mean is `I(a;b)`.
pub fn mutual_information_density(
    joint: &JointTable,
    a: &[usize],
    b: &[usize],
) -> Result<DensityTable> {
    check_disjoint(&[a, b])?;
    let keep: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    let m = joint.marginal_by_indices(&keep)?;
    let ga: Vec<usize> = (0..a.len()).collect();
    let gb: Vec<usize> = (a.len()..keep.len()).collect();
    let p_a = m.project(&ga);
    let p_b = m.project(&gb);
    let mut values = vec![0.0f64; m.layout().cells()];
    for (idx, p) in m.support_probs() {
        let pa = p_a[m.layout().subcode(idx, &ga)];
        let pb = p_b[m.layout().subcode(idx, &gb)];
        values[idx] = p.log2() - pa.log2() - pb.log2();
    }
    DensityTable::new(m, values)
}
