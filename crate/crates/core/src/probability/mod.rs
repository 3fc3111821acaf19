//! Finite-alphabet joint distributions over named variables.
//!
//! A [`JointDistribution`] stores a dense probability tensor in row-major
//! order over the declared variables (the last variable varies fastest).
//! Variables are identified by name. Composite variables such as
//! `X1 = (X'1, W)` use product alphabets whose labels are joined with
//! [`SEPARATOR`], so each part can be recovered with
//! [`Channel::label_projection`].

mod channel;
mod families;
mod json;

pub use channel::{Channel, Conditional};
pub use families::{block_diagonal, dsbs, random_joint, random_pmf, shared_component_source};
pub use json::{ChannelFile, DistributionFile, VariableDecl};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reserved separator joining the parts of a product-alphabet label.
pub const SEPARATOR: char = '|';

/// Entries below this are treated as exact zeros.
pub const CLAMP_THRESHOLD: f64 = 1e-15;

/// Accepted deviation of a raw tensor's total mass from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Ordered set of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::named("<anonymous>", symbols)
    }

    fn named<S: Into<String>>(variable: &str, symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::EmptyAlphabet(variable.to_string()));
        }
        let mut seen = HashSet::new();
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateSymbol { variable: variable.to_string(), symbol: s.clone() });
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet `{"0", "1", ..., "n-1"}`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    /// Product alphabet with labels `a|b`, `a` varying slowest.
    pub fn product(first: &Alphabet, second: &Alphabet) -> Self {
        let symbols = first
            .symbols
            .iter()
            .flat_map(|a| second.symbols.iter().map(move |b| format!("{a}{SEPARATOR}{b}")))
            .collect();
        Self { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    pub alphabet: Alphabet,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let name = name.into();
        let alphabet = Alphabet::named(&name, symbols)?;
        Ok(Self { name, alphabet })
    }

    pub fn with_alphabet(name: impl Into<String>, alphabet: Alphabet) -> Self {
        Self { name: name.into(), alphabet }
    }

    /// Variable over `{"0", ..., "n-1"}`.
    pub fn indexed(name: impl Into<String>, n: usize) -> Result<Self> {
        let name = name.into();
        let alphabet = Alphabet::named(&name, (0..n).map(|i| i.to_string()))?;
        Ok(Self { name, alphabet })
    }

    pub fn card(&self) -> usize {
        self.alphabet.len()
    }
}

pub(crate) fn check_unique_names<'a>(vars: impl IntoIterator<Item = &'a Variable>) -> Result<()> {
    let mut seen = HashSet::new();
    for v in vars {
        if !seen.insert(v.name.as_str()) {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
    }
    Ok(())
}

/// Clamps near-zero entries, rejects negatives, and renormalizes `raw`
/// in place. Shared by joint and channel-row validation.
pub(crate) fn normalize_block<T: Real>(raw: &mut [T], offset: usize) -> Result<()> {
    let clamp = T::lit(CLAMP_THRESHOLD);
    for (i, p) in raw.iter_mut().enumerate() {
        if !p.is_finite() {
            return Err(Error::NonFinite(offset + i));
        }
        if *p < -clamp {
            return Err(Error::NegativeEntry { index: offset + i, value: p.as_f64() });
        }
        if *p < clamp {
            *p = T::zero();
        }
    }
    let sum: T = raw.iter().copied().sum();
    if (sum - T::one()).abs() > T::lit(NORMALIZATION_TOLERANCE) {
        return Err(Error::NotNormalized { sum: sum.as_f64() });
    }
    for p in raw.iter_mut() {
        *p = *p / sum;
    }
    Ok(())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// For each flat index of a tensor with shape `dims`, the flat index of
/// the sub-tensor spanned by `positions` (in that order).
pub(crate) fn projection_map(dims: &[usize], positions: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let sub_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
    let sub_strides = strides(&sub_dims);
    // stride contributed by each full-tensor axis
    let mut axis_stride = vec![0usize; dims.len()];
    for (k, &p) in positions.iter().enumerate() {
        axis_stride[p] = sub_strides[k];
    }
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    let mut cur = 0usize;
    for _ in 0..total {
        out.push(cur);
        for axis in (0..dims.len()).rev() {
            digits[axis] += 1;
            cur += axis_stride[axis];
            if digits[axis] < dims[axis] {
                break;
            }
            cur -= axis_stride[axis] * digits[axis];
            digits[axis] = 0;
        }
    }
    out
}

/// Joint pmf over named finite variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<T> {
    variables: Vec<Variable>,
    pmf: Vec<T>,
}

impl<T: Real> JointDistribution<T> {
    /// Validates a raw row-major tensor: entries below `1e-15` are clamped
    /// to zero and the result renormalized.
    pub fn new(variables: Vec<Variable>, pmf: Vec<T>) -> Result<Self> {
        check_unique_names(&variables)?;
        let expected: usize = variables.iter().map(Variable::card).product();
        if expected != pmf.len() {
            return Err(Error::ShapeMismatch { expected, found: pmf.len() });
        }
        let mut pmf = pmf;
        normalize_block(&mut pmf, 0)?;
        Ok(Self { variables, pmf })
    }

    /// Single-variable distribution.
    pub fn from_pmf(variable: Variable, pmf: Vec<T>) -> Result<Self> {
        Self::new(vec![variable], pmf)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn pmf(&self) -> &[T] {
        &self.pmf
    }

    pub fn names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::card).collect()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.variables.iter().position(|v| v.name == name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.position(name)?])
    }

    pub fn has(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v.name == name)
    }

    pub(crate) fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let pos = names.iter().map(|n| self.position(n)).collect::<Result<Vec<_>>>()?;
        let mut seen = HashSet::new();
        for (&p, n) in pos.iter().zip(names) {
            if !seen.insert(p) {
                return Err(Error::DuplicateVariable(n.to_string()));
            }
        }
        Ok(pos)
    }

    /// Marginal over `keep`, with variables ordered as in `keep`.
    pub fn marginalize(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyGroup);
        }
        let positions = self.positions(keep)?;
        let variables: Vec<Variable> = positions.iter().map(|&p| self.variables[p].clone()).collect();
        let size: usize = variables.iter().map(Variable::card).product();
        let mut pmf = vec![T::zero(); size];
        for (p, &j) in self.pmf.iter().zip(&projection_map(&self.dims(), &positions)) {
            pmf[j] = pmf[j] + *p;
        }
        Ok(Self { variables, pmf })
    }

    /// Raw marginal vector over the named group, used by the functionals.
    pub(crate) fn marginal_vec(&self, positions: &[usize]) -> Vec<T> {
        let size: usize = positions.iter().map(|&p| self.variables[p].card()).product();
        let mut out = vec![T::zero(); size];
        for (p, &j) in self.pmf.iter().zip(&projection_map(&self.dims(), positions)) {
            out[j] = out[j] + *p;
        }
        out
    }

    /// Conditional channel `P(rest | given)`; zero-mass input rows are
    /// filled uniformly and listed in [`Conditional::zero_mass_rows`].
    pub fn condition(&self, given: &[&str]) -> Result<Conditional<T>> {
        let given_pos = self.positions(given)?;
        if given_pos.is_empty() || given_pos.len() == self.variables.len() {
            return Err(Error::ImproperConditioning);
        }
        let rest: Vec<&str> = self
            .variables
            .iter()
            .enumerate()
            .filter(|(i, _)| !given_pos.contains(i))
            .map(|(_, v)| v.name.as_str())
            .collect();
        let order: Vec<&str> = given.iter().copied().chain(rest.iter().copied()).collect();
        let arranged = self.marginalize(&order)?;
        let inputs: Vec<Variable> = given_pos.iter().map(|&p| self.variables[p].clone()).collect();
        let outputs: Vec<Variable> = rest.iter().map(|n| self.variable(n).cloned()).collect::<Result<_>>()?;
        let n_out: usize = outputs.iter().map(Variable::card).product();
        let mut kernel = arranged.pmf;
        let mut zero_mass_rows = Vec::new();
        for (r, row) in kernel.chunks_mut(n_out).enumerate() {
            let mass: T = row.iter().copied().sum();
            if mass > T::zero() {
                row.iter_mut().for_each(|p| *p = *p / mass);
            } else {
                let u = T::one() / T::from_usize_lossy(n_out);
                row.iter_mut().for_each(|p| *p = u);
                zero_mass_rows.push(r);
            }
        }
        Ok(Conditional { channel: Channel::from_parts(inputs, outputs, kernel), zero_mass_rows })
    }

    /// Extends the joint by the channel's outputs, which depend on the
    /// joint only through the channel's inputs.
    pub fn attach(&self, channel: &Channel<T>) -> Result<Self> {
        let mut in_pos = Vec::with_capacity(channel.inputs().len());
        for v in channel.inputs() {
            let p = self.position(&v.name)?;
            if self.variables[p].alphabet != v.alphabet {
                return Err(Error::AlphabetMismatch(v.name.clone()));
            }
            in_pos.push(p);
        }
        for v in channel.outputs() {
            if self.has(&v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let n_out = channel.output_card();
        let rows = projection_map(&self.dims(), &in_pos);
        let mut pmf = Vec::with_capacity(self.pmf.len() * n_out);
        for (p, &r) in self.pmf.iter().zip(&rows) {
            pmf.extend(channel.row(r).iter().map(|k| *p * *k));
        }
        let mut variables = self.variables.clone();
        variables.extend(channel.outputs().iter().cloned());
        Ok(Self { variables, pmf })
    }

    /// Renames a variable, keeping its alphabet.
    pub fn rename(mut self, from: &str, to: &str) -> Result<Self> {
        if from != to && self.has(to) {
            return Err(Error::DuplicateVariable(to.to_string()));
        }
        let p = self.position(from)?;
        self.variables[p].name = to.to_string();
        Ok(self)
    }

    /// Merges the named variables into one product variable placed last.
    pub fn merge(&self, names: &[&str], merged: &str) -> Result<Self> {
        let positions = self.positions(names)?;
        let rest: Vec<&str> = self
            .variables
            .iter()
            .enumerate()
            .filter(|(i, _)| !positions.contains(i))
            .map(|(_, v)| v.name.as_str())
            .collect();
        if rest.contains(&merged) {
            return Err(Error::DuplicateVariable(merged.to_string()));
        }
        let order: Vec<&str> = rest.iter().chain(names.iter()).copied().collect();
        let arranged = self.marginalize(&order)?;
        let mut alphabet = self.variables[positions[0]].alphabet.clone();
        for &p in &positions[1..] {
            alphabet = Alphabet::product(&alphabet, &self.variables[p].alphabet);
        }
        let mut variables: Vec<Variable> = arranged.variables[..rest.len()].to_vec();
        variables.push(Variable::with_alphabet(merged, alphabet));
        Ok(Self { variables, pmf: arranged.pmf })
    }

    /// Maximum absolute entrywise difference, assuming identical layout.
    pub fn max_abs_diff(&self, other: &Self) -> Option<T> {
        if self.variables != other.variables {
            return None;
        }
        Some(self.pmf.iter().zip(&other.pmf).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max))
    }

    pub fn total_mass(&self) -> T {
        self.pmf.iter().copied().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1x2(pmf: Vec<f64>) -> Result<JointDistribution<f64>> {
        JointDistribution::new(vec![Variable::indexed("X1", 2).unwrap(), Variable::indexed("X2", 2).unwrap()], pmf)
    }

    #[test]
    fn uniform_validates() {
        let j = x1x2(vec![0.25; 4]).unwrap();
        assert_eq!(j.pmf(), &[0.25; 4]);
    }

    #[test]
    fn sum_beyond_tolerance_rejected() {
        let err = x1x2(vec![0.5, 0.6, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { sum } if (sum - 1.1).abs() < 1e-12));
    }

    #[test]
    fn tiny_entries_clamped() {
        let j = x1x2(vec![0.5, 1e-16, 0.5, 0.0]).unwrap();
        assert_eq!(j.pmf()[1], 0.0);
        assert!((j.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_and_shape_errors() {
        assert!(matches!(x1x2(vec![1.1, -0.1, 0.0, 0.0]), Err(Error::NegativeEntry { index: 1, .. })));
        assert!(matches!(x1x2(vec![1.0]), Err(Error::ShapeMismatch { expected: 4, found: 1 })));
    }

    #[test]
    fn alphabet_invariants() {
        assert!(Variable::new("A", Vec::<String>::new()).is_err());
        assert!(Variable::new("A", ["a", "a"]).is_err());
        let a = Alphabet::new(["x", "y"]).unwrap();
        let b = Alphabet::new(["0", "1", "2"]).unwrap();
        let p = Alphabet::product(&a, &b);
        assert_eq!(p.len(), 6);
        assert_eq!(p.symbols()[4], "y|1");
    }

    #[test]
    fn marginals() {
        let j = x1x2(vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        let m = j.marginalize(&["X2"]).unwrap();
        assert!((m.pmf()[0] - 0.6).abs() < 1e-15 && (m.pmf()[1] - 0.4).abs() < 1e-15);
        let u = x1x2(vec![0.25; 4]).unwrap().marginalize(&["X1"]).unwrap();
        assert_eq!(u.pmf(), &[0.5, 0.5]);
        assert_eq!(j.marginalize(&["X1", "X2"]).unwrap(), j);
        assert!(matches!(j.marginalize(&["Y"]), Err(Error::UnknownVariable(_))));
        // transposition
        let t = j.marginalize(&["X2", "X1"]).unwrap();
        assert_eq!(t.pmf(), &[0.4, 0.2, 0.1, 0.3]);
    }

    #[test]
    fn conditioning() {
        let j = x1x2(vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        let c = j.condition(&["X1"]).unwrap();
        let k = c.channel.kernel();
        let expect = [0.8, 0.2, 0.4, 0.6];
        for (a, b) in k.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(c.zero_mass_rows.is_empty());

        let ind = x1x2(vec![0.25; 4]).unwrap().condition(&["X1"]).unwrap();
        assert_eq!(ind.channel.kernel(), &[0.5; 4]);

        let copy = x1x2(vec![0.5, 0.0, 0.0, 0.5]).unwrap().condition(&["X1"]).unwrap();
        assert_eq!(copy.channel.kernel(), &[1.0, 0.0, 0.0, 1.0]);

        let degenerate = x1x2(vec![0.5, 0.5, 0.0, 0.0]).unwrap().condition(&["X1"]).unwrap();
        assert_eq!(degenerate.zero_mass_rows, vec![1]);
        assert_eq!(degenerate.channel.row(1), &[0.5, 0.5]);

        assert!(matches!(j.condition(&["X1", "X2"]), Err(Error::ImproperConditioning)));
    }

    #[test]
    fn attach_errors() {
        let j = x1x2(vec![0.25; 4]).unwrap();
        let x1 = j.variable("X1").unwrap().clone();
        let clash = Channel::copy(&x1, "X2");
        assert!(matches!(j.attach(&clash), Err(Error::DuplicateVariable(_))));
        let other = Variable::indexed("X1", 3).unwrap();
        let mismatch = Channel::copy(&other, "Z");
        assert!(matches!(j.attach(&mismatch), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn merge_builds_product_variable() {
        let j = x1x2(vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        let m = j.merge(&["X2", "X1"], "Y").unwrap();
        assert_eq!(m.variables().len(), 1);
        assert_eq!(m.variables()[0].alphabet.symbols()[1], "0|1");
        assert_eq!(m.pmf(), &[0.4, 0.2, 0.1, 0.3]);
    }
}
