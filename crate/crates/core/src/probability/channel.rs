use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{check_unique_names, normalize_block, Alphabet, Variable, SEPARATOR};

/// Conditional pmf `P(outputs | inputs)`: one row per input tuple, each a
/// pmf over output tuples, both in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T> {
    inputs: Vec<Variable>,
    outputs: Vec<Variable>,
    kernel: Vec<T>,
}

/// Result of [`super::JointDistribution::condition`].
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional<T> {
    pub channel: Channel<T>,
    /// Input rows with zero marginal mass, filled uniformly.
    pub zero_mass_rows: Vec<usize>,
}

impl<T: Real> Channel<T> {
    /// Validates every row with the same clamping and renormalization
    /// rules as a joint distribution.
    pub fn new(inputs: Vec<Variable>, outputs: Vec<Variable>, kernel: Vec<T>) -> Result<Self> {
        check_unique_names(inputs.iter().chain(&outputs))?;
        let n_in: usize = inputs.iter().map(Variable::card).product();
        let n_out: usize = outputs.iter().map(Variable::card).product();
        if kernel.len() != n_in * n_out {
            return Err(Error::ShapeMismatch { expected: n_in * n_out, found: kernel.len() });
        }
        let mut kernel = kernel;
        for (r, row) in kernel.chunks_mut(n_out).enumerate() {
            normalize_block(row, r * n_out)?;
        }
        Ok(Self { inputs, outputs, kernel })
    }

    pub(crate) fn from_parts(inputs: Vec<Variable>, outputs: Vec<Variable>, kernel: Vec<T>) -> Self {
        Self { inputs, outputs, kernel }
    }

    /// Deterministic channel sending input row `r` to output index `map[r]`.
    pub fn deterministic(inputs: Vec<Variable>, outputs: Vec<Variable>, map: &[usize]) -> Result<Self> {
        check_unique_names(inputs.iter().chain(&outputs))?;
        let n_in: usize = inputs.iter().map(Variable::card).product();
        let n_out: usize = outputs.iter().map(Variable::card).product();
        if map.len() != n_in {
            return Err(Error::ShapeMismatch { expected: n_in, found: map.len() });
        }
        let mut kernel = vec![T::zero(); n_in * n_out];
        for (r, &o) in map.iter().enumerate() {
            if o >= n_out {
                return Err(Error::InvalidArgument(format!("output index {o} out of range")));
            }
            kernel[r * n_out + o] = T::one();
        }
        Ok(Self { inputs, outputs, kernel })
    }

    /// `output = input`, under a new name.
    pub fn copy(input: &Variable, output: &str) -> Self {
        let n = input.card();
        let mut kernel = vec![T::zero(); n * n];
        for i in 0..n {
            kernel[i * n + i] = T::one();
        }
        Self {
            inputs: vec![input.clone()],
            outputs: vec![Variable::with_alphabet(output, input.alphabet.clone())],
            kernel,
        }
    }

    /// Channel whose output ignores the input and is always `symbol`.
    pub fn constant(input: &Variable, output: &str, symbol: &str) -> Self {
        let n = input.card();
        Self {
            inputs: vec![input.clone()],
            outputs: vec![Variable {
                name: output.to_string(),
                alphabet: Alphabet { symbols: vec![symbol.to_string()] },
            }],
            kernel: vec![T::one(); n],
        }
    }

    /// Deterministic map extracting part `part` of `|`-joined labels.
    /// The output alphabet lists the distinct parts in first-seen order.
    pub fn label_projection(input: &Variable, part: usize, output: &str) -> Result<Self> {
        let mut symbols: Vec<String> = Vec::new();
        let mut map = Vec::with_capacity(input.card());
        for label in input.alphabet.symbols() {
            let piece = label
                .split(SEPARATOR)
                .nth(part)
                .ok_or_else(|| Error::InvalidArgument(format!("label `{label}` has no part {part}")))?;
            let idx = match symbols.iter().position(|s| s == piece) {
                Some(i) => i,
                None => {
                    symbols.push(piece.to_string());
                    symbols.len() - 1
                }
            };
            map.push(idx);
        }
        let out = Variable { name: output.to_string(), alphabet: Alphabet { symbols } };
        Self::deterministic(vec![input.clone()], vec![out], &map)
    }

    /// Parallel composition of two single-variable channels: `P(a', b' | a, b) = P(a'|a)·P(b'|b)`
    /// for single-variable channels, producing product-alphabet variables.
    pub fn product(first: &Channel<T>, second: &Channel<T>, input: &str, output: &str) -> Result<Self> {
        if first.inputs.len() != 1 || second.inputs.len() != 1 || first.outputs.len() != 1 || second.outputs.len() != 1
        {
            return Err(Error::InvalidArgument("product channels must be single-variable".into()));
        }
        let in_alpha = Alphabet::product(&first.inputs[0].alphabet, &second.inputs[0].alphabet);
        let out_alpha = Alphabet::product(&first.outputs[0].alphabet, &second.outputs[0].alphabet);
        let (n2, m1, m2) = (second.input_card(), first.output_card(), second.output_card());
        let mut kernel = Vec::with_capacity(in_alpha.len() * out_alpha.len());
        for a in 0..first.input_card() {
            for b in 0..n2 {
                for x in 0..m1 {
                    for y in 0..m2 {
                        kernel.push(first.row(a)[x] * second.row(b)[y]);
                    }
                }
            }
        }
        Ok(Self {
            inputs: vec![Variable::with_alphabet(input, in_alpha)],
            outputs: vec![Variable::with_alphabet(output, out_alpha)],
            kernel,
        })
    }

    pub fn inputs(&self) -> &[Variable] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Variable] {
        &self.outputs
    }

    pub fn kernel(&self) -> &[T] {
        &self.kernel
    }

    pub fn input_card(&self) -> usize {
        self.inputs.iter().map(Variable::card).product()
    }

    pub fn output_card(&self) -> usize {
        self.outputs.iter().map(Variable::card).product()
    }

    pub fn row(&self, r: usize) -> &[T] {
        let n = self.output_card();
        &self.kernel[r * n..(r + 1) * n]
    }

    /// Renames the (single) output variable.
    pub fn rename_output(mut self, index: usize, name: &str) -> Self {
        self.outputs[index].name = name.to_string();
        self
    }

    /// Renames an input variable.
    pub fn rename_input(mut self, index: usize, name: &str) -> Self {
        self.inputs[index].name = name.to_string();
        self
    }

    /// `true` when every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        let n = self.output_card();
        self.kernel.chunks(n).all(|row| row.iter().any(|p| *p == T::one()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_validated() {
        let x = Variable::indexed("X", 2).unwrap();
        let z = Variable::indexed("Z", 2).unwrap();
        assert!(Channel::new(vec![x.clone()], vec![z.clone()], vec![0.9, 0.1, 0.5, 0.6]).is_err());
        let c = Channel::new(vec![x], vec![z], vec![0.9, 0.1, 0.5, 0.5]).unwrap();
        assert_eq!(c.row(1), &[0.5, 0.5]);
    }

    #[test]
    fn projection_recovers_parts() {
        let x = Variable::with_alphabet(
            "X1",
            Alphabet::product(&Alphabet::indexed(3).unwrap(), &Alphabet::new(["a", "b"]).unwrap()),
        );
        let w: Channel<f64> = Channel::label_projection(&x, 1, "W").unwrap();
        assert_eq!(w.outputs()[0].alphabet.symbols(), &["a".to_string(), "b".to_string()]);
        assert!(w.is_deterministic());
        assert_eq!(w.row(3), &[0.0, 1.0]);
        assert!(Channel::<f64>::label_projection(&x, 2, "Q").is_err());
    }
}
