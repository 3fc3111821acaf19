use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Real;

use super::{Channel, JointDistribution, Variable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub alphabet: Vec<String>,
}

/// On-disk distribution: `{"variables":[{"name","alphabet"}...],"pmf":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub variables: Vec<VariableDecl>,
    pub pmf: Vec<f64>,
}

/// On-disk channel: `{"inputs":[...],"outputs":[...],"pmf":[...]}`, rows
/// indexed by input tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub inputs: Vec<VariableDecl>,
    pub outputs: Vec<VariableDecl>,
    pub pmf: Vec<f64>,
}

fn decls(vars: &[Variable]) -> Vec<VariableDecl> {
    vars.iter().map(|v| VariableDecl { name: v.name.clone(), alphabet: v.alphabet.symbols().to_vec() }).collect()
}

fn variables(decls: Vec<VariableDecl>) -> Result<Vec<Variable>> {
    decls.into_iter().map(|d| Variable::new(d.name, d.alphabet)).collect()
}

fn to_real<T: Real>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::from_f64(x).unwrap_or_else(T::nan)).collect()
}

impl<T: Real> JointDistribution<T> {
    pub fn to_file(&self) -> DistributionFile {
        DistributionFile { variables: decls(&self.variables), pmf: self.pmf.iter().map(|p| p.as_f64()).collect() }
    }

    pub fn from_file(file: DistributionFile) -> Result<Self> {
        Self::new(variables(file.variables)?, to_real(&file.pmf))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("distribution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }
}

impl<T: Real> Channel<T> {
    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            inputs: decls(self.inputs()),
            outputs: decls(self.outputs()),
            pmf: self.kernel().iter().map(|p| p.as_f64()).collect(),
        }
    }

    pub fn from_file(file: ChannelFile) -> Result<Self> {
        Self::new(variables(file.inputs)?, variables(file.outputs)?, to_real(&file.pmf))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("channel serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }
}
