//! Shannon functionals in bits over groups of named variables.
//!
//! A group such as `&["X1", "X2"]` stands for the composite variable
//! `(X1, X2)`. Mutual and conditional mutual information are clamped to
//! zero when floating-point cancellation leaves them within `-1e-12`;
//! interaction information is never clamped since it may be negative.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::probability::JointDistribution;
use crate::scalar::Real;

/// Cancellation noise tolerated below zero before MI/CMI are clamped.
pub const CLAMP_NEGATIVE: f64 = 1e-12;

fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen = HashSet::new();
    for g in groups {
        if g.is_empty() {
            return Err(Error::EmptyGroup);
        }
        for name in *g {
            if !seen.insert(*name) {
                return Err(Error::OverlappingGroups(name.to_string()));
            }
        }
    }
    Ok(())
}

fn union<'a>(groups: &[&[&'a str]]) -> Vec<&'a str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

fn clamp<T: Real>(x: T) -> T {
    if x < T::zero() && x >= -T::lit(CLAMP_NEGATIVE) {
        T::zero()
    } else {
        x
    }
}

/// `H(group)`; the empty group has entropy 0.
fn raw_entropy<T: Real>(joint: &JointDistribution<T>, group: &[&str]) -> Result<T> {
    if group.is_empty() {
        return Ok(T::zero());
    }
    let pos = joint.positions(group)?;
    Ok(-joint.marginal_vec(&pos).into_iter().map(T::xlog2x).sum::<T>())
}

fn raw_cmi<T: Real>(j: &JointDistribution<T>, a: &[&str], b: &[&str], c: &[&str]) -> Result<T> {
    Ok(raw_entropy(j, &union(&[a, c]))? + raw_entropy(j, &union(&[b, c]))?
        - raw_entropy(j, c)?
        - raw_entropy(j, &union(&[a, b, c]))?)
}

/// Entropy of the group's marginal, in bits.
pub fn entropy<T: Real>(joint: &JointDistribution<T>, group: &[&str]) -> Result<T> {
    check_disjoint(&[group])?;
    raw_entropy(joint, group)
}

/// `H(A | B) = H(A, B) − H(B)`.
pub fn conditional_entropy<T: Real>(joint: &JointDistribution<T>, a: &[&str], b: &[&str]) -> Result<T> {
    check_disjoint(&[a, b])?;
    Ok(clamp(raw_entropy(joint, &union(&[a, b]))? - raw_entropy(joint, b)?).max(T::zero()))
}

/// `I(A; B) = H(A) + H(B) − H(A, B)`.
pub fn mutual_information<T: Real>(joint: &JointDistribution<T>, a: &[&str], b: &[&str]) -> Result<T> {
    check_disjoint(&[a, b])?;
    Ok(clamp(raw_cmi(joint, a, b, &[])?))
}

/// `I(A; B | C) = H(A, C) + H(B, C) − H(C) − H(A, B, C)`.
pub fn conditional_mutual_information<T: Real>(
    joint: &JointDistribution<T>,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<T> {
    check_disjoint(&[a, b, c])?;
    Ok(clamp(raw_cmi(joint, a, b, c)?))
}

/// `I(A; B; C) = I(A; B) − I(A; B | C)`, possibly negative.
pub fn interaction_information<T: Real>(joint: &JointDistribution<T>, a: &[&str], b: &[&str], c: &[&str]) -> Result<T> {
    check_disjoint(&[a, b, c])?;
    Ok(raw_cmi(joint, a, b, &[])? - raw_cmi(joint, a, b, c)?)
}

/// Interaction information evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionBreakdown<T> {
    /// `I(A; B) − I(A; B | C)`.
    pub lhs: T,
    /// `I(A, B; C) − I(A; C | B) − I(B; C | A)`.
    pub rhs: T,
    pub residual: T,
}

pub fn interaction_breakdown<T: Real>(
    joint: &JointDistribution<T>,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<InteractionBreakdown<T>> {
    let lhs = interaction_information(joint, a, b, c)?;
    let ab = union(&[a, b]);
    let rhs = raw_cmi(joint, &ab, c, &[])? - raw_cmi(joint, a, c, b)? - raw_cmi(joint, b, c, a)?;
    Ok(InteractionBreakdown { lhs, rhs, residual: (lhs - rhs).abs() })
}

/// Residual of the Markov chain `A ↔ B ↔ C`, i.e. `I(A; C | B)`.
pub fn markov_residual<T: Real>(joint: &JointDistribution<T>, a: &[&str], b: &[&str], c: &[&str]) -> Result<T> {
    conditional_mutual_information(joint, a, c, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{dsbs, Channel, Variable};
    use crate::scalar::binary_entropy;

    fn bits(names: &[&str], pmf: Vec<f64>) -> JointDistribution<f64> {
        let vars = names.iter().map(|n| Variable::indexed(*n, 2).unwrap()).collect();
        JointDistribution::new(vars, pmf).unwrap()
    }

    fn xor_triple() -> JointDistribution<f64> {
        // X, Y iid uniform, Z = X xor Y
        let mut pmf = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                pmf[x * 4 + y * 2 + (x ^ y)] = 0.25;
            }
        }
        bits(&["X", "Y", "Z"], pmf)
    }

    fn triple_copy() -> JointDistribution<f64> {
        let mut pmf = vec![0.0; 8];
        pmf[0] = 0.5;
        pmf[7] = 0.5;
        bits(&["X", "Y", "Z"], pmf)
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&bits(&["X"], vec![0.5, 0.5]), &["X"]).unwrap(), 1.0);
        assert_eq!(entropy(&bits(&["X"], vec![1.0, 0.0]), &["X"]).unwrap(), 0.0);
        // -(0.25 log2 0.25 + 0.75 log2 0.75)
        let h = entropy(&bits(&["X"], vec![0.25, 0.75]), &["X"]).unwrap();
        assert!((h - 0.811_278_124_459_132_9).abs() < 1e-12);
        assert!(matches!(entropy(&bits(&["X"], vec![0.5, 0.5]), &["Y"]), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn mutual_information_examples() {
        let ind = bits(&["X", "Y"], vec![0.25; 4]);
        assert_eq!(mutual_information(&ind, &["X"], &["Y"]).unwrap(), 0.0);
        let copy = bits(&["X", "Y"], vec![0.5, 0.0, 0.0, 0.5]);
        assert!((mutual_information(&copy, &["X"], &["Y"]).unwrap() - 1.0).abs() < 1e-15);
        let d = dsbs(0.1f64).unwrap();
        let mi = mutual_information(&d, &["X1"], &["X2"]).unwrap();
        assert!((mi - (1.0 - binary_entropy(0.1))).abs() < 1e-12);
        assert!((mi - 0.5310).abs() < 1e-4);
        assert!(matches!(mutual_information(&d, &["X1"], &["X1"]), Err(Error::OverlappingGroups(_))));
    }

    #[test]
    fn cmi_examples() {
        let x = xor_triple();
        assert!((conditional_mutual_information(&x, &["X"], &["Y"], &["Z"]).unwrap() - 1.0).abs() < 1e-12);

        // A -> B -> C by attach
        let a = bits(&["A"], vec![0.3, 0.7]);
        let ab = a
            .attach(
                &Channel::new(
                    vec![Variable::indexed("A", 2).unwrap()],
                    vec![Variable::indexed("B", 2).unwrap()],
                    vec![0.9, 0.1, 0.2, 0.8],
                )
                .unwrap(),
            )
            .unwrap();
        let abc = ab
            .attach(
                &Channel::new(
                    vec![Variable::indexed("B", 2).unwrap()],
                    vec![Variable::indexed("C", 2).unwrap()],
                    vec![0.6, 0.4, 0.3, 0.7],
                )
                .unwrap(),
            )
            .unwrap();
        assert!(conditional_mutual_information(&abc, &["A"], &["C"], &["B"]).unwrap() < 1e-12);
    }

    #[test]
    fn interaction_examples() {
        assert!(
            interaction_information(&bits(&["X", "Y", "Z"], vec![0.125; 8]), &["X"], &["Y"], &["Z"]).unwrap().abs()
                < 1e-15
        );
        let copy = triple_copy();
        assert!((interaction_information(&copy, &["X"], &["Y"], &["Z"]).unwrap() - 1.0).abs() < 1e-12);
        let x = xor_triple();
        assert!((interaction_information(&x, &["X"], &["Y"], &["Z"]).unwrap() + 1.0).abs() < 1e-12);

        let b = interaction_breakdown(&x, &["X"], &["Y"], &["Z"]).unwrap();
        assert!((b.lhs + 1.0).abs() < 1e-12 && (b.rhs + 1.0).abs() < 1e-12);
        let b = interaction_breakdown(&copy, &["X"], &["Y"], &["Z"]).unwrap();
        assert!((b.lhs - 1.0).abs() < 1e-12 && (b.rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn markov_examples() {
        let x = xor_triple();
        // chain X <-> Z <-> Y fails by one bit
        assert!((markov_residual(&x, &["X"], &["Z"], &["Y"]).unwrap() - 1.0).abs() < 1e-12);
        let d = dsbs(0.1f64).unwrap();
        let x1 = d.variable("X1").unwrap().clone();
        let dz = d.attach(&Channel::copy(&x1, "Z1")).unwrap();
        assert!(markov_residual(&dz, &["X2"], &["X1"], &["Z1"]).unwrap() < 1e-12);
    }

    #[test]
    fn groups_must_be_nonempty() {
        let d = dsbs(0.1f64).unwrap();
        assert!(matches!(mutual_information(&d, &[], &["X1"]), Err(Error::EmptyGroup)));
    }
}
