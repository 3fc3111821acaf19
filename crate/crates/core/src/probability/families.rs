//! Source families used by tests, examples, and the `gen` subcommand.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{normalize_block, Alphabet, JointDistribution, Variable};

fn checked_pmf<T: Real>(pmf: &[T], what: &str) -> Result<Vec<T>> {
    if pmf.is_empty() {
        return Err(Error::InvalidArgument(format!("{what}: empty pmf")));
    }
    let mut v = pmf.to_vec();
    normalize_block(&mut v, 0)?;
    Ok(v)
}

/// Source `X1 = (X'1, W)`, `X2 = (X'2, W)` with `W`, `X'1`, `X'2`
/// mutually independent. Labels are `x'|w`, so `W` is part 1 of either
/// variable's labels.
pub fn shared_component_source<T: Real>(w: &[T], x1p: &[T], x2p: &[T]) -> Result<JointDistribution<T>> {
    let w = checked_pmf(w, "w")?;
    let x1p = checked_pmf(x1p, "x1p")?;
    let x2p = checked_pmf(x2p, "x2p")?;
    let (nw, n1, n2) = (w.len(), x1p.len(), x2p.len());
    let w_alpha = Alphabet::indexed(nw)?;
    let x1 = Variable::with_alphabet("X1", Alphabet::product(&Alphabet::indexed(n1)?, &w_alpha));
    let x2 = Variable::with_alphabet("X2", Alphabet::product(&Alphabet::indexed(n2)?, &w_alpha));
    let mut pmf = vec![T::zero(); n1 * nw * n2 * nw];
    for (a, pa) in x1p.iter().enumerate() {
        for (wa, pw) in w.iter().enumerate() {
            for (b, pb) in x2p.iter().enumerate() {
                let row = a * nw + wa;
                let col = b * nw + wa;
                pmf[row * n2 * nw + col] = *pw * *pa * *pb;
            }
        }
    }
    JointDistribution::new(vec![x1, x2], pmf)
}

/// Doubly symmetric binary source: uniform bits with crossover `p`.
pub fn dsbs<T: Real>(p: T) -> Result<JointDistribution<T>> {
    if !(p >= T::zero() && p <= T::lit(0.5)) {
        return Err(Error::InvalidArgument(format!("dsbs crossover {p} outside [0, 0.5]")));
    }
    let half = T::lit(0.5);
    let same = half * (T::one() - p);
    let diff = half * p;
    JointDistribution::new(vec![Variable::indexed("X1", 2)?, Variable::indexed("X2", 2)?], vec![same, diff, diff, same])
}

/// Block-diagonal source over `X1`, `X2`: `blocks` diagonal blocks of
/// size `size`×`size`, block masses `block_mass`, uniform within blocks.
pub fn block_diagonal<T: Real>(block_mass: &[T], size: usize) -> Result<JointDistribution<T>> {
    let mass = checked_pmf(block_mass, "block masses")?;
    if size == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    let n = mass.len() * size;
    let cell = T::one() / T::from_usize_lossy(size * size);
    let mut pmf = vec![T::zero(); n * n];
    for (b, m) in mass.iter().enumerate() {
        for i in 0..size {
            for j in 0..size {
                pmf[(b * size + i) * n + b * size + j] = *m * cell;
            }
        }
    }
    JointDistribution::new(vec![Variable::indexed("X1", n)?, Variable::indexed("X2", n)?], pmf)
}

/// Flat-Dirichlet random pmf of length `n`.
pub fn random_pmf<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let draws: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| T::lit(d / total)).collect()
}

/// Random joint over variables `names` with the given cardinalities.
pub fn random_joint<T: Real, R: Rng + ?Sized>(
    names: &[&str],
    shape: &[usize],
    rng: &mut R,
) -> Result<JointDistribution<T>> {
    if names.len() != shape.len() || names.is_empty() {
        return Err(Error::InvalidArgument("one name per dimension required".into()));
    }
    let vars = names.iter().zip(shape).map(|(n, &k)| Variable::indexed(*n, k)).collect::<Result<Vec<_>>>()?;
    let size = shape.iter().product();
    JointDistribution::new(vars, random_pmf(size, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dsbs_definition() {
        let j = dsbs(0.1f64).unwrap();
        let expect = [0.45, 0.05, 0.05, 0.45];
        for (a, b) in j.pmf().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(dsbs(0.6).is_err());
    }

    #[test]
    fn shared_source_layout() {
        let j = shared_component_source(&[0.5, 0.5], &[1.0], &[1.0]).unwrap();
        assert_eq!(j.dims(), vec![2, 2]);
        assert_eq!(j.pmf(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(j.variables()[0].alphabet.symbols()[1], "0|1");
        assert!(shared_component_source::<f64>(&[], &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn block_layout() {
        let j = block_diagonal(&[0.5, 0.5], 2).unwrap();
        assert_eq!(j.pmf()[0], 0.125);
        assert_eq!(j.pmf()[2], 0.0);
        assert_eq!(j.pmf()[15], 0.125);
    }
}
