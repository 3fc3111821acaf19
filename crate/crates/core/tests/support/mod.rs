//! Brute-force information measures straight from a pmf tensor, sharing
//! no code with the library.

#![allow(dead_code)]

use std::collections::HashMap;

fn marginal(pmf: &[f64], dims: &[usize], axes: &[usize]) -> HashMap<Vec<usize>, f64> {
    let mut out = HashMap::new();
    let mut idx = vec![0usize; dims.len()];
    for p in pmf {
        let key: Vec<usize> = axes.iter().map(|&a| idx[a]).collect();
        *out.entry(key).or_insert(0.0) += *p;
        for d in (0..dims.len()).rev() {
            idx[d] += 1;
            if idx[d] < dims[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

pub fn entropy(pmf: &[f64], dims: &[usize], axes: &[usize]) -> f64 {
    marginal(pmf, dims, axes).values().filter(|p| **p > 0.0).map(|p| -p * p.log2()).sum()
}

/// `I(A; B | C)` in bits via four joint entropies.
pub fn cmi(pmf: &[f64], dims: &[usize], a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let cat = |xs: &[&[usize]]| xs.concat();
    entropy(pmf, dims, &cat(&[a, c])) + entropy(pmf, dims, &cat(&[b, c]))
        - entropy(pmf, dims, c)
        - entropy(pmf, dims, &cat(&[a, b, c]))
}

pub fn h(p: &[f64]) -> f64 {
    p.iter().filter(|v| **v > 0.0).map(|v| -v * v.log2()).sum()
}

pub fn hb(p: f64) -> f64 {
    h(&[p, 1.0 - p])
}
