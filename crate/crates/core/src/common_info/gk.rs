//! Gács-Körner side: the common part of a source pair and the largest
//! auxiliary `V` extractable from the source and from both
//! reconstructions.

use crate::error::{Error, Result};
use crate::names::{V, X1, X2, Z1, Z2};
use crate::probability::{Alphabet, Channel, JointDistribution, Variable};
use crate::scalar::Real;
use crate::shannon::{conditional_mutual_information, mutual_information};

use super::union_find::UnionFind;

/// Connected components of the bipartite support graph of `P(X1, X2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonPart<T> {
    /// Component of each `(x1, x2)` cell in row-major order; `None` off
    /// the support.
    pub component_of: Vec<Option<usize>>,
    pub components: usize,
    /// Deterministic `X1 → C`. Zero-mass rows map to component 0.
    pub label_channel_x1: Channel<T>,
    /// Deterministic `X2 → C`.
    pub label_channel_x2: Channel<T>,
}

impl<T: Real> CommonPart<T> {
    pub fn x1_labels(&self) -> Vec<usize> {
        argmax_rows(&self.label_channel_x1)
    }

    pub fn x2_labels(&self) -> Vec<usize> {
        argmax_rows(&self.label_channel_x2)
    }

    /// Probability of each component.
    pub fn component_pmf(&self, joint: &JointDistribution<T>) -> Vec<T> {
        let mut out = vec![T::zero(); self.components];
        for (p, c) in joint.pmf().iter().zip(&self.component_of) {
            if let Some(c) = c {
                out[*c] = out[*c] + *p;
            }
        }
        out
    }
}

fn argmax_rows<T: Real>(c: &Channel<T>) -> Vec<usize> {
    (0..c.input_card()).map(|r| c.row(r).iter().position(|p| *p == T::one()).unwrap_or(0)).collect()
}

fn label_alphabet(prefix: &str, n: usize) -> Alphabet {
    Alphabet::new((0..n).map(|i| format!("{prefix}{i}"))).expect("nonempty labels")
}

/// Union-find over rows and columns joined by every positive cell;
/// components are numbered in order of first occurrence in a row-major
/// scan of the support.
pub fn gk_common_part<T: Real>(joint: &JointDistribution<T>) -> Result<CommonPart<T>> {
    let (a, b) = match joint.variables() {
        [a, b] => (a.clone(), b.clone()),
        _ => return Err(Error::InvalidArgument("common part needs exactly two variables".into())),
    };
    let (n1, n2) = (a.card(), b.card());
    let mut uf = UnionFind::new(n1 + n2);
    let support: Vec<usize> = (0..n1 * n2).filter(|&k| joint.pmf()[k] > T::zero()).collect();
    for &k in &support {
        uf.union(k / n2, n1 + k % n2);
    }
    let labels = uf.labels_in_order(support.iter().map(|&k| k / n2));
    let components = labels.iter().flatten().max().map_or(1, |m| m + 1);
    let component_of = (0..n1 * n2).map(|k| if joint.pmf()[k] > T::zero() { labels[k / n2] } else { None }).collect();
    let mut col_labels = vec![0; n2];
    for &k in &support {
        col_labels[k % n2] = labels[k / n2].unwrap_or(0);
    }
    let row_labels: Vec<usize> = (0..n1).map(|r| labels[r].unwrap_or(0)).collect();
    let out = Variable::with_alphabet("C", label_alphabet("c", components));
    Ok(CommonPart {
        component_of,
        components,
        label_channel_x1: Channel::deterministic(vec![a], vec![out.clone()], &row_labels)?,
        label_channel_x2: Channel::deterministic(vec![b], vec![out], &col_labels)?,
    })
}

/// Auxiliary `V` certified by the four Markov conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct GkSolution<T> {
    pub v_alphabet: Alphabet,
    /// Deterministic `Z1 → V`.
    pub v_map_from_z1: Channel<T>,
    /// Deterministic `Z2 → V`.
    pub v_map_from_z2: Channel<T>,
    /// `I(X1, X2; V)` in bits.
    pub objective: T,
    /// `[I(X2;V|X1), I(X1;V|X2), I(X1;V|Z1), I(X2;V|Z2)]` for the chains
    /// `X2↔X1↔V`, `X1↔X2↔V`, `X1↔Z1↔V`, `X2↔Z2↔V`.
    pub condition_residuals: [T; 4],
    pub feasible: bool,
}

impl<T: Real> GkSolution<T> {
    /// The input joint extended by `V` (computed from `Z1`).
    pub fn extend(&self, joint: &JointDistribution<T>) -> Result<JointDistribution<T>> {
        joint.attach(&self.v_map_from_z1)
    }
}

/// The four GK residuals of a joint already carrying `V`.
pub fn gk_residuals<T: Real>(joint: &JointDistribution<T>) -> Result<[T; 4]> {
    Ok([
        conditional_mutual_information(joint, &[X2], &[V], &[X1])?,
        conditional_mutual_information(joint, &[X1], &[V], &[X2])?,
        conditional_mutual_information(joint, &[X1], &[V], &[Z1])?,
        conditional_mutual_information(joint, &[X2], &[V], &[Z2])?,
    ])
}

fn require_four<T: Real>(joint: &JointDistribution<T>) -> Result<()> {
    for n in [X1, X2, Z1, Z2] {
        joint.position(n)?;
    }
    Ok(())
}

/// Largest deterministic function of the common part that is also a
/// function of `Z1` alone and of `Z2` alone.
///
/// Feasible labelings are exactly the coarsenings of the component
/// labeling that never split the components co-occurring with a single
/// `z1` or `z2` value. Those form an upward-closed set in the partition
/// lattice whose finest element is the union-find closure computed here,
/// so its entropy is the best deterministic value. A constant `V`
/// (objective 0) is the degenerate fallback.
pub fn gk_lower<T: Real>(joint: &JointDistribution<T>, eps: T) -> Result<GkSolution<T>> {
    require_four(joint)?;
    let pxx = joint.marginalize(&[X1, X2])?;
    let cp = gk_common_part(&pxx)?;
    let (c1, c2) = (cp.x1_labels(), cp.x2_labels());

    let mut uf = UnionFind::new(cp.components);
    let mut glue = |zname: &str, xname: &str, labels: &[usize]| -> Result<Vec<Option<usize>>> {
        let pz = joint.marginalize(&[zname, xname])?;
        let (nz, nx) = (pz.dims()[0], pz.dims()[1]);
        let mut first = vec![None; nz];
        for (slot, row) in first.iter_mut().zip(pz.pmf().chunks(nx)) {
            for (p, &label) in row.iter().zip(labels) {
                if *p > T::zero() {
                    match *slot {
                        None => *slot = Some(label),
                        Some(c) => {
                            uf.union(c, label);
                        }
                    }
                }
            }
        }
        Ok(first)
    };
    let z1_comp = glue(Z1, X1, &c1)?;
    let z2_comp = glue(Z2, X2, &c2)?;

    let class = uf.labels_in_order(0..cp.components);
    let n_classes = class.iter().flatten().max().map_or(1, |m| m + 1);
    let v_alphabet = label_alphabet("v", n_classes);
    let v = Variable::with_alphabet(V, v_alphabet.clone());
    let map =
        |comp: &[Option<usize>]| -> Vec<usize> { comp.iter().map(|c| c.and_then(|c| class[c]).unwrap_or(0)).collect() };
    let v_map_from_z1 = Channel::deterministic(vec![joint.variable(Z1)?.clone()], vec![v.clone()], &map(&z1_comp))?;
    let v_map_from_z2 = Channel::deterministic(vec![joint.variable(Z2)?.clone()], vec![v], &map(&z2_comp))?;

    let extended = joint.attach(&v_map_from_z1)?;
    let condition_residuals = gk_residuals(&extended)?;
    let objective = mutual_information(&extended, &[X1, X2], &[V])?;
    let feasible = condition_residuals.iter().all(|r| *r <= eps);
    Ok(GkSolution { v_alphabet, v_map_from_z1, v_map_from_z2, objective, condition_residuals, feasible })
}

/// Results of the exhaustive GK search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkBruteforce<T> {
    /// Best feasible `I(X1,X2;V)` over deterministic and gridded
    /// stochastic `P(V|X1)`.
    pub best: T,
    /// Best feasible value over deterministic maps `V = f(X1)` only.
    pub best_deterministic: T,
    pub candidates: usize,
}

/// Largest grid either brute-force oracle will enumerate.
pub const GRID_BUDGET: u128 = 100_000_000;

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// All points of the `parts`-simplex with coordinates in multiples of
/// `1/steps`.
pub(crate) fn simplex_grid(parts: usize, steps: usize) -> Vec<Vec<usize>> {
    fn rec(parts: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(parts - 1, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, steps, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive oracle: every deterministic `V = f(X1)` with at most
/// `v_card` values, plus every `P(V|X1)` whose rows lie on the simplex
/// grid of resolution `1/grid_steps`. Keeps candidates whose four
/// residuals are `≤ eps` and returns the largest `I(X1,X2;V)`.
pub fn gk_bruteforce<T: Real>(
    joint: &JointDistribution<T>,
    v_card: usize,
    eps: T,
    grid_steps: usize,
) -> Result<GkBruteforce<T>> {
    require_four(joint)?;
    if v_card == 0 || grid_steps == 0 {
        return Err(Error::InvalidArgument("v_card and grid_steps must be positive".into()));
    }
    let x1 = joint.variable(X1)?.clone();
    let n1 = x1.card();
    let deterministic = (v_card as u128).checked_pow(n1 as u32);
    let row_points = binomial((grid_steps + v_card - 1) as u128, (v_card - 1) as u128);
    let stochastic = row_points.checked_pow(n1 as u32);
    let total = match (deterministic, stochastic) {
        (Some(d), Some(s)) => d.checked_add(s),
        _ => None,
    };
    if total.is_none_or(|t| t > GRID_BUDGET) {
        return Err(Error::TooLarge(format!("{n1} rows with v_card {v_card} and {grid_steps} grid steps")));
    }
    let v = Variable::with_alphabet(V, label_alphabet("v", v_card));
    let mut best = T::zero();
    let mut best_det = T::zero();
    let mut candidates = 0;
    let mut consider = |kernel: Vec<T>, det: bool| -> Result<()> {
        let ch = Channel::new(vec![x1.clone()], vec![v.clone()], kernel)?;
        let ext = joint.attach(&ch)?;
        candidates += 1;
        if gk_residuals(&ext)?.iter().all(|r| *r <= eps) {
            let obj = mutual_information(&ext, &[X1, X2], &[V])?;
            best = best.max(obj);
            if det {
                best_det = best_det.max(obj);
            }
        }
        Ok(())
    };

    let mut digits = vec![0usize; n1];
    loop {
        let mut kernel = vec![T::zero(); n1 * v_card];
        for (r, d) in digits.iter().enumerate() {
            kernel[r * v_card + d] = T::one();
        }
        consider(kernel, true)?;
        let mut i = 0;
        while i < n1 {
            digits[i] += 1;
            if digits[i] < v_card {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == n1 {
            break;
        }
    }

    let grid = simplex_grid(v_card, grid_steps);
    let scale = T::from_usize_lossy(grid_steps);
    let mut idx = vec![0usize; n1];
    loop {
        let kernel: Vec<T> =
            idx.iter().flat_map(|&g| grid[g].iter().map(|&k| T::from_usize_lossy(k) / scale)).collect();
        consider(kernel, false)?;
        let mut i = 0;
        while i < n1 {
            idx[i] += 1;
            if idx[i] < grid.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == n1 {
            break;
        }
    }
    Ok(GkBruteforce { best, best_deterministic: best_det, candidates })
}
