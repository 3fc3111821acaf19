//! Wyner side: upper bounds on `inf I(X1,X2;U)` subject to
//! `Z1 ↔ U ↔ Z2` and `(X1,X2) ↔ (Z1,Z2) ↔ U`.
//!
//! `U` is parameterized by `(P(U), P(Z1|U), P(Z2|U))`, which makes the
//! first condition hold by construction once the model marginal
//! `Σ_u P(u)P(z1|u)P(z2|u)` matches `P(z1,z2)`. The match is enforced by a
//! augmented Lagrangian (quadratic penalty plus multipliers, weight
//! escalated ×10 when the residual stalls); `P(U|Z1,Z2)` follows by Bayes
//! and is attached to the full joint, which enforces the second
//! condition exactly. Every reported number is recomputed on that
//! attached joint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::names::{U, X1, X2, Z1, Z2};
use crate::probability::{random_pmf, Alphabet, Channel, JointDistribution, Variable};
use crate::scalar::Real;
use crate::shannon::{conditional_mutual_information, mutual_information};

use super::gk::{simplex_grid, GRID_BUDGET};
use super::simplex::project_simplex;
use super::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WynerOptions {
    /// Cardinality of `U`; `None` means `|Z1|·|Z2|`.
    pub u_card: Option<usize>,
    /// Projected-gradient restarts from seeded random starts. When nonzero,
    /// one extra solve each at `|U|` = 2 and 3 follows (if below `u_card`).
    /// Zero keeps only the closed-form candidates.
    pub restarts: usize,
    pub seed: u64,
    /// Marginal-match residual (L1) required for feasibility.
    pub tol: f64,
    /// Projected-gradient iterations per multiplier update.
    pub max_iter: usize,
}

impl Default for WynerOptions {
    fn default() -> Self {
        Self { u_card: None, restarts: 4, seed: 0, tol: 1e-6, max_iter: 3000 }
    }
}

const FIRST_WEIGHT: f64 = 1e2;
const MAX_WEIGHT: f64 = 1e8;
const OUTER_ROUNDS: usize = 40;
const WARM_CYCLES: usize = 8;
/// Smallest objective gain (bits) that earns another warm cycle.
const WARM_GAIN: f64 = 1e-7;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const STRUCTURED: [&str; 4] = ["(Z1,Z2)", "Z1", "Z2", "support components"];

/// Markov residuals of the attached joint `(X1, X2, Z1, Z2, U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WynerResiduals<T> {
    /// `I(Z1; Z2 | U)`.
    pub conditional_independence: T,
    /// `I(X1,X2; U | Z1,Z2)`.
    pub reconstruction_markov: T,
    /// `I(Z1,Z2; U | X1,X2)`: zero when `U` carries no encoder noise
    /// beyond what `(X1,X2)` determines.
    pub encoder_markov: T,
}

/// Where the returned `U` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WynerOrigin {
    /// Exactly feasible closed-form choice, e.g. `U = Z1`.
    Structured(&'static str),
    /// Projected-gradient restart with the given index.
    Restart(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WynerSolution<T> {
    pub u_cardinality: usize,
    pub p_u: Vec<T>,
    pub p_z1_given_u: Channel<T>,
    pub p_z2_given_u: Channel<T>,
    /// `P(U | Z1, Z2)` by Bayes from the model.
    pub u_given_z: Channel<T>,
    /// `I(X1, X2; U)` in bits on the attached joint.
    pub objective: T,
    /// `Σ |Σ_u P(u)P(z1|u)P(z2|u) − P(z1,z2)|`.
    pub marginal_match_residual: T,
    pub residuals: WynerResiduals<T>,
    /// Optimizer runs, counting the reduced-cardinality ones.
    pub restarts_used: usize,
    pub origin: WynerOrigin,
    pub feasible: bool,
}

impl<T: Real> WynerSolution<T> {
    /// The input joint extended by `U`.
    pub fn extend(&self, joint: &JointDistribution<T>) -> Result<JointDistribution<T>> {
        joint.attach(&self.u_given_z)
    }
}

/// Flattened `P(x, z)` with `x = (x1, x2)` and `z = (z1, z2)`.
struct Problem<T> {
    nx: usize,
    m1: usize,
    m2: usize,
    pxz: Vec<T>,
    px: Vec<T>,
    pz: Vec<T>,
}

/// Multipliers and quadratic weight on the marginal-match constraint.
struct Penalty<T> {
    weight: T,
    mult: Vec<T>,
}

/// Largest reduced cardinality tried after the full-size restarts.
const LADDER_TOP: usize = 3;

#[derive(Debug, Clone)]
struct Params<T> {
    k: usize,
    pu: Vec<T>,
    a: Vec<T>,
    b: Vec<T>,
}

impl<T: Real> Params<T> {
    fn random<R: Rng>(k: usize, m1: usize, m2: usize, rng: &mut R) -> Self {
        Self {
            k,
            pu: random_pmf(k, rng),
            a: (0..k).flat_map(|_| random_pmf::<T, _>(m1, rng)).collect(),
            b: (0..k).flat_map(|_| random_pmf::<T, _>(m2, rng)).collect(),
        }
    }

    /// Embeds into a larger auxiliary alphabet with zero-mass atoms.
    fn pad(mut self, k: usize, m1: usize, m2: usize) -> Self {
        let extra = k - self.k;
        self.pu.extend(std::iter::repeat_n(T::zero(), extra));
        self.a.extend(std::iter::repeat_n(T::one() / T::from_usize_lossy(m1), extra * m1));
        self.b.extend(std::iter::repeat_n(T::one() / T::from_usize_lossy(m2), extra * m2));
        self.k = k;
        self
    }

    fn mix(&self, other: &Self, w: T) -> Self {
        let f = |x: &[T], y: &[T]| x.iter().zip(y).map(|(a, b)| (T::one() - w) * *a + w * *b).collect();
        Self { k: self.k, pu: f(&self.pu, &other.pu), a: f(&self.a, &other.a), b: f(&self.b, &other.b) }
    }

    fn step(&self, g: &Self, t: T, m1: usize, m2: usize) -> Self {
        let mv = |x: &[T], d: &[T]| -> Vec<T> { x.iter().zip(d).map(|(a, b)| *a - t * *b).collect() };
        let mut out = Self { k: self.k, pu: mv(&self.pu, &g.pu), a: mv(&self.a, &g.a), b: mv(&self.b, &g.b) };
        project_simplex(&mut out.pu);
        out.a.chunks_mut(m1).for_each(project_simplex);
        out.b.chunks_mut(m2).for_each(project_simplex);
        out
    }

    fn dot_diff(&self, other: &Self, g: &Self) -> T {
        let d = |x: &[T], y: &[T], g: &[T]| -> T { x.iter().zip(y).zip(g).map(|((a, b), c)| (*a - *b) * *c).sum() };
        d(&other.pu, &self.pu, &g.pu) + d(&other.a, &self.a, &g.a) + d(&other.b, &self.b, &g.b)
    }

    fn max_diff(&self, other: &Self) -> T {
        self.pu
            .iter()
            .zip(&other.pu)
            .chain(self.a.iter().zip(&other.a))
            .chain(self.b.iter().zip(&other.b))
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T: Real> Problem<T> {
    fn new(joint: &JointDistribution<T>) -> Result<Self> {
        let full = joint.marginalize(&[X1, X2, Z1, Z2])?;
        let d = full.dims();
        let (nx, m1, m2) = (d[0] * d[1], d[2], d[3]);
        let nz = m1 * m2;
        let pxz = full.pmf().to_vec();
        let px = pxz.chunks(nz).map(|r| r.iter().copied().sum()).collect();
        let mut pz = vec![T::zero(); nz];
        for row in pxz.chunks(nz) {
            for (z, p) in row.iter().enumerate() {
                pz[z] = pz[z] + *p;
            }
        }
        Ok(Self { nx, m1, m2, pxz, px, pz })
    }

    fn nz(&self) -> usize {
        self.m1 * self.m2
    }

    /// Per-`u` model masses `P(u)P(z1|u)P(z2|u)` and their sum over `u`.
    fn model(&self, p: &Params<T>) -> (Vec<T>, Vec<T>) {
        let nz = self.nz();
        let mut mu = vec![T::zero(); p.k * nz];
        let mut m = vec![T::zero(); nz];
        for u in 0..p.k {
            for z1 in 0..self.m1 {
                let pa = p.pu[u] * p.a[u * self.m1 + z1];
                for z2 in 0..self.m2 {
                    let v = pa * p.b[u * self.m2 + z2];
                    mu[u * nz + z1 * self.m2 + z2] = v;
                    m[z1 * self.m2 + z2] = m[z1 * self.m2 + z2] + v;
                }
            }
        }
        (mu, m)
    }

    fn residual(&self, p: &Params<T>) -> T {
        let (_, m) = self.model(p);
        m.iter().zip(&self.pz).map(|(a, b)| (*a - *b).abs()).sum()
    }

    /// Posterior `P(u | z)` laid out `[u * nz + z]`; uniform where the
    /// model puts no mass.
    fn posterior(&self, mu: &[T], m: &[T], k: usize) -> Vec<T> {
        let nz = self.nz();
        let mut r = vec![T::zero(); k * nz];
        let unif = T::one() / T::from_usize_lossy(k);
        for z in 0..nz {
            for u in 0..k {
                r[u * nz + z] = if m[z] > T::zero() { mu[u * nz + z] / m[z] } else { unif };
            }
        }
        r
    }

    /// Augmented objective `I(X;U) + Σ_z y_z (M(z) − P(z)) + μ Σ_z (M(z) − P(z))²`
    /// and, if asked, its gradient.
    fn evaluate(&self, p: &Params<T>, pen: &Penalty<T>, grad: bool) -> (T, Option<Params<T>>) {
        let (nx, nz, k) = (self.nx, self.nz(), p.k);
        let (mu, m) = self.model(p);
        let r = self.posterior(&mu, &m, k);
        let mut pxu = vec![T::zero(); nx * k];
        let mut pu = vec![T::zero(); k];
        for x in 0..nx {
            for z in 0..nz {
                let pxz = self.pxz[x * nz + z];
                if pxz > T::zero() {
                    for u in 0..k {
                        pxu[x * k + u] = pxu[x * k + u] + pxz * r[u * nz + z];
                    }
                }
            }
        }
        for z in 0..nz {
            for u in 0..k {
                pu[u] = pu[u] + self.pz[z] * r[u * nz + z];
            }
        }
        let mut info = T::zero();
        let floor = T::min_positive_value();
        let mut log_ratio = vec![T::zero(); nx * k];
        for x in 0..nx {
            for u in 0..k {
                let v = pxu[x * k + u];
                let denom = self.px[x] * pu[u];
                if v > T::zero() && denom > T::zero() {
                    let l = (v / denom).log2();
                    info = info + v * l;
                    log_ratio[x * k + u] = l;
                } else if denom > T::zero() {
                    log_ratio[x * k + u] = (floor / denom).log2();
                }
            }
        }
        let penalty: T =
            m.iter().zip(&self.pz).zip(&pen.mult).map(|((a, b), y)| (*a - *b) * (*y + pen.weight * (*a - *b))).sum();
        let value = info.max(T::zero()) + penalty;
        if !grad {
            return (value, None);
        }
        // ∂I/∂r_u(z) = Σ_x P(x,z) log2(P(x,u) / (P(x)P(u)))
        let mut g = vec![T::zero(); k * nz];
        for x in 0..nx {
            for z in 0..nz {
                let pxz = self.pxz[x * nz + z];
                if pxz > T::zero() {
                    for u in 0..k {
                        g[u * nz + z] = g[u * nz + z] + pxz * log_ratio[x * k + u];
                    }
                }
            }
        }
        let two = T::lit(2.0);
        let mut dm = vec![T::zero(); k * nz];
        for z in 0..nz {
            let mean: T = (0..k).map(|u| r[u * nz + z] * g[u * nz + z]).sum();
            let pen = pen.mult[z] + two * pen.weight * (m[z] - self.pz[z]);
            for v in 0..k {
                let info_part = if m[z] > T::zero() { (g[v * nz + z] - mean) / m[z] } else { T::zero() };
                dm[v * nz + z] = info_part + pen;
            }
        }
        let mut out =
            Params { k, pu: vec![T::zero(); k], a: vec![T::zero(); p.a.len()], b: vec![T::zero(); p.b.len()] };
        for v in 0..k {
            for z1 in 0..self.m1 {
                for z2 in 0..self.m2 {
                    let d = dm[v * nz + z1 * self.m2 + z2];
                    let (a, b) = (p.a[v * self.m1 + z1], p.b[v * self.m2 + z2]);
                    out.pu[v] = out.pu[v] + d * a * b;
                    out.a[v * self.m1 + z1] = out.a[v * self.m1 + z1] + d * p.pu[v] * b;
                    out.b[v * self.m2 + z2] = out.b[v * self.m2 + z2] + d * p.pu[v] * a;
                }
            }
        }
        (value, Some(out))
    }

    /// Projected gradient with Armijo backtracking for fixed multipliers.
    fn descend(&self, mut p: Params<T>, pen: &Penalty<T>, max_iter: usize) -> Params<T> {
        let (mut f, mut g) = self.evaluate(&p, pen, true);
        let mut t = T::lit(0.5);
        for _ in 0..max_iter {
            let grad = g.take().expect("gradient requested");
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let cand = p.step(&grad, t, self.m1, self.m2);
                let (fc, _) = self.evaluate(&cand, pen, false);
                if fc <= f + T::lit(ARMIJO) * p.dot_diff(&cand, &grad) {
                    accepted = Some((cand, fc));
                    break;
                }
                t = t * T::lit(0.5);
            }
            let Some((cand, fc)) = accepted else { break };
            let moved = p.max_diff(&cand);
            let decrease = f - fc;
            p = cand;
            (f, g) = self.evaluate(&p, pen, true);
            t = (t * T::lit(2.0)).min(T::lit(0.5));
            if moved < T::lit(1e-13) || decrease <= T::lit(1e-15) * (T::one() + f.abs()) {
                break;
            }
        }
        p
    }

    /// One augmented-Lagrangian run: inner descents with multiplier
    /// updates, raising the weight when the residual stalls.
    fn augmented(&self, mut p: Params<T>, pen: &mut Penalty<T>, opts: &WynerOptions) -> Params<T> {
        let tol = T::lit(opts.tol);
        let mut last = self.residual(&p);
        for _ in 0..OUTER_ROUNDS {
            p = self.descend(p, pen, opts.max_iter);
            let res = self.residual(&p);
            if res < tol {
                break;
            }
            let (_, m) = self.model(&p);
            for (y, (a, b)) in pen.mult.iter_mut().zip(m.iter().zip(&self.pz)) {
                *y = *y + T::lit(2.0) * pen.weight * (*a - *b);
            }
            if res > T::lit(0.25) * last && pen.weight < T::lit(MAX_WEIGHT) {
                pen.weight = pen.weight * T::lit(10.0);
            }
            last = res;
        }
        p
    }

    /// Repeats [`Self::augmented`] from its own output with the weight
    /// reset and the multipliers kept. A large weight makes the feasible
    /// set a narrow valley the descent cannot follow; with good
    /// multipliers a small weight suffices and the iterate can move along it.
    fn optimize(&self, p: Params<T>, opts: &WynerOptions) -> Params<T> {
        let mut pen = Penalty { weight: T::lit(FIRST_WEIGHT), mult: vec![T::zero(); self.nz()] };
        let mut p = self.augmented(p, &mut pen, opts);
        let tol = T::lit(opts.tol);
        if self.residual(&p) >= tol {
            return p;
        }
        let free = Penalty { weight: T::zero(), mult: vec![T::zero(); self.nz()] };
        let mut value = self.evaluate(&p, &free, false).0;
        for _ in 0..WARM_CYCLES {
            pen.weight = T::lit(FIRST_WEIGHT);
            let q = self.augmented(p.clone(), &mut pen, opts);
            let v = self.evaluate(&q, &free, false).0;
            if self.residual(&q) >= tol || v >= value - T::lit(WARM_GAIN) {
                break;
            }
            (p, value) = (q, v);
        }
        p
    }

    /// Closed-form feasible choices of `U`, in the order of [`STRUCTURED`];
    /// `None` where `k` is too small or the choice is infeasible.
    fn structured(&self, k: usize, tol: T) -> Vec<Option<Params<T>>> {
        let (m1, m2, nz) = (self.m1, self.m2, self.nz());
        let empty = |k| Params {
            k,
            pu: vec![T::zero(); k],
            a: vec![T::one() / T::from_usize_lossy(m1); k * m1],
            b: vec![T::one() / T::from_usize_lossy(m2); k * m2],
        };
        let mut out = Vec::new();

        // U = (Z1, Z2) over the support
        let support: Vec<usize> = (0..nz).filter(|&z| self.pz[z] > T::zero()).collect();
        out.push((support.len() <= k).then(|| {
            let mut p = empty(k);
            for (u, &z) in support.iter().enumerate() {
                p.pu[u] = self.pz[z];
                p.a[u * m1..(u + 1) * m1].iter_mut().for_each(|v| *v = T::zero());
                p.b[u * m2..(u + 1) * m2].iter_mut().for_each(|v| *v = T::zero());
                p.a[u * m1 + z / m2] = T::one();
                p.b[u * m2 + z % m2] = T::one();
            }
            p
        }));

        // U = Z1 and U = Z2
        for side in 0..2 {
            let (ms, mo) = if side == 0 { (m1, m2) } else { (m2, m1) };
            let cell = |s: usize, o: usize| if side == 0 { self.pz[s * m2 + o] } else { self.pz[o * m2 + s] };
            let marg: Vec<T> = (0..ms).map(|s| (0..mo).map(|o| cell(s, o)).sum()).collect();
            let used: Vec<usize> = (0..ms).filter(|&s| marg[s] > T::zero()).collect();
            out.push((used.len() <= k).then(|| {
                let mut p = empty(k);
                for (u, &s) in used.iter().enumerate() {
                    p.pu[u] = marg[s];
                    let (own, other, mown, moth) =
                        if side == 0 { (&mut p.a, &mut p.b, m1, m2) } else { (&mut p.b, &mut p.a, m2, m1) };
                    own[u * mown..(u + 1) * mown].iter_mut().for_each(|v| *v = T::zero());
                    own[u * mown + s] = T::one();
                    for o in 0..moth {
                        other[u * moth + o] = cell(s, o) / marg[s];
                    }
                }
                p
            }));
        }

        // U = component of the support graph of P(z1, z2), when the
        // reconstructions are independent inside every component
        let mut uf = UnionFind::new(m1 + m2);
        for &z in &support {
            uf.union(z / m2, m1 + z % m2);
        }
        let labels = uf.labels_in_order(support.iter().map(|&z| z / m2));
        let n_comp = labels.iter().flatten().max().map_or(0, |c| c + 1);
        let comp = |z: usize| labels[z / m2];
        out.push(
            (n_comp >= 1 && n_comp <= k)
                .then(|| {
                    let mut p = empty(k);
                    for u in 0..n_comp {
                        p.a[u * m1..(u + 1) * m1].iter_mut().for_each(|v| *v = T::zero());
                        p.b[u * m2..(u + 1) * m2].iter_mut().for_each(|v| *v = T::zero());
                    }
                    for &z in &support {
                        let c = comp(z).expect("support row labelled");
                        p.pu[c] = p.pu[c] + self.pz[z];
                        p.a[c * m1 + z / m2] = p.a[c * m1 + z / m2] + self.pz[z];
                        p.b[c * m2 + z % m2] = p.b[c * m2 + z % m2] + self.pz[z];
                    }
                    for c in 0..n_comp {
                        let mass = p.pu[c];
                        p.a[c * m1..(c + 1) * m1].iter_mut().for_each(|v| *v = *v / mass);
                        p.b[c * m2..(c + 1) * m2].iter_mut().for_each(|v| *v = *v / mass);
                    }
                    p
                })
                .filter(|p| self.residual(p) < tol),
        );
        out
    }
}

/// Certified evaluation of a parameter set on the attached joint.
fn certify<T: Real>(
    joint: &JointDistribution<T>,
    problem: &Problem<T>,
    p: &Params<T>,
    origin: WynerOrigin,
    restarts_used: usize,
    tol: T,
) -> Result<WynerSolution<T>> {
    let k = p.k;
    let nz = problem.nz();
    let (mu, m) = problem.model(p);
    let post = problem.posterior(&mu, &m, k);
    let u_var = Variable::with_alphabet(U, Alphabet::new((0..k).map(|i| format!("u{i}")))?);
    let (z1, z2) = (joint.variable(Z1)?.clone(), joint.variable(Z2)?.clone());
    let mut kernel = Vec::with_capacity(nz * k);
    for z in 0..nz {
        kernel.extend((0..k).map(|u| post[u * nz + z]));
    }
    let u_given_z = Channel::new(vec![z1.clone(), z2.clone()], vec![u_var.clone()], kernel)?;
    let ext = joint.attach(&u_given_z)?;
    let residuals = WynerResiduals {
        conditional_independence: conditional_mutual_information(&ext, &[Z1], &[Z2], &[U])?,
        reconstruction_markov: conditional_mutual_information(&ext, &[X1, X2], &[U], &[Z1, Z2])?,
        encoder_markov: conditional_mutual_information(&ext, &[Z1, Z2], &[U], &[X1, X2])?,
    };
    let marginal_match_residual = problem.residual(p);
    let renorm = |rows: &[T], n: usize| -> Vec<T> {
        rows.chunks(n)
            .flat_map(|r| {
                let s: T = r.iter().copied().sum();
                r.iter().map(move |v| *v / s).collect::<Vec<_>>()
            })
            .collect()
    };
    Ok(WynerSolution {
        u_cardinality: k,
        p_u: p.pu.clone(),
        p_z1_given_u: Channel::new(vec![u_var.clone()], vec![z1], renorm(&p.a, problem.m1))?,
        p_z2_given_u: Channel::new(vec![u_var], vec![z2], renorm(&p.b, problem.m2))?,
        u_given_z,
        objective: mutual_information(&ext, &[X1, X2], &[U])?,
        marginal_match_residual,
        residuals,
        restarts_used,
        origin,
        feasible: marginal_match_residual < tol,
    })
}

/// Upper bound on Wyner's lossy common information for the encoder
/// carried by `joint` (variables `X1, X2, Z1, Z2`).
///
/// Candidates are the exactly feasible structured choices of `U` followed
/// by `opts.restarts` penalty-method runs (restart 0 starts near the best
/// structured choice, the rest from seeded random points). The feasible
/// candidate with the smallest `I(X1,X2;U)` wins, earliest on ties
/// (objectives within `opts.tol` count as tied). If
/// nothing is feasible the least-infeasible candidate is returned with
/// `feasible = false`.
pub fn wyner_upper<T: Real>(joint: &JointDistribution<T>, opts: &WynerOptions) -> Result<WynerSolution<T>> {
    for n in [X1, X2, Z1, Z2] {
        joint.position(n)?;
    }
    let problem = Problem::new(joint)?;
    let k = opts.u_card.unwrap_or(problem.nz());
    if k == 0 {
        return Err(Error::InvalidArgument("u_card must be at least 1".into()));
    }
    let tol = T::lit(opts.tol);
    let mut best: Option<WynerSolution<T>> = None;
    let better = |cand: &WynerSolution<T>, cur: &Option<WynerSolution<T>>| match cur {
        None => true,
        Some(c) => match (cand.feasible, c.feasible) {
            (true, false) => true,
            (false, true) => false,
            // penalty solutions may undercut by O(residual); keep the
            // earlier, exactly feasible candidate on near-ties
            (true, true) => cand.objective < c.objective - tol,
            (false, false) => cand.marginal_match_residual < c.marginal_match_residual,
        },
    };

    let structured = problem.structured(k, tol);
    let mut seed_point: Option<(T, Params<T>)> = None;
    for (name, cand) in STRUCTURED.iter().zip(structured) {
        let Some(p) = cand else { continue };
        let sol = certify(joint, &problem, &p, WynerOrigin::Structured(name), 0, tol)?;
        if seed_point.as_ref().is_none_or(|(o, _)| sol.objective < *o) {
            seed_point = Some((sol.objective, p));
        }
        if better(&sol, &best) {
            best = Some(sol);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // after the full-size restarts, one solve each with |U| = 2 and 3:
    // small auxiliaries avoid some poor local minima of the full problem
    let top = if opts.restarts == 0 { 2 } else { k.min(LADDER_TOP + 1) };
    let ladder = (2..top).map(Some);
    for (restart, rung) in (0..opts.restarts).map(|_| None).chain(ladder).enumerate() {
        let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
        let kk = rung.unwrap_or(k);
        let noise = Params::random(kk, problem.m1, problem.m2, &mut local);
        let start = match (&seed_point, restart, rung) {
            (Some((_, p)), 0, None) => p.mix(&noise, T::lit(0.1)),
            _ => noise,
        };
        let p = problem.optimize(start, opts).pad(k, problem.m1, problem.m2);
        let sol = certify(joint, &problem, &p, WynerOrigin::Restart(restart), 0, tol)?;
        if better(&sol, &best) {
            best = Some(sol);
        }
    }
    let mut best = best.expect("at least one candidate");
    best.restarts_used = opts.restarts + top.saturating_sub(2);
    Ok(best)
}

/// Solves the square linear system `g · x = rhs` (row-major `n × n`) by
/// Gaussian elimination with partial pivoting.
fn solve_square<T: Real>(mut g: Vec<T>, mut rhs: Vec<T>, n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| g[a * n + col].abs().partial_cmp(&g[b * n + col].abs()).unwrap())?;
        if g[piv * n + col].abs() < T::lit(1e-12) {
            return None;
        }
        if piv != col {
            for j in 0..n {
                g.swap(col * n + j, piv * n + j);
            }
            rhs.swap(col, piv);
        }
        for row in col + 1..n {
            let f = g[row * n + col] / g[col * n + col];
            for j in col..n {
                g[row * n + j] = g[row * n + j] - f * g[col * n + j];
            }
            rhs[row] = rhs[row] - f * rhs[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s: T = (row + 1..n).map(|j| g[row * n + j] * x[j]).sum();
        x[row] = (rhs[row] - s) / g[row * n + row];
    }
    Some(x)
}

/// Exhaustive oracle for small instances with `u_card = |Z1|`.
///
/// Grids `P(U)` and `P(Z1|U)` at resolution `1/grid_steps`, solves the
/// marginal-match equations for `P(Z2|U)` exactly, keeps the
/// nonnegative solutions, and evaluates `I(X1,X2;U)` on the attached
/// joint. The search is then repeated once on a finer local grid around
/// the best point.
pub fn wyner_bruteforce<T: Real>(joint: &JointDistribution<T>, u_card: usize, grid_steps: usize) -> Result<T> {
    let full = joint.marginalize(&[X1, X2, Z1, Z2])?;
    let (z1, z2) = (full.variable(Z1)?.clone(), full.variable(Z2)?.clone());
    let (m1, m2) = (z1.card(), z2.card());
    if u_card != m1 {
        return Err(Error::InvalidArgument(format!(
            "brute force solves square systems: u_card must equal |Z1| = {m1}"
        )));
    }
    if grid_steps == 0 {
        return Err(Error::InvalidArgument("grid_steps must be positive".into()));
    }
    let pz = full.marginalize(&[Z1, Z2])?;
    let k = u_card;
    let pu_grid = simplex_grid(k, grid_steps);
    let a_grid = simplex_grid(m1, grid_steps);
    let count = (pu_grid.len() as u128).checked_mul((a_grid.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX));
    if count.is_none_or(|c| c > GRID_BUDGET) {
        return Err(Error::TooLarge(format!("{k} auxiliary values at {grid_steps} grid steps")));
    }
    let u_var = Variable::with_alphabet(U, Alphabet::new((0..k).map(|i| format!("u{i}")))?);

    // Evaluates a point (P(U), P(Z1|U) rows); None when infeasible.
    let evaluate = |pu: &[T], a: &[T]| -> Result<Option<T>> {
        let g: Vec<T> = (0..m1).flat_map(|z| (0..k).map(move |u| pu[u] * a[u * m1 + z])).collect();
        let mut b = vec![T::zero(); k * m2];
        for zz in 0..m2 {
            let rhs: Vec<T> = (0..m1).map(|z| pz.pmf()[z * m2 + zz]).collect();
            let Some(col) = solve_square(g.clone(), rhs, k) else { return Ok(None) };
            for u in 0..k {
                if col[u] < T::lit(-1e-12) {
                    return Ok(None);
                }
                b[u * m2 + zz] = col[u].max(T::zero());
            }
        }
        let mut kernel = Vec::with_capacity(m1 * m2 * k);
        for zi in 0..m1 {
            for zj in 0..m2 {
                let masses: Vec<T> = (0..k).map(|u| pu[u] * a[u * m1 + zi] * b[u * m2 + zj]).collect();
                let total: T = masses.iter().copied().sum();
                let target = pz.pmf()[zi * m2 + zj];
                if (total - target).abs() > T::lit(1e-9) {
                    return Ok(None);
                }
                if total > T::zero() {
                    kernel.extend(masses.iter().map(|v| *v / total));
                } else {
                    kernel.extend((0..k).map(|_| T::one() / T::from_usize_lossy(k)));
                }
            }
        }
        let ch = Channel::new(vec![z1.clone(), z2.clone()], vec![u_var.clone()], kernel)?;
        let ext = full.attach(&ch)?;
        Ok(Some(mutual_information(&ext, &[X1, X2], &[U])?))
    };

    let scale = T::from_usize_lossy(grid_steps);
    let to_real = |pt: &[usize]| -> Vec<T> { pt.iter().map(|&v| T::from_usize_lossy(v) / scale).collect() };
    let mut best: Option<(T, Vec<T>, Vec<T>)> = None;
    let mut idx = vec![0usize; k];
    for pu_pt in &pu_grid {
        let pu = to_real(pu_pt);
        idx.iter_mut().for_each(|i| *i = 0);
        loop {
            let a: Vec<T> = idx.iter().flat_map(|&i| to_real(&a_grid[i])).collect();
            if let Some(v) = evaluate(&pu, &a)? {
                if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                    best = Some((v, pu.clone(), a));
                }
            }
            let mut i = 0;
            while i < k {
                idx[i] += 1;
                if idx[i] < a_grid.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    let Some((mut value, pu0, a0)) = best else {
        return Err(Error::InvalidArgument("no feasible grid point; increase grid_steps".into()));
    };

    // Local refinement: free coordinates (all but the last of each
    // simplex block) on a grid spanning ±1 coarse cell.
    let blocks: Vec<(usize, usize)> = std::iter::once((0, k)).chain((0..k).map(|u| (k + u * m1, m1))).collect();
    let point: Vec<T> = pu0.iter().chain(&a0).copied().collect();
    let free: Vec<usize> = blocks.iter().flat_map(|&(s, n)| s..s + n - 1).collect();
    let budget = (GRID_BUDGET / 1000) as f64;
    let per_axis = ((budget.powf(1.0 / free.len().max(1) as f64)).floor() as usize).clamp(3, 2 * grid_steps + 1);
    let half = T::one() / scale;
    let step = T::lit(2.0) * half / T::from_usize_lossy(per_axis - 1);
    let mut digits = vec![0usize; free.len()];
    'outer: loop {
        let mut cand = point.clone();
        for (d, &f) in digits.iter().zip(&free) {
            cand[f] = point[f] - half + step * T::from_usize_lossy(*d);
        }
        let mut ok = true;
        for &(s, n) in &blocks {
            let partial: T = cand[s..s + n - 1].iter().copied().sum();
            cand[s + n - 1] = T::one() - partial;
            if cand[s..s + n].iter().any(|v| *v < T::zero()) {
                ok = false;
            }
        }
        if ok {
            if let Some(v) = evaluate(&cand[..k], &cand[k..])? {
                value = value.min(v);
            }
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                break 'outer;
            }
            digits[i] += 1;
            if digits[i] < per_axis {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
    Ok(value)
}
