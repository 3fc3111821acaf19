//! Blahut–Arimoto rate-distortion solvers.
//!
//! The Lagrange multiplier `λ` is measured in bits per unit distortion:
//! the solver minimizes `I(X;Ẑ) + Σ λ_k E[d_k]` with encoder updates
//! `q(ẑ|x) ∝ r(ẑ) 2^{-Σ λ_k d_k(x,ẑ)}`, so `-λ` is the slope of `R(D)` in
//! bits. `λ = ∞` restricts each source symbol to its minimum-cost
//! reconstructions, which yields the `D_min` endpoint exactly.
//!
//! [`ba_joint`] handles two distortion constraints on a source pair.
//! Reconstruction alphabets are products, one factor per constraint, and
//! the outer search picks `(λ1, λ2)` so that both targets are met or
//! their constraint is slack.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::probability::{Alphabet, Channel, JointDistribution, Variable};
use crate::scalar::Real;

/// Nonnegative cost matrix `d(x, ẑ)`, rows indexed by source symbol.
/// Infinite entries forbid the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMeasure<T> {
    source: Alphabet,
    reconstruction: Alphabet,
    costs: Vec<T>,
}

impl<T: Real> DistortionMeasure<T> {
    pub fn new(source: Alphabet, reconstruction: Alphabet, costs: Vec<T>) -> Result<Self> {
        let (n, m) = (source.len(), reconstruction.len());
        if costs.len() != n * m {
            return Err(Error::ShapeMismatch { expected: n * m, found: costs.len() });
        }
        if costs.iter().any(|c| c.is_nan() || *c < T::zero()) {
            return Err(Error::InvalidDistortion("costs must be nonnegative".into()));
        }
        if costs.chunks(m).any(|row| row.iter().all(|c| c.is_infinite())) {
            return Err(Error::InvalidDistortion("every source symbol needs a finite-cost reconstruction".into()));
        }
        Ok(Self { source, reconstruction, costs })
    }

    /// Hamming distortion on a shared alphabet.
    pub fn hamming(alphabet: &Alphabet) -> Self {
        let n = alphabet.len();
        let costs = (0..n * n).map(|k| if k / n == k % n { T::zero() } else { T::one() }).collect();
        Self { source: alphabet.clone(), reconstruction: alphabet.clone(), costs }
    }

    /// Effective distortion for a remote target `Z` observed through
    /// `target` (`P(Z|X)`): `d̃(x, ẑ) = E[d(Z, ẑ) | X = x]`.
    pub fn effective(target: &Channel<T>, d: &DistortionMeasure<T>) -> Result<Self> {
        if target.inputs().len() != 1 || target.outputs().len() != 1 {
            return Err(Error::InvalidArgument("target channel must map one variable to one".into()));
        }
        if target.outputs()[0].alphabet != d.source {
            return Err(Error::AlphabetMismatch(target.outputs()[0].name.clone()));
        }
        let m = d.reconstruction.len();
        let mut costs = Vec::with_capacity(target.input_card() * m);
        for x in 0..target.input_card() {
            for zh in 0..m {
                let mut c = T::zero();
                for (z, p) in target.row(x).iter().enumerate() {
                    if *p > T::zero() {
                        c = c + *p * d.cost(z, zh);
                    }
                }
                costs.push(c);
            }
        }
        Self::new(target.inputs()[0].alphabet.clone(), d.reconstruction.clone(), costs)
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn reconstruction(&self) -> &Alphabet {
        &self.reconstruction
    }

    pub fn costs(&self) -> &[T] {
        &self.costs
    }

    pub fn cost(&self, x: usize, zh: usize) -> T {
        self.costs[x * self.reconstruction.len() + zh]
    }

    /// `Σ_x p(x) min_ẑ d(x, ẑ)`.
    pub fn min_distortion(&self, source: &[T]) -> T {
        min_distortion(source, &self.costs, self.reconstruction.len())
    }

    /// Smallest distortion reachable at rate zero: `min_ẑ Σ_x p(x) d(x, ẑ)`.
    pub fn zero_rate_distortion(&self, source: &[T]) -> T {
        zero_rate(source, &self.costs, self.reconstruction.len()).1
    }
}

/// Solver knobs. Defaults: rate tolerance `1e-9`, distortion tolerance
/// `1e-6`, `10_000` iterations, no extra restarts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdOptions {
    /// Stop when the per-iteration change in rate and objective is below this.
    pub tol: f64,
    /// Accepted `|achieved − target|` in distortion searches.
    pub distortion_tol: f64,
    pub max_iter: usize,
    /// Extra seed-perturbed initializations of the output marginal.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for RdOptions {
    fn default() -> Self {
        Self { tol: 1e-9, distortion_tol: 1e-6, max_iter: 10_000, restarts: 0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdSolution<T> {
    /// One multiplier per constraint; `0` marks a slack constraint and
    /// `∞` a constraint pinned at its minimum distortion.
    pub lagrange: Vec<T>,
    /// `I(X; Ẑ)` in bits.
    pub rate: T,
    pub distortions: Vec<T>,
    pub encoder: Channel<T>,
    pub iterations: usize,
    pub converged: bool,
}

fn min_distortion<T: Real>(px: &[T], costs: &[T], m: usize) -> T {
    px.iter()
        .zip(costs.chunks(m))
        .filter(|(p, _)| **p > T::zero())
        .map(|(p, row)| *p * row.iter().copied().fold(T::infinity(), T::min))
        .sum()
}

/// `(argmin, min)` of expected cost over constant reconstructions.
fn zero_rate<T: Real>(px: &[T], costs: &[T], m: usize) -> (usize, T) {
    (0..m)
        .map(|zh| {
            let d: T =
                px.iter().enumerate().filter(|(_, p)| **p > T::zero()).map(|(x, p)| *p * costs[x * m + zh]).sum();
            (zh, d)
        })
        .fold((0, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Cost terms over a common source; reconstruction `ẑ = (ẑ_1, ..., ẑ_K)`
/// is a product with term `k` reading component `k`.
struct Terms<'a, T> {
    px: &'a [T],
    cards: Vec<usize>,
    costs: Vec<&'a [T]>,
    /// `components[z * K + k]` is component `k` of flat reconstruction `z`.
    components: Vec<usize>,
}

/// One Blahut–Arimoto run.
#[derive(Debug, Clone)]
struct Run<T> {
    q: Vec<T>,
    r: Vec<T>,
    rate: T,
    distortions: Vec<T>,
    objective: T,
    iterations: usize,
    converged: bool,
    history: Vec<T>,
}

impl<'a, T: Real> Terms<'a, T> {
    fn new(px: &'a [T], terms: Vec<(&'a [T], usize)>) -> Self {
        let cards: Vec<usize> = terms.iter().map(|t| t.1).collect();
        let nz: usize = cards.iter().product();
        let mut components = Vec::with_capacity(nz * cards.len());
        for z in 0..nz {
            let mut rem = z;
            let mut digits = vec![0; cards.len()];
            for k in (0..cards.len()).rev() {
                digits[k] = rem % cards[k];
                rem /= cards[k];
            }
            components.extend(digits);
        }
        Self { px, cards, costs: terms.into_iter().map(|t| t.0).collect(), components }
    }

    fn nx(&self) -> usize {
        self.px.len()
    }

    fn nz(&self) -> usize {
        self.cards.iter().product()
    }

    fn term_cost(&self, k: usize, x: usize, z: usize) -> T {
        let zk = self.components[z * self.cards.len() + k];
        self.costs[k][x * self.cards[k] + zk]
    }

    /// Unnormalized update weights `2^{-(c(x,ẑ) − c_min(x))}`, zero where
    /// the pair is forbidden.
    fn weights(&self, lambdas: &[T]) -> Vec<T> {
        let (nx, nz, kk) = (self.nx(), self.nz(), self.cards.len());
        let row_min: Vec<Vec<T>> = (0..kk)
            .map(|k| {
                self.costs[k].chunks(self.cards[k]).map(|row| row.iter().copied().fold(T::infinity(), T::min)).collect()
            })
            .collect();
        let slack = T::lit(1e-12);
        let mut w = vec![T::zero(); nx * nz];
        for x in 0..nx {
            let mut cost = vec![T::infinity(); nz];
            for (z, c) in cost.iter_mut().enumerate() {
                let mut total = T::zero();
                let mut allowed = true;
                for k in 0..kk {
                    let d = self.term_cost(k, x, z);
                    if d.is_infinite() {
                        allowed = false;
                        break;
                    }
                    if lambdas[k].is_infinite() {
                        if d > row_min[k][x] + slack * (T::one() + row_min[k][x].abs()) {
                            allowed = false;
                            break;
                        }
                    } else {
                        total = total + lambdas[k] * d;
                    }
                }
                if allowed {
                    *c = total;
                }
            }
            let cmin = cost.iter().copied().fold(T::infinity(), T::min);
            for z in 0..nz {
                if cost[z].is_finite() {
                    w[x * nz + z] = (cmin - cost[z]).exp2();
                }
            }
        }
        w
    }

    fn solve(&self, lambdas: &[T], init_r: &[T], opts: &RdOptions) -> Run<T> {
        let (nx, nz) = (self.nx(), self.nz());
        let w = self.weights(lambdas);
        let tol = T::lit(opts.tol);
        let mut r = init_r.to_vec();
        let mut q = vec![T::zero(); nx * nz];
        let mut history = Vec::new();
        let mut prev: Option<(T, T)> = None;
        let mut converged = false;
        let mut iterations = 0;
        let (mut rate, mut distortions, mut objective) = (T::zero(), vec![], T::zero());
        while iterations < opts.max_iter.max(1) {
            iterations += 1;
            for x in 0..nx {
                let wr = &w[x * nz..(x + 1) * nz];
                let row = &mut q[x * nz..(x + 1) * nz];
                let den: T = wr.iter().zip(&r).map(|(a, b)| *a * *b).sum();
                if den > T::zero() {
                    for z in 0..nz {
                        row[z] = wr[z] * r[z] / den;
                    }
                } else {
                    // output marginal vanished on every admissible symbol
                    let best: Vec<usize> = (0..nz).filter(|&z| wr[z] == T::one()).collect();
                    let u = T::one() / T::from_usize_lossy(best.len());
                    row.iter_mut().for_each(|p| *p = T::zero());
                    best.into_iter().for_each(|z| row[z] = u);
                }
            }
            let r_next = self.output_marginal(&q);
            let gap = self.bound_gap(&w, &r);
            r = r_next;
            (rate, distortions) = self.evaluate(&q, &r);
            objective =
                rate + lambdas.iter().zip(&distortions).filter(|(l, _)| l.is_finite()).map(|(l, d)| *l * *d).sum::<T>();
            history.push(objective);
            if let Some((pr, po)) = prev {
                if gap < tol || ((rate - pr).abs() < tol && (objective - po).abs() < tol) {
                    converged = true;
                    break;
                }
            }
            prev = Some((rate, objective));
        }
        Run { q, r, rate, distortions, objective, iterations, converged, history }
    }

    /// Width of the Blahut bracket on the optimal objective at output
    /// marginal `r`: `log2 max_ẑ c(ẑ) − Σ_ẑ r(ẑ) c(ẑ) log2 c(ẑ)` with
    /// `c(ẑ) = Σ_x p(x) w(x,ẑ) / Σ_ẑ' r(ẑ') w(x,ẑ')`.
    fn bound_gap(&self, w: &[T], r: &[T]) -> T {
        let nz = self.nz();
        let mut c = vec![T::zero(); nz];
        for (x, p) in self.px.iter().enumerate() {
            if *p <= T::zero() {
                continue;
            }
            let wr = &w[x * nz..(x + 1) * nz];
            let den: T = wr.iter().zip(r).map(|(a, b)| *a * *b).sum();
            if den <= T::zero() {
                return T::infinity();
            }
            for z in 0..nz {
                c[z] = c[z] + *p * wr[z] / den;
            }
        }
        let max = c.iter().copied().fold(T::zero(), T::max);
        let mean: T = c.iter().zip(r).map(|(cz, rz)| *rz * cz.xlog2x()).sum();
        (max.log2() - mean).max(T::zero())
    }

    fn output_marginal(&self, q: &[T]) -> Vec<T> {
        let nz = self.nz();
        let mut r = vec![T::zero(); nz];
        for (x, p) in self.px.iter().enumerate() {
            if *p > T::zero() {
                for z in 0..nz {
                    r[z] = r[z] + *p * q[x * nz + z];
                }
            }
        }
        r
    }

    /// `(I(X;Ẑ) in bits, expected distortion per term)`.
    fn evaluate(&self, q: &[T], r: &[T]) -> (T, Vec<T>) {
        let nz = self.nz();
        let mut rate = T::zero();
        let mut dist = vec![T::zero(); self.cards.len()];
        for (x, p) in self.px.iter().enumerate() {
            if *p <= T::zero() {
                continue;
            }
            for z in 0..nz {
                let qz = q[x * nz + z];
                if qz > T::zero() {
                    rate = rate + *p * qz * (qz / r[z]).log2();
                    for (k, d) in dist.iter_mut().enumerate() {
                        *d = *d + *p * qz * self.term_cost(k, x, z);
                    }
                }
            }
        }
        (rate.max(T::zero()), dist)
    }

    fn uniform(&self) -> Vec<T> {
        let nz = self.nz();
        vec![T::one() / T::from_usize_lossy(nz); nz]
    }

    /// Best of the uniform start and `opts.restarts` perturbed starts;
    /// ties keep the earliest.
    fn solve_restarts(&self, lambdas: &[T], init: Option<&[T]>, opts: &RdOptions) -> Run<T> {
        let base = init.map(<[T]>::to_vec).unwrap_or_else(|| self.uniform());
        let mut best = self.solve(lambdas, &base, opts);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.restarts {
            let mut r: Vec<T> = base.iter().map(|b| *b * T::lit(0.5 + rng.gen::<f64>())).collect();
            let s: T = r.iter().copied().sum();
            r.iter_mut().for_each(|v| *v = *v / s);
            let run = self.solve(lambdas, &r, opts);
            if run.objective < best.objective {
                best = run;
            }
        }
        best
    }

    /// Deterministic zero-rate encoder sending everything to `z`.
    fn constant_run(&self, z: usize) -> Run<T> {
        let (nx, nz) = (self.nx(), self.nz());
        let mut q = vec![T::zero(); nx * nz];
        for x in 0..nx {
            q[x * nz + z] = T::one();
        }
        let r = self.output_marginal(&q);
        let (rate, distortions) = self.evaluate(&q, &r);
        Run { q, r, rate, distortions, objective: rate, iterations: 0, converged: true, history: vec![] }
    }
}

const LOG_LAMBDA_MIN: f64 = -40.0;
const LOG_LAMBDA_MAX: f64 = 60.0;
const MAX_ROOT_STEPS: usize = 200;

/// Root of a non-increasing `excess(log2 λ)` by bracket expansion from
/// `log2 λ = 0` followed by Illinois-modified regula falsi. Stops once
/// `|excess| < tol`; otherwise returns the last evaluation, which sits on
/// the feasible side when a bracket was found.
fn solve_log_lambda<R>(mut eval: impl FnMut(f64) -> (f64, R), tol: f64) -> (f64, R) {
    let mut x = 0.0;
    let (mut e, mut out) = eval(x);
    if e.abs() < tol {
        return (x, out);
    }
    let dir = if e > 0.0 { 1.0 } else { -1.0 };
    let (mut a, mut ea) = (x, e);
    let mut step = 1.0;
    loop {
        x = (x + dir * step).clamp(LOG_LAMBDA_MIN, LOG_LAMBDA_MAX);
        (e, out) = eval(x);
        if e.abs() < tol || e.signum() != ea.signum() || x <= LOG_LAMBDA_MIN || x >= LOG_LAMBDA_MAX {
            break;
        }
        (a, ea) = (x, e);
        step *= 2.0;
    }
    if e.abs() < tol || e.signum() == ea.signum() {
        return (x, out);
    }
    let (mut b, mut eb) = (x, e);
    let mut last_side = 0i8;
    for _ in 0..MAX_ROOT_STEPS {
        if (b - a).abs() < 1e-13 {
            break;
        }
        let mut m = b - eb * (b - a) / (eb - ea);
        if !m.is_finite() || m <= a.min(b) || m >= a.max(b) {
            m = 0.5 * (a + b);
        }
        let (em, o) = eval(m);
        (x, out) = (m, o);
        if em.abs() < tol {
            return (x, out);
        }
        if em.signum() == ea.signum() {
            (a, ea) = (m, em);
            if last_side == -1 {
                eb *= 0.5;
            }
            last_side = -1;
        } else {
            (b, eb) = (m, em);
            if last_side == 1 {
                ea *= 0.5;
            }
            last_side = 1;
        }
    }
    // no root within tolerance: settle on the endpoint meeting the constraint
    let feasible = if ea <= 0.0 { a } else { b };
    if feasible == x {
        return (x, out);
    }
    (feasible, eval(feasible).1)
}

/// Output marginal to start a solve from: the previous solution mixed
/// with uniform so no symbol starts near zero.
fn warm_start<T: Real>(prev: &[T]) -> Vec<T> {
    let u = T::one() / T::from_usize_lossy(prev.len());
    let half = T::lit(0.5);
    prev.iter().map(|p| half * (*p + u)).collect()
}

/// Single-term root finding with the other multipliers fixed.
struct Search<'a, 'b, T> {
    terms: &'b Terms<'a, T>,
    opts: &'b RdOptions,
}

impl<T: Real> Search<'_, '_, T> {
    /// Finds `λ_k` with `D_k(λ) ≈ target`, the other multipliers taken
    /// from `fixed` (entry `k` is overwritten). `D_k` is non-increasing
    /// in `λ_k`. `warm` carries the output marginal between solves.
    fn hit(&self, k: usize, fixed: &[T], target: T, warm: &mut Vec<T>) -> (T, Run<T>) {
        let mut lambdas = fixed.to_vec();
        let (log_l, run) = solve_log_lambda(
            |log_l| {
                lambdas[k] = T::lit(log_l.exp2());
                let run = self.terms.solve(&lambdas, &warm_start(warm), self.opts);
                *warm = run.r.clone();
                ((run.distortions[k] - target).as_f64(), run)
            },
            self.opts.distortion_tol,
        );
        (T::lit(log_l.exp2()), run)
    }
}

fn channel_from_run<T: Real>(inputs: Vec<Variable>, outputs: Vec<Variable>, run: &Run<T>) -> Channel<T> {
    Channel::from_parts(inputs, outputs, run.q.clone())
}

fn check_source<T: Real>(source: &[T], d: &DistortionMeasure<T>) -> Result<()> {
    if source.len() != d.source.len() {
        return Err(Error::ShapeMismatch { expected: d.source.len(), found: source.len() });
    }
    let mut s = source.to_vec();
    crate::probability::normalize_block(&mut s, 0)
}

fn single_variables<T: Real>(d: &DistortionMeasure<T>) -> (Vec<Variable>, Vec<Variable>) {
    (vec![Variable::with_alphabet("X", d.source.clone())], vec![Variable::with_alphabet("Z", d.reconstruction.clone())])
}

fn single_solution<T: Real>(d: &DistortionMeasure<T>, lambda: T, run: &Run<T>) -> RdSolution<T> {
    let (inputs, outputs) = single_variables(d);
    RdSolution {
        lagrange: vec![lambda],
        rate: run.rate,
        distortions: run.distortions.clone(),
        encoder: channel_from_run(inputs, outputs, run),
        iterations: run.iterations,
        converged: run.converged,
    }
}

/// One Blahut–Arimoto solve at fixed `λ ≥ 0` (bits per unit distortion).
///
/// The encoder maps variable `X` to `Z`; rename with
/// [`Channel::rename_input`]/[`Channel::rename_output`]. At `λ = 0` the
/// zero-rate optimum is returned: every row equals the point mass on the
/// reconstruction minimizing expected distortion.
pub fn ba_single<T: Real>(
    source: &[T],
    d: &DistortionMeasure<T>,
    lambda: T,
    opts: &RdOptions,
) -> Result<RdSolution<T>> {
    check_source(source, d)?;
    if lambda.is_nan() || lambda < T::zero() {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let m = d.reconstruction.len();
    let terms = Terms::new(source, vec![(&d.costs[..], m)]);
    let run = if lambda == T::zero() {
        terms.constant_run(zero_rate(source, &d.costs, m).0)
    } else {
        terms.solve_restarts(&[lambda], None, opts)
    };
    Ok(single_solution(d, lambda, &run))
}

/// Objective `rate + λ·D` after each iteration of a single solve from the
/// uniform output marginal.
pub fn ba_objective_history<T: Real>(
    source: &[T],
    d: &DistortionMeasure<T>,
    lambda: T,
    opts: &RdOptions,
) -> Result<Vec<T>> {
    check_source(source, d)?;
    let terms = Terms::new(source, vec![(&d.costs[..], d.reconstruction.len())]);
    Ok(terms.solve(&[lambda], &terms.uniform(), opts).history)
}

/// Single-term search on an arbitrary cost matrix (`px.len() × m`).
fn at_distortion<T: Real>(px: &[T], costs: &[T], m: usize, target: T, opts: &RdOptions) -> Result<(T, Run<T>)> {
    let tol = T::lit(opts.distortion_tol);
    let dmin = min_distortion(px, costs, m);
    if target < dmin - tol {
        return Err(Error::InfeasibleTarget { target: target.as_f64(), minimum: dmin.as_f64() });
    }
    let terms = Terms::new(px, vec![(costs, m)]);
    let (z0, dmax) = zero_rate(px, costs, m);
    if target >= dmax {
        return Ok((T::zero(), terms.constant_run(z0)));
    }
    if target <= dmin + tol {
        return Ok((T::infinity(), terms.solve_restarts(&[T::infinity()], None, opts)));
    }
    let search = Search { terms: &terms, opts };
    let mut warm = terms.uniform();
    let (lambda, mut run) = search.hit(0, &[T::zero()], target, &mut warm);
    if opts.restarts > 0 {
        run = terms.solve_restarts(&[lambda], Some(&warm), opts);
    }
    run.converged &= (run.distortions[0] - target).abs() < tol;
    Ok((lambda, run))
}

/// Encoder on the rate-distortion curve at distortion `target`, found by
/// a bracketing root search over `log2 λ`. Targets at or above the
/// zero-rate distortion give rate 0; targets at the minimum achievable
/// distortion use `λ = ∞`.
pub fn ba_at_distortion<T: Real>(
    source: &[T],
    d: &DistortionMeasure<T>,
    target: T,
    opts: &RdOptions,
) -> Result<RdSolution<T>> {
    check_source(source, d)?;
    if target.is_nan() || target < T::zero() {
        return Err(Error::InvalidArgument(format!("distortion target must be nonnegative, got {target}")));
    }
    let (lambda, run) = at_distortion(source, &d.costs, d.reconstruction.len(), target, opts)?;
    Ok(single_solution(d, lambda, &run))
}

/// Expands per-coordinate costs over the flat `(x1, x2)` source.
fn lift_costs<T: Real>(n1: usize, n2: usize, d: &DistortionMeasure<T>, coordinate: usize) -> Vec<T> {
    let m = d.reconstruction.len();
    let mut out = Vec::with_capacity(n1 * n2 * m);
    for x1 in 0..n1 {
        for x2 in 0..n2 {
            let x = if coordinate == 0 { x1 } else { x2 };
            out.extend_from_slice(&d.costs[x * m..(x + 1) * m]);
        }
    }
    out
}

fn pair_source<T: Real>(source: &JointDistribution<T>) -> Result<(Variable, Variable)> {
    match source.variables() {
        [a, b] => Ok((a.clone(), b.clone())),
        _ => Err(Error::InvalidArgument("joint source must have exactly two variables".into())),
    }
}

/// Joint rate-distortion encoder `P(Z1, Z2 | X1, X2)` meeting
/// `E[d1] ≤ D1` and `E[d2] ≤ D2`, with `d_i` acting on coordinate `i`.
///
/// Slack constraints are detected first (`λ1 = 0`, then `λ2 = 0`): the
/// other constraint is solved alone and the free reconstruction is chosen
/// as the best function of the solved one, which adds no rate. Otherwise
/// `λ1` is searched in an outer loop with `λ2` searched inside it.
pub fn ba_joint<T: Real>(
    source: &JointDistribution<T>,
    d1: &DistortionMeasure<T>,
    d2: &DistortionMeasure<T>,
    targets: (T, T),
    opts: &RdOptions,
) -> Result<RdSolution<T>> {
    let (x1, x2) = pair_source(source)?;
    if x1.alphabet != d1.source {
        return Err(Error::AlphabetMismatch(x1.name));
    }
    if x2.alphabet != d2.source {
        return Err(Error::AlphabetMismatch(x2.name));
    }
    let (n1, n2) = (x1.card(), x2.card());
    let c1 = lift_costs(n1, n2, d1, 0);
    let c2 = lift_costs(n1, n2, d2, 1);
    let outputs = vec![
        Variable::with_alphabet("Z1", d1.reconstruction.clone()),
        Variable::with_alphabet("Z2", d2.reconstruction.clone()),
    ];
    joint_search(source.pmf(), [&c1, &c2], targets, vec![x1, x2], outputs, opts)
}

/// [`ba_joint`] for remote targets `(Z1, Z2)` observed through
/// `target: P(Z1, Z2 | X1, X2)`; `d_i` scores `Ẑ_i` against `Z_i`.
pub fn ba_joint_remote<T: Real>(
    source: &JointDistribution<T>,
    target: &Channel<T>,
    d1: &DistortionMeasure<T>,
    d2: &DistortionMeasure<T>,
    targets: (T, T),
    opts: &RdOptions,
) -> Result<RdSolution<T>> {
    let (x1, x2) = pair_source(source)?;
    let names: Vec<&str> = target.inputs().iter().map(|v| v.name.as_str()).collect();
    if names != [x1.name.as_str(), x2.name.as_str()] || target.outputs().len() != 2 {
        return Err(Error::InvalidArgument("target channel must map (X1, X2) to two target variables".into()));
    }
    if target.inputs()[0].alphabet != x1.alphabet || target.inputs()[1].alphabet != x2.alphabet {
        return Err(Error::AlphabetMismatch(x1.name));
    }
    if target.outputs()[0].alphabet != d1.source || target.outputs()[1].alphabet != d2.source {
        return Err(Error::AlphabetMismatch(target.outputs()[0].name.clone()));
    }
    let (k1, k2) = (d1.source.len(), d2.source.len());
    let (m1, m2) = (d1.reconstruction.len(), d2.reconstruction.len());
    let nx = x1.card() * x2.card();
    let mut c1 = vec![T::zero(); nx * m1];
    let mut c2 = vec![T::zero(); nx * m2];
    for x in 0..nx {
        let row = target.row(x);
        for z1 in 0..k1 {
            for z2 in 0..k2 {
                let p = row[z1 * k2 + z2];
                if p > T::zero() {
                    for zh in 0..m1 {
                        c1[x * m1 + zh] = c1[x * m1 + zh] + p * d1.cost(z1, zh);
                    }
                    for zh in 0..m2 {
                        c2[x * m2 + zh] = c2[x * m2 + zh] + p * d2.cost(z2, zh);
                    }
                }
            }
        }
    }
    let outputs = vec![
        Variable::new("Zhat1", d1.reconstruction.symbols().to_vec())?,
        Variable::new("Zhat2", d2.reconstruction.symbols().to_vec())?,
    ];
    joint_search(source.pmf(), [&c1, &c2], targets, vec![x1, x2], outputs, opts)
}

/// Lifts a single-term run on reconstruction `solved` to the pair by
/// choosing the other reconstruction as the best function of it.
fn lift_single<T: Real>(
    px: &[T],
    costs: [&[T]; 2],
    cards: [usize; 2],
    solved: usize,
    run: &Run<T>,
) -> (Vec<T>, [T; 2]) {
    let other = 1 - solved;
    let (ms, mo) = (cards[solved], cards[other]);
    // g(ẑ_solved) = argmin_o Σ_x p(x) q(ẑ_s|x) c_other(x, o)
    let g: Vec<usize> = (0..ms)
        .map(|zs| {
            (0..mo)
                .map(|o| {
                    let cost: T = px
                        .iter()
                        .enumerate()
                        .map(|(x, p)| {
                            let w = *p * run.q[x * ms + zs];
                            if w > T::zero() {
                                w * costs[other][x * mo + o]
                            } else {
                                T::zero()
                            }
                        })
                        .sum();
                    (o, cost)
                })
                .fold((0, T::infinity()), |b, c| if c.1 < b.1 { c } else { b })
                .0
        })
        .collect();
    let nz = ms * mo;
    let mut q = vec![T::zero(); px.len() * nz];
    let mut dist = [T::zero(); 2];
    for (x, p) in px.iter().enumerate() {
        for zs in 0..ms {
            let v = run.q[x * ms + zs];
            let zo = g[zs];
            let z = if solved == 0 { zs * mo + zo } else { zo * ms + zs };
            q[x * nz + z] = q[x * nz + z] + v;
            if *p > T::zero() && v > T::zero() {
                dist[solved] = dist[solved] + *p * v * costs[solved][x * ms + zs];
                dist[other] = dist[other] + *p * v * costs[other][x * mo + zo];
            }
        }
    }
    (q, dist)
}

fn joint_search<T: Real>(
    px: &[T],
    costs: [&Vec<T>; 2],
    targets: (T, T),
    inputs: Vec<Variable>,
    outputs: Vec<Variable>,
    opts: &RdOptions,
) -> Result<RdSolution<T>> {
    let cards = [outputs[0].card(), outputs[1].card()];
    let target = [targets.0, targets.1];
    if target.iter().any(|t| t.is_nan() || *t < T::zero()) {
        return Err(Error::InvalidArgument("distortion targets must be nonnegative".into()));
    }
    let tol = T::lit(opts.distortion_tol);
    let dmin = [min_distortion(px, costs[0], cards[0]), min_distortion(px, costs[1], cards[1])];
    for k in 0..2 {
        if target[k] < dmin[k] - tol {
            return Err(Error::InfeasibleTarget { target: target[k].as_f64(), minimum: dmin[k].as_f64() });
        }
    }
    let zr = [zero_rate(px, costs[0], cards[0]), zero_rate(px, costs[1], cards[1])];
    let raw = [&costs[0][..], &costs[1][..]];
    let terms = Terms::new(px, vec![(raw[0], cards[0]), (raw[1], cards[1])]);
    let finish = |lagrange: Vec<T>, run: &Run<T>| -> RdSolution<T> {
        let converged = run.converged && (0..2).all(|k| run.distortions[k] <= target[k] + tol);
        RdSolution {
            lagrange,
            rate: run.rate,
            distortions: run.distortions.clone(),
            encoder: channel_from_run(inputs.clone(), outputs.clone(), run),
            iterations: run.iterations,
            converged,
        }
    };

    if target[0] >= zr[0].1 && target[1] >= zr[1].1 {
        let run = terms.constant_run(zr[0].0 * cards[1] + zr[1].0);
        return Ok(finish(vec![T::zero(), T::zero()], &run));
    }

    // One constraint slack: solve the other alone, lift the free coordinate.
    for slack in [0usize, 1] {
        let active = 1 - slack;
        let (lambda, single) = at_distortion(px, raw[active], cards[active], target[active], opts)?;
        let (q, dist) = lift_single(px, raw, cards, active, &single);
        if dist[slack] <= target[slack] + tol {
            let mut run = single;
            run.r = terms.output_marginal(&q);
            run.q = q;
            run.distortions = dist.to_vec();
            let mut lagrange = vec![T::zero(); 2];
            lagrange[active] = lambda;
            return Ok(finish(lagrange, &run));
        }
    }

    // Both constraints active.
    let search = Search { terms: &terms, opts };
    let pinned = |k: usize| target[k] <= dmin[k] + tol;
    let mut warm = terms.uniform();
    let inner = |l1: T, warm: &mut Vec<T>| -> (T, Run<T>) {
        if pinned(1) {
            let run = terms.solve(&[l1, T::infinity()], &warm_start(warm), opts);
            *warm = run.r.clone();
            return (T::infinity(), run);
        }
        search.hit(1, &[l1, T::zero()], target[1], warm)
    };
    let solve_outer = |log_l1: f64, warm: &mut Vec<T>| -> (T, T, Run<T>) {
        let l1 = if log_l1.is_infinite() { T::infinity() } else { T::lit(log_l1.exp2()) };
        let (l2, run) = inner(l1, warm);
        (l1, l2, run)
    };
    if pinned(0) {
        let (l1, l2, run) = solve_outer(f64::INFINITY, &mut warm);
        return Ok(finish(vec![l1, l2], &run));
    }
    let (_, cur) = solve_log_lambda(
        |log_l1| {
            let cur = solve_outer(log_l1, &mut warm);
            ((cur.2.distortions[0] - target[0]).as_f64(), cur)
        },
        opts.distortion_tol,
    );
    let (l1, l2, run) = cur;
    Ok(finish(vec![l1, l2], &run))
}
