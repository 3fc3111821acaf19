//! Numerical harness for the ordering `K ≤ I(Ẑ1;Ẑ2) ≤ C`.
//!
//! [`sandwich_check`] builds rate-distortion encoders for a source and
//! compares a certified lower bound on `K`, the exact middle term and a
//! certified upper bound on `C`. [`equality_case_check`] does the same for
//! a shared-component source `X_i = (X'_i, W)` with supplied encoders.
//! [`proof_trace`] evaluates both sides of every line of the two
//! derivation chains, and [`implication_suite`] checks the four Markov
//! implications used for the equality case.
//!
//! Two readings are built into the residuals and are worth knowing:
//!
//! * Dropping `I(Ẑ1,Ẑ2;U | X1,X2)` at the end of the upper chain needs that
//!   term to vanish. It does whenever the encoder is deterministic, but a
//!   stochastic encoder can leave it positive, and then `I(Ẑ1;Ẑ2)` may
//!   exceed `C`. The upper certificate therefore requires this residual
//!   (`wyner.encoder_markov`) to be within tolerance.
//! * The two steps of the lower chain that add and then remove `X1, X2`
//!   are justified here by residuals that imply equality exactly (see
//!   [`LHS_ENCODER_RESIDUAL`] and [`LHS_DROP_RESIDUAL`]); the bare Markov
//!   conditions `X_i ↔ Ẑ_i ↔ V` are necessary but not sufficient.

use std::collections::BTreeMap;

use crate::common_info::{gk_lower, wyner_upper, WynerOptions};
use crate::error::{Error, Result};
use crate::names::{U, V, W, X1, X2, Z1, Z2};
use crate::probability::{shared_component_source, Channel, JointDistribution};
use crate::rate_distortion::{ba_at_distortion, ba_joint, DistortionMeasure, RdOptions};
use crate::scalar::Real;
use crate::shannon::{
    conditional_entropy, conditional_mutual_information as cmi, entropy, interaction_information as ii,
    mutual_information as mi,
};

/// Tolerance ladder: exact constructions, information identities, and
/// comparisons that go through an optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub construction: f64,
    pub identity: f64,
    pub solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { construction: 1e-12, identity: 1e-9, solver: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichConfig {
    pub tolerances: Tolerances,
    /// Largest Markov/feasibility residual for which a bound counts as
    /// certified; also the slack allowed on the lower inequality.
    pub feasibility: f64,
    pub rd: RdOptions,
    pub wyner: WynerOptions,
}

impl Default for SandwichConfig {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            feasibility: 1e-6,
            rd: RdOptions::default(),
            wyner: WynerOptions::default(),
        }
    }
}

/// Outcome of one side of the ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// Preconditions met and the inequality holds within tolerance.
    Holds,
    /// Preconditions met and the inequality fails.
    Violated,
    /// A residual or solver convergence check failed; nothing asserted.
    Uncertified,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Holds => "holds",
            Self::Violated => "violated",
            Self::Uncertified => "uncertified",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub k_lower: T,
    /// `I(Ẑ1;Ẑ2)` under the joint encoder.
    pub i_mid: T,
    pub c_upper: T,
    /// `i_mid − k_lower`.
    pub slack_left: T,
    /// `c_upper − i_mid`.
    pub slack_right: T,
    /// `I(X1,X2; Ẑ1,Ẑ2)` of the joint encoder.
    pub encoder_rate: T,
    pub distortions: (T, T),
    /// `I(Ẑ1;Ẑ2)` under the two marginal encoders used for `K`.
    pub i_mid_marginal: T,
    /// Every checked residual by name.
    pub residuals: BTreeMap<String, T>,
    pub equality_left: bool,
    pub equality_right: bool,
    pub converged: bool,
    pub left: Certificate,
    pub right: Certificate,
    /// `H(W)` for shared-component sources.
    pub common_entropy: Option<T>,
    /// `P(Ẑ1, Ẑ2 | X1, X2)`.
    pub joint_encoder: Channel<T>,
    /// `P(Ẑ1 | X1)` and `P(Ẑ2 | X2)`.
    pub marginal_encoders: [Channel<T>; 2],
}

impl<T: Real> BoundReport<T> {
    /// True unless a certified side is violated.
    pub fn consistent(&self) -> bool {
        self.left != Certificate::Violated && self.right != Certificate::Violated
    }
}

const WYNER_KEYS: [&str; 4] =
    ["wyner.marginal_match", "wyner.conditional_independence", "wyner.reconstruction_markov", "wyner.encoder_markov"];
const GK_KEYS: [&str; 4] = ["gk.x2_x1_v", "gk.x1_x2_v", "gk.x1_z1_v", "gk.x2_z2_v"];

struct Sides<T> {
    joint: JointDistribution<T>,
    marginal: JointDistribution<T>,
    joint_encoder: Channel<T>,
    marginal_encoders: [Channel<T>; 2],
    encoder_rate: T,
    distortions: (T, T),
    converged: bool,
}

fn assemble<T: Real>(
    sides: Sides<T>,
    tolerances: &Tolerances,
    feasibility: T,
    wyner: &WynerOptions,
    mut residuals: BTreeMap<String, T>,
    common_entropy: Option<T>,
) -> Result<BoundReport<T>> {
    let i_mid = mi(&sides.joint, &[Z1], &[Z2])?;
    let i_mid_marginal = mi(&sides.marginal, &[Z1], &[Z2])?;
    let ws = wyner_upper(&sides.joint, wyner)?;
    let gk = gk_lower(&sides.marginal, feasibility)?;
    let w = [
        ws.marginal_match_residual,
        ws.residuals.conditional_independence,
        ws.residuals.reconstruction_markov,
        ws.residuals.encoder_markov,
    ];
    for (k, v) in WYNER_KEYS.iter().zip(w) {
        residuals.insert(k.to_string(), v);
    }
    for (k, v) in GK_KEYS.iter().zip(gk.condition_residuals) {
        residuals.insert(k.to_string(), v);
    }
    let solver = T::lit(tolerances.solver);
    let (k_lower, c_upper) = (gk.objective, ws.objective);
    let certify = |ok: bool, holds: bool| match (sides.converged && ok, holds) {
        (false, _) => Certificate::Uncertified,
        (true, true) => Certificate::Holds,
        (true, false) => Certificate::Violated,
    };
    let left = certify(gk.feasible, k_lower <= i_mid + feasibility);
    let right = certify(ws.feasible && w.iter().all(|r| *r <= feasibility), i_mid <= c_upper + solver);
    Ok(BoundReport {
        k_lower,
        i_mid,
        c_upper,
        slack_left: i_mid - k_lower,
        slack_right: c_upper - i_mid,
        encoder_rate: sides.encoder_rate,
        distortions: sides.distortions,
        i_mid_marginal,
        residuals,
        equality_left: (i_mid - k_lower).abs() <= solver,
        equality_right: (c_upper - i_mid).abs() <= solver,
        converged: sides.converged,
        left,
        right,
        common_entropy,
        joint_encoder: sides.joint_encoder,
        marginal_encoders: sides.marginal_encoders,
    })
}

fn marginal_encoder<T: Real>(
    source: &JointDistribution<T>,
    name: &str,
    out: &str,
    d: &DistortionMeasure<T>,
    target: T,
    opts: &RdOptions,
) -> Result<(Channel<T>, bool)> {
    let p = source.marginalize(&[name])?;
    let sol = ba_at_distortion(p.pmf(), d, target, opts)?;
    Ok((sol.encoder.rename_input(0, name).rename_output(0, out), sol.converged))
}

/// Runs the full pipeline on a two-variable source `(X1, X2)`.
///
/// The middle and upper terms use the joint encoder from [`ba_joint`];
/// the lower term uses one [`ba_at_distortion`] encoder per coordinate.
/// A side is certified only if every solver converged and the side's
/// residuals are within `config.feasibility`.
pub fn sandwich_check<T: Real>(
    source: &JointDistribution<T>,
    d1: &DistortionMeasure<T>,
    d2: &DistortionMeasure<T>,
    targets: (T, T),
    config: &SandwichConfig,
) -> Result<BoundReport<T>> {
    let names = source.names();
    if names != [X1, X2] {
        return Err(Error::InvalidArgument(format!("source must be over (X1, X2), got {names:?}")));
    }
    let joint_sol = ba_joint(source, d1, d2, targets, &config.rd)?;
    let joint = source.attach(&joint_sol.encoder)?;
    let (e1, c1) = marginal_encoder(source, X1, Z1, d1, targets.0, &config.rd)?;
    let (e2, c2) = marginal_encoder(source, X2, Z2, d2, targets.1, &config.rd)?;
    let marginal = source.attach(&e1)?.attach(&e2)?;
    let tol = T::lit(config.rd.distortion_tol);
    let excess = (joint_sol.distortions[0] - targets.0).max(joint_sol.distortions[1] - targets.1).max(T::zero());
    let mut residuals = BTreeMap::new();
    residuals.insert("rd.distortion_excess".to_string(), excess);
    let sides = Sides {
        encoder_rate: joint_sol.rate,
        distortions: (joint_sol.distortions[0], joint_sol.distortions[1]),
        converged: joint_sol.converged && c1 && c2 && excess <= tol,
        joint_encoder: joint_sol.encoder,
        marginal_encoders: [e1, e2],
        joint,
        marginal,
    };
    assemble(sides, &config.tolerances, T::lit(config.feasibility), &config.wyner, residuals, None)
}

/// Equality-case harness for `X_i = (X'_i, W)` with encoders `X1 → Ẑ1`
/// and `X2 → Ẑ2` applied independently.
///
/// Records the residuals of `Ẑ1 ↔ W ↔ Ẑ2`, `(X1,X2) ↔ (Ẑ1,Ẑ2) ↔ W`,
/// `I(Ẑ1;W|Ẑ2)`, `I(Ẑ2;W|Ẑ1)` and of the identity
/// `I(X1;X2) − I(X1;X2|W) = H(W)`. Failing residuals show up as
/// `equality_* = false`, never as an error.
pub fn equality_case_check<T: Real>(
    w: &[T],
    x1p: &[T],
    x2p: &[T],
    z1_channel: &Channel<T>,
    z2_channel: &Channel<T>,
    tol: T,
) -> Result<BoundReport<T>> {
    let source = shared_component_source(w, x1p, x2p)?;
    for (ch, x, z) in [(z1_channel, X1, Z1), (z2_channel, X2, Z2)] {
        let ins: Vec<&str> = ch.inputs().iter().map(|v| v.name.as_str()).collect();
        let outs: Vec<&str> = ch.outputs().iter().map(|v| v.name.as_str()).collect();
        if ins != [x] || outs != [z] {
            return Err(Error::InvalidArgument(format!("expected a channel {x} → {z}, got {ins:?} → {outs:?}")));
        }
    }
    let joint = source.attach(z1_channel)?.attach(z2_channel)?;
    let w_chan = Channel::label_projection(source.variable(X1)?, 1, W)?;
    let with_w = joint.attach(&w_chan)?;
    let h_w = entropy(&with_w, &[W])?;
    let mut residuals = BTreeMap::new();
    residuals.insert("equality.z1_w_z2".to_string(), cmi(&with_w, &[Z1], &[Z2], &[W])?);
    residuals.insert("equality.x_z_w".to_string(), cmi(&with_w, &[X1, X2], &[W], &[Z1, Z2])?);
    residuals.insert("equality.z1_w_given_z2".to_string(), cmi(&with_w, &[Z1], &[W], &[Z2])?);
    residuals.insert("equality.z2_w_given_z1".to_string(), cmi(&with_w, &[Z2], &[W], &[Z1])?);
    let identity = mi(&with_w, &[X1], &[X2])? - cmi(&with_w, &[X1], &[X2], &[W])? - h_w;
    residuals.insert("equality.common_entropy_identity".to_string(), identity.abs());
    let structural_ok = residuals.values().all(|r| *r <= tol);

    let encoder_rate = mi(&joint, &[X1, X2], &[Z1, Z2])?;
    let joint_encoder = joint.condition(&[X1, X2])?.channel;
    let sides = Sides {
        marginal: joint.clone(),
        joint,
        joint_encoder,
        marginal_encoders: [z1_channel.clone(), z2_channel.clone()],
        encoder_rate,
        distortions: (T::nan(), T::nan()),
        converged: true,
    };
    let tolerances = Tolerances { identity: tol.as_f64(), ..Tolerances::default() };
    let wyner = WynerOptions::default();
    let mut report = assemble(sides, &tolerances, T::lit(1e-6), &wyner, residuals, Some(h_w))?;
    report.equality_left &= structural_ok;
    report.equality_right &= structural_ok;
    Ok(report)
}

/// Which derivation chain to replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `I(Ẑ1;Ẑ2) ≤ I(X1,X2;U)`.
    Rhs,
    /// `I(X1,X2;V) ≤ I(Ẑ1;Ẑ2)`.
    Lhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Holds for every distribution.
    Identity,
    /// Holds when the cited residual vanishes.
    Conditional,
    /// `lhs ≤ rhs`; the residual is the slack `rhs − lhs`.
    Inequality,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<T> {
    /// The expression this line rewrites the previous one into.
    pub label: &'static str,
    pub kind: StepKind,
    /// Value of the previous line.
    pub lhs: T,
    /// Value of this line.
    pub rhs: T,
    /// `|lhs − rhs|` for equalities, `rhs − lhs` for the inequality.
    pub residual: T,
    /// Condition licensing the step and its residual.
    pub justification: Option<(&'static str, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofTrace<T> {
    pub side: Side,
    /// Value of the first line.
    pub start: T,
    pub steps: Vec<TraceStep<T>>,
}

impl<T: Real> ProofTrace<T> {
    /// Slack of the single inequality step.
    pub fn inequality_slack(&self) -> T {
        self.steps.iter().find(|s| s.kind == StepKind::Inequality).map_or(T::zero(), |s| s.residual)
    }

    /// Largest residual over the equality steps.
    pub fn max_equality_residual(&self) -> T {
        self.steps.iter().filter(|s| s.kind != StepKind::Inequality).map(|s| s.residual).fold(T::zero(), T::max)
    }
}

/// Residual licensing the lower chain's step to `I(X1,Ẑ1; X2,Ẑ2; V)`:
/// `I(Ẑ1; X2,Ẑ2,V | X1) + I(Ẑ2; X1,Ẑ1,V | X2)`, i.e. each encoder sees
/// only its own source.
pub const LHS_ENCODER_RESIDUAL: &str = "I(Z1;X2,Z2,V|X1) + I(Z2;X1,Z1,V|X2)";
/// Residual licensing the step to `I(Ẑ1;Ẑ2;V)`:
/// `I(X1; X2,Ẑ2,V | Ẑ1) + I(X2; Ẑ1,V | Ẑ2)`.
pub const LHS_DROP_RESIDUAL: &str = "I(X1;X2,Z2,V|Z1) + I(X2;Z1,V|Z2)";

struct Builder<T> {
    prev: T,
    steps: Vec<TraceStep<T>>,
}

impl<T: Real> Builder<T> {
    fn push(&mut self, label: &'static str, kind: StepKind, value: T, justification: Option<(&'static str, T)>) {
        let residual = match kind {
            StepKind::Inequality => value - self.prev,
            _ => (value - self.prev).abs(),
        };
        self.steps.push(TraceStep { label, kind, lhs: self.prev, rhs: value, residual, justification });
        self.prev = value;
    }
}

/// Evaluates every line of one derivation chain on `joint`, which must
/// carry `X1, X2, Z1, Z2` and `U` (for [`Side::Rhs`]) or `V`.
pub fn proof_trace<T: Real>(joint: &JointDistribution<T>, side: Side) -> Result<ProofTrace<T>> {
    let aux = match side {
        Side::Rhs => U,
        Side::Lhs => V,
    };
    for n in [X1, X2, Z1, Z2, aux] {
        joint.position(n)?;
    }
    let j = joint;
    use StepKind::*;
    match side {
        Side::Rhs => {
            let start = mi(j, &[Z1], &[Z2])?;
            let ii_zzu = ii(j, &[Z1], &[Z2], &[U])?;
            let cond1 = cmi(j, &[Z1], &[Z2], &[U])?;
            let (a, b) = (cmi(j, &[Z1], &[U], &[Z2])?, cmi(j, &[Z2], &[U], &[Z1])?);
            let zz_u = mi(j, &[Z1, Z2], &[U])?;
            let all_u = mi(j, &[X1, X2, Z1, Z2], &[U])?;
            let cond2 = cmi(j, &[X1, X2], &[U], &[Z1, Z2])?;
            let x_u = mi(j, &[X1, X2], &[U])?;
            let base = cmi(j, &[Z1, Z2], &[U], &[X1, X2])?;
            let mut t = Builder { prev: start, steps: Vec::new() };
            t.push("I(Z1;Z2;U) + I(Z1;Z2|U)", Identity, ii_zzu + cond1, None);
            t.push("I(Z1;Z2;U)", Conditional, ii_zzu, Some(("Z1 <-> U <-> Z2", cond1)));
            t.push("I(Z1,Z2;U) - I(Z1;U|Z2) - I(Z2;U|Z1)", Identity, zz_u - a - b, None);
            t.push("I(Z1,Z2;U)", Inequality, zz_u, None);
            t.push("I(X1,X2,Z1,Z2;U) - I(X1,X2;U|Z1,Z2)", Identity, all_u - cond2, None);
            t.push("I(X1,X2,Z1,Z2;U)", Conditional, all_u, Some(("(X1,X2) <-> (Z1,Z2) <-> U", cond2)));
            t.push("I(X1,X2;U) + I(Z1,Z2;U|X1,X2)", Identity, x_u + base, None);
            t.push("I(X1,X2;U)", Conditional, x_u, Some(("(Z1,Z2) <-> (X1,X2) <-> U", base)));
            Ok(ProofTrace { side, start, steps: t.steps })
        }
        Side::Lhs => {
            let start = mi(j, &[X1, X2], &[V])?;
            let x1v = mi(j, &[X1], &[V])?;
            let g1 = cmi(j, &[X2], &[V], &[X1])?;
            let g2 = cmi(j, &[X1], &[V], &[X2])?;
            let ii_xxv = ii(j, &[X1], &[X2], &[V])?;
            let ii_big = ii(j, &[X1, Z1], &[X2, Z2], &[V])?;
            let enc = cmi(j, &[Z1], &[X2, Z2, V], &[X1])? + cmi(j, &[Z2], &[X1, Z1, V], &[X2])?;
            let ii_zzv = ii(j, &[Z1], &[Z2], &[V])?;
            let drop = cmi(j, &[X1], &[X2, Z2, V], &[Z1])? + cmi(j, &[X2], &[Z1, V], &[Z2])?;
            let zz = mi(j, &[Z1], &[Z2])?;
            let mut t = Builder { prev: start, steps: Vec::new() };
            t.push("I(X1;V) + I(X2;V|X1)", Identity, x1v + g1, None);
            t.push("I(X1;V)", Conditional, x1v, Some(("X2 <-> X1 <-> V", g1)));
            t.push("I(X1;X2;V) + I(X1;V|X2)", Identity, ii_xxv + g2, None);
            t.push("I(X1;X2;V)", Conditional, ii_xxv, Some(("X1 <-> X2 <-> V", g2)));
            t.push("I(X1,Z1;X2,Z2;V)", Conditional, ii_big, Some((LHS_ENCODER_RESIDUAL, enc + g1 + g2)));
            t.push("I(Z1;Z2;V)", Conditional, ii_zzv, Some((LHS_DROP_RESIDUAL, drop)));
            t.push("I(Z1;Z2)", Inequality, zz, None);
            Ok(ProofTrace { side, start, steps: t.steps })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImplicationOutcome {
    /// Some antecedent residual exceeds the tolerance.
    Vacuous,
    /// Antecedents hold and the consequent residual is within `10·tol`.
    Holds,
    /// Antecedents hold but the consequent does not.
    Fails,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Implication<T> {
    pub label: &'static str,
    pub antecedents: Vec<(&'static str, T)>,
    pub consequent: (&'static str, T),
    pub outcome: ImplicationOutcome,
}

/// Evaluates the four implications used for the equality case on a
/// joint carrying `X1, X2, Z1, Z2, W`. `X1 → W ← X2` (W is a function of
/// either source) is measured by `H(W|X1) + H(W|X2)`.
pub fn implication_suite<T: Real>(joint: &JointDistribution<T>, tol: T) -> Result<Vec<Implication<T>>> {
    for n in [X1, X2, Z1, Z2, W] {
        joint.position(n)?;
    }
    let j = joint;
    let z1_w_z2 = ("Z1 <-> W <-> Z2", cmi(j, &[Z1], &[Z2], &[W])?);
    let coupling = ("X1 -> W <- X2", conditional_entropy(j, &[W], &[X1])? + conditional_entropy(j, &[W], &[X2])?);
    let recon = ("(X1,X2) <-> (Z1,Z2) <-> W", cmi(j, &[X1, X2], &[W], &[Z1, Z2])?);
    let via_x1 = ("Z1 <-> X1 <-> Z2", cmi(j, &[Z1], &[Z2], &[X1])?);
    let via_x2 = ("Z1 <-> X2 <-> Z2", cmi(j, &[Z1], &[Z2], &[X2])?);
    let x1_z1_w = ("X1 <-> Z1 <-> W", cmi(j, &[X1], &[W], &[Z1])?);
    let x2_z2_w = ("X2 <-> Z2 <-> W", cmi(j, &[X2], &[W], &[Z2])?);
    let rows = [
        ("common reconstruction part passes through X1", vec![z1_w_z2, coupling], via_x1),
        ("W is recoverable through Z1", vec![recon, via_x1], x1_z1_w),
        ("common reconstruction part passes through X2", vec![z1_w_z2, coupling], via_x2),
        ("W is recoverable through Z2", vec![recon, via_x2], x2_z2_w),
    ];
    Ok(rows
        .into_iter()
        .map(|(label, antecedents, consequent)| {
            let outcome = if antecedents.iter().any(|(_, r)| *r > tol) {
                ImplicationOutcome::Vacuous
            } else if consequent.1 <= tol * T::lit(10.0) {
                ImplicationOutcome::Holds
            } else {
                ImplicationOutcome::Fails
            };
            Implication { label, antecedents, consequent, outcome }
        })
        .collect())
}
