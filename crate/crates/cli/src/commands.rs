use std::fs;
use std::path::Path;

use commoninfo::common_info::{gk_lower, wyner_upper, WynerOptions};
use commoninfo::names::{U, V, W, X1, X2, Z1, Z2};
use commoninfo::probability::{
    block_diagonal, dsbs, random_joint, random_pmf, shared_component_source, Channel, Variable,
};
use commoninfo::rate_distortion::{ba_at_distortion, ba_joint, DistortionMeasure, RdOptions, RdSolution};
use commoninfo::shannon::{conditional_mutual_information, entropy, mutual_information};
use commoninfo::theorem::{
    equality_case_check, implication_suite, proof_trace, sandwich_check, Certificate, SandwichConfig, Side, StepKind,
    Tolerances,
};
use commoninfo::{Joint, Report};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::args::{
    Command, Encoders, EqualityArgs, Format, GenFamily, InfoArgs, RdArgs, RunConfig, SolverArgs, SweepArgs, VerifyArgs,
};

/// Everything that ends a run early, mapped to the exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or arguments (exit 2).
    Input(String),
    /// A solver did not converge (exit 3).
    NoConvergence(String),
    /// A certified bound is violated (exit 4).
    Violation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::NoConvergence(_) => 3,
            Self::Violation(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Input(m) | Self::NoConvergence(m) | Self::Violation(m) => m,
        }
    }
}

impl From<commoninfo::Error> for Failure {
    fn from(e: commoninfo::Error) -> Self {
        Self::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Rounds to the six printed decimals; non-finite values become `null`.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!((x * 1e6).round() / 1e6)
    } else {
        Value::Null
    }
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json serializes"));
}

fn load(path: &Path) -> Result<Joint, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Joint::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn group(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn hamming(v: &Variable) -> DistortionMeasure<f64> {
    DistortionMeasure::hamming(&v.alphabet)
}

fn rd_options(cfg: &RunConfig) -> RdOptions {
    RdOptions { max_iter: cfg.max_iter, seed: cfg.seed, ..RdOptions::default() }
}

fn wyner_options(cfg: &RunConfig) -> WynerOptions {
    WynerOptions { u_card: cfg.u_card, restarts: cfg.restarts, seed: cfg.seed, ..WynerOptions::default() }
}

fn sandwich_config(cfg: &RunConfig) -> SandwichConfig {
    SandwichConfig {
        tolerances: Tolerances {
            construction: cfg.tol_construction,
            identity: cfg.tol_identity,
            solver: cfg.tol_solver,
        },
        rd: rd_options(cfg),
        wyner: wyner_options(cfg),
        ..SandwichConfig::default()
    }
}

fn validate(cfg: &RunConfig) -> Outcome {
    let tols = [cfg.tol_construction, cfg.tol_identity, cfg.tol_solver];
    if tols.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Failure::Input("tolerances must be positive".into()));
    }
    if cfg.restarts == 0 {
        return Err(Failure::Input("--restarts must be at least 1".into()));
    }
    if cfg.u_card == Some(0) {
        return Err(Failure::Input("--u-card must be at least 1".into()));
    }
    Ok(())
}

pub fn run(command: Command, cfg: &RunConfig) -> Outcome {
    validate(cfg)?;
    match command {
        Command::Info(a) => info(a, cfg),
        Command::Rd(a) => rd(a, cfg),
        Command::Wyner(a) => wyner(a, cfg),
        Command::Gk(a) => gk(a, cfg),
        Command::Verify(a) => verify(a, cfg),
        Command::EqualityDemo(a) => equality_demo(a, cfg),
        Command::Sweep(a) => sweep(a, cfg),
        Command::Gen(f) => gen(f, cfg),
    }
}

fn info(a: InfoArgs, cfg: &RunConfig) -> Outcome {
    let j = load(&a.dist)?;
    let mut rows: Vec<(String, f64)> = Vec::new();
    if let Some(g) = &a.entropy {
        rows.push(("entropy_bits".into(), entropy(&j, &group(g))?));
    }
    if let Some(v) = &a.mi {
        rows.push(("mi_bits".into(), mutual_information(&j, &group(&v[0]), &group(&v[1]))?));
    }
    if let Some(v) = &a.cmi {
        rows.push((
            "cmi_bits".into(),
            conditional_mutual_information(&j, &group(&v[0]), &group(&v[1]), &group(&v[2]))?,
        ));
    }
    if rows.is_empty() {
        for name in j.names() {
            rows.push((format!("H({name})"), entropy(&j, &[name])?));
        }
        rows.push(("H(all)".into(), entropy(&j, &j.names())?));
    }
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => emit(&Value::Object(rows.into_iter().map(|(k, v)| (k, num(v))).collect())),
        Format::Csv => {
            println!("quantity,bits");
            rows.iter().for_each(|(k, v)| println!("{k},{v:.6}"));
        }
    }
    Ok(())
}

fn rd_json(sol: &RdSolution<f64>) -> Value {
    json!({
        "rate_bits": num(sol.rate),
        "distortions": sol.distortions.iter().map(|d| num(*d)).collect::<Vec<_>>(),
        "lagrange": sol.lagrange.iter().map(|l| if l.is_infinite() { json!("inf") } else { num(*l) }).collect::<Vec<_>>(),
        "iterations": sol.iterations,
        "converged": sol.converged,
        "encoder": sol.encoder.to_file(),
    })
}

fn converged(ok: bool, what: &str) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::NoConvergence(format!("{what} did not converge")))
    }
}

fn rd(a: RdArgs, cfg: &RunConfig) -> Outcome {
    let j = load(&a.dist)?;
    let opts = rd_options(cfg);
    let sol = match (j.variables(), a.d2) {
        ([x], None) => {
            let sol = ba_at_distortion(j.pmf(), &hamming(x), a.d1, &opts)?;
            RdSolution { encoder: sol.encoder.rename_input(0, &x.name), ..sol }
        }
        ([x1, x2], Some(d2)) => ba_joint(&j, &hamming(x1), &hamming(x2), (a.d1, d2), &opts)?,
        _ => return Err(Failure::Input("rd takes one variable with --d1, or two with --d1 and --d2".into())),
    };
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => emit(&rd_json(&sol)),
        Format::Csv => {
            let targets: Vec<f64> = std::iter::once(a.d1).chain(a.d2).collect();
            let (head_d, head_a) = match targets.len() {
                1 => ("D".to_string(), "distortion".to_string()),
                _ => ("D1,D2".to_string(), "distortion1,distortion2".to_string()),
            };
            let join = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(",");
            println!("{head_d},rate_bits,{head_a},iterations,converged");
            println!(
                "{},{:.6},{},{},{}",
                join(&targets),
                sol.rate,
                join(&sol.distortions),
                sol.iterations,
                sol.converged
            );
        }
    }
    converged(sol.converged, "Blahut-Arimoto")
}

/// The four-variable joint for `wyner`/`gk`: loaded as is, or built from
/// a source pair with the joint (`marginal = false`) or per-coordinate
/// encoders.
fn four_variable_joint(a: &SolverArgs, cfg: &RunConfig, marginal: bool) -> Result<Joint, Failure> {
    let j = load(&a.dist)?;
    let (d1, d2) = match (a.d1, a.d2) {
        (Some(d1), Some(d2)) => (d1, d2),
        _ if j.has(Z1) && j.has(Z2) => return Ok(j),
        _ => return Err(Failure::Input("expected a joint over X1, X2, Z1, Z2, or a source with --d1 and --d2".into())),
    };
    let (x1, x2) = (j.variable(X1)?.clone(), j.variable(X2)?.clone());
    let opts = rd_options(cfg);
    if marginal {
        let mut out = j.clone();
        for (x, z, d) in [(&x1, Z1, d1), (&x2, Z2, d2)] {
            let p = j.marginalize(&[&x.name])?;
            let sol = ba_at_distortion(p.pmf(), &hamming(x), d, &opts)?;
            converged(sol.converged, "Blahut-Arimoto")?;
            out = out.attach(&sol.encoder.rename_input(0, &x.name).rename_output(0, z))?;
        }
        Ok(out)
    } else {
        let sol = ba_joint(&j, &hamming(&x1), &hamming(&x2), (d1, d2), &opts)?;
        converged(sol.converged, "joint Blahut-Arimoto")?;
        Ok(j.attach(&sol.encoder)?)
    }
}

fn wyner(a: SolverArgs, cfg: &RunConfig) -> Outcome {
    let j = four_variable_joint(&a, cfg, false)?;
    let s = wyner_upper(&j, &WynerOptions { tol: a.eps, ..wyner_options(cfg) })?;
    emit(&json!({
        "objective_bits": num(s.objective),
        "residuals": {
            "marginal_match": num(s.marginal_match_residual),
            "conditional_independence": num(s.residuals.conditional_independence),
            "reconstruction_markov": num(s.residuals.reconstruction_markov),
            "encoder_markov": num(s.residuals.encoder_markov),
        },
        "cardinality": s.u_cardinality,
        "restarts_used": s.restarts_used,
        "feasible": s.feasible,
        "p_u": s.p_u.iter().map(|p| num(*p)).collect::<Vec<_>>(),
    }));
    Ok(())
}

fn gk(a: SolverArgs, _cfg: &RunConfig) -> Outcome {
    let j = four_variable_joint(&a, _cfg, true)?;
    let s = gk_lower(&j, a.eps)?;
    let names = ["x2_x1_v", "x1_x2_v", "x1_z1_v", "x2_z2_v"];
    emit(&json!({
        "objective_bits": num(s.objective),
        "residuals": names.iter().zip(s.condition_residuals).map(|(k, v)| (k.to_string(), num(v))).collect::<Map<_, _>>(),
        "cardinality": s.v_alphabet.len(),
        "feasible": s.feasible,
    }));
    Ok(())
}

fn report_json(r: &Report) -> Value {
    json!({
        "k_lower": num(r.k_lower),
        "i_mid": num(r.i_mid),
        "c_upper": num(r.c_upper),
        "slack_left": num(r.slack_left),
        "slack_right": num(r.slack_right),
        "encoder_rate": num(r.encoder_rate),
        "distortions": [num(r.distortions.0), num(r.distortions.1)],
        "i_mid_marginal": num(r.i_mid_marginal),
        "residuals": r.residuals.iter().map(|(k, v)| (k.clone(), num(*v))).collect::<Map<_, _>>(),
        "equality_left": r.equality_left,
        "equality_right": r.equality_right,
        "converged": r.converged,
        "left": r.left.as_str(),
        "right": r.right.as_str(),
        "common_entropy": r.common_entropy.map_or(Value::Null, num),
        "joint_encoder": r.joint_encoder.to_file(),
        "marginal_encoders": [r.marginal_encoders[0].to_file(), r.marginal_encoders[1].to_file()],
    })
}

/// Explains an uncertified side on stderr; stdout stays machine-readable.
fn note_uncertified(r: &Report) {
    let at = format!("at D = ({:.6}, {:.6})", r.distortions.0, r.distortions.1);
    let worst = |prefix: &str| {
        r.residuals
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(String::new(), |(k, v)| format!(", largest residual {k} = {v:.2e}"))
    };
    if r.right == Certificate::Uncertified {
        eprintln!("note: {at} the upper bound is uncertified{}", worst("wyner."));
    }
    if r.left == Certificate::Uncertified {
        eprintln!("note: {at} the lower bound is uncertified{}", worst("gk."));
    }
}

fn check_report(r: &Report) -> Outcome {
    converged(r.converged, "an encoder solve")?;
    if r.consistent() {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "certified bound violated: k_lower {:.6}, i_mid {:.6}, c_upper {:.6}",
            r.k_lower, r.i_mid, r.c_upper
        )))
    }
}

fn source_pair(j: &Joint) -> Result<(DistortionMeasure<f64>, DistortionMeasure<f64>), Failure> {
    if j.names() != [X1, X2] {
        return Err(Failure::Input(format!("expected a source over (X1, X2), got {:?}", j.names())));
    }
    Ok((hamming(j.variable(X1)?), hamming(j.variable(X2)?)))
}

fn verify(a: VerifyArgs, cfg: &RunConfig) -> Outcome {
    let j = load(&a.dist)?;
    let (d1, d2) = source_pair(&j)?;
    let r = sandwich_check(&j, &d1, &d2, (a.d1, a.d2), &sandwich_config(cfg))?;
    emit(&report_json(&r));
    note_uncertified(&r);
    check_report(&r)
}

fn parse_pmf(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',').map(|s| s.trim().parse::<f64>().map_err(|e| Failure::Input(format!("--{what}: {e}")))).collect()
}

fn demo_channels(a: &EqualityArgs, src: &Joint, nw: usize, seed: u64) -> Result<(Channel<f64>, Channel<f64>), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut one = |x: &str, z: &str| -> Result<Channel<f64>, Failure> {
        let xv = src.variable(x)?;
        Ok(match a.encoders {
            Encoders::Copy => Channel::copy(xv, z),
            Encoders::Shared => Channel::label_projection(xv, 1, z)?,
            Encoders::Noisy => {
                let n = xv.card() / nw;
                let rows: Vec<Vec<f64>> = (0..n).map(|_| random_pmf(n, &mut rng)).collect();
                let mut kernel = vec![0.0; xv.card() * xv.card()];
                for xa in 0..n {
                    for w in 0..nw {
                        for b in 0..n {
                            kernel[(xa * nw + w) * xv.card() + b * nw + w] = rows[xa][b];
                        }
                    }
                }
                Channel::new(vec![xv.clone()], vec![Variable::with_alphabet(z, xv.alphabet.clone())], kernel)?
            }
        })
    };
    Ok((one(X1, Z1)?, one(X2, Z2)?))
}

fn equality_demo(a: EqualityArgs, cfg: &RunConfig) -> Outcome {
    let (w, x1p, x2p) = (parse_pmf(&a.w, "w")?, parse_pmf(&a.x1, "x1")?, parse_pmf(&a.x2, "x2")?);
    let src = shared_component_source(&w, &x1p, &x2p)?;
    let (c1, c2) = demo_channels(&a, &src, w.len(), cfg.seed)?;
    let r = equality_case_check(&w, &x1p, &x2p, &c1, &c2, cfg.tol_identity)?;
    if cfg.format == Some(Format::Json) {
        emit(&report_json(&r));
        return Ok(());
    }
    let h_w = r.common_entropy.unwrap_or(f64::NAN);
    println!("shared-component source: |W| = {}, H(W) = {h_w:.6} bits", w.len());
    println!("  K >= {:.6}   I(Z1;Z2) = {:.6}   C <= {:.6}", r.k_lower, r.i_mid, r.c_upper);
    println!("  equality: left {}, right {}", r.equality_left, r.equality_right);
    println!("residuals:");
    for (k, v) in &r.residuals {
        println!("  {k:<36} {v:.6}");
    }
    let joint = src.attach(&c1)?.attach(&c2)?;
    for (aux, side, title) in [(U, Side::Rhs, "upper chain with U = W"), (V, Side::Lhs, "lower chain with V = W")] {
        let t = proof_trace(&joint.attach(&Channel::label_projection(src.variable(X1)?, 1, aux)?)?, side)?;
        println!("{title}: start {:.6}", t.start);
        for s in &t.steps {
            let rel = if s.kind == StepKind::Inequality { "<=" } else { "= " };
            let why = s.justification.map_or(String::new(), |(c, v)| format!("  [{c}: {v:.2e}]"));
            println!("  {rel} {:<40} {:.6}  (residual {:.2e}){why}", s.label, s.rhs, s.residual);
        }
    }
    let with_w = joint.attach(&Channel::label_projection(src.variable(X1)?, 1, W)?)?;
    println!("implications:");
    for imp in implication_suite(&with_w, cfg.tol_identity)? {
        println!("  {:<48} {:?} ({}: {:.2e})", imp.label, imp.outcome, imp.consequent.0, imp.consequent.1);
    }
    Ok(())
}

fn grid(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Input(format!("--{what}: expected start:stop:count, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts[..] else { return Err(bad()) };
    let (start, stop) = (start.parse::<f64>().map_err(|_| bad())?, stop.parse::<f64>().map_err(|_| bad())?);
    let count: usize = count.parse().map_err(|_| bad())?;
    match count {
        0 => Err(bad()),
        1 => Ok(vec![start]),
        n => Ok((0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()),
    }
}

fn sweep(a: SweepArgs, cfg: &RunConfig) -> Outcome {
    let j = load(&a.dist)?;
    let (d1, d2) = source_pair(&j)?;
    let points: Vec<(f64, f64)> = grid(&a.d1, "d1")?
        .into_iter()
        .flat_map(|x| grid(&a.d2, "d2").unwrap().into_iter().map(move |y| (x, y)))
        .collect();
    let config = sandwich_config(cfg);
    let reports =
        points.par_iter().map(|t| sandwich_check(&j, &d1, &d2, *t, &config)).collect::<Result<Vec<_>, _>>()?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            println!("D1,D2,k_lower,i_mid,c_upper,slack_left,slack_right");
            for ((x, y), r) in points.iter().zip(&reports) {
                println!(
                    "{x:.6},{y:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                    r.k_lower, r.i_mid, r.c_upper, r.slack_left, r.slack_right
                );
            }
        }
        Format::Json => emit(&Value::Array(reports.iter().map(report_json).collect())),
    }
    reports.iter().filter(|r| r.converged).for_each(note_uncertified);
    if let Some(bad) = reports.iter().find(|r| r.left == Certificate::Violated || r.right == Certificate::Violated) {
        return check_report(bad);
    }
    converged(reports.iter().all(|r| r.converged), "an encoder solve")
}

fn gen(family: GenFamily, cfg: &RunConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let j: Joint = match family {
        GenFamily::Dsbs { p } => dsbs(p)?,
        GenFamily::Shared { w, x1, x2 } => {
            let (w, x1, x2) = (random_pmf(w, &mut rng), random_pmf(x1, &mut rng), random_pmf(x2, &mut rng));
            shared_component_source(&w, &x1, &x2)?
        }
        GenFamily::Blockdiag { blocks, size } => block_diagonal(&random_pmf(blocks, &mut rng), size)?,
        GenFamily::Random { shape } => {
            let names: Vec<String> = (1..=shape.len()).map(|i| format!("X{i}")).collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            random_joint(&names, &shape, &mut rng)?
        }
    };
    println!("{}", j.to_json());
    Ok(())
}
