//! Subcommand bodies. Each returns the `result` section of the report.

use crate::problem::{export, Diagnostic, Loaded};
use crate::report::{profile_from_json, profile_json};
use decteam::convexity::{certify, CertifyOptions, ConvexityVerdict, StaticForm, Witness};
use decteam::gallery::{self, QuadSpec, TwoStage};
use decteam::infostruct::{
    classify, is_classical, is_partially_nested, is_static, is_stochastically_decoupled, precedence_edges,
};
use decteam::reduction::{static_reduce, verify_equivalence, Reference};
use decteam::solvers::{brute_force, is_person_by_person_optimal, mixture_lp, pbp_iterate};
use decteam::strategic::{
    check_membership_la, check_membership_lm, check_membership_lr, enumerate_profiles, find_nonconvexity_witness,
    induce_la, induce_lr, StrategicMeasure,
};
use decteam::{DeterministicProfile, Error, JointTable, RandomizedProfile, TeamProblem};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Why a command did not produce a report.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid input; exit status 2.
    Input(Vec<Diagnostic>),
    /// The analysis itself failed; exit status 1.
    Analysis(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Analysis(e.to_string())
    }
}

pub type Outcome = Result<Value, Failure>;

/// Input error tied to a file but to no particular line.
pub fn input_error(file: &str, message: impl Into<String>) -> Failure {
    Failure::Input(vec![Diagnostic {
        file: file.to_string(),
        at: None,
        path: String::new(),
        message: message.into(),
    }])
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn validate(l: &Loaded) -> Outcome {
    let p = &l.problem;
    let dms: Vec<Value> = p
        .dms()
        .iter()
        .map(|d| json!({ "y": d.y.label(), "n_y": d.y.len(), "u": d.u.label(), "n_u": d.u.len() }))
        .collect();
    Ok(json!({
        "valid": true,
        "omega0": { "label": p.omega0().label(), "size": p.omega0().len() },
        "dms": dms,
        "profile_count": p.profile_count().to_string(),
        "decoupling_annotation": l.decoupling.is_some(),
    }))
}

pub fn classify_report(p: &TeamProblem) -> Outcome {
    let edges: Vec<Value> = precedence_edges(p)
        .into_iter()
        .map(|(k, i)| json!({ "action": format!("u{}", k + 1), "measurement": format!("y{}", i + 1) }))
        .collect();
    Ok(json!({
        "is_class": classify(p).as_str(),
        "static": is_static(p),
        "classical": is_classical(p),
        "partially_nested": is_partially_nested(p),
        "precedence": edges,
    }))
}

/// Reads `--reference`: `uniform`, or a JSON list with one entry per DM,
/// each `"uniform"`, `"kept"` or an object mapping measurement labels to
/// masses.
pub fn read_references(p: &TeamProblem, name: &str, text: &str) -> Result<Vec<Reference>, Failure> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        Failure::Input(vec![Diagnostic {
            file: name.to_string(),
            at: Some((e.line(), e.column())),
            path: String::new(),
            message: e.to_string(),
        }])
    })?;
    let list = v
        .as_array()
        .filter(|l| l.len() == p.n_dms())
        .ok_or_else(|| input_error(name, format!("expected a list of {} references", p.n_dms())))?;
    list.iter()
        .enumerate()
        .map(|(t, r)| match r {
            Value::String(s) if s == "uniform" => Ok(Reference::Uniform),
            Value::String(s) if s == "kept" => Ok(Reference::Kept),
            Value::Object(m) => {
                let y = &p.dm(t).y;
                let mut pmf = vec![0.0; y.len()];
                for (k, m) in m {
                    let i = y
                        .index_of(k)
                        .ok_or_else(|| input_error(name, format!("reference {}: `{k}` is not a point of `{}`", t + 1, y.label())))?;
                    pmf[i] = m
                        .as_f64()
                        .ok_or_else(|| input_error(name, format!("reference {}: mass of `{k}` is not a number", t + 1)))?;
                }
                Ok(Reference::Given { pmf })
            }
            _ => Err(input_error(name, format!("reference {}: expected \"uniform\", \"kept\" or a pmf", t + 1))),
        })
        .collect()
}

pub fn reduce(p: &TeamProblem, references: Option<&[Reference]>, rng: &mut ChaCha8Rng) -> Outcome {
    let r = static_reduce(p, references)?;
    let d = DeterministicProfile::random(p, rng);
    let k = RandomizedProfile::random(p, rng);
    let deviation = verify_equivalence(p, &r, &d)?.max(verify_equivalence(p, &r, &k)?);
    let q: Vec<Value> = (0..p.n_dms()).map(|t| to_value(&r.q(t))).collect();
    Ok(json!({
        "references": to_value(&r.references()),
        "preserves_cost": r.preserves_cost(),
        "exogenous_points": r.exo_points().len(),
        "q": q,
        "equivalence": {
            "profiles": ["random deterministic", "random randomized"],
            "max_deviation": deviation,
        },
    }))
}

pub enum Init {
    First,
    Random,
    Given(Value),
}

pub fn solve(p: &TeamProblem, method: &str, cap: u128, init: Init, max_sweeps: usize, rng: &mut ChaCha8Rng) -> Outcome {
    match method {
        "brute" => {
            let (d, value) = brute_force(p, cap)?;
            Ok(json!({ "method": method, "value": value, "profile": profile_json(p, &d) }))
        }
        "mixture-lp" => {
            let s = mixture_lp(p, cap)?;
            let weights: Vec<Value> = s.weights.iter().map(|(rank, w)| json!({ "rank": rank.to_string(), "weight": w })).collect();
            Ok(json!({
                "method": method,
                "value": s.value,
                "profile": profile_json(p, &s.vertex),
                "weights": weights,
            }))
        }
        "pbp" => {
            let start = match init {
                Init::First => DeterministicProfile::first(p),
                Init::Random => DeterministicProfile::random(p, rng),
                Init::Given(v) => profile_from_json(p, &v).map_err(|e| input_error("--init", e))?,
            };
            let out = pbp_iterate(p, &start, max_sweeps)?;
            let value = *out.trace.last().expect("trace starts with the initial cost");
            Ok(json!({
                "method": method,
                "value": value,
                "profile": profile_json(p, &out.profile),
                "initial": profile_json(p, &start),
                "converged": out.converged,
                "sweeps": out.sweeps,
                "trace": out.trace,
                "person_by_person_optimal": is_person_by_person_optimal(p, &out.profile)?,
            }))
        }
        other => Err(Failure::Analysis(format!("unknown method `{other}`"))),
    }
}

fn verdict_json(p: &TeamProblem, form: &StaticForm, v: &ConvexityVerdict) -> Value {
    let mut out = to_value(v);
    match v {
        ConvexityVerdict::NotConvex {
            witness: Witness::Policy { first, second, .. },
        } => {
            out["witness"]["first"] = profile_json(p, first);
            out["witness"]["second"] = profile_json(p, second);
        }
        ConvexityVerdict::NotConvex {
            witness: Witness::Cell { a, b, .. },
        } => {
            let labels = |x: &[usize]| -> Value {
                x.iter().enumerate().map(|(t, u)| json!(form.actions()[t].point(*u))).collect()
            };
            out["witness"]["a_labels"] = labels(a);
            out["witness"]["b_labels"] = labels(b);
        }
        _ => {}
    }
    out
}

pub fn certify_convexity(p: &TeamProblem, seeds: Vec<DeterministicProfile>, exhaustive_cap: u128) -> Outcome {
    let (form, reduced) = if is_static(p) {
        (StaticForm::from_static_problem(p)?, false)
    } else {
        (StaticForm::from_reduction(&static_reduce(p, None)?), true)
    };
    let options = CertifyOptions { seeds, exhaustive_cap };
    let v = certify(&form, &options)?;
    Ok(json!({
        "reduced": reduced,
        "exogenous_points": form.len(),
        "meet_blocks": form.meet().n_blocks(),
        "join_blocks": form.join().n_blocks(),
        "verdict": v.tag(),
        "details": verdict_json(p, &form, &v),
    }))
}

pub fn strategic_enumerate(p: &TeamProblem, cap: u128) -> Outcome {
    let profiles = enumerate_profiles(p, cap)?;
    let mut rows = Vec::with_capacity(profiles.len());
    for (i, d) in profiles.iter().enumerate() {
        rows.push(json!({ "rank": i, "profile": profile_json(p, d), "expected_cost": p.expected_cost(d)? }));
    }
    Ok(json!({ "count": profiles.len(), "measures": rows }))
}

/// Measure file: `{"entries": [{"at": [ω₀, y¹, u¹, …], "mass": m}, …]}`
/// with point labels along the joint axes.
pub fn read_measure(p: &TeamProblem, name: &str, text: &str) -> Result<StrategicMeasure, Failure> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        Failure::Input(vec![Diagnostic {
            file: name.to_string(),
            at: Some((e.line(), e.column())),
            path: String::new(),
            message: e.to_string(),
        }])
    })?;
    let mut axes = vec![p.omega0()];
    for d in p.dms() {
        axes.push(&d.y);
        axes.push(&d.u);
    }
    let dims = p.joint_dims();
    let mut joint = JointTable::zeros(dims).map_err(|e| input_error(name, e.to_string()))?;
    let entries = v["entries"]
        .as_array()
        .ok_or_else(|| input_error(name, "expected {\"entries\": [...]}"))?;
    for (n, e) in entries.iter().enumerate() {
        let at = e["at"].as_array().filter(|a| a.len() == axes.len()).ok_or_else(|| {
            input_error(name, format!("entries[{n}].at must list {} point labels", axes.len()))
        })?;
        let mut digits = Vec::with_capacity(axes.len());
        for (a, label) in axes.iter().zip(at) {
            let i = label
                .as_str()
                .and_then(|l| a.index_of(l))
                .ok_or_else(|| input_error(name, format!("entries[{n}]: {label} is not a point of `{}`", a.label())))?;
            digits.push(i);
        }
        let m = e["mass"]
            .as_f64()
            .ok_or_else(|| input_error(name, format!("entries[{n}].mass is not a number")))?;
        let idx = joint.radix().index(&digits);
        joint.mass_mut()[idx] += m;
    }
    StrategicMeasure::new(p, joint).map_err(|e| input_error(name, e.to_string()))
}

pub enum MeasureSource {
    File(StrategicMeasure),
    InduceDeterministic,
    InduceRandomized,
}

pub fn strategic_check(p: &TeamProblem, source: MeasureSource, perturb: Option<(usize, f64)>, rng: &mut ChaCha8Rng) -> Outcome {
    let (origin, mut m) = match source {
        MeasureSource::File(m) => ("file", m),
        MeasureSource::InduceDeterministic => ("random deterministic profile", induce_la(p, &DeterministicProfile::random(p, rng))?),
        MeasureSource::InduceRandomized => ("random randomized profile", induce_lr(p, &RandomizedProfile::random(p, rng))?),
    };
    if let Some((index, delta)) = perturb {
        if index >= m.mass().len() {
            return Err(Failure::Analysis(format!("perturbation index {index} outside the joint of size {}", m.mass().len())));
        }
        m = m.perturbed(index, delta);
    }
    let lm = if is_static(p) { Some(check_membership_lm(p, &m)?) } else { None };
    Ok(json!({
        "measure": origin,
        "perturbation": perturb.map(|(i, d)| json!({ "index": i, "delta": d })),
        "expected_cost": p.cost_inner(m.joint()),
        "l_a": to_value(&check_membership_la(p, &m)),
        "l_r": to_value(&check_membership_lr(p, &m)),
        "l_m": lm,
    }))
}

pub fn strategic_witness(p: &TeamProblem, cap: u128) -> Outcome {
    Ok(match find_nonconvexity_witness(p, cap)? {
        Some(w) => json!({
            "found": true,
            "first_rank": w.first.to_string(),
            "second_rank": w.second.to_string(),
            "first": profile_json(p, &w.first_profile),
            "second": profile_json(p, &w.second_profile),
            "lambda": w.lambda,
            "midpoint_l_r": to_value(&w.verdict),
        }),
        None => json!({ "found": false }),
    })
}

// ---------------------------------------------------------------------------
// Gallery
// ---------------------------------------------------------------------------

pub struct GalleryParams {
    pub k: Option<f64>,
    pub sigma: Option<f64>,
    pub n: usize,
    pub step: f64,
    pub coupled: bool,
    pub quad: QuadSpec,
    pub check: Option<String>,
}

/// Problem built by a gallery entry, for `--export`.
pub struct GalleryOutput {
    pub result: Value,
    pub problem: Option<(TeamProblem, Option<decteam::infostruct::DecouplingAnnotation>)>,
}

fn unknown_check(name: &str, check: &str, known: &[&str]) -> Failure {
    Failure::Analysis(format!("gallery `{name}` has no check `{check}` (known: {})", known.join(", ")))
}

fn two_stage_summary(w: &TwoStage) -> Value {
    json!({
        "kind": to_value(&w.kind),
        "k": w.k,
        "sigma": w.sigma,
        "quadrature": to_value(&w.quad),
        "omega0_points": w.problem.omega0().len(),
        "action_points": w.action_values().len(),
        "y2_points": w.y2_values().len(),
        "is_class": classify(&w.problem).as_str(),
    })
}

fn equivalence(w: &TwoStage, rng: &mut ChaCha8Rng) -> Result<Value, Failure> {
    let policies = [
        ("quantizer", w.quantizer_profile()),
        ("identity", w.profile(&|x| x, &|y| y)),
        ("half gain", w.profile(&|x| 0.5 * x, &|y| 0.5 * y)),
        ("first", DeterministicProfile::first(&w.problem)),
        ("random", DeterministicProfile::random(&w.problem, rng)),
    ];
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, d) in &policies {
        let dev = verify_equivalence(&w.problem, &w.reduction, d)?;
        worst = worst.max(dev);
        rows.push(json!({ "policy": name, "cost": w.problem.expected_cost(d)?, "deviation": dev }));
    }
    Ok(json!({ "policies": rows, "max_deviation": worst }))
}

fn certify_two_stage(w: &TwoStage) -> Result<Value, Failure> {
    let form = StaticForm::from_reduction(&w.reduction);
    let options = CertifyOptions {
        seeds: vec![w.quantizer_profile()],
        ..CertifyOptions::default()
    };
    let v = certify(&form, &options)?;
    Ok(json!({ "verdict": v.tag(), "details": verdict_json(&w.problem, &form, &v) }))
}

pub fn gallery(name: &str, g: &GalleryParams, rng: &mut ChaCha8Rng) -> Result<GalleryOutput, Failure> {
    let check = g.check.as_deref();
    let mut out = GalleryOutput {
        result: Value::Null,
        problem: None,
    };
    match name {
        "witsenhausen" => {
            let (k, sigma) = (g.k.unwrap_or(0.2), g.sigma.unwrap_or(5.0));
            let w = gallery::witsenhausen(k, sigma, &g.quad)?;
            let (gain, cost) = gallery::witsenhausen_best_affine(k, sigma);
            let mut r = json!({
                "problem": two_stage_summary(&w),
                "best_affine": { "gain": gain, "cost": cost },
            });
            match check {
                None => {}
                Some("affine-vs-quantizer") => {
                    let a = w.affine_vs_quantizer();
                    r["quantizer_beats_affine"] = json!(a.quantizer_beats_affine);
                    r["affine_vs_quantizer"] = to_value(&a);
                }
                Some("equivalence") => r["equivalence"] = equivalence(&w, rng)?,
                Some("certify") => r["certification"] = certify_two_stage(&w)?,
                Some(c) => return Err(unknown_check(name, c, &["affine-vs-quantizer", "equivalence", "certify"])),
            }
            out.result = r;
            out.problem = Some((w.problem, None));
        }
        "signaling" => {
            let (k, sigma) = (g.k.unwrap_or(0.5), g.sigma.unwrap_or(1.0));
            let s = gallery::signaling(k, sigma, &g.quad)?;
            let (alpha, cost) = gallery::signaling_best_affine(k, sigma);
            let mut r = json!({
                "problem": two_stage_summary(&s),
                "best_affine": { "alpha": alpha, "cost": cost },
            });
            match check {
                None => {}
                Some("staircase") => {
                    let centre = if alpha > 0.0 { alpha } else { 0.5 };
                    let alphas: Vec<f64> = (0..=16).map(|i| centre * (0.6 + 0.05 * i as f64)).chain([0.0]).collect();
                    let deltas = [0.0, 0.25 * sigma, 0.5 * sigma, sigma];
                    let found = s.staircase_minimum(&alphas, &deltas)?;
                    r["staircase"] = to_value(&found);
                    r["grid_gap"] = json!(found.value - cost);
                }
                Some("equivalence") => r["equivalence"] = equivalence(&s, rng)?,
                Some("certify") => r["certification"] = certify_two_stage(&s)?,
                Some(c) => return Err(unknown_check(name, c, &["staircase", "equivalence", "certify"])),
            }
            out.result = r;
            out.problem = Some((s.problem, None));
        }
        "square-wave" => {
            if let Some(c) = check {
                return Err(unknown_check(name, c, &[]));
            }
            out.result = to_value(&gallery::square_wave(g.n)?);
        }
        "example1" => {
            let p = gallery::example1(g.step)?;
            let mut r = json!({ "problem": { "step": g.step, "action_points": p.dm(0).u.len() } });
            match check {
                None | Some("certify") => r["certification"] = certify_convexity(&p, Vec::new(), 2_000)?,
                Some("optimum") => {
                    let (d, j) = brute_force(&p, decteam::tolerances::DEFAULT_CAP)?;
                    r["optimum"] = json!({ "value": j, "profile": profile_json(&p, &d) });
                }
                Some(c) => return Err(unknown_check(name, c, &["certify", "optimum"])),
            }
            out.result = r;
            out.problem = Some((p, None));
        }
        "decoupled" => {
            if let Some(c) = check {
                return Err(unknown_check(name, c, &[]));
            }
            let (p, a) = gallery::decoupled_example(g.coupled)?;
            let report = is_stochastically_decoupled(&p, &a, decteam::tolerances::DEFAULT_CAP)?;
            let (_, joint) = brute_force(&p, decteam::tolerances::DEFAULT_CAP)?;
            let mut parts = Vec::new();
            for s in 0..2 {
                parts.push(brute_force(&gallery::decoupled_subsystem(s)?, 100)?.1);
            }
            out.result = json!({
                "coupled": g.coupled,
                "decoupling": to_value(&report),
                "optimum": joint,
                "subsystem_optima": parts,
                "split_gap": (joint - parts.iter().sum::<f64>()).abs(),
            });
            out.problem = Some((p, Some(a)));
        }
        other => {
            return Err(Failure::Analysis(format!(
                "unknown gallery entry `{other}` (known: {})",
                gallery::NAMES.join(", ")
            )))
        }
    }
    Ok(out)
}

pub fn export_problem(out: &GalleryOutput) -> Option<Value> {
    out.problem.as_ref().map(|(p, a)| export(p, a.as_ref()))
}
