//! WebAssembly front end for three gallery views. Every export takes a JSON
//! parameter object and returns a JSON string; failures come back as
//! `{"error": "..."}` so the page needs no exception handling and the same
//! functions run natively in tests.

use decteam::convexity::{certify_team_convexity, ConvexityVerdict};
use decteam::gallery::{self, GaussianTwoStage, QuadSpec, TwoStageKind};
use decteam::solvers::brute_force;
use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveParams {
    k: f64,
    sigma: f64,
    #[serde(default = "default_points")]
    points: usize,
}

fn default_points() -> usize {
    41
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SquareParams {
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Example1Params {
    step: f64,
}

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn params<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("bad parameters: {e}"))
}

/// Witsenhausen costs along two one-parameter families: linear encoders
/// `λx` with their linear decoder (closed form), and two-point quantizers
/// `a·sgn(x)` with their conditional-mean decoder (quadrature).
#[wasm_bindgen]
pub fn witsenhausen_curves(params_json: &str) -> String {
    respond(curves(params_json))
}

fn curves(text: &str) -> Result<Value, String> {
    let p: CurveParams = params(text)?;
    if !(2..=400).contains(&p.points) {
        return Err("points must lie in 2..=400".into());
    }
    let quad = QuadSpec {
        x_nodes: 48,
        w_nodes: 48,
        ..QuadSpec::default()
    };
    let team = GaussianTwoStage::new(TwoStageKind::Witsenhausen, p.k, p.sigma, &quad).map_err(|e| e.to_string())?;
    let last = (p.points - 1) as f64;
    let linear: Vec<[f64; 2]> = (0..p.points)
        .map(|i| {
            let lambda = 1.2 * i as f64 / last;
            [lambda, gallery::witsenhausen_affine_cost(p.k, p.sigma, lambda)]
        })
        .collect();
    let quantizer: Vec<[f64; 2]> = (0..p.points)
        .map(|i| {
            let a = 2.0 * p.sigma * i as f64 / last;
            [a, team.cost_with_mmse(&|x: f64| a * x.signum())]
        })
        .collect();
    let (gain, affine_cost) = gallery::witsenhausen_best_affine(p.k, p.sigma);
    let level = p.sigma * (2.0 / std::f64::consts::PI).sqrt();
    let quantizer_cost = team.cost_with_mmse(&|x: f64| level * x.signum());
    Ok(json!({
        "linear": linear,
        "quantizer": quantizer,
        "best_affine": { "gain": gain, "cost": affine_cost },
        "standard_quantizer": { "level": level, "cost": quantizer_cost },
    }))
}

/// Interval gaps `|∫_A Q_n − m(A)/2|` of the square-wave sequence, with the
/// bound `1/(2n)` they must respect.
#[wasm_bindgen]
pub fn square_wave_gaps(params_json: &str) -> String {
    respond(square(params_json))
}

fn square(text: &str) -> Result<Value, String> {
    let p: SquareParams = params(text)?;
    if p.n > 2_000 {
        return Err("n is limited to 2000 in the browser".into());
    }
    let sw = gallery::square_wave(p.n).map_err(|e| e.to_string())?;
    let ratio = |(a, b): (i64, i64)| a as f64 / b as f64;
    let gaps: Vec<Value> = sw
        .gaps
        .iter()
        .map(|g| {
            json!({
                "a": ratio(g.a), "b": ratio(g.b),
                "integral": ratio(g.integral), "gap": ratio(g.gap),
                "within_bound": g.within_bound,
            })
        })
        .collect();
    Ok(json!({
        "n": p.n,
        "bound": 1.0 / (2 * p.n) as f64,
        "gaps": gaps,
        "limit_marginal": sw.limit_marginal,
        "limit_conditional": sw.limit_conditional,
    }))
}

/// Convexity verdict and optimum of the three-cell example on an action
/// grid of the given step.
#[wasm_bindgen]
pub fn example1_summary(params_json: &str) -> String {
    respond(example1(params_json))
}

fn example1(text: &str) -> Result<Value, String> {
    let p: Example1Params = params(text)?;
    if p.step < 0.05 {
        return Err("step must be at least 0.05 in the browser".into());
    }
    let problem = gallery::example1(p.step).map_err(|e| e.to_string())?;
    let verdict = certify_team_convexity(&problem).map_err(|e| e.to_string())?;
    let (profile, value) = brute_force(&problem, decteam::tolerances::DEFAULT_CAP).map_err(|e| e.to_string())?;
    let actions: Vec<Vec<f64>> = profile
        .maps()
        .iter()
        .enumerate()
        .map(|(t, m)| {
            let u = problem.dm(t).u.values().expect("example actions are numeric");
            m.iter().map(|&i| u[i]).collect()
        })
        .collect();
    let detail = match &verdict {
        ConvexityVerdict::Convex { certificate } => json!({
            "join_blocks": certificate.join_blocks,
            "strictly_convex": certificate.strictly_convex,
        }),
        ConvexityVerdict::NotConvex { .. } => json!({}),
        ConvexityVerdict::Inconclusive { reason } => json!({ "reason": reason }),
    };
    Ok(json!({
        "step": p.step,
        "verdict": verdict.tag(),
        "detail": detail,
        "optimum": { "value": value, "actions": actions },
    }))
}
