use decteam_demo::{example1_summary, square_wave_gaps, witsenhausen_curves};
use serde_json::Value;

fn call(f: fn(&str) -> String, params: &str) -> Value {
    serde_json::from_str(&f(params)).expect("exports return JSON")
}

#[test]
fn linear_curve_matches_the_closed_form() {
    let (k, s) = (0.2, 5.0);
    let v = call(witsenhausen_curves, r#"{"k": 0.2, "sigma": 5, "points": 25}"#);
    let linear = v["linear"].as_array().unwrap();
    assert_eq!(linear.len(), 25);
    for pt in linear {
        let (l, j) = (pt[0].as_f64().unwrap(), pt[1].as_f64().unwrap());
        // Estimation error of λx from λx + w plus the encoder's power cost.
        let snr = l * l * s * s;
        let oracle = k * k * s * s * (1.0 - l) * (1.0 - l) + snr / (snr + 1.0);
        assert!((j - oracle).abs() < 1e-12, "λ = {l}");
    }
    let quantizer = v["quantizer"].as_array().unwrap();
    // The zero encoder leaves the decoder nothing to estimate.
    assert!((quantizer[0][1].as_f64().unwrap() - k * k * s * s).abs() < 1e-9);
    let best = v["best_affine"]["cost"].as_f64().unwrap();
    assert!(linear.iter().all(|p| p[1].as_f64().unwrap() >= best - 1e-12));
    assert!(v["standard_quantizer"]["cost"].as_f64().unwrap() < best);
}

#[test]
fn square_wave_gaps_respect_the_bound() {
    for n in [1usize, 3, 10, 64] {
        let v = call(square_wave_gaps, &format!(r#"{{"n": {n}}}"#));
        let bound = 0.5 / n as f64;
        for g in v["gaps"].as_array().unwrap() {
            let (a, b) = (g["a"].as_f64().unwrap(), g["b"].as_f64().unwrap());
            // ∫_0^x of the left-half indicator, period 1/n.
            let prim = |x: f64| {
                let periods = (x * n as f64).floor();
                let frac = x * n as f64 - periods;
                (0.5 * periods + frac.min(0.5)) / n as f64
            };
            let oracle = ((prim(b) - prim(a)) - (b - a) / 2.0).abs();
            assert!((g["gap"].as_f64().unwrap() - oracle).abs() < 1e-12, "n = {n}, [{a}, {b}]");
            assert!(oracle <= bound + 1e-15);
            assert_eq!(g["within_bound"], true);
        }
        assert_eq!(v["limit_marginal"][0], 0.5);
    }
}

#[test]
fn example1_optimum_matches_a_per_dm_oracle() {
    let step = 0.1;
    let v = call(example1_summary, r#"{"step": 0.1}"#);
    assert_eq!(v["verdict"], "convex");
    assert_eq!(v["detail"]["join_blocks"], 2);
    // Observing y = 1 pins the quadratic cell, so u = 2 costs nothing. On
    // y = 0 each DM faces 0.8 (a − 2)² + 0.1 √(1 + a) separately.
    let grid: Vec<f64> = (0..=10).map(|i| 1.0 + i as f64 * step).collect();
    let per_dm = grid
        .iter()
        .map(|a| 0.8 * (a - 2.0) * (a - 2.0) + 0.1 * (1.0 + a).sqrt())
        .fold(f64::INFINITY, f64::min);
    let value = v["optimum"]["value"].as_f64().unwrap();
    assert!((value - 2.0 * per_dm).abs() < 1e-12, "{value}");
    for actions in v["optimum"]["actions"].as_array().unwrap() {
        assert!((actions[1].as_f64().unwrap() - 2.0).abs() < 1e-12);
    }
}

#[test]
fn errors_come_back_as_json() {
    for (f, p) in [
        (witsenhausen_curves as fn(&str) -> String, r#"{"k": -1, "sigma": 1}"#),
        (witsenhausen_curves, r#"{"k": 1}"#),
        (square_wave_gaps, r#"{"n": 0}"#),
        (example1_summary, r#"{"step": 0.3}"#),
        (example1_summary, "not json"),
    ] {
        let v = call(f, p);
        assert!(v["error"].is_string(), "{p}: {v}");
    }
}
