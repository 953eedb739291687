use decteam::convexity::{certify, mirror_dm, policy_midpoint_test, CertifyOptions, ConvexityVerdict, StaticForm, Witness};
use decteam::gallery::*;
use decteam::infostruct::{classify, is_stochastically_decoupled, IsClass};
use decteam::reduction::verify_equivalence;
use decteam::solvers::brute_force;
use decteam::{DeterministicProfile, RandomizedProfile};
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small() -> QuadSpec {
    QuadSpec {
        x_nodes: 12,
        w_nodes: 12,
        grid_points: 33,
        ..QuadSpec::default()
    }
}

/// `∫_0^x Q_n dm` from the period count: full periods contribute `1/(2n)`
/// each, the partial one `min(frac, ½)/n`.
fn primitive(n: usize, x: f64) -> f64 {
    let t = n as f64 * x;
    let full = t.floor();
    full / (2.0 * n as f64) + (t - full).min(0.5) / n as f64
}

fn to_f64(r: (i64, i64)) -> f64 {
    r.0 as f64 / r.1 as f64
}

#[test]
fn square_wave_gaps_and_limit() {
    for n in [1, 2, 10, 100, 256] {
        let sw = square_wave(n).unwrap();
        assert_eq!(sw.gaps.len(), 20);
        for g in &sw.gaps {
            let (a, b) = (to_f64(g.a), to_f64(g.b));
            let expect = primitive(n, b) - primitive(n, a);
            assert!((to_f64(g.integral) - expect).abs() < 1e-12, "n={n} [{a},{b}]");
            assert!(g.within_bound);
            assert!(to_f64(g.gap) <= 1.0 / (2.0 * n as f64));
        }
        assert!(sw.ci_pn.independent);
        assert!(!sw.ci_limit.independent);
        assert_eq!(sw.limit_conditional, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(sw.limit_marginal, [0.5, 0.5]);
    }
    let r = Rational64::new;
    assert_eq!(square_wave_integral(2, r(0, 1), r(1, 1)), r(1, 2));
    assert_eq!(square_wave_integral(1, r(0, 1), r(3, 10)), r(3, 10));
    assert!(square_wave(0).is_err());
}

#[test]
fn decoupled_optimum_splits() {
    let (p, a) = decoupled_example(false).unwrap();
    assert!(is_stochastically_decoupled(&p, &a, 1_000_000).unwrap().decoupled);
    let (_, joint) = brute_force(&p, 1_000_000).unwrap();
    let parts: f64 = (0..2)
        .map(|s| brute_force(&decoupled_subsystem(s).unwrap(), 100).unwrap().1)
        .sum();
    assert!((joint - parts).abs() <= 1e-12, "{joint} vs {parts}");

    let (c, a) = decoupled_example(true).unwrap();
    assert!(!is_stochastically_decoupled(&c, &a, 1_000_000).unwrap().decoupled);
    assert!(decoupled_subsystem(2).is_err());
}

/// `E[(1 − tanh(a(a + w)))²]` for standard normal `w` by the trapezoid rule.
fn tanh_residual(a: f64) -> f64 {
    let n = 40_000;
    let (lo, hi) = (-12.0, 12.0);
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| {
            let w: f64 = lo + i as f64 * h;
            let f = (-0.5 * w * w).exp() / (2.0 * std::f64::consts::PI).sqrt() * (1.0 - (a * (a + w)).tanh()).powi(2);
            if i == 0 || i == n {
                0.5 * f * h
            } else {
                f * h
            }
        })
        .sum()
}

#[test]
fn quantizer_beats_affine_at_benchmark_point() {
    let (k, sigma) = (0.2, 5.0);
    let w = witsenhausen(k, sigma, &QuadSpec::default()).unwrap();
    let r = w.affine_vs_quantizer();
    assert!(r.quantizer_beats_affine);
    assert!((r.affine_cost_quadrature - r.affine_cost).abs() < 1e-9);
    // Two-point quantizer: k²(σ² − a²) plus a²E(1 − tanh(a(a+w)))² with
    // the tanh decoder.
    let a = r.quantizer_level;
    let expect = k * k * (sigma * sigma - a * a) + a * a * tanh_residual(a);
    // The sign kink at x = 0 limits Gauss–Hermite accuracy in x.
    assert!((r.quantizer_cost - expect).abs() < 1e-2, "{} vs {expect}", r.quantizer_cost);
    // Scan oracle for the affine minimum.
    let scan = (0..=100_000)
        .map(|i| witsenhausen_affine_cost(k, sigma, i as f64 / 100_000.0))
        .fold(f64::INFINITY, f64::min);
    assert!(r.affine_cost <= scan + 1e-12);
    assert!(scan - r.affine_cost < 1e-8);
}

#[test]
fn signaling_closed_forms() {
    let sigma = 2.0;
    let s = signaling(0.5, sigma, &small()).unwrap();
    assert_eq!(classify(&s.problem), IsClass::Nonclassical);
    let zero = s.team.expected_cost(&|_| 0.0, &|_| 0.0);
    assert!((zero - sigma * sigma).abs() < 1e-10);
    // Linear encoder αx with decoder αx/(α²σ²+1)·σ²... evaluated in closed form.
    for alpha in [0.1, 0.4, 1.0] {
        let g = alpha * sigma * sigma / (alpha * alpha * sigma * sigma + 1.0);
        let q = s.team.expected_cost(&|x| alpha * x, &|y| g * y);
        assert!((q - signaling_affine_cost(0.5, sigma, alpha)).abs() < 1e-9);
    }
    let gains: Vec<f64> = [0.1, 0.5, 1.0, 1.9].iter().map(|k| signaling_best_affine(*k, sigma).0).collect();
    assert!(gains.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(signaling_best_affine(3.0, sigma).0, 0.0);
}

#[test]
fn witsenhausen_reduction_is_exact_on_policies() {
    let w = witsenhausen(0.2, 5.0, &small()).unwrap();
    assert_eq!(classify(&w.problem), IsClass::Nonclassical);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let policies = [
        w.quantizer_profile(),
        w.profile(&|x| 0.9 * x, &|y| 0.9 * y),
        DeterministicProfile::first(&w.problem),
        DeterministicProfile::random(&w.problem, &mut rng),
    ];
    for d in &policies {
        assert!(verify_equivalence(&w.problem, &w.reduction, d).unwrap() <= 1e-10);
    }
    let r = RandomizedProfile::random(&w.problem, &mut rng);
    assert!(verify_equivalence(&w.problem, &w.reduction, &r).unwrap() <= 1e-10);
}

#[test]
fn witsenhausen_is_not_convex() {
    let (k, sigma) = (0.2, 5.0);
    let w = witsenhausen(k, sigma, &small()).unwrap();
    let form = StaticForm::from_reduction(&w.reduction);
    let q = w.quantizer_profile();
    let mirrored = (0..2).fold(q.clone(), |p, t| mirror_dm(&form, &p, t));
    let (lhs, rhs) = policy_midpoint_test(&form, &q, &mirrored, 0.5).unwrap();
    // The midpoint plays the grid centre everywhere: J = k²E x².
    let second_moment: f64 = w
        .x_values()
        .iter()
        .zip(w.problem.prior())
        .map(|(x, p)| p * x * x)
        .sum();
    assert!((lhs - k * k * second_moment).abs() < 1e-12);
    assert!((lhs - 1.0).abs() < 1e-9);
    // A pair averaging to zero cannot violate: the k² term alone already
    // averages to at least k²E x² by convexity of the square.
    let mean_sq: f64 = w
        .x_values()
        .iter()
        .zip(w.problem.prior())
        .zip(q.map(0))
        .map(|((x, p), u)| p * (x - w.action_values()[*u]).powi(2))
        .sum();
    let mirror_sq: f64 = w
        .x_values()
        .iter()
        .zip(w.problem.prior())
        .zip(mirrored.map(0))
        .map(|((x, p), u)| p * (x - w.action_values()[*u]).powi(2))
        .sum();
    assert!(rhs >= 0.5 * k * k * (mean_sq + mirror_sq) - 1e-12);
    assert!(0.5 * (mean_sq + mirror_sq) >= second_moment);
    assert!(rhs > lhs);

    let options = CertifyOptions {
        seeds: vec![q],
        ..CertifyOptions::default()
    };
    match certify(&form, &options).unwrap() {
        ConvexityVerdict::NotConvex {
            witness: Witness::Policy { first, second, lhs, rhs, .. },
        } => {
            assert!(lhs > rhs);
            assert_eq!(policy_midpoint_test(&form, &first, &second, 0.5).unwrap(), (lhs, rhs));
        }
        other => panic!("unexpected verdict {}", other.tag()),
    }
}

#[test]
fn functional_midpoint_of_mirrored_quantizers() {
    let (k, sigma) = (0.2, 5.0);
    let w = witsenhausen(k, sigma, &small()).unwrap();
    let a = w.quantizer_level();
    let dec = w.team.mmse_decoder(&|x| a * x.signum());
    let dec_neg = w.team.mmse_decoder(&|x| -a * x.signum());
    let (lhs, rhs) = w.team.policy_midpoint(
        (&|x| a * x.signum(), &|y| dec.eval(y)),
        (&|x| -a * x.signum(), &|y| dec_neg.eval(y)),
    );
    // Both decoders equal a·tanh(a·y), so the midpoint keeps that decoder
    // with a zero encoder: J = k²σ² + E(a·tanh(a·w))².
    let w_rule = w.team.w_rule();
    let tail: f64 = w_rule
        .nodes()
        .iter()
        .zip(w_rule.weights())
        .map(|(y, p)| p * (a * (a * y).tanh()).powi(2))
        .sum();
    assert!((lhs - k * k * sigma * sigma - tail).abs() < 1e-9);
    // Flipping the decoder as well gives the zero policy pair.
    let (zero, avg) = w.team.policy_midpoint(
        (&|x| a * x.signum(), &|y| dec.eval(y)),
        (&|x| -a * x.signum(), &|y| -dec.eval(y)),
    );
    assert!((zero - k * k * sigma * sigma).abs() < 1e-9);
    assert!(avg > zero && rhs < avg);
}

#[test]
fn example1_steps() {
    assert!(example1(0.3).is_err());
    let p = example1(0.25).unwrap();
    assert_eq!(p.dm(0).u.len(), 5);
    assert_eq!(NAMES.len(), 5);
}
