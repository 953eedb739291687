//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! if any criterion fails.

use decteam::convexity::{
    certify, certify_team_convexity, mirror_dm, policy_midpoint_test, CertifyOptions, ConvexityVerdict, StaticForm,
    Witness,
};
use decteam::gallery::fixtures::{binary_signaling, random_classical, random_problem, two_bit_trivial_y};
use decteam::gallery::*;
use decteam::infostruct::is_stochastically_decoupled;
use decteam::quadrature::{gauss_hermite, tensor};
use decteam::reduction::{static_reduce, verify_equivalence};
use decteam::solvers::*;
use decteam::strategic::*;
use decteam::{DeterministicProfile, RandomizedProfile};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run(id: &str, title: &str, budget: Duration, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if elapsed > budget => Err(format!("{detail}; over budget {:.0}s", budget.as_secs_f64())),
        other => other,
    };
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("{tag} {id} {title} [{:.2}s] {detail}", elapsed.as_secs_f64());
    outcome.is_ok()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn a1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_gap: f64 = 0.0;
    let mut evaluated = 0usize;
    for team in 0..100 {
        let (n_omega, n_y, n_u) = (rng.gen_range(1..=4), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let p = random_problem(&mut rng, 2, n_omega, n_y, n_u, team % 2 == 0);
        let (_, best) = brute_force(&p, 1_000_000).map_err(err)?;
        for _ in 0..10_000 {
            let r = RandomizedProfile::random(&p, &mut rng);
            let j = p.expected_cost(&r).map_err(err)?;
            ensure(best <= j + 1e-12, format!("team {team}: randomized cost {j} below brute force {best}"))?;
            evaluated += 1;
        }
        let lp = mixture_lp(&p, 1_000_000).map_err(err)?;
        worst_gap = worst_gap.max((lp.value - best).abs());
        ensure(worst_gap <= 1e-9, format!("team {team}: mixture_lp differs by {worst_gap:e}"))?;
    }
    Ok(format!("100 teams, {evaluated} randomized profiles, max |LP − brute| = {worst_gap:.1e}"))
}

fn a2() -> Outcome {
    let mut lines = Vec::new();
    for (name, p) in [
        ("two-bit", two_bit_trivial_y(vec![0.0, 1.0, 1.0, 0.0])),
        ("binary signaling", binary_signaling(0.5)),
    ] {
        let w = find_nonconvexity_witness(&p, 1_000_000)
            .map_err(err)?
            .ok_or(format!("{name}: no witness"))?;
        let mid = mix(
            &[
                induce_la(&p, &w.first_profile).map_err(err)?,
                induce_la(&p, &w.second_profile).map_err(err)?,
            ],
            &[0.5, 0.5],
        )
        .map_err(err)?;
        let v = check_membership_lr(&p, &mid);
        ensure(
            !v.member && v.failed(Condition::ActionDependence),
            format!("{name}: midpoint does not fail the action-dependence condition"),
        )?;
        lines.push(format!("{name} pair ({}, {})", w.first, w.second));
    }
    Ok(lines.join(", "))
}

fn a3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (n_omega, n_y1, n_u, n_s) = (rng.gen_range(2..=4), rng.gen_range(1..=3), rng.gen_range(2..=3), rng.gen_range(1..=2));
        let p = random_classical(&mut rng, n_omega, n_y1, n_u, n_s);
        let p1 = induce_lr(&p, &RandomizedProfile::random(&p, &mut rng)).map_err(err)?;
        let p2 = induce_lr(&p, &RandomizedProfile::random(&p, &mut rng)).map_err(err)?;
        let lambda = rng.gen_range(0.0..1.0);
        let kernels = realize_midpoint_classical(&p, &p1, &p2, lambda).map_err(err)?;
        let back = induce_lr(&p, &kernels).map_err(err)?;
        let target = mix(&[p1, p2], &[lambda, 1.0 - lambda]).map_err(err)?;
        worst = worst.max(back.joint().max_abs_diff(target.joint()));
    }
    ensure(worst <= 1e-12, format!("round trip error {worst:e}"))?;
    Ok(format!("50 instances, max error {worst:.1e}"))
}

fn a4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for trial in 0..100 {
        let n_omega = rng.gen_range(2..=4);
        let p = random_problem(&mut rng, 2, n_omega, 2, 2, trial % 2 == 0);
        let la = induce_la(&p, &DeterministicProfile::random(&p, &mut rng)).map_err(err)?;
        let lr = induce_lr(&p, &RandomizedProfile::random(&p, &mut rng)).map_err(err)?;
        ensure(check_membership_la(&p, &la).member, format!("trial {trial}: induced L_A measure rejected"))?;
        ensure(check_membership_lr(&p, &lr).member, format!("trial {trial}: induced L_R measure rejected"))?;
        for (kind, m) in [("L_A", &la), ("L_R", &lr)] {
            let i = rng.gen_range(0..m.mass().len());
            let q = m.perturbed(i, 0.01);
            let rejected = if kind == "L_A" {
                !check_membership_la(&p, &q).member
            } else {
                !check_membership_lr(&p, &q).member
            };
            ensure(rejected, format!("trial {trial}: perturbed {kind} measure accepted"))?;
            checked += 1;
        }
    }
    Ok(format!("100 trials, {checked} perturbations rejected"))
}

fn a5() -> Outcome {
    let mut worst = (0usize, 0.0f64);
    for n in [1, 2, 10, 100, 256] {
        let sw = square_wave(n).map_err(err)?;
        ensure(sw.gaps.len() == 20, "expected 20 intervals")?;
        for g in &sw.gaps {
            ensure(g.within_bound, format!("n={n}: gap {:?} exceeds 1/(2n)", g.gap))?;
            let ratio = g.gap.0 as f64 / g.gap.1 as f64 * 2.0 * n as f64;
            if ratio > worst.1 {
                worst = (n, ratio);
            }
        }
        ensure(sw.ci_pn.independent, format!("n={n}: P_n fails conditional independence"))?;
        ensure(!sw.ci_limit.independent, format!("n={n}: limit passes conditional independence"))?;
        ensure(
            sw.limit_conditional == [[1.0, 0.0], [0.0, 1.0]] && sw.limit_marginal == [0.5, 0.5],
            format!("n={n}: limit conditionals {:?} / {:?}", sw.limit_conditional, sw.limit_marginal),
        )?;
    }
    Ok(format!(
        "largest gap·2n = {:.3} (n={}); limit P(u¹=a|y,u²=b) = 1{{a=b}}, P(u¹=a|y) = ½",
        worst.1, worst.0
    ))
}

fn a6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (n_omega, n_y, n_u) = (rng.gen_range(2..=4), rng.gen_range(2..=3), rng.gen_range(2..=3));
        let p = random_problem(&mut rng, 2, n_omega, n_y, n_u, true);
        let r = static_reduce(&p, None).map_err(err)?;
        for i in 0..5 {
            let d = if i % 2 == 0 {
                verify_equivalence(&p, &r, &DeterministicProfile::random(&p, &mut rng))
            } else {
                verify_equivalence(&p, &r, &RandomizedProfile::random(&p, &mut rng))
            };
            worst = worst.max(d.map_err(err)?);
        }
    }
    ensure(worst <= 1e-10, format!("finite teams: {worst:e}"))?;
    let w = witsenhausen(0.2, 5.0, &QuadSpec::default()).map_err(err)?;
    let mut wits: f64 = 0.0;
    let policies = [
        w.quantizer_profile(),
        w.profile(&|x| x, &|y| y),
        w.profile(&|x| 0.5 * x, &|y| 0.3 * y),
        w.profile(&|x| 2.0 * (x / 2.0).round(), &|y| y.clamp(-4.0, 4.0)),
        DeterministicProfile::random(&w.problem, &mut rng),
    ];
    for d in &policies {
        wits = wits.max(verify_equivalence(&w.problem, &w.reduction, d).map_err(err)?);
    }
    ensure(wits <= 1e-10, format!("Witsenhausen: {wits:e}"))?;
    Ok(format!("finite max {worst:.1e}; Witsenhausen max {wits:.1e}"))
}

fn a7() -> Outcome {
    let p = example1(0.01).map_err(err)?;
    let v = certify_team_convexity(&p).map_err(err)?;
    ensure(matches!(v, ConvexityVerdict::Convex { .. }), format!("example1: {}", v.tag()))?;

    let (k, sigma) = (0.2, 5.0);
    let w = witsenhausen(k, sigma, &QuadSpec::default()).map_err(err)?;
    let form = StaticForm::from_reduction(&w.reduction);
    let q = w.quantizer_profile();
    let options = CertifyOptions {
        seeds: vec![q.clone()],
        ..CertifyOptions::default()
    };
    let found = match certify(&form, &options).map_err(err)? {
        ConvexityVerdict::NotConvex {
            witness: Witness::Policy { first, second, lhs, rhs, .. },
        } => {
            let replay = policy_midpoint_test(&form, &first, &second, 0.5).map_err(err)?;
            ensure(replay == (lhs, rhs) && lhs > rhs, "Witsenhausen witness does not replay")?;
            (lhs, rhs)
        }
        other => return Err(format!("Witsenhausen: {}", other.tag())),
    };

    // Quantizer paired with its reflection in every DM: the midpoint plays 0.
    let mirrored = (0..2).fold(q.clone(), |p, t| mirror_dm(&form, &p, t));
    let (lhs, rhs) = policy_midpoint_test(&form, &q, &mirrored, 0.5).map_err(err)?;
    let summary = format!(
        "example1 convex; Witsenhausen witness J(mid) = {:.4} > {:.4}; zero-midpoint pair J(mid) = {lhs:.6}, averaged {rhs:.4}",
        found.0, found.1
    );
    ensure((lhs - k * k * sigma * sigma).abs() <= 1e-9, format!("{summary}; J(mid) ≠ k²σ²"))?;
    ensure(lhs > rhs, format!("{summary}; zero-midpoint pair does not exceed the averaged costs"))?;
    Ok(summary)
}

fn a8() -> Outcome {
    let w = witsenhausen(0.2, 5.0, &QuadSpec::default()).map_err(err)?;
    let r = w.affine_vs_quantizer();
    ensure(
        r.quantizer_beats_affine,
        format!("quantizer {} vs affine {}", r.quantizer_cost, r.affine_cost),
    )?;
    let (k, sigma) = (0.5, 1.0);
    let s = signaling(k, sigma, &QuadSpec::default()).map_err(err)?;
    let (alpha, closed) = signaling_best_affine(k, sigma);
    let alphas: Vec<f64> = (0..=16).map(|i| 0.6 + 0.05 * i as f64).collect();
    let search = s.staircase_minimum(&alphas, &[0.0, 0.25, 0.5, 1.0]).map_err(err)?;
    let tol = 1e-3;
    ensure(
        (search.value - closed).abs() <= tol,
        format!("signaling grid minimum {} vs closed form {closed}", search.value),
    )?;
    Ok(format!(
        "Witsenhausen quantizer {:.4} < affine {:.4} (λ = {:.4}); signaling α* = {alpha:.4}, J = {closed:.5}, grid minimum {:.5} at α = {:.2}, Δ = {} over {} encoders, grid tolerance {tol:e}",
        r.quantizer_cost, r.affine_cost, r.affine_gain, search.value, search.alpha, search.delta, search.evaluated
    ))
}

fn lq_oracle(team: &QuadraticTeam) -> Vec<f64> {
    let n = team.n_dms();
    let np = team.n_params();
    let mut a = DMatrix::<f64>::zeros(np, np);
    let mut b = DVector::<f64>::zeros(np);
    let r = DMatrix::from_fn(n, n, |i, j| team.cost_weights()[i][j]);
    for (omega, w) in team.points().iter().zip(team.weights()) {
        let mut phi = DMatrix::<f64>::zeros(n, np);
        let mut at = 0;
        for i in 0..n {
            phi[(i, at)] = 1.0;
            for (j, c) in team.observed(i).iter().enumerate() {
                phi[(i, at + 1 + j)] = omega[*c];
            }
            at += 1 + team.observed(i).len();
        }
        let target = DVector::from_fn(n, |i, _| team.target()[i].iter().zip(omega).map(|(k, x)| k * x).sum::<f64>());
        a += (phi.transpose() * &r * &phi) * *w;
        b += (phi.transpose() * &r * target) * *w;
    }
    a.lu().solve(&b).expect("nonsingular normal equations").iter().copied().collect()
}

fn a9() -> Outcome {
    let rule = gauss_hermite(8).map_err(err)?;
    let (points, weights) = tensor(&[rule.clone(), rule.clone(), rule]);
    let team = QuadraticTeam::new(
        points,
        weights,
        vec![vec![0, 2], vec![1, 2]],
        vec![vec![1.0, 0.5, -0.3], vec![0.2, -1.0, 0.7]],
        vec![vec![2.0, 0.8], vec![0.8, 1.5]],
    )
    .map_err(err)?;
    let opt = lq_oracle(&team);
    let s = check_stationarity(&team, &opt).map_err(err)?;
    ensure(s.gradient_norm <= 1e-6, format!("gradient norm {:e}", s.gradient_norm))?;
    let samples = sample_affine_params(&team, 1000, 9, 2.0);
    let k = check_krainak_inequality(&team, &opt, &samples).map_err(err)?;
    ensure(k.not_refuted, format!("optimum refuted, min inner product {:e}", k.min_inner_product))?;
    let mut off = opt.clone();
    off[1] += 0.1;
    let kp = check_krainak_inequality(&team, &off, &samples).map_err(err)?;
    ensure(!kp.not_refuted, "perturbed candidate not refuted")?;
    Ok(format!(
        "gradient norm {:.1e}; 1000 samples, min inner product {:.2e}; perturbed min {:.2e}",
        s.gradient_norm, k.min_inner_product, kp.min_inner_product
    ))
}

fn a10() -> Outcome {
    let (p, a) = decoupled_example(false).map_err(err)?;
    let report = is_stochastically_decoupled(&p, &a, 1_000_000).map_err(err)?;
    ensure(report.decoupled, "decoupled example fails the test")?;
    let (_, joint) = brute_force(&p, 1_000_000).map_err(err)?;
    let mut parts = 0.0;
    for s in 0..2 {
        parts += brute_force(&decoupled_subsystem(s).map_err(err)?, 100).map_err(err)?.1;
    }
    ensure((joint - parts).abs() <= 1e-12, format!("J* = {joint} vs Σ J*ᵢ = {parts}"))?;
    let (c, a) = decoupled_example(true).map_err(err)?;
    let coupled = is_stochastically_decoupled(&c, &a, 1_000_000).map_err(err)?;
    ensure(!coupled.decoupled, "coupled variant passes the test")?;
    Ok(format!("J* = {joint:.6} = Σ J*ᵢ; {} CI tests; coupled variant fails", report.tests))
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run("A1", "deterministic optimality", s(60), a1),
        run("A2", "non-convexity of L_R", s(1), a2),
        run("A3", "classical midpoints", s(60), a3),
        run("A4", "membership characterization", s(60), a4),
        run("A5", "square-wave counterexample", s(1), a5),
        run("A6", "static reduction equivalence", s(60), a6),
        run("A7", "convexity certification", s(30), a7),
        run("A8", "affine vs quantizer / signaling", s(120), a8),
        run("A9", "stationarity", s(60), a9),
        run("A10", "decoupling", s(10), a10),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
