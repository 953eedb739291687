use decteam::gallery::example1;
use decteam::gallery::fixtures::{binary_signaling, random_problem, two_bit_trivial_y};
use decteam::model::CostTable;
use decteam::quadrature::{gauss_hermite, tensor};
use decteam::solvers::*;
use decteam::strategic::enumerate_profiles;
use decteam::{DeterministicProfile, TeamProblem};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Naive quadruple loop over the two maps of a 2-DM binary problem with
/// binary measurements, evaluating `J` by explicit sums.
fn naive_minimum(p: &TeamProblem) -> f64 {
    let mut best = f64::INFINITY;
    for g1 in 0..4usize {
        for g2 in 0..4usize {
            let d = DeterministicProfile::new(vec![vec![g1 >> 1, g1 & 1], vec![g2 >> 1, g2 & 1]]);
            let mut j = 0.0;
            for w in 0..p.omega0().len() {
                for y1 in 0..2 {
                    let u1 = d.map(0)[y1];
                    for y2 in 0..2 {
                        let u2 = d.map(1)[y2];
                        let m = p.prior()[w]
                            * p.kernel(0).row(w)[y1]
                            * p.kernel(1).row(w * 2 + u1)[y2];
                        j += m * p.cost_at(w, &[u1, u2]);
                    }
                }
            }
            best = best.min(j);
        }
    }
    best
}

#[test]
fn brute_force_matches_naive_loop_and_mixture_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let p = random_problem(&mut rng, 2, 2, 2, 2, true);
        let (_, j) = brute_force(&p, 1000).unwrap();
        assert!((j - naive_minimum(&p)).abs() < 1e-12);
        let lp = mixture_lp(&p, 1000).unwrap();
        assert!((lp.value - j).abs() < 1e-9);
        assert_eq!(lp.weights.len(), 1);
        assert_eq!(enumerate_profiles(&p, 1000).unwrap().len(), 16);
    }
}

#[test]
fn constant_cost_returns_first_profile() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = random_problem(&mut rng, 2, 2, 2, 2, true);
    let c = TeamProblem::new(
        p.omega0().clone(),
        p.dms().to_vec(),
        p.prior().to_vec(),
        vec![p.kernel(0).clone(), p.kernel(1).clone()],
        CostTable::new(vec![3.5; 8]),
    )
    .unwrap();
    let (d, j) = brute_force(&c, 100).unwrap();
    assert_eq!(d, DeterministicProfile::first(&c));
    assert!((j - 3.5).abs() < 1e-12);
}

#[test]
fn example1_optimum_by_separable_scan() {
    let step = 0.05;
    let p = example1(step).unwrap();
    let (d, j) = brute_force(&p, 1_000_000).unwrap();
    let grid: Vec<f64> = (0..=20).map(|i| 1.0 + i as f64 * step).collect();
    // Cell [0,0.1): quadratic only; cells observed as y=0: 0.8 quadratic + 0.1 root.
    let scan = |f: &dyn Fn(f64) -> f64| grid.iter().map(|u| f(*u)).fold(f64::INFINITY, f64::min);
    let informed = scan(&|u| 0.1 * (u - 2.0).powi(2));
    let uninformed = scan(&|u| 0.8 * (u - 2.0).powi(2) + 0.1 * (u + 1.0).sqrt());
    assert!((j - 2.0 * (informed + uninformed)).abs() < 1e-12);
    let u = p.dm(0).u.values().unwrap();
    assert_eq!(u[d.map(0)[1]], 2.0);
    assert_eq!(u[d.map(1)[1]], 2.0);
}

#[test]
fn best_response_on_coordination_cost() {
    let p = two_bit_trivial_y(vec![0.0, 1.0, 1.0, 0.0]);
    let start = DeterministicProfile::new(vec![vec![1], vec![0]]);
    assert_eq!(best_response(&p, &start, 0).unwrap(), vec![0]);
}

#[test]
fn pbp_sweeps() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..50 {
        let p = random_problem(&mut rng, 2, 3, 2, 3, true);
        let init = DeterministicProfile::random(&p, &mut rng);
        let out = pbp_iterate(&p, &init, 50).unwrap();
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        if out.converged {
            assert!(is_person_by_person_optimal(&p, &out.profile).unwrap());
        }
    }
    let p = random_problem(&mut rng, 2, 2, 2, 2, true);
    let (opt, _) = brute_force(&p, 1000).unwrap();
    let out = pbp_iterate(&p, &opt, 5).unwrap();
    assert!(out.converged && out.sweeps == 1 && out.profile == opt);
}

#[test]
fn signaling_team_has_a_strictly_suboptimal_pbp_point() {
    let k = 0.5;
    let p = binary_signaling(k);
    let silent = DeterministicProfile::new(vec![vec![1, 1], vec![1, 1, 1]]);
    let out = pbp_iterate(&p, &silent, 10).unwrap();
    assert!(out.converged);
    assert_eq!(out.profile, silent);
    let j = p.expected_cost(&out.profile).unwrap();
    assert!((j - 1.0).abs() < 1e-12);
    // Best: send 0 for one value of x and ±1 for the other, decode exactly.
    let (_, best) = brute_force(&p, 10_000).unwrap();
    assert!((best - 0.5 * k * k).abs() < 1e-12);
    assert!(j - best > 0.5);
}

/// Static LQ team: ω = (ξ₁, ξ₂, ξ₃) independent standard normals on an
/// 8-node tensor rule; DM 1 observes (ξ₁, ξ₃), DM 2 observes (ξ₂, ξ₃).
fn lq_team() -> QuadraticTeam {
    let rule = gauss_hermite(8).unwrap();
    let (points, weights) = tensor(&[rule.clone(), rule.clone(), rule]);
    QuadraticTeam::new(
        points,
        weights,
        vec![vec![0, 2], vec![1, 2]],
        vec![vec![1.0, 0.5, -0.3], vec![0.2, -1.0, 0.7]],
        vec![vec![2.0, 0.8], vec![0.8, 1.5]],
    )
    .unwrap()
}

/// Solves the normal equations `E[ΦᵀRΦ] θ = E[ΦᵀRKω]` with nalgebra.
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
        let target = DVector::from_fn(n, |i, _| {
            team.target()[i].iter().zip(omega).map(|(k, x)| k * x).sum::<f64>()
        });
        a += (phi.transpose() * &r * &phi) * *w;
        b += (phi.transpose() * &r * target) * *w;
    }
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

#[test]
fn lq_optimum_is_stationary_and_not_refuted() {
    let team = lq_team();
    let opt = lq_oracle(&team);
    let report = check_stationarity(&team, &opt).unwrap();
    assert!(report.gradient_norm <= 1e-6, "{}", report.gradient_norm);
    let samples = sample_affine_params(&team, 1000, 7, 2.0);
    let k = check_krainak_inequality(&team, &opt, &samples).unwrap();
    assert!(k.not_refuted, "{}", k.min_inner_product);

    let mut off = opt.clone();
    off[1] += 0.1;
    assert!(check_stationarity(&team, &off).unwrap().gradient_norm > 1e-3);
    let k = check_krainak_inequality(&team, &off, &samples).unwrap();
    assert!(!k.not_refuted);
    assert!(team.expected_cost(&off).unwrap() > team.expected_cost(&opt).unwrap());

    let same = check_krainak_inequality(&team, &opt, std::slice::from_ref(&opt)).unwrap();
    assert_eq!(same.min_inner_product, 0.0);
}

#[test]
fn zero_cost_has_zero_gradient() {
    let rule = gauss_hermite(4).unwrap();
    let (points, weights) = tensor(&[rule]);
    let team = QuadraticTeam::new(points, weights, vec![vec![0]], vec![vec![0.0]], vec![vec![0.0]]).unwrap();
    let r = check_stationarity(&team, &[0.3, -1.2]).unwrap();
    assert_eq!(r.gradient_norm, 0.0);
    assert_eq!(r.max_conditional_residual, 0.0);
}
