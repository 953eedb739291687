use decteam::convexity::*;
use decteam::gallery::example1;
use decteam::gallery::fixtures::random_problem;
use decteam::infostruct::{sigma_field_of, Partition};
use decteam::model::{CostTable, DecisionMaker, MeasurementKernel};
use decteam::space::FiniteSpace;
use decteam::{DeterministicProfile, Error, TeamProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn axis(values: &[f64]) -> FiniteSpace {
    FiniteSpace::numeric("u", values.to_vec()).unwrap()
}

/// Checks every pair of lattice points with a lattice midpoint.
fn oracle_convex(f: &[f64], n: usize) -> bool {
    for a in 0..n * n {
        for b in 0..n * n {
            let (ai, aj, bi, bj) = (a / n, a % n, b / n, b % n);
            if (ai + bi) % 2 == 0 && (aj + bj) % 2 == 0 {
                let m = (ai + bi) / 2 * n + (aj + bj) / 2;
                if f[m] > 0.5 * f[a] + 0.5 * f[b] + 1e-9 {
                    return false;
                }
            }
        }
    }
    true
}

#[test]
fn grid_test_examples() {
    let u = axis(&[-1.0, 0.0, 1.0]);
    assert!(grid_convexity_test(&[3.0, 1.0, -1.0], std::slice::from_ref(&u)).unwrap().convex);
    let v = grid_convexity_test(&[-1.0, 0.0, -1.0], std::slice::from_ref(&u)).unwrap();
    assert!(!v.convex);
    assert_eq!(v.witness, Some((vec![0], vec![2])));
    assert!((v.excess - 1.0).abs() < 1e-15);

    let pts = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let bump: Vec<f64> = pts.iter().map(|x: &f64| (-x * x).exp()).collect();
    assert!(!grid_convexity_test(&bump, &[axis(&pts)]).unwrap().convex);

    let labels = FiniteSpace::indexed("u", 3).unwrap();
    assert!(matches!(
        grid_convexity_test(&[0.0; 3], &[labels]),
        Err(Error::NonNumericActions { dm: 0 })
    ));
}

#[test]
fn grid_test_agrees_with_pair_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 5;
    let u = axis(&[0.0, 0.5, 1.0, 1.5, 2.0]);
    for trial in 0..200 {
        let f: Vec<f64> = (0..n * n)
            .map(|i| {
                let (x, y) = ((i / n) as f64, (i % n) as f64);
                let q = (x - 2.0).powi(2) + 0.5 * (x - 2.0) * (y - 1.0) + (y - 1.0).powi(2);
                q + if trial % 2 == 0 { rng.gen_range(-0.3..0.3) } else { 0.0 }
            })
            .collect();
        let v = grid_convexity_test(&f, &[u.clone(), u.clone()]).unwrap();
        assert_eq!(v.convex, oracle_convex(&f, n), "trial {trial}");
    }
}

#[test]
fn example1_is_convex_although_a_cell_is_not() {
    let p = example1(0.1).unwrap();
    match certify_team_convexity(&p).unwrap() {
        ConvexityVerdict::Convex { certificate } => {
            assert_eq!(certificate.join_blocks, 2);
            assert!((certificate.block_masses[0] - 0.1).abs() < 1e-15);
        }
        other => panic!("expected convex, got {}", other.tag()),
    }
    // Raw cost on the (0.9, 1] cell: √(1+u¹) + √(1+u²) is concave.
    let cells = Partition::discrete(p.omega0().label(), 3);
    let c = conditional_cost(&p, &cells).unwrap();
    let axes = [p.dm(0).u.clone(), p.dm(1).u.clone()];
    assert!(!grid_convexity_test(&c.values[2], &axes).unwrap().convex);
    assert!(grid_convexity_test(&c.values[1], &axes).unwrap().convex);

    // Meet of the two information fields: two cells; quadratic cell is 0 at (2, 2).
    let meet = sigma_field_of(&p, 0).unwrap().meet(&sigma_field_of(&p, 1).unwrap()).unwrap();
    let c = conditional_cost(&p, &meet).unwrap();
    let n_u = p.dm(0).u.len();
    assert_eq!(c.values[0][n_u * n_u - 1], 0.0);
    let trivial = conditional_cost(&p, &Partition::trivial(p.omega0().label(), 3)).unwrap();
    let d = DeterministicProfile::new(vec![vec![3, 3], vec![7, 7]]);
    assert!((trivial.values[0][3 * n_u + 7] - p.expected_cost(&d).unwrap()).abs() < 1e-14);

    assert!(matches!(
        conditional_cost(&p, &Partition::trivial("other", 3)),
        Err(Error::GroundMismatch { .. })
    ));
}

#[test]
fn convex_certificates_hold_on_aligned_policy_pairs() {
    let p = example1(0.1).unwrap();
    let form = StaticForm::from_static_problem(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n_u = p.dm(0).u.len();
    for _ in 0..1000 {
        let a = DeterministicProfile::random(&p, &mut rng);
        // Same parity per entry keeps the midpoint on the lattice.
        let b = DeterministicProfile::new(
            a.maps()
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|u| {
                            let choices: Vec<usize> = (0..n_u).filter(|v| (v + u) % 2 == 0).collect();
                            choices[rng.gen_range(0..choices.len())]
                        })
                        .collect()
                })
                .collect(),
        );
        let (lhs, rhs) = policy_midpoint_test(&form, &a, &b, 0.5).unwrap();
        assert!(lhs <= rhs + 1e-9);
    }
    let a = DeterministicProfile::random(&p, &mut rng);
    let (lhs, rhs) = policy_midpoint_test(&form, &a, &a, 0.5).unwrap();
    assert_eq!(lhs, rhs);
}

/// Single DM observing a fair bit, with a cost concave in `u` when `ω₀ = 1`.
fn concave_single_dm() -> TeamProblem {
    let u = [0.0, 1.0, 2.0];
    let mut cost = Vec::new();
    for w in 0..2 {
        for x in u {
            cost.push(if w == 0 { (x - 1.0) * (x - 1.0) } else { 4.0 - (x - 1.0) * (x - 1.0) });
        }
    }
    TeamProblem::new(
        FiniteSpace::indexed("w", 2).unwrap(),
        vec![DecisionMaker::new(
            FiniteSpace::indexed("y", 2).unwrap(),
            FiniteSpace::numeric("u", u.to_vec()).unwrap(),
        )],
        vec![0.5, 0.5],
        vec![MeasurementKernel::new(0, 2, vec![1.0, 0.0, 0.0, 1.0])],
        CostTable::new(cost),
    )
    .unwrap()
}

#[test]
fn cell_witnesses_replay_as_policy_violations() {
    let p = concave_single_dm();
    let form = StaticForm::from_static_problem(&p).unwrap();
    match certify(&form, &CertifyOptions::default()).unwrap() {
        ConvexityVerdict::NotConvex {
            witness: Witness::Cell { block, a, b, .. },
        } => {
            assert_eq!(block, vec![1]);
            let (lhs, rhs) = replay_cell_witness(&form, &block, &a, &b).unwrap();
            assert!(lhs > rhs + 1e-9);
        }
        other => panic!("unexpected verdict {other:?}"),
    }
}

#[test]
fn constant_cost_is_convex_and_random_certificates_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let base = random_problem(&mut rng, 2, 3, 2, 3, false);
    let dms: Vec<DecisionMaker> = base
        .dms()
        .iter()
        .map(|d| DecisionMaker::new(d.y.clone(), d.u.clone().with_values(vec![0.0, 1.0, 2.0]).unwrap()))
        .collect();
    let constant = TeamProblem::new(
        base.omega0().clone(),
        dms.clone(),
        base.prior().to_vec(),
        vec![base.kernel(0).clone(), base.kernel(1).clone()],
        CostTable::new(vec![2.0; 27]),
    )
    .unwrap();
    assert_eq!(certify_team_convexity(&constant).unwrap().tag(), "convex");

    for _ in 0..30 {
        let cost: Vec<f64> = (0..27).map(|_| rng.gen_range(0.0..5.0)).collect();
        let p = TeamProblem::new(
            base.omega0().clone(),
            dms.clone(),
            base.prior().to_vec(),
            vec![base.kernel(0).clone(), base.kernel(1).clone()],
            CostTable::new(cost),
        )
        .unwrap();
        let form = StaticForm::from_static_problem(&p).unwrap();
        match certify(&form, &CertifyOptions::default()).unwrap() {
            ConvexityVerdict::NotConvex {
                witness: Witness::Policy { first, second, lhs, rhs, .. },
            } => {
                let (l, r) = policy_midpoint_test(&form, &first, &second, 0.5).unwrap();
                assert_eq!((l, r), (lhs, rhs));
                assert!(l > r);
            }
            ConvexityVerdict::NotConvex {
                witness: Witness::Cell { block, a, b, .. },
            } => {
                let (l, r) = replay_cell_witness(&form, &block, &a, &b).unwrap();
                assert!(l > r);
            }
            _ => {}
        }
    }
}
