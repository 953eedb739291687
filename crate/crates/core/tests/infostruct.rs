use decteam::gallery::{decoupled_example, example1, square_wave, witsenhausen, QuadSpec};
use decteam::infostruct::*;
use decteam::model::{CostTable, DecisionMaker, MeasurementKernel};
use decteam::space::FiniteSpace;
use decteam::strategic::enumerate_profiles;
use decteam::{Error, TeamProblem};

fn small_witsenhausen() -> TeamProblem {
    let quad = QuadSpec {
        x_nodes: 6,
        w_nodes: 6,
        grid_points: 9,
        ..QuadSpec::default()
    };
    witsenhausen(0.2, 1.0, &quad).unwrap().problem
}

/// All partitions of `0..n` as restricted growth strings.
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for label in 0..=next {
            prefix.push(label);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

/// `fine` refines `coarse` when equal fine labels imply equal coarse labels.
fn refines(fine: &[usize], coarse: &[usize]) -> bool {
    (0..fine.len()).all(|i| (0..fine.len()).all(|j| fine[i] != fine[j] || coarse[i] == coarse[j]))
}

#[test]
fn meet_and_join_agree_with_partition_enumeration() {
    let parts = all_partitions(4);
    assert_eq!(parts.len(), 15);
    for p in &parts {
        for q in &parts {
            let coarser: Vec<&Vec<usize>> = parts.iter().filter(|c| refines(p, c) && refines(q, c)).collect();
            let finest = coarser
                .iter()
                .find(|c| coarser.iter().all(|d| refines(c, d)))
                .unwrap();
            let finer: Vec<&Vec<usize>> = parts.iter().filter(|c| refines(c, p) && refines(c, q)).collect();
            let coarsest = finer.iter().find(|c| finer.iter().all(|d| refines(d, c))).unwrap();

            let pp = Partition::from_keys("g", p);
            let qq = Partition::from_keys("g", q);
            assert_eq!(pp.meet(&qq).unwrap(), Partition::from_keys("g", finest));
            assert_eq!(pp.join(&qq).unwrap(), Partition::from_keys("g", coarsest));
        }
    }
}

#[test]
fn four_point_example_and_lattice_laws() {
    let p = Partition::from_blocks("g", 4, &[vec![0], vec![1], vec![2, 3]]).unwrap();
    let q = Partition::from_blocks("g", 4, &[vec![0, 1], vec![2], vec![3]]).unwrap();
    assert_eq!(p.meet(&q).unwrap().blocks(), vec![vec![0, 1], vec![2, 3]]);
    assert_eq!(p.join(&q).unwrap().blocks(), vec![vec![0], vec![1], vec![2], vec![3]]);
    assert_eq!(p.meet(&p).unwrap(), p);
    assert_eq!(p.join(&p).unwrap(), p);
    assert_eq!(p.meet(&q).unwrap(), q.meet(&p).unwrap());
    let trivial = Partition::trivial("g", 4);
    let discrete = Partition::discrete("g", 4);
    assert_eq!(p.meet(&trivial).unwrap(), trivial);
    assert_eq!(p.join(&discrete).unwrap(), discrete);
    assert!(p.join(&q).unwrap().is_finer_than(&p).unwrap());
    assert!(p.is_finer_than(&p.meet(&q).unwrap()).unwrap());
}

#[test]
fn sigma_fields_of_example1_and_extremes() {
    let p = example1(0.5).unwrap();
    let f = sigma_field_of(&p, 0).unwrap();
    assert_eq!(f.blocks(), vec![vec![0], vec![1, 2]]);

    let constant = TeamProblem::new(
        FiniteSpace::indexed("w", 3).unwrap(),
        vec![DecisionMaker::new(
            FiniteSpace::indexed("y", 1).unwrap(),
            FiniteSpace::indexed("u", 2).unwrap(),
        )],
        vec![0.2, 0.3, 0.5],
        vec![MeasurementKernel::new(0, 1, vec![1.0; 3])],
        CostTable::new(vec![0.0; 6]),
    )
    .unwrap();
    assert_eq!(sigma_field_of(&constant, 0).unwrap().n_blocks(), 1);

    let identity = TeamProblem::new(
        FiniteSpace::indexed("w", 3).unwrap(),
        vec![DecisionMaker::new(
            FiniteSpace::indexed("y", 3).unwrap(),
            FiniteSpace::indexed("u", 2).unwrap(),
        )],
        vec![0.2, 0.3, 0.5],
        vec![MeasurementKernel::new(0, 3, vec![1., 0., 0., 0., 1., 0., 0., 0., 1.])],
        CostTable::new(vec![0.0; 6]),
    )
    .unwrap();
    assert_eq!(sigma_field_of(&identity, 0).unwrap(), Partition::discrete("w", 3));

    let (noisy, _) = decoupled_example(false).unwrap();
    assert!(matches!(
        sigma_field_of(&noisy, 0),
        Err(Error::NonDeterministicMeasurement { dm: 0, .. })
    ));
}

/// `ω₀ ∈ 0..4`, `y¹ = ω₀ mod 2`, `U¹ = {0,1,2}`, `y² = (y¹, g(u¹))`.
fn nested(g: fn(usize) -> usize, n_g: usize) -> TeamProblem {
    let y2: Vec<String> = (0..2).flat_map(|a| (0..n_g).map(move |b| format!("({a},{b})"))).collect();
    let dms = vec![
        DecisionMaker::new(FiniteSpace::indexed("y1", 2).unwrap(), FiniteSpace::indexed("u1", 3).unwrap()),
        DecisionMaker::new(FiniteSpace::new("y2", y2).unwrap(), FiniteSpace::indexed("u2", 2).unwrap()),
    ];
    let mut k1 = vec![0.0; 8];
    let mut k2 = vec![0.0; 4 * 3 * 2 * n_g];
    for w in 0..4 {
        k1[w * 2 + w % 2] = 1.0;
        for u in 0..3 {
            k2[(w * 3 + u) * 2 * n_g + (w % 2) * n_g + g(u)] = 1.0;
        }
    }
    let cost = (0..24).map(|i| (i % 5) as f64).collect();
    TeamProblem::new(
        FiniteSpace::indexed("w", 4).unwrap(),
        dms,
        vec![0.25; 4],
        vec![MeasurementKernel::new(0, 2, k1), MeasurementKernel::new(1, 2 * n_g, k2)],
        CostTable::new(cost),
    )
    .unwrap()
}

#[test]
fn affects_edges() {
    assert!(!affects(&example1(0.5).unwrap(), 0, 1).unwrap());
    assert!(affects(&small_witsenhausen(), 0, 1).unwrap());
    // y² = (y¹, 0) whatever u¹ is: rows are duplicated across u¹.
    assert!(!affects(&nested(|_| 0, 1), 0, 1).unwrap());
    assert!(affects(&example1(0.5).unwrap(), 1, 1).is_err());
}

#[test]
fn classification() {
    let single = TeamProblem::new(
        FiniteSpace::indexed("w", 2).unwrap(),
        vec![DecisionMaker::new(FiniteSpace::indexed("y", 2).unwrap(), FiniteSpace::indexed("u", 2).unwrap())],
        vec![0.5, 0.5],
        vec![MeasurementKernel::new(0, 2, vec![1.0, 0.0, 0.0, 1.0])],
        CostTable::new(vec![0.0, 1.0, 1.0, 0.0]),
    )
    .unwrap();
    assert_eq!(classify(&single), IsClass::Classical);
    assert_eq!(classify(&example1(0.5).unwrap()), IsClass::Static);
    assert_eq!(classify(&small_witsenhausen()), IsClass::Nonclassical);

    let full = nested(|u| u, 3);
    assert_eq!(classify(&full), IsClass::Classical);
    assert!(is_partially_nested(&full), "classical implies partially nested");

    let parity = nested(|u| u % 2, 2);
    assert!(is_partially_nested(&parity));
    assert!(!is_classical(&parity));
    assert_eq!(classify(&parity), IsClass::PartiallyNested);
}

#[test]
fn conditional_independence_tests() {
    // Product measure on 2×3×2.
    let px = [0.3, 0.7];
    let py = [0.2, 0.5, 0.3];
    let pz = [0.6, 0.4];
    let mut m = Vec::new();
    for x in px {
        for y in py {
            for z in pz {
                m.push(x * y * z);
            }
        }
    }
    assert!(test_conditional_independence(&m, 2, 3, 2).unwrap().independent);

    let mut xor = vec![0.0; 8];
    for x in 0..2 {
        for z in 0..2 {
            xor[(x * 2 + (x ^ z)) * 2 + z] = 0.25;
        }
    }
    // P(X=0, Z=0 | Y=0) = 1/2 while P(X=0|Y=0) P(Z=0|Y=0) = 1/4.
    let r = test_conditional_independence(&xor, 2, 2, 2).unwrap();
    assert!(!r.independent);
    assert!((r.worst - 0.25).abs() < 1e-15);

    assert!(!square_wave(4).unwrap().ci_limit.independent);
    assert!(test_conditional_independence(&m, 2, 2, 2).is_err());
}

/// Independent check of `x¹ ⊥ (x², z₀, y²) | y¹` by explicit marginal
/// sums over the joint, keyed on the raw ω₀ bits.
fn factorizes(problem: &TeamProblem, profile: &decteam::DeterministicProfile) -> bool {
    let joint = problem.induced_joint(profile).unwrap();
    let dims = joint.dims().to_vec();
    let mut cell = std::collections::HashMap::<(usize, usize, usize), f64>::new();
    let mut digits = vec![0; dims.len()];
    for (i, m) in joint.mass().iter().enumerate() {
        joint.radix().decode(i, &mut digits);
        let w = digits[0];
        let x1 = w >> 2 & 1;
        let rest = (w & 3) * 4 + digits[3];
        let y1 = digits[1] >> 1;
        *cell.entry((x1, y1, rest)).or_default() += m;
    }
    let get = |k: (usize, usize, usize)| cell.get(&k).copied().unwrap_or(0.0);
    for y1 in 0..2 {
        let py: f64 = (0..2).flat_map(|x| (0..16).map(move |r| (x, r))).map(|(x, r)| get((x, y1, r))).sum();
        for x in 0..2 {
            let pxy: f64 = (0..16).map(|r| get((x, y1, r))).sum();
            for r in 0..16 {
                let pyr: f64 = (0..2).map(|x2| get((x2, y1, r))).sum();
                if (get((x, y1, r)) * py - pxy * pyr).abs() > 1e-12 {
                    return false;
                }
            }
        }
    }
    true
}

#[test]
fn decoupling_verdicts() {
    let (p, a) = decoupled_example(false).unwrap();
    let report = is_stochastically_decoupled(&p, &a, 1_000_000).unwrap();
    assert!(report.decoupled);
    assert_eq!(report.tests, 2 * 256);
    for profile in enumerate_profiles(&p, 1_000_000).unwrap() {
        assert!(factorizes(&p, &profile));
    }

    let (c, a) = decoupled_example(true).unwrap();
    let report = is_stochastically_decoupled(&c, &a, 1_000_000).unwrap();
    assert!(!report.decoupled);
    assert!(report.failure.unwrap().2 > 1e-3);

    let mut bad = a.clone();
    bad.shared.pop();
    assert!(matches!(
        is_stochastically_decoupled(&c, &bad, 1_000_000),
        Err(Error::MalformedAnnotation(_))
    ));
}
