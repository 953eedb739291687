//! Strategic measures: joints on `(ω₀, y¹, u¹, …, yᴺ, uᴺ)` induced by team
//! policies, membership tests for `L_A`, `L_R` and `L_M`, mixtures, and
//! realizations of randomized policies by deterministic ones.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::infostruct::{classify, is_static, IsClass};
use crate::model::{DeterministicProfile, JointTable, RandomizedProfile, TeamProblem};
use crate::space::MixedRadix;
use crate::tolerances::IDENTITY;

/// A joint over `(ω₀, y¹, u¹, …, yᴺ, uᴺ)` for a given problem.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategicMeasure {
    joint: JointTable,
}

impl StrategicMeasure {
    /// Wraps a joint after checking its shape against `problem`.
    pub fn new(problem: &TeamProblem, joint: JointTable) -> Result<Self> {
        if joint.dims() != problem.joint_dims().as_slice() {
            return Err(Error::Dimension(format!(
                "joint axes {:?} do not match problem axes {:?}",
                joint.dims(),
                problem.joint_dims()
            )));
        }
        Ok(Self { joint })
    }

    pub fn joint(&self) -> &JointTable {
        &self.joint
    }

    pub fn mass(&self) -> &[f64] {
        self.joint.mass()
    }

    pub fn into_joint(self) -> JointTable {
        self.joint
    }

    /// Adds `delta` at entry `index` and renormalizes.
    pub fn perturbed(&self, index: usize, delta: f64) -> Self {
        let mut joint = self.joint.clone();
        joint.mass_mut()[index] += delta;
        let total = joint.total();
        joint.mass_mut().iter_mut().for_each(|m| *m /= total);
        Self { joint }
    }
}

pub fn induce_la(problem: &TeamProblem, profile: &DeterministicProfile) -> Result<StrategicMeasure> {
    Ok(StrategicMeasure {
        joint: problem.induced_joint(profile)?,
    })
}

pub fn induce_lr(problem: &TeamProblem, profile: &RandomizedProfile) -> Result<StrategicMeasure> {
    Ok(StrategicMeasure {
        joint: problem.induced_joint(profile)?,
    })
}

/// Entrywise convex combination.
pub fn mix(measures: &[StrategicMeasure], weights: &[f64]) -> Result<StrategicMeasure> {
    if measures.is_empty() || measures.len() != weights.len() {
        return Err(Error::Dimension(format!(
            "{} measures with {} weights",
            measures.len(),
            weights.len()
        )));
    }
    crate::space::Pmf::new(weights.to_vec())?;
    let dims = measures[0].joint.dims().to_vec();
    if measures.iter().any(|m| m.joint.dims() != dims.as_slice()) {
        return Err(Error::Dimension("measures belong to different problems".into()));
    }
    let mut mass = vec![0.0; measures[0].joint.mass().len()];
    for (m, w) in measures.iter().zip(weights) {
        for (acc, x) in mass.iter_mut().zip(m.joint.mass()) {
            *acc += w * x;
        }
    }
    Ok(StrategicMeasure {
        joint: JointTable::from_mass(dims, mass)?,
    })
}

/// Which characterization equality failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// The measure is not normalized or its `ω₀` marginal is not the prior.
    PriorMarginal,
    /// `P(yⁿ | hₙ₋₁) ≠ pₙ(yⁿ | ω₀, u¹, …, uⁿ⁻¹)`.
    Measurement,
    /// `P(uⁿ | hₙ₋₁, yⁿ)` depends on more than `yⁿ`.
    ActionDependence,
    /// `P(uⁿ | yⁿ)` is not a point mass.
    NotDeterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipFailure {
    /// `None` for prior-marginal failures.
    pub dm: Option<usize>,
    pub condition: Condition,
    /// Offending history, rendered with point labels.
    pub at: String,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub member: bool,
    pub failures: Vec<MembershipFailure>,
}

impl MembershipVerdict {
    fn from_failures(failures: Vec<MembershipFailure>) -> Self {
        Self {
            member: failures.is_empty(),
            failures,
        }
    }

    pub fn failed(&self, condition: Condition) -> bool {
        self.failures.iter().any(|f| f.condition == condition)
    }
}

fn render_prefix(problem: &TeamProblem, digits: &[usize]) -> String {
    let mut parts = vec![format!(
        "{}={}",
        problem.omega0().label(),
        problem.omega0().point(digits[0])
    )];
    for (a, d) in digits.iter().enumerate().skip(1) {
        let k = (a - 1) / 2;
        let dm = problem.dm(k);
        if a % 2 == 1 {
            parts.push(format!("y{}={}", k + 1, dm.y.point(*d)));
        } else {
            parts.push(format!("u{}={}", k + 1, dm.u.point(*d)));
        }
    }
    parts.join(", ")
}

fn prior_failures(problem: &TeamProblem, m: &StrategicMeasure) -> Vec<MembershipFailure> {
    let marginal = m.joint.marginal_prefix(1);
    let mut worst = (0.0, 0);
    for (w, (a, b)) in marginal.iter().zip(problem.prior()).enumerate() {
        let gap = (a - b).abs();
        if gap > worst.0 {
            worst = (gap, w);
        }
    }
    if worst.0 > IDENTITY {
        vec![MembershipFailure {
            dm: None,
            condition: Condition::PriorMarginal,
            at: format!(
                "{}={}",
                problem.omega0().label(),
                problem.omega0().point(worst.1)
            ),
            gap: worst.0,
        }]
    } else {
        Vec::new()
    }
}

/// Conditionals `P(uⁿ | yⁿ)` for DM `n` computed from the marginal on
/// `(yⁿ, uⁿ)`; rows with zero mass are `None`.
fn action_given_measurement(m: &StrategicMeasure, n: usize) -> Vec<Option<Vec<f64>>> {
    let (radix, pm) = m.joint.marginal(&[1 + 2 * n, 2 + 2 * n]);
    let n_u = radix.dims()[1];
    pm.chunks(n_u)
        .map(|row| {
            let s: f64 = row.iter().sum();
            (s > 0.0).then(|| row.iter().map(|x| x / s).collect())
        })
        .collect()
}

/// Tests the two characterization equalities for every DM, on positive-mass
/// histories only, together with the prior marginal.
pub fn check_membership_lr(problem: &TeamProblem, m: &StrategicMeasure) -> MembershipVerdict {
    let mut failures = prior_failures(problem, m);
    let dims = m.joint.dims().to_vec();
    for n in 0..problem.n_dms() {
        let prev_axes = 1 + 2 * n;
        let prev = m.joint.marginal_prefix(prev_axes);
        let with_y = m.joint.marginal_prefix(prev_axes + 1);
        let with_u = m.joint.marginal_prefix(prev_axes + 2);
        let n_y = dims[prev_axes];
        let n_u = dims[prev_axes + 1];
        let prev_radix = MixedRadix::new(dims[..prev_axes].to_vec());
        let pi = action_given_measurement(m, n);
        let kernel = problem.kernel(n);
        let mut digits = vec![0; prev_axes];
        let mut us = vec![0; problem.n_dms()];
        let mut worst_a: Option<(f64, String)> = None;
        let mut worst_b: Option<(f64, String)> = None;
        for (h, &ph) in prev.iter().enumerate() {
            if ph <= 0.0 {
                continue;
            }
            prev_radix.decode(h, &mut digits);
            for k in 0..n {
                us[k] = digits[2 + 2 * k];
            }
            let row = kernel.row(problem.history_index(n, digits[0], &us));
            for y in 0..n_y {
                let py = with_y[h * n_y + y];
                let gap = (py / ph - row[y]).abs();
                if gap > IDENTITY && worst_a.as_ref().is_none_or(|w| gap > w.0) {
                    worst_a = Some((gap, format!(
                        "{}, y{}={}",
                        render_prefix(problem, &digits),
                        n + 1,
                        problem.dm(n).y.point(y)
                    )));
                }
                if py <= 0.0 {
                    continue;
                }
                let Some(reference) = &pi[y] else { continue };
                for u in 0..n_u {
                    let pu = with_u[(h * n_y + y) * n_u + u] / py;
                    let gap = (pu - reference[u]).abs();
                    if gap > IDENTITY && worst_b.as_ref().is_none_or(|w| gap > w.0) {
                        worst_b = Some((gap, format!(
                            "{}, y{}={}, u{}={}",
                            render_prefix(problem, &digits),
                            n + 1,
                            problem.dm(n).y.point(y),
                            n + 1,
                            problem.dm(n).u.point(u)
                        )));
                    }
                }
            }
        }
        if let Some((gap, at)) = worst_a {
            failures.push(MembershipFailure {
                dm: Some(n),
                condition: Condition::Measurement,
                at,
                gap,
            });
        }
        if let Some((gap, at)) = worst_b {
            failures.push(MembershipFailure {
                dm: Some(n),
                condition: Condition::ActionDependence,
                at,
                gap,
            });
        }
    }
    MembershipVerdict::from_failures(failures)
}

/// `L_R` membership plus point-mass conditionals `P(uⁿ | yⁿ)`.
pub fn check_membership_la(problem: &TeamProblem, m: &StrategicMeasure) -> MembershipVerdict {
    let mut verdict = check_membership_lr(problem, m);
    for n in 0..problem.n_dms() {
        for (y, row) in action_given_measurement(m, n).iter().enumerate() {
            let Some(row) = row else { continue };
            let gap = row.iter().map(|p| p.min(1.0 - p)).fold(0.0, f64::max);
            if gap > IDENTITY {
                verdict.failures.push(MembershipFailure {
                    dm: Some(n),
                    condition: Condition::NotDeterministic,
                    at: format!("y{}={}", n + 1, problem.dm(n).y.point(y)),
                    gap,
                });
                break;
            }
        }
    }
    verdict.member = verdict.failures.is_empty();
    verdict
}

/// `L_M` membership for static problems: the `(ω₀, y)` marginal is the one
/// fixed by the prior and kernels, and `P(uⁱ | y¹, …, yᴺ) = P(uⁱ | yⁱ)`.
pub fn check_membership_lm(problem: &TeamProblem, m: &StrategicMeasure) -> Result<bool> {
    if !is_static(problem) {
        return Err(Error::NotStatic);
    }
    let n = problem.n_dms();
    let mut axes = vec![0];
    axes.extend((0..n).map(|k| 1 + 2 * k));
    let (radix, exo) = m.joint.marginal(&axes);
    let mut digits = vec![0; radix.dims().len()];
    let zeros = vec![0; n];
    for (i, &p) in exo.iter().enumerate() {
        radix.decode(i, &mut digits);
        let w = digits[0];
        let mut expect = problem.prior()[w];
        for k in 0..n {
            expect *= problem.kernel(k).row(problem.history_index(k, w, &zeros))[digits[1 + k]];
        }
        if (p - expect).abs() > IDENTITY {
            return Ok(false);
        }
    }
    for i in 0..n {
        let pi = action_given_measurement(m, i);
        let mut axes: Vec<usize> = (0..n).map(|k| 1 + 2 * k).collect();
        axes.push(2 + 2 * i);
        let (radix, table) = m.joint.marginal(&axes);
        let n_u = problem.dm(i).u.len();
        let mut digits = vec![0; axes.len()];
        for (j, row) in table.chunks(n_u).enumerate() {
            let s: f64 = row.iter().sum();
            if s <= 0.0 {
                continue;
            }
            radix.decode(j * n_u, &mut digits);
            let reference = pi[digits[i]].as_ref().expect("positive mass");
            if row.iter().zip(reference).any(|(x, r)| (x / s - r).abs() > IDENTITY) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The `index`-th deterministic profile in lexicographic order of the
/// concatenated maps (DM 1's first measurement most significant).
pub fn profile_at(problem: &TeamProblem, mut index: u128) -> DeterministicProfile {
    let mut maps: Vec<Vec<usize>> = problem.dms().iter().map(|d| vec![0; d.y.len()]).collect();
    for k in (0..problem.n_dms()).rev() {
        let n_u = problem.dm(k).u.len() as u128;
        for y in (0..maps[k].len()).rev() {
            maps[k][y] = (index % n_u) as usize;
            index /= n_u;
        }
    }
    DeterministicProfile::new(maps)
}

/// Rank of `profile` in the order of [`profile_at`].
pub fn profile_rank(problem: &TeamProblem, profile: &DeterministicProfile) -> u128 {
    let mut index: u128 = 0;
    for (k, map) in profile.maps().iter().enumerate() {
        let n_u = problem.dm(k).u.len() as u128;
        for &u in map {
            index = index * n_u + u as u128;
        }
    }
    index
}

fn checked_count(problem: &TeamProblem, cap: u128) -> Result<u128> {
    let count = problem.profile_count();
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    Ok(count)
}

/// All deterministic profiles in lexicographic order.
pub fn enumerate_profiles(problem: &TeamProblem, cap: u128) -> Result<Vec<DeterministicProfile>> {
    let count = checked_count(problem, cap)?;
    Ok((0..count).map(|i| profile_at(problem, i)).collect())
}

/// One `L_A` measure per deterministic profile, in lexicographic order.
pub fn enumerate_la(problem: &TeamProblem, cap: u128) -> Result<Vec<StrategicMeasure>> {
    let count = checked_count(problem, cap)?;
    (0..count)
        .into_par_iter()
        .map(|i| induce_la(problem, &profile_at(problem, i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonconvexityWitness {
    /// Lexicographic ranks of the two profiles.
    pub first: u128,
    pub second: u128,
    pub first_profile: DeterministicProfile,
    pub second_profile: DeterministicProfile,
    pub lambda: f64,
    pub verdict: MembershipVerdict,
}

/// First pair `(i < j)` of `L_A` measures, in lexicographic order, whose
/// midpoint is not in `L_R`.
pub fn find_nonconvexity_witness(problem: &TeamProblem, cap: u128) -> Result<Option<NonconvexityWitness>> {
    let measures = enumerate_la(problem, cap)?;
    let found = (0..measures.len()).into_par_iter().find_map_first(|i| {
        (i + 1..measures.len()).find_map(|j| {
            if measures[i] == measures[j] {
                return None;
            }
            let mid = mix(&[measures[i].clone(), measures[j].clone()], &[0.5, 0.5]).ok()?;
            let verdict = check_membership_lr(problem, &mid);
            (!verdict.member).then_some((i, j, verdict))
        })
    });
    Ok(found.map(|(i, j, verdict)| NonconvexityWitness {
        first: i as u128,
        second: j as u128,
        first_profile: profile_at(problem, i as u128),
        second_profile: profile_at(problem, j as u128),
        lambda: 0.5,
        verdict,
    }))
}

/// Builds the randomized profile of `λ·P1 + (1−λ)·P2` by conditioning the
/// mixture on each DM's measurement. Under a classical structure each
/// measurement determines every earlier measurement and action, so this
/// conditional is also the one given the full observed history.
pub fn realize_midpoint_classical(
    problem: &TeamProblem,
    p1: &StrategicMeasure,
    p2: &StrategicMeasure,
    lambda: f64,
) -> Result<RandomizedProfile> {
    let class = classify(problem);
    if class != IsClass::Classical {
        return Err(Error::NotClassical(class));
    }
    for (name, p) in [("first", p1), ("second", p2)] {
        let v = check_membership_lr(problem, p);
        if !v.member {
            let f = &v.failures[0];
            return Err(Error::NonMember(format!(
                "{name} measure fails {:?} at {}",
                f.condition, f.at
            )));
        }
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Dimension(format!("weight {lambda} outside [0, 1]")));
    }
    let mixed = mix(&[p1.clone(), p2.clone()], &[lambda, 1.0 - lambda])?;
    let kernels = (0..problem.n_dms())
        .map(|n| {
            let n_u = problem.dm(n).u.len();
            action_given_measurement(&mixed, n)
                .into_iter()
                .map(|row| row.unwrap_or_else(|| crate::space::Pmf::point(n_u, 0).into_vec()))
                .collect()
        })
        .collect();
    Ok(RandomizedProfile::new(kernels))
}

/// Inverse-CDF realization of a pmf by a uniform variable on `[0, 1)`:
/// action `j` is taken on `[F(j−1), F(j))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdMap {
    cuts: Vec<f64>,
}

impl ThresholdMap {
    pub fn new(pmf: &[f64]) -> Self {
        let mut cuts = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for p in pmf {
            acc += p;
            cuts.push(acc);
        }
        if let Some(last) = cuts.last_mut() {
            *last = 1.0;
        }
        Self { cuts }
    }

    /// Upper ends `F(0), …, F(|U|−1)`.
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn interval(&self, u: usize) -> (f64, f64) {
        let lo = if u == 0 { 0.0 } else { self.cuts[u - 1] };
        (lo, self.cuts[u])
    }

    pub fn action(&self, r: f64) -> usize {
        self.cuts
            .iter()
            .position(|&c| r < c)
            .unwrap_or(self.cuts.len() - 1)
    }
}

pub fn realize_kernel_as_function(pmf: &[f64]) -> ThresholdMap {
    ThresholdMap::new(pmf)
}

/// Writes a randomized profile as a finite mixture of deterministic
/// profiles: one uniform variable per DM drives the inverse-CDF maps of all
/// its rows, so the cells between consecutive cut points are the pieces.
pub fn decompose_randomized(
    problem: &TeamProblem,
    profile: &RandomizedProfile,
    cap: u128,
) -> Result<Vec<(DeterministicProfile, f64)>> {
    use crate::model::Strategy;
    profile.check(problem)?;
    let mut per_dm: Vec<Vec<(Vec<usize>, f64)>> = Vec::new();
    let mut count: u128 = 1;
    for k in 0..problem.n_dms() {
        let maps: Vec<ThresholdMap> = profile.kernels()[k].iter().map(|r| ThresholdMap::new(r)).collect();
        let mut cuts: Vec<f64> = maps.iter().flat_map(|m| m.cuts().iter().cloned()).collect();
        cuts.push(0.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let pieces: Vec<(Vec<usize>, f64)> = cuts
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (maps.iter().map(|m| m.action(mid)).collect(), w[1] - w[0])
            })
            .collect();
        count = count.saturating_mul(pieces.len() as u128);
        per_dm.push(pieces);
    }
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let mut out = vec![(Vec::<Vec<usize>>::new(), 1.0)];
    for pieces in per_dm {
        out = out
            .into_iter()
            .flat_map(|(maps, w)| {
                pieces.iter().map(move |(m, pw)| {
                    let mut maps = maps.clone();
                    maps.push(m.clone());
                    (maps, w * pw)
                })
            })
            .collect();
    }
    Ok(out
        .into_iter()
        .map(|(maps, w)| (DeterministicProfile::new(maps), w))
        .collect())
}
