//! Convexity of team problems through conditional costs on the meet and
//! join of the DMs' information partitions, lattice midpoint tests, and
//! policy midpoint comparisons.
//!
//! Certification works on a [`StaticForm`]: exogenous points `e = (ω₀, y)`
//! with positive mass, each DM's measurement as a label of `e`, and a cost
//! `c(e, u)`. A static problem gives one directly; a static reduction gives
//! one with the reduced cost.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::infostruct::{is_static, Partition};
use crate::model::{DeterministicProfile, TeamProblem};
use crate::reduction::StaticReduction;
use crate::space::{FiniteSpace, MixedRadix};
use crate::tolerances::MIDPOINT_CONVEXITY;

/// Conditional expected cost `c̄(B, u)` per positive-mass block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalCost {
    /// Block ids (canonical order) with positive mass.
    pub blocks: Vec<usize>,
    pub masses: Vec<f64>,
    /// `values[b][a]`, `a` the row-major joint action index.
    pub values: Vec<Vec<f64>>,
}

/// `c̄(B, u) = Σ_{ω₀∈B} μ(ω₀) c(ω₀, u) / μ(B)` for a partition of `Ω₀`.
pub fn conditional_cost(problem: &TeamProblem, partition: &Partition) -> Result<ConditionalCost> {
    let n0 = problem.omega0().len();
    if partition.ground() != problem.omega0().label() || partition.ground_len() != n0 {
        return Err(Error::GroundMismatch {
            left: format!("{} ({} points)", partition.ground(), partition.ground_len()),
            right: format!("{} ({} points)", problem.omega0().label(), n0),
        });
    }
    let actions = problem.cost().values().len() / n0;
    let mut sums = vec![vec![0.0; actions]; partition.n_blocks()];
    let mut masses = vec![0.0; partition.n_blocks()];
    for w in 0..n0 {
        let p = problem.prior()[w];
        if p == 0.0 {
            continue;
        }
        let b = partition.block_of(w);
        masses[b] += p;
        let row = &problem.cost().values()[w * actions..(w + 1) * actions];
        for (acc, c) in sums[b].iter_mut().zip(row) {
            *acc += p * c;
        }
    }
    let mut out = ConditionalCost {
        blocks: Vec::new(),
        masses: Vec::new(),
        values: Vec::new(),
    };
    for (b, (m, s)) in masses.into_iter().zip(sums).enumerate() {
        if m > 0.0 {
            out.blocks.push(b);
            out.masses.push(m);
            out.values.push(s.into_iter().map(|x| x / m).collect());
        }
    }
    Ok(out)
}

/// Outcome of a lattice midpoint test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridVerdict {
    pub convex: bool,
    /// Lattice points `(a, b)` (one index per axis) whose midpoint violates
    /// the inequality.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    /// `f(mid) − ½f(a) − ½f(b)` at the witness.
    pub excess: f64,
    /// Every tested pair also satisfies the inequality with margin
    /// `1e-9 × |b − a|²`. Informational only.
    pub strictly_convex: bool,
}

fn steps(axes: &[FiniteSpace]) -> Result<Vec<f64>> {
    axes.iter()
        .enumerate()
        .map(|(i, a)| a.uniform_step().ok_or(Error::NonNumericActions { dm: i }))
        .collect()
}

/// Midpoint convexity of `f` on the product lattice of `axes`: every pair of
/// points whose midpoint is a lattice point satisfies
/// `f(mid) ≤ ½f(a) + ½f(b) + 1e-9`. Nearest-neighbour pairs are tried
/// first so that typical violations surface quickly.
pub fn grid_convexity_test(f: &[f64], axes: &[FiniteSpace]) -> Result<GridVerdict> {
    let mut strict = true;
    for local in [true, false] {
        let v = grid_pass(f, axes, local, &mut strict)?;
        if !v.convex {
            return Ok(v);
        }
    }
    Ok(GridVerdict {
        convex: true,
        witness: None,
        excess: 0.0,
        strictly_convex: strict,
    })
}

/// One pass of the midpoint test: nearest-neighbour pairs only
/// (`local`), or all remaining pairs.
fn grid_pass(f: &[f64], axes: &[FiniteSpace], local: bool, strict: &mut bool) -> Result<GridVerdict> {
    let steps = steps(axes)?;
    let radix = MixedRadix::new(axes.iter().map(|a| a.len()).collect());
    if radix.size() != f.len() {
        return Err(Error::Dimension(format!(
            "table has {} entries for a lattice of {}",
            f.len(),
            radix.size()
        )));
    }
    if let Some((m, d, excess)) = midpoint_scan(f, &radix, &steps, local, strict) {
        let a = m.iter().zip(&d).map(|(x, y)| (*x as i64 - y) as usize).collect();
        let b = m.iter().zip(&d).map(|(x, y)| (*x as i64 + y) as usize).collect();
        *strict = false;
        return Ok(GridVerdict {
            convex: false,
            witness: Some((a, b)),
            excess,
            strictly_convex: false,
        });
    }
    Ok(GridVerdict {
        convex: true,
        witness: None,
        excess: 0.0,
        strictly_convex: *strict,
    })
}

/// Scans midpoints `m` and half-differences `d` (first nonzero component
/// positive). The local pass covers `|d|∞ = 1`, the full pass the rest.
fn midpoint_scan(
    f: &[f64],
    radix: &MixedRadix,
    steps: &[f64],
    local: bool,
    strict: &mut bool,
) -> Option<(Vec<usize>, Vec<i64>, f64)> {
    let dims = radix.dims();
    let k = dims.len();
    let mut m = vec![0; k];
    let mut lim = vec![0i64; k];
    let mut d = vec![0i64; k];
    for mi in 0..radix.size() {
        radix.decode(mi, &mut m);
        for i in 0..k {
            let r = m[i].min(dims[i] - 1 - m[i]) as i64;
            lim[i] = if local { r.min(1) } else { r };
        }
        for (di, l) in d.iter_mut().zip(&lim) {
            *di = -l;
        }
        loop {
            let first_nonzero = d.iter().find(|x| **x != 0);
            let inf = d.iter().map(|x| x.abs()).max().unwrap_or(0);
            if matches!(first_nonzero, Some(x) if *x > 0) && (local || inf > 1) {
                let off: i64 = d.iter().enumerate().map(|(i, x)| x * radix.stride(i) as i64).sum();
                let fa = f[(mi as i64 - off) as usize];
                let fb = f[(mi as i64 + off) as usize];
                let excess = f[mi] - 0.5 * fa - 0.5 * fb;
                if excess > MIDPOINT_CONVEXITY {
                    return Some((m.clone(), d.clone(), excess));
                }
                if *strict {
                    let dist2: f64 = d
                        .iter()
                        .zip(steps)
                        .map(|(x, s)| (2.0 * *x as f64 * s).powi(2))
                        .sum();
                    if excess > -MIDPOINT_CONVEXITY * dist2 {
                        *strict = false;
                    }
                }
            }
            let mut done = true;
            for i in (0..k).rev() {
                if d[i] < lim[i] {
                    d[i] += 1;
                    done = false;
                    break;
                }
                d[i] = -lim[i];
            }
            if done {
                break;
            }
        }
    }
    None
}

enum CostSource {
    Problem(TeamProblem),
    Reduction(Box<StaticReduction>),
}

/// Static view used by the certifier.
pub struct StaticForm {
    omega0: Vec<usize>,
    ys: Vec<Vec<usize>>,
    mass: Vec<f64>,
    actions: Vec<FiniteSpace>,
    n_y: Vec<usize>,
    source: CostSource,
}

impl StaticForm {
    /// Exogenous points `(ω₀, y)` with mass `μ(ω₀) Π p_t(yᵗ | ω₀)`.
    pub fn from_static_problem(problem: &TeamProblem) -> Result<Self> {
        if !is_static(problem) {
            return Err(Error::NotStatic);
        }
        let n = problem.n_dms();
        let zeros = vec![0; n];
        let mut omega0 = Vec::new();
        let mut ys = Vec::new();
        let mut mass = Vec::new();
        for (w, &p) in problem.prior().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut stack = vec![(Vec::new(), p)];
            for t in 0..n {
                let row = problem.kernel(t).row(problem.history_index(t, w, &zeros));
                stack = stack
                    .into_iter()
                    .flat_map(|(y, m)| {
                        row.iter().enumerate().filter(|(_, q)| **q > 0.0).map(move |(yt, q)| {
                            let mut y = y.clone();
                            y.push(yt);
                            (y, m * q)
                        })
                    })
                    .collect();
            }
            for (y, m) in stack {
                omega0.push(w);
                ys.push(y);
                mass.push(m);
            }
        }
        Ok(Self {
            omega0,
            ys,
            mass,
            actions: problem.dms().iter().map(|d| d.u.clone()).collect(),
            n_y: problem.dms().iter().map(|d| d.y.len()).collect(),
            source: CostSource::Problem(problem.clone()),
        })
    }

    pub fn from_reduction(reduction: &StaticReduction) -> Self {
        let p = reduction.original();
        let exo = reduction.exo_points();
        Self {
            omega0: exo.iter().map(|e| e.0).collect(),
            ys: exo.iter().map(|e| e.1.clone()).collect(),
            mass: exo.iter().map(|e| e.2).collect(),
            actions: p.dms().iter().map(|d| d.u.clone()).collect(),
            n_y: p.dms().iter().map(|d| d.y.len()).collect(),
            source: CostSource::Reduction(Box::new(reduction.clone())),
        }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn n_dms(&self) -> usize {
        self.actions.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn measurement(&self, e: usize, t: usize) -> usize {
        self.ys[e][t]
    }

    pub fn actions(&self) -> &[FiniteSpace] {
        &self.actions
    }

    pub fn cost(&self, e: usize, us: &[usize]) -> f64 {
        match &self.source {
            CostSource::Problem(p) => p.cost_at(self.omega0[e], us),
            CostSource::Reduction(r) => r.reduced_cost(self.omega0[e], &self.ys[e], us),
        }
    }

    /// Partition of the exogenous points by DM `t`'s measurement.
    pub fn partition_of(&self, t: usize) -> Partition {
        let keys: Vec<usize> = self.ys.iter().map(|y| y[t]).collect();
        Partition::from_keys("exo", &keys)
    }

    pub fn meet(&self) -> Partition {
        (1..self.n_dms()).fold(self.partition_of(0), |acc, t| {
            acc.meet(&self.partition_of(t)).expect("same ground")
        })
    }

    pub fn join(&self) -> Partition {
        (1..self.n_dms()).fold(self.partition_of(0), |acc, t| {
            acc.join(&self.partition_of(t)).expect("same ground")
        })
    }

    fn action_radix(&self) -> MixedRadix {
        MixedRadix::new(self.actions.iter().map(|a| a.len()).collect())
    }

    /// `c̄(B, ·)` over the joint action lattice for one block of exogenous
    /// points.
    pub fn block_table(&self, block: &[usize]) -> (f64, Vec<f64>) {
        let radix = self.action_radix();
        let all_us: Vec<Vec<usize>> = (0..radix.size()).map(|a| radix.digits(a)).collect();
        let m: f64 = block.iter().map(|e| self.mass[*e]).sum();
        let table = all_us
            .par_iter()
            .map(|us| block.iter().map(|&e| self.mass[e] * self.cost(e, us)).sum::<f64>() / m)
            .collect();
        (m, table)
    }

    /// `J(γ) = Σ_e mass(e) c(e, γ(y(e)))`.
    pub fn expected_cost(&self, profile: &DeterministicProfile) -> Result<f64> {
        if profile.maps().len() != self.n_dms()
            || profile.maps().iter().zip(&self.n_y).any(|(m, n)| m.len() != *n)
        {
            return Err(Error::Dimension("profile does not fit the problem".into()));
        }
        let n = self.n_dms();
        let mut us = vec![0; n];
        let mut total = 0.0;
        for e in 0..self.len() {
            for t in 0..n {
                us[t] = profile.map(t)[self.ys[e][t]];
            }
            total += self.mass[e] * self.cost(e, &us);
        }
        Ok(total)
    }
}

/// Both sides of `J(λγa + (1−λ)γb) ≤ λJ(γa) + (1−λ)J(γb)` for
/// deterministic profiles. Averaged actions that fall between grid points
/// are snapped to the nearest one (lower on ties), so the left side is exact
/// only for lattice-aligned pairs.
pub fn policy_midpoint_test(
    form: &StaticForm,
    a: &DeterministicProfile,
    b: &DeterministicProfile,
    lambda: f64,
) -> Result<(f64, f64)> {
    steps(form.actions())?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Dimension(format!("λ = {lambda} lies outside [0, 1]")));
    }
    let ja = form.expected_cost(a)?;
    let jb = form.expected_cost(b)?;
    let mid = averaged_profile(form, a, b, lambda);
    Ok((form.expected_cost(&mid)?, lambda * ja + (1.0 - lambda) * jb))
}

fn averaged_profile(
    form: &StaticForm,
    a: &DeterministicProfile,
    b: &DeterministicProfile,
    lambda: f64,
) -> DeterministicProfile {
    let maps = form
        .actions()
        .iter()
        .enumerate()
        .map(|(t, space)| {
            let v = space.values().expect("checked numeric");
            a.map(t)
                .iter()
                .zip(b.map(t))
                .map(|(x, y)| space.nearest(lambda * v[*x] + (1.0 - lambda) * v[*y]).expect("numeric"))
                .collect()
        })
        .collect();
    DeterministicProfile::new(maps)
}

/// Midpoint of two profiles when every averaged action is a lattice point.
fn midpoint_profile(a: &DeterministicProfile, b: &DeterministicProfile) -> Option<DeterministicProfile> {
    let maps = a
        .maps()
        .iter()
        .zip(b.maps())
        .map(|(ma, mb)| {
            ma.iter()
                .zip(mb)
                .map(|(x, y)| ((x + y) % 2 == 0).then_some((x + y) / 2))
                .collect::<Option<Vec<usize>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some(DeterministicProfile::new(maps))
}

/// `profile` with DM `t`'s actions reflected through the lattice center.
pub fn mirror_dm(form: &StaticForm, profile: &DeterministicProfile, t: usize) -> DeterministicProfile {
    let n_u = form.actions()[t].len();
    let mut out = profile.clone();
    out.set_map(t, profile.map(t).iter().map(|u| n_u - 1 - u).collect());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A meet cell on which the conditional cost fails the midpoint test.
    Cell {
        block: Vec<usize>,
        a: Vec<usize>,
        b: Vec<usize>,
        lambda: f64,
        excess: f64,
    },
    /// Two team policies whose averaged policy costs more than the average.
    Policy {
        first: DeterministicProfile,
        second: DeterministicProfile,
        lambda: f64,
        lhs: f64,
        rhs: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub join_blocks: usize,
    pub block_masses: Vec<f64>,
    /// Join-conditional cost tables, one per block.
    pub tables: Vec<Vec<f64>>,
    pub strictly_convex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ConvexityVerdict {
    Convex { certificate: Certificate },
    NotConvex { witness: Witness },
    Inconclusive { reason: String },
}

impl ConvexityVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            ConvexityVerdict::Convex { .. } => "convex",
            ConvexityVerdict::NotConvex { .. } => "not_convex",
            ConvexityVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Search budget for the policy-pair stage.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    /// Profiles paired with their mirror images (all DMs reflected, then one
    /// DM at a time).
    pub seeds: Vec<DeterministicProfile>,
    /// Exhaustive pair search runs when the profile count is at most this.
    pub exhaustive_cap: u128,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            seeds: Vec::new(),
            exhaustive_cap: 2_000,
        }
    }
}

/// Join blocks all convex ⇒ `Convex`; some meet block not convex ⇒
/// `NotConvex` (cell witness); otherwise a search over policy pairs may
/// still produce a `NotConvex` policy witness; else `Inconclusive`.
pub fn certify(form: &StaticForm, options: &CertifyOptions) -> Result<ConvexityVerdict> {
    steps(form.actions())?;
    let join = form.join();
    let join_blocks = join.blocks();
    if first_nonconvex(form, &join_blocks)?.is_none() {
        let mut masses = Vec::new();
        let mut tables = Vec::new();
        let mut strict = true;
        for block in &join_blocks {
            let (m, table) = form.block_table(block);
            strict &= grid_convexity_test(&table, form.actions())?.strictly_convex;
            masses.push(m);
            tables.push(table);
        }
        return Ok(ConvexityVerdict::Convex {
            certificate: Certificate {
                join_blocks: join.n_blocks(),
                block_masses: masses,
                tables,
                strictly_convex: strict,
            },
        });
    }
    let meet_blocks = form.meet().blocks();
    if let Some((i, v)) = first_nonconvex(form, &meet_blocks)? {
        let (a, b) = v.witness.expect("non-convex verdicts carry a witness");
        return Ok(ConvexityVerdict::NotConvex {
            witness: Witness::Cell {
                block: meet_blocks[i].clone(),
                a,
                b,
                lambda: 0.5,
                excess: v.excess,
            },
        });
    }
    if let Some(w) = policy_pair_search(form, options)? {
        return Ok(ConvexityVerdict::NotConvex { witness: w });
    }
    Ok(ConvexityVerdict::Inconclusive {
        reason: "join-conditional cost is not convex, meet-conditional cost is convex on every cell, \
                 and no violating policy pair was found"
            .into(),
    })
}

/// First block whose conditional cost fails the midpoint test. The local
/// pass runs over every block before any full pass.
fn first_nonconvex(form: &StaticForm, blocks: &[Vec<usize>]) -> Result<Option<(usize, GridVerdict)>> {
    for local in [true, false] {
        for (i, block) in blocks.iter().enumerate() {
            let (_, table) = form.block_table(block);
            let mut strict = true;
            let v = grid_pass(&table, form.actions(), local, &mut strict)?;
            if !v.convex {
                return Ok(Some((i, v)));
            }
        }
    }
    Ok(None)
}

fn violation(form: &StaticForm, a: &DeterministicProfile, b: &DeterministicProfile) -> Result<Option<Witness>> {
    let Some(mid) = midpoint_profile(a, b) else {
        return Ok(None);
    };
    let lhs = form.expected_cost(&mid)?;
    let rhs = 0.5 * form.expected_cost(a)? + 0.5 * form.expected_cost(b)?;
    Ok((lhs > rhs + MIDPOINT_CONVEXITY).then(|| Witness::Policy {
        first: a.clone(),
        second: b.clone(),
        lambda: 0.5,
        lhs,
        rhs,
    }))
}

fn policy_pair_search(form: &StaticForm, options: &CertifyOptions) -> Result<Option<Witness>> {
    for seed in &options.seeds {
        // Reflecting every DM first: on a symmetric lattice the midpoint is
        // then the all-center policy.
        let all = (0..form.n_dms()).fold(seed.clone(), |p, t| mirror_dm(form, &p, t));
        let singles = (0..form.n_dms()).map(|t| mirror_dm(form, seed, t));
        for mirrored in std::iter::once(all).chain(singles) {
            if let Some(w) = violation(form, seed, &mirrored)? {
                return Ok(Some(w));
            }
        }
    }
    let count = form
        .n_y
        .iter()
        .zip(form.actions())
        .try_fold(1u128, |acc, (ny, u)| {
            (0..*ny).try_fold(acc, |a, _| a.checked_mul(u.len() as u128))
        })
        .unwrap_or(u128::MAX);
    if count > options.exhaustive_cap {
        return Ok(None);
    }
    let shape = ShapeOnly {
        n_y: form.n_y.clone(),
        n_u: form.actions().iter().map(|a| a.len()).collect(),
    };
    let profiles: Vec<DeterministicProfile> = (0..count).map(|i| shape.profile(i)).collect();
    let costs: Vec<f64> = profiles
        .par_iter()
        .map(|p| form.expected_cost(p))
        .collect::<Result<_>>()?;
    for i in 0..profiles.len() {
        for j in i + 1..profiles.len() {
            if let Some(mid) = midpoint_profile(&profiles[i], &profiles[j]) {
                let lhs = form.expected_cost(&mid)?;
                let rhs = 0.5 * costs[i] + 0.5 * costs[j];
                if lhs > rhs + MIDPOINT_CONVEXITY {
                    return Ok(Some(Witness::Policy {
                        first: profiles[i].clone(),
                        second: profiles[j].clone(),
                        lambda: 0.5,
                        lhs,
                        rhs,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Lexicographic profile decoding from measurement and action counts alone.
struct ShapeOnly {
    n_y: Vec<usize>,
    n_u: Vec<usize>,
}

impl ShapeOnly {
    fn profile(&self, mut index: u128) -> DeterministicProfile {
        let mut maps: Vec<Vec<usize>> = self.n_y.iter().map(|n| vec![0; *n]).collect();
        for k in (0..maps.len()).rev() {
            for y in (0..maps[k].len()).rev() {
                maps[k][y] = (index % self.n_u[k] as u128) as usize;
                index /= self.n_u[k] as u128;
            }
        }
        DeterministicProfile::new(maps)
    }
}

/// Replays a cell witness as two team policies that agree off the cell:
/// the first plays `a` everywhere, the second plays `b` on the cell.
/// Returns both sides of the midpoint inequality.
pub fn replay_cell_witness(form: &StaticForm, block: &[usize], a: &[usize], b: &[usize]) -> Result<(f64, f64)> {
    let n = form.n_dms();
    let first = DeterministicProfile::new((0..n).map(|t| vec![a[t]; form.n_y[t]]).collect());
    let mut second = first.clone();
    for t in 0..n {
        let mut map = second.map(t).to_vec();
        for &e in block {
            map[form.measurement(e, t)] = b[t];
        }
        second.set_map(t, map);
    }
    policy_midpoint_test(form, &first, &second, 0.5)
}

/// Certifies a static problem with the default search budget.
pub fn certify_team_convexity(problem: &TeamProblem) -> Result<ConvexityVerdict> {
    let form = StaticForm::from_static_problem(problem)?;
    certify(&form, &CertifyOptions::default())
}
