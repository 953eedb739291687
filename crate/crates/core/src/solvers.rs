//! Optimal and person-by-person solvers on finite problems, plus
//! stationarity and Krainak-type checks for quadratic teams evaluated by
//! quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DeterministicProfile, Strategy, TeamProblem};
use crate::strategic::{profile_at, profile_rank};
use crate::tolerances::{FD_STEP, KRAINAK, TIE};

const CHUNK: u128 = 4096;

fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - TIE * incumbent.abs().max(1.0)
}

/// Lexicographic-first minimizer of `value(i)` over `0..count`. Chunks have a
/// fixed size and are folded in index order, so the result does not depend
/// on the thread count.
fn scan_min(count: u128, value: impl Fn(u128) -> Result<f64> + Sync) -> Result<(u128, f64)> {
    let chunks = count.div_ceil(CHUNK);
    let bests: Vec<Result<(u128, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let mut best = (lo, value(lo)?);
            for i in lo + 1..hi {
                let v = value(i)?;
                if strictly_better(v, best.1) {
                    best = (i, v);
                }
            }
            Ok(best)
        })
        .collect();
    let mut out: Option<(u128, f64)> = None;
    for b in bests {
        let b = b?;
        match out {
            Some(o) if !strictly_better(b.1, o.1) => {}
            _ => out = Some(b),
        }
    }
    out.ok_or_else(|| Error::Dimension("empty profile set".into()))
}

fn checked_count(problem: &TeamProblem, cap: u128) -> Result<u128> {
    let count = problem.profile_count();
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    Ok(count)
}

/// Global minimum of `J` over all deterministic profiles.
pub fn brute_force(problem: &TeamProblem, cap: u128) -> Result<(DeterministicProfile, f64)> {
    let count = checked_count(problem, cap)?;
    let (i, v) = scan_min(count, |i| problem.expected_cost(&profile_at(problem, i)))?;
    Ok((profile_at(problem, i), v))
}

/// DM `dm` plays every action with weight one so that one traversal scores
/// all of them; the others follow `base`.
struct Branching<'a> {
    base: &'a DeterministicProfile,
    dm: usize,
    n_u: usize,
}

impl Strategy for Branching<'_> {
    fn check(&self, problem: &TeamProblem) -> Result<()> {
        self.base.check(problem)
    }

    fn actions(&self, dm: usize, ys: &[usize], us: &[usize], out: &mut Vec<(usize, f64)>) {
        if dm == self.dm {
            out.extend((0..self.n_u).map(|u| (u, 1.0)));
        } else {
            self.base.actions(dm, ys, us, out);
        }
    }
}

/// For every measurement of DM `i` with positive probability, the action
/// minimizing the conditional expected cost with the other DMs fixed (ties
/// to the lowest index); zero-probability measurements keep the incumbent.
pub fn best_response(problem: &TeamProblem, profile: &DeterministicProfile, i: usize) -> Result<Vec<usize>> {
    if i >= problem.n_dms() {
        return Err(Error::IndexOutOfRange(format!("DM {i}")));
    }
    let n_y = problem.dm(i).y.len();
    let n_u = problem.dm(i).u.len();
    let strategy = Branching {
        base: profile,
        dm: i,
        n_u,
    };
    strategy.check(problem)?;
    let mut score = vec![0.0; n_y * n_u];
    let mut mass = vec![0.0; n_y];
    problem.walk(&strategy, &mut |w, ys, us, p| {
        score[ys[i] * n_u + us[i]] += p * problem.cost_at(w, us);
        if us[i] == 0 {
            mass[ys[i]] += p;
        }
    });
    Ok((0..n_y)
        .map(|y| {
            if mass[y] <= 0.0 {
                return profile.map(i)[y];
            }
            let row = &score[y * n_u..(y + 1) * n_u];
            let mut best = 0;
            for u in 1..n_u {
                if strictly_better(row[u], row[best]) {
                    best = u;
                }
            }
            best
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbpOutcome {
    pub profile: DeterministicProfile,
    pub converged: bool,
    pub sweeps: usize,
    /// `J` before the first update and after every single-DM update.
    pub trace: Vec<f64>,
}

/// Cyclic best-response sweeps in DM order until a full sweep changes
/// nothing or `max_sweeps` is reached.
pub fn pbp_iterate(problem: &TeamProblem, init: &DeterministicProfile, max_sweeps: usize) -> Result<PbpOutcome> {
    let mut profile = init.clone();
    let mut trace = vec![problem.expected_cost(&profile)?];
    for sweep in 1..=max_sweeps {
        let mut changed = false;
        for i in 0..problem.n_dms() {
            let map = best_response(problem, &profile, i)?;
            if map != profile.map(i) {
                changed = true;
                profile.set_map(i, map);
            }
            trace.push(problem.expected_cost(&profile)?);
        }
        if !changed {
            return Ok(PbpOutcome {
                profile,
                converged: true,
                sweeps: sweep,
                trace,
            });
        }
    }
    Ok(PbpOutcome {
        profile,
        converged: false,
        sweeps: max_sweeps,
        trace,
    })
}

/// True if no single DM can lower `J` by changing its map, checked by
/// trying every alternative action at every measurement.
pub fn is_person_by_person_optimal(problem: &TeamProblem, profile: &DeterministicProfile) -> Result<bool> {
    let j = problem.expected_cost(profile)?;
    for i in 0..problem.n_dms() {
        for y in 0..problem.dm(i).y.len() {
            for u in 0..problem.dm(i).u.len() {
                let mut other = profile.clone();
                let mut map = other.map(i).to_vec();
                map[y] = u;
                other.set_map(i, map);
                if strictly_better(problem.expected_cost(&other)?, j) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureSolution {
    /// `(lexicographic rank, weight)`; a single vertex with weight one.
    pub weights: Vec<(u128, f64)>,
    pub vertex: DeterministicProfile,
    pub value: f64,
}

/// Minimizes the linear functional `P ↦ ⟨cost, P⟩` over mixtures of `L_A`
/// measures by scanning the vertices, each scored through its induced joint.
pub fn mixture_lp(problem: &TeamProblem, cap: u128) -> Result<MixtureSolution> {
    let count = checked_count(problem, cap)?;
    let (i, value) = scan_min(count, |i| {
        let joint = problem.induced_joint(&profile_at(problem, i))?;
        Ok(problem.cost_inner(&joint))
    })?;
    let vertex = profile_at(problem, i);
    debug_assert_eq!(profile_rank(problem, &vertex), i);
    Ok(MixtureSolution {
        weights: vec![(i, 1.0)],
        vertex,
        value,
    })
}

/// A static team with scalar actions, linear observations of a Gaussian
/// vector discretized by a quadrature grid, and cost
/// `(u − Kω)ᵀ R (u − Kω)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticTeam {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    /// Per DM, the coordinates of `ω` it observes.
    observed: Vec<Vec<usize>>,
    k: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
}

impl QuadraticTeam {
    pub fn new(
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
        observed: Vec<Vec<usize>>,
        k: Vec<Vec<f64>>,
        r: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = observed.len();
        let d = points.first().map_or(0, |p| p.len());
        if points.len() != weights.len() || points.iter().any(|p| p.len() != d) {
            return Err(Error::Dimension("quadrature points and weights disagree".into()));
        }
        if k.len() != n || k.iter().any(|row| row.len() != d) {
            return Err(Error::Dimension(format!("target matrix must be {n}×{d}")));
        }
        if r.len() != n || r.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!("weight matrix must be {n}×{n}")));
        }
        for i in 0..n {
            for j in 0..n {
                if r[i][j] != r[j][i] {
                    return Err(Error::Dimension("weight matrix must be symmetric".into()));
                }
            }
        }
        if observed.iter().flatten().any(|&c| c >= d) {
            return Err(Error::IndexOutOfRange("observed coordinate".into()));
        }
        Ok(Self {
            points,
            weights,
            observed,
            k,
            r,
        })
    }

    pub fn n_dms(&self) -> usize {
        self.observed.len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn observed(&self, i: usize) -> &[usize] {
        &self.observed[i]
    }

    pub fn target(&self) -> &[Vec<f64>] {
        &self.k
    }

    pub fn cost_weights(&self) -> &[Vec<f64>] {
        &self.r
    }

    /// Affine parameters: DM `i` uses `θᵢ = (bᵢ, aᵢ)` with
    /// `uⁱ = bᵢ + aᵢ·yⁱ`; the flat vector concatenates them in DM order.
    pub fn n_params(&self) -> usize {
        self.observed.iter().map(|o| 1 + o.len()).sum()
    }

    fn actions(&self, params: &[f64], omega: &[f64], out: &mut [f64]) {
        let mut at = 0;
        for (i, obs) in self.observed.iter().enumerate() {
            let mut u = params[at];
            for (j, c) in obs.iter().enumerate() {
                u += params[at + 1 + j] * omega[*c];
            }
            out[i] = u;
            at += 1 + obs.len();
        }
    }

    fn residual(&self, u: &[f64], omega: &[f64], out: &mut [f64]) {
        for (i, row) in self.k.iter().enumerate() {
            out[i] = u[i] - row.iter().zip(omega).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    fn cost_at(&self, u: &[f64], omega: &[f64]) -> f64 {
        let n = self.n_dms();
        let mut e = vec![0.0; n];
        self.residual(u, omega, &mut e);
        let mut c = 0.0;
        for i in 0..n {
            for j in 0..n {
                c += e[i] * self.r[i][j] * e[j];
            }
        }
        c
    }

    /// `∇_u c = 2R(u − Kω)`.
    fn gradient_at(&self, u: &[f64], omega: &[f64], out: &mut [f64]) {
        let n = self.n_dms();
        let mut e = vec![0.0; n];
        self.residual(u, omega, &mut e);
        for i in 0..n {
            out[i] = 2.0 * (0..n).map(|j| self.r[i][j] * e[j]).sum::<f64>();
        }
    }

    pub fn expected_cost(&self, params: &[f64]) -> Result<f64> {
        self.check_params(params)?;
        let mut u = vec![0.0; self.n_dms()];
        let mut total = 0.0;
        for (omega, w) in self.points.iter().zip(&self.weights) {
            self.actions(params, omega, &mut u);
            total += w * self.cost_at(&u, omega);
        }
        Ok(total)
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::Dimension(format!(
                "{} parameters given, {} expected",
                params.len(),
                self.n_params()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    /// Central finite-difference gradient of `J` in the parameters.
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    /// Largest `|E[∂c/∂uⁱ | yⁱ]|` over DMs and observed values.
    pub max_conditional_residual: f64,
}

/// Finite-difference gradient of `J` at `params`, plus the per-observation
/// stationarity residuals `E[∂c/∂uⁱ | yⁱ]` over the grid.
pub fn check_stationarity(team: &QuadraticTeam, params: &[f64]) -> Result<StationarityReport> {
    team.check_params(params)?;
    let gradient: Vec<f64> = (0..params.len())
        .map(|j| {
            let mut hi = params.to_vec();
            let mut lo = params.to_vec();
            hi[j] += FD_STEP;
            lo[j] -= FD_STEP;
            Ok((team.expected_cost(&hi)? - team.expected_cost(&lo)?) / (2.0 * FD_STEP))
        })
        .collect::<Result<_>>()?;
    let gradient_norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();

    let n = team.n_dms();
    let mut u = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut groups: std::collections::BTreeMap<Vec<u64>, (f64, f64)> = Default::default();
        for (omega, w) in team.points.iter().zip(&team.weights) {
            team.actions(params, omega, &mut u);
            team.gradient_at(&u, omega, &mut g);
            let key: Vec<u64> = team.observed[i].iter().map(|c| omega[*c].to_bits()).collect();
            let entry = groups.entry(key).or_insert((0.0, 0.0));
            entry.0 += w * g[i];
            entry.1 += w;
        }
        for (num, den) in groups.values() {
            if *den > 0.0 {
                worst = worst.max((num / den).abs());
            }
        }
    }
    Ok(StationarityReport {
        gradient,
        gradient_norm,
        max_conditional_residual: worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrainakReport {
    /// The inequality held on every sample; a sample can only refute.
    pub not_refuted: bool,
    pub min_inner_product: f64,
    pub argmin: usize,
}

/// `Σᵢ E[∂c/∂uⁱ(ω, γ*(y)) · (γⁱ(yⁱ) − γ*ⁱ(yⁱ))]` for every sampled `γ`.
pub fn check_krainak_inequality(team: &QuadraticTeam, candidate: &[f64], samples: &[Vec<f64>]) -> Result<KrainakReport> {
    team.check_params(candidate)?;
    for s in samples {
        team.check_params(s)?;
    }
    if samples.is_empty() {
        return Err(Error::Dimension("no comparison samples".into()));
    }
    let n = team.n_dms();
    let values: Vec<f64> = samples
        .par_iter()
        .map(|s| {
            let mut u_star = vec![0.0; n];
            let mut u = vec![0.0; n];
            let mut g = vec![0.0; n];
            let mut total = 0.0;
            for (omega, w) in team.points.iter().zip(&team.weights) {
                team.actions(candidate, omega, &mut u_star);
                team.actions(s, omega, &mut u);
                team.gradient_at(&u_star, omega, &mut g);
                total += w * (0..n).map(|i| g[i] * (u[i] - u_star[i])).sum::<f64>();
            }
            total
        })
        .collect();
    let mut argmin = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[argmin] {
            argmin = i;
        }
    }
    Ok(KrainakReport {
        not_refuted: values[argmin] >= -KRAINAK,
        min_inner_product: values[argmin],
        argmin,
    })
}

/// Seeded affine parameter vectors with entries uniform on `[−scale, scale]`.
pub fn sample_affine_params(team: &QuadraticTeam, count: usize, seed: u64, scale: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..team.n_params()).map(|_| rng.gen_range(-scale..=scale)).collect())
        .collect()
}
