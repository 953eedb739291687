//! Named constructions: Witsenhausen's counterexample and the Gaussian
//! signaling problem on quadrature grids, the square-wave sequence of
//! strategic measures, a static convex team, a decoupled two-subsystem team,
//! and small random fixtures.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::infostruct::{test_conditional_independence, CiReport, DecouplingAnnotation, Subsystem};
use crate::model::{CostTable, DecisionMaker, DeterministicProfile, JointTable, MeasurementKernel, TeamProblem};
use crate::quadrature::{gauss_hermite, gaussian_lattice, normal_pdf, GaussRule};
use crate::reduction::{static_reduce, Reference, StaticReduction};
use crate::solvers::best_response;
use crate::space::FiniteSpace;

/// Names accepted by the command-line front end.
pub const NAMES: [&str; 5] = ["witsenhausen", "signaling", "square-wave", "example1", "decoupled"];

// ---------------------------------------------------------------------------
// Gaussian two-stage problems
// ---------------------------------------------------------------------------

/// Which cost the two-stage Gaussian problem carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoStageKind {
    /// `k²(x − u¹)² + (u¹ − u²)²`.
    Witsenhausen,
    /// `k²(u¹)² + (x − u²)²`.
    Signaling,
}

/// Discretization parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadSpec {
    /// Gauss–Hermite nodes for the initial state `x ~ N(0, σ²)`.
    pub x_nodes: usize,
    /// Gauss–Hermite nodes for the channel noise `w ~ N(0, 1)` (functional
    /// evaluation only; the finite problem uses a lattice rule for `w`).
    pub w_nodes: usize,
    /// Points of each action grid.
    pub grid_points: usize,
    /// Half-width of the action grids in units of `σ`.
    pub grid_reach: f64,
    /// Half-width of the noise lattice in units of the noise deviation.
    pub noise_reach: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            x_nodes: 64,
            w_nodes: 64,
            grid_points: 129,
            grid_reach: 4.0,
            noise_reach: 8.0,
        }
    }
}

impl QuadSpec {
    fn check(&self) -> Result<()> {
        if self.x_nodes == 0 || self.w_nodes == 0 {
            return Err(Error::InvalidQuadrature("node counts must be positive".into()));
        }
        if self.grid_points < 3 || self.grid_points % 2 == 0 {
            return Err(Error::InvalidQuadrature(format!(
                "action grids need an odd number of points, at least 3 (got {})",
                self.grid_points
            )));
        }
        if !(self.grid_reach > 0.0) || !(self.noise_reach >= 0.0) {
            return Err(Error::InvalidQuadrature("grid and noise reach must be positive".into()));
        }
        Ok(())
    }
}

/// The continuous problem evaluated by tensor Gauss–Hermite quadrature, with
/// policies given as functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianTwoStage {
    pub kind: TwoStageKind,
    pub k: f64,
    pub sigma: f64,
    x_rule: GaussRule,
    w_rule: GaussRule,
}

/// Conditional-mean decoder of a given encoder, computed on the state rule.
#[derive(Debug, Clone)]
pub struct MmseDecoder {
    /// `(encoder output, weight, estimated quantity)` per state node.
    atoms: Vec<(f64, f64, f64)>,
}

impl MmseDecoder {
    pub fn eval(&self, y: f64) -> f64 {
        // Work relative to the largest log-weight to avoid underflow far in
        // the tails.
        let logs: Vec<f64> = self
            .atoms
            .iter()
            .map(|(u, w, _)| w.ln() - 0.5 * (y - u) * (y - u))
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for ((_, _, target), l) in self.atoms.iter().zip(&logs) {
            let e = (l - top).exp();
            num += e * target;
            den += e;
        }
        num / den
    }
}

impl GaussianTwoStage {
    pub fn new(kind: TwoStageKind, k: f64, sigma: f64, quad: &QuadSpec) -> Result<Self> {
        check_params(k, sigma)?;
        quad.check()?;
        Ok(Self {
            kind,
            k,
            sigma,
            x_rule: gauss_hermite(quad.x_nodes)?.scaled(sigma),
            w_rule: gauss_hermite(quad.w_nodes)?,
        })
    }

    pub fn x_rule(&self) -> &GaussRule {
        &self.x_rule
    }

    pub fn w_rule(&self) -> &GaussRule {
        &self.w_rule
    }

    pub fn cost(&self, x: f64, u1: f64, u2: f64) -> f64 {
        let k2 = self.k * self.k;
        match self.kind {
            TwoStageKind::Witsenhausen => k2 * (x - u1).powi(2) + (u1 - u2).powi(2),
            TwoStageKind::Signaling => k2 * u1 * u1 + (x - u2).powi(2),
        }
    }

    /// `E c(x, γ¹(x), γ²(γ¹(x) + w))`.
    pub fn expected_cost(&self, encoder: &dyn Fn(f64) -> f64, decoder: &dyn Fn(f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (x, px) in self.x_rule.nodes().iter().zip(self.x_rule.weights()) {
            let u1 = encoder(*x);
            let inner: f64 = self
                .w_rule
                .nodes()
                .iter()
                .zip(self.w_rule.weights())
                .map(|(w, pw)| pw * self.cost(*x, u1, decoder(u1 + w)))
                .sum();
            total += px * inner;
        }
        total
    }

    /// Best decoder for `encoder`: the conditional mean of `u¹`
    /// (Witsenhausen) or of `x` (signaling) given `y² = u¹ + w`.
    pub fn mmse_decoder(&self, encoder: &dyn Fn(f64) -> f64) -> MmseDecoder {
        let atoms = self
            .x_rule
            .nodes()
            .iter()
            .zip(self.x_rule.weights())
            .map(|(x, p)| {
                let u = encoder(*x);
                let target = match self.kind {
                    TwoStageKind::Witsenhausen => u,
                    TwoStageKind::Signaling => *x,
                };
                (u, *p, target)
            })
            .collect();
        MmseDecoder { atoms }
    }

    /// Cost of `encoder` paired with its conditional-mean decoder.
    pub fn cost_with_mmse(&self, encoder: &dyn Fn(f64) -> f64) -> f64 {
        let dec = self.mmse_decoder(encoder);
        self.expected_cost(encoder, &|y| dec.eval(y))
    }

    /// Both sides of `J(½γa + ½γb) ≤ ½J(γa) + ½J(γb)` for function pairs.
    pub fn policy_midpoint(
        &self,
        a: (&dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64),
        b: (&dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64),
    ) -> (f64, f64) {
        let enc = |x: f64| 0.5 * (a.0(x) + b.0(x));
        let dec = |y: f64| 0.5 * (a.1(y) + b.1(y));
        let lhs = self.expected_cost(&enc, &dec);
        let rhs = 0.5 * self.expected_cost(a.0, a.1) + 0.5 * self.expected_cost(b.0, b.1);
        (lhs, rhs)
    }
}

fn check_params(k: f64, sigma: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) || !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Dimension(format!("k and σ must be positive (got {k}, {sigma})")));
    }
    Ok(())
}

/// `J(λ)` of the linear encoder `u¹ = λx` with its linear MMSE decoder.
pub fn witsenhausen_affine_cost(k: f64, sigma: f64, lambda: f64) -> f64 {
    let s2 = sigma * sigma;
    let g = lambda * lambda * s2;
    k * k * s2 * (1.0 - lambda).powi(2) + g / (g + 1.0)
}

/// Minimizes [`witsenhausen_affine_cost`] over `λ ∈ [0, 1]` (outside that
/// interval both terms grow), by a fine scan followed by golden-section
/// refinement. Returns `(λ*, J(λ*))`.
pub fn witsenhausen_best_affine(k: f64, sigma: f64) -> (f64, f64) {
    let j = |l: f64| witsenhausen_affine_cost(k, sigma, l);
    let n: usize = 20_000;
    let mut best: usize = 0;
    for i in 1..=n {
        if j(i as f64 / n as f64) < j(best as f64 / n as f64) {
            best = i;
        }
    }
    let (mut lo, mut hi) = (
        (best.saturating_sub(1)) as f64 / n as f64,
        ((best + 1).min(n)) as f64 / n as f64,
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if j(a) <= j(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let l = 0.5 * (lo + hi);
    (l, j(l))
}

/// `J(α) = k²α²σ² + σ²/(α²σ² + 1)` for `u¹ = αx` and its MMSE decoder.
pub fn signaling_affine_cost(k: f64, sigma: f64, alpha: f64) -> f64 {
    let s2 = sigma * sigma;
    k * k * alpha * alpha * s2 + s2 / (alpha * alpha * s2 + 1.0)
}

/// Stationary point of [`signaling_affine_cost`]: `α*² = (σ/k − 1)/σ²`
/// when `σ > k`, else `α* = 0`. Returns `(α*, J(α*))`.
pub fn signaling_best_affine(k: f64, sigma: f64) -> (f64, f64) {
    let a2 = ((sigma / k - 1.0) / (sigma * sigma)).max(0.0);
    let a = a2.sqrt();
    (a, signaling_affine_cost(k, sigma, a))
}

/// A Gaussian two-stage problem on finite grids together with its static
/// reduction and the functional quadrature model.
///
/// `Ω₀` holds the Gauss–Hermite nodes of `x`; DM 1 observes `x` exactly and
/// acts on a uniform grid of spacing `h`; the channel noise lives on a
/// lattice of the same spacing, so `y² = u¹ + w` stays on a lattice; DM 2
/// acts on the same grid as DM 1.
#[derive(Debug, Clone)]
pub struct TwoStage {
    pub kind: TwoStageKind,
    pub k: f64,
    pub sigma: f64,
    pub quad: QuadSpec,
    pub problem: TeamProblem,
    pub reduction: StaticReduction,
    pub team: GaussianTwoStage,
    /// Noise lattice rule (spacing equals the action spacing).
    pub noise: GaussRule,
}

/// Witsenhausen's counterexample.
pub fn witsenhausen(k: f64, sigma: f64, quad: &QuadSpec) -> Result<TwoStage> {
    two_stage(TwoStageKind::Witsenhausen, k, sigma, quad)
}

/// The Gaussian point-to-point signaling problem.
pub fn signaling(k: f64, sigma: f64, quad: &QuadSpec) -> Result<TwoStage> {
    two_stage(TwoStageKind::Signaling, k, sigma, quad)
}

fn two_stage(kind: TwoStageKind, k: f64, sigma: f64, quad: &QuadSpec) -> Result<TwoStage> {
    let team = GaussianTwoStage::new(kind, k, sigma, quad)?;
    let xs = team.x_rule().nodes().to_vec();
    let half = (quad.grid_points / 2) as i64;
    let h = quad.grid_reach * sigma / half as f64;
    let grid: Vec<f64> = (-half..=half).map(|j| j as f64 * h).collect();
    let noise = gaussian_lattice(h, quad.noise_reach, 1.0)?;
    let m = (noise.len() / 2) as i64;
    let y2: Vec<f64> = (-(half + m)..=(half + m)).map(|j| j as f64 * h).collect();

    let omega0 = FiniteSpace::numeric("x", xs.clone())?;
    let dm1 = DecisionMaker::new(
        FiniteSpace::numeric("y1", xs.clone())?,
        FiniteSpace::numeric("u1", grid.clone())?,
    );
    let dm2 = DecisionMaker::new(
        FiniteSpace::numeric("y2", y2.clone())?,
        FiniteSpace::numeric("u2", grid.clone())?,
    );
    let n_x = xs.len();
    let n_u = grid.len();
    let n_y2 = y2.len();

    let mut k1 = vec![0.0; n_x * n_x];
    for i in 0..n_x {
        k1[i * n_x + i] = 1.0;
    }
    // Row (x, u¹ = j) puts the noise lattice at offsets j .. j + 2m.
    let mut k2 = vec![0.0; n_x * n_u * n_y2];
    for row in 0..n_x * n_u {
        let j = row % n_u;
        let base = row * n_y2 + j;
        k2[base..base + noise.len()].copy_from_slice(noise.weights());
    }
    let mut cost = Vec::with_capacity(n_x * n_u * n_u);
    for &x in &xs {
        for &u1 in &grid {
            for &u2 in &grid {
                cost.push(team.cost(x, u1, u2));
            }
        }
    }
    let problem = TeamProblem::new(
        omega0,
        vec![dm1, dm2],
        team.x_rule().weights().to_vec(),
        vec![
            MeasurementKernel::new(0, n_x, k1),
            MeasurementKernel::new(1, n_y2, k2),
        ],
        CostTable::new(cost),
    )?;
    let eta: Vec<f64> = y2.iter().map(|y| normal_pdf(*y)).collect();
    let total: f64 = eta.iter().sum();
    let references = [
        Reference::Kept,
        Reference::Given {
            pmf: eta.iter().map(|e| e / total).collect(),
        },
    ];
    let reduction = static_reduce(&problem, Some(&references))?;
    Ok(TwoStage {
        kind,
        k,
        sigma,
        quad: quad.clone(),
        problem,
        reduction,
        team,
        noise,
    })
}

impl TwoStage {
    pub fn x_values(&self) -> &[f64] {
        self.problem.omega0().values().expect("numeric")
    }

    pub fn action_values(&self) -> &[f64] {
        self.problem.dm(0).u.values().expect("numeric")
    }

    pub fn y2_values(&self) -> &[f64] {
        self.problem.dm(1).y.values().expect("numeric")
    }

    /// Finite profile obtained by rounding each function onto its grid.
    pub fn profile(&self, encoder: &dyn Fn(f64) -> f64, decoder: &dyn Fn(f64) -> f64) -> DeterministicProfile {
        let u1 = &self.problem.dm(0).u;
        let u2 = &self.problem.dm(1).u;
        DeterministicProfile::new(vec![
            self.x_values().iter().map(|x| u1.nearest(encoder(*x)).expect("numeric")).collect(),
            self.y2_values().iter().map(|y| u2.nearest(decoder(*y)).expect("numeric")).collect(),
        ])
    }

    /// Grid version of `encoder` paired with the exact best decoder on the
    /// grid.
    pub fn with_best_decoder(&self, encoder: &dyn Fn(f64) -> f64) -> Result<(DeterministicProfile, f64)> {
        let mut profile = self.profile(encoder, &|_| 0.0);
        let map = best_response(&self.problem, &profile, 1)?;
        profile.set_map(1, map);
        let j = self.problem.expected_cost(&profile)?;
        Ok((profile, j))
    }

    /// Two-point quantizer `a·sgn(x)` with `a = E|x| = σ√(2/π)` and its
    /// conditional-mean decoder.
    pub fn quantizer_level(&self) -> f64 {
        self.sigma * (2.0 / std::f64::consts::PI).sqrt()
    }

    /// Grid profile of the two-point quantizer and its conditional-mean
    /// decoder.
    pub fn quantizer_profile(&self) -> DeterministicProfile {
        let a = self.quantizer_level();
        let enc = move |x: f64| a * x.signum();
        let dec = self.team.mmse_decoder(&enc);
        self.profile(&enc, &|y| dec.eval(y))
    }

    /// Quantizer against the best affine pair; Witsenhausen cost only.
    pub fn affine_vs_quantizer(&self) -> AffineVsQuantizer {
        let (gain, affine_cost) = witsenhausen_best_affine(self.k, self.sigma);
        let s2 = self.sigma * self.sigma;
        let g = gain * gain * s2 / (gain * gain * s2 + 1.0);
        let affine_quadrature = self.team.expected_cost(&|x| gain * x, &|y| g * y);
        let a = self.quantizer_level();
        let quantizer_cost = self.team.cost_with_mmse(&|x| a * x.signum());
        AffineVsQuantizer {
            affine_gain: gain,
            affine_cost,
            affine_cost_quadrature: affine_quadrature,
            quantizer_level: a,
            quantizer_cost,
            quantizer_beats_affine: quantizer_cost < affine_cost,
        }
    }

    /// Minimum over staircase encoders `u¹ = α·Δ·round(x/Δ)` (`Δ = 0` means
    /// linear) of the grid cost with the exact best decoder.
    pub fn staircase_minimum(&self, alphas: &[f64], deltas: &[f64]) -> Result<StaircaseSearch> {
        let mut best: Option<StaircaseSearch> = None;
        let mut evaluated = 0;
        for &delta in deltas {
            for &alpha in alphas {
                let enc = move |x: f64| {
                    if delta > 0.0 {
                        alpha * delta * (x / delta).round()
                    } else {
                        alpha * x
                    }
                };
                let (_, j) = self.with_best_decoder(&enc)?;
                evaluated += 1;
                if best.as_ref().is_none_or(|b| j < b.value) {
                    best = Some(StaircaseSearch {
                        alpha,
                        delta,
                        value: j,
                        evaluated: 0,
                    });
                }
            }
        }
        let mut best = best.ok_or_else(|| Error::Dimension("empty staircase family".into()))?;
        best.evaluated = evaluated;
        Ok(best)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineVsQuantizer {
    pub affine_gain: f64,
    /// Closed-form cost of the optimized affine pair.
    pub affine_cost: f64,
    /// Same pair evaluated by quadrature.
    pub affine_cost_quadrature: f64,
    pub quantizer_level: f64,
    /// Quantizer with its conditional-mean decoder, by quadrature.
    pub quantizer_cost: f64,
    pub quantizer_beats_affine: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaircaseSearch {
    pub alpha: f64,
    pub delta: f64,
    pub value: f64,
    pub evaluated: usize,
}

// ---------------------------------------------------------------------------
// Square wave
// ---------------------------------------------------------------------------

/// One interval diagnostic of the square-wave sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalGap {
    /// Endpoints as `(numerator, denominator)`.
    pub a: (i64, i64),
    pub b: (i64, i64),
    /// `∫_A Q_n dm`.
    pub integral: (i64, i64),
    pub half_measure: (i64, i64),
    pub gap: (i64, i64),
    pub within_bound: bool,
}

/// `P_n` on `U¹ × Y × U²`, its setwise limit `P`, and diagnostics. `Y` is
/// the unit interval cut into `2n` equal cells; action index 0 is the
/// action "1".
#[derive(Debug, Clone, Serialize)]
pub struct SquareWave {
    pub n: usize,
    pub pn: JointTable,
    pub limit: JointTable,
    pub gaps: Vec<IntervalGap>,
    pub ci_pn: CiReport,
    pub ci_limit: CiReport,
    /// `P(u¹ = a | y, u² = b)` under the limit, indexed `[a][b]`.
    pub limit_conditional: [[f64; 2]; 2],
    /// `P(u¹ = a | y)` under the limit.
    pub limit_marginal: [f64; 2],
}

fn pair(r: Rational64) -> (i64, i64) {
    (*r.numer(), *r.denom())
}

/// `∫_{[a,b]} Q_n dm` where `Q_n(1|y)` is the indicator of the left halves
/// `[(2k−2)/2n, (2k−1)/2n)` of the `n` periods.
pub fn square_wave_integral(n: usize, a: Rational64, b: Rational64) -> Rational64 {
    let n = n as i64;
    let mut total = Rational64::from_integer(0);
    for k in 1..=n {
        let lo = Rational64::new(2 * k - 2, 2 * n).max(a);
        let hi = Rational64::new(2 * k - 1, 2 * n).min(b);
        if hi > lo {
            total += hi - lo;
        }
    }
    total
}

/// Twenty closed subintervals of `[0, 1]` with small rational endpoints.
pub fn square_wave_test_intervals() -> Vec<(Rational64, Rational64)> {
    let r = Rational64::new;
    let mut out = vec![(r(0, 1), r(3, 10)), (r(0, 1), r(1, 4)), (r(0, 1), r(1, 1))];
    let extra = [
        (1, 3, 2, 3),
        (1, 7, 5, 9),
        (2, 11, 3, 5),
        (1, 2, 1, 2),
        (3, 8, 7, 8),
        (0, 1, 1, 13),
        (5, 17, 16, 17),
        (1, 19, 18, 19),
        (2, 9, 7, 9),
        (4, 15, 11, 15),
        (1, 6, 1, 5),
        (12, 23, 1, 1),
        (1, 512, 3, 512),
        (255, 512, 257, 512),
        (3, 29, 27, 29),
        (1, 10, 9, 10),
        (7, 31, 8, 31),
    ];
    out.extend(extra.iter().map(|&(a, b, c, d)| (r(a, b), r(c, d))));
    out
}

pub fn square_wave(n: usize) -> Result<SquareWave> {
    if n == 0 {
        return Err(Error::Dimension("square wave needs n ≥ 1".into()));
    }
    let cells = 2 * n;
    let cell_mass = 1.0 / cells as f64;
    let mut pn = vec![0.0; 2 * cells * 2];
    let mut limit = vec![0.0; 2 * cells * 2];
    let at = |a: usize, c: usize, b: usize| (a * cells + c) * 2 + b;
    for c in 0..cells {
        // Even cells are the left halves, where both DMs play action "1".
        let u = if c % 2 == 0 { 0 } else { 1 };
        pn[at(u, c, u)] = cell_mass;
        for a in 0..2 {
            limit[at(a, c, a)] = 0.5 * cell_mass;
        }
    }
    let ci_pn = test_conditional_independence(&pn, 2, cells, 2)?;
    let ci_limit = test_conditional_independence(&limit, 2, cells, 2)?;
    let mut limit_conditional = [[0.0; 2]; 2];
    let mut limit_marginal = [0.0; 2];
    for a in 0..2 {
        let y_mass: f64 = (0..2).map(|b| (0..2).map(|x| limit[at(x, 0, b)]).sum::<f64>()).sum();
        limit_marginal[a] = (0..2).map(|b| limit[at(a, 0, b)]).sum::<f64>() / y_mass;
        for b in 0..2 {
            let yb: f64 = (0..2).map(|x| limit[at(x, 0, b)]).sum();
            limit_conditional[a][b] = limit[at(a, 0, b)] / yb;
        }
    }
    let bound = Rational64::new(1, 2 * n as i64);
    let gaps = square_wave_test_intervals()
        .into_iter()
        .map(|(a, b)| {
            let integral = square_wave_integral(n, a, b);
            let half = (b - a) / 2;
            let gap = if integral > half { integral - half } else { half - integral };
            IntervalGap {
                a: pair(a),
                b: pair(b),
                integral: pair(integral),
                half_measure: pair(half),
                gap: pair(gap),
                within_bound: gap <= bound,
            }
        })
        .collect();
    Ok(SquareWave {
        n,
        pn: JointTable::from_mass(vec![2, cells, 2], pn)?,
        limit: JointTable::from_mass(vec![2, cells, 2], limit)?,
        gaps,
        ci_pn,
        ci_limit,
        limit_conditional,
        limit_marginal,
    })
}

// ---------------------------------------------------------------------------
// Example 1
// ---------------------------------------------------------------------------

/// Static team on three cells of `[0, 1]` (masses 0.1, 0.8, 0.1). Both DMs
/// observe whether `ω < 0.1`; actions lie on `[1, 2]` with the given step.
/// The cost is quadratic around 2 on `[0, 0.9]` and `√(1+u¹) + √(1+u²)` on
/// `(0.9, 1]`.
pub fn example1(step: f64) -> Result<TeamProblem> {
    if !(step > 0.0) || step > 1.0 {
        return Err(Error::Dimension(format!("step must lie in (0, 1], got {step}")));
    }
    let count = (1.0 / step).round() as usize;
    if ((count as f64) * step - 1.0).abs() > 1e-9 {
        return Err(Error::Dimension(format!("step {step} does not divide [1, 2]")));
    }
    let grid: Vec<f64> = (0..=count).map(|i| 1.0 + i as f64 / count as f64).collect();
    let omega0 = FiniteSpace::new("w", vec!["[0,0.1)".into(), "[0.1,0.9]".into(), "(0.9,1]".into()])?;
    let y = FiniteSpace::new("y", vec!["0".into(), "1".into()])?;
    let dms: Vec<DecisionMaker> = ["u1", "u2"]
        .iter()
        .map(|l| Ok(DecisionMaker::new(y.clone(), FiniteSpace::numeric(*l, grid.clone())?)))
        .collect::<Result<_>>()?;
    let indicator = [vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 0.0]];
    let n_u = grid.len();
    let k1: Vec<f64> = indicator.iter().flatten().copied().collect();
    let k2: Vec<f64> = indicator
        .iter()
        .flat_map(|row| std::iter::repeat_n(row.clone(), n_u).flatten())
        .collect();
    let mut cost = Vec::with_capacity(3 * n_u * n_u);
    for w in 0..3 {
        for &a in &grid {
            for &b in &grid {
                cost.push(if w < 2 {
                    (a - 2.0).powi(2) + (b - 2.0).powi(2)
                } else {
                    (1.0 + a).sqrt() + (1.0 + b).sqrt()
                });
            }
        }
    }
    TeamProblem::new(
        omega0,
        dms,
        vec![0.1, 0.8, 0.1],
        vec![MeasurementKernel::new(0, 2, k1), MeasurementKernel::new(1, 2, k2)],
        CostTable::new(cost),
    )
}

// ---------------------------------------------------------------------------
// Decoupled example
// ---------------------------------------------------------------------------

/// Noise-free probability of a correct bit reading.
const READ_ACCURACY: f64 = 0.8;
const X1_PRIOR: f64 = 0.3;
const X2_PRIOR: f64 = 0.6;

/// Subsystem costs `c₁(x¹, u¹)` and `c₂(x², u²)`.
fn subsystem_cost(s: usize, x: usize, u: usize) -> f64 {
    match s {
        0 => f64::from(u8::from(u != x)),
        _ => 2.0 * f64::from(u8::from(u != x)) + 0.5 * u as f64,
    }
}

fn bit_prior(s: usize) -> f64 {
    if s == 0 {
        X1_PRIOR
    } else {
        X2_PRIOR
    }
}

/// Two binary subsystems with a shared fair bit `z₀`. `ω₀ = (x¹, x², z₀)`;
/// DM 1 reads `(y¹, z₀)` with `y¹` a noisy copy of `x¹`; DM 2 reads
/// `(y², z₀ ⊕ u¹)` with `y²` a noisy copy of `x²`, or of `x² ⊕ x¹` when
/// `coupled`. The cost is `c₁(x¹, u¹) + c₂(x², u²)`.
pub fn decoupled_example(coupled: bool) -> Result<(TeamProblem, DecouplingAnnotation)> {
    let bits = |w: usize| (w >> 2 & 1, w >> 1 & 1, w & 1);
    let labels = (0..8)
        .map(|w| {
            let (a, b, z) = bits(w);
            format!("({a},{b},{z})")
        })
        .collect();
    let omega0 = FiniteSpace::new("w", labels)?;
    let prior: Vec<f64> = (0..8)
        .map(|w| {
            let (a, b, _) = bits(w);
            let pa = if a == 1 { X1_PRIOR } else { 1.0 - X1_PRIOR };
            let pb = if b == 1 { X2_PRIOR } else { 1.0 - X2_PRIOR };
            pa * pb * 0.5
        })
        .collect();
    let pair_space = |l: &str| FiniteSpace::new(l, ["(0,0)", "(0,1)", "(1,0)", "(1,1)"].map(String::from).to_vec());
    let u = |l: &str| FiniteSpace::indexed(l, 2);
    let dms = vec![
        DecisionMaker::new(pair_space("y1")?, u("u1")?),
        DecisionMaker::new(pair_space("y2")?, u("u2")?),
    ];
    let read = |bit: usize, y: usize| if bit == y { READ_ACCURACY } else { 1.0 - READ_ACCURACY };
    let mut k1 = vec![0.0; 8 * 4];
    let mut k2 = vec![0.0; 16 * 4];
    for w in 0..8 {
        let (a, b, z) = bits(w);
        for y in 0..2 {
            k1[w * 4 + y * 2 + z] = read(a, y);
        }
        let source = if coupled { a ^ b } else { b };
        for u1 in 0..2 {
            for y in 0..2 {
                k2[(w * 2 + u1) * 4 + y * 2 + (z ^ u1)] = read(source, y);
            }
        }
    }
    let mut cost = Vec::with_capacity(32);
    for w in 0..8 {
        let (a, b, _) = bits(w);
        for u1 in 0..2 {
            for u2 in 0..2 {
                cost.push(subsystem_cost(0, a, u1) + subsystem_cost(1, b, u2));
            }
        }
    }
    let problem = TeamProblem::new(
        omega0,
        dms,
        prior,
        vec![MeasurementKernel::new(0, 4, k1), MeasurementKernel::new(1, 4, k2)],
        CostTable::new(cost),
    )?;
    let annotation = DecouplingAnnotation {
        subsystems: vec![
            Subsystem {
                dm: 0,
                state: (0..8).map(|w| bits(w).0).collect(),
                measurement: vec![0, 0, 1, 1],
            },
            Subsystem {
                dm: 1,
                state: (0..8).map(|w| bits(w).1).collect(),
                measurement: vec![0, 0, 1, 1],
            },
        ],
        shared: (0..8).map(|w| bits(w).2).collect(),
    };
    Ok((problem, annotation))
}

/// Single-DM problem of subsystem `s` (0 or 1) of [`decoupled_example`]
/// without the shared bit.
pub fn decoupled_subsystem(s: usize) -> Result<TeamProblem> {
    if s > 1 {
        return Err(Error::IndexOutOfRange(format!("subsystem {s}")));
    }
    let p = bit_prior(s);
    let omega0 = FiniteSpace::indexed("x", 2)?;
    let dm = DecisionMaker::new(FiniteSpace::indexed("y", 2)?, FiniteSpace::indexed("u", 2)?);
    let kernel = vec![READ_ACCURACY, 1.0 - READ_ACCURACY, 1.0 - READ_ACCURACY, READ_ACCURACY];
    let cost = (0..2)
        .flat_map(|x| (0..2).map(move |u| subsystem_cost(s, x, u)))
        .collect();
    TeamProblem::new(
        omega0,
        vec![dm],
        vec![1.0 - p, p],
        vec![MeasurementKernel::new(0, 2, kernel)],
        CostTable::new(cost),
    )
}

// ---------------------------------------------------------------------------
// Small fixtures
// ---------------------------------------------------------------------------

/// Small random and hand-built instances for tests and benchmarks.
pub mod fixtures {
    use rand::Rng;

    use super::*;

    fn random_row<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = row.iter().sum();
        row.into_iter().map(|x| x / s).collect()
    }

    /// Two DMs with one-point measurement spaces, binary actions, and a
    /// one-point `Ω₀`; `cost` is indexed by `(u¹, u²)`.
    pub fn two_bit_trivial_y(cost: Vec<f64>) -> TeamProblem {
        let dm = |l: &str| {
            DecisionMaker::new(
                FiniteSpace::indexed(format!("y{}", &l[1..]), 1).unwrap(),
                FiniteSpace::indexed(l, 2).unwrap(),
            )
        };
        TeamProblem::from_parts_unchecked(
            FiniteSpace::indexed("w", 1).unwrap(),
            vec![dm("u1"), dm("u2")],
            vec![1.0],
            vec![
                MeasurementKernel::new(0, 1, vec![1.0]),
                MeasurementKernel::new(1, 1, vec![1.0, 1.0]),
            ],
            CostTable::new(cost),
        )
    }

    /// Random problem with positive prior, strictly positive kernels and
    /// costs in `[0, 10)`. Kernels depend on past actions only if `dynamic`.
    pub fn random_problem<R: Rng + ?Sized>(
        rng: &mut R,
        n_dms: usize,
        n_omega: usize,
        n_y: usize,
        n_u: usize,
        dynamic: bool,
    ) -> TeamProblem {
        let omega0 = FiniteSpace::indexed("w", n_omega).unwrap();
        let dms: Vec<DecisionMaker> = (1..=n_dms)
            .map(|t| {
                DecisionMaker::new(
                    FiniteSpace::indexed(format!("y{t}"), n_y).unwrap(),
                    FiniteSpace::indexed(format!("u{t}"), n_u).unwrap(),
                )
            })
            .collect();
        let prior = random_row(rng, n_omega);
        let kernels = (0..n_dms)
            .map(|t| {
                let per_w = n_u.pow(t as u32);
                let mut table = Vec::with_capacity(n_omega * per_w * n_y);
                for _ in 0..n_omega {
                    let shared = random_row(rng, n_y);
                    for _ in 0..per_w {
                        if dynamic {
                            table.extend(random_row(rng, n_y));
                        } else {
                            table.extend(&shared);
                        }
                    }
                }
                MeasurementKernel::new(t, n_y, table)
            })
            .collect();
        let size = n_omega * n_u.pow(n_dms as u32);
        let cost = (0..size).map(|_| rng.gen_range(0.0..10.0)).collect();
        TeamProblem::new(omega0, dms, prior, kernels, CostTable::new(cost)).unwrap()
    }

    /// Random two-DM problem with classical information: `y¹ = g(ω₀)` and
    /// `y² = (y¹, u¹, s)` with `s` drawn from a kernel of `(ω₀, u¹)`.
    pub fn random_classical<R: Rng + ?Sized>(rng: &mut R, n_omega: usize, n_y1: usize, n_u: usize, n_s: usize) -> TeamProblem {
        let omega0 = FiniteSpace::indexed("w", n_omega).unwrap();
        let g: Vec<usize> = (0..n_omega).map(|w| if w < n_y1 { w } else { rng.gen_range(0..n_y1) }).collect();
        let mut y2 = Vec::new();
        for a in 0..n_y1 {
            for u in 0..n_u {
                for s in 0..n_s {
                    y2.push(format!("({a},{u},{s})"));
                }
            }
        }
        let n_y2 = y2.len();
        let dms = vec![
            DecisionMaker::new(
                FiniteSpace::indexed("y1", n_y1).unwrap(),
                FiniteSpace::indexed("u1", n_u).unwrap(),
            ),
            DecisionMaker::new(FiniteSpace::new("y2", y2).unwrap(), FiniteSpace::indexed("u2", n_u).unwrap()),
        ];
        let mut k1 = vec![0.0; n_omega * n_y1];
        let mut k2 = vec![0.0; n_omega * n_u * n_y2];
        for w in 0..n_omega {
            k1[w * n_y1 + g[w]] = 1.0;
            for u in 0..n_u {
                let s_row = random_row(rng, n_s);
                for (s, q) in s_row.iter().enumerate() {
                    k2[(w * n_u + u) * n_y2 + (g[w] * n_u + u) * n_s + s] = *q;
                }
            }
        }
        let cost = (0..n_omega * n_u * n_u).map(|_| rng.gen_range(0.0..10.0)).collect();
        TeamProblem::new(
            omega0,
            dms,
            random_row(rng, n_omega),
            vec![MeasurementKernel::new(0, n_y1, k1), MeasurementKernel::new(1, n_y2, k2)],
            CostTable::new(cost),
        )
        .unwrap()
    }

    /// `x = ±1` equally likely; DM 1 sees `x` and sends `u¹ ∈ {−1, 0, 1}`;
    /// DM 2 sees `u¹` and estimates `x` with `u² ∈ {−1, 0, 1}`. Cost
    /// `k²(u¹)² + (x − u²)²`.
    pub fn binary_signaling(k: f64) -> TeamProblem {
        let vals = vec![-1.0, 0.0, 1.0];
        let omega0 = FiniteSpace::numeric("x", vec![-1.0, 1.0]).unwrap();
        let dms = vec![
            DecisionMaker::new(
                FiniteSpace::numeric("y1", vec![-1.0, 1.0]).unwrap(),
                FiniteSpace::numeric("u1", vals.clone()).unwrap(),
            ),
            DecisionMaker::new(
                FiniteSpace::numeric("y2", vals.clone()).unwrap(),
                FiniteSpace::numeric("u2", vals.clone()).unwrap(),
            ),
        ];
        let k1 = vec![1.0, 0.0, 0.0, 1.0];
        let mut k2 = vec![0.0; 2 * 3 * 3];
        for w in 0..2 {
            for u in 0..3 {
                k2[(w * 3 + u) * 3 + u] = 1.0;
            }
        }
        let mut cost = Vec::with_capacity(18);
        for x in [-1.0, 1.0] {
            for u1 in &vals {
                for u2 in &vals {
                    cost.push(k * k * u1 * u1 + (x - u2) * (x - u2));
                }
            }
        }
        TeamProblem::new(
            omega0,
            dms,
            vec![0.5, 0.5],
            vec![MeasurementKernel::new(0, 2, k1), MeasurementKernel::new(1, 3, k2)],
            CostTable::new(cost),
        )
        .unwrap()
    }
}
