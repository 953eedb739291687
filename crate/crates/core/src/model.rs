//! The intrinsic model restricted to finite spaces.
//!
//! Tables indexed by tuples use row-major order with the earliest component
//! most significant: kernels of DM `n` are indexed by `(ω₀, u¹, …, uⁿ⁻¹)`,
//! the cost by `(ω₀, u¹, …, uᴺ)`, and induced joints by
//! `(ω₀, y¹, u¹, …, yᴺ, uᴺ)`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{FiniteSpace, MixedRadix, Pmf};
use crate::tolerances::{INPUT_NORMALIZATION, JOINT_CAP};

/// Measurement and action spaces of one decision maker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionMaker {
    pub y: FiniteSpace,
    pub u: FiniteSpace,
}

impl DecisionMaker {
    pub fn new(y: FiniteSpace, u: FiniteSpace) -> Self {
        Self { y, u }
    }
}

/// `p_n(yⁿ | ω₀, u¹, …, uⁿ⁻¹)`, one row per history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementKernel {
    dm: usize,
    n_y: usize,
    table: Vec<f64>,
}

impl MeasurementKernel {
    /// `table` is row-major: `table[h * n_y + y]`.
    pub fn new(dm: usize, n_y: usize, table: Vec<f64>) -> Self {
        Self { dm, n_y, table }
    }

    /// A kernel whose rows are all equal to `row`.
    pub fn constant_rows(dm: usize, rows: usize, row: &[f64]) -> Self {
        let mut table = Vec::with_capacity(rows * row.len());
        for _ in 0..rows {
            table.extend_from_slice(row);
        }
        Self::new(dm, row.len(), table)
    }

    pub fn dm(&self) -> usize {
        self.dm
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn n_rows(&self) -> usize {
        if self.n_y == 0 {
            0
        } else {
            self.table.len() / self.n_y
        }
    }

    pub fn row(&self, history: usize) -> &[f64] {
        &self.table[history * self.n_y..(history + 1) * self.n_y]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

/// Nonnegative cost indexed by `(ω₀, u¹, …, uᴺ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    values: Vec<f64>,
}

impl CostTable {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// One broken invariant found by [`TeamProblem::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoDecisionMakers,
    PriorLength { expected: usize, found: usize },
    PriorEntry { point: String, value: f64 },
    PriorSum { sum: f64 },
    KernelCount { expected: usize, found: usize },
    KernelDm { position: usize, found: usize },
    KernelShape { dm: usize, expected: usize, found: usize },
    KernelEntry { dm: usize, history: String, y: String, value: f64 },
    KernelRowSum { dm: usize, history: String, sum: f64 },
    CostShape { expected: usize, found: usize },
    CostEntry { key: String, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoDecisionMakers => write!(f, "problem has no decision makers"),
            Violation::PriorLength { expected, found } => {
                write!(f, "prior has {found} entries, expected {expected}")
            }
            Violation::PriorEntry { point, value } => {
                write!(f, "prior mass at `{point}` is {value}")
            }
            Violation::PriorSum { sum } => write!(f, "prior sums to {sum}"),
            Violation::KernelCount { expected, found } => {
                write!(f, "{found} kernels given, expected {expected}")
            }
            Violation::KernelDm { position, found } => {
                write!(f, "kernel at position {position} is tagged for DM {found}")
            }
            Violation::KernelShape {
                dm,
                expected,
                found,
            } => write!(
                f,
                "kernel of DM {dm} has {found} entries, expected {expected}"
            ),
            Violation::KernelEntry {
                dm,
                history,
                y,
                value,
            } => write!(
                f,
                "kernel of DM {dm}, row ({history}), entry `{y}` is {value}"
            ),
            Violation::KernelRowSum { dm, history, sum } => {
                write!(f, "kernel of DM {dm}, row ({history}) sums to {sum}")
            }
            Violation::CostShape { expected, found } => {
                write!(f, "cost table has {found} entries, expected {expected}")
            }
            Violation::CostEntry { key, value } => {
                write!(f, "cost at ({key}) is {value}")
            }
        }
    }
}

/// A sequential team problem on finite spaces.
///
/// DM indices are zero-based in the API (`0..n_dms()`); reports and labels
/// use the one-based names `u1`, `y2`, ….
#[derive(Debug, Clone, PartialEq)]
pub struct TeamProblem {
    omega0: FiniteSpace,
    dms: Vec<DecisionMaker>,
    prior: Vec<f64>,
    kernels: Vec<MeasurementKernel>,
    cost: CostTable,
    history_radix: Vec<MixedRadix>,
    cost_radix: MixedRadix,
}

impl TeamProblem {
    /// Builds and validates a problem; prior and kernel rows are renormalized.
    pub fn new(
        omega0: FiniteSpace,
        dms: Vec<DecisionMaker>,
        prior: Vec<f64>,
        kernels: Vec<MeasurementKernel>,
        cost: CostTable,
    ) -> Result<Self> {
        let mut p = Self::from_parts_unchecked(omega0, dms, prior, kernels, cost);
        let violations = p.validate();
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        p.prior = Pmf::renormalized(std::mem::take(&mut p.prior)).into_vec();
        for k in &mut p.kernels {
            let n_y = k.n_y;
            for row in k.table.chunks_mut(n_y) {
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
        Ok(p)
    }

    /// Stores the parts as given. Use [`TeamProblem::validate`] before
    /// relying on any computation.
    pub fn from_parts_unchecked(
        omega0: FiniteSpace,
        dms: Vec<DecisionMaker>,
        prior: Vec<f64>,
        kernels: Vec<MeasurementKernel>,
        cost: CostTable,
    ) -> Self {
        let mut history_radix = Vec::with_capacity(dms.len());
        let mut dims = vec![omega0.len()];
        for dm in &dms {
            history_radix.push(MixedRadix::new(dims.clone()));
            dims.push(dm.u.len());
        }
        let cost_radix = MixedRadix::new(dims);
        Self {
            omega0,
            dms,
            prior,
            kernels,
            cost,
            history_radix,
            cost_radix,
        }
    }

    /// Lists every broken invariant; empty iff the problem is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.dms.is_empty() {
            out.push(Violation::NoDecisionMakers);
        }
        if self.prior.len() != self.omega0.len() {
            out.push(Violation::PriorLength {
                expected: self.omega0.len(),
                found: self.prior.len(),
            });
        } else {
            for (i, m) in self.prior.iter().enumerate() {
                if !m.is_finite() || *m < 0.0 {
                    out.push(Violation::PriorEntry {
                        point: self.omega0.point(i).to_string(),
                        value: *m,
                    });
                }
            }
            let sum: f64 = self.prior.iter().sum();
            if (sum - 1.0).abs() > INPUT_NORMALIZATION {
                out.push(Violation::PriorSum { sum });
            }
        }
        if self.kernels.len() != self.dms.len() {
            out.push(Violation::KernelCount {
                expected: self.dms.len(),
                found: self.kernels.len(),
            });
        }
        for (pos, k) in self.kernels.iter().enumerate().take(self.dms.len()) {
            if k.dm != pos {
                out.push(Violation::KernelDm {
                    position: pos,
                    found: k.dm,
                });
            }
            let rows = self.history_radix[pos].size();
            let n_y = self.dms[pos].y.len();
            if k.n_y != n_y || k.table.len() != rows * n_y {
                out.push(Violation::KernelShape {
                    dm: pos,
                    expected: rows * n_y,
                    found: k.table.len(),
                });
                continue;
            }
            for h in 0..rows {
                let row = k.row(h);
                let mut bad = false;
                for (y, v) in row.iter().enumerate() {
                    if !v.is_finite() || *v < 0.0 {
                        bad = true;
                        out.push(Violation::KernelEntry {
                            dm: pos,
                            history: self.history_label(pos, h),
                            y: self.dms[pos].y.point(y).to_string(),
                            value: *v,
                        });
                    }
                }
                let sum: f64 = row.iter().sum();
                if !bad && (sum - 1.0).abs() > INPUT_NORMALIZATION {
                    out.push(Violation::KernelRowSum {
                        dm: pos,
                        history: self.history_label(pos, h),
                        sum,
                    });
                }
            }
        }
        if self.cost.values.len() != self.cost_radix.size() {
            out.push(Violation::CostShape {
                expected: self.cost_radix.size(),
                found: self.cost.values.len(),
            });
        } else {
            for (i, v) in self.cost.values.iter().enumerate() {
                if !v.is_finite() || *v < 0.0 {
                    out.push(Violation::CostEntry {
                        key: self.cost_label(i),
                        value: *v,
                    });
                }
            }
        }
        out
    }

    pub fn n_dms(&self) -> usize {
        self.dms.len()
    }

    pub fn omega0(&self) -> &FiniteSpace {
        &self.omega0
    }

    pub fn dm(&self, k: usize) -> &DecisionMaker {
        &self.dms[k]
    }

    pub fn dms(&self) -> &[DecisionMaker] {
        &self.dms
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn kernel(&self, k: usize) -> &MeasurementKernel {
        &self.kernels[k]
    }

    pub fn cost(&self) -> &CostTable {
        &self.cost
    }

    /// Radix of the history `(ω₀, u¹, …, uᵏ⁻¹)` that indexes DM `k`'s kernel.
    pub fn history_radix(&self, k: usize) -> &MixedRadix {
        &self.history_radix[k]
    }

    pub fn cost_radix(&self) -> &MixedRadix {
        &self.cost_radix
    }

    /// Row of DM `k`'s kernel for `ω₀` and the first `k` actions of `us`.
    pub fn history_index(&self, k: usize, omega0: usize, us: &[usize]) -> usize {
        let mut h = omega0;
        for (j, u) in us.iter().take(k).enumerate() {
            h = h * self.dms[j].u.len() + u;
        }
        h
    }

    pub fn cost_index(&self, omega0: usize, us: &[usize]) -> usize {
        self.history_index(self.n_dms(), omega0, us)
    }

    pub fn cost_at(&self, omega0: usize, us: &[usize]) -> f64 {
        self.cost.values[self.cost_index(omega0, us)]
    }

    pub fn history_label(&self, k: usize, h: usize) -> String {
        let digits = self.history_radix[k].digits(h);
        let mut parts = vec![format!("{}={}", self.omega0.label(), self.omega0.point(digits[0]))];
        for (j, d) in digits.iter().enumerate().skip(1) {
            parts.push(format!("u{}={}", j, self.dms[j - 1].u.point(*d)));
        }
        parts.join(", ")
    }

    pub fn cost_label(&self, i: usize) -> String {
        let digits = self.cost_radix.digits(i);
        let mut parts = vec![format!("{}={}", self.omega0.label(), self.omega0.point(digits[0]))];
        for (j, d) in digits.iter().enumerate().skip(1) {
            parts.push(format!("u{}={}", j, self.dms[j - 1].u.point(*d)));
        }
        parts.join(", ")
    }

    /// Axis sizes of the joint `(ω₀, y¹, u¹, …, yᴺ, uᴺ)`.
    pub fn joint_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.omega0.len()];
        for dm in &self.dms {
            dims.push(dm.y.len());
            dims.push(dm.u.len());
        }
        dims
    }

    /// Number of deterministic profiles, `Π_k |Uᵏ|^{|Yᵏ|}` (saturating).
    pub fn profile_count(&self) -> u128 {
        let mut n: u128 = 1;
        for dm in &self.dms {
            for _ in 0..dm.y.len() {
                n = n.saturating_mul(dm.u.len() as u128);
            }
        }
        n
    }

    /// Depth-first traversal of every positive-probability path
    /// `(ω₀, y¹, u¹, …, yᴺ, uᴺ)` under `strategy`.
    pub fn walk<S: Strategy + ?Sized>(
        &self,
        strategy: &S,
        visit: &mut dyn FnMut(usize, &[usize], &[usize], f64),
    ) {
        let n = self.n_dms();
        let mut ys = Vec::with_capacity(n);
        let mut us = Vec::with_capacity(n);
        let mut buffers: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (w, &p) in self.prior.iter().enumerate() {
            if p > 0.0 {
                self.walk_from(strategy, 0, w, p, &mut ys, &mut us, &mut buffers, visit);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn walk_from<S: Strategy + ?Sized>(
        &self,
        strategy: &S,
        k: usize,
        w: usize,
        p: f64,
        ys: &mut Vec<usize>,
        us: &mut Vec<usize>,
        rest: &mut [Vec<(usize, f64)>],
        visit: &mut dyn FnMut(usize, &[usize], &[usize], f64),
    ) {
        if k == self.n_dms() {
            visit(w, ys, us, p);
            return;
        }
        let h = self.history_index(k, w, us);
        let row = self.kernels[k].row(h);
        let (mine, rest) = rest.split_at_mut(1);
        let actions = &mut mine[0];
        for (y, &py) in row.iter().enumerate() {
            if py == 0.0 {
                continue;
            }
            ys.push(y);
            actions.clear();
            strategy.actions(k, ys, us, actions);
            for &(u, pu) in actions.iter() {
                if pu == 0.0 {
                    continue;
                }
                us.push(u);
                self.walk_from(strategy, k + 1, w, p * py * pu, ys, us, rest, visit);
                us.pop();
            }
            ys.pop();
        }
    }

    /// `J(γ) = E[c(ω₀, u)]` by exact summation.
    pub fn expected_cost<S: Strategy + ?Sized>(&self, strategy: &S) -> Result<f64> {
        strategy.check(self)?;
        let mut total = 0.0;
        self.walk(strategy, &mut |w, _ys, us, p| {
            total += p * self.cost_at(w, us);
        });
        Ok(total)
    }

    /// Joint law of `(ω₀, y¹, u¹, …, yᴺ, uᴺ)` under `strategy`.
    pub fn induced_joint<S: Strategy + ?Sized>(&self, strategy: &S) -> Result<JointTable> {
        strategy.check(self)?;
        let mut joint = JointTable::zeros(self.joint_dims())?;
        let mut digits = vec![0usize; 1 + 2 * self.n_dms()];
        self.walk(strategy, &mut |w, ys, us, p| {
            digits[0] = w;
            for k in 0..ys.len() {
                digits[1 + 2 * k] = ys[k];
                digits[2 + 2 * k] = us[k];
            }
            let i = joint.radix.index(&digits);
            joint.mass[i] += p;
        });
        Ok(joint)
    }

    /// `⟨cost, P⟩` for a joint over this problem's product space.
    pub fn cost_inner(&self, joint: &JointTable) -> f64 {
        let n = self.n_dms();
        let mut digits = vec![0usize; 1 + 2 * n];
        let mut us = vec![0usize; n];
        let mut total = 0.0;
        for (i, &m) in joint.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            joint.radix.decode(i, &mut digits);
            for k in 0..n {
                us[k] = digits[2 + 2 * k];
            }
            total += m * self.cost_at(digits[0], &us);
        }
        total
    }
}

/// A team policy that can be executed along a history.
pub trait Strategy {
    /// Dimension checks against `problem`.
    fn check(&self, problem: &TeamProblem) -> Result<()>;

    /// Pushes `(uᵏ, probability)` pairs for DM `dm` into `out`. `ys` holds
    /// `y¹..yᵈᵐ` (inclusive) and `us` holds `u¹..uᵈᵐ⁻¹`.
    fn actions(&self, dm: usize, ys: &[usize], us: &[usize], out: &mut Vec<(usize, f64)>);
}

/// One total map `Yᵏ → Uᵏ` per DM, stored as action indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeterministicProfile {
    maps: Vec<Vec<usize>>,
}

impl DeterministicProfile {
    pub fn new(maps: Vec<Vec<usize>>) -> Self {
        Self { maps }
    }

    /// Every DM plays its first action.
    pub fn first(problem: &TeamProblem) -> Self {
        Self::new(problem.dms().iter().map(|d| vec![0; d.y.len()]).collect())
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    pub fn map(&self, k: usize) -> &[usize] {
        &self.maps[k]
    }

    pub fn set_map(&mut self, k: usize, map: Vec<usize>) {
        self.maps[k] = map;
    }

    pub fn random<R: Rng + ?Sized>(problem: &TeamProblem, rng: &mut R) -> Self {
        Self::new(
            problem
                .dms()
                .iter()
                .map(|d| (0..d.y.len()).map(|_| rng.gen_range(0..d.u.len())).collect())
                .collect(),
        )
    }
}

impl Strategy for DeterministicProfile {
    fn check(&self, problem: &TeamProblem) -> Result<()> {
        if self.maps.len() != problem.n_dms() {
            return Err(Error::Dimension(format!(
                "profile has {} maps for {} DMs",
                self.maps.len(),
                problem.n_dms()
            )));
        }
        for (k, map) in self.maps.iter().enumerate() {
            let dm = problem.dm(k);
            if map.len() != dm.y.len() {
                return Err(Error::Dimension(format!(
                    "map of DM {k} covers {} of {} measurements",
                    map.len(),
                    dm.y.len()
                )));
            }
            if let Some(u) = map.iter().find(|u| **u >= dm.u.len()) {
                return Err(Error::Dimension(format!(
                    "map of DM {k} uses action {u} outside 0..{}",
                    dm.u.len()
                )));
            }
        }
        Ok(())
    }

    fn actions(&self, dm: usize, ys: &[usize], _us: &[usize], out: &mut Vec<(usize, f64)>) {
        out.push((self.maps[dm][ys[dm]], 1.0));
    }
}

/// One stochastic kernel `Πᵏ(uᵏ | yᵏ)` per DM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedProfile {
    kernels: Vec<Vec<Vec<f64>>>,
}

impl RandomizedProfile {
    /// `kernels[k][y]` is a pmf over `Uᵏ`.
    pub fn new(kernels: Vec<Vec<Vec<f64>>>) -> Self {
        Self { kernels }
    }

    pub fn from_deterministic(problem: &TeamProblem, d: &DeterministicProfile) -> Self {
        Self::new(
            problem
                .dms()
                .iter()
                .enumerate()
                .map(|(k, dm)| {
                    d.map(k)
                        .iter()
                        .map(|&u| Pmf::point(dm.u.len(), u).into_vec())
                        .collect()
                })
                .collect(),
        )
    }

    pub fn uniform(problem: &TeamProblem) -> Self {
        Self::new(
            problem
                .dms()
                .iter()
                .map(|dm| vec![Pmf::uniform(dm.u.len()).into_vec(); dm.y.len()])
                .collect(),
        )
    }

    /// Rows drawn uniformly from the simplex (normalized exponentials).
    pub fn random<R: Rng + ?Sized>(problem: &TeamProblem, rng: &mut R) -> Self {
        Self::new(
            problem
                .dms()
                .iter()
                .map(|dm| {
                    (0..dm.y.len())
                        .map(|_| {
                            let raw: Vec<f64> = (0..dm.u.len())
                                .map(|_| -(1.0 - rng.gen::<f64>()).ln())
                                .collect();
                            let s: f64 = raw.iter().sum();
                            raw.into_iter().map(|x| x / s).collect()
                        })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn kernels(&self) -> &[Vec<Vec<f64>>] {
        &self.kernels
    }

    pub fn row(&self, k: usize, y: usize) -> &[f64] {
        &self.kernels[k][y]
    }
}

impl Strategy for RandomizedProfile {
    fn check(&self, problem: &TeamProblem) -> Result<()> {
        if self.kernels.len() != problem.n_dms() {
            return Err(Error::Dimension(format!(
                "profile has {} kernels for {} DMs",
                self.kernels.len(),
                problem.n_dms()
            )));
        }
        for (k, rows) in self.kernels.iter().enumerate() {
            let dm = problem.dm(k);
            if rows.len() != dm.y.len() {
                return Err(Error::Dimension(format!(
                    "kernel of DM {k} has {} rows for {} measurements",
                    rows.len(),
                    dm.y.len()
                )));
            }
            for (y, row) in rows.iter().enumerate() {
                if row.len() != dm.u.len() {
                    return Err(Error::Dimension(format!(
                        "kernel of DM {k}, row {y} has {} entries for {} actions",
                        row.len(),
                        dm.u.len()
                    )));
                }
                let s: f64 = row.iter().sum();
                if row.iter().any(|p| !(*p >= 0.0)) || (s - 1.0).abs() > INPUT_NORMALIZATION {
                    return Err(Error::Dimension(format!(
                        "kernel of DM {k}, row {y} is not a pmf"
                    )));
                }
            }
        }
        Ok(())
    }

    fn actions(&self, dm: usize, ys: &[usize], _us: &[usize], out: &mut Vec<(usize, f64)>) {
        for (u, &p) in self.kernels[dm][ys[dm]].iter().enumerate() {
            if p > 0.0 {
                out.push((u, p));
            }
        }
    }
}

/// A dense probability table over a product of finite axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable {
    radix: MixedRadix,
    mass: Vec<f64>,
}

impl JointTable {
    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let radix = MixedRadix::new(dims);
        if radix.size() > JOINT_CAP {
            return Err(Error::CapExceeded {
                count: radix.size() as u128,
                cap: JOINT_CAP as u128,
            });
        }
        let mass = vec![0.0; radix.size()];
        Ok(Self { radix, mass })
    }

    pub fn from_mass(dims: Vec<usize>, mass: Vec<f64>) -> Result<Self> {
        let radix = MixedRadix::new(dims);
        if radix.size() != mass.len() {
            return Err(Error::Dimension(format!(
                "joint of size {} given {} masses",
                radix.size(),
                mass.len()
            )));
        }
        Ok(Self { radix, mass })
    }

    pub fn dims(&self) -> &[usize] {
        self.radix.dims()
    }

    pub fn radix(&self) -> &MixedRadix {
        &self.radix
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn mass_mut(&mut self) -> &mut [f64] {
        &mut self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Marginal on the first `axes` coordinates (row-major over them).
    pub fn marginal_prefix(&self, axes: usize) -> Vec<f64> {
        let tail: usize = self.radix.dims()[axes..].iter().product();
        self.mass.chunks(tail.max(1)).map(|c| c.iter().sum()).collect()
    }

    /// Marginal on an arbitrary ordered subset of axes.
    pub fn marginal(&self, axes: &[usize]) -> (MixedRadix, Vec<f64>) {
        let out_radix = MixedRadix::new(axes.iter().map(|&a| self.radix.dims()[a]).collect());
        let mut out = vec![0.0; out_radix.size()];
        let mut digits = vec![0usize; self.radix.dims().len()];
        let mut sub = vec![0usize; axes.len()];
        for (i, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            self.radix.decode(i, &mut digits);
            for (j, &a) in axes.iter().enumerate() {
                sub[j] = digits[a];
            }
            out[out_radix.index(&sub)] += m;
        }
        (out_radix, out)
    }

    pub fn max_abs_diff(&self, other: &JointTable) -> f64 {
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
