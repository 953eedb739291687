//! Static reduction: measurements are redrawn from action-independent
//! reference laws `Q_t` and the density ratios `f_t = p_t / Q_t` move into
//! the cost, `c_s(ω₀, y, u) = c(ω₀, u) · Π_t f_t(ω₀, u¹..uᵗ⁻¹, yᵗ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infostruct::affects;
use crate::model::{
    CostTable, DecisionMaker, MeasurementKernel, Strategy, TeamProblem,
};
use crate::space::{FiniteSpace, MixedRadix, Pmf};
use crate::tolerances::JOINT_CAP;

/// Reference law requested for one DM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    /// Uniform over the union of supports of all rows reachable from a
    /// positive-prior `ω₀`.
    Uniform,
    /// A fixed pmf over the DM's measurement space.
    Given { pmf: Vec<f64> },
    /// Keep the DM's own kernel (allowed only when no earlier action affects
    /// it); the weight is then identically one.
    Kept,
}

/// A static reduction stored in factored form.
#[derive(Debug, Clone)]
pub struct StaticReduction {
    original: TeamProblem,
    references: Vec<Reference>,
    /// Resolved `Q_t`; `None` when the DM's kernel is kept.
    q: Vec<Option<Vec<f64>>>,
    /// `f_t` laid out like the kernel table; `None` means `f_t ≡ 1`.
    f: Vec<Option<Vec<f64>>>,
}

/// Builds the reduction with the given references (default: uniform for
/// every DM).
pub fn static_reduce(problem: &TeamProblem, references: Option<&[Reference]>) -> Result<StaticReduction> {
    let n = problem.n_dms();
    let references: Vec<Reference> = match references {
        Some(r) if r.len() != n => {
            return Err(Error::Dimension(format!("{} references for {n} DMs", r.len())));
        }
        Some(r) => r.to_vec(),
        None => vec![Reference::Uniform; n],
    };
    let mut q = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    for (t, reference) in references.iter().enumerate() {
        let kernel = problem.kernel(t);
        let n_y = kernel.n_y();
        let radix = problem.history_radix(t);
        let reachable = |h: usize| problem.prior()[radix.digits(h)[0]] > 0.0;
        let qt = match reference {
            Reference::Kept => {
                if (0..t).any(|k| affects(problem, k, t).expect("k < t")) {
                    return Err(Error::ActionDependentKernel { dm: t });
                }
                q.push(None);
                f.push(None);
                continue;
            }
            Reference::Given { pmf } => {
                if pmf.len() != n_y {
                    return Err(Error::Dimension(format!(
                        "reference of DM {t} has {} entries for {n_y} measurements",
                        pmf.len()
                    )));
                }
                Pmf::new(pmf.clone())?.into_vec()
            }
            Reference::Uniform => {
                let mut support = vec![false; n_y];
                for h in (0..kernel.n_rows()).filter(|&h| reachable(h)) {
                    for (y, p) in kernel.row(h).iter().enumerate() {
                        support[y] |= *p > 0.0;
                    }
                }
                let count = support.iter().filter(|s| **s).count().max(1);
                support
                    .iter()
                    .map(|s| if *s { 1.0 / count as f64 } else { 0.0 })
                    .collect()
            }
        };
        let mut ft = vec![0.0; kernel.table().len()];
        for h in 0..kernel.n_rows() {
            let row = kernel.row(h);
            for y in 0..n_y {
                if row[y] == 0.0 {
                    continue;
                }
                if qt[y] == 0.0 {
                    if reachable(h) {
                        return Err(Error::AbsoluteContinuity {
                            dm: t,
                            y: problem.dm(t).y.point(y).to_string(),
                            history: problem.history_label(t, h),
                        });
                    }
                    continue;
                }
                ft[h * n_y + y] = row[y] / qt[y];
            }
        }
        q.push(Some(qt));
        f.push(Some(ft));
    }
    Ok(StaticReduction {
        original: problem.clone(),
        references,
        q,
        f,
    })
}

impl StaticReduction {
    pub fn original(&self) -> &TeamProblem {
        &self.original
    }

    pub fn references(&self) -> &[Reference] {
        &self.references
    }

    /// Resolved reference of DM `t`; `None` if its kernel is kept.
    pub fn q(&self, t: usize) -> Option<&[f64]> {
        self.q[t].as_deref()
    }

    /// Weight table of DM `t`, laid out like its kernel; `None` if `f_t ≡ 1`.
    pub fn weights(&self, t: usize) -> Option<&[f64]> {
        self.f[t].as_deref()
    }

    pub fn weight(&self, t: usize, history: usize, y: usize) -> f64 {
        match &self.f[t] {
            None => 1.0,
            Some(ft) => ft[history * self.original.dm(t).y.len() + y],
        }
    }

    /// Measurement law of DM `t` in the reduced problem given `ω₀`.
    pub fn reduced_row(&self, t: usize, omega0: usize) -> &[f64] {
        match &self.q[t] {
            Some(q) => q,
            None => {
                let zeros = vec![0; self.original.n_dms()];
                self.original
                    .kernel(t)
                    .row(self.original.history_index(t, omega0, &zeros))
            }
        }
    }

    /// `c_s(ω₀, y, u)`.
    pub fn reduced_cost(&self, omega0: usize, ys: &[usize], us: &[usize]) -> f64 {
        let mut c = self.original.cost_at(omega0, us);
        for t in 0..self.original.n_dms() {
            if c == 0.0 {
                break;
            }
            let h = self.original.history_index(t, omega0, us);
            c *= self.weight(t, h, ys[t]);
        }
        c
    }

    /// Exogenous points `(ω₀, y¹..yᴺ)` of the reduced problem with positive
    /// mass, in row-major order.
    pub fn exo_points(&self) -> Vec<(usize, Vec<usize>, f64)> {
        let n = self.original.n_dms();
        let mut out = Vec::new();
        let mut ys = Vec::with_capacity(n);
        for (w, &p) in self.original.prior().iter().enumerate() {
            if p > 0.0 {
                self.collect_exo(w, p, &mut ys, &mut out);
            }
        }
        out
    }

    fn collect_exo(&self, w: usize, p: f64, ys: &mut Vec<usize>, out: &mut Vec<(usize, Vec<usize>, f64)>) {
        let t = ys.len();
        if t == self.original.n_dms() {
            out.push((w, ys.clone(), p));
            return;
        }
        for (y, &q) in self.reduced_row(t, w).iter().enumerate() {
            if q > 0.0 {
                ys.push(y);
                self.collect_exo(w, p * q, ys, out);
                ys.pop();
            }
        }
    }

    /// Expected reduced cost under `strategy`, by exact summation.
    pub fn expected_cost<S: Strategy + ?Sized>(&self, strategy: &S) -> Result<f64> {
        strategy.check(&self.original)?;
        let n = self.original.n_dms();
        let mut total = 0.0;
        let mut ys = Vec::with_capacity(n);
        let mut us = Vec::with_capacity(n);
        let mut buffers = vec![Vec::new(); n];
        for (w, &p) in self.original.prior().iter().enumerate() {
            if p > 0.0 {
                self.walk(strategy, w, p, &mut ys, &mut us, &mut buffers, &mut total);
            }
        }
        Ok(total)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk<S: Strategy + ?Sized>(
        &self,
        strategy: &S,
        w: usize,
        p: f64,
        ys: &mut Vec<usize>,
        us: &mut Vec<usize>,
        buffers: &mut [Vec<(usize, f64)>],
        total: &mut f64,
    ) {
        let t = ys.len();
        if t == self.original.n_dms() {
            *total += p * self.original.cost_at(w, us);
            return;
        }
        let h = self.original.history_index(t, w, us);
        let (mine, rest) = buffers.split_at_mut(1);
        let actions = &mut mine[0];
        for (y, &q) in self.reduced_row(t, w).iter().enumerate() {
            let fy = self.weight(t, h, y);
            if q == 0.0 || fy == 0.0 {
                continue;
            }
            ys.push(y);
            actions.clear();
            strategy.actions(t, ys, us, actions);
            for &(u, pu) in actions.iter() {
                if pu == 0.0 {
                    continue;
                }
                us.push(u);
                self.walk(strategy, w, p * q * fy * pu, ys, us, rest, total);
                us.pop();
            }
            ys.pop();
        }
    }

    /// True if every weight on a positive-mass reduced point equals one,
    /// so that `c_s` is `c` extended by `y`.
    pub fn preserves_cost(&self) -> bool {
        (0..self.original.n_dms()).all(|t| match (&self.f[t], &self.q[t]) {
            (None, _) => true,
            (Some(ft), Some(q)) => {
                let n_y = q.len();
                ft.chunks(n_y).enumerate().all(|(h, row)| {
                    let w = self.original.history_radix(t).digits(h)[0];
                    self.original.prior()[w] == 0.0
                        || row
                            .iter()
                            .zip(q)
                            .all(|(f, qy)| *qy == 0.0 || (f - 1.0).abs() <= crate::tolerances::IDENTITY)
                })
            }
            (Some(_), None) => unreachable!("weights exist only with a resolved reference"),
        })
    }

    /// Dense static problem on the enlarged exogenous variable `(ω₀, y)`,
    /// where every DM reads its own coordinate.
    pub fn materialize(&self) -> Result<TeamProblem> {
        let p = &self.original;
        let n = p.n_dms();
        let exo = self.exo_points();
        let n_actions: usize = (0..n).map(|k| p.dm(k).u.len()).product();
        let size = (exo.len() as u128) * n_actions as u128;
        if size > JOINT_CAP as u128 {
            return Err(Error::CapExceeded {
                count: size,
                cap: JOINT_CAP as u128,
            });
        }
        let labels = exo
            .iter()
            .map(|(w, ys, _)| {
                let mut parts = vec![p.omega0().point(*w).to_string()];
                parts.extend(ys.iter().enumerate().map(|(t, y)| p.dm(t).y.point(*y).to_string()));
                format!("({})", parts.join(";"))
            })
            .collect();
        let omega0 = FiniteSpace::new(format!("{}_s", p.omega0().label()), labels)?;
        let prior: Vec<f64> = exo.iter().map(|e| e.2).collect();
        let dms: Vec<DecisionMaker> = p.dms().to_vec();
        let mut kernels = Vec::with_capacity(n);
        for t in 0..n {
            let n_y = p.dm(t).y.len();
            let rows: usize = exo.len() * (0..t).map(|k| p.dm(k).u.len()).product::<usize>();
            let per_exo = rows / exo.len();
            let mut table = vec![0.0; rows * n_y];
            for (e, (_, ys, _)) in exo.iter().enumerate() {
                for r in 0..per_exo {
                    table[(e * per_exo + r) * n_y + ys[t]] = 1.0;
                }
            }
            kernels.push(MeasurementKernel::new(t, n_y, table));
        }
        let radix = MixedRadix::new((0..n).map(|k| p.dm(k).u.len()).collect());
        let mut cost = Vec::with_capacity(size as usize);
        let mut us = vec![0; n];
        for (w, ys, _) in &exo {
            for a in 0..n_actions {
                radix.decode(a, &mut us);
                cost.push(self.reduced_cost(*w, ys, &us));
            }
        }
        TeamProblem::new(omega0, dms, prior, kernels, CostTable::new(cost))
    }
}

/// `|J(γ) − J_s(γ)|` between a problem and its reduction.
pub fn verify_equivalence<S: Strategy + ?Sized>(
    problem: &TeamProblem,
    reduction: &StaticReduction,
    strategy: &S,
) -> Result<f64> {
    if problem != reduction.original() {
        return Err(Error::Dimension("reduction was built from a different problem".into()));
    }
    Ok((problem.expected_cost(strategy)? - reduction.expected_cost(strategy)?).abs())
}
