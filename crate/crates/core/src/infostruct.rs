//! Partitions of finite sets (finite σ-fields), precedence between decision
//! makers, classification of information structures, and conditional
//! independence tests on exact joints.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeterministicProfile, JointTable, TeamProblem};
use crate::space::MixedRadix;
use crate::tolerances::{IDENTITY, JOINT_CAP};

/// A partition of `{0, …, n−1}` in canonical form: block ids are assigned in
/// order of each block's least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    ground: String,
    labels: Vec<usize>,
    n_blocks: usize,
}

impl Partition {
    /// Groups elements with equal `keys`.
    pub fn from_keys<K: Ord + Clone>(ground: impl Into<String>, keys: &[K]) -> Self {
        let mut ids: BTreeMap<K, usize> = BTreeMap::new();
        let mut labels = Vec::with_capacity(keys.len());
        for k in keys {
            let next = ids.len();
            labels.push(*ids.entry(k.clone()).or_insert(next));
        }
        let n_blocks = ids.len();
        Self {
            ground: ground.into(),
            labels,
            n_blocks,
        }
    }

    /// Builds from explicit blocks; they must be disjoint, nonempty and cover
    /// `0..n`.
    pub fn from_blocks(ground: impl Into<String>, n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut keys = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Dimension(format!("block {b} is empty")));
            }
            for &e in block {
                if e >= n {
                    return Err(Error::IndexOutOfRange(format!("element {e} in a ground of size {n}")));
                }
                if keys[e] != usize::MAX {
                    return Err(Error::Dimension(format!("element {e} appears in two blocks")));
                }
                keys[e] = b;
            }
        }
        if let Some(e) = keys.iter().position(|k| *k == usize::MAX) {
            return Err(Error::Dimension(format!("element {e} is not covered")));
        }
        Ok(Self::from_keys(ground, &keys))
    }

    /// The one-block partition.
    pub fn trivial(ground: impl Into<String>, n: usize) -> Self {
        Self::from_keys(ground, &vec![0u8; n])
    }

    /// The all-singletons partition.
    pub fn discrete(ground: impl Into<String>, n: usize) -> Self {
        Self::from_keys(ground, &(0..n).collect::<Vec<_>>())
    }

    pub fn ground(&self) -> &str {
        &self.ground
    }

    pub fn ground_len(&self) -> usize {
        self.labels.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_of(&self, e: usize) -> usize {
        self.labels[e]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_blocks];
        for (e, &b) in self.labels.iter().enumerate() {
            out[b].push(e);
        }
        out
    }

    fn same_ground(&self, other: &Self) -> Result<()> {
        if self.ground != other.ground || self.labels.len() != other.labels.len() {
            return Err(Error::GroundMismatch {
                left: format!("{} ({} points)", self.ground, self.labels.len()),
                right: format!("{} ({} points)", other.ground, other.labels.len()),
            });
        }
        Ok(())
    }

    /// True if every block of `self` lies inside a block of `other`, i.e.
    /// `self` generates the larger σ-field.
    pub fn is_finer_than(&self, other: &Self) -> Result<bool> {
        self.same_ground(other)?;
        let mut image = vec![usize::MAX; self.n_blocks];
        for (a, b) in self.labels.iter().zip(&other.labels) {
            if image[*a] == usize::MAX {
                image[*a] = *b;
            } else if image[*a] != *b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Finest common coarsening (intersection of σ-fields).
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.same_ground(other)?;
        let n = self.labels.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for labels in [&self.labels, &other.labels] {
            let mut first = BTreeMap::new();
            for (e, &b) in labels.iter().enumerate() {
                let root = *first.entry(b).or_insert(e);
                let (ra, rb) = (find(&mut parent, root), find(&mut parent, e));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let keys: Vec<usize> = (0..n).map(|e| find(&mut parent, e)).collect();
        Ok(Self::from_keys(self.ground.clone(), &keys))
    }

    /// Coarsest common refinement (σ-field generated by both).
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.same_ground(other)?;
        let keys: Vec<(usize, usize)> = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(a, b)| (*a, *b))
            .collect();
        Ok(Self::from_keys(self.ground.clone(), &keys))
    }
}

/// Information-structure class, most restrictive first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsClass {
    Static,
    Classical,
    PartiallyNested,
    Nonclassical,
}

impl IsClass {
    pub fn as_str(self) -> &'static str {
        match self {
            IsClass::Static => "static",
            IsClass::Classical => "classical",
            IsClass::PartiallyNested => "partially_nested",
            IsClass::Nonclassical => "nonclassical",
        }
    }
}

/// Does the action of DM `k` change the kernel row of DM `i`? Exact
/// comparison of rows whose histories differ only in `uᵏ`.
pub fn affects(problem: &TeamProblem, k: usize, i: usize) -> Result<bool> {
    let n = problem.n_dms();
    if i >= n || k >= i {
        return Err(Error::IndexOutOfRange(format!(
            "affects({k}, {i}) needs k < i < {n}"
        )));
    }
    let radix = problem.history_radix(i);
    let axis = k + 1;
    let stride = radix.stride(axis);
    let n_u = radix.dims()[axis];
    let kernel = problem.kernel(i);
    let mut digits = vec![0; radix.dims().len()];
    for h in 0..radix.size() {
        radix.decode(h, &mut digits);
        if digits[axis] != 0 {
            continue;
        }
        let base = kernel.row(h);
        for d in 1..n_u {
            if kernel.row(h + d * stride) != base {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// All `(k, i)` with `uᵏ` affecting `yⁱ`, in lexicographic order.
pub fn precedence_edges(problem: &TeamProblem) -> Vec<(usize, usize)> {
    let n = problem.n_dms();
    let mut edges = Vec::new();
    for i in 1..n {
        for k in 0..i {
            if affects(problem, k, i).expect("indices in range") {
                edges.push((k, i));
            }
        }
    }
    edges
}

pub fn is_static(problem: &TeamProblem) -> bool {
    precedence_edges(problem).is_empty()
}

/// Measurement index per history row when every row of DM `k` is a point
/// mass; otherwise the first non-degenerate row.
fn measurement_map(problem: &TeamProblem, k: usize) -> std::result::Result<Vec<usize>, usize> {
    let kernel = problem.kernel(k);
    (0..kernel.n_rows())
        .map(|h| {
            let row = kernel.row(h);
            let mut support = row.iter().enumerate().filter(|(_, p)| **p > 0.0);
            match (support.next(), support.next()) {
                (Some((y, _)), None) => Ok(y),
                _ => Err(h),
            }
        })
        .collect()
}

/// Product of `Ω₀` and the actions that can feed later measurements; for a
/// static problem this is `Ω₀` alone.
pub fn exogenous_ground(problem: &TeamProblem) -> (String, MixedRadix) {
    let n = problem.n_dms();
    if is_static(problem) {
        return (
            problem.omega0().label().to_string(),
            MixedRadix::new(vec![problem.omega0().len()]),
        );
    }
    let mut name = problem.omega0().label().to_string();
    let mut dims = vec![problem.omega0().len()];
    for k in 0..n - 1 {
        name.push_str(&format!("×u{}", k + 1));
        dims.push(problem.dm(k).u.len());
    }
    (name, MixedRadix::new(dims))
}

/// Partition of [`exogenous_ground`] into preimages of DM `k`'s measurement.
pub fn sigma_field_of(problem: &TeamProblem, k: usize) -> Result<Partition> {
    if k >= problem.n_dms() {
        return Err(Error::IndexOutOfRange(format!("DM {k}")));
    }
    let map = measurement_map(problem, k)
        .map_err(|row| Error::NonDeterministicMeasurement { dm: k, row })?;
    let (name, ground) = exogenous_ground(problem);
    if ground.size() > JOINT_CAP {
        return Err(Error::CapExceeded {
            count: ground.size() as u128,
            cap: JOINT_CAP as u128,
        });
    }
    let mut digits = vec![0; ground.dims().len()];
    let mut keys = Vec::with_capacity(ground.size());
    for g in 0..ground.size() {
        ground.decode(g, &mut digits);
        let mut us = digits[1..].to_vec();
        us.resize(problem.n_dms(), 0);
        keys.push(map[problem.history_index(k, digits[0], &us)]);
    }
    Ok(Partition::from_keys(name, &keys))
}

/// Whether `yⁱ` determines `yᵏ` (and `uᵏ` when `with_action`) on the
/// determinized ground where each DM's measurement noise is adjoined to `ω₀`.
///
/// A stochastic `yᵏ` depends on noise that `yⁱ` never sees, so it cannot be
/// determined. Otherwise `yᵏ = gₖ(ω₀, u<k)` and it suffices that every
/// `yⁱ` value reachable from two histories maps them to the same key.
pub fn determines(problem: &TeamProblem, i: usize, k: usize, with_action: bool) -> bool {
    let Ok(gk) = measurement_map(problem, k) else {
        return false;
    };
    let radix = problem.history_radix(i);
    let kernel = problem.kernel(i);
    let n_uk = problem.dm(k).u.len();
    let mut seen = vec![usize::MAX; problem.dm(i).y.len()];
    let mut digits = vec![0; radix.dims().len()];
    for h in 0..radix.size() {
        radix.decode(h, &mut digits);
        let mut hk = digits[0];
        for t in 0..k {
            hk = hk * problem.dm(t).u.len() + digits[t + 1];
        }
        let mut key = gk[hk];
        if with_action {
            key = key * n_uk + digits[k + 1];
        }
        for (y, p) in kernel.row(h).iter().enumerate() {
            if *p > 0.0 {
                if seen[y] == usize::MAX {
                    seen[y] = key;
                } else if seen[y] != key {
                    return false;
                }
            }
        }
    }
    true
}

/// Every affects-edge `k → i` has `yⁱ` determining `yᵏ`.
pub fn is_partially_nested(problem: &TeamProblem) -> bool {
    precedence_edges(problem)
        .into_iter()
        .all(|(k, i)| determines(problem, i, k, false))
}

/// Every DM knows all earlier measurements and actions.
pub fn is_classical(problem: &TeamProblem) -> bool {
    let n = problem.n_dms();
    (1..n).all(|i| (0..i).all(|k| determines(problem, i, k, true)))
}

pub fn classify(problem: &TeamProblem) -> IsClass {
    if problem.n_dms() == 1 {
        IsClass::Classical
    } else if is_static(problem) {
        IsClass::Static
    } else if is_classical(problem) {
        IsClass::Classical
    } else if is_partially_nested(problem) {
        IsClass::PartiallyNested
    } else {
        IsClass::Nonclassical
    }
}

/// Outcome of an `X ⊥ Z | Y` test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiReport {
    pub independent: bool,
    /// Largest `|P(x,z|y) − P(x|y)P(z|y)|` over positive-mass `y`.
    pub worst: f64,
    /// `(x, y, z)` attaining `worst`.
    pub at: Option<(usize, usize, usize)>,
}

/// Tests `X ⊥ Z | Y` for a joint stored row-major over `X × Y × Z`.
pub fn test_conditional_independence(mass: &[f64], nx: usize, ny: usize, nz: usize) -> Result<CiReport> {
    if mass.len() != nx * ny * nz {
        return Err(Error::Dimension(format!(
            "joint has {} entries, expected {nx}×{ny}×{nz}",
            mass.len()
        )));
    }
    let at = |x: usize, y: usize, z: usize| mass[(x * ny + y) * nz + z];
    let mut worst = 0.0;
    let mut arg = None;
    for y in 0..ny {
        let mut px = vec![0.0; nx];
        let mut pz = vec![0.0; nz];
        for x in 0..nx {
            for z in 0..nz {
                let m = at(x, y, z);
                px[x] += m;
                pz[z] += m;
            }
        }
        let py: f64 = px.iter().sum();
        if py <= 0.0 {
            continue;
        }
        for x in 0..nx {
            for z in 0..nz {
                let gap = (at(x, y, z) / py - (px[x] / py) * (pz[z] / py)).abs();
                if gap > worst {
                    worst = gap;
                    arg = Some((x, y, z));
                }
            }
        }
    }
    Ok(CiReport {
        independent: worst <= IDENTITY,
        worst,
        at: arg,
    })
}

/// Collapses a joint over `(ω₀, y¹, u¹, …)` onto three derived coordinates
/// and tests `X ⊥ Z | Y`. Each closure receives the full digit vector.
pub fn ci_on_joint<FX, FY, FZ, KX, KY, KZ>(joint: &JointTable, fx: FX, fy: FY, fz: FZ) -> CiReport
where
    FX: Fn(&[usize]) -> KX,
    FY: Fn(&[usize]) -> KY,
    FZ: Fn(&[usize]) -> KZ,
    KX: Ord,
    KY: Ord,
    KZ: Ord,
{
    let radix = joint.radix();
    let mut digits = vec![0; radix.dims().len()];
    let mut xs = BTreeMap::new();
    let mut ys = BTreeMap::new();
    let mut zs = BTreeMap::new();
    let mut cells = Vec::new();
    for (i, &m) in joint.mass().iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        radix.decode(i, &mut digits);
        let nx = xs.len();
        let x = *xs.entry(fx(&digits)).or_insert(nx);
        let ny = ys.len();
        let y = *ys.entry(fy(&digits)).or_insert(ny);
        let nz = zs.len();
        let z = *zs.entry(fz(&digits)).or_insert(nz);
        cells.push((x, y, z, m));
    }
    let (nx, ny, nz) = (xs.len().max(1), ys.len().max(1), zs.len().max(1));
    let mut mass = vec![0.0; nx * ny * nz];
    for (x, y, z, m) in cells {
        mass[(x * ny + y) * nz + z] += m;
    }
    test_conditional_independence(&mass, nx, ny, nz).expect("dimensions built above")
}

/// One subsystem of a decoupling annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subsystem {
    /// DM controlling this subsystem.
    pub dm: usize,
    /// Subsystem state index for every `ω₀`.
    pub state: Vec<usize>,
    /// Private (non-shared) measurement component for every point of the
    /// DM's measurement space.
    pub measurement: Vec<usize>,
}

/// Subsystems plus the shared signal `z₀` as a function of `ω₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingAnnotation {
    pub subsystems: Vec<Subsystem>,
    pub shared: Vec<usize>,
}

impl DecouplingAnnotation {
    pub fn check(&self, problem: &TeamProblem) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedAnnotation(m));
        if self.subsystems.len() < 2 {
            return bad("at least two subsystems are needed".into());
        }
        if self.shared.len() != problem.omega0().len() {
            return bad(format!(
                "shared map has {} entries for {} exogenous points",
                self.shared.len(),
                problem.omega0().len()
            ));
        }
        let mut used = vec![false; problem.n_dms()];
        for (s, sub) in self.subsystems.iter().enumerate() {
            if sub.dm >= problem.n_dms() {
                return bad(format!("subsystem {s} names DM {} which does not exist", sub.dm));
            }
            if std::mem::replace(&mut used[sub.dm], true) {
                return bad(format!("DM {} controls two subsystems", sub.dm));
            }
            if sub.state.len() != problem.omega0().len() {
                return bad(format!("state map of subsystem {s} has wrong length"));
            }
            if sub.measurement.len() != problem.dm(sub.dm).y.len() {
                return bad(format!("measurement map of subsystem {s} has wrong length"));
            }
        }
        Ok(())
    }
}

/// Result of the decoupling check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingReport {
    pub decoupled: bool,
    /// Number of (profile, subsystem) conditional-independence tests run.
    pub tests: usize,
    /// First failing `(profile ordinal, subsystem, worst gap)`.
    pub failure: Option<(usize, usize, f64)>,
}

/// Checks `xⁱ ↔ yⁱ ↔ (xʲ, z₀, yʲ; j ≠ i)` for every subsystem on the exact
/// joint induced by each deterministic profile (one-stage setting, so no
/// past actions enter the middle term).
pub fn is_stochastically_decoupled(
    problem: &TeamProblem,
    annotation: &DecouplingAnnotation,
    cap: u128,
) -> Result<DecouplingReport> {
    annotation.check(problem)?;
    let profiles = crate::strategic::enumerate_profiles(problem, cap)?;
    let mut tests = 0;
    for (p, profile) in profiles.iter().enumerate() {
        let joint = problem.induced_joint(profile)?;
        for s in 0..annotation.subsystems.len() {
            tests += 1;
            let report = decoupling_ci(&joint, annotation, s);
            if !report.independent {
                return Ok(DecouplingReport {
                    decoupled: false,
                    tests,
                    failure: Some((p, s, report.worst)),
                });
            }
        }
    }
    Ok(DecouplingReport {
        decoupled: true,
        tests,
        failure: None,
    })
}

fn decoupling_ci(joint: &JointTable, annotation: &DecouplingAnnotation, s: usize) -> CiReport {
    let me = &annotation.subsystems[s];
    let y_axis = |dm: usize| 1 + 2 * dm;
    ci_on_joint(
        joint,
        |d| me.state[d[0]],
        |d| me.measurement[d[y_axis(me.dm)]],
        |d| {
            let mut key = vec![annotation.shared[d[0]]];
            for (j, other) in annotation.subsystems.iter().enumerate() {
                if j != s {
                    key.push(other.state[d[0]]);
                    key.push(other.measurement[d[y_axis(other.dm)]]);
                }
            }
            key
        },
    )
}

/// Checks `X ⊥ Z | Y` on the joint of one profile; exposed for reports.
pub fn decoupling_ci_for(
    problem: &TeamProblem,
    annotation: &DecouplingAnnotation,
    profile: &DeterministicProfile,
    subsystem: usize,
) -> Result<CiReport> {
    annotation.check(problem)?;
    let joint = problem.induced_joint(profile)?;
    Ok(decoupling_ci(&joint, annotation, subsystem))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(blocks: &[&[usize]]) -> Partition {
        let blocks: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
        let n = blocks.iter().map(|b| b.len()).sum();
        Partition::from_blocks("g", n, &blocks).unwrap()
    }

    #[test]
    fn canonical_order_is_by_least_element() {
        let a = Partition::from_keys("g", &["b", "a", "b", "c"]);
        assert_eq!(a.blocks(), vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(a, p(&[&[3], &[1], &[2, 0]]));
    }

    #[test]
    fn meet_merges_overlapping_chains() {
        let a = p(&[&[0, 1], &[2, 3], &[4]]);
        let b = p(&[&[0], &[1, 2], &[3], &[4]]);
        assert_eq!(a.meet(&b).unwrap(), p(&[&[0, 1, 2, 3], &[4]]));
        assert_eq!(a.join(&b).unwrap(), p(&[&[0], &[1], &[2], &[3], &[4]]));
    }

    #[test]
    fn ground_mismatch_is_an_error() {
        let a = Partition::trivial("g", 3);
        let b = Partition::trivial("h", 3);
        assert!(matches!(a.meet(&b), Err(Error::GroundMismatch { .. })));
        let c = Partition::trivial("g", 4);
        assert!(a.join(&c).is_err());
    }

    #[test]
    fn from_blocks_rejects_overlap_and_gaps() {
        assert!(Partition::from_blocks("g", 3, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_blocks("g", 3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_blocks("g", 2, &[vec![0, 1], vec![]]).is_err());
    }

    #[test]
    fn xor_breaks_conditional_independence() {
        // X, Z independent bits, Y = X xor Z.
        let mut m = vec![0.0; 8];
        for x in 0..2 {
            for z in 0..2 {
                m[(x * 2 + (x ^ z)) * 2 + z] = 0.25;
            }
        }
        let r = test_conditional_independence(&m, 2, 2, 2).unwrap();
        assert!(!r.independent);
        assert!((r.worst - 0.25).abs() < 1e-15);
    }
}
