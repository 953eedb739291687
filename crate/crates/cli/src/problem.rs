//! Problem files: a JSON document with named point lists, a prior, nested
//! kernel and cost tables, and optional annotations.
//!
//! ```json
//! {
//!   "spaces": { "w": ["a", "b"], "y1": ["0", "1"], "u1": [0.0, 1.0] },
//!   "omega0": "w",
//!   "dms": [ { "y": "y1", "u": "u1" } ],
//!   "prior": { "a": 0.5, "b": 0.5 },
//!   "kernels": [ { "a": { "0": 1 }, "b": { "1": 1 } } ],
//!   "cost": { "table": { "a": { "0": 0, "1": 1 }, "b": { "*": 2 } } }
//! }
//! ```
//!
//! The kernel of DM `t` is nested by `ω₀, u¹, …, uᵗ⁻¹` and ends in a map
//! from measurement labels to masses; the cost table is nested by
//! `ω₀, u¹, …, uᴺ`. At any level the key `"*"` supplies every point not
//! listed explicitly. Missing measurement labels and prior entries are zero.

use crate::locate::{locate, render, Seg};
use decteam::infostruct::{DecouplingAnnotation, Subsystem};
use decteam::model::{CostTable, DecisionMaker, MeasurementKernel, Violation};
use decteam::{FiniteSpace, TeamProblem};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::fmt;

/// A problem or input error tied to a place in a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub file: String,
    pub at: Option<(usize, usize)>,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.at {
            Some((line, col)) => write!(f, "{}:{line}:{col}: ", self.file)?,
            None => write!(f, "{}: ", self.file)?,
        }
        if !self.path.is_empty() {
            write!(f, "at {}: ", self.path)?;
        }
        write!(f, "{}", self.message)
    }
}

/// Error collected during conversion, located afterwards.
struct Issue {
    path: Vec<Seg>,
    message: String,
}

fn issue(path: &[Seg], message: impl Into<String>) -> Issue {
    Issue {
        path: path.to_vec(),
        message: message.into(),
    }
}

fn with(path: &[Seg], seg: Seg) -> Vec<Seg> {
    let mut p = path.to_vec();
    p.push(seg);
    p
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Points {
    Labels(Vec<String>),
    Values(Vec<f64>),
    Both { points: Vec<String>, values: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DmRef {
    y: String,
    u: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    spaces: BTreeMap<String, Points>,
    omega0: String,
    dms: Vec<DmRef>,
    prior: BTreeMap<String, f64>,
    kernels: Vec<Value>,
    cost: Value,
    #[serde(default)]
    annotations: Option<RawAnnotations>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnotations {
    #[serde(default)]
    decoupling: Option<RawDecoupling>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecoupling {
    subsystems: Vec<RawSubsystem>,
    shared: BTreeMap<String, usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubsystem {
    dm: usize,
    state: BTreeMap<String, usize>,
    measurement: BTreeMap<String, usize>,
}

/// A parsed and validated problem file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub problem: TeamProblem,
    pub decoupling: Option<DecouplingAnnotation>,
}

/// Parses `text` (named `file` in diagnostics).
pub fn parse(file: &str, text: &str) -> Result<Loaded, Vec<Diagnostic>> {
    let raw: RawFile = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic {
            file: file.to_string(),
            at: (e.line() > 0).then(|| (e.line(), e.column())),
            path: String::new(),
            message: e.to_string(),
        }]
    })?;
    build(raw).map_err(|issues| {
        issues
            .into_iter()
            .map(|i| Diagnostic {
                file: file.to_string(),
                at: locate(text, &i.path),
                path: render(&i.path),
                message: i.message,
            })
            .collect()
    })
}

fn space(name: &str, points: &Points) -> Result<FiniteSpace, Issue> {
    let path = [Seg::key("spaces"), Seg::key(name)];
    let made = match points {
        Points::Labels(l) => FiniteSpace::new(name, l.clone()),
        Points::Values(v) => FiniteSpace::numeric(name, v.clone()),
        Points::Both { points, values } => {
            FiniteSpace::new(name, points.clone()).and_then(|s| s.with_values(values.clone()))
        }
    };
    let s = made.map_err(|e| issue(&path, e.to_string()))?;
    if let Some(bad) = s.points().iter().find(|p| p.as_str() == "*") {
        return Err(issue(&path, format!("point label `{bad}` is reserved")));
    }
    Ok(s)
}

/// Dense table over `axes` read from nested objects; `leaf` converts the
/// innermost values.
fn nested<T: Clone>(
    value: &Value,
    axes: &[&FiniteSpace],
    path: &[Seg],
    leaf: &dyn Fn(&Value, &[Seg]) -> Result<T, Issue>,
    issues: &mut Vec<Issue>,
) -> Option<Vec<T>> {
    let size: usize = axes.iter().map(|a| a.len()).product();
    let mut out: Vec<Option<T>> = vec![None; size];
    fill(value, axes, 0, 0, path, leaf, &mut out, issues);
    let missing: Vec<usize> = (0..size).filter(|&i| out[i].is_none()).collect();
    if let Some(&first) = missing.first() {
        let mut digits = Vec::with_capacity(axes.len());
        let mut rest = first;
        for a in axes.iter().rev() {
            digits.push(a.point(rest % a.len()).to_string());
            rest /= a.len();
        }
        digits.reverse();
        let more = if missing.len() > 1 {
            format!(" and {} more", missing.len() - 1)
        } else {
            String::new()
        };
        issues.push(issue(path, format!("no entry for ({}){more}", digits.join(", "))));
        return None;
    }
    Some(out.into_iter().map(|x| x.expect("checked")).collect())
}

#[allow(clippy::too_many_arguments)]
fn fill<T: Clone>(
    value: &Value,
    axes: &[&FiniteSpace],
    depth: usize,
    offset: usize,
    path: &[Seg],
    leaf: &dyn Fn(&Value, &[Seg]) -> Result<T, Issue>,
    out: &mut [Option<T>],
    issues: &mut Vec<Issue>,
) {
    if depth == axes.len() {
        match leaf(value, path) {
            Ok(v) => out[offset] = Some(v),
            Err(e) => issues.push(e),
        }
        return;
    }
    let Some(obj) = value.as_object() else {
        issues.push(issue(path, format!("expected an object keyed by points of `{}`", axes[depth].label())));
        return;
    };
    let stride: usize = axes[depth + 1..].iter().map(|a| a.len()).product();
    let axis = axes[depth];
    // The wildcard first, so explicit keys override it.
    if let Some(v) = obj.get("*") {
        for i in 0..axis.len() {
            fill(v, axes, depth + 1, offset + i * stride, &with(path, Seg::key("*")), leaf, out, issues);
        }
    }
    for (k, v) in obj {
        if k == "*" {
            continue;
        }
        let p = with(path, Seg::key(k.as_str()));
        match axis.index_of(k) {
            Some(i) => fill(v, axes, depth + 1, offset + i * stride, &p, leaf, out, issues),
            None => issues.push(issue(&p, format!("`{k}` is not a point of `{}`", axis.label()))),
        }
    }
}

fn number(v: &Value, path: &[Seg]) -> Result<f64, Issue> {
    v.as_f64().ok_or_else(|| issue(path, "expected a number"))
}

fn build(raw: RawFile) -> Result<Loaded, Vec<Issue>> {
    let mut issues = Vec::new();
    let mut spaces = BTreeMap::new();
    for (name, pts) in &raw.spaces {
        match space(name, pts) {
            Ok(s) => {
                spaces.insert(name.clone(), s);
            }
            Err(e) => issues.push(e),
        }
    }
    if !issues.is_empty() {
        return Err(issues);
    }
    let lookup = |name: &str, path: Vec<Seg>| {
        spaces
            .get(name)
            .cloned()
            .ok_or_else(|| issue(&path, format!("unknown space `{name}`")))
    };
    let omega0 = lookup(&raw.omega0, vec![Seg::key("omega0")]).map_err(|e| vec![e])?;
    let mut dms = Vec::new();
    for (t, d) in raw.dms.iter().enumerate() {
        let at = |f: &str| vec![Seg::key("dms"), Seg::Index(t), Seg::key(f)];
        match (lookup(&d.y, at("y")), lookup(&d.u, at("u"))) {
            (Ok(y), Ok(u)) => dms.push(DecisionMaker::new(y, u)),
            (a, b) => issues.extend(a.err().into_iter().chain(b.err())),
        }
    }
    if raw.dms.is_empty() {
        issues.push(issue(&[Seg::key("dms")], "at least one decision maker is required"));
    }
    if !issues.is_empty() {
        return Err(issues);
    }

    let mut prior = vec![0.0; omega0.len()];
    for (label, mass) in &raw.prior {
        match omega0.index_of(label) {
            Some(i) => prior[i] = *mass,
            None => issues.push(issue(
                &[Seg::key("prior"), Seg::key(label.as_str())],
                format!("`{label}` is not a point of `{}`", omega0.label()),
            )),
        }
    }

    if raw.kernels.len() != dms.len() {
        issues.push(issue(
            &[Seg::key("kernels")],
            format!("{} kernels given for {} decision makers", raw.kernels.len(), dms.len()),
        ));
        return Err(issues);
    }
    let mut kernels = Vec::new();
    for (t, value) in raw.kernels.iter().enumerate() {
        let mut axes = vec![&omega0];
        axes.extend(dms[..t].iter().map(|d| &d.u));
        let y = &dms[t].y;
        let row = |v: &Value, path: &[Seg]| -> Result<Vec<f64>, Issue> {
            let obj = v
                .as_object()
                .ok_or_else(|| issue(path, format!("expected an object keyed by points of `{}`", y.label())))?;
            let mut r = vec![0.0; y.len()];
            for (k, m) in obj {
                let p = with(path, Seg::key(k.as_str()));
                let i = y
                    .index_of(k)
                    .ok_or_else(|| issue(&p, format!("`{k}` is not a point of `{}`", y.label())))?;
                r[i] = number(m, &p)?;
            }
            Ok(r)
        };
        let path = [Seg::key("kernels"), Seg::Index(t)];
        if let Some(rows) = nested(value, &axes, &path, &row, &mut issues) {
            kernels.push(MeasurementKernel::new(t, y.len(), rows.concat()));
        }
    }

    let mut cost_axes = vec![&omega0];
    cost_axes.extend(dms.iter().map(|d| &d.u));
    let cost = read_cost(&raw.cost, &omega0, &dms, &cost_axes, &mut issues);
    if !issues.is_empty() {
        return Err(issues);
    }
    let cost = cost.expect("no issues");

    let unchecked = TeamProblem::from_parts_unchecked(omega0.clone(), dms.clone(), prior.clone(), kernels.clone(), cost.clone());
    let violations = unchecked.validate();
    if !violations.is_empty() {
        return Err(violations.iter().map(|v| locate_violation(&unchecked, &raw.cost, v)).collect());
    }
    let problem = TeamProblem::new(omega0, dms, prior, kernels, cost).map_err(|e| vec![issue(&[], e.to_string())])?;

    let decoupling = match raw.annotations.and_then(|a| a.decoupling) {
        Some(d) => Some(read_decoupling(&problem, &d)?),
        None => None,
    };
    Ok(Loaded { problem, decoupling })
}

fn read_cost(
    value: &Value,
    omega0: &FiniteSpace,
    dms: &[DecisionMaker],
    axes: &[&FiniteSpace],
    issues: &mut Vec<Issue>,
) -> Option<CostTable> {
    let path = [Seg::key("cost")];
    let Some(obj) = value.as_object() else {
        issues.push(issue(&path, "expected {\"table\": …}, {\"constant\": c} or {\"family\": …}"));
        return None;
    };
    if let Some(t) = obj.get("table") {
        return nested(t, axes, &with(&path, Seg::key("table")), &number, issues).map(CostTable::new);
    }
    if let Some(c) = obj.get("constant") {
        let size: usize = axes.iter().map(|a| a.len()).product();
        return match number(c, &with(&path, Seg::key("constant"))) {
            Ok(c) => Some(CostTable::new(vec![c; size])),
            Err(e) => {
                issues.push(e);
                None
            }
        };
    }
    if let Some(f) = obj.get("family") {
        let fam_path = with(&path, Seg::key("family"));
        let k = match obj.get("k").map(|k| number(k, &with(&path, Seg::key("k")))) {
            Some(Ok(k)) => k,
            Some(Err(e)) => {
                issues.push(e);
                return None;
            }
            None => {
                issues.push(issue(&path, "family cost needs a parameter `k`"));
                return None;
            }
        };
        let numeric = |s: &FiniteSpace| s.values().map(|v| v.to_vec());
        let (Some(x), true) = (numeric(omega0), dms.len() == 2) else {
            issues.push(issue(&fam_path, "quadratic families need a numeric ω₀ space and two decision makers"));
            return None;
        };
        let (Some(u1), Some(u2)) = (numeric(&dms[0].u), numeric(&dms[1].u)) else {
            issues.push(issue(&fam_path, "quadratic families need numeric action spaces"));
            return None;
        };
        let c: fn(f64, f64, f64, f64) -> f64 = match f.as_str() {
            Some("witsenhausen") => |k, x, a, b| k * k * (x - a).powi(2) + (a - b).powi(2),
            Some("signaling") => |k, x, a, b| k * k * a * a + (x - b).powi(2),
            _ => {
                issues.push(issue(&fam_path, "known families: \"witsenhausen\", \"signaling\""));
                return None;
            }
        };
        let mut table = Vec::with_capacity(x.len() * u1.len() * u2.len());
        for &xv in &x {
            for &a in &u1 {
                for &b in &u2 {
                    table.push(c(k, xv, a, b));
                }
            }
        }
        return Some(CostTable::new(table));
    }
    issues.push(issue(&path, "expected one of `table`, `constant`, `family`"));
    None
}

/// Path of the nested entry addressing `digits` (point labels per axis).
fn entry_path(root: Vec<Seg>, labels: Vec<String>) -> Vec<Seg> {
    let mut p = root;
    p.extend(labels.into_iter().map(Seg::Key));
    p
}

fn locate_violation(p: &TeamProblem, cost: &Value, v: &Violation) -> Issue {
    let history_labels = |dm: usize, history: &str| -> Option<Vec<String>> {
        let rows = p.history_radix(dm).size();
        let h = (0..rows).find(|&h| p.history_label(dm, h) == history)?;
        let digits = p.history_radix(dm).digits(h);
        let mut out = vec![p.omega0().point(digits[0]).to_string()];
        out.extend(digits[1..].iter().enumerate().map(|(j, d)| p.dm(j).u.point(*d).to_string()));
        Some(out)
    };
    let kernel_root = |dm: usize| vec![Seg::key("kernels"), Seg::Index(dm)];
    let path = match v {
        Violation::PriorEntry { point, .. } => vec![Seg::key("prior"), Seg::key(point.as_str())],
        Violation::PriorSum { .. } | Violation::PriorLength { .. } => vec![Seg::key("prior")],
        Violation::KernelEntry { dm, history, y, .. } => match history_labels(*dm, history) {
            Some(l) => {
                let mut p = entry_path(kernel_root(*dm), l);
                p.push(Seg::key(y.as_str()));
                p
            }
            None => kernel_root(*dm),
        },
        Violation::KernelRowSum { dm, history, .. } => match history_labels(*dm, history) {
            Some(l) => entry_path(kernel_root(*dm), l),
            None => kernel_root(*dm),
        },
        Violation::CostEntry { key, .. } if cost.get("table").is_some() => {
            let i = (0..p.cost_radix().size()).find(|&i| p.cost_label(i) == *key);
            match i {
                Some(i) => {
                    let d = p.cost_radix().digits(i);
                    let mut l = vec![p.omega0().point(d[0]).to_string()];
                    l.extend(d[1..].iter().enumerate().map(|(j, x)| p.dm(j).u.point(*x).to_string()));
                    entry_path(vec![Seg::key("cost"), Seg::key("table")], l)
                }
                None => vec![Seg::key("cost")],
            }
        }
        Violation::CostEntry { .. } | Violation::CostShape { .. } => vec![Seg::key("cost")],
        Violation::NoDecisionMakers => vec![Seg::key("dms")],
        Violation::KernelCount { .. } | Violation::KernelDm { .. } | Violation::KernelShape { .. } => {
            vec![Seg::key("kernels")]
        }
    };
    issue(&path, v.to_string())
}

fn read_decoupling(p: &TeamProblem, d: &RawDecoupling) -> Result<DecouplingAnnotation, Vec<Issue>> {
    let root = [Seg::key("annotations"), Seg::key("decoupling")];
    let mut issues = Vec::new();
    let by_label = |map: &BTreeMap<String, usize>, space: &FiniteSpace, path: Vec<Seg>, issues: &mut Vec<Issue>| {
        let mut out = vec![0; space.len()];
        for (i, point) in space.points().iter().enumerate() {
            match map.get(point) {
                Some(v) => out[i] = *v,
                None => issues.push(issue(&path, format!("no entry for `{point}`"))),
            }
        }
        for k in map.keys() {
            if space.index_of(k).is_none() {
                issues.push(issue(&with(&path, Seg::key(k.as_str())), format!("`{k}` is not a point of `{}`", space.label())));
            }
        }
        out
    };
    let shared = by_label(&d.shared, p.omega0(), with(&root, Seg::key("shared")), &mut issues);
    let mut subsystems = Vec::new();
    for (i, s) in d.subsystems.iter().enumerate() {
        let sp = [root.to_vec(), vec![Seg::key("subsystems"), Seg::Index(i)]].concat();
        if s.dm >= p.n_dms() {
            issues.push(issue(&with(&sp, Seg::key("dm")), format!("no decision maker with index {}", s.dm)));
            continue;
        }
        let state = by_label(&s.state, p.omega0(), with(&sp, Seg::key("state")), &mut issues);
        let measurement = by_label(&s.measurement, &p.dm(s.dm).y, with(&sp, Seg::key("measurement")), &mut issues);
        subsystems.push(Subsystem {
            dm: s.dm,
            state,
            measurement,
        });
    }
    if !issues.is_empty() {
        return Err(issues);
    }
    let a = DecouplingAnnotation { subsystems, shared };
    a.check(p).map_err(|e| vec![issue(&root, e.to_string())])?;
    Ok(a)
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

fn space_json(s: &FiniteSpace) -> Value {
    match s.values() {
        Some(v) if FiniteSpace::numeric("", v.to_vec()).is_ok_and(|n| n.points() == s.points()) => json!(v),
        Some(v) => json!({ "points": s.points(), "values": v }),
        None => json!(s.points()),
    }
}

/// Nested object over `axes` whose leaves come from `leaf(flat index)`.
fn nest(axes: &[&FiniteSpace], offset: usize, leaf: &dyn Fn(usize) -> Value) -> Value {
    let Some((axis, rest)) = axes.split_first() else {
        return leaf(offset);
    };
    let stride: usize = rest.iter().map(|a| a.len()).product();
    let mut m = Map::new();
    for (i, point) in axis.points().iter().enumerate() {
        m.insert(point.clone(), nest(rest, offset + i * stride, leaf));
    }
    Value::Object(m)
}

/// Problem file for `problem`; space names are made unique when labels
/// collide.
pub fn export(problem: &TeamProblem, decoupling: Option<&DecouplingAnnotation>) -> Value {
    let mut spaces = Map::new();
    let name_of = |s: &FiniteSpace, spaces: &mut Map<String, Value>| {
        let mut name = s.label().to_string();
        let mut n = 2;
        while spaces.contains_key(&name) {
            name = format!("{}_{n}", s.label());
            n += 1;
        }
        spaces.insert(name.clone(), space_json(s));
        name
    };
    let omega0 = name_of(problem.omega0(), &mut spaces);
    let dms: Vec<Value> = problem
        .dms()
        .iter()
        .map(|d| {
            let y = name_of(&d.y, &mut spaces);
            let u = name_of(&d.u, &mut spaces);
            json!({ "y": y, "u": u })
        })
        .collect();
    let mut prior = Map::new();
    for (i, m) in problem.prior().iter().enumerate() {
        if *m > 0.0 {
            prior.insert(problem.omega0().point(i).to_string(), json!(m));
        }
    }
    let kernels: Vec<Value> = (0..problem.n_dms())
        .map(|t| {
            let mut axes = vec![problem.omega0()];
            axes.extend(problem.dms()[..t].iter().map(|d| &d.u));
            let k = problem.kernel(t);
            let y = &problem.dm(t).y;
            nest(&axes, 0, &|h| {
                let mut row = Map::new();
                for (j, m) in k.row(h).iter().enumerate() {
                    if *m > 0.0 {
                        row.insert(y.point(j).to_string(), json!(m));
                    }
                }
                Value::Object(row)
            })
        })
        .collect();
    let mut axes = vec![problem.omega0()];
    axes.extend(problem.dms().iter().map(|d| &d.u));
    let cost = nest(&axes, 0, &|i| json!(problem.cost().values()[i]));
    let mut file = json!({
        "spaces": spaces,
        "omega0": omega0,
        "dms": dms,
        "prior": prior,
        "kernels": kernels,
        "cost": { "table": cost },
    });
    if let Some(a) = decoupling {
        let by_label = |values: &[usize], s: &FiniteSpace| -> Value {
            let mut m = Map::new();
            for (i, v) in values.iter().enumerate() {
                m.insert(s.point(i).to_string(), json!(v));
            }
            Value::Object(m)
        };
        let subsystems: Vec<Value> = a
            .subsystems
            .iter()
            .map(|s| {
                json!({
                    "dm": s.dm,
                    "state": by_label(&s.state, problem.omega0()),
                    "measurement": by_label(&s.measurement, &problem.dm(s.dm).y),
                })
            })
            .collect();
        file["annotations"] = json!({
            "decoupling": { "subsystems": subsystems, "shared": by_label(&a.shared, problem.omega0()) }
        });
    }
    file
}
