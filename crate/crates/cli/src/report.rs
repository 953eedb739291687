//! Report envelope shared by every subcommand.

use decteam::{DeterministicProfile, TeamProblem};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "decteam";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// What a report is about: the command line and the input it read.
pub struct Context {
    pub command: String,
    pub input: String,
    pub digest: String,
    pub seed: u64,
}

pub fn tolerances() -> Value {
    let mut m = Map::new();
    for (name, value) in decteam::tolerances::all() {
        m.insert(name.to_string(), json!(value));
    }
    Value::Object(m)
}

pub fn envelope(ctx: &Context, result: Value) -> Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "command": ctx.command,
        "input": { "name": ctx.input, "sha256": ctx.digest },
        "seed": ctx.seed,
        "tolerances": tolerances(),
        "result": result,
    })
}

/// A deterministic profile as one list of `[y, u]` label pairs per DM.
pub fn profile_json(problem: &TeamProblem, d: &DeterministicProfile) -> Value {
    let maps: Vec<Value> = d
        .maps()
        .iter()
        .enumerate()
        .map(|(t, map)| {
            let dm = problem.dm(t);
            let pairs: Vec<Value> = map
                .iter()
                .enumerate()
                .map(|(y, u)| json!([dm.y.point(y), dm.u.point(*u)]))
                .collect();
            Value::Array(pairs)
        })
        .collect();
    Value::Array(maps)
}

/// Inverse of [`profile_json`]; every measurement must be mapped.
pub fn profile_from_json(problem: &TeamProblem, v: &Value) -> Result<DeterministicProfile, String> {
    let maps = v.as_array().ok_or("a profile is a list with one entry per decision maker")?;
    if maps.len() != problem.n_dms() {
        return Err(format!("profile has {} maps for {} decision makers", maps.len(), problem.n_dms()));
    }
    let mut out = Vec::new();
    for (t, m) in maps.iter().enumerate() {
        let dm = problem.dm(t);
        let mut map = vec![None; dm.y.len()];
        for pair in m.as_array().ok_or(format!("map of DM {} must be a list of [y, u] pairs", t + 1))? {
            let (y, u) = match pair.as_array().map(|p| p.as_slice()) {
                Some([Value::String(y), Value::String(u)]) => (y, u),
                _ => return Err(format!("map of DM {}: expected [y, u] label pairs", t + 1)),
            };
            let yi = dm.y.index_of(y).ok_or(format!("`{y}` is not a point of `{}`", dm.y.label()))?;
            let ui = dm.u.index_of(u).ok_or(format!("`{u}` is not a point of `{}`", dm.u.label()))?;
            map[yi] = Some(ui);
        }
        let map: Option<Vec<usize>> = map.into_iter().collect();
        out.push(map.ok_or(format!("map of DM {} leaves a measurement unmapped", t + 1))?);
    }
    Ok(DeterministicProfile::new(out))
}
