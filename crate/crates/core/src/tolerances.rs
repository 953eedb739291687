//! Numeric tolerances used across the crate. Reports embed these values.

/// Allowed deviation of an input mass vector's sum from one.
pub const INPUT_NORMALIZATION: f64 = 1e-9;

/// Identity checks on internally computed probabilities (marginals,
/// conditionals, round trips).
pub const IDENTITY: f64 = 1e-12;

/// Static reduction must preserve expected cost to this absolute accuracy.
pub const REDUCTION_EQUIVALENCE: f64 = 1e-10;

/// Slack in the lattice midpoint convexity test.
pub const MIDPOINT_CONVEXITY: f64 = 1e-9;

/// Cross-method agreement of optimal values (brute force vs vertex scan).
pub const SOLVER_AGREEMENT: f64 = 1e-9;

/// Central finite-difference step for stationarity checks.
pub const FD_STEP: f64 = 1e-5;

/// A gradient at or below this norm counts as stationary.
pub const STATIONARITY: f64 = 1e-6;

/// Krainak inner products at or above `-KRAINAK` are not refutations.
pub const KRAINAK: f64 = 1e-8;

/// Relative slack used when comparing costs for argmin ties.
pub const TIE: f64 = 1e-12;

/// Default cap on enumerated deterministic profiles.
pub const DEFAULT_CAP: u128 = 1_000_000;

/// Largest dense joint table we agree to materialize.
pub const JOINT_CAP: usize = 20_000_000;

/// All constants by name, for report headers.
pub fn all() -> Vec<(&'static str, f64)> {
    vec![
        ("input_normalization", INPUT_NORMALIZATION),
        ("identity", IDENTITY),
        ("reduction_equivalence", REDUCTION_EQUIVALENCE),
        ("midpoint_convexity", MIDPOINT_CONVEXITY),
        ("solver_agreement", SOLVER_AGREEMENT),
        ("fd_step", FD_STEP),
        ("stationarity", STATIONARITY),
        ("krainak", KRAINAK),
        ("tie", TIE),
        ("default_cap", DEFAULT_CAP as f64),
    ]
}
