use thiserror::Error;

use crate::infostruct::IsClass;
use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid team problem: {}", summarize(.0))]
    Invalid(Vec<Violation>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("enumeration needs {count} items, cap is {cap}")]
    CapExceeded { count: u128, cap: u128 },

    #[error("measurement of DM {dm} is not deterministic (history row {row})")]
    NonDeterministicMeasurement { dm: usize, row: usize },

    #[error("partitions live on different ground sets ({left} vs {right})")]
    GroundMismatch { left: String, right: String },

    #[error("absolute continuity fails for DM {dm}: p(y={y} | {history}) > 0 but Q(y) = 0")]
    AbsoluteContinuity { dm: usize, y: String, history: String },

    #[error("information structure is {0:?}, not classical")]
    NotClassical(IsClass),

    #[error("measure is not a member of the required set: {0}")]
    NonMember(String),

    #[error("action space of DM {dm} has no uniform numeric embedding")]
    NonNumericActions { dm: usize },

    #[error("kernel of DM {dm} depends on earlier actions, so it cannot serve as its own reference")]
    ActionDependentKernel { dm: usize },

    #[error("problem is not static")]
    NotStatic,

    #[error("malformed annotation: {0}")]
    MalformedAnnotation(String),

    #[error("invalid quadrature specification: {0}")]
    InvalidQuadrature(String),
}

fn summarize(v: &[Violation]) -> String {
    match v {
        [] => "no violations".into(),
        [one] => one.to_string(),
        [first, rest @ ..] => format!("{first} (and {} more)", rest.len()),
    }
}
