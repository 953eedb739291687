//! Sequential decentralized stochastic teams on finite spaces.
//!
//! A [`TeamProblem`] follows the intrinsic model: an exogenous variable
//! `ω₀` with a prior, one measurement kernel per decision maker (DM) that may
//! depend on `ω₀` and the actions of earlier DMs, and a nonnegative cost on
//! `(ω₀, u¹, …, uᴺ)`. Everything downstream is exact finite summation.
//!
//! * [`model`]: spaces, kernels, profiles, expected cost, induced joints.
//! * [`infostruct`]: partitions (σ-fields), precedence, classification,
//!   conditional independence and stochastic decoupling.
//! * [`strategic`]: strategic measures and membership in `L_A`, `L_R`, `L_M`.
//! * [`reduction`]: static reduction by density ratios.
//! * [`solvers`]: brute force, best response, person-by-person sweeps,
//!   vertex scan over mixtures, stationarity for quadratic teams.
//! * [`convexity`]: meet/join conditional-cost certificates.
//! * [`gallery`]: named constructions (Witsenhausen, signaling, square wave,
//!   example 1, decoupled subsystems).

pub mod convexity;
pub mod error;
pub mod gallery;
pub mod infostruct;
pub mod model;
pub mod quadrature;
pub mod reduction;
pub mod solvers;
pub mod space;
pub mod strategic;
pub mod tolerances;

pub use error::{Error, Result};
pub use model::{
    CostTable, DecisionMaker, DeterministicProfile, JointTable, MeasurementKernel,
    RandomizedProfile, Strategy, TeamProblem, Violation,
};
pub use space::{FiniteSpace, MixedRadix, Pmf};
