//! Simulator and analyzer for the two-party quantum gambling protocol.
//!
//! The numeric modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the CLI and the
//! acceptance suite use.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod fluxmodel;
pub mod optimize;
pub mod protocol;
pub mod qstate;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type QubitState = qstate::QubitState<f64>;
pub type UnitaryMatrix = qstate::UnitaryMatrix<f64>;
pub type ProjectionResult = qstate::ProjectionResult<f64>;
pub type AliceStrategy = protocol::AliceStrategy<f64>;
pub type BobStrategy = protocol::BobStrategy<f64>;
pub type GameRules = protocol::GameRules<f64>;
pub type PayoffBreakdown = protocol::PayoffBreakdown<f64>;
pub type RoundOutcome = protocol::RoundOutcome<f64>;
pub type SimulationSummary = protocol::SimulationSummary<f64>;
pub type RestrictedStrategy = equilibrium::RestrictedStrategy<f64>;
pub type SearchOptions = equilibrium::SearchOptions<f64>;
pub type EquilibriumResult = equilibrium::EquilibriumResult<f64>;
pub type SweepRow = equilibrium::SweepRow<f64>;
pub type Circuit = synth::Circuit<f64>;
pub type GateOp = synth::GateOp<f64>;
pub type RingSpec = fluxmodel::RingSpec<f64>;
pub type TwoLevelParams = fluxmodel::TwoLevelParams<f64>;

pub type QubitStateF32 = qstate::QubitState<f32>;
pub type AliceStrategyF32 = protocol::AliceStrategy<f32>;
pub type BobStrategyF32 = protocol::BobStrategy<f32>;
pub type GameRulesF32 = protocol::GameRules<f32>;
