//! Budget-optimal payments for justified mechanisms.
//!
//! Given finite type domains and an option rule, the library computes the
//! payments that minimise the budget deficit subject to dominant-strategy
//! incentive compatibility and individual rationality, by reducing those
//! constraints to shortest paths on per-agent type graphs.

pub mod audit;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod json;
pub mod model;
pub mod redistribution;
pub mod rules;
pub mod spm;
pub mod value;
pub mod vcg;

pub use error::{MechError, Result};
pub use model::{Environment, MechanismOutcome, OptionId, OptionSpace, TypeProfile, Valuation};
pub use rules::{AffineWeights, OptionRule, RuleFamily, TieBreak};
pub use spm::{compute_payments, run_mechanism, PaymentEngine, PaymentMode, PaymentRule};
pub use value::Value;
pub use vcg::WeightedPivot;
