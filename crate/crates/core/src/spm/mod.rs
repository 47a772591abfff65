//! The shortest-path mechanism.
//!
//! For each agent `i` and profile `v`, the tightest payment compatible with
//! DSIC and IR is `τ*_i(v) = -dist(⋆, v_i)` in the agent's type graph. The
//! graph only depends on `v_{-i}`, which is what makes truthful reporting a
//! dominant strategy.

mod graph;
mod shortest;

use rayon::prelude::*;

pub use graph::{build_type_graph, contract_graph, ContractedGraph, Digraph, TypeGraph};
pub use shortest::{shortest_distance, shortest_distances};

use crate::error::{MechError, Result};
use crate::model::{assemble_outcome, Environment, MechanismOutcome, TypeProfile};
use crate::rules::{AffineWeights, OptionRule};
use crate::value::Value;
use crate::vcg::{self, WeightedPivot};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PaymentMode {
    /// Shortest paths on the full type graph.
    Full,
    /// Shortest paths on the option-contracted graph.
    Contracted,
    /// Contract when fewer distinct options than types are selected.
    #[default]
    Auto,
}

/// `-τ*_i(v)`: the shortest distance from `⋆` to the agent's reported type.
pub fn agent_distance(
    env: &Environment,
    rule: &OptionRule,
    agent: usize,
    profile: &TypeProfile,
    mode: PaymentMode,
) -> Result<Value> {
    let graph = build_type_graph(env, rule, agent, profile)?;
    let ty = profile.type_of(agent);
    let contract = match mode {
        PaymentMode::Full => false,
        PaymentMode::Contracted => true,
        PaymentMode::Auto => graph.distinct_options() < graph.type_count(),
    };
    let result = if contract {
        let c = contract_graph(env, &graph)?;
        shortest_distance(&c.to_digraph(), ContractedGraph::STAR, c.vertex_of_type(ty))
    } else {
        shortest_distance(&graph.to_digraph(), TypeGraph::STAR, TypeGraph::vertex_of_type(ty))
    };
    result.map_err(|e| match e {
        MechError::NegativeCycle { .. } => MechError::NegativeCycle { agent: Some(agent) },
        other => other,
    })
}

/// Distances from `⋆` to every type vertex of the agent's full type graph.
pub fn agent_distances(
    env: &Environment,
    rule: &OptionRule,
    agent: usize,
    profile: &TypeProfile,
) -> Result<Vec<Value>> {
    let graph = build_type_graph(env, rule, agent, profile)?;
    let dist = shortest_distances(&graph.to_digraph(), TypeGraph::STAR).map_err(|e| match e {
        MechError::NegativeCycle { .. } => MechError::NegativeCycle { agent: Some(agent) },
        other => other,
    })?;
    Ok(dist
        .into_iter()
        .skip(1)
        .map(|d| d.expect("every type is adjacent to the source"))
        .collect())
}

/// The proposed payments `τ*(v)`, one per agent.
pub fn compute_payments(
    env: &Environment,
    rule: &OptionRule,
    profile: &TypeProfile,
    mode: PaymentMode,
) -> Result<Vec<Value>> {
    env.check_profile(profile)?;
    (0..env.agent_count())
        .into_par_iter()
        .map(|i| agent_distance(env, rule, i, profile, mode).map(|d| -d))
        .collect()
}

/// Something that produces one payment per agent at a profile.
pub trait PaymentEngine: Sync {
    fn payments(&self, env: &Environment, rule: &OptionRule, profile: &TypeProfile)
        -> Result<Vec<Value>>;
}

impl<F> PaymentEngine for F
where
    F: Fn(&Environment, &OptionRule, &TypeProfile) -> Result<Vec<Value>> + Sync,
{
    fn payments(&self, env: &Environment, rule: &OptionRule, profile: &TypeProfile) -> Result<Vec<Value>> {
        self(env, rule, profile)
    }
}

/// The payment rules shipped with the library.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PaymentRule {
    Proposed(PaymentMode),
    Clarke,
    VcgBudget,
    /// Weighted VCG over an affine-maximizer rule with the same weights.
    WeightedVcg {
        weights: AffineWeights,
        pivot: WeightedPivot,
    },
    /// No transfers at all; useful as a non-incentive-compatible baseline.
    Zero,
}

impl PaymentRule {
    pub fn proposed() -> Self {
        PaymentRule::Proposed(PaymentMode::Auto)
    }
}

impl PaymentEngine for PaymentRule {
    fn payments(&self, env: &Environment, rule: &OptionRule, profile: &TypeProfile) -> Result<Vec<Value>> {
        match self {
            PaymentRule::Proposed(mode) => compute_payments(env, rule, profile, *mode),
            PaymentRule::Clarke => vcg::clarke_payments(env, rule, profile),
            PaymentRule::VcgBudget => vcg::vcg_budget_payments(env, rule, profile),
            PaymentRule::WeightedVcg { weights, pivot } => {
                vcg::weighted_vcg_payments(env, rule, weights, profile, *pivot)
            }
            PaymentRule::Zero => {
                env.check_profile(profile)?;
                Ok(vec![Value::zero(); env.agent_count()])
            }
        }
    }
}

/// Runs one round: select the option, compute payments, package the outcome.
pub fn run_mechanism(
    env: &Environment,
    rule: &OptionRule,
    profile: &TypeProfile,
    payment: &dyn PaymentEngine,
) -> Result<MechanismOutcome> {
    let option = rule.select(env, profile)?;
    let payments = payment.payments(env, rule, profile)?;
    assemble_outcome(env, profile, option, payments)
}
