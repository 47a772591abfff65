//! VCG baselines: the Clarke pivot, the IR-optimal budget pivot, and the
//! weighted (affine-maximizer) variants.
//!
//! All maxima over options are exact enumerations of the tabular option list.
//! The formulas are evaluated for any rule; incentive compatibility relies on
//! the rule being SE (or an affine maximizer for the weighted variants).

use crate::error::{MechError, Result};
use crate::model::{Environment, TypeProfile};
use crate::rules::{AffineWeights, OptionRule};
use crate::value::Value;

/// Pivot term of a weighted VCG payment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightedPivot {
    /// The affine maximizer auction: weighted Clarke pivot.
    #[default]
    Ama,
    /// `min` over own types of the maximal weighted objective. This is an
    /// extension mirroring [`vcg_budget_payments`] under weights.
    BudgetAnalog,
}

fn selected_index(env: &Environment, rule: &OptionRule, profile: &TypeProfile, what: &str) -> Result<usize> {
    env.require_tabular(what)?;
    env.check_profile(profile)?;
    let option = rule.select(env, profile)?;
    option
        .index()
        .ok_or_else(|| MechError::input("rule returned a location for a tabular environment"))
}

fn max_of(xs: &[Value]) -> &Value {
    xs.iter().max().expect("at least one option")
}

/// `h^b_i = min_{v_i'} max_X (others[X] + scale * v_i'(X))`.
fn budget_pivot(env: &Environment, agent: usize, others: &[Value], scale: Option<&Value>) -> Value {
    env.domain(agent)
        .iter()
        .map(|v| {
            others
                .iter()
                .enumerate()
                .map(|(x, o)| match scale {
                    Some(s) => o + &(s * v.at(x)),
                    None => o + v.at(x),
                })
                .max()
                .expect("at least one option")
        })
        .min()
        .expect("non-empty domain")
}

/// `τ_i = Σ_{j≠i} v_j(φ(v)) - max_X Σ_{j≠i} v_j(X)`; never positive.
pub fn clarke_payments(env: &Environment, rule: &OptionRule, profile: &TypeProfile) -> Result<Vec<Value>> {
    let chosen = selected_index(env, rule, profile, "Clarke payments")?;
    Ok((0..env.agent_count())
        .map(|i| {
            let others = env.welfare_by_option(profile, Some(i));
            &others[chosen] - max_of(&others)
        })
        .collect())
}

/// `τ_i = Σ_{j≠i} v_j(φ(v)) - min_{v_i'} max_X S(X; v_i', v_{-i})`.
pub fn vcg_budget_payments(env: &Environment, rule: &OptionRule, profile: &TypeProfile) -> Result<Vec<Value>> {
    let chosen = selected_index(env, rule, profile, "VCG-budget payments")?;
    Ok((0..env.agent_count())
        .map(|i| {
            let others = env.welfare_by_option(profile, Some(i));
            &others[chosen] - &budget_pivot(env, i, &others, None)
        })
        .collect())
}

/// Weighted VCG payments for an affine-maximizer rule built with `weights`.
pub fn weighted_vcg_payments(
    env: &Environment,
    rule: &OptionRule,
    weights: &AffineWeights,
    profile: &TypeProfile,
    pivot: WeightedPivot,
) -> Result<Vec<Value>> {
    match rule.affine_weights() {
        Some(w) if w == weights => {}
        _ => {
            return Err(MechError::input(
                "weighted VCG payments need an affine rule built with the same weights",
            ))
        }
    }
    weights.check(env)?;
    let chosen = selected_index(env, rule, profile, "weighted VCG payments")?;
    Ok((0..env.agent_count())
        .map(|i| {
            let mut others = weights.option_weights.clone();
            for (j, &k) in profile.indices().iter().enumerate() {
                if j == i {
                    continue;
                }
                let row = env.valuation(j, k);
                for (x, slot) in others.iter_mut().enumerate() {
                    *slot += &weights.agent_weights[j] * row.at(x);
                }
            }
            let w_i = &weights.agent_weights[i];
            let h = match pivot {
                WeightedPivot::Ama => max_of(&others).clone(),
                WeightedPivot::BudgetAnalog => budget_pivot(env, i, &others, Some(w_i)),
            };
            (&others[chosen] - &h) / w_i
        })
        .collect())
}
