//! Exhaustive property checks over the whole profile space, the
//! path-enumeration payment oracle, and dominance reports.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MechError, Result};
use crate::model::{Environment, OptionId, TypeProfile};
use crate::rules::OptionRule;
use crate::spm::{self, PaymentEngine, PaymentMode, PaymentRule};
use crate::value::Value;

/// Largest profile space the exhaustive checks will enumerate.
pub const DEFAULT_PROFILE_CAP: u64 = 1_000_000;

/// Largest type domain the path-enumeration oracle accepts.
pub const ORACLE_MAX_TYPES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ViolationKind {
    Se,
    Dsic,
    Ir,
    Dominance,
}

/// A witness `lhs < rhs` (or `lhs > rhs` for dominance) of a failed inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub agent: Option<usize>,
    pub profile: TypeProfile,
    /// The misreported type, for DSIC.
    pub deviation: Option<usize>,
    pub lhs: Value,
    pub rhs: Value,
}

pub(crate) fn profile_space(env: &Environment, cap: u64) -> Result<Vec<TypeProfile>> {
    match env.profile_count() {
        Some(c) if c <= cap => Ok(env.profiles().collect()),
        other => Err(MechError::Capacity {
            what: "profile enumeration".into(),
            required: other.map(|c| c.to_string()).unwrap_or_else(|| "more than 2^64".into()),
            cap,
        }),
    }
}

struct Tabulated {
    profiles: Vec<TypeProfile>,
    options: Vec<OptionId>,
    payments: Vec<Vec<Value>>,
}

fn tabulate(env: &Environment, rule: &OptionRule, engine: &dyn PaymentEngine) -> Result<Tabulated> {
    let profiles = profile_space(env, DEFAULT_PROFILE_CAP)?;
    let rows = profiles
        .par_iter()
        .map(|p| Ok((rule.select(env, p)?, engine.payments(env, rule, p)?)))
        .collect::<Result<Vec<_>>>()?;
    let (options, payments) = rows.into_iter().unzip();
    Ok(Tabulated {
        profiles,
        options,
        payments,
    })
}

/// Profiles where the rule's option is not welfare-maximizing.
pub fn check_se(env: &Environment, rule: &OptionRule) -> Result<Vec<Violation>> {
    env.require_tabular("check_se")?;
    let profiles = profile_space(env, DEFAULT_PROFILE_CAP)?;
    let found = profiles
        .par_iter()
        .map(|p| {
            let welfare = env.welfare_by_option(p, None);
            let best = welfare.iter().max().expect("at least one option").clone();
            let chosen = rule.select(env, p)?;
            let k = chosen
                .index()
                .filter(|&k| k < welfare.len())
                .ok_or_else(|| MechError::input(format!("rule chose {chosen}, not a tabular option")))?;
            Ok((welfare[k] < best).then(|| Violation {
                kind: ViolationKind::Se,
                agent: None,
                profile: p.clone(),
                deviation: None,
                lhs: welfare[k].clone(),
                rhs: best,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Every `(v, i, v_i')` where misreporting `v_i'` strictly beats truth.
pub fn check_dsic(env: &Environment, rule: &OptionRule, engine: &dyn PaymentEngine) -> Result<Vec<Violation>> {
    let t = tabulate(env, rule, engine)?;
    let found: Vec<Vec<Violation>> = t
        .profiles
        .par_iter()
        .enumerate()
        .map(|(idx, v)| {
            let mut out = Vec::new();
            for i in 0..env.agent_count() {
                let truth = v.type_of(i);
                let util = env.value(i, truth, &t.options[idx])? + &t.payments[idx][i];
                for dev in 0..env.domain_size(i) {
                    if dev == truth {
                        continue;
                    }
                    let j = env.profile_index(&v.with_type(i, dev)) as usize;
                    let payoff = env.value(i, truth, &t.options[j])? + &t.payments[j][i];
                    if util < payoff {
                        out.push(Violation {
                            kind: ViolationKind::Dsic,
                            agent: Some(i),
                            profile: v.clone(),
                            deviation: Some(dev),
                            lhs: util.clone(),
                            rhs: payoff,
                        });
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Every `(v, i)` with negative truthful utility.
pub fn check_ir(env: &Environment, rule: &OptionRule, engine: &dyn PaymentEngine) -> Result<Vec<Violation>> {
    let t = tabulate(env, rule, engine)?;
    let mut out = Vec::new();
    for (idx, v) in t.profiles.iter().enumerate() {
        for i in 0..env.agent_count() {
            let util = env.value(i, v.type_of(i), &t.options[idx])? + &t.payments[idx][i];
            if util.is_negative() {
                out.push(Violation {
                    kind: ViolationKind::Ir,
                    agent: Some(i),
                    profile: v.clone(),
                    deviation: None,
                    lhs: util,
                    rhs: Value::zero(),
                });
            }
        }
    }
    Ok(out)
}

/// Largest `-τ_i(v)` allowed by the DSIC and IR constraints of agent `i`
/// around `v_{-i}`, found as the minimum length over every simple path from
/// the source to `v_i` in the constraint graph.
///
/// This deliberately shares nothing with the relaxation-based engine in
/// [`crate::spm`]: weights are rebuilt here from single-profile rule
/// evaluations and paths are enumerated explicitly.
pub fn oracle_min_payment(env: &Environment, rule: &OptionRule, agent: usize, profile: &TypeProfile) -> Result<Value> {
    env.check_profile(profile)?;
    let d = env.domain_size(agent);
    if d > ORACLE_MAX_TYPES {
        return Err(MechError::Capacity {
            what: format!("path enumeration over agent {agent}'s types"),
            required: d.to_string(),
            cap: ORACLE_MAX_TYPES as u64,
        });
    }
    let chosen = (0..d)
        .map(|k| rule.select(env, &profile.with_type(agent, k)))
        .collect::<Result<Vec<_>>>()?;
    // own[t] = v_t(φ(v_t, v_{-i})); cost[s][t] = own[t] - v_t(φ(v_s, v_{-i}))
    let own = (0..d)
        .map(|t| env.value(agent, t, &chosen[t]))
        .collect::<Result<Vec<_>>>()?;
    let mut cost = vec![vec![Value::zero(); d]; d];
    for (s, row) in cost.iter_mut().enumerate() {
        for (t, slot) in row.iter_mut().enumerate() {
            *slot = &own[t] - &env.value(agent, t, &chosen[s])?;
        }
    }

    let target = profile.type_of(agent);
    let mut best: Option<Value> = None;
    let mut visited = vec![false; d];
    for first in 0..d {
        visited[first] = true;
        walk(first, own[first].clone(), target, &cost, &mut visited, &mut best);
        visited[first] = false;
    }
    Ok(best.expect("the direct edge to the target is always a path"))
}

fn walk(at: usize, len: Value, target: usize, cost: &[Vec<Value>], visited: &mut [bool], best: &mut Option<Value>) {
    if at == target {
        if best.as_ref().is_none_or(|b| len < *b) {
            *best = Some(len);
        }
        return;
    }
    for next in 0..cost.len() {
        if visited[next] {
            continue;
        }
        visited[next] = true;
        walk(next, &len + &cost[at][next], target, cost, visited, best);
        visited[next] = false;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileBudgets {
    pub profile: TypeProfile,
    pub proposed: Value,
    pub vcg_budget: Value,
    /// `B* - B^b`.
    pub diff: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominanceReport {
    pub profiles: Vec<ProfileBudgets>,
    /// Profiles with `B* < B^b`.
    pub strict_improvements: usize,
    /// Whether every valuation is non-negative, enabling the Clarke comparison.
    pub nonnegative_types: bool,
    pub violations: Vec<Violation>,
}

fn dominance_violation(agent: Option<usize>, profile: &TypeProfile, lhs: &Value, rhs: &Value) -> Violation {
    Violation {
        kind: ViolationKind::Dominance,
        agent,
        profile: profile.clone(),
        deviation: None,
        lhs: lhs.clone(),
        rhs: rhs.clone(),
    }
}

/// Pointwise comparison of the proposed payments against VCG-budget (and
/// VCG-budget against Clarke when every valuation is non-negative).
pub fn check_dominance(env: &Environment, rule: &OptionRule) -> Result<DominanceReport> {
    let nonnegative = env.all_nonnegative();
    let profiles = profile_space(env, DEFAULT_PROFILE_CAP)?;
    let rows = profiles
        .par_iter()
        .map(|p| {
            let star = spm::compute_payments(env, rule, p, PaymentMode::Auto)?;
            let budget = PaymentRule::VcgBudget.payments(env, rule, p)?;
            let mut violations = Vec::new();
            for (i, (a, b)) in star.iter().zip(&budget).enumerate() {
                if a > b {
                    violations.push(dominance_violation(Some(i), p, a, b));
                }
            }
            let b_star: Value = star.iter().sum();
            let b_vcg: Value = budget.iter().sum();
            if b_star > b_vcg {
                violations.push(dominance_violation(None, p, &b_star, &b_vcg));
            }
            if nonnegative {
                let clarke = PaymentRule::Clarke.payments(env, rule, p)?;
                for (i, (b, c)) in budget.iter().zip(&clarke).enumerate() {
                    if b > c {
                        violations.push(dominance_violation(Some(i), p, b, c));
                    }
                }
            }
            let diff = &b_star - &b_vcg;
            Ok((
                ProfileBudgets {
                    profile: p.clone(),
                    proposed: b_star,
                    vcg_budget: b_vcg,
                    diff,
                },
                violations,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let strict_improvements = rows.iter().filter(|(r, _)| r.diff.is_negative()).count();
    let (profiles, violations): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(DominanceReport {
        profiles,
        strict_improvements,
        nonnegative_types: nonnegative,
        violations: violations.into_iter().flatten().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleMismatch {
    pub agent: usize,
    pub profile: TypeProfile,
    pub engine: Value,
    pub oracle: Value,
}

/// Full audit of one mechanism; what the CLI serializes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub se: Vec<Violation>,
    pub dsic: Vec<Violation>,
    pub ir: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominance: Option<DominanceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
}

impl AuditReport {
    pub fn violation_count(&self) -> usize {
        self.se.len()
            + self.dsic.len()
            + self.ir.len()
            + self.dominance.as_ref().map_or(0, |d| d.violations.len())
            + self.oracle.as_ref().map_or(0, |o| o.mismatches.len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominanceSummary {
    pub profiles: usize,
    pub strict_improvements: usize,
    pub total_diff: Value,
    pub nonnegative_types: bool,
    pub violations: Vec<Violation>,
}

impl From<DominanceReport> for DominanceSummary {
    fn from(r: DominanceReport) -> Self {
        DominanceSummary {
            profiles: r.profiles.len(),
            strict_improvements: r.strict_improvements,
            total_diff: r.profiles.iter().map(|p| &p.diff).sum(),
            nonnegative_types: r.nonnegative_types,
            violations: r.violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleSummary {
    pub checked: usize,
    /// Agents skipped because their domain exceeds the oracle's bound.
    pub skipped_agents: Vec<usize>,
    pub mismatches: Vec<OracleMismatch>,
}

/// Compares proposed payments with the oracle at every profile, for every
/// agent whose domain the oracle can enumerate.
pub fn oracle_sweep(env: &Environment, rule: &OptionRule) -> Result<OracleSummary> {
    let profiles = profile_space(env, DEFAULT_PROFILE_CAP)?;
    let agents: Vec<usize> = (0..env.agent_count())
        .filter(|&i| env.domain_size(i) <= ORACLE_MAX_TYPES)
        .collect();
    let skipped_agents = (0..env.agent_count()).filter(|i| !agents.contains(i)).collect();
    let rows = profiles
        .par_iter()
        .map(|p| {
            let mut out = Vec::new();
            for &i in &agents {
                let engine = spm::agent_distance(env, rule, i, p, PaymentMode::Auto)?;
                let oracle = oracle_min_payment(env, rule, i, p)?;
                if engine != oracle {
                    out.push(OracleMismatch {
                        agent: i,
                        profile: p.clone(),
                        engine,
                        oracle,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleSummary {
        checked: profiles.len() * agents.len(),
        skipped_agents,
        mismatches: rows.into_iter().flatten().collect(),
    })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AuditOptions {
    pub dominance: bool,
    pub oracle: bool,
}

pub fn audit_mechanism(
    env: &Environment,
    rule: &OptionRule,
    engine: &dyn PaymentEngine,
    opts: AuditOptions,
) -> Result<AuditReport> {
    let se = if env.is_tabular() { check_se(env, rule)? } else { Vec::new() };
    Ok(AuditReport {
        se,
        dsic: check_dsic(env, rule, engine)?,
        ir: check_ir(env, rule, engine)?,
        dominance: if opts.dominance && env.is_tabular() {
            Some(check_dominance(env, rule)?.into())
        } else {
            None
        },
        oracle: if opts.oracle { Some(oracle_sweep(env, rule)?) } else { None },
    })
}
