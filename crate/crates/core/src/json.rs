//! The JSON environment document.
//!
//! ```json
//! {
//!   "agents": 2,
//!   "options": 3,
//!   "domains": [[[1, 0, 0], [-3, -2, 0]], [[0, 0, -2]]],
//!   "rule": {"se": "lowest"}
//! }
//! ```
//!
//! `options` is either an option count or `{"interval": [lo, hi]}`; in the
//! latter case every type is an `[a, b, c]` triple. Rationals are integers
//! or `"p/q"` strings. The optional `rule` is one of `{"se": tie}`,
//! `{"affine": {"agent_weights": [...], "option_weights": [...], "tie": tie}}`
//! or `{"table": [{"profile": [..], "option": {"index": k}}, ...]}`, where
//! `tie` is `"lowest"`, `"highest"` or `{"explicit": [entries]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::model::{Environment, OptionId, OptionSpace, TypeProfile, Valuation};
use crate::rules::{AffineWeights, OptionRule, RuleFamily, TieBreak};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvDocument {
    pub agents: usize,
    pub options: OptionsDoc,
    pub domains: Vec<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OptionsDoc {
    Count(usize),
    Interval { interval: [Value; 2] },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RuleDoc {
    Se(TieDoc),
    Affine {
        agent_weights: Vec<Value>,
        option_weights: Vec<Value>,
        #[serde(default)]
        tie: TieDoc,
    },
    Table(Vec<TableEntry>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieDoc {
    #[default]
    Lowest,
    Highest,
    Explicit(Vec<TableEntry>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub profile: TypeProfile,
    pub option: OptionId,
}

fn table_from(entries: Vec<TableEntry>) -> Result<BTreeMap<TypeProfile, OptionId>> {
    let mut map = BTreeMap::new();
    for e in entries {
        if map.insert(e.profile.clone(), e.option).is_some() {
            return Err(MechError::input(format!("duplicate table entry for profile {}", e.profile)));
        }
    }
    Ok(map)
}

fn entries_of(map: &BTreeMap<TypeProfile, OptionId>) -> Vec<TableEntry> {
    map.iter()
        .map(|(p, o)| TableEntry {
            profile: p.clone(),
            option: o.clone(),
        })
        .collect()
}

impl TieDoc {
    fn into_tie(self) -> Result<TieBreak> {
        Ok(match self {
            TieDoc::Lowest => TieBreak::LowestIndex,
            TieDoc::Highest => TieBreak::HighestIndex,
            TieDoc::Explicit(entries) => TieBreak::ExplicitTable(table_from(entries)?),
        })
    }

    fn of(tie: &TieBreak) -> Self {
        match tie {
            TieBreak::LowestIndex => TieDoc::Lowest,
            TieBreak::HighestIndex => TieDoc::Highest,
            TieBreak::ExplicitTable(map) => TieDoc::Explicit(entries_of(map)),
        }
    }
}

impl RuleDoc {
    pub fn into_rule(self) -> Result<OptionRule> {
        match self {
            RuleDoc::Se(tie) => Ok(OptionRule::social_welfare(tie.into_tie()?)),
            RuleDoc::Affine {
                agent_weights,
                option_weights,
                tie,
            } => OptionRule::affine(AffineWeights::new(agent_weights, option_weights)?, tie.into_tie()?),
            RuleDoc::Table(entries) => Ok(OptionRule::table(table_from(entries)?)),
        }
    }

    pub fn of(rule: &OptionRule) -> Self {
        match rule.family() {
            RuleFamily::SocialWelfare(tie) => RuleDoc::Se(TieDoc::of(tie)),
            RuleFamily::Affine(w, tie) => RuleDoc::Affine {
                agent_weights: w.agent_weights.clone(),
                option_weights: w.option_weights.clone(),
                tie: TieDoc::of(tie),
            },
            RuleFamily::Table(map) => RuleDoc::Table(entries_of(map)),
        }
    }
}

impl EnvDocument {
    pub fn from_env(env: &Environment, rule: Option<&OptionRule>) -> Self {
        let options = match env.option_space() {
            OptionSpace::Tabular { count } => OptionsDoc::Count(*count),
            OptionSpace::QuadraticLine { lo, hi } => OptionsDoc::Interval {
                interval: [lo.clone(), hi.clone()],
            },
        };
        let domains = env
            .domains()
            .iter()
            .map(|d| {
                d.iter()
                    .map(|v| match v {
                        Valuation::Table(row) => row.clone(),
                        Valuation::Quadratic { a, b, c } => vec![a.clone(), b.clone(), c.clone()],
                    })
                    .collect()
            })
            .collect();
        EnvDocument {
            agents: env.agent_count(),
            options,
            domains,
            rule: rule.map(RuleDoc::of),
        }
    }

    /// Validated environment plus the embedded rule, if any.
    pub fn into_parts(self) -> Result<(Environment, Option<OptionRule>)> {
        let (space, domains) = match self.options {
            OptionsDoc::Count(count) => (
                OptionSpace::Tabular { count },
                self.domains
                    .into_iter()
                    .map(|d| d.into_iter().map(Valuation::Table).collect())
                    .collect(),
            ),
            OptionsDoc::Interval { interval: [lo, hi] } => {
                let domains = self
                    .domains
                    .into_iter()
                    .enumerate()
                    .map(|(i, d)| {
                        d.into_iter()
                            .enumerate()
                            .map(|(k, t)| match <[Value; 3]>::try_from(t) {
                                Ok([a, b, c]) => Ok(Valuation::Quadratic { a, b, c }),
                                Err(_) => Err(MechError::input(format!(
                                    "domains[{i}][{k}] must be an [a, b, c] triple"
                                ))),
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                (OptionSpace::QuadraticLine { lo, hi }, domains)
            }
        };
        let env = Environment::new(self.agents, space, domains)?;
        let rule = self.rule.map(RuleDoc::into_rule).transpose()?;
        Ok((env, rule))
    }
}

pub fn parse_environment(text: &str) -> Result<(Environment, Option<OptionRule>)> {
    let doc: EnvDocument =
        serde_json::from_str(text).map_err(|e| MechError::input(format!("environment JSON: {e}")))?;
    doc.into_parts()
}

pub fn environment_to_json(env: &Environment, rule: Option<&OptionRule>) -> String {
    serde_json::to_string_pretty(&EnvDocument::from_env(env, rule)).expect("documents always serialize")
}

pub fn parse_rule(text: &str) -> Result<OptionRule> {
    let doc: RuleDoc = serde_json::from_str(text).map_err(|e| MechError::input(format!("rule JSON: {e}")))?;
    doc.into_rule()
}
