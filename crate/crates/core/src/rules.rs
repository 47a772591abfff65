//! Option rules: welfare maximization with tie-breaking, affine maximizers,
//! the closed-form quadratic venue, explicit tables, and brute-force search
//! over all welfare-maximizing rules of an improper environment.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::RwLock;

use crate::error::{MechError, Result};
use crate::model::{Environment, OptionId, OptionSpace, TypeProfile, Valuation};
use crate::spm::{self, PaymentMode};
use crate::value::Value;

/// How to resolve a set-valued argmax.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
    /// Per-profile choice; profiles not listed fall back to the lowest index.
    /// Entries are expected to lie inside the argmax set, which
    /// [`crate::audit::check_se`] verifies.
    ExplicitTable(BTreeMap<TypeProfile, OptionId>),
}

/// Weights `(w, λ)` of an affine maximizer `Σ_i w_i v_i(X) + λ(X)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineWeights {
    pub agent_weights: Vec<Value>,
    pub option_weights: Vec<Value>,
}

impl AffineWeights {
    pub fn new(agent_weights: Vec<Value>, option_weights: Vec<Value>) -> Result<Self> {
        if let Some((i, w)) = agent_weights.iter().enumerate().find(|(_, w)| !w.is_positive()) {
            return Err(MechError::input(format!(
                "agent weight w[{i}] = {w} must be strictly positive"
            )));
        }
        Ok(AffineWeights {
            agent_weights,
            option_weights,
        })
    }

    /// `w ≡ 1, λ ≡ 0`.
    pub fn unit(agents: usize, options: usize) -> Self {
        AffineWeights {
            agent_weights: vec![Value::one(); agents],
            option_weights: vec![Value::zero(); options],
        }
    }

    pub(crate) fn check(&self, env: &Environment) -> Result<()> {
        let m = env.require_tabular("an affine maximizer")?;
        if self.agent_weights.len() != env.agent_count() || self.option_weights.len() != m {
            return Err(MechError::input(format!(
                "affine weights have {} agent / {} option entries, environment has {} / {}",
                self.agent_weights.len(),
                self.option_weights.len(),
                env.agent_count(),
                m
            )));
        }
        if self.agent_weights.iter().any(|w| !w.is_positive()) {
            return Err(MechError::input("agent weights must be strictly positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleFamily {
    /// Socially efficient: maximizes `S(X; v)`.
    SocialWelfare(TieBreak),
    Affine(AffineWeights, TieBreak),
    /// Explicit option per profile.
    Table(BTreeMap<TypeProfile, OptionId>),
}

/// A deterministic option rule with a memo of evaluated profiles.
///
/// The memo is shared behind a lock; concurrent inserts of the same key
/// always carry the same option. It only ever holds selections for one
/// environment and is reset when the rule is applied to another.
pub struct OptionRule {
    family: RuleFamily,
    memo: RwLock<Memo>,
}

#[derive(Clone, Default)]
struct Memo {
    env: Option<u64>,
    map: HashMap<TypeProfile, OptionId>,
}

impl Clone for OptionRule {
    fn clone(&self) -> Self {
        OptionRule {
            family: self.family.clone(),
            memo: RwLock::new(self.memo.read().expect("memo lock").clone()),
        }
    }
}

impl fmt::Debug for OptionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OptionRule").field("family", &self.family).finish()
    }
}

impl PartialEq for OptionRule {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}

impl OptionRule {
    pub fn new(family: RuleFamily) -> Self {
        OptionRule {
            family,
            memo: RwLock::new(Memo::default()),
        }
    }

    pub fn social_welfare(tie: TieBreak) -> Self {
        Self::new(RuleFamily::SocialWelfare(tie))
    }

    /// The default SE rule: lowest option index among welfare maximizers.
    pub fn se_lowest() -> Self {
        Self::social_welfare(TieBreak::LowestIndex)
    }

    pub fn affine(weights: AffineWeights, tie: TieBreak) -> Result<Self> {
        if weights.agent_weights.iter().any(|w| !w.is_positive()) {
            return Err(MechError::input("agent weights must be strictly positive"));
        }
        Ok(Self::new(RuleFamily::Affine(weights, tie)))
    }

    pub fn table(entries: BTreeMap<TypeProfile, OptionId>) -> Self {
        Self::new(RuleFamily::Table(entries))
    }

    pub fn family(&self) -> &RuleFamily {
        &self.family
    }

    pub fn affine_weights(&self) -> Option<&AffineWeights> {
        match &self.family {
            RuleFamily::Affine(w, _) => Some(w),
            _ => None,
        }
    }

    pub fn is_social_welfare(&self) -> bool {
        matches!(self.family, RuleFamily::SocialWelfare(_))
    }

    /// Number of memoized profiles.
    pub fn memo_len(&self) -> usize {
        self.memo.read().expect("memo lock").map.len()
    }

    fn cached(&self, env: &Environment, profile: &TypeProfile) -> Option<OptionId> {
        let memo = self.memo.read().expect("memo lock");
        if memo.env == Some(env.id()) {
            memo.map.get(profile).cloned()
        } else {
            None
        }
    }

    fn remember(&self, env: &Environment, profile: TypeProfile, option: OptionId) {
        let mut memo = self.memo.write().expect("memo lock");
        if memo.env != Some(env.id()) {
            memo.map.clear();
            memo.env = Some(env.id());
        }
        memo.map.insert(profile, option);
    }

    /// `φ(v)`.
    pub fn select(&self, env: &Environment, profile: &TypeProfile) -> Result<OptionId> {
        if let Some(o) = self.cached(env, profile) {
            return Ok(o);
        }
        env.check_profile(profile)?;
        let option = match &self.family {
            RuleFamily::SocialWelfare(tie) => match env.option_space() {
                OptionSpace::Tabular { .. } => se_select(env, profile, tie)?,
                OptionSpace::QuadraticLine { .. } => quadratic_select(env, profile)?,
            },
            RuleFamily::Affine(w, tie) => affine_select(env, w, profile, tie)?,
            RuleFamily::Table(entries) => entries.get(profile).cloned().ok_or_else(|| {
                MechError::input(format!("rule table has no entry for profile {profile}"))
            })?,
        };
        self.remember(env, profile.clone(), option.clone());
        Ok(option)
    }

    /// `o(v_i') = φ(v_i', v_{-i})` for every type of `agent`, in domain order.
    ///
    /// Exactly one rule evaluation per type; welfare-based families share the
    /// partial sums of the other agents across those evaluations.
    pub fn select_deviations(
        &self,
        env: &Environment,
        agent: usize,
        profile: &TypeProfile,
    ) -> Result<Vec<OptionId>> {
        env.check_profile(profile)?;
        let d = env.domain_size(agent);
        let shared = match (&self.family, env.option_space()) {
            (RuleFamily::SocialWelfare(tie), OptionSpace::Tabular { .. }) => {
                Some((env.welfare_by_option(profile, Some(agent)), None, tie))
            }
            (RuleFamily::Affine(w, tie), OptionSpace::Tabular { .. }) => {
                w.check(env)?;
                Some((weighted_scores(env, w, profile, Some(agent)), Some(w), tie))
            }
            _ => None,
        };
        let mut out = Vec::with_capacity(d);
        for ty in 0..d {
            let dev = profile.with_type(agent, ty);
            if let Some(o) = self.cached(env, &dev) {
                out.push(o);
                continue;
            }
            let option = match &shared {
                Some((base, weights, tie)) => {
                    let row = env.valuation(agent, ty);
                    let scale = weights.map(|w| &w.agent_weights[agent]);
                    let scores = base.iter().enumerate().map(|(x, b)| match scale {
                        Some(s) => b + &(s * row.at(x)),
                        None => b + row.at(x),
                    });
                    OptionId::Index(pick(scores, tie, &dev))
                }
                None => self.select(env, &dev)?,
            };
            self.remember(env, dev, option.clone());
            out.push(option);
        }
        Ok(out)
    }
}

/// Index of the best score under `tie`.
fn pick(scores: impl Iterator<Item = Value>, tie: &TieBreak, profile: &TypeProfile) -> usize {
    if let TieBreak::ExplicitTable(table) = tie {
        if let Some(OptionId::Index(k)) = table.get(profile) {
            return *k;
        }
    }
    let mut best: Option<(usize, Value)> = None;
    for (x, s) in scores.enumerate() {
        let better = match &best {
            None => true,
            Some((_, b)) => match tie {
                TieBreak::HighestIndex => s >= *b,
                _ => s > *b,
            },
        };
        if better {
            best = Some((x, s));
        }
    }
    best.expect("at least one option").0
}

fn weighted_scores(
    env: &Environment,
    weights: &AffineWeights,
    profile: &TypeProfile,
    excluded: Option<usize>,
) -> Vec<Value> {
    let mut acc = weights.option_weights.clone();
    for (i, &k) in profile.indices().iter().enumerate() {
        if Some(i) == excluded {
            continue;
        }
        let w = &weights.agent_weights[i];
        let row = env.valuation(i, k);
        for (x, slot) in acc.iter_mut().enumerate() {
            *slot += w * row.at(x);
        }
    }
    acc
}

/// All options maximizing `S(·; v)`, in index order.
pub fn argmax_set(env: &Environment, profile: &TypeProfile) -> Result<Vec<usize>> {
    env.require_tabular("argmax over options")?;
    env.check_profile(profile)?;
    let welfare = env.welfare_by_option(profile, None);
    let best = welfare.iter().max().expect("at least one option");
    Ok(welfare
        .iter()
        .enumerate()
        .filter(|(_, w)| *w == best)
        .map(|(x, _)| x)
        .collect())
}

/// Welfare-maximizing option for a tabular environment.
pub fn se_select(env: &Environment, profile: &TypeProfile, tie: &TieBreak) -> Result<OptionId> {
    env.require_tabular("se_select")?;
    env.check_profile(profile)?;
    let welfare = env.welfare_by_option(profile, None);
    Ok(OptionId::Index(pick(welfare.into_iter(), tie, profile)))
}

/// Maximizer of `Σ_i w_i v_i(X) + λ(X)`.
pub fn affine_select(
    env: &Environment,
    weights: &AffineWeights,
    profile: &TypeProfile,
    tie: &TieBreak,
) -> Result<OptionId> {
    weights.check(env)?;
    env.check_profile(profile)?;
    let scores = weighted_scores(env, weights, profile, None);
    Ok(OptionId::Index(pick(scores.into_iter(), tie, profile)))
}

/// The unique welfare-maximizing venue: the `a`-weighted mean of the `b`s,
/// clamped to the interval.
pub fn quadratic_select(env: &Environment, profile: &TypeProfile) -> Result<OptionId> {
    let (lo, hi) = match env.option_space() {
        OptionSpace::QuadraticLine { lo, hi } => (lo, hi),
        OptionSpace::Tabular { .. } => {
            return Err(MechError::Unsupported(
                "quadratic_select needs a quadratic-line environment".into(),
            ))
        }
    };
    env.check_profile(profile)?;
    let mut sum_ab = Value::zero();
    let mut sum_a = Value::zero();
    for (i, &k) in profile.indices().iter().enumerate() {
        match env.valuation(i, k) {
            Valuation::Quadratic { a, b, .. } => {
                sum_ab += a * b;
                sum_a += a;
            }
            Valuation::Table(_) => return Err(MechError::input("tabular type in a quadratic environment")),
        }
    }
    let center = sum_ab
        .checked_div(&sum_a)
        .ok_or_else(|| MechError::input("quadratic coefficients sum to zero"))?;
    let x = center.min(hi.clone()).max(lo.clone());
    Ok(OptionId::Point(x))
}

/// Every SE option rule of a tabular environment, as explicit tables.
///
/// Rules are produced in odometer order over the profiles (earlier profiles
/// vary slowest), each profile's choices ascending by option index.
pub fn enumerate_se_rules(env: &Environment, cap: u64) -> Result<Vec<OptionRule>> {
    env.require_tabular("enumerate_se_rules")?;
    let profile_count = env.profile_count().filter(|&c| c <= cap).ok_or_else(|| {
        MechError::Capacity {
            what: "profile enumeration".into(),
            required: env
                .profile_count()
                .map(|c| c.to_string())
                .unwrap_or_else(|| "more than 2^64".into()),
            cap,
        }
    })?;
    let mut slots = Vec::with_capacity(profile_count as usize);
    let mut product: u128 = 1;
    for profile in env.profiles() {
        let set = argmax_set(env, &profile)?;
        product = product.saturating_mul(set.len() as u128);
        slots.push((profile, set));
    }
    if product > cap as u128 {
        return Err(MechError::Capacity {
            what: "SE rule enumeration (product of argmax set sizes)".into(),
            required: product.to_string(),
            cap,
        });
    }
    let mut rules = Vec::with_capacity(product as usize);
    let mut choice = vec![0usize; slots.len()];
    loop {
        let table = slots
            .iter()
            .zip(&choice)
            .map(|((p, set), &c)| (p.clone(), OptionId::Index(set[c])))
            .collect();
        rules.push(OptionRule::table(table));
        let mut pos = slots.len();
        loop {
            if pos == 0 {
                return Ok(rules);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < slots[pos].1.len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Aggregate `f` over the per-profile budgets; must be non-decreasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetAggregator {
    /// Mean budget under the uniform distribution over profiles.
    ExpectedBudgetUniform,
    MaxBudget,
}

impl BudgetAggregator {
    pub fn aggregate(&self, budgets: &[Value]) -> Value {
        match self {
            BudgetAggregator::ExpectedBudgetUniform => {
                let total: Value = budgets.iter().sum();
                total / Value::from(budgets.len() as i64)
            }
            BudgetAggregator::MaxBudget => budgets.iter().max().cloned().unwrap_or_default(),
        }
    }
}

/// Among all SE rules, one whose proposed-mechanism budgets minimize the
/// aggregate. Returns the first minimizer in enumeration order.
pub fn optimize_option_rule(
    env: &Environment,
    aggregator: BudgetAggregator,
    cap: u64,
) -> Result<(OptionRule, Value)> {
    optimize_option_rule_with(env, |b| aggregator.aggregate(b), cap)
}

pub fn optimize_option_rule_with(
    env: &Environment,
    aggregate: impl Fn(&[Value]) -> Value,
    cap: u64,
) -> Result<(OptionRule, Value)> {
    let mut best: Option<(OptionRule, Value)> = None;
    for rule in enumerate_se_rules(env, cap)? {
        let budgets = env
            .profiles()
            .map(|p| {
                spm::compute_payments(env, &rule, &p, PaymentMode::Auto)
                    .map(|t| t.iter().sum::<Value>())
            })
            .collect::<Result<Vec<_>>>()?;
        let score = aggregate(&budgets);
        if best.as_ref().is_none_or(|(_, b)| score < *b) {
            best = Some((rule, score));
        }
    }
    Ok(best.expect("at least one SE rule exists"))
}
