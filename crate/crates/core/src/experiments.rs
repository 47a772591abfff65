//! Random-instance budget comparisons between the proposed payments and
//! VCG-budget, parameter sweeps, and the two demo instance generators.
//!
//! Every instance is reproducible from `(seed, instance_index)`: instance `k`
//! draws from a ChaCha8 stream keyed by `seed` with stream id `k`. Draws
//! happen in a fixed order: sizes (agents, options, domain size), then every
//! value `v_i^(t)(X)` agent-major, type-next, option-minor, then the profile
//! one agent at a time.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit;
use crate::error::{MechError, Result};
use crate::model::{Environment, TypeProfile};
use crate::rules::OptionRule;
use crate::spm::{self, PaymentEngine, PaymentMode, PaymentRule};
use crate::value::Value;

/// A size parameter: fixed, or drawn uniformly from an inclusive range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeSpec {
    Fixed(usize),
    Uniform { lo: usize, hi: usize },
}

impl SizeSpec {
    fn check(&self, what: &str) -> Result<()> {
        let ok = match *self {
            SizeSpec::Fixed(n) => n >= 1,
            SizeSpec::Uniform { lo, hi } => lo >= 1 && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(MechError::input(format!("{what}: sizes must be at least 1 with lo <= hi, got {self:?}")))
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        match *self {
            SizeSpec::Fixed(n) => n,
            SizeSpec::Uniform { lo, hi } => rng.random_range(lo..=hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub instances: usize,
    pub agents: SizeSpec,
    pub options: SizeSpec,
    pub domain_size: SizeSpec,
    /// Inclusive integer range of every value `v_i(X)`.
    pub value_range: (i64, i64),
    /// Exhaustively audit DSIC/IR of both mechanisms on every `audit_every`-th
    /// instance (0 disables).
    pub audit_every: usize,
    /// Only audit instances with at most this many profiles.
    pub audit_cap: u64,
}

/// 16 agents; options and types per agent drawn uniformly from 1..=256 and
/// 1..=16 for every instance; values in [-100, 100].
impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            instances: 1000,
            agents: SizeSpec::Fixed(16),
            options: SizeSpec::Uniform { lo: 1, hi: 256 },
            domain_size: SizeSpec::Uniform { lo: 1, hi: 16 },
            value_range: (-100, 100),
            audit_every: 50,
            audit_cap: 10_000,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(MechError::input("instances must be at least 1"));
        }
        self.agents.check("agents")?;
        self.options.check("options")?;
        self.domain_size.check("domain_size")?;
        let (lo, hi) = self.value_range;
        if lo > hi {
            return Err(MechError::input(format!("value range {lo}:{hi} is empty")));
        }
        Ok(())
    }

    fn rng(&self, instance: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(instance as u64);
        rng
    }
}

/// Draws instance `index` of `config`: an environment and a uniformly
/// random profile. All agents share one drawn domain size.
pub fn generate_instance(config: &ExperimentConfig, index: usize) -> Result<(Environment, TypeProfile)> {
    config.validate()?;
    let mut rng = config.rng(index);
    let n = config.agents.draw(&mut rng);
    let m = config.options.draw(&mut rng);
    let d = config.domain_size.draw(&mut rng);
    let (lo, hi) = config.value_range;
    let domains = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| (0..m).map(|_| Value::from_integer(rng.random_range(lo..=hi))).collect())
                .collect()
        })
        .collect();
    let env = Environment::tabular(m, domains)?;
    let profile = TypeProfile::new((0..n).map(|_| rng.random_range(0..d)).collect());
    Ok((env, profile))
}

/// Exact budgets of the two mechanisms at one profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BudgetComparison {
    pub proposed: Value,
    pub vcg_budget: Value,
    /// `proposed - vcg_budget`, never positive.
    pub diff: Value,
}

/// Budgets of the proposed payments and VCG-budget under a common SE rule.
///
/// Always checks `τ*_i ≤ τ^b_i` for every agent, and `τ^b_i ≤ τ^c_i` when
/// every valuation is non-negative; a failure is an [`MechError::Invariant`].
pub fn compare_budgets(env: &Environment, profile: &TypeProfile, rule: &OptionRule) -> Result<BudgetComparison> {
    if !rule.is_social_welfare() {
        return Err(MechError::input("budget comparisons need an SE rule"));
    }
    let star = spm::compute_payments(env, rule, profile, PaymentMode::Auto)?;
    let budget = PaymentRule::VcgBudget.payments(env, rule, profile)?;
    for (i, (a, b)) in star.iter().zip(&budget).enumerate() {
        if a > b {
            return Err(MechError::Invariant(format!(
                "proposed payment {a} exceeds VCG-budget payment {b} for agent {i} at {profile}"
            )));
        }
    }
    if env.all_nonnegative() {
        let clarke = PaymentRule::Clarke.payments(env, rule, profile)?;
        for (i, (b, c)) in budget.iter().zip(&clarke).enumerate() {
            if b > c {
                return Err(MechError::Invariant(format!(
                    "VCG-budget payment {b} exceeds Clarke payment {c} for agent {i} at {profile}"
                )));
            }
        }
    }
    let proposed: Value = star.iter().sum();
    let vcg_budget: Value = budget.iter().sum();
    let diff = &proposed - &vcg_budget;
    Ok(BudgetComparison {
        proposed,
        vcg_budget,
        diff,
    })
}

/// One CSV row of an experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceRecord {
    pub instance: usize,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub lo: i64,
    pub hi: i64,
    pub budget_proposed: Value,
    pub budget_vcgb: Value,
    pub diff: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonStats {
    pub diffs: Vec<Value>,
    /// Share of instances with `diff < 0`.
    pub fraction_strict: Value,
    pub mean_diff: Value,
    /// Population standard deviation, computed in floating point.
    pub stddev_diff: f64,
}

impl ComparisonStats {
    pub fn from_diffs(diffs: Vec<Value>) -> Self {
        let count = diffs.len() as i64;
        if count == 0 {
            return ComparisonStats {
                diffs,
                fraction_strict: Value::zero(),
                mean_diff: Value::zero(),
                stddev_diff: 0.0,
            };
        }
        let strict = diffs.iter().filter(|d| d.is_negative()).count() as i64;
        let mean: Value = diffs.iter().sum::<Value>() / Value::from_integer(count);
        let var: Value = diffs
            .iter()
            .map(|d| {
                let e = d - &mean;
                &e * &e
            })
            .sum::<Value>()
            / Value::from_integer(count);
        ComparisonStats {
            fraction_strict: Value::new(strict, count),
            mean_diff: mean,
            stddev_diff: var.to_f64().sqrt(),
            diffs,
        }
    }

    pub fn count(&self) -> usize {
        self.diffs.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRun {
    pub records: Vec<InstanceRecord>,
    pub stats: ComparisonStats,
    /// Instances whose mechanisms were exhaustively audited.
    pub audited: usize,
}

fn spot_audit(env: &Environment, rule: &OptionRule, index: usize) -> Result<()> {
    for engine in [PaymentRule::proposed(), PaymentRule::VcgBudget] {
        let found = audit::check_dsic(env, rule, &engine)?.len() + audit::check_ir(env, rule, &engine)?.len();
        if found > 0 {
            return Err(MechError::Invariant(format!(
                "{found} DSIC/IR violations for {engine:?} on instance {index}"
            )));
        }
    }
    Ok(())
}

/// Runs every instance of `config` (in parallel on the current rayon pool)
/// and returns the records in instance order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    config.validate()?;
    let rule = OptionRule::se_lowest();
    let rows = (0..config.instances)
        .into_par_iter()
        .map(|k| {
            let (env, profile) = generate_instance(config, k)?;
            // a fresh rule per instance keeps the selection memo instance-local
            let rule = rule.clone();
            let cmp = compare_budgets(&env, &profile, &rule)?;
            let audited = config.audit_every > 0
                && k % config.audit_every == 0
                && env.profile_count().is_some_and(|c| c <= config.audit_cap);
            if audited {
                spot_audit(&env, &rule, k)?;
            }
            let record = InstanceRecord {
                instance: k,
                n: env.agent_count(),
                m: env.option_count().expect("generated environments are tabular"),
                d: env.domain_size(0),
                lo: config.value_range.0,
                hi: config.value_range.1,
                budget_proposed: cmp.proposed,
                budget_vcgb: cmp.vcg_budget,
                diff: cmp.diff,
            };
            Ok((record, audited))
        })
        .collect::<Result<Vec<_>>>()?;
    let audited = rows.iter().filter(|(_, a)| *a).count();
    let records: Vec<InstanceRecord> = rows.into_iter().map(|(r, _)| r).collect();
    let stats = ComparisonStats::from_diffs(records.iter().map(|r| r.diff.clone()).collect());
    Ok(ExperimentRun {
        records,
        stats,
        audited,
    })
}

pub fn write_records_csv<W: io::Write>(records: &[InstanceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| MechError::input(format!("writing CSV: {e}")))?;
    }
    w.flush().map_err(|e| MechError::input(format!("writing CSV: {e}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Agents,
    Options,
    DomainSize,
}

impl std::str::FromStr for SweepParam {
    type Err = MechError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" | "agents" => Ok(SweepParam::Agents),
            "m" | "options" => Ok(SweepParam::Options),
            "d" | "domain" | "domain-size" => Ok(SweepParam::DomainSize),
            other => Err(MechError::input(format!("unknown sweep parameter `{other}` (use n, m or d)"))),
        }
    }
}

/// One point of a sweep, as written to the summary JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub x: usize,
    pub mean_diff: Value,
    pub stddev_diff: f64,
    pub fraction_strict: Value,
    pub count: usize,
}

impl SweepPoint {
    pub fn new(x: usize, stats: &ComparisonStats) -> Self {
        SweepPoint {
            x,
            mean_diff: stats.mean_diff.clone(),
            stddev_diff: stats.stddev_diff,
            fraction_strict: stats.fraction_strict.clone(),
            count: stats.count(),
        }
    }
}

/// Runs `config` once per value of `param` in `from..=to`, the other sizes
/// staying as configured.
pub fn run_sweep(
    config: &ExperimentConfig,
    param: SweepParam,
    from: usize,
    to: usize,
) -> Result<Vec<(SweepPoint, ExperimentRun)>> {
    if from == 0 || from > to {
        return Err(MechError::input(format!("sweep range {from}..={to} is invalid")));
    }
    (from..=to)
        .map(|x| {
            let mut c = config.clone();
            match param {
                SweepParam::Agents => c.agents = SizeSpec::Fixed(x),
                SweepParam::Options => c.options = SizeSpec::Fixed(x),
                SweepParam::DomainSize => c.domain_size = SizeSpec::Fixed(x),
            }
            let run = run_experiment(&c)?;
            Ok((SweepPoint::new(x, &run.stats), run))
        })
        .collect()
}

/// Single-item auction: agent `i` taking the item is option `X_i`; type `k`
/// values it at `prices[k]` and every other option at 0.
pub fn vickrey_instance(prices: &[Value], bids: &[usize]) -> Result<(Environment, TypeProfile)> {
    if prices.is_empty() || bids.is_empty() {
        return Err(MechError::input("need at least one price and one bidder"));
    }
    if prices.iter().any(|p| !p.is_positive()) || prices.windows(2).any(|w| w[0] <= w[1]) {
        return Err(MechError::input("prices must be positive and strictly decreasing"));
    }
    let n = bids.len();
    if let Some(bad) = bids.iter().position(|&b| b >= prices.len()) {
        return Err(MechError::input(format!(
            "bid index {} of agent {bad} is out of range for {} prices",
            bids[bad],
            prices.len()
        )));
    }
    let domains = (0..n)
        .map(|i| {
            prices
                .iter()
                .map(|p| (0..n).map(|j| if i == j { p.clone() } else { Value::zero() }).collect())
                .collect()
        })
        .collect();
    Ok((Environment::tabular(n, domains)?, TypeProfile::new(bids.to_vec())))
}

/// Venue location on `[lo, hi]`: agent `i`'s types are triples `(a, b, c)`
/// valuing location `x` at `-a (x - b)^2 - c`.
pub fn venue_instance(params: Vec<Vec<(Value, Value, Value)>>, lo: Value, hi: Value) -> Result<Environment> {
    Environment::quadratic_line(lo, hi, params)
}
