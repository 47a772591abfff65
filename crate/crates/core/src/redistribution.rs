//! Returning surplus to agents without breaking justification.
//!
//! A justified mechanism stays justified when each agent's payment is raised
//! by a non-negative amount `h_i(v_{-i})` that ignores the agent's own
//! report. [`redistribute`] picks, agent by agent, the largest such rebate
//! that keeps the budget at every profile of the slice from going negative
//! beyond what the previous stage already allowed.

use std::io;

use rayon::prelude::*;

use crate::audit::{profile_space, DEFAULT_PROFILE_CAP};
use crate::error::{MechError, Result};
use crate::model::{Environment, TypeProfile};
use crate::rules::OptionRule;
use crate::spm::PaymentEngine;
use crate::value::Value;

/// Payments of every agent at every profile, indexed in
/// [`Environment::profiles`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaymentTable {
    sizes: Vec<usize>,
    rows: Vec<Vec<Value>>,
}

impl PaymentTable {
    /// Builds a table from rows in profile order.
    pub fn from_rows(sizes: Vec<usize>, rows: Vec<Vec<Value>>) -> Result<Self> {
        let expected = sizes
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| MechError::input("profile space overflows"))?;
        if rows.len() != expected {
            return Err(MechError::input(format!(
                "payment table has {} rows, the profile space has {expected}",
                rows.len()
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != sizes.len()) {
            return Err(MechError::input(format!(
                "row {bad} has {} payments for {} agents",
                rows[bad].len(),
                sizes.len()
            )));
        }
        Ok(PaymentTable { sizes, rows })
    }

    pub fn agent_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    fn index(&self, profile: &TypeProfile) -> Result<usize> {
        if profile.len() != self.sizes.len() {
            return Err(MechError::input(format!(
                "profile has {} entries, table has {} agents",
                profile.len(),
                self.sizes.len()
            )));
        }
        profile
            .indices()
            .iter()
            .zip(&self.sizes)
            .enumerate()
            .try_fold(0usize, |acc, (i, (&k, &d))| {
                if k < d {
                    Ok(acc * d + k)
                } else {
                    Err(MechError::input(format!("type index {k} out of range for agent {i}")))
                }
            })
    }

    pub fn payments(&self, profile: &TypeProfile) -> Result<&[Value]> {
        Ok(&self.rows[self.index(profile)?])
    }

    pub fn budget(&self, profile: &TypeProfile) -> Result<Value> {
        Ok(self.payments(profile)?.iter().sum())
    }

    /// Budget at every profile, in table order.
    pub fn budgets(&self) -> Vec<Value> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    fn profile_at(&self, mut index: usize) -> TypeProfile {
        let mut idx = vec![0; self.sizes.len()];
        for (slot, &d) in idx.iter_mut().zip(&self.sizes).rev() {
            *slot = index % d;
            index /= d;
        }
        TypeProfile::new(idx)
    }

    /// CSV with header `profile,agent,payment`; profiles are written as
    /// `;`-separated type indices.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io_err = |e: csv::Error| MechError::input(format!("writing CSV: {e}"));
        w.write_record(["profile", "agent", "payment"]).map_err(io_err)?;
        for (k, row) in self.rows.iter().enumerate() {
            let profile = self
                .profile_at(k)
                .indices()
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(";");
            for (i, tau) in row.iter().enumerate() {
                w.write_record([profile.as_str(), &i.to_string(), &tau.to_string()])
                    .map_err(io_err)?;
            }
        }
        w.flush().map_err(|e| MechError::input(format!("writing CSV: {e}")))
    }
}

impl PaymentEngine for PaymentTable {
    fn payments(&self, env: &Environment, _rule: &OptionRule, profile: &TypeProfile) -> Result<Vec<Value>> {
        if env.domain_sizes() != self.sizes {
            return Err(MechError::input("payment table does not match the environment's domains"));
        }
        Ok(PaymentTable::payments(self, profile)?.to_vec())
    }
}

/// Materializes `engine` over the whole profile space.
pub fn tabulate_mechanism(
    env: &Environment,
    rule: &OptionRule,
    engine: &dyn PaymentEngine,
    cap: u64,
) -> Result<PaymentTable> {
    let profiles = profile_space(env, cap)?;
    let rows = profiles
        .par_iter()
        .map(|p| engine.payments(env, rule, p))
        .collect::<Result<Vec<_>>>()?;
    PaymentTable::from_rows(env.domain_sizes(), rows)
}

/// [`tabulate_mechanism`] with the default cap of 10^6 profiles.
pub fn tabulate(env: &Environment, rule: &OptionRule, engine: &dyn PaymentEngine) -> Result<PaymentTable> {
    tabulate_mechanism(env, rule, engine, DEFAULT_PROFILE_CAP)
}

/// Adds `h_t(v_{-t}) = max{0, min_{v_t'} -B(v_t', v_{-t})}` to agent `t`'s
/// payments, for `t` in ascending index order, each stage seeing the
/// budgets left by the previous one.
pub fn redistribute(env: &Environment, table: &PaymentTable) -> Result<PaymentTable> {
    if env.domain_sizes() != table.sizes {
        return Err(MechError::input("payment table does not match the environment's domains"));
    }
    let mut rows = table.rows.clone();
    let sizes = &table.sizes;
    for t in 0..sizes.len() {
        let stride: usize = sizes[t + 1..].iter().product();
        let block = stride * sizes[t];
        let budgets: Vec<Value> = rows.par_iter().map(|r| r.iter().sum()).collect();
        // slices of agent t: fixed v_{-t}, i.e. fixed (outer, inner) around t's digit
        let rebates: Vec<(usize, Value)> = (0..rows.len() / block)
            .into_par_iter()
            .flat_map_iter(|outer| (0..stride).map(move |inner| outer * block + inner))
            .map(|base| {
                let worst = (0..sizes[t])
                    .map(|k| &budgets[base + k * stride])
                    .max()
                    .expect("non-empty domain");
                let h = if worst.is_negative() { -worst } else { Value::zero() };
                (base, h)
            })
            .collect();
        for (base, h) in rebates {
            if h.is_zero() {
                continue;
            }
            for k in 0..sizes[t] {
                rows[base + k * stride][t] += &h;
            }
        }
    }
    Ok(PaymentTable {
        sizes: sizes.clone(),
        rows,
    })
}
