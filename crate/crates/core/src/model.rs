//! Environments, type profiles, welfare and mechanism outcomes.

use std::fmt;

use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::value::Value;

/// An option of the environment: a dense index into a tabular option list,
/// or an exact location on a closed interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionId {
    Index(usize),
    Point(Value),
}

impl OptionId {
    pub fn index(&self) -> Option<usize> {
        match self {
            OptionId::Index(k) => Some(*k),
            OptionId::Point(_) => None,
        }
    }
}

impl fmt::Display for OptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptionId::Index(k) => write!(f, "X{}", k + 1),
            OptionId::Point(x) => write!(f, "x={x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptionSpace {
    Tabular { count: usize },
    /// The interval `[lo, hi]`; valuations are concave quadratics.
    QuadraticLine { lo: Value, hi: Value },
}

/// A type: the valuation function an agent holds over the option space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    Table(Vec<Value>),
    /// `x ↦ -a (x - b)^2 - c` with `a > 0`.
    Quadratic { a: Value, b: Value, c: Value },
}

impl Valuation {
    pub fn eval(&self, option: &OptionId) -> Result<Value> {
        match (self, option) {
            (Valuation::Table(row), OptionId::Index(k)) => row
                .get(*k)
                .cloned()
                .ok_or_else(|| MechError::input(format!("option index {k} out of range"))),
            (Valuation::Quadratic { a, b, c }, OptionId::Point(x)) => {
                let d = x - b;
                Ok(-(a * &(&d * &d)) - c)
            }
            (Valuation::Table(_), OptionId::Point(_)) => Err(MechError::input(
                "a location option was given for a tabular valuation",
            )),
            (Valuation::Quadratic { .. }, OptionId::Index(_)) => Err(MechError::input(
                "an indexed option was given for a quadratic valuation",
            )),
        }
    }

    /// Entry `k` of a tabular valuation. Panics on quadratic valuations.
    #[inline]
    pub fn at(&self, k: usize) -> &Value {
        match self {
            Valuation::Table(row) => &row[k],
            Valuation::Quadratic { .. } => panic!("indexed lookup on a quadratic valuation"),
        }
    }
}

/// Agents, option space and per-agent finite type domains.
///
/// Immutable once built; constructors validate every structural invariant.
#[derive(Clone)]
pub struct Environment {
    agents: usize,
    options: OptionSpace,
    domains: Vec<Vec<Valuation>>,
    /// Process-unique tag of this value (shared by clones), used to scope
    /// rule memos to the environment they were filled for.
    id: u64,
}

static NEXT_ENV_ID: AtomicU64 = AtomicU64::new(0);

impl PartialEq for Environment {
    fn eq(&self, other: &Self) -> bool {
        self.agents == other.agents && self.options == other.options && self.domains == other.domains
    }
}

impl Eq for Environment {}

impl fmt::Debug for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Environment")
            .field("agents", &self.agents)
            .field("options", &self.options)
            .field("domains", &self.domains)
            .finish()
    }
}

/// One failed structural invariant of an [`Environment`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvViolation {
    pub invariant: &'static str,
    pub location: String,
}

impl fmt::Display for EnvViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.invariant, self.location)
    }
}

impl Environment {
    /// Builds without validation. [`validate_environment`] reports what is wrong.
    pub fn from_parts(agents: usize, options: OptionSpace, domains: Vec<Vec<Valuation>>) -> Self {
        Environment {
            agents,
            options,
            domains,
            id: NEXT_ENV_ID.fetch_add(1, AtomicOrdering::Relaxed),
        }
    }

    pub(crate) fn id(&self) -> u64 {
        self.id
    }

    pub fn new(agents: usize, options: OptionSpace, domains: Vec<Vec<Valuation>>) -> Result<Self> {
        let env = Self::from_parts(agents, options, domains);
        let violations = validate_environment(&env);
        if violations.is_empty() {
            Ok(env)
        } else {
            let joined: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(MechError::Input(format!(
                "invalid environment: {}",
                joined.join("; ")
            )))
        }
    }

    /// `domains[i][k]` is the valuation vector of agent `i`'s `k`-th type.
    pub fn tabular(option_count: usize, domains: Vec<Vec<Vec<Value>>>) -> Result<Self> {
        let agents = domains.len();
        let domains = domains
            .into_iter()
            .map(|d| d.into_iter().map(Valuation::Table).collect())
            .collect();
        Self::new(agents, OptionSpace::Tabular { count: option_count }, domains)
    }

    /// Convenience for integer tables.
    pub fn tabular_i64(option_count: usize, domains: &[Vec<Vec<i64>>]) -> Result<Self> {
        Self::tabular(
            option_count,
            domains
                .iter()
                .map(|d| {
                    d.iter()
                        .map(|row| row.iter().map(|&x| Value::from(x)).collect())
                        .collect()
                })
                .collect(),
        )
    }

    /// `domains[i][k] = (a, b, c)` for the valuation `x ↦ -a (x - b)^2 - c`.
    pub fn quadratic_line(
        lo: Value,
        hi: Value,
        domains: Vec<Vec<(Value, Value, Value)>>,
    ) -> Result<Self> {
        let agents = domains.len();
        let domains = domains
            .into_iter()
            .map(|d| {
                d.into_iter()
                    .map(|(a, b, c)| Valuation::Quadratic { a, b, c })
                    .collect()
            })
            .collect();
        Self::new(agents, OptionSpace::QuadraticLine { lo, hi }, domains)
    }

    pub fn agent_count(&self) -> usize {
        self.agents
    }

    pub fn option_space(&self) -> &OptionSpace {
        &self.options
    }

    /// Number of options for tabular environments.
    pub fn option_count(&self) -> Option<usize> {
        match self.options {
            OptionSpace::Tabular { count } => Some(count),
            OptionSpace::QuadraticLine { .. } => None,
        }
    }

    pub fn is_tabular(&self) -> bool {
        matches!(self.options, OptionSpace::Tabular { .. })
    }

    pub(crate) fn require_tabular(&self, what: &str) -> Result<usize> {
        self.option_count().ok_or_else(|| {
            MechError::Unsupported(format!("{what} needs a tabular option space"))
        })
    }

    pub fn domains(&self) -> &[Vec<Valuation>] {
        &self.domains
    }

    pub fn domain(&self, agent: usize) -> &[Valuation] {
        &self.domains[agent]
    }

    pub fn domain_size(&self, agent: usize) -> usize {
        self.domains[agent].len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.domains.iter().map(Vec::len).collect()
    }

    pub fn valuation(&self, agent: usize, ty: usize) -> &Valuation {
        &self.domains[agent][ty]
    }

    pub fn value(&self, agent: usize, ty: usize, option: &OptionId) -> Result<Value> {
        self.domains
            .get(agent)
            .and_then(|d| d.get(ty))
            .ok_or_else(|| MechError::input(format!("no type {ty} for agent {agent}")))?
            .eval(option)
    }

    pub fn check_option(&self, option: &OptionId) -> Result<()> {
        match (&self.options, option) {
            (OptionSpace::Tabular { count }, OptionId::Index(k)) if k < count => Ok(()),
            (OptionSpace::QuadraticLine { lo, hi }, OptionId::Point(x)) if lo <= x && x <= hi => {
                Ok(())
            }
            _ => Err(MechError::input(format!(
                "option {option} is not in the option space"
            ))),
        }
    }

    /// Every tabular option, in index order.
    pub fn options(&self) -> impl Iterator<Item = OptionId> {
        (0..self.option_count().unwrap_or(0)).map(OptionId::Index)
    }

    /// `|V| = Π |V_i|`, or `None` on overflow.
    pub fn profile_count(&self) -> Option<u64> {
        self.domains
            .iter()
            .try_fold(1u64, |acc, d| acc.checked_mul(d.len() as u64))
    }

    /// All profiles in lexicographic order (agent 0 varies slowest).
    pub fn profiles(&self) -> Profiles {
        Profiles {
            sizes: self.domain_sizes(),
            next: if self.domains.iter().any(Vec::is_empty) {
                None
            } else {
                Some(vec![0; self.domains.len()])
            },
        }
    }

    /// Position of `profile` in [`Environment::profiles`] order.
    pub fn profile_index(&self, profile: &TypeProfile) -> u64 {
        profile
            .0
            .iter()
            .zip(&self.domains)
            .fold(0u64, |acc, (&k, d)| acc * d.len() as u64 + k as u64)
    }

    pub fn profile_at(&self, mut index: u64) -> TypeProfile {
        let mut idx = vec![0; self.domains.len()];
        for (slot, d) in idx.iter_mut().zip(&self.domains).rev() {
            let n = d.len() as u64;
            *slot = (index % n) as usize;
            index /= n;
        }
        TypeProfile(idx)
    }

    /// True when every tabular valuation is non-negative.
    pub fn all_nonnegative(&self) -> bool {
        self.domains.iter().flatten().all(|v| match v {
            Valuation::Table(row) => row.iter().all(|x| !x.is_negative()),
            Valuation::Quadratic { .. } => false,
        })
    }

    pub fn check_profile(&self, profile: &TypeProfile) -> Result<()> {
        if profile.0.len() != self.agents || self.domains.len() != self.agents {
            return Err(MechError::input(format!(
                "profile has {} entries, environment has {} agents",
                profile.0.len(),
                self.agents
            )));
        }
        for (i, (&k, d)) in profile.0.iter().zip(&self.domains).enumerate() {
            if k >= d.len() {
                return Err(MechError::input(format!(
                    "type index {k} out of range for agent {i} (domain size {})",
                    d.len()
                )));
            }
        }
        Ok(())
    }

    /// Welfare of every tabular option at `profile`, optionally leaving one agent out.
    pub fn welfare_by_option(&self, profile: &TypeProfile, excluded: Option<usize>) -> Vec<Value> {
        let m = self.option_count().expect("tabular environment");
        let mut acc = vec![Value::zero(); m];
        for (i, &k) in profile.0.iter().enumerate() {
            if Some(i) == excluded {
                continue;
            }
            let v = &self.domains[i][k];
            for (x, slot) in acc.iter_mut().enumerate() {
                *slot += v.at(x);
            }
        }
        acc
    }
}

/// Iterator over all type profiles.
pub struct Profiles {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Profiles {
    type Item = TypeProfile;

    fn next(&mut self) -> Option<TypeProfile> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.sizes[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(TypeProfile(current))
    }
}

/// One reported type index per agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeProfile(pub Vec<usize>);

impl TypeProfile {
    pub fn new(indices: Vec<usize>) -> Self {
        TypeProfile(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn type_of(&self, agent: usize) -> usize {
        self.0[agent]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(v_i', v_{-i})`: the same profile with agent `agent` reporting `ty`.
    pub fn with_type(&self, agent: usize, ty: usize) -> TypeProfile {
        let mut idx = self.0.clone();
        idx[agent] = ty;
        TypeProfile(idx)
    }
}

impl fmt::Display for TypeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl std::str::FromStr for TypeProfile {
    type Err = MechError;

    fn from_str(s: &str) -> Result<Self> {
        s.trim_matches(|c| c == '(' || c == ')')
            .split([',', ';'])
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| MechError::input(format!("bad profile entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(TypeProfile)
    }
}

/// `S(X; v)`: the sum of every agent's valuation of `option`.
pub fn social_welfare(env: &Environment, profile: &TypeProfile, option: &OptionId) -> Result<Value> {
    env.check_profile(profile)?;
    env.check_option(option)?;
    let mut total = Value::zero();
    for (i, &k) in profile.0.iter().enumerate() {
        total += env.value(i, k, option)?;
    }
    Ok(total)
}

/// The selected option together with payments, utilities and budget.
///
/// Positive payments flow from the broker to the agent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismOutcome {
    pub option: OptionId,
    pub payments: Vec<Value>,
    pub utilities: Vec<Value>,
    pub budget: Value,
}

pub fn assemble_outcome(
    env: &Environment,
    profile: &TypeProfile,
    option: OptionId,
    payments: Vec<Value>,
) -> Result<MechanismOutcome> {
    env.check_profile(profile)?;
    if payments.len() != env.agent_count() {
        return Err(MechError::input(format!(
            "{} payments for {} agents",
            payments.len(),
            env.agent_count()
        )));
    }
    let utilities = payments
        .iter()
        .enumerate()
        .map(|(i, t)| Ok(env.value(i, profile.type_of(i), &option)? + t))
        .collect::<Result<Vec<_>>>()?;
    let budget = payments.iter().sum();
    Ok(MechanismOutcome {
        option,
        payments,
        utilities,
        budget,
    })
}

pub fn validate_environment(env: &Environment) -> Vec<EnvViolation> {
    let mut out = Vec::new();
    let mut push = |invariant, location: String| out.push(EnvViolation { invariant, location });
    if env.agents == 0 {
        push("at least one agent is required", "agents".into());
    }
    if env.domains.len() != env.agents {
        push(
            "one type domain per agent",
            format!("domains (found {}, agents {})", env.domains.len(), env.agents),
        );
    }
    match &env.options {
        OptionSpace::Tabular { count } => {
            if *count == 0 {
                push("at least one option is required", "options".into());
            }
        }
        OptionSpace::QuadraticLine { lo, hi } => {
            if lo > hi {
                push("interval lower bound must not exceed upper bound", "options.interval".into());
            }
        }
    }
    for (i, domain) in env.domains.iter().enumerate() {
        if domain.is_empty() {
            push("type domains must be non-empty", format!("domains[{i}]"));
        }
        for (k, ty) in domain.iter().enumerate() {
            match (&env.options, ty) {
                (OptionSpace::Tabular { count }, Valuation::Table(row)) => {
                    if row.len() != *count {
                        push(
                            "valuation vectors must have one entry per option",
                            format!("domains[{i}][{k}] (length {}, options {count})", row.len()),
                        );
                    }
                }
                (OptionSpace::QuadraticLine { .. }, Valuation::Quadratic { a, .. }) => {
                    if !a.is_positive() {
                        push(
                            "quadratic coefficient a must be strictly positive",
                            format!("domains[{i}][{k}]"),
                        );
                    }
                }
                _ => push(
                    "valuation kind must match the option space",
                    format!("domains[{i}][{k}]"),
                ),
            }
        }
    }
    out
}
