use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::Result;
use crate::model::{Environment, OptionId, TypeProfile, Valuation};
use crate::rules::OptionRule;
use crate::value::Value;

/// A weighted directed graph on vertices `0..vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize, Value)>,
}

impl Digraph {
    pub fn new(labels: Vec<String>) -> Self {
        Digraph {
            labels,
            edges: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn add_edge(&mut self, from: usize, to: usize, weight: Value) {
        self.edges.push((from, to, weight));
    }

    /// Graphviz rendering with exact rational edge labels.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n");
        for (v, label) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "  n{v} [label=\"{label}\"];");
        }
        for (s, t, w) in &self.edges {
            let _ = writeln!(out, "  n{s} -> n{t} [label=\"{w}\"];");
        }
        out.push_str("}\n");
        out
    }
}

/// The type graph of one agent at one profile. Vertex 0 of the derived
/// [`Digraph`] is the source `⋆`; type `k` is vertex `k + 1`.
///
/// Depends on the profile only through the other agents' types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeGraph {
    pub agent: usize,
    /// `o(v') = φ(v', v_{-i})` for every type `v'`.
    pub options: Vec<OptionId>,
    /// `c(⋆, v') = v'(o(v'))`.
    pub star_weights: Vec<Value>,
    /// `weights[s][t] = c(v_s, v_t) = v_t(o(v_t)) - v_t(o(v_s))`, diagonal included.
    pub weights: Vec<Vec<Value>>,
}

impl TypeGraph {
    pub const STAR: usize = 0;

    pub fn type_count(&self) -> usize {
        self.options.len()
    }

    pub fn vertex_of_type(ty: usize) -> usize {
        ty + 1
    }

    /// Number of distinct selected options, `n_i` at this profile.
    pub fn distinct_options(&self) -> usize {
        let mut seen: Vec<&OptionId> = self.options.iter().collect();
        seen.sort();
        seen.dedup();
        seen.len()
    }

    pub fn to_digraph(&self) -> Digraph {
        let d = self.type_count();
        let mut labels = vec!["*".to_string()];
        labels.extend((0..d).map(|k| format!("a{}:t{}", self.agent, k)));
        let mut g = Digraph::new(labels);
        for (k, w) in self.star_weights.iter().enumerate() {
            g.add_edge(Self::STAR, k + 1, w.clone());
        }
        for (s, row) in self.weights.iter().enumerate() {
            for (t, w) in row.iter().enumerate() {
                g.add_edge(s + 1, t + 1, w.clone());
            }
        }
        g
    }
}

fn eval(v: &Valuation, o: &OptionId) -> Result<Value> {
    match (v, o) {
        (Valuation::Table(row), OptionId::Index(k)) if *k < row.len() => Ok(row[*k].clone()),
        _ => v.eval(o),
    }
}

pub fn build_type_graph(
    env: &Environment,
    rule: &OptionRule,
    agent: usize,
    profile: &TypeProfile,
) -> Result<TypeGraph> {
    let options = rule.select_deviations(env, agent, profile)?;
    let domain = env.domain(agent);
    // own[t] = v_t(o(v_t))
    let own = domain
        .iter()
        .zip(&options)
        .map(|(v, o)| eval(v, o))
        .collect::<Result<Vec<_>>>()?;
    let mut weights = Vec::with_capacity(domain.len());
    for o_s in &options {
        let row = domain
            .iter()
            .zip(&own)
            .map(|(v_t, own_t)| Ok(own_t - &eval(v_t, o_s)?))
            .collect::<Result<Vec<_>>>()?;
        weights.push(row);
    }
    Ok(TypeGraph {
        agent,
        options,
        star_weights: own,
        weights,
    })
}

/// The type graph with all types selecting the same option merged into one
/// vertex; parallel edges keep their minimum weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractedGraph {
    pub agent: usize,
    /// Distinct selected options, in order of first appearance over the domain.
    pub options: Vec<OptionId>,
    /// `type_vertex[k]` is the index into `options` of type `k`'s option.
    pub type_vertex: Vec<usize>,
    /// `c̃(⋆, Φ)`.
    pub star_weights: Vec<Value>,
    /// `weights[a][b] = c̃(Φ_a, Φ_b)`.
    pub weights: Vec<Vec<Value>>,
}

impl ContractedGraph {
    pub const STAR: usize = 0;

    pub fn vertex_count(&self) -> usize {
        self.options.len() + 1
    }

    /// Vertex of the option selected when the agent reports `ty`.
    pub fn vertex_of_type(&self, ty: usize) -> usize {
        self.type_vertex[ty] + 1
    }

    pub fn to_digraph(&self) -> Digraph {
        let mut labels = vec!["*".to_string()];
        labels.extend(self.options.iter().map(|o| format!("a{}:{}", self.agent, o)));
        let mut g = Digraph::new(labels);
        for (a, w) in self.star_weights.iter().enumerate() {
            g.add_edge(Self::STAR, a + 1, w.clone());
        }
        for (a, row) in self.weights.iter().enumerate() {
            for (b, w) in row.iter().enumerate() {
                g.add_edge(a + 1, b + 1, w.clone());
            }
        }
        g
    }
}

pub fn contract_graph(env: &Environment, graph: &TypeGraph) -> Result<ContractedGraph> {
    let mut options: Vec<OptionId> = Vec::new();
    let mut index: HashMap<&OptionId, usize> = HashMap::new();
    let mut type_vertex = Vec::with_capacity(graph.type_count());
    for o in &graph.options {
        let next = options.len();
        let slot = *index.entry(o).or_insert(next);
        if slot == next {
            options.push(o.clone());
        }
        type_vertex.push(slot);
    }
    let n = options.len();
    let domain = env.domain(graph.agent);
    let mut star: Vec<Option<Value>> = vec![None; n];
    let mut weights: Vec<Vec<Option<Value>>> = vec![vec![None; n]; n];
    for (k, v) in domain.iter().enumerate() {
        let b = type_vertex[k];
        let own = &graph.star_weights[k];
        if star[b].as_ref().is_none_or(|w| own < w) {
            star[b] = Some(own.clone());
        }
        for (a, phi) in options.iter().enumerate() {
            let w = own - &eval(v, phi)?;
            let slot = &mut weights[a][b];
            if slot.as_ref().is_none_or(|cur| w < *cur) {
                *slot = Some(w);
            }
        }
    }
    let unwrap = |w: Option<Value>| w.expect("every option vertex has a preimage");
    Ok(ContractedGraph {
        agent: graph.agent,
        options,
        type_vertex,
        star_weights: star.into_iter().map(unwrap).collect(),
        weights: weights
            .into_iter()
            .map(|row| row.into_iter().map(unwrap).collect())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::value::val;

    fn rule_a() -> OptionRule {
        OptionRule::se_lowest()
    }

    fn rule_b() -> OptionRule {
        OptionRule::social_welfare(crate::rules::TieBreak::HighestIndex)
    }

    #[test]
    fn figure_one_graphs() {
        let env = example1(1);
        let g = build_type_graph(&env, &rule_a(), 0, &p(&[0, 0])).unwrap();
        assert_eq!(g.star_weights, vals(&[1, -2]));
        assert_eq!(g.weights[0][1], val(1));
        assert_eq!(g.weights[1][0], val(1));
        assert_eq!(g.weights[0][0], val(0));
        assert_eq!(g.weights[1][1], val(0));

        let g = build_type_graph(&env, &rule_b(), 0, &p(&[0, 0])).unwrap();
        assert_eq!(g.star_weights, vals(&[1, 0]));
        assert_eq!(g.weights[0][1], val(3));
        assert_eq!(g.weights[1][0], val(1));
    }

    #[test]
    fn single_type_graph() {
        let env = example1(1);
        let g = build_type_graph(&env, &rule_a(), 1, &p(&[1, 0])).unwrap();
        assert_eq!(g.options, vec![x(1)]);
        assert_eq!(g.star_weights, vals(&[0]));
        assert_eq!(g.weights, vec![vals(&[0])]);
        assert_eq!(g.to_digraph().edges.len(), 2);
    }

    #[test]
    fn graph_ignores_own_report() {
        let env = example1(1);
        let g0 = build_type_graph(&env, &rule_a(), 0, &p(&[0, 0])).unwrap();
        let g1 = build_type_graph(&env, &rule_a(), 0, &p(&[1, 0])).unwrap();
        assert_eq!(g0, g1);
    }

    #[test]
    fn contraction_examples() {
        let env = example1(1);
        let g = build_type_graph(&env, &rule_a(), 0, &p(&[0, 0])).unwrap();
        let c = contract_graph(&env, &g).unwrap();
        assert_eq!(c.options, vec![x(0), x(1)]);
        assert_eq!(c.star_weights, g.star_weights);
        assert_eq!(c.weights, g.weights);

        // every type picks the only option
        let flat = Environment::tabular_i64(1, &[vec![vec![5], vec![-2], vec![7]]]).unwrap();
        let g = build_type_graph(&flat, &rule_a(), 0, &p(&[0])).unwrap();
        let c = contract_graph(&flat, &g).unwrap();
        assert_eq!(c.vertex_count(), 2);
        assert_eq!(c.star_weights, vals(&[-2]));
        assert_eq!(c.weights, vec![vals(&[0])]);
    }

    #[test]
    fn dot_dump() {
        let env = example1(1);
        let g = build_type_graph(&env, &rule_a(), 0, &p(&[0, 0])).unwrap();
        let dot = g.to_digraph().to_dot("G_0");
        assert!(dot.starts_with("digraph \"G_0\" {"));
        assert!(dot.contains("n0 -> n2 [label=\"-2\"];"));
    }
}
