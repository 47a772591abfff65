//! Label-correcting shortest distances (Bellman-Ford) over exact weights.

use crate::error::{MechError, Result};
use crate::value::Value;

use super::graph::Digraph;

struct Relaxation {
    dist: Vec<Option<Value>>,
    /// Vertices still improvable after `|V| - 1` rounds.
    unstable: Vec<usize>,
}

fn relax(graph: &Digraph, source: usize) -> Relaxation {
    let n = graph.vertex_count();
    let mut dist: Vec<Option<Value>> = vec![None; n];
    dist[source] = Some(Value::zero());
    for _ in 1..n.max(1) {
        let mut changed = false;
        for (s, t, w) in &graph.edges {
            let Some(ds) = &dist[*s] else { continue };
            let cand = ds + w;
            if dist[*t].as_ref().is_none_or(|dt| cand < *dt) {
                dist[*t] = Some(cand);
                changed = true;
            }
        }
        if !changed {
            return Relaxation {
                dist,
                unstable: Vec::new(),
            };
        }
    }
    let mut unstable = Vec::new();
    for (s, t, w) in &graph.edges {
        if let (Some(ds), Some(dt)) = (&dist[*s], &dist[*t]) {
            if &(ds + w) < dt {
                unstable.push(*t);
            }
        }
    }
    Relaxation { dist, unstable }
}

fn reaches(graph: &Digraph, from: &[usize], target: usize) -> bool {
    let mut seen = vec![false; graph.vertex_count()];
    let mut stack: Vec<usize> = from.to_vec();
    while let Some(v) = stack.pop() {
        if v == target {
            return true;
        }
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        stack.extend(graph.edges.iter().filter(|(s, _, _)| *s == v).map(|(_, t, _)| *t));
    }
    false
}

/// Exact shortest-walk distance from `source` to `target`.
///
/// Fails with [`MechError::NegativeCycle`] when a negative cycle reachable
/// from `source` can also reach `target`.
pub fn shortest_distance(graph: &Digraph, source: usize, target: usize) -> Result<Value> {
    let n = graph.vertex_count();
    if source >= n || target >= n {
        return Err(MechError::input(format!(
            "vertex out of range (source {source}, target {target}, {n} vertices)"
        )));
    }
    let r = relax(graph, source);
    if !r.unstable.is_empty() && reaches(graph, &r.unstable, target) {
        return Err(MechError::NegativeCycle { agent: None });
    }
    r.dist[target]
        .clone()
        .ok_or_else(|| MechError::input(format!("vertex {target} is unreachable from {source}")))
}

/// Distances from `source` to every vertex (`None` when unreachable).
/// Fails if any negative cycle is reachable from `source`.
pub fn shortest_distances(graph: &Digraph, source: usize) -> Result<Vec<Option<Value>>> {
    let r = relax(graph, source);
    if r.unstable.is_empty() {
        Ok(r.dist)
    } else {
        Err(MechError::NegativeCycle { agent: None })
    }
}
