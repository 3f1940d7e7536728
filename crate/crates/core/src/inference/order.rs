use std::collections::{BTreeMap, BTreeSet};

use crate::model::{MarkovRandomField, VarId};

/// Sequence in which variables are eliminated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrder(pub Vec<VarId>);

impl EliminationOrder {
    pub fn as_slice(&self) -> &[VarId] {
        &self.0
    }
}

pub(crate) type Graph = BTreeMap<VarId, BTreeSet<VarId>>;

/// Interaction graph of a set of factor scopes.
pub(crate) fn graph_of<'a>(scopes: impl IntoIterator<Item = &'a [VarId]>) -> Graph {
    let mut g = Graph::new();
    for scope in scopes {
        for &a in scope {
            let entry = g.entry(a).or_default();
            entry.extend(scope.iter().copied().filter(|&b| b != a));
        }
    }
    g
}

fn fill_in(g: &Graph, v: VarId) -> usize {
    let nb: Vec<VarId> = g[&v].iter().copied().collect();
    let mut missing = 0;
    for (i, a) in nb.iter().enumerate() {
        for b in &nb[i + 1..] {
            if !g[a].contains(b) {
                missing += 1;
            }
        }
    }
    missing
}

fn eliminate(g: &mut Graph, v: VarId) -> usize {
    let nb = g.remove(&v).unwrap_or_default();
    for a in &nb {
        let edges = g.get_mut(a).expect("symmetric adjacency");
        edges.remove(&v);
        edges.extend(nb.iter().copied().filter(|b| b != a));
    }
    nb.len()
}

/// Greedy min-fill over `targets`, lowest id on ties. Variables of the graph
/// outside `targets` are never eliminated.
pub(crate) fn min_fill(mut g: Graph, targets: &BTreeSet<VarId>) -> EliminationOrder {
    for t in targets {
        g.entry(*t).or_default();
    }
    let mut remaining = targets.clone();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let best = *remaining
            .iter()
            .min_by_key(|&&v| (fill_in(&g, v), v))
            .expect("non-empty");
        remaining.remove(&best);
        eliminate(&mut g, best);
        order.push(best);
    }
    EliminationOrder(order)
}

/// Largest neighbourhood met while eliminating along `order`.
pub(crate) fn width(mut g: Graph, order: &[VarId]) -> usize {
    order
        .iter()
        .map(|&v| eliminate(&mut g, v))
        .max()
        .unwrap_or(0)
}

/// Min-fill elimination order over `targets` in the interaction graph of `mrf`.
pub fn min_fill_order(mrf: &MarkovRandomField, targets: &BTreeSet<VarId>) -> EliminationOrder {
    min_fill(mrf.interaction_graph(), targets)
}

/// Induced width of eliminating `order` from the interaction graph of `mrf`:
/// the size of the largest neighbourhood created, so a clique of `n`
/// variables has width `n - 1`.
pub fn induced_width(mrf: &MarkovRandomField, order: &EliminationOrder) -> usize {
    width(mrf.interaction_graph(), order.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{variable_map, DiscreteVariable, Factor, Repr, Role};

    fn mrf(n: u32, edges: &[(u32, u32)]) -> MarkovRandomField {
        let vars = variable_map((0..n).map(|i| {
            DiscreteVariable::with_cardinality(VarId(i), format!("v{i}"), 2, Role::Public).unwrap()
        }))
        .unwrap();
        let mut pots: Vec<Factor> = edges
            .iter()
            .map(|&(a, b)| {
                Factor::new(&[(VarId(a), 2), (VarId(b), 2)], vec![1.0; 4], Repr::Linear).unwrap()
            })
            .collect();
        pots.extend(
            (0..n).map(|i| Factor::new(&[(VarId(i), 2)], vec![1.0; 2], Repr::Linear).unwrap()),
        );
        MarkovRandomField::new(vars, pots).unwrap()
    }

    #[test]
    fn chain_is_swept_from_an_end() {
        let m = mrf(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let all: BTreeSet<VarId> = (0..5).map(VarId).collect();
        let order = min_fill_order(&m, &all);
        assert_eq!(order.0, (0..5).map(VarId).collect::<Vec<_>>());
        assert_eq!(induced_width(&m, &order), 1);
    }

    #[test]
    fn clique_width() {
        let m = mrf(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let all: BTreeSet<VarId> = (0..4).map(VarId).collect();
        assert_eq!(induced_width(&m, &min_fill_order(&m, &all)), 3);
    }

    #[test]
    fn star_hub_waits_for_leaves() {
        // leaves have zero fill, the hub would create a clique
        let m = mrf(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let all: BTreeSet<VarId> = (0..5).map(VarId).collect();
        let order = min_fill_order(&m, &all);
        let hub_at = order.0.iter().position(|&v| v == VarId(0)).unwrap();
        assert!(hub_at >= 3);
        assert_eq!(induced_width(&m, &order), 1);
    }
}
