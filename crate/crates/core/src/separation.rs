//! d-separation, CSI-separation and equivalence checks.
//!
//! d-separation is decided by active-trail reachability: ancestors of the
//! separator are marked first, then a breadth-first walk over
//! (node, direction) states follows only trails that stay active.
//! CSI-separation runs the same test on the context-specific graph with the
//! context variables added to the separator.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{
    context_specific_graph, immoralities, label_satisfied, skeleton, Context, Dag, Edge, Ldag,
    NodeId,
};

/// Default cap on enumerated contexts.
pub const DEFAULT_CONTEXT_BOUND: u128 = 1 << 20;

/// Nodes reachable from `sources` along trails that are active given `given`.
///
/// Nodes in `given` are never reported.
pub fn reachable(dag: &Dag, sources: &[NodeId], given: &[NodeId]) -> Vec<bool> {
    let d = dag.node_count();
    let mut observed = vec![false; d];
    for &s in given {
        observed[s] = true;
    }
    let evidence_ancestor = dag.ancestral_set(given);
    let children: Vec<Vec<NodeId>> = (0..d).map(|n| dag.children(n)).collect();

    // state = (node, arrived_from_child): true means the walk moves upward
    let mut visited = vec![[false; 2]; d];
    let mut reached = vec![false; d];
    let mut queue: VecDeque<(NodeId, bool)> = sources.iter().map(|&s| (s, true)).collect();
    while let Some((node, upward)) = queue.pop_front() {
        if visited[node][upward as usize] {
            continue;
        }
        visited[node][upward as usize] = true;
        if !observed[node] {
            reached[node] = true;
        }
        if upward {
            if !observed[node] {
                queue.extend(dag.parents(node).iter().map(|&p| (p, true)));
                queue.extend(children[node].iter().map(|&c| (c, false)));
            }
        } else {
            if !observed[node] {
                queue.extend(children[node].iter().map(|&c| (c, false)));
            }
            // collider (or its descendant) observed: the v-structure opens
            if evidence_ancestor[node] {
                queue.extend(dag.parents(node).iter().map(|&p| (p, true)));
            }
        }
    }
    reached
}

/// Whether `a` and `b` are d-separated by `s`.
pub fn d_separated(dag: &Dag, a: &[NodeId], b: &[NodeId], s: &[NodeId]) -> bool {
    let reached = reachable(dag, a, s);
    !b.iter().any(|&n| reached[n])
}

/// Separation query `X_A ⟂ X_B || x_C, X_S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationQuery {
    a: Vec<NodeId>,
    b: Vec<NodeId>,
    s: Vec<NodeId>,
    ctx: Context,
}

impl SeparationQuery {
    pub fn new(a: Vec<NodeId>, b: Vec<NodeId>, s: Vec<NodeId>, ctx: Context) -> Result<Self> {
        let context_nodes: Vec<NodeId> = ctx.nodes().collect();
        check_disjoint(&[&a, &b, &s, &context_nodes])?;
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidQuery("A and B must be non-empty".into()));
        }
        Ok(Self { a, b, s, ctx })
    }

    pub fn a(&self) -> &[NodeId] {
        &self.a
    }

    pub fn b(&self) -> &[NodeId] {
        &self.b
    }

    pub fn s(&self) -> &[NodeId] {
        &self.s
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }
}

fn check_disjoint(sets: &[&[NodeId]]) -> Result<()> {
    let mut seen = HashSet::new();
    for set in sets {
        for &n in *set {
            if !seen.insert(n) {
                return Err(Error::InvalidQuery(format!(
                    "node {n} appears in more than one of A, B, S, C"
                )));
            }
        }
    }
    Ok(())
}

/// CSI-separation: d-separation of A and B by `S ∪ C` in `G(x_C)`.
pub fn csi_separated(ldag: &Ldag, query: &SeparationQuery) -> Result<bool> {
    check_nodes(ldag, query.a.iter().chain(&query.b).chain(&query.s))?;
    query.ctx.validate(ldag.vars())?;
    let graph = context_specific_graph(ldag, &query.ctx);
    let mut separator = query.s.clone();
    separator.extend(query.ctx.nodes());
    Ok(d_separated(&graph, &query.a, &query.b, &separator))
}

fn check_nodes<'a>(ldag: &Ldag, nodes: impl Iterator<Item = &'a NodeId>) -> Result<()> {
    for &n in nodes {
        if n >= ldag.node_count() {
            return Err(Error::InvalidQuery(format!("node {n} out of range")));
        }
    }
    Ok(())
}

/// Every assignment of the listed nodes, as contexts.
pub fn enumerate_contexts(ldag: &Ldag, nodes: &[NodeId], bound: u128) -> Result<Vec<Context>> {
    let size = ldag.vars().space_size(nodes);
    if size > bound {
        return Err(Error::ContextTooLarge { size, bound });
    }
    let radix = ldag.vars().radix(nodes);
    Ok((0..radix.size())
        .map(|code| {
            nodes
                .iter()
                .copied()
                .zip(radix.decode(code))
                .collect::<Context>()
        })
        .collect())
}

/// Reasoning by cases: `X_A ⟂ X_B | X_S, X_C` is certified when CSI-separation
/// holds in every context `x_C`. A `false` answer is inconclusive.
pub fn ci_by_cases(
    ldag: &Ldag,
    a: &[NodeId],
    b: &[NodeId],
    s: &[NodeId],
    c: &[NodeId],
    bound: u128,
) -> Result<bool> {
    check_disjoint(&[a, b, s, c])?;
    for ctx in enumerate_contexts(ldag, c, bound)? {
        let query = SeparationQuery::new(a.to_vec(), b.to_vec(), s.to_vec(), ctx)?;
        if !csi_separated(ldag, &query)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Equal skeletons and equal immoralities.
pub fn markov_equivalent(g1: &Dag, g2: &Dag) -> bool {
    g1.node_count() == g2.node_count()
        && skeleton(g1) == skeleton(g2)
        && immoralities(g1) == immoralities(g2)
}

/// CSI-equivalence of two regular maximal LDAGs: the context-specific graphs
/// must be Markov equivalent for every full context.
///
/// Only variables in some label domain can change which labels are
/// satisfied, so enumeration runs over those. Each distinct pair of
/// satisfied-edge sets is compared once; the pair in which no label is
/// satisfied compares the underlying graphs.
pub fn csi_equivalent(l1: &Ldag, l2: &Ldag, bound: u128) -> Result<bool> {
    if l1.vars() != l2.vars() {
        return Err(Error::VariableMismatch(
            "CSI-equivalence needs a shared variable table".into(),
        ));
    }
    if skeleton(l1.dag()) != skeleton(l2.dag()) {
        return Ok(false);
    }
    let relevant: Vec<NodeId> = l1
        .labels()
        .values()
        .chain(l2.labels().values())
        .flat_map(|label| label.domain().iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let contexts = enumerate_contexts(l1, &relevant, bound)?;
    let mut checked: HashSet<(Vec<Edge>, Vec<Edge>)> = HashSet::new();
    for ctx in contexts {
        let removed1 = satisfied_edges(l1, &ctx);
        let removed2 = satisfied_edges(l2, &ctx);
        if removed1.is_empty() && removed2.is_empty() && !markov_equivalent(l1.dag(), l2.dag()) {
            // no label applies in this context: the underlying graphs must already agree
            return Ok(false);
        }
        if !checked.insert((removed1.clone(), removed2.clone())) {
            continue;
        }
        let g1 = l1.dag().without_edges(&removed1.iter().copied().collect());
        let g2 = l2.dag().without_edges(&removed2.iter().copied().collect());
        if !markov_equivalent(&g1, &g2) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn satisfied_edges(ldag: &Ldag, ctx: &Context) -> Vec<Edge> {
    ldag.labels()
        .iter()
        .filter(|(_, label)| label_satisfied(label, ctx))
        .map(|(&edge, _)| edge)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(d: usize, edges: &[Edge]) -> Dag {
        Dag::from_edges(d, edges).unwrap()
    }

    #[test]
    fn collider_blocks_until_observed() {
        let g = dag(3, &[(0, 2), (1, 2)]);
        assert!(d_separated(&g, &[0], &[1], &[]));
        assert!(!d_separated(&g, &[0], &[1], &[2]));
    }

    #[test]
    fn observed_descendant_of_collider_opens_it() {
        let g = dag(4, &[(0, 2), (1, 2), (2, 3)]);
        assert!(d_separated(&g, &[0], &[1], &[]));
        assert!(!d_separated(&g, &[0], &[1], &[3]));
    }

    #[test]
    fn chain_blocked_by_middle() {
        let g = dag(3, &[(0, 1), (1, 2)]);
        assert!(d_separated(&g, &[0], &[2], &[1]));
        assert!(!d_separated(&g, &[0], &[2], &[]));
    }

    #[test]
    fn markov_equivalence_examples() {
        let forward = dag(3, &[(0, 1), (1, 2)]);
        let backward = dag(3, &[(1, 0), (2, 1)]);
        assert!(markov_equivalent(&forward, &backward));
        let collider = dag(3, &[(0, 2), (1, 2)]);
        let chain = dag(3, &[(0, 2), (2, 1)]);
        assert!(!markov_equivalent(&collider, &chain));
        assert!(markov_equivalent(&collider, &collider));
    }

    #[test]
    fn overlapping_query_rejected() {
        let err = SeparationQuery::new(vec![0], vec![0], vec![], Context::new()).unwrap_err();
        assert!(matches!(err, Error::InvalidQuery(_)));
        let err = SeparationQuery::new(vec![0], vec![1], vec![2], Context::new().with(2, 0));
        assert!(err.is_err());
    }

    #[test]
    fn context_bound_enforced() {
        let ldag = Ldag::new(crate::graph::VariableTable::binary(4), Dag::empty(4)).unwrap();
        let err = ci_by_cases(&ldag, &[0], &[1], &[], &[2, 3], 3).unwrap_err();
        assert_eq!(err, Error::ContextTooLarge { size: 4, bound: 3 });
    }
}
