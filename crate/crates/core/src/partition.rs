//! CSI-consistent partitions of parent outcome spaces.
//!
//! Every label configuration `x` on edge `(i, j)` forces the parent
//! configurations `{x} × X_i` to share one conditional distribution. Taking
//! the transitive closure of these merges over all labels into `j` yields
//! the classes of the minimal reduced CPT of `j`. The rest of this module
//! builds on that partition: parameter counting, the maximality test and
//! closure, and the regularity test and simplification.

use std::collections::BTreeSet;

use crate::config::MixedRadix;
use crate::graph::{Edge, Label, Ldag, NodeId};

/// Disjoint-set forest with path compression and union by rank.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
        true
    }
}

/// Labels into one node, packed per parent position.
///
/// `labels[p]` holds the configurations (packed over the parent radix with
/// coordinate `p` removed) of the label on the edge from `parents[p]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalStructure {
    pub child: NodeId,
    pub child_cardinality: usize,
    pub parents: Vec<NodeId>,
    pub radix: MixedRadix,
    pub labels: Vec<BTreeSet<usize>>,
}

impl LocalStructure {
    /// Unlabeled local structure.
    pub fn unlabeled(child: NodeId, child_cardinality: usize, parents: Vec<NodeId>, radices: Vec<usize>) -> Self {
        let labels = vec![BTreeSet::new(); parents.len()];
        Self {
            child,
            child_cardinality,
            parents,
            radix: MixedRadix::new(radices),
            labels,
        }
    }

    pub fn of(ldag: &Ldag, node: NodeId) -> Self {
        let parents = ldag.parents(node).to_vec();
        let radices = parents.iter().map(|&p| ldag.vars().cardinality(p)).collect();
        let mut local = Self::unlabeled(node, ldag.vars().cardinality(node), parents, radices);
        for (pos, &p) in local.parents.iter().enumerate() {
            if let Some(label) = ldag.label(p, node) {
                local.labels[pos] = label.codes().clone();
            }
        }
        local
    }

    /// Number of parent configurations `q_j`.
    pub fn parent_space(&self) -> usize {
        self.radix.size()
    }

    /// Size of the label domain of the edge from parent position `pos`.
    pub fn domain_size(&self, pos: usize) -> usize {
        self.radix.size() / self.radix.radices()[pos]
    }

    /// Parent configurations `{x} × X_{parents[pos]}` for label code `x`.
    pub fn fiber(&self, pos: usize, code: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.radix.radices()[pos]).map(move |v| self.radix.insert_digit(code, pos, v))
    }

    /// Label objects keyed by edge, ready to be stored in an [`Ldag`].
    pub fn to_labels(&self) -> Vec<(Edge, Label)> {
        self.parents
            .iter()
            .enumerate()
            .filter(|(pos, _)| !self.labels[*pos].is_empty())
            .map(|(pos, &p)| {
                let domain: Vec<NodeId> = self
                    .parents
                    .iter()
                    .copied()
                    .filter(|&q| q != p)
                    .collect();
                let label = Label::from_codes(domain, self.radix.without(pos), self.labels[pos].clone());
                ((p, self.child), label)
            })
            .collect()
    }

    pub fn label_config_count(&self) -> usize {
        self.labels.iter().map(BTreeSet::len).sum()
    }
}

/// Partition of the parent outcome space of one node.
///
/// Classes are numbered in order of their smallest member configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentPartition {
    pub node: NodeId,
    pub parents: Vec<NodeId>,
    pub radix: MixedRadix,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl ParentPartition {
    /// Canonicalizes an arbitrary class assignment over packed parent configurations.
    pub fn from_assignment(node: NodeId, parents: Vec<NodeId>, radix: MixedRadix, raw: &[usize]) -> Self {
        debug_assert_eq!(raw.len(), radix.size());
        let mut relabel = std::collections::HashMap::new();
        let mut class_of = Vec::with_capacity(raw.len());
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (code, &r) in raw.iter().enumerate() {
            let next = relabel.len();
            let id = *relabel.entry(r).or_insert(next);
            if id == classes.len() {
                classes.push(Vec::new());
            }
            classes[id].push(code);
            class_of.push(id);
        }
        Self {
            node,
            parents,
            radix,
            class_of,
            classes,
        }
    }

    pub fn from_local(local: &LocalStructure) -> Self {
        let mut sets = DisjointSet::new(local.parent_space());
        for (pos, codes) in local.labels.iter().enumerate() {
            for &code in codes {
                let mut fiber = local.fiber(pos, code);
                let first = fiber.next().expect("cardinality >= 2");
                for other in fiber {
                    sets.union(first, other);
                }
            }
        }
        let raw: Vec<usize> = (0..local.parent_space()).map(|c| sets.find(c)).collect();
        Self::from_assignment(local.child, local.parents.clone(), local.radix.clone(), &raw)
    }

    /// Number of classes `k_j`.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Number of parent configurations `q_j`.
    pub fn config_count(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, code: usize) -> usize {
        self.class_of[code]
    }

    pub fn class_of_config(&self, config: &[usize]) -> usize {
        self.class_of[self.radix.encode(config)]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.class_of
    }

    /// Packed configurations of each class.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.classes[class].len()
    }

    /// Members of a class as explicit configurations over `parents`.
    pub fn class_configs(&self, class: usize) -> Vec<Vec<usize>> {
        self.classes[class].iter().map(|&c| self.radix.decode(c)).collect()
    }

    /// Whether all configurations in `{x} × X_{parents[pos]}` share a class.
    pub fn fiber_is_uniform(&self, pos: usize, code: usize) -> bool {
        let r = self.radix.radices()[pos];
        let first = self.class_of[self.radix.insert_digit(code, pos, 0)];
        (1..r).all(|v| self.class_of[self.radix.insert_digit(code, pos, v)] == first)
    }

    /// Whether the parent at `pos` never changes the class.
    pub fn is_vacuous(&self, pos: usize) -> bool {
        let domain = self.radix.size() / self.radix.radices()[pos];
        (0..domain).all(|x| self.fiber_is_uniform(pos, x))
    }

    /// Largest label set consistent with the partition: every fiber that lies in one class.
    pub fn implied_labels(&self) -> Vec<BTreeSet<usize>> {
        (0..self.parents.len())
            .map(|pos| {
                let domain = self.radix.size() / self.radix.radices()[pos];
                (0..domain).filter(|&x| self.fiber_is_uniform(pos, x)).collect()
            })
            .collect()
    }

    /// Partition over the parents with `pos` removed. Only meaningful when that
    /// parent is vacuous.
    pub fn project_out(&self, pos: usize) -> ParentPartition {
        let mut parents = self.parents.clone();
        parents.remove(pos);
        let reduced = self.radix.without(pos);
        let raw: Vec<usize> = (0..reduced.size())
            .map(|c| self.class_of[self.radix.insert_digit(c, pos, 0)])
            .collect();
        ParentPartition::from_assignment(self.node, parents, reduced, &raw)
    }
}

/// Builds the partition of `X_{Π_j}` induced by the labels into `node`.
pub fn build_partition(ldag: &Ldag, node: NodeId) -> ParentPartition {
    ParentPartition::from_local(&LocalStructure::of(ldag, node))
}

/// Free-parameter counts of a labeled graph and of its underlying graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionReport {
    pub per_node_dag: Vec<usize>,
    pub per_node_ldag: Vec<usize>,
    pub total_dag: usize,
    pub total_ldag: usize,
}

impl DimensionReport {
    /// Parameters saved by the labels, `dim(Θ_G) − dim(Θ_GL)`.
    pub fn csi_complexity(&self) -> usize {
        self.total_dag - self.total_ldag
    }

    pub fn node_csi_complexity(&self, node: NodeId) -> usize {
        self.per_node_dag[node] - self.per_node_ldag[node]
    }
}

pub fn dimensions(ldag: &Ldag) -> DimensionReport {
    let mut per_node_dag = Vec::with_capacity(ldag.node_count());
    let mut per_node_ldag = Vec::with_capacity(ldag.node_count());
    for j in 0..ldag.node_count() {
        let partition = build_partition(ldag, j);
        let free = ldag.vars().cardinality(j) - 1;
        per_node_dag.push(free * partition.config_count());
        per_node_ldag.push(free * partition.class_count());
    }
    DimensionReport {
        total_dag: per_node_dag.iter().sum(),
        total_ldag: per_node_ldag.iter().sum(),
        per_node_dag,
        per_node_ldag,
    }
}

/// A label configuration that could be added without changing the partition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Witness {
    pub edge: Edge,
    pub config: Vec<usize>,
}

/// Witnesses of non-maximality in one local structure, as (position, code).
pub fn local_witnesses(local: &LocalStructure, partition: &ParentPartition) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for pos in 0..local.parents.len() {
        for code in 0..local.domain_size(pos) {
            if !local.labels[pos].contains(&code) && partition.fiber_is_uniform(pos, code) {
                out.push((pos, code));
            }
        }
    }
    out
}

/// Returns whether the labeling is maximal, with every witness to the contrary.
pub fn is_maximal(ldag: &Ldag) -> (bool, Vec<Witness>) {
    let mut witnesses = Vec::new();
    for j in 0..ldag.node_count() {
        if ldag.parents(j).len() < 2 {
            continue;
        }
        let local = LocalStructure::of(ldag, j);
        let partition = ParentPartition::from_local(&local);
        for (pos, code) in local_witnesses(&local, &partition) {
            witnesses.push(Witness {
                edge: (local.parents[pos], j),
                config: local.radix.without(pos).decode(code),
            });
        }
    }
    witnesses.sort();
    (witnesses.is_empty(), witnesses)
}

/// Closes one local structure under implied configurations. The partition is unchanged.
pub fn make_local_maximal(local: &LocalStructure) -> LocalStructure {
    if local.parents.len() < 2 {
        return local.clone();
    }
    let partition = ParentPartition::from_local(local);
    let mut closed = local.clone();
    closed.labels = partition.implied_labels();
    closed
}

/// Adds every witness configuration until none remain.
pub fn make_maximal(ldag: &Ldag) -> Ldag {
    let mut out = ldag.clone();
    for j in 0..ldag.node_count() {
        let closed = make_local_maximal(&LocalStructure::of(ldag, j));
        write_local(&mut out, &closed);
    }
    out
}

/// Returns whether every label is a strict subset of its domain, with the offending edges.
pub fn is_regular(ldag: &Ldag) -> (bool, Vec<Edge>) {
    let full: Vec<Edge> = ldag
        .labels()
        .iter()
        .filter(|(_, label)| label.is_full())
        .map(|(&edge, _)| edge)
        .collect();
    (full.is_empty(), full)
}

/// Result of simplifying one local structure.
#[derive(Debug, Clone)]
pub struct Regularized {
    pub local: LocalStructure,
    pub removed_parents: Vec<NodeId>,
}

/// Deletes vacuous parents from a local structure, re-deriving the labels of
/// the remaining edges from the projected partition.
pub fn regularize_local(local: &LocalStructure) -> Regularized {
    let mut partition = ParentPartition::from_local(local);
    let mut removed = Vec::new();
    while let Some(pos) = (0..partition.parents.len()).find(|&p| partition.is_vacuous(p)) {
        removed.push(partition.parents[pos]);
        partition = partition.project_out(pos);
    }
    if removed.is_empty() {
        return Regularized {
            local: make_local_maximal(local),
            removed_parents: removed,
        };
    }
    let labels = if partition.parents.len() >= 2 {
        partition.implied_labels()
    } else {
        vec![BTreeSet::new(); partition.parents.len()]
    };
    Regularized {
        local: LocalStructure {
            child: local.child,
            child_cardinality: local.child_cardinality,
            parents: partition.parents.clone(),
            radix: partition.radix.clone(),
            labels,
        },
        removed_parents: removed,
    }
}

/// Turns a labeled graph into a regular maximal one inducing the same
/// conditional-distribution classes: vacuous edges are deleted and the
/// remaining labels are re-derived and closed.
pub fn regularize(ldag: &Ldag) -> Ldag {
    let mut out = make_maximal(ldag);
    for j in 0..ldag.node_count() {
        let result = regularize_local(&LocalStructure::of(&out, j));
        if result.removed_parents.is_empty() {
            continue;
        }
        out.set_parents(j, result.local.parents.clone())
            .expect("removing edges keeps the graph acyclic");
        write_local(&mut out, &result.local);
    }
    out
}

/// Stores the labels of a local structure into the graph. Parents must match.
pub(crate) fn write_local(ldag: &mut Ldag, local: &LocalStructure) {
    debug_assert_eq!(ldag.parents(local.child), local.parents.as_slice());
    ldag.clear_labels_into(local.child);
    for ((from, to), label) in local.to_labels() {
        ldag.put_label(from, to, label);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Dag, VariableTable};

    // Node 0 with parents 1, 2, 3 (binary).
    fn three_parent(labels: &[(usize, &[[usize; 2]])]) -> Ldag {
        let dag = Dag::from_edges(4, &[(1, 0), (2, 0), (3, 0)]).unwrap();
        let mut ldag = Ldag::new(VariableTable::binary(4), dag).unwrap();
        for &(parent, configs) in labels {
            ldag.set_label(parent, 0, configs.iter().map(|c| c.to_vec()))
                .unwrap();
        }
        ldag
    }

    fn class_sets(p: &ParentPartition) -> BTreeSet<BTreeSet<Vec<usize>>> {
        (0..p.class_count())
            .map(|c| p.class_configs(c).into_iter().collect())
            .collect()
    }

    #[test]
    fn unlabeled_partition_is_identity() {
        let ldag = three_parent(&[]);
        let p = build_partition(&ldag, 0);
        assert_eq!(p.class_count(), 8);
        assert!((0..8).all(|c| p.class_size(c) == 1));
    }

    #[test]
    fn wildcard_label_partition() {
        let ldag = three_parent(&[(1, &[[0, 1]]), (3, &[[0, 1], [1, 1]])]);
        let p = build_partition(&ldag, 0);
        let expected: BTreeSet<BTreeSet<Vec<usize>>> = [
            vec![vec![0, 0, 0]],
            vec![vec![0, 0, 1], vec![1, 0, 1]],
            vec![vec![0, 1, 0], vec![0, 1, 1]],
            vec![vec![1, 0, 0]],
            vec![vec![1, 1, 0], vec![1, 1, 1]],
        ]
        .into_iter()
        .map(|c| c.into_iter().collect())
        .collect();
        assert_eq!(class_sets(&p), expected);
        let dims = dimensions(&ldag);
        assert_eq!(dims.per_node_dag[0], 8);
        assert_eq!(dims.per_node_ldag[0], 5);
    }

    #[test]
    fn overlapping_rules_merge() {
        let ldag = three_parent(&[(3, &[[0, 1]]), (1, &[[1, 0]])]);
        let p = build_partition(&ldag, 0);
        assert_eq!(p.class_count(), 6);
        let big: BTreeSet<Vec<usize>> = [vec![0, 1, 0], vec![0, 1, 1], vec![1, 1, 0]].into();
        assert!(class_sets(&p).contains(&big));
    }

    #[test]
    fn non_maximal_witness_and_closure() {
        let ldag = three_parent(&[(1, &[[0, 1], [1, 0]]), (3, &[[0, 1], [1, 1]])]);
        let (maximal, witnesses) = is_maximal(&ldag);
        assert!(!maximal);
        assert_eq!(
            witnesses,
            vec![Witness {
                edge: (1, 0),
                config: vec![1, 1]
            }]
        );
        let closed = make_maximal(&ldag);
        assert!(closed.label(1, 0).unwrap().contains(&[1, 1]));
        assert_eq!(build_partition(&closed, 0).class_count(), 4);
        assert!(is_maximal(&closed).0);
        assert_eq!(make_maximal(&closed), closed);
    }

    #[test]
    fn maximal_label_free_and_regular_checks() {
        assert!(is_maximal(&three_parent(&[])).0);
        assert!(is_regular(&three_parent(&[])).0);
        let full = three_parent(&[(1, &[[0, 0], [0, 1], [1, 0], [1, 1]])]);
        assert_eq!(is_regular(&full), (false, vec![(1, 0)]));
    }

    #[test]
    fn closure_can_break_regularity_and_regularize_repairs_it() {
        // label on (3,0) misses only (1,1); the label on (1,0) implies it
        let ldag = three_parent(&[(3, &[[0, 0], [0, 1], [1, 0]]), (1, &[[1, 0], [1, 1]])]);
        assert!(is_regular(&ldag).0);
        assert!(!is_maximal(&ldag).0);
        let closed = make_maximal(&ldag);
        assert!(closed.label(3, 0).unwrap().is_full());
        assert!(!is_regular(&closed).0);

        let simple = regularize(&closed);
        assert_eq!(simple.parents(0), &[1, 2]);
        assert!(is_regular(&simple).0 && is_maximal(&simple).0);
        let label = simple.label(1, 0).unwrap();
        assert_eq!(label.configs().collect::<Vec<_>>(), vec![vec![1]]);
        assert!(simple.label(2, 0).is_none());
        assert_eq!(build_partition(&simple, 0).class_count(), 3);
    }

    #[test]
    fn single_full_label_leaves_unlabeled_parent() {
        // parents 1, 2 of node 0: the label on (1,0) covers all of X_2
        let dag = Dag::from_edges(3, &[(1, 0), (2, 0)]).unwrap();
        let mut ldag = Ldag::new(VariableTable::binary(3), dag).unwrap();
        ldag.set_label(1, 0, [vec![0], vec![1]]).unwrap();
        let simple = regularize(&ldag);
        assert_eq!(simple.parents(0), &[2]);
        assert!(!simple.has_labels());
    }

    #[test]
    fn regular_input_unchanged() {
        let ldag = three_parent(&[(1, &[[0, 1]]), (3, &[[0, 1], [1, 1]])]);
        assert_eq!(regularize(&ldag), ldag);
    }
}
