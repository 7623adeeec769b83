//! Directed acyclic graphs over discrete variables and their edge labels.
//!
//! A label on an edge `(i, j)` is a set of configurations of the *other*
//! parents of `j` (ordered by ascending node id). Each configuration states
//! that `X_j` is independent of `X_i` in that parent context. Contexts that
//! satisfy a label remove the edge from the context-specific graph.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use crate::config::MixedRadix;
use crate::error::{Error, Result};

/// Node identifier. Nodes are numbered `0..d`.
pub type NodeId = usize;

/// Directed edge `(parent, child)`.
pub type Edge = (NodeId, NodeId);

/// Names and cardinalities of the modelled variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableTable {
    names: Vec<String>,
    cardinalities: Vec<usize>,
}

impl VariableTable {
    pub fn new(names: Vec<String>, cardinalities: Vec<usize>) -> Result<Self> {
        if names.len() != cardinalities.len() {
            return Err(Error::InvalidVariables(format!(
                "{} names but {} cardinalities",
                names.len(),
                cardinalities.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for (name, &card) in names.iter().zip(&cardinalities) {
            if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ',') {
                return Err(Error::InvalidVariables(format!("bad variable name {name:?}")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidVariables(format!("duplicate name {name:?}")));
            }
            if card < 2 {
                return Err(Error::InvalidVariables(format!(
                    "variable {name:?} has cardinality {card}, need at least 2"
                )));
            }
        }
        Ok(Self {
            names,
            cardinalities,
        })
    }

    /// `d` binary variables named `X1..Xd`.
    pub fn binary(d: usize) -> Self {
        Self::uniform(d, 2)
    }

    /// `d` variables named `X1..Xd`, each with `cardinality` outcomes.
    pub fn uniform(d: usize, cardinality: usize) -> Self {
        let names = (1..=d).map(|k| format!("X{k}")).collect();
        Self::new(names, vec![cardinality; d]).expect("uniform table is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, node: NodeId) -> &str {
        &self.names[node]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cardinality(&self, node: NodeId) -> usize {
        self.cardinalities[node]
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn index_of(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    /// Radix system of the listed nodes, in the given order.
    pub fn radix(&self, nodes: &[NodeId]) -> MixedRadix {
        MixedRadix::new(nodes.iter().map(|&n| self.cardinalities[n]).collect())
    }

    /// Number of joint configurations of the listed nodes, saturating at `u128::MAX`.
    pub fn space_size(&self, nodes: &[NodeId]) -> u128 {
        nodes
            .iter()
            .try_fold(1u128, |acc, &n| acc.checked_mul(self.cardinalities[n] as u128))
            .unwrap_or(u128::MAX)
    }
}

/// Returns a topological order of the graph, or the node sequence of one
/// directed cycle (closed, starting at its smallest node).
///
/// Ties are broken by ascending node id, so the order is deterministic.
pub fn validate_acyclic(node_count: usize, edges: &[Edge]) -> Result<Vec<NodeId>> {
    let mut children = vec![Vec::new(); node_count];
    let mut indegree = vec![0usize; node_count];
    for &(i, j) in edges {
        if i >= node_count || j >= node_count {
            return Err(Error::InvalidEdge(i, j, "node out of range".into()));
        }
        if i == j {
            return Err(Error::Cycle(vec![i, i]));
        }
        children[i].push(j);
        indegree[j] += 1;
    }
    let mut ready: BinaryHeap<Reverse<NodeId>> = (0..node_count)
        .filter(|&n| indegree[n] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(node_count);
    while let Some(Reverse(node)) = ready.pop() {
        order.push(node);
        for &c in &children[node] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == node_count {
        return Ok(order);
    }
    Err(Error::Cycle(find_cycle(&children, &indegree)))
}

// Walks backwards through nodes left with positive indegree; every such node
// has a predecessor in the same residual set, so the walk must close a loop.
fn find_cycle(children: &[Vec<NodeId>], indegree: &[usize]) -> Vec<NodeId> {
    let residual: Vec<bool> = indegree.iter().map(|&d| d > 0).collect();
    let mut parents = vec![Vec::new(); children.len()];
    for (i, cs) in children.iter().enumerate() {
        for &c in cs {
            if residual[i] && residual[c] {
                parents[c].push(i);
            }
        }
    }
    let start = residual.iter().position(|&r| r).expect("residual node exists");
    let mut position = vec![usize::MAX; children.len()];
    let mut walk = Vec::new();
    let mut node = start;
    while position[node] == usize::MAX {
        position[node] = walk.len();
        walk.push(node);
        node = *parents[node].iter().min().expect("residual node has a parent");
    }
    let mut cycle: Vec<NodeId> = walk[position[node]..].to_vec();
    cycle.reverse();
    let min_pos = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &n)| n)
        .map(|(p, _)| p)
        .unwrap();
    cycle.rotate_left(min_pos);
    cycle.push(cycle[0]);
    cycle
}

/// A directed acyclic graph. Parent lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    parents: Vec<Vec<NodeId>>,
}

impl Dag {
    /// Graph without edges.
    pub fn empty(node_count: usize) -> Self {
        Self {
            parents: vec![Vec::new(); node_count],
        }
    }

    pub fn from_edges(node_count: usize, edges: &[Edge]) -> Result<Self> {
        validate_acyclic(node_count, edges)?;
        let mut parents = vec![Vec::new(); node_count];
        for &(i, j) in edges {
            parents[j].push(i);
        }
        for list in &mut parents {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { parents })
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, node: NodeId) -> &[NodeId] {
        &self.parents[node]
    }

    pub fn children(&self, node: NodeId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&c| self.has_edge(node, c))
            .collect()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.parents[to].binary_search(&from).is_ok()
    }

    pub fn is_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// All edges, sorted by (parent, child).
    pub fn edges(&self) -> Vec<Edge> {
        let mut edges: Vec<Edge> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(j, ps)| ps.iter().map(move |&i| (i, j)))
            .collect();
        edges.sort_unstable();
        edges
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn topological_order(&self) -> Vec<NodeId> {
        validate_acyclic(self.node_count(), &self.edges()).expect("Dag is acyclic by construction")
    }

    /// Whether a directed path `from ⇝ to` exists (a node reaches itself).
    pub fn has_path(&self, from: NodeId, to: NodeId) -> bool {
        if from == to {
            return true;
        }
        // search backwards from `to` through parents
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![to];
        seen[to] = true;
        while let Some(node) = stack.pop() {
            for &p in &self.parents[node] {
                if p == from {
                    return true;
                }
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        false
    }

    /// Ancestors of `nodes`, the nodes themselves included.
    pub fn ancestral_set(&self, nodes: &[NodeId]) -> Vec<bool> {
        let mut marked = vec![false; self.node_count()];
        let mut stack: Vec<NodeId> = nodes.to_vec();
        for &n in nodes {
            marked[n] = true;
        }
        while let Some(node) = stack.pop() {
            for &p in &self.parents[node] {
                if !marked[p] {
                    marked[p] = true;
                    stack.push(p);
                }
            }
        }
        marked
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId) -> Result<()> {
        self.check_nodes(from, to)?;
        if self.has_edge(from, to) {
            return Err(Error::InvalidEdge(from, to, "edge already present".into()));
        }
        if self.has_path(to, from) {
            let mut cycle = self.path(to, from);
            cycle.push(to);
            return Err(Error::Cycle(cycle));
        }
        self.insert_unchecked(from, to);
        Ok(())
    }

    pub fn remove_edge(&mut self, from: NodeId, to: NodeId) -> Result<()> {
        self.check_nodes(from, to)?;
        match self.parents[to].binary_search(&from) {
            Ok(pos) => {
                self.parents[to].remove(pos);
                Ok(())
            }
            Err(_) => Err(Error::InvalidEdge(from, to, "edge not present".into())),
        }
    }

    /// Replaces `from → to` by `to → from`.
    pub fn reverse_edge(&mut self, from: NodeId, to: NodeId) -> Result<()> {
        self.remove_edge(from, to)?;
        if let Err(err) = self.add_edge(to, from) {
            self.insert_unchecked(from, to);
            return Err(err);
        }
        Ok(())
    }

    /// Copy of the graph without the listed edges.
    pub fn without_edges(&self, removed: &BTreeSet<Edge>) -> Dag {
        let parents = self
            .parents
            .iter()
            .enumerate()
            .map(|(j, ps)| {
                ps.iter()
                    .copied()
                    .filter(|&i| !removed.contains(&(i, j)))
                    .collect()
            })
            .collect();
        Dag { parents }
    }

    pub(crate) fn insert_unchecked(&mut self, from: NodeId, to: NodeId) {
        let list = &mut self.parents[to];
        if let Err(pos) = list.binary_search(&from) {
            list.insert(pos, from);
        }
    }

    pub(crate) fn set_parents_unchecked(&mut self, node: NodeId, parents: Vec<NodeId>) {
        self.parents[node] = parents;
    }

    fn check_nodes(&self, from: NodeId, to: NodeId) -> Result<()> {
        let d = self.node_count();
        if from >= d || to >= d {
            return Err(Error::InvalidEdge(from, to, "node out of range".into()));
        }
        if from == to {
            return Err(Error::InvalidEdge(from, to, "self loop".into()));
        }
        Ok(())
    }

    // One directed path from -> to, assuming it exists.
    fn path(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let d = self.node_count();
        let mut prev = vec![usize::MAX; d];
        let mut queue = std::collections::VecDeque::from([from]);
        prev[from] = from;
        while let Some(node) = queue.pop_front() {
            if node == to {
                break;
            }
            for c in self.children(node) {
                if prev[c] == usize::MAX {
                    prev[c] = node;
                    queue.push_back(c);
                }
            }
        }
        let mut path = vec![to];
        let mut node = to;
        while node != from {
            node = prev[node];
            path.push(node);
        }
        path.reverse();
        path
    }
}

/// Unordered adjacencies `{i, j}` stored as `(min, max)`.
pub fn skeleton(dag: &Dag) -> BTreeSet<(NodeId, NodeId)> {
    dag.edges()
        .into_iter()
        .map(|(i, j)| (i.min(j), i.max(j)))
        .collect()
}

/// Unshielded colliders `i → j ← k` with `i < k`, returned as `(i, j, k)`.
pub fn immoralities(dag: &Dag) -> BTreeSet<(NodeId, NodeId, NodeId)> {
    let mut out = BTreeSet::new();
    for j in 0..dag.node_count() {
        let ps = dag.parents(j);
        for (a, &i) in ps.iter().enumerate() {
            for &k in &ps[a + 1..] {
                if !dag.is_adjacent(i, k) {
                    out.insert((i, j, k));
                }
            }
        }
    }
    out
}

/// Set of configurations attached to one edge.
///
/// The domain lists the other parents of the child in ascending id order;
/// configurations are stored packed in that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    domain: Vec<NodeId>,
    radix: MixedRadix,
    codes: BTreeSet<usize>,
}

impl Label {
    pub fn empty(domain: Vec<NodeId>, radices: Vec<usize>) -> Self {
        Self {
            domain,
            radix: MixedRadix::new(radices),
            codes: BTreeSet::new(),
        }
    }

    /// Builds a label from explicit configurations over `domain`.
    pub fn from_configs<I>(domain: Vec<NodeId>, radices: Vec<usize>, configs: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let mut label = Self::empty(domain, radices);
        for config in configs {
            label.insert(&config)?;
        }
        Ok(label)
    }

    pub(crate) fn from_codes(domain: Vec<NodeId>, radix: MixedRadix, codes: BTreeSet<usize>) -> Self {
        Self {
            domain,
            radix,
            codes,
        }
    }

    pub fn domain(&self) -> &[NodeId] {
        &self.domain
    }

    pub fn radix(&self) -> &MixedRadix {
        &self.radix
    }

    pub fn insert(&mut self, config: &[usize]) -> Result<bool> {
        let code = self.radix.try_encode(config).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "configuration {config:?} does not fit domain {:?} with radices {:?}",
                self.domain,
                self.radix.radices()
            ))
        })?;
        Ok(self.codes.insert(code))
    }

    pub fn contains(&self, config: &[usize]) -> bool {
        self.radix
            .try_encode(config)
            .is_some_and(|code| self.codes.contains(&code))
    }

    pub fn codes(&self) -> &BTreeSet<usize> {
        &self.codes
    }

    pub fn configs(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.codes.iter().map(|&c| self.radix.decode(c))
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Whether the label holds every configuration of its domain.
    pub fn is_full(&self) -> bool {
        self.codes.len() == self.radix.size()
    }
}

/// Partial assignment of values to nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    values: BTreeMap<NodeId, usize>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    /// Full assignment `x_V`.
    pub fn full(values: &[usize]) -> Self {
        Self {
            values: values.iter().copied().enumerate().collect(),
        }
    }

    pub fn with(mut self, node: NodeId, value: usize) -> Self {
        self.values.insert(node, value);
        self
    }

    pub fn set(&mut self, node: NodeId, value: usize) {
        self.values.insert(node, value);
    }

    pub fn get(&self, node: NodeId) -> Option<usize> {
        self.values.get(&node).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.values.iter().map(|(&n, &v)| (n, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self, vars: &VariableTable) -> Result<()> {
        for (node, value) in self.iter() {
            if node >= vars.len() {
                return Err(Error::InvalidContext(format!("node {node} out of range")));
            }
            if value >= vars.cardinality(node) {
                return Err(Error::InvalidContext(format!(
                    "value {value} out of range for node {node}"
                )));
            }
        }
        Ok(())
    }
}

impl FromIterator<(NodeId, usize)> for Context {
    fn from_iter<T: IntoIterator<Item = (NodeId, usize)>>(iter: T) -> Self {
        Self {
            values: iter.into_iter().collect(),
        }
    }
}

/// Whether `label` is satisfied in `ctx`: the context must fix at least one
/// domain coordinate, and every completion of the fixed coordinates over the
/// free ones must belong to the label.
pub fn label_satisfied(label: &Label, ctx: &Context) -> bool {
    let radix = label.radix();
    let mut base = 0usize;
    let mut free = Vec::new();
    for (pos, &node) in label.domain().iter().enumerate() {
        match ctx.get(node) {
            Some(v) => base += v * radix.stride(pos),
            None => free.push(pos),
        }
    }
    if free.len() == label.domain().len() {
        return false;
    }
    let slice_size: usize = free.iter().map(|&p| radix.radices()[p]).product();
    if slice_size > label.len() {
        return false;
    }
    let mut digits = vec![0usize; free.len()];
    loop {
        let code = base
            + free
                .iter()
                .zip(&digits)
                .map(|(&p, &v)| v * radix.stride(p))
                .sum::<usize>();
        if !label.codes().contains(&code) {
            return false;
        }
        // odometer over the free coordinates
        let mut k = free.len();
        loop {
            if k == 0 {
                return true;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < radix.radices()[free[k]] {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// A DAG with labels on some of its edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ldag {
    vars: VariableTable,
    dag: Dag,
    labels: BTreeMap<Edge, Label>,
}

impl Ldag {
    pub fn new(vars: VariableTable, dag: Dag) -> Result<Self> {
        if vars.len() != dag.node_count() {
            return Err(Error::VariableMismatch(format!(
                "{} variables but graph has {} nodes",
                vars.len(),
                dag.node_count()
            )));
        }
        Ok(Self {
            vars,
            dag,
            labels: BTreeMap::new(),
        })
    }

    pub fn vars(&self) -> &VariableTable {
        &self.vars
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn node_count(&self) -> usize {
        self.dag.node_count()
    }

    pub fn parents(&self, node: NodeId) -> &[NodeId] {
        self.dag.parents(node)
    }

    pub fn labels(&self) -> &BTreeMap<Edge, Label> {
        &self.labels
    }

    pub fn label(&self, from: NodeId, to: NodeId) -> Option<&Label> {
        self.labels.get(&(from, to))
    }

    pub fn has_labels(&self) -> bool {
        !self.labels.is_empty()
    }

    /// Domain `Π_j \ {i}` of the label on `(i, j)`, ascending.
    pub fn label_domain(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        self.dag
            .parents(to)
            .iter()
            .copied()
            .filter(|&p| p != from)
            .collect()
    }

    /// An empty label with the right domain for edge `(from, to)`.
    pub fn empty_label(&self, from: NodeId, to: NodeId) -> Label {
        let domain = self.label_domain(from, to);
        let radices = domain.iter().map(|&n| self.vars.cardinality(n)).collect();
        Label::empty(domain, radices)
    }

    /// Replaces the label on `(from, to)`. An empty configuration list removes it.
    pub fn set_label<I>(&mut self, from: NodeId, to: NodeId, configs: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        self.check_labelable(from, to)?;
        let mut label = self.empty_label(from, to);
        for config in configs {
            label
                .insert(&config)
                .map_err(|e| Error::InvalidLabel(from, to, e.to_string()))?;
        }
        self.put_label(from, to, label);
        Ok(())
    }

    /// Adds one configuration to the label on `(from, to)`.
    pub fn add_label_config(&mut self, from: NodeId, to: NodeId, config: &[usize]) -> Result<bool> {
        self.check_labelable(from, to)?;
        let mut label = self
            .labels
            .remove(&(from, to))
            .unwrap_or_else(|| self.empty_label(from, to));
        let added = label
            .insert(config)
            .map_err(|e| Error::InvalidLabel(from, to, e.to_string()));
        self.put_label(from, to, label);
        added
    }

    pub fn remove_label(&mut self, from: NodeId, to: NodeId) -> Option<Label> {
        self.labels.remove(&(from, to))
    }

    /// Drops every label on edges into `node`.
    pub fn clear_labels_into(&mut self, node: NodeId) {
        self.labels.retain(|&(_, j), _| j != node);
    }

    /// Same graph, no labels.
    pub fn without_labels(&self) -> Ldag {
        Ldag {
            vars: self.vars.clone(),
            dag: self.dag.clone(),
            labels: BTreeMap::new(),
        }
    }

    /// Adds an edge. Labels into the child are discarded since their domains change.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId) -> Result<()> {
        self.dag.add_edge(from, to)?;
        self.clear_labels_into(to);
        Ok(())
    }

    /// Removes an edge together with the child's labels.
    pub fn remove_edge(&mut self, from: NodeId, to: NodeId) -> Result<()> {
        self.dag.remove_edge(from, to)?;
        self.clear_labels_into(to);
        Ok(())
    }

    /// Reverses an edge, discarding labels into both endpoints.
    pub fn reverse_edge(&mut self, from: NodeId, to: NodeId) -> Result<()> {
        self.dag.reverse_edge(from, to)?;
        self.clear_labels_into(to);
        self.clear_labels_into(from);
        Ok(())
    }

    /// Replaces the parent set of `node` (and drops its labels). Fails on cycles.
    pub fn set_parents(&mut self, node: NodeId, mut parents: Vec<NodeId>) -> Result<()> {
        parents.sort_unstable();
        parents.dedup();
        let mut dag = self.dag.clone();
        dag.set_parents_unchecked(node, parents);
        validate_acyclic(dag.node_count(), &dag.edges())?;
        self.dag = dag;
        self.clear_labels_into(node);
        Ok(())
    }

    pub(crate) fn put_label(&mut self, from: NodeId, to: NodeId, label: Label) {
        if label.is_empty() {
            self.labels.remove(&(from, to));
        } else {
            self.labels.insert((from, to), label);
        }
    }

    fn check_labelable(&self, from: NodeId, to: NodeId) -> Result<()> {
        if to >= self.node_count() || !self.dag.has_edge(from, to) {
            return Err(Error::InvalidLabel(from, to, "edge not in graph".into()));
        }
        if self.dag.parents(to).len() < 2 {
            return Err(Error::InvalidLabel(
                from,
                to,
                "child has a single parent; labels need at least two".into(),
            ));
        }
        Ok(())
    }
}

/// The underlying graph with every edge whose label is satisfied in `ctx` removed.
pub fn context_specific_graph(ldag: &Ldag, ctx: &Context) -> Dag {
    let removed: BTreeSet<Edge> = ldag
        .labels()
        .iter()
        .filter(|(_, label)| label_satisfied(label, ctx))
        .map(|(&edge, _)| edge)
        .collect();
    ldag.dag().without_edges(&removed)
}
