//! Structure learning.
//!
//! Each local structure is optimized greedily: starting from an unlabeled
//! CPT, the search repeatedly adds the single label configuration that most
//! improves the node's score and closes the labels under the induced
//! partition. Underlying DAGs are explored by Metropolis-style chains whose
//! proposals add, remove or reverse one edge. The acceptance rule ignores the
//! proposal ratio, so the chains only hunt for the highest-scoring model.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Dag, Edge, Ldag, NodeId};
use crate::partition::{make_maximal, write_local, DisjointSet, LocalStructure, ParentPartition};
use crate::scoring::{
    check_same_vars, class_alpha, class_log_evidence, local_log_prior, log_score_with, Dataset,
    FamilyCounts, PriorMode, ScoreReport,
};

type FiberGain = (f64, Vec<usize>);
type FamilyKey = (NodeId, Vec<NodeId>);

/// Settings for [`learn`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub kappa: f64,
    pub ess: f64,
    pub chains: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Starting graph of every chain; empty when `None`.
    pub initial: Option<Dag>,
    pub max_parents: Option<usize>,
    /// With `false` the chains search plain DAGs.
    pub optimize_labels: bool,
    pub prior: PriorMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            kappa: 0.3,
            ess: 1.0,
            chains: 50,
            iterations: 500,
            seed: 0,
            initial: None,
            max_parents: None,
            optimize_labels: true,
            prior: PriorMode::default(),
        }
    }
}

impl SearchConfig {
    pub fn with_kappa(kappa: f64) -> Self {
        Self {
            kappa,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::KappaOutOfRange(self.kappa));
        }
        if !(self.ess > 0.0 && self.ess.is_finite()) {
            return Err(Error::EssOutOfRange(self.ess));
        }
        if self.chains == 0 || self.iterations == 0 {
            return Err(Error::InvalidConfig("chains and iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of optimizing one local structure.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOptimum {
    pub local: LocalStructure,
    pub class_count: usize,
    pub log_ml: f64,
    pub log_prior: f64,
}

impl LocalOptimum {
    pub fn score(&self) -> f64 {
        self.log_ml + self.log_prior
    }
}

// Running state of the greedy class merging for one node.
struct MergeState<'a> {
    family: &'a FamilyCounts,
    sets: DisjointSet,
    counts: Vec<Vec<u64>>,
    sizes: Vec<usize>,
    members: Vec<Vec<usize>>,
    evidence: Vec<f64>,
    ess: f64,
}

impl<'a> MergeState<'a> {
    fn new(family: &'a FamilyCounts, ess: f64) -> Self {
        let q = family.parent_space();
        let r = family.child_cardinality;
        let counts: Vec<Vec<u64>> = (0..q).map(|c| family.config_counts(c).to_vec()).collect();
        let evidence = counts
            .iter()
            .map(|c| class_log_evidence(c, class_alpha(ess, r, q, 1)))
            .collect();
        Self {
            family,
            sets: DisjointSet::new(q),
            counts,
            sizes: vec![1; q],
            members: (0..q).map(|c| vec![c]).collect(),
            evidence,
            ess,
        }
    }

    fn roots_of_fiber(&mut self, pos: usize, code: usize) -> Vec<usize> {
        let radix = &self.family.radix;
        let mut roots: Vec<usize> = (0..radix.radices()[pos])
            .map(|v| radix.insert_digit(code, pos, v))
            .map(|c| self.sets.find(c))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots
    }

    // Change in log marginal likelihood from merging the given classes.
    fn merge_gain(&self, roots: &[usize]) -> f64 {
        let r = self.family.child_cardinality;
        let mut merged = vec![0u64; r];
        let mut size = 0;
        let mut before = 0.0;
        for &root in roots {
            for (m, c) in merged.iter_mut().zip(&self.counts[root]) {
                *m += c;
            }
            size += self.sizes[root];
            before += self.evidence[root];
        }
        let alpha = class_alpha(self.ess, r, self.family.parent_space(), size);
        class_log_evidence(&merged, alpha) - before
    }

    // Joins the classes and returns the new root.
    fn merge(&mut self, roots: &[usize]) -> usize {
        let r = self.family.child_cardinality;
        let q = self.family.parent_space();
        let mut merged = vec![0u64; r];
        let mut size = 0;
        for &root in roots {
            for (m, c) in merged.iter_mut().zip(&self.counts[root]) {
                *m += c;
            }
            size += self.sizes[root];
        }
        for &root in &roots[1..] {
            self.sets.union(roots[0], root);
        }
        let top = self.sets.find(roots[0]);
        self.evidence[top] = class_log_evidence(&merged, class_alpha(self.ess, r, q, size));
        self.counts[top] = merged;
        self.sizes[top] = size;
        let mut members = Vec::with_capacity(size);
        for &root in roots {
            members.append(&mut self.members[root]);
        }
        self.members[top] = members;
        top
    }

    fn assignment(&mut self) -> Vec<usize> {
        (0..self.family.parent_space()).map(|c| self.sets.find(c)).collect()
    }

    // Whether merging `roots` would leave some parent without any effect.
    fn merge_makes_vacuous(&mut self, roots: &[usize]) -> bool {
        let mut raw = self.assignment();
        for a in raw.iter_mut() {
            if roots.contains(a) {
                *a = roots[0];
            }
        }
        let radix = &self.family.radix;
        (0..radix.len()).any(|pos| {
            (0..radix.size()).all(|c| raw[c] == raw[radix.with_digit(c, pos, 0)])
        })
    }
}

/// Greedy label optimization for node `child` with the given parents and
/// precomputed family counts.
///
/// Every sweep scores each label configuration that would join at least two
/// classes, applies the best one if it strictly raises the node's score, and
/// then closes the labels. A candidate whose closure would leave some parent
/// without effect is passed over in favour of the next best, so the result is
/// always regular as well as maximal.
pub fn optimize_family(family: &FamilyCounts, kappa: f64, ess: f64, mode: PriorMode) -> LocalOptimum {
    local_optimum(family, kappa, ess, mode, true)
}

fn local_optimum(family: &FamilyCounts, kappa: f64, ess: f64, mode: PriorMode, merge: bool) -> LocalOptimum {
    let q = family.parent_space();
    let r = family.child_cardinality;
    let free = r - 1;
    let radix = family.radix.clone();
    let n_parents = family.parents.len();
    let mut state = MergeState::new(family, ess);
    let mut classes = q;
    let mut log_ml: f64 = state.evidence.iter().sum();
    let prior = |k: usize| local_log_prior(q * free, k * free, kappa, mode);

    if merge && n_parents >= 2 {
        // the prior is linear in the class count, so every merge of K classes
        // shifts it by the same amount times K - 1
        let step = prior(q - 1) - prior(q);
        let domains: Vec<usize> = radix.radices().iter().map(|&rp| q / rp).collect();
        // per fiber: the gain of merging it and the classes it joins
        let mut gains: Vec<Vec<Option<FiberGain>>> =
            domains.iter().map(|&size| vec![None; size]).collect();
        let mut dirty: Vec<(usize, usize)> = (0..n_parents)
            .flat_map(|pos| (0..domains[pos]).map(move |code| (pos, code)))
            .collect();
        loop {
            for (pos, code) in dirty.drain(..) {
                let roots = state.roots_of_fiber(pos, code);
                gains[pos][code] = (roots.len() >= 2).then(|| {
                    let gain = state.merge_gain(&roots) + step * (roots.len() - 1) as f64;
                    (gain, roots)
                });
            }
            let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
            for (pos, row) in gains.iter().enumerate() {
                for (code, entry) in row.iter().enumerate() {
                    if let Some((gain, _)) = entry {
                        if *gain > 0.0 {
                            candidates.push((*gain, pos, code));
                        }
                    }
                }
            }
            // best first; the stable sort keeps scan order among ties
            candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
            let chosen = candidates.into_iter().find(|&(_, pos, code)| {
                let roots = &gains[pos][code].as_ref().expect("candidate").1;
                !state.merge_makes_vacuous(roots)
            });
            let Some((_, pos, code)) = chosen else { break };
            let roots = gains[pos][code].take().expect("candidate").1;
            log_ml += state.merge_gain(&roots);
            classes -= roots.len() - 1;
            let top = state.merge(&roots);
            for &c in &state.members[top] {
                for (p, _) in domains.iter().enumerate() {
                    dirty.push((p, radix.project_out(c, p)));
                }
            }
            dirty.sort_unstable();
            dirty.dedup();
        }
    }

    let raw = state.assignment();
    let partition = ParentPartition::from_assignment(family.child, family.parents.clone(), radix.clone(), &raw);
    let labels = if n_parents >= 2 {
        partition.implied_labels()
    } else {
        vec![Default::default(); n_parents]
    };
    let local = LocalStructure {
        child: family.child,
        child_cardinality: r,
        parents: family.parents.clone(),
        radix,
        labels,
    };
    LocalOptimum {
        local,
        class_count: classes,
        log_ml,
        log_prior: prior(classes),
    }
}

/// Optimal labels for `node` given its parents, under the default prior.
pub fn optimize_local_structure(
    data: &Dataset,
    node: NodeId,
    parents: &[NodeId],
    kappa: f64,
    ess: f64,
) -> Result<LocalStructure> {
    let mut sorted = parents.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if node >= data.vars().len() || sorted.iter().any(|&p| p >= data.vars().len() || p == node) {
        return Err(Error::InvalidConfig(format!("bad family {node} <- {parents:?}")));
    }
    let family = FamilyCounts::tally(data, node, &sorted);
    Ok(optimize_family(&family, kappa, ess, PriorMode::default()).local)
}

/// Local optima memoized by family, shared by every chain of one run.
pub struct ScoreCache<'a> {
    data: &'a Dataset,
    kappa: f64,
    ess: f64,
    mode: PriorMode,
    optimize_labels: bool,
    entries: Mutex<HashMap<FamilyKey, Arc<LocalOptimum>>>,
}

impl<'a> ScoreCache<'a> {
    pub fn new(data: &'a Dataset, cfg: &SearchConfig) -> Self {
        Self {
            data,
            kappa: cfg.kappa,
            ess: cfg.ess,
            mode: cfg.prior,
            optimize_labels: cfg.optimize_labels,
            entries: Mutex::new(HashMap::new()),
        }
    }

    pub fn local(&self, node: NodeId, parents: &[NodeId]) -> Arc<LocalOptimum> {
        let key = (node, parents.to_vec());
        if let Some(hit) = self.entries.lock().expect("cache lock").get(&key) {
            return Arc::clone(hit);
        }
        let family = FamilyCounts::tally(self.data, node, parents);
        let optimum = Arc::new(local_optimum(&family, self.kappa, self.ess, self.mode, self.optimize_labels));
        self.entries
            .lock()
            .expect("cache lock")
            .insert(key, Arc::clone(&optimum));
        optimum
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The graph with every local structure replaced by its optimum.
    pub fn model(&self, dag: &Dag) -> Ldag {
        let mut ldag = Ldag::new(self.data.vars().clone(), dag.clone()).expect("sizes match");
        for j in 0..dag.node_count() {
            let optimum = self.local(j, dag.parents(j));
            write_local(&mut ldag, &optimum.local);
        }
        ldag
    }

    pub fn score(&self, dag: &Dag) -> f64 {
        (0..dag.node_count()).map(|j| self.local(j, dag.parents(j)).score()).sum()
    }
}

/// A single-edge edit of the underlying DAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Add(NodeId, NodeId),
    Remove(NodeId, NodeId),
    Reverse(NodeId, NodeId),
}

impl Move {
    /// Nodes whose parent sets change.
    pub fn affected(&self) -> Vec<NodeId> {
        match *self {
            Move::Add(_, j) | Move::Remove(_, j) => vec![j],
            Move::Reverse(i, j) => vec![i, j],
        }
    }

    pub fn edge(&self) -> Edge {
        match *self {
            Move::Add(i, j) | Move::Remove(i, j) | Move::Reverse(i, j) => (i, j),
        }
    }

    pub fn apply(&self, dag: &Dag) -> Result<Dag> {
        let mut out = dag.clone();
        match *self {
            Move::Add(i, j) => out.add_edge(i, j)?,
            Move::Remove(i, j) => out.remove_edge(i, j)?,
            Move::Reverse(i, j) => out.reverse_edge(i, j)?,
        }
        Ok(out)
    }
}

/// Every single-edge edit that keeps the graph acyclic and respects the
/// parent bound, in a fixed order.
pub fn legal_moves(dag: &Dag, max_parents: Option<usize>) -> Vec<Move> {
    let d = dag.node_count();
    let bound = max_parents.unwrap_or(usize::MAX);
    let children: Vec<Vec<NodeId>> = (0..d).map(|n| dag.children(n)).collect();
    // reach[a][b]: a directed path from a to b exists (a reaches itself)
    let mut reach = vec![vec![false; d]; d];
    for (start, row) in reach.iter_mut().enumerate() {
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if !row[n] {
                row[n] = true;
                stack.extend(&children[n]);
            }
        }
    }
    let mut moves = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            if dag.has_edge(i, j) {
                moves.push(Move::Remove(i, j));
                let other_path = children[i].iter().any(|&c| c != j && reach[c][j]);
                if !other_path && dag.parents(i).len() < bound {
                    moves.push(Move::Reverse(i, j));
                }
            } else if !dag.has_edge(j, i) && !reach[j][i] && dag.parents(j).len() < bound {
                moves.push(Move::Add(i, j));
            }
        }
    }
    moves
}

/// Uniform draw over [`legal_moves`].
pub fn propose<R: Rng + ?Sized>(dag: &Dag, max_parents: Option<usize>, rng: &mut R) -> Result<Move> {
    let moves = legal_moves(dag, max_parents);
    if moves.is_empty() {
        return Err(Error::NoLegalMove);
    }
    Ok(moves[rng.random_range(0..moves.len())])
}

/// Accept with probability `min(1, exp(delta))`.
pub fn metropolis_accept<R: Rng + ?Sized>(delta: f64, rng: &mut R) -> bool {
    if delta >= 0.0 {
        return true;
    }
    rng.random::<f64>() < delta.exp()
}

/// Score history of one chain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainTrace {
    /// Score of the current state after each iteration.
    pub current: Vec<f64>,
    /// Best score seen so far after each iteration.
    pub best: Vec<f64>,
    pub accepted: usize,
}

/// One search chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub dag: Dag,
    pub node_scores: Vec<f64>,
    pub score: f64,
    pub best_dag: Dag,
    pub best_score: f64,
    pub rng: ChaCha8Rng,
    moves: Vec<Move>,
    max_parents: Option<usize>,
    pub trace: ChainTrace,
}

impl ChainState {
    pub fn new(dag: Dag, cache: &ScoreCache<'_>, rng: ChaCha8Rng, max_parents: Option<usize>) -> Self {
        let node_scores: Vec<f64> = (0..dag.node_count())
            .map(|j| cache.local(j, dag.parents(j)).score())
            .collect();
        let score = node_scores.iter().sum();
        Self {
            moves: legal_moves(&dag, max_parents),
            best_dag: dag.clone(),
            best_score: score,
            dag,
            node_scores,
            score,
            rng,
            max_parents,
            trace: ChainTrace::default(),
        }
    }

    /// Chain `index` of a run seeded with `seed`.
    pub fn seeded(dag: Dag, cache: &ScoreCache<'_>, seed: u64, index: u64, max_parents: Option<usize>) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self::new(dag, cache, rng, max_parents)
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub proposal: Option<Move>,
    pub delta: f64,
    pub accepted: bool,
}

/// Propose a move and re-optimize the changed local structures, then accept or
/// reject. Chains without legal moves stay put.
pub fn mcmc_step(state: &mut ChainState, cache: &ScoreCache<'_>) -> StepOutcome {
    let mut outcome = StepOutcome {
        proposal: None,
        delta: 0.0,
        accepted: false,
    };
    if !state.moves.is_empty() {
        let mv = state.moves[state.rng.random_range(0..state.moves.len())];
        let candidate = mv.apply(&state.dag).expect("legal moves keep the graph acyclic");
        let mut changed = Vec::new();
        let mut delta = 0.0;
        for j in mv.affected() {
            let s = cache.local(j, candidate.parents(j)).score();
            delta += s - state.node_scores[j];
            changed.push((j, s));
        }
        let accepted = metropolis_accept(delta, &mut state.rng);
        if accepted {
            state.dag = candidate;
            for (j, s) in changed {
                state.node_scores[j] = s;
            }
            state.score = state.node_scores.iter().sum();
            state.moves = legal_moves(&state.dag, state.max_parents);
            state.trace.accepted += 1;
            if state.score > state.best_score {
                state.best_score = state.score;
                state.best_dag = state.dag.clone();
            }
        }
        outcome = StepOutcome {
            proposal: Some(mv),
            delta,
            accepted,
        };
    }
    state.trace.current.push(state.score);
    state.trace.best.push(state.best_score);
    outcome
}

/// Output of [`learn`].
#[derive(Debug, Clone)]
pub struct LearnResult {
    pub model: Ldag,
    pub report: ScoreReport,
    pub traces: Vec<ChainTrace>,
    /// Chain that found the returned model.
    pub best_chain: usize,
}

/// Runs all chains and returns the best model visited by any of them.
pub fn learn(data: &Dataset, cfg: &SearchConfig) -> Result<LearnResult> {
    cfg.validate()?;
    let d = data.vars().len();
    let start = match &cfg.initial {
        Some(dag) => {
            if dag.node_count() != d {
                return Err(Error::InvalidConfig("initial graph size differs from the data".into()));
            }
            dag.clone()
        }
        None => Dag::empty(d),
    };
    let cache = ScoreCache::new(data, cfg);
    let finished: Vec<ChainState> = (0..cfg.chains)
        .into_par_iter()
        .map(|index| {
            let mut state = ChainState::seeded(start.clone(), &cache, cfg.seed, index as u64, cfg.max_parents);
            for _ in 0..cfg.iterations {
                mcmc_step(&mut state, &cache);
            }
            state
        })
        .collect();
    let mut best_chain = 0;
    for (index, state) in finished.iter().enumerate() {
        if state.best_score > finished[best_chain].best_score {
            best_chain = index;
        }
    }
    let model = make_maximal(&cache.model(&finished[best_chain].best_dag));
    let report = log_score_with(data, &model, cfg.kappa, cfg.ess, cfg.prior)?;
    Ok(LearnResult {
        model,
        report,
        traces: finished.into_iter().map(|s| s.trace).collect(),
        best_chain,
    })
}

/// Score of a fixed graph with optimized labels.
pub fn score_with_optimal_labels(data: &Dataset, dag: &Dag, cfg: &SearchConfig) -> Result<(Ldag, ScoreReport)> {
    cfg.validate()?;
    if dag.node_count() != data.vars().len() {
        return Err(Error::InvalidConfig("graph size differs from the data".into()));
    }
    let cache = ScoreCache::new(data, cfg);
    let model = cache.model(dag);
    check_same_vars(data.vars(), model.vars())?;
    let report = log_score_with(data, &model, cfg.kappa, cfg.ess, cfg.prior)?;
    Ok((model, report))
}
