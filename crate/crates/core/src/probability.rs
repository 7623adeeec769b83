//! Parameters, exact joint probabilities, sampling and KL divergence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::config::MixedRadix;
use crate::error::{Error, Result};
use crate::graph::{Ldag, NodeId, VariableTable};
use crate::partition::{build_partition, ParentPartition};
use crate::scoring::{check_same_vars, class_alpha, count, Dataset};

/// Default cap on the joint state space enumerated by [`kl_divergence`].
pub const DEFAULT_STATE_BOUND: u128 = 1 << 24;

const SUM_TOLERANCE: f64 = 1e-9;

/// One distribution over `X_j` per partition class of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct CpdSet {
    vars: VariableTable,
    partitions: Vec<ParentPartition>,
    theta: Vec<Vec<Vec<f64>>>,
}

impl CpdSet {
    /// `theta[j][l]` is the distribution of node `j` in class `l` of its partition.
    pub fn new(ldag: &Ldag, theta: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let partitions: Vec<ParentPartition> = (0..ldag.node_count()).map(|j| build_partition(ldag, j)).collect();
        if theta.len() != partitions.len() {
            return Err(Error::InvalidConfig("one parameter block per node is needed".into()));
        }
        for (j, (blocks, partition)) in theta.iter().zip(&partitions).enumerate() {
            if blocks.len() != partition.class_count() {
                return Err(Error::InvalidConfig(format!(
                    "node {j} has {} classes but {} distributions",
                    partition.class_count(),
                    blocks.len()
                )));
            }
            for dist in blocks {
                check_distribution(dist, ldag.vars().cardinality(j))?;
            }
        }
        Ok(Self {
            vars: ldag.vars().clone(),
            partitions,
            theta,
        })
    }

    /// Uniform distribution in every class.
    pub fn uniform(ldag: &Ldag) -> Self {
        let theta = (0..ldag.node_count())
            .map(|j| {
                let r = ldag.vars().cardinality(j);
                vec![vec![1.0 / r as f64; r]; build_partition(ldag, j).class_count()]
            })
            .collect();
        Self::new(ldag, theta).expect("uniform parameters are valid")
    }

    pub fn vars(&self) -> &VariableTable {
        &self.vars
    }

    pub fn partition(&self, node: NodeId) -> &ParentPartition {
        &self.partitions[node]
    }

    pub fn theta(&self, node: NodeId, class: usize) -> &[f64] {
        &self.theta[node][class]
    }

    /// Replaces one class distribution.
    pub fn set_theta(&mut self, node: NodeId, class: usize, dist: Vec<f64>) -> Result<()> {
        check_distribution(&dist, self.vars.cardinality(node))?;
        self.theta[node][class] = dist;
        Ok(())
    }

    /// `p(x_j | x_{Π_j})` read off a full assignment.
    pub fn conditional(&self, node: NodeId, x: &[usize]) -> f64 {
        let partition = &self.partitions[node];
        let code = parent_code(partition, x);
        self.theta[node][partition.class_of(code)][x[node]]
    }
}

fn check_distribution(dist: &[f64], cardinality: usize) -> Result<()> {
    if dist.len() != cardinality {
        return Err(Error::InvalidConfig(format!(
            "distribution has {} entries, expected {cardinality}",
            dist.len()
        )));
    }
    if dist.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidConfig("probabilities must be finite and non-negative".into()));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidConfig(format!("probabilities sum to {total}")));
    }
    Ok(())
}

fn parent_code(partition: &ParentPartition, x: &[usize]) -> usize {
    let radix: &MixedRadix = &partition.radix;
    partition
        .parents
        .iter()
        .enumerate()
        .map(|(pos, &p)| x[p] * radix.stride(pos))
        .sum()
}

/// Posterior mean parameters under the score's Dirichlet prior.
pub fn estimate_map_parameters(data: &Dataset, ldag: &Ldag, ess: f64) -> Result<CpdSet> {
    if !(ess > 0.0 && ess.is_finite()) {
        return Err(Error::EssOutOfRange(ess));
    }
    check_same_vars(data.vars(), ldag.vars())?;
    let mut theta = Vec::with_capacity(ldag.node_count());
    for j in 0..ldag.node_count() {
        let partition = build_partition(ldag, j);
        let table = count(data, ldag, j, Some(&partition))?;
        let r = table.child_cardinality;
        let q = partition.config_count();
        let blocks = (0..partition.class_count())
            .map(|l| {
                let alpha = class_alpha(ess, r, q, partition.class_size(l));
                let denom = table.class_totals[l] as f64 + alpha * r as f64;
                table
                    .class_counts(l)
                    .iter()
                    .map(|&c| (c as f64 + alpha) / denom)
                    .collect()
            })
            .collect();
        theta.push(blocks);
    }
    CpdSet::new(ldag, theta)
}

/// Class distributions drawn independently from a flat Dirichlet.
pub fn random_cpds<R: Rng + ?Sized>(ldag: &Ldag, rng: &mut R) -> CpdSet {
    let theta = (0..ldag.node_count())
        .map(|j| {
            let r = ldag.vars().cardinality(j);
            (0..build_partition(ldag, j).class_count())
                .map(|_| {
                    let draws: Vec<f64> = (0..r).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                    let total: f64 = draws.iter().sum();
                    draws.into_iter().map(|g| g / total).collect()
                })
                .collect()
        })
        .collect();
    CpdSet::new(ldag, theta).expect("normalized draws")
}

/// `p(x)` as the product of the node conditionals.
pub fn joint_probability(cpds: &CpdSet, x: &[usize]) -> Result<f64> {
    check_assignment(cpds.vars(), x)?;
    Ok((0..x.len()).map(|j| cpds.conditional(j, x)).product())
}

fn check_assignment(vars: &VariableTable, x: &[usize]) -> Result<()> {
    if x.len() != vars.len() {
        return Err(Error::InvalidContext(format!(
            "assignment has {} values for {} variables",
            x.len(),
            vars.len()
        )));
    }
    for (j, &v) in x.iter().enumerate() {
        if v >= vars.cardinality(j) {
            return Err(Error::InvalidContext(format!("value {v} out of range for {}", vars.name(j))));
        }
    }
    Ok(())
}

/// Ancestral sampling of `n` rows.
pub fn sample(cpds: &CpdSet, ldag: &Ldag, n: usize, seed: u64) -> Result<Dataset> {
    check_same_vars(cpds.vars(), ldag.vars())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = ldag.dag().topological_order();
    let d = ldag.node_count();
    let mut values = Vec::with_capacity(n * d);
    let mut x = vec![0usize; d];
    for _ in 0..n {
        for &j in &order {
            let partition = cpds.partition(j);
            let dist = cpds.theta(j, partition.class_of(parent_code(partition, &x)));
            x[j] = draw(dist, &mut rng);
        }
        values.extend_from_slice(&x);
    }
    Dataset::from_flat(ldag.vars().clone(), values)
}

fn draw<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (v, &p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return v;
        }
    }
    // rounding left a sliver above the cumulative sum: take the last value with mass
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Every full assignment, in mixed-radix order with the last variable fastest.
pub fn enumerate_states(vars: &VariableTable, bound: u128) -> Result<impl Iterator<Item = Vec<usize>>> {
    let nodes: Vec<NodeId> = (0..vars.len()).collect();
    let size = vars.space_size(&nodes);
    if size > bound {
        return Err(Error::StateSpaceTooLarge { size, bound });
    }
    let radix = vars.radix(&nodes);
    Ok((0..radix.size()).map(move |code| radix.decode(code)))
}

/// `D(p ‖ p*) = Σ_x p(x) log(p(x) / p*(x))` by exact enumeration.
pub fn kl_divergence(p: &CpdSet, p_star: &CpdSet, bound: u128) -> Result<f64> {
    check_same_vars(p.vars(), p_star.vars())?;
    let mut total = 0.0;
    for x in enumerate_states(p.vars(), bound)? {
        let px = joint_probability(p, &x)?;
        if px == 0.0 {
            continue;
        }
        let qx = joint_probability(p_star, &x)?;
        if qx == 0.0 {
            return Err(Error::SupportError(px));
        }
        total += px * (px.ln() - qx.ln());
    }
    // exact zero up to rounding
    Ok(total.max(0.0))
}
