//! Bayesian scoring of labeled graphs.
//!
//! Parameters of each partition class get a Dirichlet prior with
//! pseudocounts `α_ijl = N / (r_j q_j) · |S_jl|`, where `q_j` counts the
//! parent configurations of the underlying DAG. The marginal likelihood is
//! then a product of Dirichlet-multinomial evidences, computed in log space.
//! Structure priors are unnormalized powers of `κ`.

use libm::lgamma;

use crate::config::MixedRadix;
use crate::error::{Error, Result};
use crate::graph::{Ldag, NodeId, VariableTable};
use crate::partition::{build_partition, dimensions, DimensionReport, ParentPartition};

/// Complete data: `n` rows of integer-coded observations of every variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    vars: VariableTable,
    values: Vec<usize>,
}

impl Dataset {
    pub fn new(vars: VariableTable, rows: Vec<Vec<usize>>) -> Result<Self> {
        let d = vars.len();
        let mut values = Vec::with_capacity(rows.len() * d);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidConfig(format!(
                    "row {r} has {} values, expected {d}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(vars, values)
    }

    /// Row-major values, `d` per row.
    pub fn from_flat(vars: VariableTable, values: Vec<usize>) -> Result<Self> {
        let d = vars.len();
        if d == 0 {
            if !values.is_empty() {
                return Err(Error::InvalidConfig("values without variables".into()));
            }
        } else if !values.len().is_multiple_of(d) {
            return Err(Error::InvalidConfig("ragged value buffer".into()));
        }
        for (k, &v) in values.iter().enumerate() {
            let column = k % d;
            if v >= vars.cardinality(column) {
                return Err(Error::ValueOutOfRange {
                    row: k / d,
                    column,
                    value: v,
                    cardinality: vars.cardinality(column),
                });
            }
        }
        Ok(Self { vars, values })
    }

    pub fn empty(vars: VariableTable) -> Self {
        Self {
            vars,
            values: Vec::new(),
        }
    }

    pub fn vars(&self) -> &VariableTable {
        &self.vars
    }

    /// Number of observations `n`.
    pub fn len(&self) -> usize {
        if self.vars.is_empty() {
            0
        } else {
            self.values.len() / self.vars.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        let d = self.vars.len();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.values.chunks_exact(self.vars.len().max(1))
    }

    pub fn value(&self, row: usize, column: NodeId) -> usize {
        self.values[row * self.vars.len() + column]
    }

    /// Dataset made of the listed rows, in order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.vars.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            vars: self.vars.clone(),
            values,
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        check_same_vars(&self.vars, &other.vars)?;
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Dataset {
            vars: self.vars.clone(),
            values,
        })
    }
}

pub(crate) fn check_same_vars(a: &VariableTable, b: &VariableTable) -> Result<()> {
    if a != b {
        return Err(Error::VariableMismatch(format!(
            "{:?}/{:?} vs {:?}/{:?}",
            a.names(),
            a.cardinalities(),
            b.names(),
            b.cardinalities()
        )));
    }
    Ok(())
}

/// Joint counts of a child and its parents: one cell per (parent configuration, value).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyCounts {
    pub child: NodeId,
    pub child_cardinality: usize,
    pub parents: Vec<NodeId>,
    pub radix: MixedRadix,
    counts: Vec<u64>,
}

impl FamilyCounts {
    pub fn tally(data: &Dataset, child: NodeId, parents: &[NodeId]) -> Self {
        let vars = data.vars();
        let radix = vars.radix(parents);
        let r = vars.cardinality(child);
        let mut counts = vec![0u64; radix.size() * r];
        let strides: Vec<usize> = (0..parents.len()).map(|p| radix.stride(p)).collect();
        for row in data.rows() {
            let config: usize = parents.iter().zip(&strides).map(|(&p, &s)| row[p] * s).sum();
            counts[config * r + row[child]] += 1;
        }
        Self {
            child,
            child_cardinality: r,
            parents: parents.to_vec(),
            radix,
            counts,
        }
    }

    pub fn get(&self, config: usize, value: usize) -> u64 {
        self.counts[config * self.child_cardinality + value]
    }

    /// Counts of every child value under one parent configuration.
    pub fn config_counts(&self, config: usize) -> &[u64] {
        let r = self.child_cardinality;
        &self.counts[config * r..(config + 1) * r]
    }

    pub fn parent_space(&self) -> usize {
        self.radix.size()
    }
}

/// Counts aggregated over the classes of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub node: NodeId,
    pub child_cardinality: usize,
    /// `n(S_jl)` per class.
    pub class_totals: Vec<u64>,
    /// `n(x_ij × S_jl)`, row-major by class.
    pub value_counts: Vec<u64>,
    /// `|S_jl|` per class.
    pub class_sizes: Vec<usize>,
}

impl CountTable {
    pub fn from_family(family: &FamilyCounts, partition: &ParentPartition) -> Self {
        let r = family.child_cardinality;
        let k = partition.class_count();
        let mut value_counts = vec![0u64; k * r];
        for config in 0..family.parent_space() {
            let class = partition.class_of(config);
            for (v, &c) in family.config_counts(config).iter().enumerate() {
                value_counts[class * r + v] += c;
            }
        }
        let class_totals = value_counts.chunks_exact(r).map(|c| c.iter().sum()).collect();
        Self {
            node: family.child,
            child_cardinality: r,
            class_totals,
            value_counts,
            class_sizes: (0..k).map(|c| partition.class_size(c)).collect(),
        }
    }

    pub fn class_counts(&self, class: usize) -> &[u64] {
        let r = self.child_cardinality;
        &self.value_counts[class * r..(class + 1) * r]
    }
}

/// Counts for `node` under the given partition (built from the labels when `None`).
pub fn count(
    data: &Dataset,
    ldag: &Ldag,
    node: NodeId,
    partition: Option<&ParentPartition>,
) -> Result<CountTable> {
    check_same_vars(data.vars(), ldag.vars())?;
    let owned;
    let partition = match partition {
        Some(p) => {
            if p.parents != ldag.parents(node) || p.node != node {
                return Err(Error::InvalidConfig(
                    "partition does not match the node's parents".into(),
                ));
            }
            p
        }
        None => {
            owned = build_partition(ldag, node);
            &owned
        }
    };
    let family = FamilyCounts::tally(data, node, ldag.parents(node));
    Ok(CountTable::from_family(&family, partition))
}

/// Log Dirichlet-multinomial evidence of one class: `counts` observed with
/// symmetric pseudocount `alpha` per value.
pub fn class_log_evidence(counts: &[u64], alpha: f64) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let a_sum = alpha * counts.len() as f64;
    let mut out = lgamma(a_sum) - lgamma(total as f64 + a_sum);
    for &c in counts {
        if c > 0 {
            out += lgamma(c as f64 + alpha) - lgamma(alpha);
        }
    }
    out
}

/// Pseudocount for one value in a class of `class_size` configurations.
pub fn class_alpha(ess: f64, child_cardinality: usize, parent_space: usize, class_size: usize) -> f64 {
    ess / (child_cardinality as f64 * parent_space as f64) * class_size as f64
}

/// Log marginal likelihood contribution of one node.
pub fn local_log_ml(table: &CountTable, parent_space: usize, ess: f64) -> f64 {
    (0..table.class_totals.len())
        .map(|l| {
            let alpha = class_alpha(ess, table.child_cardinality, parent_space, table.class_sizes[l]);
            class_log_evidence(table.class_counts(l), alpha)
        })
        .sum()
}

fn check_ess(ess: f64) -> Result<()> {
    if !(ess > 0.0 && ess.is_finite()) {
        return Err(Error::EssOutOfRange(ess));
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::KappaOutOfRange(kappa));
    }
    Ok(())
}

/// Per-node values and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeScores {
    pub per_node: Vec<f64>,
    pub total: f64,
}

impl NodeScores {
    fn from_vec(per_node: Vec<f64>) -> Self {
        let total = per_node.iter().sum();
        Self { per_node, total }
    }
}

/// `log p(X | G_L)`.
pub fn log_marginal_likelihood(data: &Dataset, ldag: &Ldag, ess: f64) -> Result<NodeScores> {
    check_ess(ess)?;
    check_same_vars(data.vars(), ldag.vars())?;
    let per_node = (0..ldag.node_count())
        .map(|j| {
            let partition = build_partition(ldag, j);
            let family = FamilyCounts::tally(data, j, ldag.parents(j));
            let table = CountTable::from_family(&family, &partition);
            local_log_ml(&table, partition.config_count(), ess)
        })
        .collect();
    Ok(NodeScores::from_vec(per_node))
}

/// Which structure prior to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriorMode {
    /// `κ^(dim Θ_G − dim Θ_GL)`: penalizes the parameters saved by labels.
    #[default]
    CsiComplexity,
    /// `κ^(dim Θ_GL)`: penalizes every free parameter.
    ParameterPenalty,
}

impl std::str::FromStr for PriorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csi" | "csi-complexity" => Ok(PriorMode::CsiComplexity),
            "param-penalty" | "parameter-penalty" => Ok(PriorMode::ParameterPenalty),
            other => Err(Error::InvalidConfig(format!("unknown prior mode {other:?}"))),
        }
    }
}

/// Unnormalized log prior of a local structure with `dag_dim` and `ldag_dim` free parameters.
pub fn local_log_prior(dag_dim: usize, ldag_dim: usize, kappa: f64, mode: PriorMode) -> f64 {
    let exponent = match mode {
        PriorMode::CsiComplexity => dag_dim - ldag_dim,
        PriorMode::ParameterPenalty => ldag_dim,
    };
    if exponent == 0 {
        0.0
    } else {
        exponent as f64 * kappa.ln()
    }
}

/// `log p(G_L)` up to an additive constant.
pub fn log_prior(ldag: &Ldag, kappa: f64, mode: PriorMode) -> Result<NodeScores> {
    check_kappa(kappa)?;
    let dims = dimensions(ldag);
    Ok(NodeScores::from_vec(
        dims.per_node_dag
            .iter()
            .zip(&dims.per_node_ldag)
            .map(|(&g, &l)| local_log_prior(g, l, kappa, mode))
            .collect(),
    ))
}

/// Marginal likelihood, prior and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub log_ml: NodeScores,
    pub log_prior: NodeScores,
    pub kappa: f64,
    pub ess: f64,
    pub dims: DimensionReport,
}

impl ScoreReport {
    /// `log p(X | G_L) + log p(G_L)`.
    pub fn total(&self) -> f64 {
        self.log_ml.total + self.log_prior.total
    }

    pub fn node_total(&self, node: NodeId) -> f64 {
        self.log_ml.per_node[node] + self.log_prior.per_node[node]
    }
}

/// `log p(X, G_L)` with the default prior.
pub fn log_score(data: &Dataset, ldag: &Ldag, kappa: f64, ess: f64) -> Result<ScoreReport> {
    log_score_with(data, ldag, kappa, ess, PriorMode::default())
}

pub fn log_score_with(
    data: &Dataset,
    ldag: &Ldag,
    kappa: f64,
    ess: f64,
    mode: PriorMode,
) -> Result<ScoreReport> {
    let log_prior = log_prior(ldag, kappa, mode)?;
    let log_ml = log_marginal_likelihood(data, ldag, ess)?;
    Ok(ScoreReport {
        log_ml,
        log_prior,
        kappa,
        ess,
        dims: dimensions(ldag),
    })
}

/// `log p(Z | Y, G_L)`: evidence of the test rows under the posterior after
/// the training rows.
pub fn log_posterior_predictive(train: &Dataset, test: &Dataset, ldag: &Ldag, ess: f64) -> Result<f64> {
    check_ess(ess)?;
    check_same_vars(train.vars(), ldag.vars())?;
    check_same_vars(test.vars(), ldag.vars())?;
    let mut total = 0.0;
    for j in 0..ldag.node_count() {
        let partition = build_partition(ldag, j);
        let q = partition.config_count();
        let r = ldag.vars().cardinality(j);
        let train_table = CountTable::from_family(&FamilyCounts::tally(train, j, ldag.parents(j)), &partition);
        let test_table = CountTable::from_family(&FamilyCounts::tally(test, j, ldag.parents(j)), &partition);
        for l in 0..partition.class_count() {
            let n_test = test_table.class_totals[l];
            if n_test == 0 {
                continue;
            }
            let alpha = class_alpha(ess, r, q, partition.class_size(l));
            let posterior_sum = alpha * r as f64 + train_table.class_totals[l] as f64;
            total += lgamma(posterior_sum) - lgamma(n_test as f64 + posterior_sum);
            for (&y, &z) in train_table.class_counts(l).iter().zip(test_table.class_counts(l)) {
                if z > 0 {
                    let a = alpha + y as f64;
                    total += lgamma(z as f64 + a) - lgamma(a);
                }
            }
        }
    }
    Ok(total)
}
