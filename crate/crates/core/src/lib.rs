//! Labeled directed acyclic graphs (LDAGs) over finite discrete variables.
//!
//! An LDAG is a DAG whose edges may carry labels: sets of parent contexts in
//! which the edge's endpoints are conditionally independent. The crate covers
//! the whole modelling pipeline:
//!
//! - [`graph`]: DAGs, labels, contexts and context-specific graphs
//! - [`partition`]: CSI-consistent partitions, parameter counts, maximality and regularity
//! - [`separation`]: d-separation, CSI-separation, Markov and CSI-equivalence
//! - [`scoring`]: Dirichlet-multinomial marginal likelihood, structure priors, predictive scores
//! - [`search`]: greedy label optimization inside a non-reversible MCMC walk over DAGs
//! - [`selection`]: cross-validated choice of the prior strength
//! - [`probability`]: parameter estimation, sampling, exact joints and KL divergence
//! - [`io`]: dataset and model text formats, DOT export and run manifests

pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod graph;
pub mod io;
pub mod partition;
pub mod probability;
pub mod scoring;
pub mod search;
pub mod selection;
pub mod separation;

pub use error::{Error, Result};
pub use graph::{Context, Dag, Edge, Label, Ldag, NodeId, VariableTable};
pub use partition::{DimensionReport, ParentPartition};
pub use scoring::{Dataset, PriorMode, ScoreReport};
pub use search::{LearnResult, SearchConfig};


