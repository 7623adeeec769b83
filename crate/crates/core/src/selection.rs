//! Choosing the prior strength `κ` by cross-validated predictive evidence.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Ldag;
use crate::scoring::{log_posterior_predictive, Dataset};
use crate::search::{learn, SearchConfig};

/// Candidate values of `κ` used when none are given.
pub const DEFAULT_KAPPAS: [f64; 4] = [0.001, 0.1, 0.3, 0.5];

/// What to cross-validate and how.
#[derive(Debug, Clone, PartialEq)]
pub struct CvPlan {
    pub folds: usize,
    pub kappas: Vec<f64>,
    pub seed: u64,
    /// Template for every learning run; its `kappa` is overridden.
    pub search: SearchConfig,
}

impl Default for CvPlan {
    fn default() -> Self {
        Self {
            folds: 10,
            kappas: DEFAULT_KAPPAS.to_vec(),
            seed: 0,
            search: SearchConfig::default(),
        }
    }
}

impl CvPlan {
    fn validate(&self, n: usize) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig("at least two folds are needed".into()));
        }
        if n < self.folds {
            return Err(Error::InvalidConfig(format!("{n} rows cannot fill {} folds", self.folds)));
        }
        if self.kappas.is_empty() {
            return Err(Error::InvalidConfig("no candidate kappa".into()));
        }
        for &k in &self.kappas {
            if !(k > 0.0 && k <= 1.0) {
                return Err(Error::KappaOutOfRange(k));
            }
        }
        self.search.validate()
    }

    /// Search settings for one cell.
    pub fn config_for(&self, kappa: f64, fold: usize) -> SearchConfig {
        SearchConfig {
            kappa,
            seed: self.search.seed.wrapping_add(fold as u64),
            ..self.search.clone()
        }
    }
}

/// Shuffles `0..n` once and cuts it into `m` folds whose sizes differ by at most one.
pub fn make_folds(n: usize, m: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if m == 0 || n < m {
        return Err(Error::InvalidConfig(format!("{n} rows cannot fill {m} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / m;
    let extra = n % m;
    let mut folds = Vec::with_capacity(m);
    let mut start = 0;
    for k in 0..m {
        let len = base + usize::from(k < extra);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}

/// Per-`κ` predictive evidence and the chosen value.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub kappas: Vec<f64>,
    /// `fold_scores[k][m]`: log predictive of fold `m` under the model learned for `kappas[k]`.
    pub fold_scores: Vec<Vec<f64>>,
    /// Mean of each row of `fold_scores`.
    pub rho: Vec<f64>,
    pub chosen: usize,
    pub fold_models: Vec<Vec<Ldag>>,
}

impl CvReport {
    pub fn chosen_kappa(&self) -> f64 {
        self.kappas[self.chosen]
    }
}

/// Index of the largest value; ties go to the smallest `κ`.
pub fn choose_kappa(kappas: &[f64], rho: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..kappas.len() {
        let better = rho[k] > rho[best];
        let tied_smaller = rho[k] == rho[best] && kappas[k] < kappas[best];
        if better || tied_smaller {
            best = k;
        }
    }
    best
}

pub fn cross_validate(data: &Dataset, plan: &CvPlan) -> Result<CvReport> {
    plan.validate(data.len())?;
    let folds = make_folds(data.len(), plan.folds, plan.seed)?;
    let splits: Vec<(Dataset, Dataset)> = (0..folds.len())
        .map(|m| {
            let train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != m)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            (data.select(&train), data.select(&folds[m]))
        })
        .collect();
    let cells: Vec<(usize, usize)> = (0..plan.kappas.len())
        .flat_map(|k| (0..folds.len()).map(move |m| (k, m)))
        .collect();
    let results: Vec<Result<(f64, Ldag)>> = cells
        .par_iter()
        .map(|&(k, m)| {
            let (train, test) = &splits[m];
            let cfg = plan.config_for(plan.kappas[k], m);
            let learned = learn(train, &cfg)?;
            let score = log_posterior_predictive(train, test, &learned.model, cfg.ess)?;
            Ok((score, learned.model))
        })
        .collect();
    let mut fold_scores = vec![Vec::with_capacity(folds.len()); plan.kappas.len()];
    let mut fold_models = vec![Vec::with_capacity(folds.len()); plan.kappas.len()];
    for (&(k, _), result) in cells.iter().zip(results) {
        let (score, model) = result?;
        fold_scores[k].push(score);
        fold_models[k].push(model);
    }
    let rho: Vec<f64> = fold_scores
        .iter()
        .map(|s| s.iter().sum::<f64>() / s.len() as f64)
        .collect();
    Ok(CvReport {
        chosen: choose_kappa(&plan.kappas, &rho),
        kappas: plan.kappas.clone(),
        fold_scores,
        rho,
        fold_models,
    })
}
