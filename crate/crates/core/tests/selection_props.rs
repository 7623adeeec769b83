//! Fold construction and cross-validation bookkeeping.

use ldag::catalog;
use ldag::probability::{random_cpds, sample};
use ldag::search::SearchConfig;
use ldag::selection::{choose_kappa, cross_validate, make_folds, CvPlan};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn folds_partition_the_rows(n in 2usize..500, m in 2usize..12, seed in any::<u64>()) {
        prop_assume!(n >= m);
        let folds = make_folds(n, m, seed).unwrap();
        prop_assert_eq!(folds.len(), m);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(make_folds(n, m, seed).unwrap(), folds);
    }
}

#[test]
fn report_is_consistent_and_reproducible() {
    let truth = catalog::guard_badge(true);
    let cpds = random_cpds(&truth, &mut ChaCha8Rng::seed_from_u64(1));
    let data = sample(&cpds, &truth, 300, 2).unwrap();
    let plan = CvPlan {
        folds: 5,
        kappas: vec![0.5, 0.01],
        seed: 3,
        search: SearchConfig { chains: 2, iterations: 40, ..SearchConfig::default() },
    };
    let a = cross_validate(&data, &plan).unwrap();
    assert_eq!(a.fold_scores.len(), 2);
    assert!(a.fold_scores.iter().all(|row| row.len() == 5));
    for (row, rho) in a.fold_scores.iter().zip(&a.rho) {
        assert!((row.iter().sum::<f64>() / 5.0 - rho).abs() < 1e-12);
    }
    assert_eq!(a.chosen, choose_kappa(&a.kappas, &a.rho));
    let b = cross_validate(&data, &plan).unwrap();
    assert_eq!(a.rho, b.rho);
    assert_eq!(a.fold_models, b.fold_models);
}

#[test]
fn too_few_rows_is_a_config_error() {
    let truth = catalog::guard_badge(false);
    let data = sample(&random_cpds(&truth, &mut ChaCha8Rng::seed_from_u64(1)), &truth, 4, 0).unwrap();
    assert!(cross_validate(&data, &CvPlan::default()).is_err());
}
