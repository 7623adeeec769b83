//! Marginal likelihood, structure prior and predictive score of a model.

use ldag::catalog;
use ldag::probability::{random_cpds, sample};
use ldag::scoring::{log_posterior_predictive, log_score, log_score_with, PriorMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ldag::Result<()> {
    let model = catalog::guard_badge(true);
    let cpds = random_cpds(&model, &mut ChaCha8Rng::seed_from_u64(5));
    let data = sample(&cpds, &model, 1000, 6)?;

    for kappa in [1.0, 0.3, 0.001] {
        let report = log_score(&data, &model, kappa, 1.0)?;
        println!(
            "kappa {kappa:<6} log ML {:.3}  log prior {:.3}  total {:.3}",
            report.log_ml.total,
            report.log_prior.total,
            report.total()
        );
    }
    let plain = log_score(&data, &model.without_labels(), 0.3, 1.0)?;
    println!("same data without labels: {:.3}", plain.total());
    let penalty = log_score_with(&data, &model, 0.3, 1.0, PriorMode::ParameterPenalty)?;
    println!("parameter-penalty prior: {:.3}", penalty.log_prior.total);

    let train = data.select(&(0..800).collect::<Vec<_>>());
    let test = data.select(&(800..1000).collect::<Vec<_>>());
    println!("log p(test | train) = {:.3}", log_posterior_predictive(&train, &test, &model, 1.0)?);
    Ok(())
}
