//! Ancestral sampling, parameter estimation and KL divergence.

use ldag::catalog;
use ldag::probability::{estimate_map_parameters, kl_divergence, random_cpds, sample, DEFAULT_STATE_BOUND};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ldag::Result<()> {
    let model = catalog::ten_node_generator();
    let truth = random_cpds(&model, &mut ChaCha8Rng::seed_from_u64(1));
    for n in [100, 1000, 10_000, 100_000] {
        let data = sample(&truth, &model, n, 7)?;
        let estimate = estimate_map_parameters(&data, &model, 1.0)?;
        println!("n = {n:>6}: KL(truth || estimate) = {:.6}", kl_divergence(&truth, &estimate, DEFAULT_STATE_BOUND)?);
    }
    Ok(())
}
