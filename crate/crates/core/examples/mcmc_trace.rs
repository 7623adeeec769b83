//! Runs a few search chains by hand and prints their score traces.

use ldag::catalog;
use ldag::probability::{random_cpds, sample};
use ldag::search::{mcmc_step, ChainState, ScoreCache, SearchConfig};
use ldag::Dag;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ldag::Result<()> {
    let truth = catalog::cases_collider();
    let cpds = random_cpds(&truth, &mut ChaCha8Rng::seed_from_u64(2));
    let data = sample(&cpds, &truth, 2000, 3)?;
    let cfg = SearchConfig { kappa: 0.3, ..SearchConfig::default() };
    let cache = ScoreCache::new(&data, &cfg);
    for chain in 0..3 {
        let mut state = ChainState::seeded(Dag::empty(4), &cache, 42, chain, None);
        for _ in 0..60 {
            mcmc_step(&mut state, &cache);
        }
        let every_tenth: Vec<String> = state.trace.best.iter().step_by(10).map(|s| format!("{s:.1}")).collect();
        println!(
            "chain {chain}: accepted {} of 60, best so far {}",
            state.trace.accepted,
            every_tenth.join(" ")
        );
        println!("  best graph edges {:?}", state.best_dag.edges());
    }
    println!("families scored: {}", cache.len());
    Ok(())
}
