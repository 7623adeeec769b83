//! Samples data from the ten-node generator, learns a model and compares it
//! with the truth.
//!
//! Usage: `cargo run --release --example synthetic_recovery -- [n] [seed] [kappa]`

use std::time::Instant;

use ldag::catalog::ten_node_generator;
use ldag::probability::{estimate_map_parameters, kl_divergence, random_cpds, sample, DEFAULT_STATE_BOUND};
use ldag::search::{learn, SearchConfig};
use ldag::separation::markov_equivalent;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ldag::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(2000, |s| s.parse().expect("n"));
    let seed: u64 = args.get(1).map_or(1, |s| s.parse().expect("seed"));
    let kappa: f64 = args.get(2).map_or(0.1, |s| s.parse().expect("kappa"));

    let truth = ten_node_generator();
    let cpds = random_cpds(&truth, &mut ChaCha8Rng::seed_from_u64(seed));
    let data = sample(&cpds, &truth, n, seed)?;

    let started = Instant::now();
    let cfg = SearchConfig { kappa, seed, ..SearchConfig::default() };
    let learned = learn(&data, &cfg)?;
    let estimate = estimate_map_parameters(&data, &learned.model, cfg.ess)?;
    let kl = kl_divergence(&cpds, &estimate, DEFAULT_STATE_BOUND)?;

    println!("n = {n}, kappa = {kappa}, seed = {seed}");
    println!("log score        {:.3}", learned.report.total());
    println!("edges            {}", learned.model.dag().edge_count());
    println!("labels           {}", learned.model.labels().len());
    println!("markov equiv     {}", markov_equivalent(learned.model.dag(), truth.dag()));
    println!("KL(truth||est)   {kl:.5}");
    println!("elapsed          {:.2?}", started.elapsed());
    Ok(())
}
