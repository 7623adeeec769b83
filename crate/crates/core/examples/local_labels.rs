//! Greedy label optimization for one node with fixed parents.
//!
//! Data come from a structure whose CPT has five classes. With enough rows
//! a moderate prior strength recovers them, while a tiny `κ` keeps every
//! configuration apart. Some CPD seeds draw two classes with nearly equal
//! distributions, or make a parent configuration rare; the optimizer then
//! merges them, and the merged partition really does score higher.
//!
//! Usage: `cargo run --release --example local_labels -- [cpd seed]`

use ldag::catalog;
use ldag::partition::{build_partition, ParentPartition};
use ldag::probability::{random_cpds, sample};
use ldag::search::optimize_local_structure;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ldag::Result<()> {
    let truth = catalog::wildcard_local();
    let seed: u64 = std::env::args().nth(1).map_or(11, |s| s.parse().expect("seed"));
    let cpds = random_cpds(&truth, &mut ChaCha8Rng::seed_from_u64(seed));
    let expected = build_partition(&truth, 0);
    println!("generating partition: {} classes", expected.class_count());
    let data = sample(&cpds, &truth, 50_000, 9)?;
    for kappa in [0.001, 0.1, 0.3, 0.5] {
        let local = optimize_local_structure(&data, 0, truth.parents(0), kappa, 1.0)?;
        let partition = ParentPartition::from_local(&local);
        println!(
            "kappa {kappa:<5}: {} classes, {} label configurations, matches generator: {}",
            partition.class_count(),
            local.label_config_count(),
            partition == expected
        );
        for l in 0..partition.class_count() {
            println!("    {:?}", partition.class_configs(l));
        }
    }
    Ok(())
}
