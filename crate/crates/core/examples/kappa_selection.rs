//! Cross-validated choice of the prior strength on synthetic data.
//!
//! Usage: `cargo run --release --example kappa_selection -- [n]`

use ldag::catalog::ten_node_generator;
use ldag::probability::{random_cpds, sample};
use ldag::search::SearchConfig;
use ldag::selection::{cross_validate, CvPlan};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ldag::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(1000, |s| s.parse().expect("n"));
    let truth = ten_node_generator();
    let cpds = random_cpds(&truth, &mut ChaCha8Rng::seed_from_u64(2024));
    let data = sample(&cpds, &truth, n, 1)?;
    let plan = CvPlan {
        search: SearchConfig { chains: 20, iterations: 300, ..SearchConfig::default() },
        ..CvPlan::default()
    };
    let report = cross_validate(&data, &plan)?;
    for (k, kappa) in report.kappas.iter().enumerate() {
        let mark = if k == report.chosen { " <- chosen" } else { "" };
        println!("kappa {kappa:<6} rho_pred {:.3}{mark}", report.rho[k]);
    }
    Ok(())
}
