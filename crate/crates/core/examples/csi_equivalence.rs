//! Two labeled graphs with different skeleton-compatible DAGs that encode
//! the same context-specific independences.

use ldag::catalog;
use ldag::separation::{ci_by_cases, csi_equivalent, markov_equivalent, DEFAULT_CONTEXT_BOUND};

fn main() -> ldag::Result<()> {
    let collider = catalog::cases_collider();
    let chain = catalog::cases_chain();
    println!("underlying DAGs Markov equivalent: {}", markov_equivalent(collider.dag(), chain.dag()));
    println!("CSI-equivalent: {}", csi_equivalent(&collider, &chain, DEFAULT_CONTEXT_BOUND)?);
    // X2 and X4 given X1, X3: certified only by splitting on X3
    println!(
        "X2 and X4 independent given X1 by cases on X3: {}",
        ci_by_cases(&collider, &[1], &[3], &[0], &[2], DEFAULT_CONTEXT_BOUND)?
    );
    Ok(())
}
