//! Context-specific independence queries on the guard model.

use ldag::catalog::{self, SPY, WORKER};
use ldag::graph::context_specific_graph;
use ldag::separation::{csi_separated, d_separated, SeparationQuery};
use ldag::Context;

fn main() -> ldag::Result<()> {
    let ldag = catalog::guard_badge(true);
    let (person, gender, badge) = (0, 1, 2);
    println!("gender and badge d-separated by person: {}", d_separated(ldag.dag(), &[gender], &[badge], &[person]));
    for (name, value) in [("worker", WORKER), ("spy", SPY)] {
        let ctx = Context::new().with(person, value);
        let graph = context_specific_graph(&ldag, &ctx);
        let query = SeparationQuery::new(vec![gender], vec![badge], vec![], ctx)?;
        println!(
            "person = {name}: edges {:?}, gender independent of badge: {}",
            graph.edges(),
            csi_separated(&ldag, &query)?
        );
    }
    Ok(())
}
