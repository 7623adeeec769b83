//! Partitions and parameter counts of small labeled models.
//!
//! Prints the CPT classes of the building-guard model and of two four-node
//! local structures, along with the free-parameter counts with and without
//! labels.

use ldag::catalog;
use ldag::partition::{build_partition, dimensions};
use ldag::Ldag;

fn show(title: &str, ldag: &Ldag, node: usize) {
    let partition = build_partition(ldag, node);
    let dims = dimensions(ldag);
    println!("{title}");
    println!("  parameters: {} as a DAG, {} with labels", dims.total_dag, dims.total_ldag);
    for l in 0..partition.class_count() {
        let configs: Vec<String> = partition
            .class_configs(l)
            .iter()
            .map(|c| c.iter().map(usize::to_string).collect::<String>())
            .collect();
        println!("  class {l}: {}", configs.join(" "));
    }
}

fn main() {
    show("guard model, badge given (person, gender)", &catalog::guard_badge(true), 2);
    show("wildcard labels on X1 given (X2, X3, X4)", &catalog::wildcard_local(), 0);
    show("overlapping labels on X1", &catalog::overlapping_local(), 0);
}
