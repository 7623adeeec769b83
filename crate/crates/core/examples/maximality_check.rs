//! Finds missing label configurations and vacuous edges, then repairs them.

use ldag::catalog;
use ldag::partition::{build_partition, is_maximal, is_regular, make_maximal, regularize};

fn main() {
    let ldag = catalog::non_maximal_local();
    let (maximal, witnesses) = is_maximal(&ldag);
    println!("maximal: {maximal}");
    for w in &witnesses {
        println!("  can add {:?} to the label on edge {:?}", w.config, w.edge);
    }
    let closed = make_maximal(&ldag);
    println!("after closure: {} classes for X1", build_partition(&closed, 0).class_count());

    // closure can fill a label completely, which makes its edge vacuous
    let tricky = catalog::regular_non_maximal_local();
    let closed = make_maximal(&tricky);
    let (regular, vacuous) = is_regular(&closed);
    println!("closure of the second model regular: {regular}, vacuous edges {vacuous:?}");
    let fixed = regularize(&closed);
    println!(
        "regularized: parents of X1 {:?}, labels {}",
        fixed.parents(0),
        fixed.labels().len()
    );
}
