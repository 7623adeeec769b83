//! Small reference models used by examples, tests and the acceptance suite.
//!
//! Node ids are zero-based. Where a model is described with one-based
//! variable names `X1..Xd`, node `k` is `X{k+1}`.

use crate::graph::{Dag, Ldag, VariableTable};
use crate::partition::make_maximal;

/// Values of the `person` variable in [`guard_badge`].
pub const WORKER: usize = 0;
pub const VISITOR: usize = 1;
pub const SPY: usize = 2;

/// Building guard scenario: `person` (worker, visitor, spy) drives `gender`
/// and `badge`; gender affects badge wearing only for workers.
///
/// Nodes: 0 = person, 1 = gender, 2 = badge. With `labeled = false` the
/// plain DAG is returned.
pub fn guard_badge(labeled: bool) -> Ldag {
    let vars = VariableTable::new(
        vec!["person".into(), "gender".into(), "badge".into()],
        vec![3, 2, 2],
    )
    .expect("valid table");
    let dag = Dag::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).expect("acyclic");
    let mut ldag = Ldag::new(vars, dag).expect("sizes match");
    if labeled {
        ldag.set_label(1, 2, [vec![SPY], vec![VISITOR]])
            .expect("valid label");
    }
    ldag
}

// X1 with parents X2, X3, X4; every variable binary.
fn local_four(labels: &[(usize, Vec<Vec<usize>>)]) -> Ldag {
    let dag = Dag::from_edges(4, &[(1, 0), (2, 0), (3, 0)]).expect("acyclic");
    let mut ldag = Ldag::new(VariableTable::binary(4), dag).expect("sizes match");
    for (parent, configs) in labels {
        ldag.set_label(*parent, 0, configs.clone())
            .expect("valid label");
    }
    ldag
}

/// `X1` with parents `X2, X3, X4`; label `(0,1)` on `X2 → X1` and the
/// wildcard label `(*,1)` on `X4 → X1`. Five CPT classes.
pub fn wildcard_local() -> Ldag {
    local_four(&[
        (1, vec![vec![0, 1]]),
        (3, vec![vec![0, 1], vec![1, 1]]),
    ])
}

/// Labels whose rules overlap and must be OR-combined: `(0,1)` on
/// `X4 → X1` and `(1,0)` on `X2 → X1`. Six CPT classes.
pub fn overlapping_local() -> Ldag {
    local_four(&[(3, vec![vec![0, 1]]), (1, vec![vec![1, 0]])])
}

/// [`wildcard_local`] with `(1,0)` added to the label on `X2 → X1`; not
/// maximal since `(1,1)` is implied.
pub fn non_maximal_local() -> Ldag {
    local_four(&[
        (1, vec![vec![0, 1], vec![1, 0]]),
        (3, vec![vec![0, 1], vec![1, 1]]),
    ])
}

/// Regular but not maximal: its closure fills the label on `X4 → X1`.
pub fn regular_non_maximal_local() -> Ldag {
    local_four(&[
        (3, vec![vec![0, 0], vec![0, 1], vec![1, 0]]),
        (1, vec![vec![1, 0], vec![1, 1]]),
    ])
}

/// Four binary variables where `X2 ⟂ X4 | X1, X3` holds only by cases on
/// `X3`: edges `X2,X3,X4 → X1` and `X3 → X4`, with `X2 → X1` cut when
/// `X3 = 0` and `X4 → X1` cut when `X3 = 1`.
pub fn cases_collider() -> Ldag {
    let dag = Dag::from_edges(4, &[(1, 0), (2, 0), (3, 0), (2, 3)]).expect("acyclic");
    let mut ldag = Ldag::new(VariableTable::binary(4), dag).expect("sizes match");
    // domain of (X2, X1) is (X3, X4); of (X4, X1) is (X2, X3)
    ldag.set_label(1, 0, [vec![0, 0], vec![0, 1]])
        .expect("valid label");
    ldag.set_label(3, 0, [vec![0, 1], vec![1, 1]])
        .expect("valid label");
    ldag
}

/// CSI-equivalent partner of [`cases_collider`]: edges `X2,X3 → X1`,
/// `X1,X3 → X4`, with `X2 → X1` cut when `X3 = 0` and `X1 → X4` cut when
/// `X3 = 1`. Here `X2 ⟂ X4` holds marginally.
pub fn cases_chain() -> Ldag {
    let dag = Dag::from_edges(4, &[(1, 0), (2, 0), (0, 3), (2, 3)]).expect("acyclic");
    let mut ldag = Ldag::new(VariableTable::binary(4), dag).expect("sizes match");
    ldag.set_label(1, 0, [vec![0]]).expect("valid label");
    ldag.set_label(0, 3, [vec![1]]).expect("valid label");
    ldag
}

/// Ten binary variables with twenty edges and labels on five local
/// structures, closed to be maximal. Used to generate synthetic data.
///
/// Parent sets (one-based): `X2←X1`, `X3←X1,X2`, `X4←X1,X3`, `X6←X1`,
/// `X8←X6`, `X5←X3,X4,X8`, `X7←X2,X3,X4,X6`, `X9←X5,X8`,
/// `X10←X6,X7,X8,X9`.
pub fn ten_node_generator() -> Ldag {
    let one_based: [(usize, usize); 20] = [
        (1, 2),
        (1, 3),
        (2, 3),
        (1, 4),
        (3, 4),
        (1, 6),
        (6, 8),
        (3, 5),
        (4, 5),
        (8, 5),
        (2, 7),
        (3, 7),
        (4, 7),
        (6, 7),
        (5, 9),
        (8, 9),
        (6, 10),
        (7, 10),
        (8, 10),
        (9, 10),
    ];
    let edges: Vec<_> = one_based.iter().map(|&(i, j)| (i - 1, j - 1)).collect();
    let dag = Dag::from_edges(10, &edges).expect("acyclic");
    let mut ldag = Ldag::new(VariableTable::binary(10), dag).expect("sizes match");
    let labels: Vec<((usize, usize), Vec<Vec<usize>>)> = vec![
        // X3: domain (X1)
        ((2, 3), vec![vec![0]]),
        // X4: domain (X3)
        ((1, 4), vec![vec![1]]),
        // X5: domains (X3, X8) and (X3, X4)
        ((4, 5), vec![vec![0, 0], vec![0, 1]]),
        ((8, 5), vec![vec![0, 0], vec![0, 1]]),
        // X7: domains over the other three of (X2, X3, X4, X6)
        ((2, 7), vec![vec![1, 1, 0]]),
        ((3, 7), vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 1]]),
        ((4, 7), vec![vec![1, 1, 0], vec![1, 1, 1]]),
        ((6, 7), vec![vec![1, 1, 0], vec![1, 1, 1]]),
        // X9: domain (X8)
        ((5, 9), vec![vec![1]]),
        // X10: X6 = 1 cuts X7, X8 and X9
        ((7, 10), wildcard_tail(1, 2)),
        ((8, 10), wildcard_tail(1, 2)),
        ((9, 10), wildcard_tail(1, 2)),
    ];
    for ((i, j), configs) in labels {
        ldag.set_label(i - 1, j - 1, configs).expect("valid label");
    }
    make_maximal(&ldag)
}

// (head, *, *, ...) with `free` binary wildcards.
fn wildcard_tail(head: usize, free: usize) -> Vec<Vec<usize>> {
    (0..1usize << free)
        .map(|bits| {
            let mut config = vec![head];
            config.extend((0..free).rev().map(|k| (bits >> k) & 1));
            config
        })
        .collect()
}
