//! Generators and brute-force oracles shared by the integration tests.
//!
//! Everything here is written without the crate's partition, separation or
//! scoring internals so the tests compare two independent computations.

#![allow(dead_code)]

use ldag::graph::{Dag, Ldag, VariableTable};
use ldag::scoring::Dataset;
use libm::lgamma;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random DAG: shuffled node order, each forward pair an edge with probability `p`.
pub fn random_dag<R: Rng>(rng: &mut R, d: usize, p: f64, max_parents: usize) -> Dag {
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for j in 0..d {
        let mut count = 0;
        for i in 0..j {
            if count < max_parents && rng.random_bool(p) {
                edges.push((order[i], order[j]));
                count += 1;
            }
        }
    }
    Dag::from_edges(d, &edges).unwrap()
}

/// Random variable table with cardinalities in `2..=max_card`.
pub fn random_vars<R: Rng>(rng: &mut R, d: usize, max_card: usize) -> VariableTable {
    let cards = (0..d).map(|_| rng.random_range(2..=max_card)).collect();
    let names = (0..d).map(|j| format!("V{j}")).collect();
    VariableTable::new(names, cards).unwrap()
}

/// Every label configuration added independently with probability `p`.
pub fn random_labels<R: Rng>(rng: &mut R, ldag: &mut Ldag, p: f64) {
    for (from, to) in ldag.dag().edges() {
        if ldag.parents(to).len() < 2 {
            continue;
        }
        let domain = ldag.label_domain(from, to);
        let radix = ldag.vars().radix(&domain);
        let configs: Vec<Vec<usize>> = (0..radix.size())
            .filter(|_| rng.random_bool(p))
            .map(|c| radix.decode(c))
            .collect();
        ldag.set_label(from, to, configs).unwrap();
    }
}

pub fn random_ldag<R: Rng>(rng: &mut R, vars: VariableTable, edge_p: f64, label_p: f64) -> Ldag {
    let d = vars.len();
    let dag = random_dag(rng, d, edge_p, 3);
    let mut ldag = Ldag::new(vars, dag).unwrap();
    random_labels(rng, &mut ldag, label_p);
    ldag
}

pub fn random_dataset<R: Rng>(rng: &mut R, vars: &VariableTable, n: usize) -> Dataset {
    let rows = (0..n)
        .map(|_| (0..vars.len()).map(|j| rng.random_range(0..vars.cardinality(j))).collect())
        .collect();
    Dataset::new(vars.clone(), rows).unwrap()
}

// Parent configuration of `node` in row `x`, last parent fastest.
fn parent_code(ldag: &Ldag, node: usize, x: &[usize]) -> usize {
    ldag.parents(node)
        .iter()
        .fold(0, |acc, &p| acc * ldag.vars().cardinality(p) + x[p])
}

fn decode(radices: &[usize], mut code: usize) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for k in (0..radices.len()).rev() {
        out[k] = code % radices[k];
        code /= radices[k];
    }
    out
}

/// Class id per parent configuration: two configurations share a class when
/// a chain of labeled single-parent changes links them. Computed by repeated
/// relabelling until nothing changes.
pub fn oracle_classes(ldag: &Ldag, node: usize) -> Vec<usize> {
    let parents = ldag.parents(node).to_vec();
    let radices: Vec<usize> = parents.iter().map(|&p| ldag.vars().cardinality(p)).collect();
    let q: usize = radices.iter().product();
    let configs: Vec<Vec<usize>> = (0..q).map(|c| decode(&radices, c)).collect();
    let mut class: Vec<usize> = (0..q).collect();
    loop {
        let mut changed = false;
        for a in 0..q {
            for b in 0..q {
                let differing: Vec<usize> = (0..parents.len()).filter(|&k| configs[a][k] != configs[b][k]).collect();
                if differing.len() != 1 {
                    continue;
                }
                let k = differing[0];
                let rest: Vec<usize> = (0..parents.len()).filter(|&m| m != k).map(|m| configs[a][m]).collect();
                let linked = ldag.label(parents[k], node).is_some_and(|l| l.contains(&rest));
                if linked && class[a] != class[b] {
                    let low = class[a].min(class[b]);
                    let (ca, cb) = (class[a], class[b]);
                    for c in class.iter_mut() {
                        if *c == ca || *c == cb {
                            *c = low;
                        }
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            return class;
        }
    }
}

/// Log evidence as a product of one-step-ahead predictive probabilities.
pub fn prequential_log_ml(data: &Dataset, ldag: &Ldag, ess: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..ldag.node_count() {
        let r = ldag.vars().cardinality(j);
        let classes = oracle_classes(ldag, j);
        let q = classes.len();
        let mut size = vec![0usize; q];
        for &c in &classes {
            size[c] += 1;
        }
        let mut counts = vec![vec![0f64; r]; q];
        for row in data.rows() {
            let l = classes[parent_code(ldag, j, row)];
            let alpha = ess / (r * q) as f64 * size[l] as f64;
            let seen: f64 = counts[l].iter().sum();
            total += ((counts[l][row[j]] + alpha) / (seen + alpha * r as f64)).ln();
            counts[l][row[j]] += 1.0;
        }
    }
    total
}

/// Textbook Dirichlet-multinomial DAG score with `α = N / (r q)` per cell.
pub fn standard_dag_score(data: &Dataset, vars: &VariableTable, dag: &Dag, ess: f64) -> f64 {
    let ldag = Ldag::new(vars.clone(), dag.clone()).unwrap();
    let mut total = 0.0;
    for j in 0..dag.node_count() {
        let r = vars.cardinality(j);
        let q: usize = dag.parents(j).iter().map(|&p| vars.cardinality(p)).product();
        let alpha = ess / (r * q) as f64;
        let mut counts = vec![vec![0f64; r]; q];
        for row in data.rows() {
            counts[parent_code(&ldag, j, row)][row[j]] += 1.0;
        }
        for cell in counts {
            let n: f64 = cell.iter().sum();
            total += lgamma(alpha * r as f64) - lgamma(n + alpha * r as f64);
            for c in cell {
                total += lgamma(c + alpha) - lgamma(alpha);
            }
        }
    }
    total
}

/// d-separation via the moral graph of the ancestral set.
pub fn moral_dsep(dag: &Dag, a: &[usize], b: &[usize], s: &[usize]) -> bool {
    let d = dag.node_count();
    let mut keep = vec![false; d];
    let mut stack: Vec<usize> = a.iter().chain(b).chain(s).copied().collect();
    while let Some(n) = stack.pop() {
        if !keep[n] {
            keep[n] = true;
            stack.extend(dag.parents(n).iter().copied());
        }
    }
    let mut adj = vec![vec![false; d]; d];
    for j in (0..d).filter(|&j| keep[j]) {
        let ps = dag.parents(j);
        for &p in ps {
            adj[p][j] = true;
            adj[j][p] = true;
        }
        for &p in ps {
            for &q in ps {
                if p != q {
                    adj[p][q] = true;
                }
            }
        }
    }
    let blocked: Vec<bool> = (0..d).map(|n| s.contains(&n)).collect();
    let mut seen = vec![false; d];
    let mut stack: Vec<usize> = a.to_vec();
    while let Some(n) = stack.pop() {
        if seen[n] {
            continue;
        }
        seen[n] = true;
        if b.contains(&n) {
            return false;
        }
        for m in 0..d {
            if adj[n][m] && keep[m] && !blocked[m] && !seen[m] {
                stack.push(m);
            }
        }
    }
    true
}

/// Every DAG on `d` labelled nodes.
pub fn all_dags(d: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    // each unordered pair is absent, forward or backward
    let total = 3usize.pow(pairs.len() as u32);
    for mut code in 0..total {
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match code % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            code /= 3;
        }
        if let Ok(dag) = Dag::from_edges(d, &edges) {
            out.push(dag);
        }
    }
    out
}

/// Full joint table, last variable fastest.
pub fn joint_table(vars: &VariableTable, p: impl Fn(&[usize]) -> f64) -> Vec<f64> {
    let radices = vars.cardinalities().to_vec();
    let size: usize = radices.iter().product();
    (0..size).map(|c| p(&decode(&radices, c))).collect()
}

/// Whether `A ⟂ B | S` holds in the joint restricted to `x_C = ctx`, up to `tol`.
pub fn independent_in_joint(
    vars: &VariableTable,
    joint: &[f64],
    a: &[usize],
    b: &[usize],
    s: &[usize],
    ctx: &[(usize, usize)],
    tol: f64,
) -> bool {
    use std::collections::HashMap;
    let radices = vars.cardinalities().to_vec();
    let mut abs: HashMap<(Vec<usize>, Vec<usize>, Vec<usize>), f64> = HashMap::new();
    let mut as_: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
    let mut bs: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
    let mut ss: HashMap<Vec<usize>, f64> = HashMap::new();
    for (code, &p) in joint.iter().enumerate() {
        let x = decode(&radices, code);
        if ctx.iter().any(|&(n, v)| x[n] != v) {
            continue;
        }
        let pick = |set: &[usize]| set.iter().map(|&n| x[n]).collect::<Vec<_>>();
        let (xa, xb, xs) = (pick(a), pick(b), pick(s));
        *abs.entry((xa.clone(), xb.clone(), xs.clone())).or_default() += p;
        *as_.entry((xa, xs.clone())).or_default() += p;
        *bs.entry((xb, xs.clone())).or_default() += p;
        *ss.entry(xs).or_default() += p;
    }
    abs.iter().all(|((xa, xb, xs), &pab)| {
        let lhs = pab * ss[xs];
        let rhs = as_[&(xa.clone(), xs.clone())] * bs[&(xb.clone(), xs.clone())];
        (lhs - rhs).abs() <= tol
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
