//! Acceptance suite: one test, and one printed PASS/FAIL line, per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.
//! Tolerances are pinned in the constants below.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use ldag::catalog;
use ldag::graph::{Ldag, VariableTable};
use ldag::partition::{build_partition, dimensions, is_maximal, is_regular, make_maximal, regularize};
use ldag::probability::{
    estimate_map_parameters, joint_probability, kl_divergence, random_cpds, sample, CpdSet, DEFAULT_STATE_BOUND,
};
use ldag::scoring::{log_marginal_likelihood, log_posterior_predictive, Dataset};
use ldag::search::{learn, metropolis_accept, SearchConfig};
use ldag::selection::{cross_validate, CvPlan, DEFAULT_KAPPAS};
use ldag::separation::{ci_by_cases, csi_equivalent, csi_separated, SeparationQuery, DEFAULT_CONTEXT_BOUND};
use ldag::Context;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCORE_REL_TOL: f64 = 1e-9;
const INDEPENDENCE_TOL: f64 = 1e-9;
const ACCEPT_TOL: f64 = 0.02;
const HEART_SCORE_FLOOR: f64 = -6729.0;

fn verdict(id: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {id:>2} [{name}]: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SCORE_REL_TOL * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn criterion_01_parameter_counts() {
    let spy = dimensions(&catalog::guard_badge(true));
    let wildcard = build_partition(&catalog::wildcard_local(), 0);
    let overlap = build_partition(&catalog::overlapping_local(), 0);
    let big: Vec<Vec<Vec<usize>>> = (0..overlap.class_count())
        .filter(|&l| overlap.class_size(l) == 3)
        .map(|l| overlap.class_configs(l))
        .collect();
    let expected = vec![vec![0, 1, 0], vec![0, 1, 1], vec![1, 1, 0]];
    let ok = spy.total_dag == 11
        && spy.total_ldag == 9
        && wildcard.class_count() == 5
        && overlap.class_count() == 6
        && big == vec![expected];
    verdict(
        1,
        "parameter counts",
        ok,
        &format!(
            "guard dims {}/{}, wildcard classes {}, overlap classes {} with size-3 class {:?}",
            spy.total_dag,
            spy.total_ldag,
            wildcard.class_count(),
            overlap.class_count(),
            big
        ),
    );
}

#[test]
fn criterion_02_maximality_witness() {
    let ldag = catalog::non_maximal_local();
    let (maximal, witnesses) = is_maximal(&ldag);
    let closed = make_maximal(&ldag);
    let k = build_partition(&closed, 0).class_count();
    let found = witnesses.iter().any(|w| w.edge == (1, 0) && w.config == vec![1, 1]);
    verdict(
        2,
        "maximality witness",
        !maximal && found && k == 4 && is_maximal(&closed).0,
        &format!("maximal={maximal}, witnesses={witnesses:?}, classes after closure={k}"),
    );
}

#[test]
fn criterion_03_score_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_ml = 0.0f64;
    let mut worst_pred = 0.0f64;
    let mut ok = true;
    for _ in 0..200 {
        let d = rng.random_range(1..=4);
        let vars = common::random_vars(&mut rng, d, 3);
        let ldag = common::random_ldag(&mut rng, vars.clone(), 0.6, 0.3);
        let n = rng.random_range(0..=50);
        let data = common::random_dataset(&mut rng, &vars, n);
        let ess = [0.5, 1.0, 2.5][rng.random_range(0..3)];

        let ours = log_marginal_likelihood(&data, &ldag, ess).unwrap().total;
        let oracle = common::prequential_log_ml(&data, &ldag, ess);
        worst_ml = worst_ml.max((ours - oracle).abs() / oracle.abs().max(1.0));
        ok &= close(ours, oracle);

        let split = rng.random_range(0..=n);
        let rows: Vec<usize> = (0..n).collect();
        let train = data.select(&rows[..split]);
        let test = data.select(&rows[split..]);
        let predictive = log_posterior_predictive(&train, &test, &ldag, ess).unwrap();
        let ratio = ours - log_marginal_likelihood(&train, &ldag, ess).unwrap().total;
        worst_pred = worst_pred.max((predictive - ratio).abs() / ours.abs().max(1.0));
        ok &= close(predictive, ratio);
    }
    verdict(
        3,
        "score oracles",
        ok,
        &format!("200 cases; worst relative gap: evidence {worst_ml:.2e}, predictive {worst_pred:.2e}"),
    );
}

// d-separation signature: the set of separated (a, b, S) triples.
fn dsep_signature(dag: &ldag::Dag) -> Vec<bool> {
    let d = dag.node_count();
    let mut sig = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let rest: Vec<usize> = (0..d).filter(|&n| n != a && n != b).collect();
            for mask in 0..1usize << rest.len() {
                let s: Vec<usize> = (0..rest.len()).filter(|k| mask >> k & 1 == 1).map(|k| rest[k]).collect();
                sig.push(common::moral_dsep(dag, &[a], &[b], &s));
            }
        }
    }
    sig
}

#[test]
fn criterion_04_dag_score_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let families: BTreeMap<usize, Vec<(ldag::Dag, Vec<bool>)>> = (1..=4)
        .map(|d| {
            let dags = common::all_dags(d);
            (d, dags.into_iter().map(|g| {
                let sig = dsep_signature(&g);
                (g, sig)
            }).collect())
        })
        .collect();
    let mut ok = true;
    let mut pairs = 0;
    for _ in 0..100 {
        let d = rng.random_range(2..=4);
        let vars = common::random_vars(&mut rng, d, 3);
        let n = rng.random_range(1..=200);
        let data = common::random_dataset(&mut rng, &vars, n);
        let all = &families[&d];
        let (g, sig) = &all[rng.random_range(0..all.len())];
        let ldag = Ldag::new(vars.clone(), g.clone()).unwrap();
        let ours = log_marginal_likelihood(&data, &ldag, 1.0).unwrap().total;
        ok &= close(ours, common::standard_dag_score(&data, &vars, g, 1.0));
        let equivalent: Vec<&ldag::Dag> = all.iter().filter(|(h, s)| s == sig && h != g).map(|(h, _)| h).collect();
        if !equivalent.is_empty() {
            let h = equivalent[rng.random_range(0..equivalent.len())];
            let other = log_marginal_likelihood(&data, &Ldag::new(vars.clone(), h.clone()).unwrap(), 1.0).unwrap().total;
            ok &= close(ours, other);
            pairs += 1;
        }
    }
    verdict(
        4,
        "label-free reduction",
        ok && pairs > 20,
        &format!("100 datasets match the textbook score; {pairs} Markov-equivalent pairs scored equally"),
    );
}

#[test]
fn criterion_05_separation_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut asserted = 0;
    let mut by_cases = 0;
    let mut violations = 0;
    for _ in 0..100 {
        let d = rng.random_range(3..=6);
        let vars = VariableTable::binary(d);
        let raw = common::random_ldag(&mut rng, vars.clone(), 0.5, 0.3);
        let ldag = regularize(&make_maximal(&raw));
        assert!(is_regular(&ldag).0 && is_maximal(&ldag).0);
        let cpds = random_cpds(&ldag, &mut rng);
        let joint = common::joint_table(&vars, |x| joint_probability(&cpds, x).unwrap());
        for _ in 0..20 {
            let mut nodes: Vec<usize> = (0..d).collect();
            rand::seq::SliceRandom::shuffle(nodes.as_mut_slice(), &mut rng);
            let a = vec![nodes[0]];
            let b = vec![nodes[1]];
            let mut s = Vec::new();
            let mut c = Vec::new();
            for &n in &nodes[2..] {
                match rng.random_range(0..3) {
                    0 => s.push(n),
                    1 => c.push(n),
                    _ => {}
                }
            }
            let ctx: Context = c.iter().map(|&n| (n, rng.random_range(0..2))).collect();
            let query = SeparationQuery::new(a.clone(), b.clone(), s.clone(), ctx.clone()).unwrap();
            if csi_separated(&ldag, &query).unwrap() {
                asserted += 1;
                let pinned: Vec<(usize, usize)> = ctx.iter().collect();
                if !common::independent_in_joint(&vars, &joint, &a, &b, &s, &pinned, INDEPENDENCE_TOL) {
                    violations += 1;
                }
            }
            if ci_by_cases(&ldag, &a, &b, &s, &c, DEFAULT_CONTEXT_BOUND).unwrap() {
                by_cases += 1;
                let given: Vec<usize> = s.iter().chain(&c).copied().collect();
                if !common::independent_in_joint(&vars, &joint, &a, &b, &given, &[], INDEPENDENCE_TOL) {
                    violations += 1;
                }
            }
        }
    }
    verdict(
        5,
        "separation soundness",
        violations == 0 && asserted > 100 && by_cases > 50,
        &format!("{asserted} CSI-separations and {by_cases} case-wise independences checked, {violations} violated"),
    );
}

#[test]
fn criterion_06_csi_equivalence() {
    let pair = csi_equivalent(&catalog::cases_collider(), &catalog::cases_chain(), DEFAULT_CONTEXT_BOUND).unwrap();
    let mut mismatches = 0;
    let mut compared = 0;
    for d in 1..=4 {
        let dags = common::all_dags(d);
        let sigs: Vec<Vec<bool>> = dags.iter().map(dsep_signature).collect();
        let models: Vec<Ldag> = dags.iter().map(|g| Ldag::new(VariableTable::binary(d), g.clone()).unwrap()).collect();
        for i in 0..dags.len() {
            for j in 0..dags.len() {
                compared += 1;
                let ours = csi_equivalent(&models[i], &models[j], DEFAULT_CONTEXT_BOUND).unwrap();
                if ours != (sigs[i] == sigs[j]) {
                    mismatches += 1;
                }
            }
        }
    }
    verdict(
        6,
        "CSI-equivalence",
        pair && mismatches == 0,
        &format!("case-split pair equivalent={pair}; {compared} label-free pairs, {mismatches} disagree with d-separation"),
    );
}

#[test]
fn criterion_07_small_kappa_is_label_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut labeled = 0;
    for k in 0..10 {
        let d = rng.random_range(4..=6);
        let vars = common::random_vars(&mut rng, d, 3);
        let truth = regularize(&make_maximal(&common::random_ldag(&mut rng, vars, 0.6, 0.5)));
        let cpds = random_cpds(&truth, &mut rng);
        let n = [200, 500, 1000, 2000, 4000][k % 5];
        let data = sample(&cpds, &truth, n, k as u64).unwrap();
        let cfg = SearchConfig {
            kappa: 0.001,
            seed: k as u64,
            ..SearchConfig::default()
        };
        if learn(&data, &cfg).unwrap().model.has_labels() {
            labeled += 1;
        }
    }
    verdict(7, "small kappa collapse", labeled == 0, &format!("{labeled} of 10 learned models carry labels"));
}

const SIZES: [usize; 6] = [250, 500, 1000, 2000, 4000, 8000];
const SEEDS: u64 = 10;

struct Experiment {
    kl_chosen: BTreeMap<usize, Vec<f64>>,
    kl_plain: BTreeMap<usize, Vec<f64>>,
    chosen: BTreeMap<usize, Vec<f64>>,
    recovered_at_largest: usize,
}

fn fitted_kl(truth: &CpdSet, data: &Dataset, kappa: f64, seed: u64) -> (f64, Ldag) {
    let cfg = SearchConfig {
        kappa,
        seed,
        ..SearchConfig::default()
    };
    let model = learn(data, &cfg).unwrap().model;
    let estimate = estimate_map_parameters(data, &model, cfg.ess).unwrap();
    (kl_divergence(truth, &estimate, DEFAULT_STATE_BOUND).unwrap(), model)
}

// Shared by criteria 8 and 9: CV-chosen and label-free fits on generator samples.
fn experiment() -> &'static Experiment {
    static CELL: OnceLock<Experiment> = OnceLock::new();
    CELL.get_or_init(|| {
        let truth = catalog::ten_node_generator();
        let cpds = random_cpds(&truth, &mut ChaCha8Rng::seed_from_u64(2024));
        let mut exp = Experiment {
            kl_chosen: BTreeMap::new(),
            kl_plain: BTreeMap::new(),
            chosen: BTreeMap::new(),
            recovered_at_largest: 0,
        };
        for seed in 0..SEEDS {
            for &n in &SIZES {
                let data = sample(&cpds, &truth, n, seed * 100_000 + n as u64).unwrap();
                let plan = CvPlan {
                    seed,
                    search: SearchConfig {
                        seed,
                        ..SearchConfig::default()
                    },
                    ..CvPlan::default()
                };
                let report = cross_validate(&data, &plan).unwrap();
                let kappa = report.chosen_kappa();
                let (kl, model) = fitted_kl(&cpds, &data, kappa, seed);
                exp.kl_chosen.entry(n).or_default().push(kl);
                exp.chosen.entry(n).or_default().push(kappa);
                if n <= 2000 {
                    let plain = if kappa == DEFAULT_KAPPAS[0] { kl } else { fitted_kl(&cpds, &data, DEFAULT_KAPPAS[0], seed).0 };
                    exp.kl_plain.entry(n).or_default().push(plain);
                }
                if n == *SIZES.last().unwrap() && ldag::separation::markov_equivalent(model.dag(), truth.dag()) {
                    exp.recovered_at_largest += 1;
                }
            }
        }
        exp
    })
}

#[test]
fn criterion_08_synthetic_recovery() {
    let exp = experiment();
    let medians: Vec<f64> = SIZES.iter().map(|n| common::median(&mut exp.kl_chosen[n].clone())).collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let recovered = exp.recovered_at_largest;
    let chosen: Vec<String> = SIZES.iter().map(|n| format!("{n}:{:?}", exp.chosen[n])).collect();
    println!("chosen kappa per size: {}", chosen.join(" "));
    verdict(
        8,
        "synthetic recovery",
        decreasing && recovered >= 7,
        &format!(
            "median KL by n {:?}; Markov-equivalent at n=8000 in {recovered}/{SEEDS}",
            medians.iter().map(|m| format!("{m:.5}")).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_09_labels_beat_plain_dags() {
    let exp = experiment();
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [500, 1000, 2000] {
        let cv = common::median(&mut exp.kl_chosen[&n].clone());
        let plain = common::median(&mut exp.kl_plain[&n].clone());
        ok &= cv <= plain;
        detail.push(format!("n={n}: cv {cv:.5} vs plain {plain:.5}"));
    }
    verdict(9, "LDAG vs DAG", ok, &detail.join("; "));
}

fn heart_path() -> Option<PathBuf> {
    let candidates = [
        std::env::var_os("LDAG_HEART_DATA").map(PathBuf::from),
        Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/heart.csv")),
    ];
    candidates.into_iter().flatten().find(|p| p.is_file())
}

#[test]
fn criterion_10_heart_disease() {
    let Some(path) = heart_path() else {
        println!("criterion 10 [heart data]: SKIPPED | dataset not found (set LDAG_HEART_DATA)");
        return;
    };
    let data = ldag::io::load_dataset(&path).unwrap();
    let best = (1..=5)
        .map(|seed| {
            let cfg = SearchConfig {
                kappa: 0.3,
                seed,
                ..SearchConfig::default()
            };
            learn(&data, &cfg).unwrap().report.total()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let report = cross_validate(&data, &CvPlan::default()).unwrap();
    verdict(
        10,
        "heart data",
        data.len() == 1841 && best >= HEART_SCORE_FLOOR && report.chosen_kappa() == 0.3,
        &format!(
            "best log score at kappa 0.3 {best:.2}; rho {:?}; chosen kappa {}",
            report.rho.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>(),
            report.chosen_kappa()
        ),
    );
}

#[test]
fn criterion_11_mcmc_mechanics() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 10_000;
    let accepted = (0..trials).filter(|_| metropolis_accept(0.5f64.ln(), &mut rng)).count();
    let rate = accepted as f64 / trials as f64;

    let truth = catalog::guard_badge(true);
    let cpds = random_cpds(&truth, &mut ChaCha8Rng::seed_from_u64(1));
    let data = sample(&cpds, &truth, 300, 2).unwrap();
    let cfg = SearchConfig {
        chains: 8,
        iterations: 200,
        seed: 99,
        ..SearchConfig::default()
    };
    let first = learn(&data, &cfg).unwrap();
    let second = learn(&data, &cfg).unwrap();
    let monotone = first.traces.iter().all(|t| t.best.windows(2).all(|w| w[1] >= w[0]));
    let identical = first.model == second.model
        && first.report.total().to_bits() == second.report.total().to_bits()
        && first.traces == second.traces;
    verdict(
        11,
        "MCMC mechanics",
        (rate - 0.5).abs() <= ACCEPT_TOL && monotone && identical,
        &format!("acceptance rate {rate:.4}; best traces monotone={monotone}; reruns identical={identical}"),
    );
}
