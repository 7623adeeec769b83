//! Model, dataset and manifest files survive a write and a read.

mod common;

use std::path::PathBuf;

use common::{random_dataset, random_ldag, random_vars};
use ldag::io::{
    file_digest, load_dataset, load_model, parse_dataset, parse_model, save_dataset, save_model, serialize_model,
    sha256_hex, to_dot, RunManifest,
};
use ldag::probability::random_cpds;
use ldag::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn models_round_trip_with_parameters(seed in any::<u64>(), label_p in 0.0f64..0.7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = random_vars(&mut rng, 5, 3);
        let ldag = random_ldag(&mut rng, vars, 0.5, label_p);
        let cpds = random_cpds(&ldag, &mut rng);
        let back = parse_model(&serialize_model(&ldag, Some(&cpds))).unwrap();
        prop_assert_eq!(&back.ldag, &ldag);
        prop_assert_eq!(back.cpds.as_ref(), Some(&cpds));
        let bare = parse_model(&serialize_model(&ldag, None)).unwrap();
        prop_assert!(bare.cpds.is_none());
    }

    #[test]
    fn datasets_round_trip(seed in any::<u64>(), n in 0usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = random_vars(&mut rng, 4, 4);
        let data = random_dataset(&mut rng, &vars, n);
        prop_assert_eq!(parse_dataset(&ldag::io::format_dataset(&data)).unwrap(), data);
    }
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let vars = random_vars(&mut rng, 4, 3);
    let ldag = random_ldag(&mut rng, vars.clone(), 0.6, 0.4);
    let cpds = random_cpds(&ldag, &mut rng);
    let model_path = dir.path().join("m.ldag");
    save_model(&model_path, &ldag, Some(&cpds)).unwrap();
    assert_eq!(load_model(&model_path).unwrap().ldag, ldag);

    let data = random_dataset(&mut rng, &vars, 25);
    let data_path = dir.path().join("d.csv");
    save_dataset(&data_path, &data).unwrap();
    assert_eq!(load_dataset(&data_path).unwrap(), data);
    let text = std::fs::read(&data_path).unwrap();
    assert_eq!(file_digest(&data_path).unwrap(), sha256_hex(&text));
}

#[test]
fn plain_csv_infers_cardinalities() {
    let data = parse_dataset("a,b,c\n0,2,0\n1,0,0\n").unwrap();
    assert_eq!(data.vars().cardinalities(), &[2, 3, 2]);
}

#[test]
fn bad_input_reports_a_location() {
    assert!(matches!(
        parse_dataset("# var a 2\na\n0\n3\n"),
        Err(Error::ValueOutOfRange { row: 4, value: 3, .. })
    ));
    match parse_dataset("a,b\n0,1\n1,x\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        parse_model("ldag v1\nvar a 2\nvar b 2\nedge a b\nedge b a\n"),
        Err(Error::InvariantViolation(_))
    ));
    assert!(matches!(
        parse_model("ldag v1\nvar a 2\nvar b 2\nvar c 2\nedge a c\nlabel b c : (0)\n"),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn dot_lists_every_edge_and_label() {
    let ldag = ldag::catalog::guard_badge(true);
    let dot = to_dot(&ldag);
    assert_eq!(dot.matches("->").count(), ldag.dag().edge_count());
    assert!(dot.contains("label="));
}

#[test]
fn manifests_round_trip() {
    let manifest = RunManifest {
        command: "learn".into(),
        args: vec!["learn".into(), "--data".into(), "x y.csv".into()],
        seed: Some(3),
        version: "0.1.0".into(),
        inputs: vec![(PathBuf::from("x y.csv"), sha256_hex(b"abc"))],
        outputs: vec![(PathBuf::from("out.ldag"), sha256_hex(b""))],
        wall_clock_ms: 12,
        best_score: Some(-123.25),
    };
    assert_eq!(RunManifest::parse(&manifest.to_text()).unwrap(), manifest);
}
