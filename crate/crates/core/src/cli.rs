//! Command-line front end behind the `ldag` binary.
//!
//! Every subcommand that writes a file also writes `<file>.manifest` next to
//! it (or to `--manifest`). Failures print one line
//! `error: code=<CODE> message="<text>"` on stderr and exit nonzero.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::graph::Ldag;
use crate::io::{
    file_digest, format_dataset, load_dataset, load_model, manifest_path_for, read_text, serialize_model, to_dot,
    write_text, RunManifest,
};
use crate::partition::{is_maximal, is_regular, make_maximal, regularize};
use crate::probability::{estimate_map_parameters, kl_divergence, random_cpds, sample, DEFAULT_STATE_BOUND};
use crate::scoring::{log_score_with, PriorMode, ScoreReport};
use crate::search::{learn, SearchConfig};
use crate::selection::{cross_validate, CvPlan};
use crate::separation::{csi_equivalent, markov_equivalent, DEFAULT_CONTEXT_BOUND};

#[derive(Debug, Parser)]
#[command(name = "ldag", version, about = "Labeled DAG structure learning and analysis")]
struct Cli {
    /// Manifest path (defaults to `<out>.manifest` for commands writing a file).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn a model from data.
    Learn(LearnArgs),
    /// Choose kappa by cross-validation.
    Cv(CvArgs),
    /// Score a model on data.
    Score(ScoreArgs),
    /// Report maximality and regularity; `--fix` closes and regularizes.
    Check(CheckArgs),
    /// Test CSI-equivalence of two models.
    Equiv(EquivArgs),
    /// Draw a dataset from a model.
    Sample(SampleArgs),
    /// KL divergence between two parameterized models.
    Kl(KlArgs),
    /// Graphviz rendering of a model.
    ExportDot(DotArgs),
    /// Rerun the command recorded in a manifest and compare outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 1.0)]
    ess: f64,
    #[arg(long, default_value_t = 50)]
    chains: usize,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_parents: Option<usize>,
    /// Structure prior: `csi` or `param-penalty`.
    #[arg(long, default_value = "csi")]
    prior: PriorMode,
    /// Search plain DAGs without labels.
    #[arg(long)]
    no_labels: bool,
}

impl SearchArgs {
    fn config(&self, kappa: f64) -> SearchConfig {
        SearchConfig {
            kappa,
            ess: self.ess,
            chains: self.chains,
            iterations: self.iters,
            seed: self.seed,
            initial: None,
            max_parents: self.max_parents,
            optimize_labels: !self.no_labels,
            prior: self.prior,
        }
    }
}

#[derive(Debug, Args)]
struct LearnArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    kappa: f64,
    #[command(flatten)]
    search: SearchArgs,
    /// Model file to write (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.001, 0.1, 0.3, 0.5])]
    kappas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[command(flatten)]
    search: SearchArgs,
    /// Report file to write (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the model learned on all data with the chosen kappa.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    ess: f64,
    #[arg(long, default_value = "csi")]
    prior: PriorMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    fix: bool,
    /// Where the fixed model goes (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EquivArgs {
    #[arg(long)]
    model_a: PathBuf,
    #[arg(long)]
    model_b: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw flat-Dirichlet parameters when the model file has none.
    #[arg(long)]
    random_params: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KlArgs {
    #[arg(long)]
    model_true: PathBuf,
    #[arg(long)]
    model_est: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DotArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long = "from")]
    from: PathBuf,
}

// What a subcommand produced, for output and manifest writing.
struct Produced {
    text: String,
    out: Option<PathBuf>,
    extra_outputs: Vec<PathBuf>,
    inputs: Vec<PathBuf>,
    seed: Option<u64>,
    best_score: Option<f64>,
}

impl Produced {
    fn new(text: String, out: Option<PathBuf>, inputs: Vec<PathBuf>) -> Self {
        Self {
            text,
            out,
            extra_outputs: Vec::new(),
            inputs,
            seed: None,
            best_score: None,
        }
    }
}

/// Entry point used by the binary: parses `argv` (including the program name),
/// runs, and maps failures to an exit code.
pub fn main_with_args(argv: Vec<String>) -> ExitCode {
    let stdout = std::io::stdout();
    match run(&argv, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(e)) => {
            let _ = e.print();
            if e.use_stderr() {
                let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
                eprintln!("error: code=E_USAGE message={first:?}");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(RunError::Domain(e)) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(1)
        }
    }
}

/// The machine-readable failure line.
pub fn error_line(e: &Error) -> String {
    format!("error: code={} message={:?}", e.code(), e.to_string())
}

/// Failure of [`run`].
#[derive(Debug)]
pub enum RunError {
    /// Bad flags, or a help/version request.
    Usage(clap::Error),
    Domain(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Domain(e)
    }
}

/// Runs one command line, writing the report to `stdout`.
pub fn run(argv: &[String], stdout: &mut dyn Write) -> std::result::Result<(), RunError> {
    let cli = Cli::try_parse_from(argv).map_err(RunError::Usage)?;
    let started = Instant::now();
    let command_name = argv.get(1).cloned().unwrap_or_default();
    let produced = match &cli.command {
        Command::Learn(a) => cmd_learn(a)?,
        Command::Cv(a) => cmd_cv(a)?,
        Command::Score(a) => cmd_score(a)?,
        Command::Check(a) => cmd_check(a)?,
        Command::Equiv(a) => cmd_equiv(a)?,
        Command::Sample(a) => cmd_sample(a)?,
        Command::Kl(a) => cmd_kl(a)?,
        Command::ExportDot(a) => cmd_dot(a)?,
        Command::Replay(a) => {
            let text = cmd_replay(&a.from)?;
            stdout.write_all(text.as_bytes()).map_err(Error::from)?;
            return Ok(());
        }
    };
    let mut outputs = produced.extra_outputs.clone();
    match &produced.out {
        Some(path) => {
            write_text(path, &produced.text)?;
            outputs.insert(0, path.clone());
        }
        None => stdout.write_all(produced.text.as_bytes()).map_err(Error::from)?,
    }
    let manifest_path = cli.manifest.clone().or_else(|| produced.out.as_deref().map(manifest_path_for));
    if let Some(path) = manifest_path {
        let manifest = RunManifest {
            command: command_name,
            args: argv[1..].to_vec(),
            seed: produced.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: digests(&produced.inputs)?,
            outputs: digests(&outputs)?,
            wall_clock_ms: started.elapsed().as_millis(),
            best_score: produced.best_score,
        };
        write_text(&path, &manifest.to_text())?;
    }
    Ok(())
}

fn digests(paths: &[PathBuf]) -> Result<Vec<(PathBuf, String)>> {
    paths.iter().map(|p| Ok((p.clone(), file_digest(p)?))).collect()
}

fn score_summary(report: &ScoreReport, ldag: &Ldag) -> String {
    let vars = ldag.vars();
    let mut s = String::new();
    s.push_str("node\tlog_ml\tlog_prior\tdim_dag\tdim_ldag\n");
    for j in 0..ldag.node_count() {
        s.push_str(&format!(
            "{}\t{:.4}\t{:.4}\t{}\t{}\n",
            vars.name(j),
            report.log_ml.per_node[j],
            report.log_prior.per_node[j],
            report.dims.per_node_dag[j],
            report.dims.per_node_ldag[j]
        ));
    }
    s.push_str(&format!(
        "total\t{:.4}\t{:.4}\t{}\t{}\n",
        report.log_ml.total, report.log_prior.total, report.dims.total_dag, report.dims.total_ldag
    ));
    s.push_str(&format!("log_score\t{:.4}\n", report.total()));
    s
}

fn cmd_learn(a: &LearnArgs) -> Result<Produced> {
    let data = load_dataset(&a.data)?;
    let cfg = a.search.config(a.kappa);
    let result = learn(&data, &cfg)?;
    let cpds = estimate_map_parameters(&data, &result.model, cfg.ess)?;
    let model_text = serialize_model(&result.model, Some(&cpds));
    let summary = format!(
        "# kappa {} edges {} labels {}\n{}",
        a.kappa,
        result.model.dag().edge_count(),
        result.model.labels().len(),
        score_summary(&result.report, &result.model)
    );
    let (text, out) = match &a.out {
        Some(path) => {
            eprint!("{summary}");
            (model_text, Some(path.clone()))
        }
        None => (format!("{model_text}{}", comment_lines(&summary)), None),
    };
    let mut produced = Produced::new(text, out, vec![a.data.clone()]);
    produced.seed = Some(a.search.seed);
    produced.best_score = Some(result.report.total());
    Ok(produced)
}

fn comment_lines(text: &str) -> String {
    text.lines()
        .map(|l| if l.starts_with('#') { format!("{l}\n") } else { format!("# {l}\n") })
        .collect()
}

fn cmd_cv(a: &CvArgs) -> Result<Produced> {
    let data = load_dataset(&a.data)?;
    let plan = CvPlan {
        folds: a.folds,
        kappas: a.kappas.clone(),
        seed: a.search.seed,
        search: a.search.config(a.kappas.first().copied().unwrap_or(1.0)),
    };
    let report = cross_validate(&data, &plan)?;
    let mut text = String::from("kappa\tlog_score\tedges\tdim_dag\tdim_ldag\trho_pred\tchosen\n");
    let mut chosen_model = None;
    let mut chosen_score = None;
    for (k, &kappa) in report.kappas.iter().enumerate() {
        let full = learn(&data, &a.search.config(kappa))?;
        text.push_str(&format!(
            "{kappa}\t{:.2}\t{}\t{}\t{}\t{:.2}\t{}\n",
            full.report.total(),
            full.model.dag().edge_count(),
            full.report.dims.total_dag,
            full.report.dims.total_ldag,
            report.rho[k],
            if k == report.chosen { "*" } else { "" }
        ));
        if k == report.chosen {
            chosen_score = Some(full.report.total());
            chosen_model = Some(full.model);
        }
    }
    text.push_str(&format!("chosen_kappa\t{}\n", report.chosen_kappa()));
    let mut produced = Produced::new(text, a.out.clone(), vec![a.data.clone()]);
    if let (Some(path), Some(model)) = (&a.model_out, &chosen_model) {
        let cpds = estimate_map_parameters(&data, model, a.search.ess)?;
        write_text(path, &serialize_model(model, Some(&cpds)))?;
        produced.extra_outputs.push(path.clone());
    }
    produced.seed = Some(a.search.seed);
    produced.best_score = chosen_score;
    Ok(produced)
}

fn cmd_score(a: &ScoreArgs) -> Result<Produced> {
    let data = load_dataset(&a.data)?;
    let model = load_model(&a.model)?;
    let report = log_score_with(&data, &model.ldag, a.kappa, a.ess, a.prior)?;
    let mut produced = Produced::new(score_summary(&report, &model.ldag), a.out.clone(), vec![a.data.clone(), a.model.clone()]);
    produced.best_score = Some(report.total());
    Ok(produced)
}

fn tuple(values: &[usize]) -> String {
    let items: Vec<String> = values.iter().map(usize::to_string).collect();
    format!("({})", items.join(","))
}

fn cmd_check(a: &CheckArgs) -> Result<Produced> {
    let model = load_model(&a.model)?;
    let ldag = &model.ldag;
    let vars = ldag.vars();
    let mut text = String::new();
    let (maximal, witnesses) = is_maximal(ldag);
    if maximal {
        text.push_str("MAXIMAL\n");
    } else {
        for w in &witnesses {
            text.push_str(&format!(
                "NOT MAXIMAL; witness edge ({},{}) config {}\n",
                vars.name(w.edge.0),
                vars.name(w.edge.1),
                tuple(&w.config)
            ));
        }
    }
    let (regular, vacuous) = is_regular(ldag);
    if regular {
        text.push_str("REGULAR\n");
    } else {
        for (i, j) in &vacuous {
            text.push_str(&format!("NOT REGULAR; full label on edge ({},{})\n", vars.name(*i), vars.name(*j)));
        }
    }
    let mut out = a.out.clone();
    if a.fix {
        let fixed = regularize(&make_maximal(ldag));
        let dropped = fixed.dag().edge_count() < ldag.dag().edge_count();
        // parameters no longer match once classes change
        let keep = model.cpds.as_ref().filter(|_| fixed == *ldag);
        let body = serialize_model(&fixed, keep);
        if out.is_some() {
            text = body;
        } else {
            text.push_str(&format!("# fixed model{}\n", if dropped { " (vacuous edges removed)" } else { "" }));
            text.push_str(&body);
        }
    } else {
        out = None;
    }
    Ok(Produced::new(text, out, vec![a.model.clone()]))
}

fn check_canonical(ldag: &Ldag, path: &Path) -> Result<()> {
    if !is_maximal(ldag).0 || !is_regular(ldag).0 {
        return Err(Error::InvariantViolation(format!(
            "{} is not regular and maximal; run `check --fix` first",
            path.display()
        )));
    }
    Ok(())
}

fn cmd_equiv(a: &EquivArgs) -> Result<Produced> {
    let m1 = load_model(&a.model_a)?;
    let m2 = load_model(&a.model_b)?;
    check_canonical(&m1.ldag, &a.model_a)?;
    check_canonical(&m2.ldag, &a.model_b)?;
    let csi = csi_equivalent(&m1.ldag, &m2.ldag, DEFAULT_CONTEXT_BOUND)?;
    let markov = markov_equivalent(m1.ldag.dag(), m2.ldag.dag());
    let text = format!(
        "{}\nunderlying DAGs {}\n",
        if csi { "CSI-EQUIVALENT" } else { "NOT CSI-EQUIVALENT" },
        if markov { "Markov equivalent" } else { "not Markov equivalent" }
    );
    Ok(Produced::new(text, a.out.clone(), vec![a.model_a.clone(), a.model_b.clone()]))
}

fn cmd_sample(a: &SampleArgs) -> Result<Produced> {
    use rand::SeedableRng;
    let model = load_model(&a.model)?;
    let cpds = match (model.cpds, a.random_params) {
        (Some(c), _) => c,
        (None, true) => random_cpds(&model.ldag, &mut rand_chacha::ChaCha8Rng::seed_from_u64(a.seed)),
        (None, false) => {
            return Err(Error::InvalidConfig(
                "model has no param lines; pass --random-params to draw them".into(),
            ))
        }
    };
    let data = sample(&cpds, &model.ldag, a.n, a.seed)?;
    let mut produced = Produced::new(format_dataset(&data), a.out.clone(), vec![a.model.clone()]);
    produced.seed = Some(a.seed);
    Ok(produced)
}

fn cmd_kl(a: &KlArgs) -> Result<Produced> {
    let p = load_model(&a.model_true)?;
    let q = load_model(&a.model_est)?;
    let missing = |path: &Path| Error::InvalidConfig(format!("{} has no param lines", path.display()));
    let p_cpds = p.cpds.ok_or_else(|| missing(&a.model_true))?;
    let q_cpds = q.cpds.ok_or_else(|| missing(&a.model_est))?;
    let kl = kl_divergence(&p_cpds, &q_cpds, DEFAULT_STATE_BOUND)?;
    Ok(Produced::new(format!("{kl}\n"), a.out.clone(), vec![a.model_true.clone(), a.model_est.clone()]))
}

fn cmd_dot(a: &DotArgs) -> Result<Produced> {
    let model = load_model(&a.model)?;
    Ok(Produced::new(to_dot(&model.ldag), a.out.clone(), vec![a.model.clone()]))
}

fn cmd_replay(path: &Path) -> Result<String> {
    let manifest = RunManifest::parse(&read_text(path)?)?;
    if manifest.command == "replay" {
        return Err(Error::InvalidConfig("cannot replay a replay".into()));
    }
    for (input, digest) in &manifest.inputs {
        if file_digest(input)? != *digest {
            return Err(Error::InvariantViolation(format!("input {} changed since the run", input.display())));
        }
    }
    let mut argv = vec!["ldag".to_string()];
    argv.extend(manifest.args.iter().cloned());
    let mut sink = Vec::new();
    run(&argv, &mut sink).map_err(|e| match e {
        RunError::Usage(u) => Error::InvalidConfig(u.to_string()),
        RunError::Domain(d) => d,
    })?;
    let mut report = String::new();
    for (output, digest) in &manifest.outputs {
        if file_digest(output)? != *digest {
            return Err(Error::InvariantViolation(format!("output {} differs on replay", output.display())));
        }
        report.push_str(&format!("identical\t{}\n", output.display()));
    }
    if manifest.outputs.is_empty() {
        report.push_str("replayed; the run wrote no files to compare\n");
    }
    Ok(report)
}
