//! Text formats: CSV datasets, the `ldag v1` model format, DOT export and
//! run manifests.
//!
//! Datasets are comma-separated integer codes under a header row of variable
//! names. Optional leading lines `# var <name> <cardinality>` declare
//! cardinalities; undeclared columns get `max + 1` (at least 2).
//!
//! A model file looks like
//!
//! ```text
//! ldag v1
//! var person 3
//! var gender 2
//! var badge 2
//! edge person gender
//! edge person badge
//! edge gender badge
//! label gender badge : (2) (1)
//! param badge (0,0) : 0.5 0.5
//! ```
//!
//! Label tuples list the other parents of the child in ascending node order;
//! `*` stands for every value. A `param` line gives the distribution of one
//! partition class, named by its smallest parent configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{Dag, Edge, Label, Ldag, NodeId, VariableTable};
use crate::partition::build_partition;
use crate::probability::CpdSet;
use crate::scoring::Dataset;

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&read_text(path)?)
}

pub fn save_dataset(path: &Path, data: &Dataset) -> Result<()> {
    write_text(path, &format_dataset(data))
}

/// Parses CSV text with an optional schema preamble.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut declared: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut header: Option<(usize, Vec<String>)> = None;
    let mut rows: Vec<(usize, Vec<usize>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let words: Vec<&str> = comment.split_whitespace().collect();
            if words.first() == Some(&"var") {
                if header.is_some() {
                    return Err(parse_err(line_no, 1, "schema lines must precede the header"));
                }
                if words.len() != 3 {
                    return Err(parse_err(line_no, 1, "expected `# var <name> <cardinality>`"));
                }
                let card = words[2]
                    .parse::<usize>()
                    .map_err(|_| parse_err(line_no, 1, format!("bad cardinality {:?}", words[2])))?;
                declared.insert(words[1].to_string(), (card, line_no));
            }
            continue;
        }
        let cells: Vec<&str> = raw.split(',').collect();
        match &header {
            None => {
                header = Some((line_no, cells.iter().map(|c| c.trim().to_string()).collect()));
            }
            Some((_, names)) => {
                if cells.len() != names.len() {
                    return Err(parse_err(
                        line_no,
                        1,
                        format!("{} cells, header has {}", cells.len(), names.len()),
                    ));
                }
                let mut row = Vec::with_capacity(cells.len());
                for (col, cell) in cells.iter().enumerate() {
                    let value = cell.trim().parse::<usize>().map_err(|_| {
                        parse_err(line_no, col + 1, format!("not a non-negative integer: {:?}", cell.trim()))
                    })?;
                    row.push(value);
                }
                rows.push((line_no, row));
            }
        }
    }
    let (header_line, names) = header.ok_or_else(|| parse_err(1, 1, "missing header row"))?;
    for (name, &(_, line)) in &declared {
        if !names.contains(name) {
            return Err(parse_err(line, 1, format!("schema names unknown column {name:?}")));
        }
    }
    let cards: Vec<usize> = names
        .iter()
        .enumerate()
        .map(|(col, name)| match declared.get(name) {
            Some(&(card, _)) => card,
            None => rows.iter().map(|(_, r)| r[col] + 1).max().unwrap_or(2).max(2),
        })
        .collect();
    let vars = VariableTable::new(names, cards).map_err(|e| parse_err(header_line, 1, e.to_string()))?;
    for (line, row) in &rows {
        for (col, &v) in row.iter().enumerate() {
            if v >= vars.cardinality(col) {
                return Err(Error::ValueOutOfRange {
                    row: *line,
                    column: col,
                    value: v,
                    cardinality: vars.cardinality(col),
                });
            }
        }
    }
    Dataset::new(vars, rows.into_iter().map(|(_, r)| r).collect())
}

/// CSV text with a full schema preamble, so cardinalities survive a round trip.
pub fn format_dataset(data: &Dataset) -> String {
    let vars = data.vars();
    let mut out = String::new();
    for (name, card) in vars.names().iter().zip(vars.cardinalities()) {
        let _ = writeln!(out, "# var {name} {card}");
    }
    out.push_str(&vars.names().join(","));
    out.push('\n');
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(usize::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// A model file's content.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub ldag: Ldag,
    pub cpds: Option<CpdSet>,
}

/// Options for [`parse_model_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    /// Reject labels that cover their whole domain.
    pub strict: bool,
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    parse_model(&read_text(path)?)
}

pub fn save_model(path: &Path, ldag: &Ldag, cpds: Option<&CpdSet>) -> Result<()> {
    write_text(path, &serialize_model(ldag, cpds))
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    parse_model_with(text, ParseOptions::default())
}

struct Pending {
    line: usize,
    column: usize,
    child: NodeId,
    other: NodeId,
    configs: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

pub fn parse_model_with(text: &str, options: ParseOptions) -> Result<ModelFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, "ldag v1")) => {}
        Some((n, _)) => return Err(parse_err(n, 1, "expected header `ldag v1`")),
        None => return Err(parse_err(1, 1, "empty model file")),
    }
    let mut names = Vec::new();
    let mut cards = Vec::new();
    let mut edges: Vec<(usize, Edge)> = Vec::new();
    let mut labels: Vec<Pending> = Vec::new();
    let mut params: Vec<Pending> = Vec::new();
    let mut index = BTreeMap::new();
    let lookup = |index: &BTreeMap<String, NodeId>, name: &str, line: usize, col: usize| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| parse_err(line, col, format!("undeclared variable {name:?}")))
    };

    for (n, line) in lines {
        let (head, tail) = match line.split_once(':') {
            Some((h, t)) => (h.trim(), Some((t, line.len() - t.len() + 1))),
            None => (line, None),
        };
        let words: Vec<&str> = head.split_whitespace().collect();
        match words.first().copied() {
            Some("var") => {
                if words.len() != 3 || tail.is_some() {
                    return Err(parse_err(n, 1, "expected `var <name> <cardinality>`"));
                }
                if !edges.is_empty() {
                    return Err(parse_err(n, 1, "variables must be declared before edges"));
                }
                let card = words[2]
                    .parse::<usize>()
                    .map_err(|_| parse_err(n, 1, format!("bad cardinality {:?}", words[2])))?;
                if index.insert(words[1].to_string(), names.len()).is_some() {
                    return Err(parse_err(n, 1, format!("duplicate variable {:?}", words[1])));
                }
                names.push(words[1].to_string());
                cards.push(card);
            }
            Some("edge") => {
                if words.len() != 3 || tail.is_some() {
                    return Err(parse_err(n, 1, "expected `edge <parent> <child>`"));
                }
                let from = lookup(&index, words[1], n, 6)?;
                let to = lookup(&index, words[2], n, 7 + words[1].len())?;
                edges.push((n, (from, to)));
            }
            Some("label") => {
                let (body, col) = tail.ok_or_else(|| parse_err(n, 1, "label needs `:`"))?;
                if words.len() != 3 {
                    return Err(parse_err(n, 1, "expected `label <parent> <child> : ...`"));
                }
                labels.push(Pending {
                    line: n,
                    column: col,
                    other: lookup(&index, words[1], n, 7)?,
                    child: lookup(&index, words[2], n, 8 + words[1].len())?,
                    configs: parse_tuples(body, n, col)?,
                    probs: Vec::new(),
                });
            }
            Some("param") => {
                let (body, col) = tail.ok_or_else(|| parse_err(n, 1, "param needs `:`"))?;
                if words.len() < 3 {
                    return Err(parse_err(n, 1, "expected `param <child> <config> : p...`"));
                }
                let config_text = words[2..].join("");
                let mut configs = parse_tuples(&config_text, n, 7 + words[1].len())?;
                if configs.len() != 1 {
                    return Err(parse_err(n, 1, "param needs exactly one parent configuration"));
                }
                let probs = body
                    .split_whitespace()
                    .map(|w| w.parse::<f64>().map_err(|_| parse_err(n, col, format!("bad probability {w:?}"))))
                    .collect::<Result<Vec<f64>>>()?;
                params.push(Pending {
                    line: n,
                    column: col,
                    child: lookup(&index, words[1], n, 7)?,
                    other: 0,
                    configs: vec![configs.remove(0)],
                    probs,
                });
            }
            _ => return Err(parse_err(n, 1, format!("unknown directive in {line:?}"))),
        }
    }

    let vars = VariableTable::new(names, cards).map_err(|e| Error::InvariantViolation(e.to_string()))?;
    let mut dag = Dag::empty(vars.len());
    for &(n, (from, to)) in &edges {
        if dag.has_edge(from, to) {
            return Err(parse_err(n, 1, "duplicate edge"));
        }
        dag.add_edge(from, to).map_err(|e| match e {
            Error::Cycle(_) => Error::InvariantViolation(e.to_string()),
            other => parse_err(n, 1, other.to_string()),
        })?;
    }
    let mut ldag = Ldag::new(vars, dag)?;
    for label in labels {
        if !ldag.dag().has_edge(label.other, label.child) {
            return Err(parse_err(label.line, 1, "label on an undeclared edge"));
        }
        let domain = ldag.label_domain(label.other, label.child);
        let mut expanded = Vec::new();
        for config in &label.configs {
            expand_wildcards(config, &domain, ldag.vars(), &mut expanded)
                .map_err(|m| parse_err(label.line, label.column, m))?;
        }
        ldag.set_label(label.other, label.child, expanded)
            .map_err(|e| parse_err(label.line, label.column, e.to_string()))?;
        if options.strict && ldag.label(label.other, label.child).is_some_and(Label::is_full) {
            return Err(Error::InvariantViolation(format!(
                "label on ({}, {}) covers its whole domain",
                ldag.vars().name(label.other),
                ldag.vars().name(label.child)
            )));
        }
    }
    let cpds = if params.is_empty() {
        None
    } else {
        Some(assemble_params(&ldag, params)?)
    };
    Ok(ModelFile { ldag, cpds })
}

fn assemble_params(ldag: &Ldag, params: Vec<Pending>) -> Result<CpdSet> {
    let partitions: Vec<_> = (0..ldag.node_count()).map(|j| build_partition(ldag, j)).collect();
    let mut theta: Vec<Vec<Option<Vec<f64>>>> =
        partitions.iter().map(|p| vec![None; p.class_count()]).collect();
    for p in params {
        let partition = &partitions[p.child];
        let config = &p.configs[0];
        if config.contains(&usize::MAX) {
            return Err(parse_err(p.line, 1, "wildcards are not allowed in param lines"));
        }
        let code = partition
            .radix
            .try_encode(config)
            .filter(|_| config.len() == partition.parents.len())
            .ok_or_else(|| Error::InvariantViolation(format!("line {}: bad parent configuration arity or value", p.line)))?;
        let class = partition.class_of(code);
        if partition.classes()[class][0] != code {
            return Err(parse_err(p.line, 1, "param configuration is not its class representative"));
        }
        if p.probs.len() != ldag.vars().cardinality(p.child) {
            return Err(Error::InvariantViolation(format!("line {}: wrong number of probabilities", p.line)));
        }
        if theta[p.child][class].replace(p.probs).is_some() {
            return Err(parse_err(p.line, p.column, "duplicate param line"));
        }
    }
    let mut full = Vec::with_capacity(theta.len());
    for (j, blocks) in theta.into_iter().enumerate() {
        let mut node = Vec::with_capacity(blocks.len());
        for (l, block) in blocks.into_iter().enumerate() {
            node.push(block.ok_or_else(|| {
                Error::InvariantViolation(format!("missing param for {} class {l}", ldag.vars().name(j)))
            })?);
        }
        full.push(node);
    }
    CpdSet::new(ldag, full).map_err(|e| Error::InvariantViolation(e.to_string()))
}

// Parses `(a,b) (c,*)`; `*` becomes usize::MAX.
fn parse_tuples(text: &str, line: usize, offset: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if c != '(' {
            return Err(parse_err(line, offset + i, format!("expected `(`, found {c:?}")));
        }
        let mut inner = String::new();
        let mut closed = false;
        for (_, c) in chars.by_ref() {
            if c == ')' {
                closed = true;
                break;
            }
            inner.push(c);
        }
        if !closed {
            return Err(parse_err(line, offset + i, "unclosed `(`"));
        }
        let mut tuple = Vec::new();
        if !inner.trim().is_empty() {
            for item in inner.split(',') {
                let item = item.trim();
                tuple.push(if item == "*" {
                    usize::MAX
                } else {
                    item.parse::<usize>()
                        .map_err(|_| parse_err(line, offset + i, format!("bad value {item:?}")))?
                });
            }
        }
        out.push(tuple);
    }
    Ok(out)
}

fn expand_wildcards(
    config: &[usize],
    domain: &[NodeId],
    vars: &VariableTable,
    out: &mut Vec<Vec<usize>>,
) -> std::result::Result<(), String> {
    if config.len() != domain.len() {
        return Err(format!(
            "tuple has {} values, the label domain has {}",
            config.len(),
            domain.len()
        ));
    }
    let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
    for (&v, &node) in config.iter().zip(domain) {
        let choices: Vec<usize> = if v == usize::MAX {
            (0..vars.cardinality(node)).collect()
        } else {
            vec![v]
        };
        partial = partial
            .into_iter()
            .flat_map(|p| {
                choices.iter().map(move |&c| {
                    let mut next = p.clone();
                    next.push(c);
                    next
                })
            })
            .collect();
    }
    out.extend(partial);
    Ok(())
}

fn tuple(values: &[usize]) -> String {
    let items: Vec<String> = values.iter().map(usize::to_string).collect();
    format!("({})", items.join(","))
}

/// Writes the `ldag v1` text of a model, with parameters when given.
pub fn serialize_model(ldag: &Ldag, cpds: Option<&CpdSet>) -> String {
    let vars = ldag.vars();
    let mut out = String::from("ldag v1\n");
    for (name, card) in vars.names().iter().zip(vars.cardinalities()) {
        let _ = writeln!(out, "var {name} {card}");
    }
    for (from, to) in ldag.dag().edges() {
        let _ = writeln!(out, "edge {} {}", vars.name(from), vars.name(to));
    }
    for (&(from, to), label) in ldag.labels() {
        let configs: Vec<String> = label.configs().map(|c| tuple(&c)).collect();
        let _ = writeln!(out, "label {} {} : {}", vars.name(from), vars.name(to), configs.join(" "));
    }
    if let Some(cpds) = cpds {
        for j in 0..ldag.node_count() {
            let partition = cpds.partition(j);
            for l in 0..partition.class_count() {
                let rep = partition.radix.decode(partition.classes()[l][0]);
                let probs: Vec<String> = cpds.theta(j, l).iter().map(|p| format!("{p}")).collect();
                let _ = writeln!(out, "param {} {} : {}", vars.name(j), tuple(&rep), probs.join(" "));
            }
        }
    }
    out
}

/// Graphviz text; labeled edges carry their configurations as the edge label.
pub fn to_dot(ldag: &Ldag) -> String {
    let vars = ldag.vars();
    let mut out = String::from("digraph ldag {\n");
    for name in vars.names() {
        let _ = writeln!(out, "  \"{name}\";");
    }
    for (from, to) in ldag.dag().edges() {
        let _ = write!(out, "  \"{}\" -> \"{}\"", vars.name(from), vars.name(to));
        if let Some(label) = ldag.label(from, to) {
            let domain: Vec<&str> = label.domain().iter().map(|&n| vars.name(n)).collect();
            let configs: Vec<String> = label.configs().map(|c| tuple(&c)).collect();
            let _ = write!(out, " [label=\"{}: {}\"]", domain.join(","), configs.join(" "));
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

/// Everything needed to rerun a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, verbatim.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub inputs: Vec<(PathBuf, String)>,
    pub outputs: Vec<(PathBuf, String)>,
    pub wall_clock_ms: u128,
    pub best_score: Option<f64>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::from("ldag-manifest v1\n");
        let _ = writeln!(out, "command = {}", self.command);
        for arg in &self.args {
            let _ = writeln!(out, "arg = {arg}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed = {seed}");
        }
        let _ = writeln!(out, "version = {}", self.version);
        for (path, digest) in &self.inputs {
            let _ = writeln!(out, "input = {digest} {}", path.display());
        }
        for (path, digest) in &self.outputs {
            let _ = writeln!(out, "output = {digest} {}", path.display());
        }
        let _ = writeln!(out, "wall_clock_ms = {}", self.wall_clock_ms);
        if let Some(score) = self.best_score {
            let _ = writeln!(out, "best_score = {score}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "ldag-manifest v1")) => {}
            _ => return Err(parse_err(1, 1, "expected header `ldag-manifest v1`")),
        }
        let mut m = RunManifest::default();
        for (i, line) in lines {
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| parse_err(n, 1, "expected `key = value`"))?;
            let digest_entry = |value: &str| -> Result<(PathBuf, String)> {
                let (digest, path) = value
                    .split_once(' ')
                    .ok_or_else(|| parse_err(n, key.len() + 4, "expected `<digest> <path>`"))?;
                Ok((PathBuf::from(path), digest.to_string()))
            };
            let number_err = |_| parse_err(n, key.len() + 4, format!("bad number {value:?}"));
            match key {
                "command" => m.command = value.to_string(),
                "arg" => m.args.push(value.to_string()),
                "seed" => m.seed = Some(value.parse().map_err(|_| parse_err(n, 8, "bad seed"))?),
                "version" => m.version = value.to_string(),
                "input" => m.inputs.push(digest_entry(value)?),
                "output" => m.outputs.push(digest_entry(value)?),
                "wall_clock_ms" => m.wall_clock_ms = value.parse().map_err(number_err)?,
                "best_score" => {
                    m.best_score = Some(value.parse().map_err(|_| parse_err(n, 14, "bad score"))?)
                }
                other => return Err(parse_err(n, 1, format!("unknown key {other:?}"))),
            }
        }
        Ok(m)
    }
}

/// Where the manifest of a run writing `output` goes.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}
