//! Model text format, dataset CSV and Graphviz export.

use ldag::catalog;
use ldag::io::{format_dataset, parse_dataset, parse_model, serialize_model, to_dot};
use ldag::probability::{random_cpds, sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ldag::Result<()> {
    let model = catalog::guard_badge(true);
    let cpds = random_cpds(&model, &mut ChaCha8Rng::seed_from_u64(3));
    let text = serialize_model(&model, Some(&cpds));
    print!("{text}");
    let back = parse_model(&text)?;
    println!("round trip identical: {}", back.ldag == model && back.cpds.as_ref() == Some(&cpds));

    let data = sample(&cpds, &model, 5, 4)?;
    let csv = format_dataset(&data);
    print!("{csv}");
    println!("dataset round trip identical: {}", parse_dataset(&csv)? == data);

    // wildcards expand on load
    let wild = parse_model("ldag v1\nvar a 2\nvar b 3\nvar c 2\nedge a c\nedge b c\nlabel a c : (*)\n")?;
    println!("expanded label: {:?}", wild.ldag.label(0, 2).map(|l| l.configs().collect::<Vec<_>>()));
    print!("{}", to_dot(&model));
    Ok(())
}
