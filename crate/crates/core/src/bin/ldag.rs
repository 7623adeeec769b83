use std::process::ExitCode;

fn main() -> ExitCode {
    ldag::cli::main_with_args(std::env::args().collect())
}
