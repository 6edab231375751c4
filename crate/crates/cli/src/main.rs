use clap::Parser;
use colorbin_cli::{args::Cli, commands, exit};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            std::process::exit(if err.use_stderr() { exit::BAD_INPUT } else { exit::OK });
        }
    };
    if let Err(err) = commands::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit::code_for(&err));
    }
}
