use clap::Parser;

use bargain_mpe::cli::{configure_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    configure_threads();
    if let Err(e) = run(&cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code);
    }
}
