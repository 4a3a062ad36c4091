use clap::Parser;

use parity_bench::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
