use blowup_forge::cli::{main_with, Cli};
use clap::Parser;

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
