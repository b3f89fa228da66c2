use clap::Parser;
use hoeffding::cli::{run, RunConfig};

fn main() {
    std::process::exit(run(&RunConfig::parse()));
}
