//! Run an experiment config through the harness, as the command-line tool does.
//!
//! `cargo run --release --example run_config -- configs/wronskian.toml`

use local_malliavin::harness::{self, ExperimentConfig, OutputFormat};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "crates/core/configs/product_formula.toml".into());
    let config = match ExperimentConfig::load(path.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    match harness::run(&config) {
        Ok(report) => {
            println!("{}", String::from_utf8_lossy(&report.render(OutputFormat::Csv)));
            println!("pass = {} in {:.2}s", report.pass, report.wall_clock_seconds);
            std::process::exit(report.exit_code());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    }
}
