use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use local_malliavin::harness::{self, ExperimentConfig};

/// Run declarative Malliavin-calculus experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment in a config file and write its report.
    Run {
        config: PathBuf,
        /// Print the report to stdout even when the config names an output file.
        #[arg(long)]
        stdout: bool,
    },
    /// Print the preset catalog as JSON.
    ListPresets,
    /// Check a config and its presets without running anything.
    Validate { config: PathBuf },
}

const CONFIG_ERROR: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListPresets => {
            println!("{}", serde_json::to_string_pretty(&harness::list_presets()).unwrap());
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match ExperimentConfig::load(&config).and_then(|c| harness::prepare(&c)) {
            Ok(p) => {
                print!("{}", p.config.to_toml());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("config error: {e}");
                ExitCode::from(CONFIG_ERROR)
            }
        },
        Command::Run { config, stdout } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            let report = match harness::run(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            let format = cfg.output.format;
            match cfg.output_path() {
                Some(path) if !stdout => {
                    if let Err(e) = report.write(&path, format) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return ExitCode::from(CONFIG_ERROR);
                    }
                    eprintln!("wrote {}", path.display());
                }
                _ => print!("{}", String::from_utf8_lossy(&report.render(format))),
            }
            for m in &report.metrics {
                eprintln!("{} {} = {:e} (threshold {:e})", if m.pass { "ok  " } else { "FAIL" }, m.name, m.value, m.threshold);
            }
            if let Some(f) = &report.failure {
                eprintln!("numeric failure: {f}");
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
