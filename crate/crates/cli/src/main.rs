use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use roughmass_cli::{experiment_table, list_text, run_path};
use roughmass_core::corpus::manifest;

#[derive(Parser)]
#[command(
    name = "roughmass",
    version,
    about = "Run rough-metric experiments from TOML configs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory, overriding `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    machine: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run { config: PathBuf },
    /// List experiments, their config keys and thresholds.
    List,
    /// Print the corpus manifest.
    Corpus,
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match run_path(&config, cli.out.as_deref()) {
            Ok(rep) => {
                if cli.machine {
                    println!("{}", json(&rep));
                } else {
                    print!("{}", rep.human());
                }
                ExitCode::from(rep.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::List => {
            if cli.machine {
                println!("{}", json(&experiment_table()));
            } else {
                print!("{}", list_text());
            }
            ExitCode::SUCCESS
        }
        Command::Corpus => match manifest() {
            Ok(m) => {
                if cli.machine {
                    println!("{}", json(&m));
                } else {
                    #[derive(serde::Serialize)]
                    struct Manifest<T> {
                        entry: T,
                    }
                    print!("{}", toml::to_string(&Manifest { entry: m }).expect("serializable"));
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
