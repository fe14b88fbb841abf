use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kppfront_cli::{load_config, run, EXIT_CONFIG};

/// Free boundary Fisher-KPP runs from TOML configs.
#[derive(Parser)]
#[command(name = "kppfront", version)]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Execute a config and write its run directory.
    Run {
        config: PathBuf,
        /// Run directory, overriding the config and $KPPFRONT_OUTPUT_ROOT.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a config and print it with defaults filled in.
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.action {
        Action::Check { config } => match load_config(&config) {
            Ok(cfg) => {
                print!("{}", cfg.to_toml());
                0
            }
            Err(e) => {
                eprintln!("{e}");
                EXIT_CONFIG
            }
        },
        Action::Run { config, output } => {
            let cfg = load_config(&config).map(|mut c| {
                if output.is_some() {
                    c.output = output;
                }
                c
            });
            match cfg.map_err(Into::into).and_then(run) {
                Ok(report) => {
                    for (k, v) in &report.summary {
                        println!("{k}={v}");
                    }
                    println!("run_dir={}", report.dir.display());
                    report.status
                }
                Err(e) => {
                    eprintln!("{e}");
                    e.exit_code()
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
