use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bardina::cli::{cmd_compare_nse, cmd_run, cmd_verify};
use bardina::verify::Suite;

#[derive(Parser)]
#[command(name = "bardina", version, about = "Horizontally filtered Bardina model on a channel")]
struct Cli {
    /// Allow gamma above 2/3 (sharpness experiments).
    #[arg(long, global = true)]
    override_gamma: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration, writing the time series and snapshots.
    Run { config: PathBuf },
    /// Run a property suite at the configured resolution.
    Verify {
        config: PathBuf,
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
    },
    /// Compare filtered runs against the unfiltered model.
    CompareNse {
        config: PathBuf,
        /// Descending, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.4, 0.2, 0.1, 0.05])]
        alphas: Vec<f64>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: bardina::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config } => cmd_run(&config, cli.override_gamma).map(|s| {
            println!(
                "wrote {} rows and {} snapshots to {}",
                s.rows,
                s.snapshots.len(),
                s.output_dir.display()
            );
            println!("E(0) = {:.16e}  E(T) = {:.16e}", s.initial_energy, s.final_energy);
            true
        }),
        Command::Verify { config, suite } => cmd_verify(&config, suite, cli.override_gamma).map(|r| {
            println!("{r}");
            r.passed()
        }),
        Command::CompareNse { config, alphas } => cmd_compare_nse(&config, &alphas).map(|s| {
            println!("{}", s.table());
            true
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
