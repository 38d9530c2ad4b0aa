use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "noneq-spectra",
    version,
    about = "Frequency-domain optical signals of driven and nonequilibrium multilevel systems",
    after_help = "Scenario arguments accept a TOML file path or a bundled name \
                  (run with a bogus name to list them)."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one scenario and write a CSV table per signal component
    Run {
        /// Scenario file path or bundled scenario name
        scenario: String,
        /// Output directory for tables and plots
        #[arg(short = 'o', long = "output", default_value = ".")]
        output: PathBuf,
        /// Also write an SVG plot
        #[arg(long)]
        svg: bool,
        /// Worker threads (default: NONEQ_SPECTRA_THREADS, then all cores)
        #[arg(long)]
        threads: Option<usize>,
        /// Parse and validate only; write nothing
        #[arg(long)]
        dry_run: bool,
    },
    /// Rerun a scenario across one parameter axis and write 2D tables
    Sweep {
        /// Scenario file path or bundled scenario name
        scenario: String,
        /// Sweep axis: phi2, Omega or omega0 (default: the [sweep] block)
        #[arg(long)]
        axis: Option<String>,
        /// Lower end of the axis range
        #[arg(long)]
        min: Option<f64>,
        /// Upper end of the axis range
        #[arg(long)]
        max: Option<f64>,
        /// Number of axis values
        #[arg(long)]
        points: Option<usize>,
        /// Output directory for tables and plots
        #[arg(short = 'o', long = "output", default_value = ".")]
        output: PathBuf,
        /// Also write an SVG heatmap
        #[arg(long)]
        svg: bool,
        /// Worker threads (default: NONEQ_SPECTRA_THREADS, then all cores)
        #[arg(long)]
        threads: Option<usize>,
        /// Parse and validate only; write nothing
        #[arg(long)]
        dry_run: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Run {
            scenario,
            output,
            svg,
            threads,
            dry_run,
        } => noneq_cli::execute_run(scenario, output, *svg, *threads, *dry_run),
        Cmd::Sweep {
            scenario,
            axis,
            min,
            max,
            points,
            output,
            svg,
            threads,
            dry_run,
        } => noneq_cli::execute_sweep(
            scenario,
            axis.as_deref(),
            *min,
            *max,
            *points,
            output,
            *svg,
            *threads,
            *dry_run,
        ),
    };
    match result {
        Ok(paths) => {
            if paths.is_empty() {
                println!("scenario ok");
            }
            for path in paths {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
