use clap::{Parser, Subcommand};
use dh_core::commands::{self, LineOptions, McOptions, Outcome};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exact Duistermaat-Heckman densities and log-concavity checks.
#[derive(Parser)]
#[command(name = "dhkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the density of circle-action fixed-point data.
    S1Build {
        input: PathBuf,
        /// Write the canonical density here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slice a polygon along an integer direction such as "1,-1".
    Slice {
        polytope: PathBuf,
        #[arg(allow_hyphen_values = true)]
        direction: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Monte-Carlo check: <samples> <bins> <seed>.
        #[arg(long, num_args = 3, value_names = ["SAMPLES", "BINS", "SEED"])]
        mc: Option<Vec<u64>>,
        /// Histogram CSV for --mc.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Compare the toric slice with the fixed-point route.
    Crossval {
        polytope: PathBuf,
        #[arg(allow_hyphen_values = true)]
        direction: String,
    },
    /// Select a transversal rational line through an x-ray.
    XrayLine {
        xray: PathBuf,
        /// Endpoint as comma-separated "p/q" coordinates.
        #[arg(allow_hyphen_values = true)]
        x0: String,
        #[arg(allow_hyphen_values = true)]
        x1: String,
        #[arg(long, default_value = commands::DEFAULT_EPSILON, allow_hyphen_values = true)]
        epsilon: String,
        #[arg(long, default_value_t = commands::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = commands::DEFAULT_ATTEMPTS)]
        attempts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot a density file as SVG.
    Plot {
        density: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::S1Build { input, out } => commands::cmd_s1_build(&input, out.as_deref()),
        Command::Slice {
            polytope,
            direction,
            out,
            mc,
            histogram,
        } => {
            let mc = mc.map(|v| McOptions {
                samples: v[0] as usize,
                bins: v[1] as usize,
                seed: v[2],
            });
            commands::cmd_slice(&polytope, &direction, out.as_deref(), mc, histogram.as_deref())
        }
        Command::Crossval { polytope, direction } => commands::cmd_crossval(&polytope, &direction),
        Command::XrayLine {
            xray,
            x0,
            x1,
            epsilon,
            seed,
            attempts,
            out,
        } => {
            let opts = LineOptions {
                epsilon,
                seed,
                max_attempts: attempts,
            };
            commands::cmd_xray_line(&xray, &x0, &x1, &opts, out.as_deref())
        }
        Command::Plot { density, out } => commands::cmd_plot(&density, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = run(cli);
    if let Some(r) = &outcome.report {
        println!("{}", r.to_json());
    }
    if let Some(m) = &outcome.message {
        eprintln!("dhkit: {m}");
    }
    ExitCode::from(outcome.status as u8)
}
