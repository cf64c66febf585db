use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ppt_bell::commands::{
    cmd_bound, cmd_curve, cmd_seesaw, cmd_table, cmd_verify, CurveArgs, Family, Format, Mode, SeesawArgs,
    TableArgs,
};
use ppt_bell_core::optimize::{SeesawConfig, SimplexConfig};

/// Bell violations of the I_d family by PPT entangled states.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact classical bound by enumerating deterministic strategies.
    Bound {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = Family::Id)]
        family: Family,
        /// Also write the functional as JSON.
        #[arg(long)]
        functional_out: Option<PathBuf>,
    },
    /// Optimized violation for each d in a range.
    Table {
        #[arg(long, default_value_t = 3)]
        d_min: usize,
        #[arg(long, default_value_t = 8)]
        d_max: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, env = "PPT_BELL_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for one parameter file per d; defaults to the directory of --out.
        #[arg(long)]
        params_dir: Option<PathBuf>,
    },
    /// Violation against log-spaced d.
    Curve {
        #[arg(long, default_value_t = 3)]
        d_min: usize,
        #[arg(long)]
        d_max: usize,
        #[arg(long, default_value_t = 2)]
        per_octave: usize,
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, env = "PPT_BELL_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a parameter, optimization-result or seesaw JSON file.
    Verify { file: PathBuf },
    /// Seesaw optimization over general PPT states and measurements.
    Seesaw {
        #[arg(long)]
        d: usize,
        /// Local dimension of the state, if smaller than d.
        #[arg(long)]
        state_dim: Option<usize>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_cycles: usize,
        #[arg(long, env = "PPT_BELL_SEED", default_value_t = 0)]
        seed: u64,
        /// Where to write the best state and measurements as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn simplex(restarts: usize, seed: u64) -> SimplexConfig {
    SimplexConfig {
        restarts,
        seed,
        ..SimplexConfig::default()
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
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Bound {
            d,
            family,
            functional_out,
        } => cmd_bound(*family, *d, functional_out.as_deref(), &mut out),
        Command::Table {
            d_min,
            d_max,
            restarts,
            seed,
            format,
            out: path,
            params_dir,
        } => cmd_table(
            &TableArgs {
                d_min: *d_min,
                d_max: *d_max,
                cfg: simplex(*restarts, *seed),
                format: *format,
                out: path.as_deref(),
                params_dir: params_dir.as_deref(),
            },
            &mut out,
        ),
        Command::Curve {
            d_min,
            d_max,
            per_octave,
            mode,
            restarts,
            seed,
            format,
            out: path,
        } => cmd_curve(
            &CurveArgs {
                d_min: *d_min,
                d_max: *d_max,
                per_octave: *per_octave,
                mode: *mode,
                cfg: simplex(*restarts, *seed),
                format: *format,
                out: path.as_deref(),
            },
            &mut out,
        ),
        Command::Verify { file } => cmd_verify(file, &mut out),
        Command::Seesaw {
            d,
            state_dim,
            restarts,
            max_cycles,
            seed,
            out: path,
        } => cmd_seesaw(
            &SeesawArgs {
                d: *d,
                state_dim: *state_dim,
                cfg: SeesawConfig {
                    restarts: *restarts,
                    max_cycles: *max_cycles,
                    seed: *seed,
                    ..SeesawConfig::default()
                },
                out: path.as_deref(),
            },
            &mut out,
        ),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
