use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curvflow::config::{parse_config, RunConfig};
use curvflow::study::{
    compare_strategies, convergence_study, parse_levels, parse_strategies, run_scenario, write_convergence,
};
use curvflow::Error;

/// Evolve closed planar curves with tangential redistribution.
#[derive(Parser)]
#[command(name = "curvflow", version)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write one SVG frame per snapshot.
        #[arg(long)]
        svg: bool,
    },
    /// Convergence study against the scenario's exact observable.
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// Comma separated `n:tau` pairs, coarse to fine.
        #[arg(long)]
        levels: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the same scenario under several redistribution strategies.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "zero,rll,au")]
        strategies: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Io(_) | Error::Csv(_) => 1,
        Error::Parse { .. } => 3,
        Error::Validation { .. }
        | Error::NoExactSolution(_)
        | Error::TooFewNodes { .. }
        | Error::DegenerateSegment { .. }
        | Error::NonFinite { .. } => 4,
        _ => 5,
    }
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    let config = parse_config(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })?;
    log::info!("config:\n{}", config.echo());
    Ok(config)
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, out, svg } => {
            let config = load(&config)?;
            let (_, manifest) = run_scenario(&config, &out, svg)?;
            let last = &manifest.report.last;
            println!(
                "{}: {} steps, t = {}, L = {}, A = {}, ratio = {}",
                manifest.report.termination, manifest.report.steps, last.t, last.length, last.area, last.ratio
            );
        }
        Command::Converge { config, levels, out } => {
            let config = load(&config)?;
            let levels = parse_levels(&levels)?;
            let table = convergence_study(&config, &levels)?;
            write_convergence(&out, &table)?;
            println!("{:>6} {:>10} {:>12} {:>12}  {}", "n", "tau", "error", "eoc", table.observable);
            for r in &table.rows {
                let eoc = r.eoc.map_or("undefined".to_string(), |v| format!("{v:.3}"));
                println!("{:>6} {:>10.3e} {:>12.4e} {:>12}", r.n, r.tau, r.error, eoc);
            }
        }
        Command::Compare { config, strategies, out, svg } => {
            let config = load(&config)?;
            let strategies = parse_strategies(&strategies, &config.strategy, config.t_end)?;
            let cmp = compare_strategies(&config, &strategies, Some(&out), svg)?;
            for r in &cmp.runs {
                let max_ratio = r.metrics.iter().map(|m| m.ratio).fold(1.0, f64::max);
                println!(
                    "{:>5}: {}, t = {}, max ratio = {:.3}, final dispersion = {:.4}",
                    r.label, r.report.termination, r.report.last.t, max_ratio, r.report.last.dispersion
                );
            }
            for p in &cmp.pairs {
                println!("hausdorff({}, {}) = {:.3e}", p.a, p.b, p.hausdorff);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
