//! Command-line harness: run single exploration episodes, benchmark
//! suites and ablations, and render SVG plots from suite outputs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 episode failure from
//! `run`, 1 other runtime errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dart::bench::{self, trajectory_csv, trajectory_file_name};
use dart::error::Error;
use dart::grid::OccupancyGrid;
use dart::plot::emit_plots;
use dart::scenario::{AblationConfig, Scenario, SuiteConfig};
use dart::sim::{run_episode, EpisodeConfig};
use dart::strategy::Strategy;

#[derive(Parser)]
#[command(name = "explore", about = "Dual-level topological exploration benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode from a scenario file and write its trajectory CSV.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a benchmark suite (maps x strategies x trials).
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the component ablation over the configured scenarios.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: ablation-out).
        #[arg(long, default_value = "ablation-out")]
        out: PathBuf,
    },
    /// Render SVG plots from a finished suite/ablation directory.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::MapFormat(_) | Error::InvalidArgument(_) | Error::Io { .. } => 2,
        _ => 1,
    }
}

fn print_report(report: &dart::bench::SuiteReport) {
    println!(
        "{:<14} {:<10} {:>7} {:>9} {:>12} {:>14}",
        "map", "strategy", "trials", "success", "time (s)", "distance (m)"
    );
    for row in &report.rows {
        let fmt = |m: Option<f64>, s: Option<f64>| match (m, s) {
            (Some(m), Some(s)) => format!("{m:.1} ± {s:.1}"),
            (Some(m), None) => format!("{m:.1}"),
            _ => "-".to_string(),
        };
        println!(
            "{:<14} {:<10} {:>7} {:>8.0}% {:>12} {:>14}",
            row.map,
            row.strategy,
            row.trials,
            row.success_rate() * 100.0,
            fmt(row.mean_time_s, row.std_time_s),
            fmt(row.mean_distance_m, row.std_distance_m),
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run { scenario, out } => {
            let scenario = Scenario::load(&scenario)?;
            let world = OccupancyGrid::load_map(&scenario.map_path)?;
            let strategy = Strategy::by_name(&scenario.strategy)
                .ok_or_else(|| Error::Config(format!("unknown strategy {}", scenario.strategy)))?;
            let config = EpisodeConfig {
                start: scenario.start,
                start_heading: scenario.start_heading,
                coverage_threshold: scenario.coverage_threshold,
                seed: scenario.seed,
                max_sim_time: scenario.max_time,
                record_control_rate: false,
                params: scenario.params.clone(),
            };
            let result = run_episode(&world, &strategy, &config)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| Error::io(format!("creating {}", out.display()), e))?;
            let file = out.join(trajectory_file_name(
                &scenario.name,
                strategy.name,
                scenario.seed,
            ));
            std::fs::write(&file, trajectory_csv(&result.trajectory))
                .map_err(|e| Error::io(format!("writing {}", file.display()), e))?;
            println!(
                "{}: {:?} coverage {:.1}% time {:.1} s distance {:.1} m -> {}",
                scenario.name,
                result.outcome,
                result.final_coverage * 100.0,
                result.time_s,
                result.distance_m,
                file.display()
            );
            Ok(if result.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Command::Suite { config, out } => {
            let config = SuiteConfig::load(&config)?;
            let (report, _) = bench::run_suite(&config, &out)?;
            print_report(&report);
            println!("artifacts in {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Ablate { config, out } => {
            let config = AblationConfig::load(&config)?;
            let (report, _) = bench::run_ablation(&config, &out)?;
            print_report(&report);
            println!("artifacts in {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { input } => {
            let written = emit_plots(&input)?;
            for p in &written {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
