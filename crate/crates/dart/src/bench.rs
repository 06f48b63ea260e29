//! Benchmark harness: run maps x strategies x seeded trials, aggregate
//! mean/stddev metrics, and write the CSV artifacts.
//!
//! Everything written here is byte-deterministic for a fixed config
//! except `timing.csv`, which holds wall-clock decision costs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::OccupancyGrid;
use crate::scenario::{AblationConfig, Scenario, SuiteConfig};
use crate::sim::{run_episode, EpisodeConfig, EpisodeResult, TrajectorySample};
use crate::strategy::{ablation_variant, Strategy};

/// One finished trial.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub map: String,
    pub strategy: String,
    pub seed: u64,
    pub result: EpisodeResult,
}

/// Aggregated row per (map, strategy). Means cover successful trials
/// only; stddev is the sample deviation and absent below two successes.
#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub map: String,
    pub strategy: String,
    pub trials: usize,
    pub successes: usize,
    pub mean_time_s: Option<f64>,
    pub std_time_s: Option<f64>,
    pub mean_distance_m: Option<f64>,
    pub std_distance_m: Option<f64>,
    pub mean_decision_ms: Option<f64>,
    pub std_decision_ms: Option<f64>,
}

impl SuiteRow {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn row(&self, map: &str, strategy: &str) -> Option<&SuiteRow> {
        self.rows
            .iter()
            .find(|r| r.map == map && r.strategy == strategy)
    }
}

/// Sample mean and standard deviation; mean needs one value, deviation
/// two.
pub fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

fn load_scenarios(paths: &[PathBuf]) -> Result<Vec<(Scenario, OccupancyGrid)>> {
    paths
        .iter()
        .map(|p| {
            let scenario = Scenario::load(p)?;
            let world = OccupancyGrid::load_map(&scenario.map_path)?;
            Ok((scenario, world))
        })
        .collect()
}

/// Run the full sweep. Trials are dispatched to a worker pool; results
/// are ordered by (scenario, strategy, seed) regardless of completion
/// order.
pub fn run_trials(
    scenarios: &[(Scenario, OccupancyGrid)],
    strategies: &[Strategy],
    trials: usize,
    seed0: u64,
    threads: Option<usize>,
) -> Result<Vec<TrialRecord>> {
    let mut tasks: Vec<(usize, usize, u64)> = Vec::new();
    for si in 0..scenarios.len() {
        for sti in 0..strategies.len() {
            for trial in 0..trials {
                tasks.push((si, sti, seed0 + trial as u64));
            }
        }
    }
    let run_one = |&(si, sti, seed): &(usize, usize, u64)| -> Result<TrialRecord> {
        let (scenario, world) = &scenarios[si];
        let strategy = &strategies[sti];
        let config = EpisodeConfig {
            start: scenario.start,
            start_heading: scenario.start_heading,
            coverage_threshold: scenario.coverage_threshold,
            seed,
            max_sim_time: scenario.max_time,
            record_control_rate: false,
            params: scenario.params.clone(),
        };
        let result = run_episode(world, strategy, &config)?;
        Ok(TrialRecord {
            map: scenario.name.clone(),
            strategy: strategy.name.to_string(),
            seed,
            result,
        })
    };
    let results: Result<Vec<TrialRecord>> = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| tasks.par_iter().map(run_one).collect()),
        None => tasks.par_iter().map(run_one).collect(),
    };
    // tasks were generated in (scenario, strategy, seed) order and par_iter
    // collect preserves input order
    results
}

/// Group records into report rows, in first-appearance order.
pub fn aggregate(records: &[TrialRecord]) -> SuiteReport {
    let mut rows: Vec<SuiteRow> = Vec::new();
    for rec in records {
        if !rows
            .iter()
            .any(|r| r.map == rec.map && r.strategy == rec.strategy)
        {
            rows.push(SuiteRow {
                map: rec.map.clone(),
                strategy: rec.strategy.clone(),
                trials: 0,
                successes: 0,
                mean_time_s: None,
                std_time_s: None,
                mean_distance_m: None,
                std_distance_m: None,
                mean_decision_ms: None,
                std_decision_ms: None,
            });
        }
    }
    for row in &mut rows {
        let group: Vec<&TrialRecord> = records
            .iter()
            .filter(|r| r.map == row.map && r.strategy == row.strategy)
            .collect();
        row.trials = group.len();
        row.successes = group.iter().filter(|r| r.result.success).count();
        let ok: Vec<&&TrialRecord> = group.iter().filter(|r| r.result.success).collect();
        let times: Vec<f64> = ok.iter().map(|r| r.result.time_s).collect();
        let dists: Vec<f64> = ok.iter().map(|r| r.result.distance_m).collect();
        (row.mean_time_s, row.std_time_s) = mean_std(&times);
        (row.mean_distance_m, row.std_distance_m) = mean_std(&dists);
        // decision cost: per-trial mean over every decision, all trials
        let decision_means: Vec<f64> = group
            .iter()
            .filter(|r| !r.result.decisions.is_empty())
            .map(|r| {
                r.result.decisions.iter().map(|d| d.total_ms()).sum::<f64>()
                    / r.result.decisions.len() as f64
            })
            .collect();
        (row.mean_decision_ms, row.std_decision_ms) = mean_std(&decision_means);
    }
    SuiteReport { rows }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.3}")).unwrap_or_default()
}

/// Deterministic aggregate CSV (no wall-clock columns).
pub fn report_csv(report: &SuiteReport) -> String {
    let mut out = String::from(
        "map,strategy,trials,successes,success_rate,mean_time_s,std_time_s,mean_distance_m,std_distance_m\n",
    );
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{:.3},{},{},{},{}",
            r.map,
            r.strategy,
            r.trials,
            r.successes,
            r.success_rate(),
            fmt_opt(r.mean_time_s),
            fmt_opt(r.std_time_s),
            fmt_opt(r.mean_distance_m),
            fmt_opt(r.std_distance_m),
        )
        .unwrap();
    }
    out
}

/// Deterministic per-trial CSV; the raw data `report.csv` aggregates.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("map,strategy,seed,success,outcome,time_s,distance_m,coverage\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{:?},{:.3},{:.3},{:.6}",
            r.map,
            r.strategy,
            r.seed,
            if r.result.success { 1 } else { 0 },
            r.result.outcome,
            r.result.time_s,
            r.result.distance_m,
            r.result.final_coverage,
        )
        .unwrap();
    }
    out
}

/// Wall-clock decision costs (not deterministic across reruns).
pub fn timing_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(
        "map,strategy,seed,decisions,mean_decision_ms,mean_frontier_ms,mean_target_ms,mean_other_ms\n",
    );
    for r in records {
        let n = r.result.decisions.len().max(1) as f64;
        let sum = |f: fn(&crate::sim::DecisionTiming) -> f64| {
            r.result.decisions.iter().map(f).sum::<f64>() / n
        };
        writeln!(
            out,
            "{},{},{},{},{:.3},{:.3},{:.3},{:.3}",
            r.map,
            r.strategy,
            r.seed,
            r.result.decisions.len(),
            sum(|d| d.total_ms()),
            sum(|d| d.frontier_ms),
            sum(|d| d.target_ms),
            sum(|d| d.other_ms),
        )
        .unwrap();
    }
    out
}

pub fn trajectory_csv(traj: &[TrajectorySample]) -> String {
    let mut out = String::from("t,x,y,theta,v,omega,coverage\n");
    for s in traj {
        writeln!(
            out,
            "{:.2},{:.4},{:.4},{:.4},{:.4},{:.4},{:.6}",
            s.t, s.x, s.y, s.theta, s.v, s.omega, s.coverage
        )
        .unwrap();
    }
    out
}

pub fn trajectory_file_name(map: &str, strategy: &str, seed: u64) -> String {
    format!("{}__{}__seed{}.csv", map, strategy.replace('+', "-"), seed)
}

fn write(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Write the full artifact set for a sweep: report.csv, trials.csv,
/// timing.csv, per-trial trajectories and the map manifest used by the
/// plot emitter.
pub fn write_outputs(
    out_dir: &Path,
    report: &SuiteReport,
    records: &[TrialRecord],
    scenarios: &[(Scenario, OccupancyGrid)],
) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    write(&out_dir.join("report.csv"), &report_csv(report))?;
    write(&out_dir.join("trials.csv"), &trials_csv(records))?;
    write(&out_dir.join("timing.csv"), &timing_csv(records))?;
    let traj_dir = out_dir.join("trajectories");
    std::fs::create_dir_all(&traj_dir)
        .map_err(|e| Error::io(format!("creating {}", traj_dir.display()), e))?;
    for r in records {
        let name = trajectory_file_name(&r.map, &r.strategy, r.seed);
        write(&traj_dir.join(name), &trajectory_csv(&r.result.trajectory))?;
    }
    let mut manifest = String::new();
    for (scenario, _) in scenarios {
        let canonical = scenario
            .map_path
            .canonicalize()
            .unwrap_or_else(|_| scenario.map_path.clone());
        writeln!(manifest, "{}\t{}", scenario.name, canonical.display()).unwrap();
    }
    write(&out_dir.join("maps.txt"), &manifest)?;
    Ok(())
}

/// Run a benchmark suite and write its artifacts.
pub fn run_suite(config: &SuiteConfig, out_dir: &Path) -> Result<(SuiteReport, Vec<TrialRecord>)> {
    config.validate()?;
    let scenarios = load_scenarios(&config.scenarios)?;
    let strategies: Vec<Strategy> = config
        .strategies
        .iter()
        .map(|name| Strategy::by_name(name).expect("validated"))
        .collect();
    let records = run_trials(
        &scenarios,
        &strategies,
        config.trials,
        config.seed0,
        config.threads,
    )?;
    let report = aggregate(&records);
    write_outputs(out_dir, &report, &records, &scenarios)?;
    Ok((report, records))
}

/// Run the ablation sweep (variant set over scenarios) and write its
/// artifacts.
pub fn run_ablation(
    config: &AblationConfig,
    out_dir: &Path,
) -> Result<(SuiteReport, Vec<TrialRecord>)> {
    config.validate()?;
    let scenarios = load_scenarios(&config.scenarios)?;
    let strategies: Vec<Strategy> = config
        .variants
        .iter()
        .map(|token| ablation_variant(token).expect("validated"))
        .collect();
    let records = run_trials(
        &scenarios,
        &strategies,
        config.trials,
        config.seed0,
        config.threads,
    )?;
    let report = aggregate(&records);
    write_outputs(out_dir, &report, &records, &scenarios)?;
    Ok((report, records))
}
