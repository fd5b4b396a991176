//! Experiment orchestration: seeded runs over a benchmark, aggregation and
//! artifact output.

pub mod cli;
pub mod output;

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Benchmark;
use crate::error::{Result, StaError};
use crate::optimizer::{sta_minimize, RunTrace, StaParams};

pub use output::{emit_summary, emit_trace_csv, SummaryFormat};

/// Environment variable capping the number of concurrent runs.
pub const THREADS_ENV: &str = "STA_THREADS";

/// Dimension and iteration budget of each cell of the reference grid.
pub const TABLE1_CELLS: [(usize, usize); 3] = [(100, 1000), (200, 2000), (500, 5000)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: String,
    pub dimension: usize,
    pub runs: usize,
    /// Outer iterations per run; `None` means ten per dimension.
    pub max_iter: Option<usize>,
    pub base_seed: u64,
    /// Algorithm constants. Its `max_iter` is replaced by the experiment's.
    pub params: StaParams,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            function: String::new(),
            dimension: 0,
            runs: 10,
            max_iter: None,
            base_seed: 0,
            params: StaParams::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn new(function: impl Into<String>, dimension: usize) -> Self {
        ExperimentConfig {
            function: function.into(),
            dimension,
            ..Default::default()
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| StaError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| StaError::Config(format!("{}: {e}", path.display())))
    }

    pub fn effective_max_iter(&self) -> usize {
        self.max_iter.unwrap_or(10 * self.dimension)
    }

    pub fn benchmark(&self) -> Result<Benchmark> {
        self.function.parse()
    }

    /// Algorithm parameters with the experiment's iteration budget applied.
    pub fn run_params(&self) -> StaParams {
        self.params.with_max_iter(self.effective_max_iter())
    }

    pub fn validate(&self) -> Result<Benchmark> {
        if self.function.is_empty() {
            return Err(StaError::Config("no benchmark function given".into()));
        }
        let bench = self.benchmark()?;
        if self.runs == 0 {
            return Err(StaError::Config("runs must be at least 1".into()));
        }
        if self.dimension < bench.min_dimension() {
            return Err(StaError::Config(format!(
                "{} needs dimension >= {}, got {}",
                bench.name(),
                bench.min_dimension(),
                self.dimension
            )));
        }
        self.run_params().validate()?;
        Ok(bench)
    }

    pub fn trace_path(&self, bench: Benchmark) -> PathBuf {
        self.output_dir
            .join(format!("trace_{}_{}d.csv", bench.id(), self.dimension))
    }
}

/// Aggregate statistics over the runs of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub function: String,
    pub dimension: usize,
    pub mean_final: f64,
    pub std_final: f64,
    pub best_final: f64,
    pub worst_final: f64,
    pub mean_evaluations: f64,
    pub mean_wall_time: f64,
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn summarize(function: &str, dimension: usize, traces: &[RunTrace]) -> SummaryRow {
    let finals: Vec<f64> = traces.iter().map(|t| t.final_fitness).collect();
    let (mean, std) = mean_std(&finals);
    let best = finals.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = finals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let runs = traces.len() as f64;
    SummaryRow {
        function: function.to_string(),
        dimension,
        // rounding can push the mean of nearly equal values a hair outside
        mean_final: mean.clamp(best, worst),
        std_final: std,
        best_final: best,
        worst_final: worst,
        mean_evaluations: traces.iter().map(|t| t.evaluations as f64).sum::<f64>() / runs,
        mean_wall_time: traces.iter().map(|t| t.wall_time).sum::<f64>() / runs,
    }
}

fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Runs `runs` seeds (`base_seed + k`) without writing anything.
pub fn run_seeds(bench: Benchmark, dimension: usize, params: &StaParams, base_seed: u64, runs: usize) -> Result<Vec<RunTrace>> {
    let spec = bench.spec(dimension)?;
    let f = bench.function();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| StaError::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..runs as u64)
            .into_par_iter()
            .map(|k| sta_minimize(f, &spec.domain, params, base_seed.wrapping_add(k), None))
            .collect()
    })
}

/// Runs every seed of `cfg`, writes the trace CSV and returns the summary.
///
/// The output directory is created and the trace file opened before the first
/// run, so an unwritable destination fails fast.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(SummaryRow, Vec<RunTrace>)> {
    let bench = cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| StaError::io(&cfg.output_dir, e))?;
    let trace_path = cfg.trace_path(bench);
    File::create(&trace_path).map_err(|e| StaError::io(&trace_path, e))?;

    let traces = run_seeds(bench, cfg.dimension, &cfg.run_params(), cfg.base_seed, cfg.runs)?;
    emit_trace_csv(&traces, &trace_path)?;
    Ok((summarize(bench.id(), cfg.dimension, &traces), traces))
}

/// The full reference grid: every benchmark at 100, 200 and 500 dimensions.
pub fn table1_configs(base_seed: u64, runs: usize, params: StaParams, output_dir: &Path) -> Vec<ExperimentConfig> {
    Benchmark::ALL
        .iter()
        .flat_map(|b| {
            TABLE1_CELLS.iter().map(move |&(dimension, max_iter)| ExperimentConfig {
                function: b.id().to_string(),
                dimension,
                runs,
                max_iter: Some(max_iter),
                base_seed,
                params,
                output_dir: output_dir.to_path_buf(),
            })
        })
        .collect()
}
