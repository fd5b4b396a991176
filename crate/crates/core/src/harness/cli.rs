//! Command-line front end of the `sta` binary.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::benchmarks::Benchmark;
use crate::error::{Result, StaError};
use crate::optimizer::StaParams;

use super::output::{write_summary, SummaryFormat};
use super::{emit_summary, run_experiment, table1_configs, ExperimentConfig, SummaryRow};

/// Exit status for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for failures while running or writing results.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "sta", version, about = "State transition algorithm benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one benchmark at one dimension over several seeds.
    Run(RunArgs),
    /// Run every benchmark at 100, 200 and 500 dimensions.
    Table1(Table1Args),
    /// Print the registered benchmarks.
    List,
}

#[derive(Debug, Args, Default)]
struct ParamArgs {
    #[arg(long)]
    se: Option<usize>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    fc: Option<f64>,
}

impl ParamArgs {
    fn apply(&self, p: &mut StaParams) {
        let ParamArgs { se, alpha_max, alpha_min, beta, gamma, delta, fc } = self;
        if let Some(v) = *se {
            p.se = v;
        }
        for (dst, src) in [
            (&mut p.alpha_max, alpha_max),
            (&mut p.alpha_min, alpha_min),
            (&mut p.beta, beta),
            (&mut p.gamma, gamma),
            (&mut p.delta, delta),
            (&mut p.fc, fc),
        ] {
            if let Some(v) = *src {
                *dst = v;
            }
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON file with experiment settings; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark id (f1..f5) or name.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Outer iterations per run (default: 10 x dim).
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary format: csv or markdown.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Debug, Args)]
struct Table1Args {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Replace every cell's iteration budget (smoke testing).
    #[arg(long)]
    max_iter: Option<usize>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value = "markdown")]
    format: String,
}

fn run_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(f) = &args.function {
        cfg.function = f.clone();
    }
    if let Some(d) = args.dim {
        cfg.dimension = d;
    }
    if args.max_iter.is_some() {
        cfg.max_iter = args.max_iter;
    }
    if let Some(r) = args.runs {
        cfg.runs = r;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    args.params.apply(&mut cfg.params);
    Ok(cfg)
}

fn print_rows(rows: &[SummaryRow]) {
    let stdout = io::stdout();
    let _ = write_summary(rows, SummaryFormat::Markdown, stdout.lock());
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let format: SummaryFormat = args.format.parse()?;
    let cfg = run_config(args)?;
    cfg.validate()?;
    let (row, _) = run_experiment(&cfg)?;
    let rows = [row];
    let path = cfg.output_dir.join(format!("summary.{}", format.extension()));
    emit_summary(&rows, &path, format)?;
    print_rows(&rows);
    Ok(())
}

fn cmd_table1(args: &Table1Args) -> Result<()> {
    let format: SummaryFormat = args.format.parse()?;
    let mut params = StaParams::default();
    args.params.apply(&mut params);
    let mut configs = table1_configs(args.seed, args.runs, params, &args.out);
    if args.max_iter.is_some() {
        for cfg in &mut configs {
            cfg.max_iter = args.max_iter;
        }
    }
    for cfg in &configs {
        cfg.validate()?;
    }
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let (row, _) = run_experiment(cfg)?;
        eprintln!(
            "{} {}D: {:e} ± {:e}",
            row.function, row.dimension, row.mean_final, row.std_final
        );
        rows.push(row);
    }
    let path = args.out.join(format!("table1.{}", format.extension()));
    emit_summary(&rows, &path, format)?;
    print_rows(&rows);
    Ok(())
}

fn cmd_list() {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for b in Benchmark::ALL {
        let _ = writeln!(out, "{}\t{}\t[-{}, {}]", b.id(), b.name(), b.bound(), b.bound());
    }
}

fn exit_code(err: &StaError) -> i32 {
    match err {
        StaError::Io { .. } => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

/// Parses `argv` (program name first) and runs the chosen subcommand.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Table1(args) => cmd_table1(args),
        Command::List => {
            cmd_list();
            Ok(())
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            if code == EXIT_USAGE {
                eprintln!("run `sta --help` for usage");
            }
            code
        }
    }
}
