//! CSV and markdown writers for traces and summaries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, StaError};
use crate::optimizer::RunTrace;

use super::SummaryRow;

pub const SUMMARY_CSV_HEADER: &str =
    "function,dimension,mean_final,std_final,best_final,worst_final,mean_evaluations,mean_wall_time_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SummaryFormat {
    #[default]
    Csv,
    Markdown,
}

impl SummaryFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SummaryFormat::Csv => "csv",
            SummaryFormat::Markdown => "md",
        }
    }
}

impl FromStr for SummaryFormat {
    type Err = StaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(SummaryFormat::Csv),
            "markdown" | "md" => Ok(SummaryFormat::Markdown),
            other => Err(StaError::Config(format!("unknown summary format `{other}`"))),
        }
    }
}

/// Writes `iteration,mean_best,run_0,...` rows, one per iteration.
pub fn write_trace_csv<W: Write>(series: &[&[f64]], mut w: W) -> std::io::Result<()> {
    write!(w, "iteration,mean_best")?;
    for k in 0..series.len() {
        write!(w, ",run_{k}")?;
    }
    writeln!(w)?;
    let len = series.first().map_or(0, |s| s.len());
    let runs = series.len() as f64;
    for i in 0..len {
        let mean = series.iter().map(|s| s[i]).sum::<f64>() / runs;
        write!(w, "{i},{mean:e}")?;
        for s in series {
            write!(w, ",{:e}", s[i])?;
        }
        writeln!(w)?;
    }
    w.flush()
}

fn check_lengths(series: &[&[f64]]) -> Result<()> {
    if let Some(first) = series.first() {
        if let Some(other) = series.iter().find(|s| s.len() != first.len()) {
            return Err(StaError::TraceLengthMismatch {
                first: first.len(),
                other: other.len(),
            });
        }
    }
    Ok(())
}

/// Convergence traces of several runs as one CSV file.
pub fn emit_trace_csv(traces: &[RunTrace], path: &Path) -> Result<()> {
    let series: Vec<&[f64]> = traces.iter().map(|t| t.per_iteration_best.as_slice()).collect();
    check_lengths(&series)?;
    let file = File::create(path).map_err(|e| StaError::io(path, e))?;
    write_trace_csv(&series, BufWriter::new(file)).map_err(|e| StaError::io(path, e))
}

/// Three significant digits, e.g. `8.69e-122`.
pub fn format_sig3(v: f64) -> String {
    format!("{v:.2e}")
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], format: SummaryFormat, mut w: W) -> std::io::Result<()> {
    match format {
        SummaryFormat::Csv => {
            writeln!(w, "{SUMMARY_CSV_HEADER}")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                    r.function,
                    r.dimension,
                    r.mean_final,
                    r.std_final,
                    r.best_final,
                    r.worst_final,
                    r.mean_evaluations,
                    r.mean_wall_time
                )?;
            }
        }
        SummaryFormat::Markdown => {
            writeln!(w, "| Function | Dimension | Mean ± Std | Best | Worst | Mean evaluations | Mean wall time (s) |")?;
            writeln!(w, "|---|---|---|---|---|---|---|")?;
            for r in rows {
                writeln!(
                    w,
                    "| {} | {} | {} ± {} | {} | {} | {:.0} | {:.2} |",
                    r.function,
                    r.dimension,
                    format_sig3(r.mean_final),
                    format_sig3(r.std_final),
                    format_sig3(r.best_final),
                    format_sig3(r.worst_final),
                    r.mean_evaluations,
                    r.mean_wall_time
                )?;
            }
        }
    }
    w.flush()
}

pub fn emit_summary(rows: &[SummaryRow], path: &Path, format: SummaryFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| StaError::io(path, e))?;
    write_summary(rows, format, BufWriter::new(file)).map_err(|e| StaError::io(path, e))
}
