//! CSV and JSON outputs of Monte Carlo experiments.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::run::VariantResult;

pub const CSV_HEADER_COMMENT: &str = "# pmbfusion gospa v1";
pub const SUMMARY_FORMAT: &str = "pmbfusion summary v1";

/// One row of the summary table: a variant at one fusion period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: String,
    pub fusion_period: usize,
    pub overall_rms: f64,
    pub per_step_rms: Vec<f64>,
    pub per_step_localisation: Vec<f64>,
    pub per_step_missed: Vec<f64>,
    pub per_step_false: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format: String,
    pub seed: u64,
    pub n_runs: usize,
    pub steps: usize,
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn new(seed: u64, n_runs: usize, steps: usize) -> Self {
        Self { format: SUMMARY_FORMAT.to_string(), seed, n_runs, steps, rows: Vec::new() }
    }

    pub fn add(&mut self, results: &[VariantResult]) {
        self.rows.extend(results.iter().map(|r| SummaryRow {
            variant: r.variant.to_string(),
            fusion_period: r.fusion_period,
            overall_rms: r.rms.overall,
            per_step_rms: r.rms.per_step.clone(),
            per_step_localisation: r.rms.per_step_localisation.clone(),
            per_step_missed: r.rms.per_step_missed.clone(),
            per_step_false: r.rms.per_step_false.clone(),
        }));
    }

    /// Overall RMS of `variant` at `fusion_period`, if present.
    pub fn overall(&self, variant: &str, fusion_period: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.fusion_period == fusion_period)
            .map(|r| r.overall_rms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }

    /// Variant-by-fusion-period table of overall RMS-GOSPA values.
    pub fn table(&self) -> String {
        let mut periods: Vec<usize> = self.rows.iter().map(|r| r.fusion_period).collect();
        periods.sort_unstable();
        periods.dedup();
        let mut variants: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !variants.contains(&r.variant.as_str()) {
                variants.push(&r.variant);
            }
        }
        let mut out = format!("{:<20}", "variant");
        for p in &periods {
            out.push_str(&format!("{:>10}", format!("N_f={p}")));
        }
        out.push('\n');
        for v in variants {
            out.push_str(&format!("{v:<20}"));
            for p in &periods {
                match self.overall(v, *p) {
                    Some(x) => out.push_str(&format!("{x:>10.3}")),
                    None => out.push_str(&format!("{:>10}", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

pub fn csv_file_name(result: &VariantResult) -> String {
    format!("{}_nf{}.csv", result.variant, result.fusion_period)
}

/// Per-run, per-agent, per-step GOSPA values of one variant.
pub fn write_csv<W: Write>(mut w: W, result: &VariantResult) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER_COMMENT}")?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["run", "agent", "step", "total", "loc", "missed", "false"])?;
    for (run, r) in result.runs.iter().enumerate() {
        for (agent, steps) in r.gospa.iter().enumerate() {
            for (k, g) in steps.iter().enumerate() {
                csv.write_record([
                    run.to_string(),
                    agent.to_string(),
                    (k + 1).to_string(),
                    g.total.to_string(),
                    g.localisation.to_string(),
                    g.missed.to_string(),
                    g.false_.to_string(),
                ])?;
            }
        }
    }
    csv.flush()
}

/// Writes one CSV per variant into `dir`; returns the paths written.
pub fn write_csvs(dir: &Path, results: &[VariantResult]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    results
        .iter()
        .map(|r| {
            let path = dir.join(csv_file_name(r));
            let file = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            write_csv(std::io::BufWriter::new(file), r).map_err(|e| io_err(&path, e))?;
            Ok(path)
        })
        .collect()
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    std::fs::write(path, summary.to_json()).map_err(|e| io_err(path, e))
}
