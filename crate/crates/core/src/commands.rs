//! The operations behind the `pmbfuse` binary, usable from library code.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::filter::{reduce, FilterParams};
use crate::format::{pmbm_to_json, read_pmb};
use crate::fusion::{fuse_gci, FusionParams};
use crate::gospa::{gospa, GospaParams, GospaResult};
use crate::rfs::PmbmDensity;
use crate::sim::report::{write_csvs, write_summary, Summary};
use crate::sim::{monte_carlo, ScenarioConfig};

pub const SUMMARY_FILE: &str = "summary.json";

/// Runs `f` on a pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Loads a configuration file and applies the seed and key overrides.
pub fn load_config<S: AsRef<str>>(path: &Path, overrides: &[S], seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(path)?.with_overrides(overrides)?;
    if let Some(seed) = seed {
        cfg.scenario.seed = seed;
    }
    Ok(cfg)
}

/// Runs the Monte Carlo experiment for each fusion period and writes one CSV
/// per variant and period plus a merged `summary.json` into `output_dir`.
pub fn sweep(cfg: &ScenarioConfig, fusion_periods: &[usize], output_dir: &Path) -> Result<Summary> {
    if fusion_periods.is_empty() {
        return Err(Error::Config("at least one fusion period is required".into()));
    }
    let mut summary = Summary::new(cfg.scenario.seed, cfg.scenario.n_runs, cfg.scenario.steps);
    for &nf in fusion_periods {
        let mut c = cfg.clone();
        c.scenario.fusion_period = nf;
        let results = monte_carlo(&c)?;
        write_csvs(output_dir, &results)?;
        summary.add(&results);
    }
    write_summary(&output_dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// [`sweep`] over the configured fusion period only.
pub fn simulate(cfg: &ScenarioConfig, output_dir: &Path) -> Result<Summary> {
    sweep(cfg, &[cfg.scenario.fusion_period], output_dir)
}

/// Options of the fusion demo.
#[derive(Debug, Clone)]
pub struct FuseDemo {
    pub pmb1: PathBuf,
    pub pmb2: PathBuf,
    pub fusion: FusionParams,
    /// Where to write the fused PMBM document, if anywhere.
    pub output: Option<PathBuf>,
    /// Apply hypothesis reduction to the fused density.
    pub reduce: bool,
}

/// Fuses two PMB documents and returns the fused density and a table of
/// global hypotheses sorted by weight.
pub fn fuse_demo(opts: &FuseDemo) -> Result<(PmbmDensity, String)> {
    let f1 = read_pmb(&opts.pmb1)?;
    let f2 = read_pmb(&opts.pmb2)?;
    let filter = FilterParams::default();
    let mut fused = fuse_gci(&f1, &f2, &opts.fusion, &filter)?;
    if opts.reduce {
        fused = reduce(&fused, &filter);
    }
    if let Some(path) = &opts.output {
        std::fs::write(path, pmbm_to_json(&fused))
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    }
    Ok((fused.clone(), hypothesis_table(&fused, f1.bernoullis.len())))
}

/// Human-readable list of global hypotheses: weight, the pairs `(i, j)` of
/// Bernoullis fused together (1-based), and the Bernoullis with `r > 0`.
pub fn hypothesis_table(pmbm: &PmbmDensity, n1: usize) -> String {
    let mut order: Vec<usize> = (0..pmbm.globals.len()).collect();
    order.sort_by(|&a, &b| pmbm.globals[b].weight.total_cmp(&pmbm.globals[a].weight));
    let mut out = String::new();
    writeln!(out, "{} global hypotheses", pmbm.globals.len()).unwrap();
    writeln!(out, "{:>4}  {:>12}  {:<28}  bernoullis", "rank", "weight", "pairs").unwrap();
    for (rank, &g) in order.iter().enumerate() {
        let global = &pmbm.globals[g];
        let mut pairs = Vec::new();
        for (t, &h) in global.local_indices.iter().enumerate().take(n1) {
            if let Some(j) = pmbm.tracks[t][h].assigned {
                pairs.push(format!("({},{})", t + 1, j + 1));
            }
        }
        let present = pmbm.selected(g).filter(|h| h.bernoulli.r > 0.0).count();
        let pairs = if pairs.is_empty() { "{}".to_string() } else { format!("{{{}}}", pairs.join(",")) };
        writeln!(out, "{:>4}  {:>12.6e}  {:<28}  {}", rank + 1, global.weight, pairs, present).unwrap();
    }
    out
}

/// Point sets read from a CSV file with a header row. With a `step` column the
/// points are grouped by step; otherwise the file is a single set (step 0).
pub fn read_point_sets(path: &Path) -> Result<Vec<(i64, Vec<DVector<f64>>)>> {
    let err = |e: &dyn std::fmt::Display| Error::Format(format!("{}: {e}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(&e))?;
    let headers = reader.headers().map_err(|e| err(&e))?.clone();
    let step_col = headers.iter().position(|h| h.eq_ignore_ascii_case("step"));
    let mut sets: Vec<(i64, Vec<DVector<f64>>)> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| err(&e))?;
        let mut step = 0;
        let mut coords = Vec::new();
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == step_col {
                step = field.parse().map_err(|e| err(&format!("row {}: {e}", line + 1)))?;
            } else {
                coords.push(field.parse::<f64>().map_err(|e| err(&format!("row {}: {e}", line + 1)))?);
            }
        }
        if coords.is_empty() {
            return Err(err(&format!("row {} has no coordinates", line + 1)));
        }
        let point = DVector::from_vec(coords);
        match sets.iter_mut().find(|(s, _)| *s == step) {
            Some((_, pts)) => pts.push(point),
            None => sets.push((step, vec![point])),
        }
    }
    sets.sort_by_key(|(s, _)| *s);
    Ok(sets)
}

/// GOSPA between the point sets of two CSV files, per step.
pub fn gospa_files(truth: &Path, estimate: &Path, params: &GospaParams) -> Result<Vec<(i64, GospaResult)>> {
    let truth = read_point_sets(truth)?;
    let estimate = read_point_sets(estimate)?;
    let mut steps: Vec<i64> = truth.iter().chain(&estimate).map(|(s, _)| *s).collect();
    steps.sort_unstable();
    steps.dedup();
    let empty = Vec::new();
    let lookup = |sets: &[(i64, Vec<DVector<f64>>)], s: i64| -> Vec<DVector<f64>> {
        sets.iter().find(|(k, _)| *k == s).map_or(empty.clone(), |(_, p)| p.clone())
    };
    steps
        .into_iter()
        .map(|s| {
            let x = lookup(&truth, s);
            let y = lookup(&estimate, s);
            if let (Some(a), Some(b)) = (x.first(), y.first()) {
                if a.len() != b.len() {
                    return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
                }
            }
            Ok((s, gospa(&x, &y, params)))
        })
        .collect()
}
