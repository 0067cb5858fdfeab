//! Small Monte Carlo comparison of the distributed variants and the
//! centralised filter on the crossing scenario.
//!
//! Usage: `cargo run --release --example monte_carlo -- [n_runs] [fusion_period]`

use std::path::Path;
use std::time::Instant;

use pmbfusion::sim::{monte_carlo, ScenarioConfig, Summary};

fn main() -> pmbfusion::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_runs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let fusion_period: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/table1_nf5.cfg");
    let mut cfg = ScenarioConfig::load(&path)?;
    cfg.scenario.n_runs = n_runs;
    cfg.scenario.fusion_period = fusion_period;

    let start = Instant::now();
    let results = monte_carlo(&cfg)?;
    let mut summary = Summary::new(cfg.scenario.seed, n_runs, cfg.scenario.steps);
    summary.add(&results);
    println!("{}", summary.table());
    println!("{n_runs} runs in {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
