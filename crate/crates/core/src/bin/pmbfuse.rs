use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pmbfusion::commands::{self, FuseDemo};
use pmbfusion::fusion::{FusionParams, PairWeight};
use pmbfusion::gospa::GospaParams;
use pmbfusion::Result;

/// Distributed PMB filtering with GCI fusion.
#[derive(Parser)]
#[command(name = "pmbfuse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario configuration (TOML).
    config: PathBuf,
    /// Output directory for CSV files and summary.json.
    #[arg(short, long, default_value = "out")]
    output_dir: PathBuf,
    /// Configuration override `key=value`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed, replacing `scenario.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo runs; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo experiment described by a configuration file.
    Simulate(RunArgs),
    /// Run the experiment for several fusion periods and merge the summaries.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Fusion periods, comma separated.
        #[arg(long = "nf", value_delimiter = ',', required = true)]
        fusion_periods: Vec<usize>,
    },
    /// Fuse two PMB documents with GCI and list the global hypotheses.
    FuseDemo {
        pmb1: PathBuf,
        pmb2: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        omega: f64,
        /// Gating threshold on the squared Mahalanobis distance.
        #[arg(long, default_value_t = 20.0)]
        gate: f64,
        /// Disable gating.
        #[arg(long)]
        no_gate: bool,
        /// Maximum number of global hypotheses.
        #[arg(long, default_value_t = 200)]
        k: usize,
        /// Pair hypothesis weighting: exact or published.
        #[arg(long, default_value_t = PairWeight::Exact)]
        pair_weight: PairWeight,
        /// Apply hypothesis reduction to the fused density.
        #[arg(long)]
        reduce: bool,
        /// Write the fused PMBM document here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// GOSPA between two point-set CSV files.
    Gospa {
        truth: PathBuf,
        estimate: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        c: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
}

fn run_experiment(args: &RunArgs, periods: Option<&[usize]>) -> Result<()> {
    let cfg = commands::load_config(&args.config, &args.overrides, args.seed)?;
    let periods = periods.map_or_else(|| vec![cfg.scenario.fusion_period], <[usize]>::to_vec);
    let summary = commands::with_threads(args.threads, || commands::sweep(&cfg, &periods, &args.output_dir))??;
    print!("{}", summary.table());
    println!("wrote {}", args.output_dir.join(commands::SUMMARY_FILE).display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => run_experiment(&args, None),
        Command::Sweep { run, fusion_periods } => run_experiment(&run, Some(&fusion_periods)),
        Command::FuseDemo { pmb1, pmb2, omega, gate, no_gate, k, pair_weight, reduce, output } => {
            let base = FusionParams::default();
            let mut fusion = FusionParams::new(omega, gate, k, base.aa_gate)?.with_pair_weight(pair_weight);
            if no_gate {
                fusion = fusion.ungated();
            }
            let (_, table) = commands::fuse_demo(&FuseDemo { pmb1, pmb2, fusion, output: output.clone(), reduce })?;
            print!("{table}");
            if let Some(path) = output {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Gospa { truth, estimate, c, p } => {
            let params = GospaParams::new(c, p)?;
            println!("step,total,loc,missed,false");
            for (step, g) in commands::gospa_files(&truth, &estimate, &params)? {
                println!("{step},{},{},{},{}", g.total, g.localisation, g.missed, g.false_);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
