//! GCI fusion of two three-Bernoulli PMBs with full hypothesis enumeration.
//! Prints the highest-weight global hypotheses under both pair weightings.
//!
//! Usage: `cargo run --example example_one_fusion`

use std::path::Path;

use pmbfusion::commands::hypothesis_table;
use pmbfusion::filter::{project_to_pmb_gnn, FilterParams};
use pmbfusion::format::read_pmb;
use pmbfusion::fusion::{fuse_gci, FusionParams, PairWeight};
use pmbfusion::rfs::count_assignments;

fn main() -> pmbfusion::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let f1 = read_pmb(&data.join("example1_a.json"))?;
    let f2 = read_pmb(&data.join("example1_b.json"))?;
    let n1 = f1.bernoullis.len();
    let total = count_assignments(n1 as u64, f2.bernoullis.len() as u64)?;

    for pw in [PairWeight::Exact, PairWeight::Published] {
        let fp = FusionParams::new(0.5, 20.0, total as usize, 5.0)?.ungated().with_pair_weight(pw);
        let fused = fuse_gci(&f1, &f2, &fp, &FilterParams::default())?;
        println!("pair weights: {pw}");
        for line in hypothesis_table(&fused, n1).lines().take(7) {
            println!("  {line}");
        }
        let best = project_to_pmb_gnn(&fused);
        for b in &best.bernoullis {
            println!("  r = {:.4}  mean = ({:.2}, {:.2})", b.r, b.density.mean()[0], b.density.mean()[1]);
        }
        println!();
    }
    Ok(())
}
