//! Fuses the same pair of PMBs with the arithmetic-average rule and with GCI
//! and compares the fused Bernoullis.
//!
//! Usage: `cargo run --example aa_vs_gci`

use pmbfusion::filter::{project_to_pmb_to, reduce, FilterParams};
use pmbfusion::fusion::{fuse_aa, fuse_gci, FusionParams};
use pmbfusion::{Bernoulli, Gaussian, GaussianMixture, PmbDensity};

fn bernoulli(r: f64, x: f64, y: f64, var: f64) -> pmbfusion::Result<Bernoulli<pmbfusion::GaussianFamily>> {
    Bernoulli::new(r, Gaussian::from_slices(&[x, y], &[var, 0.0, 0.0, var])?)
}

fn show(name: &str, pmb: &PmbDensity) {
    println!("{name}: PPP mass {:.4}", pmb.ppp.total_weight());
    for b in &pmb.bernoullis {
        let m = b.density.mean();
        let p = b.density.cov();
        println!("  r = {:.4}  mean = ({:6.2}, {:6.2})  var = ({:.3}, {:.3})", b.r, m[0], m[1], p[(0, 0)], p[(1, 1)]);
    }
}

fn main() -> pmbfusion::Result<()> {
    let ppp = GaussianMixture::single(0.2, Gaussian::from_slices(&[50.0, 50.0], &[400.0, 0.0, 0.0, 400.0])?)?;
    // Agent 1 sees an object at (10, 10) well and one at (40, 0) weakly;
    // agent 2 sees the first object with a small offset and misses the second.
    let f1 = PmbDensity::new(ppp.clone(), vec![bernoulli(0.95, 10.0, 10.0, 2.0)?, bernoulli(0.4, 40.0, 0.0, 2.0)?]);
    let f2 = PmbDensity::new(ppp, vec![bernoulli(0.9, 11.0, 9.5, 3.0)?]);
    show("agent 1", &f1);
    show("agent 2", &f2);

    let fp = FusionParams::default();
    let filter = FilterParams::default();
    let gci = project_to_pmb_to(&reduce(&fuse_gci(&f1, &f2, &fp, &filter)?, &filter))?;
    let aa = project_to_pmb_to(&fuse_aa(&f1, &f2, &fp)?)?;
    show("GCI, track-oriented projection", &gci);
    show("AA", &aa);
    Ok(())
}
