//! GOSPA between a ground-truth set and a few estimated sets, split into
//! localisation, missed and false costs.
//!
//! Usage: `cargo run --example gospa_decomposition`

use nalgebra::DVector;

use pmbfusion::gospa::{gospa, GospaParams};

fn pts(xs: &[[f64; 2]]) -> Vec<DVector<f64>> {
    xs.iter().map(|p| DVector::from_row_slice(p)).collect()
}

fn main() -> pmbfusion::Result<()> {
    let params = GospaParams::new(10.0, 2.0)?;
    let truth = pts(&[[0.0, 0.0], [20.0, 0.0], [40.0, 5.0]]);
    let cases = [
        ("exact", truth.clone()),
        ("small offsets", pts(&[[1.0, 0.5], [19.0, -1.0], [41.0, 5.0]])),
        ("one missed", pts(&[[1.0, 0.5], [19.0, -1.0]])),
        ("one false", pts(&[[1.0, 0.5], [19.0, -1.0], [41.0, 5.0], [80.0, 80.0]])),
        ("one far off", pts(&[[1.0, 0.5], [19.0, -1.0], [55.0, 5.0]])),
        ("empty", Vec::new()),
    ];
    println!("{:<14} {:>8} {:>8} {:>8} {:>8}", "estimate", "total", "loc", "missed", "false");
    for (name, est) in &cases {
        let g = gospa(&truth, est, &params);
        println!("{name:<14} {:>8.3} {:>8.2} {:>8.2} {:>8.2}", g.total, g.localisation, g.missed, g.false_);
    }
    Ok(())
}
