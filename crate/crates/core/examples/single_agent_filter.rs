//! One PMBM filter tracking the crossing scenario from a single sensor.
//!
//! Usage: `cargo run --release --example single_agent_filter -- [seed]`

use std::path::Path;

use pmbfusion::filter::{estimate, predict, reduce, update};
use pmbfusion::gospa::gospa;
use pmbfusion::sim::run::{stream_rng, Purpose};
use pmbfusion::sim::{generate_measurements, scripted_truth, Models, ScenarioConfig};
use pmbfusion::PmbmDensity;
use pmbfusion::GaussianMixture;

fn main() -> pmbfusion::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let cfg = ScenarioConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/table1_nf5.cfg"))?;
    let models = Models::from_config(&cfg)?;
    let sensor = &models.sensors[0];
    let truth = scripted_truth(cfg.scenario.steps, cfg.motion.tau);
    let scans = generate_measurements(&truth, sensor, &mut stream_rng(seed, 0, 0, Purpose::Measurements))?;

    let mut pmbm = PmbmDensity::from_ppp(GaussianMixture::empty());
    println!("{:>5} {:>6} {:>9} {:>7} {:>8} {:>8}", "step", "truth", "estimates", "tracks", "globals", "gospa");
    for step in 1..=cfg.scenario.steps {
        let predicted = predict(&pmbm, &models.motion, step)?;
        pmbm = reduce(&update(&predicted, &scans[step - 1], sensor, &models.filter)?, &models.filter);
        let est = estimate(&pmbm);
        if step % 5 == 1 {
            let h = &sensor.observation;
            let truth_pos: Vec<_> = truth.states_at(step).into_iter().map(|x| h * x).collect();
            let est_pos: Vec<_> = est.iter().map(|x| h * x).collect();
            let g = gospa(&truth_pos, &est_pos, &models.gospa);
            println!(
                "{step:>5} {:>6} {:>9} {:>7} {:>8} {:>8.3}",
                truth_pos.len(),
                est.len(),
                pmbm.tracks.len(),
                pmbm.globals.len(),
                g.total
            );
        }
    }
    Ok(())
}
