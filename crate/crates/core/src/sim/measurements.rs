//! Measurement generation for one agent.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Result;
use crate::filter::MeasurementModel;
use crate::sim::truth::{poisson_count, standard_normal, GroundTruth};

/// Square root of a symmetric positive semi-definite matrix, so a zero noise
/// covariance yields exact measurements.
fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals)
}

/// Measurement sets for steps `1..=truth.steps`, indexed by `step - 1`:
/// detections of alive objects (in object order) followed by clutter.
pub fn generate_measurements<R: Rng + ?Sized>(
    truth: &GroundTruth,
    mm: &MeasurementModel,
    rng: &mut R,
) -> Result<Vec<Vec<DVector<f64>>>> {
    let observation = &mm.observation;
    let noise_sqrt = psd_sqrt(&mm.noise);
    let nz = observation.nrows();
    Ok((1..=truth.steps)
        .map(|step| {
            let mut scan = Vec::new();
            for x in truth.states_at(step) {
                if rng.random::<f64>() < mm.detection_prob {
                    scan.push(observation * x + &noise_sqrt * standard_normal(rng, nz));
                }
            }
            for _ in 0..poisson_count(rng, mm.clutter_rate) {
                let z = DVector::from_iterator(
                    nz,
                    mm.clutter_region.bounds.iter().map(|(lo, hi)| rng.random_range(*lo..*hi)),
                );
                scan.push(z);
            }
            scan
        })
        .collect())
}
