//! Ground-truth trajectories.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::filter::MotionModel;
use crate::gaussian::Gaussian;

/// One object, alive on steps `birth..death` (1-based, `death` exclusive).
#[derive(Debug, Clone, PartialEq)]
pub struct TruthObject {
    pub birth: usize,
    pub death: usize,
    pub states: Vec<DVector<f64>>,
}

impl TruthObject {
    pub fn state_at(&self, step: usize) -> Option<&DVector<f64>> {
        if step >= self.birth && step < self.death {
            self.states.get(step - self.birth)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub steps: usize,
    pub objects: Vec<TruthObject>,
}

impl GroundTruth {
    /// States of the objects alive at `step`.
    pub fn states_at(&self, step: usize) -> Vec<&DVector<f64>> {
        self.objects.iter().filter_map(|o| o.state_at(step)).collect()
    }

    pub fn alive_at(&self, step: usize) -> usize {
        self.states_at(step).len()
    }
}

/// Four objects on noiseless constant-velocity paths that approach each other
/// around step 40 near the centre of `[0, 300]^2`. The fourth object exists
/// on steps `1..=40` only.
pub fn scripted_truth(steps: usize, tau: f64) -> GroundTruth {
    const MEET: usize = 40;
    let paths: [([f64; 2], [f64; 2]); 4] = [
        ([147.0, 149.0], [1.0, 1.0]),
        ([153.0, 151.0], [-1.0, 1.0]),
        ([151.0, 147.0], [-1.0, -1.0]),
        ([149.0, 153.0], [1.0, -1.0]),
    ];
    let objects = paths
        .iter()
        .enumerate()
        .map(|(i, (at_meet, v))| {
            let death = if i == 3 { (MEET + 1).min(steps + 1) } else { steps + 1 };
            let states = (1..death)
                .map(|k| {
                    let dt = (k as f64 - MEET as f64) * tau;
                    DVector::from_vec(vec![at_meet[0] + v[0] * dt, v[0], at_meet[1] + v[1] * dt, v[1]])
                })
                .collect();
            TruthObject { birth: 1, death, states }
        })
        .collect();
    GroundTruth { steps, objects }
}

/// Draws `x ~ N(m, P)`.
pub fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R, g: &Gaussian) -> Result<DVector<f64>> {
    let l = g.cov().clone().cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    Ok(g.mean() + l * standard_normal(rng, g.dim()))
}

pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    poisson(rng, mean)
}

/// Objects drawn from the birth, survival and motion model.
pub fn sampled_truth<R: Rng + ?Sized>(steps: usize, motion: &MotionModel, rng: &mut R) -> Result<GroundTruth> {
    let q_chol: DMatrix<f64> = match motion.process_noise.clone().cholesky() {
        Some(c) => c.l(),
        None => DMatrix::zeros(motion.dim(), motion.dim()),
    };
    let mut finished = Vec::new();
    let mut alive: Vec<TruthObject> = Vec::new();
    for step in 1..=steps {
        let mut next = Vec::with_capacity(alive.len());
        for mut obj in alive.drain(..) {
            if rng.random::<f64>() < motion.survival_prob {
                let last = obj.states.last().expect("alive objects have a state");
                let x = &motion.transition * last + &q_chol * standard_normal(rng, motion.dim());
                obj.states.push(x);
                next.push(obj);
            } else {
                obj.death = step;
                finished.push(obj);
            }
        }
        alive = next;
        let birth = motion.birth_at(step);
        for (w, g) in birth.components() {
            for _ in 0..poisson(rng, *w) {
                alive.push(TruthObject { birth: step, death: 0, states: vec![sample_gaussian(rng, g)?] });
            }
        }
    }
    for mut obj in alive {
        obj.death = steps + 1;
        finished.push(obj);
    }
    finished.sort_by_key(|o| o.birth);
    Ok(GroundTruth { steps, objects: finished })
}
