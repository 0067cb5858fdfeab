//! Point-object PMBM filtering recursion and PMB projections.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::assignment::{murty_kbest, AssignmentProblem};
use crate::error::{Error, Result};
use crate::family::{DensityFamily, GaussianFamily, IntensityReduction};
use crate::gaussian::{cholesky, ln_normal, moment_match, symmetrize, Gaussian, GaussianMixture};
use crate::numeric::{ln_or_floor, log_sum_exp, normalise_log_weights, LN_FLOOR};
use crate::rfs::{Bernoulli, GlobalHypothesis, LocalHypothesis, Pmb, Pmbm, PmbmDensity};

/// Expected number of births: one value for the first step, another afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthSchedule {
    pub first_step: f64,
    pub later_steps: f64,
}

impl BirthSchedule {
    /// Expected births at `step` (steps are 1-based).
    pub fn expected(&self, step: usize) -> f64 {
        if step <= 1 {
            self.first_step
        } else {
            self.later_steps
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub transition: DMatrix<f64>,
    pub process_noise: DMatrix<f64>,
    pub survival_prob: f64,
    /// Birth intensity shape; its weights are rescaled to the schedule's expected births.
    pub birth_intensity: GaussianMixture,
    pub birth_schedule: BirthSchedule,
}

impl MotionModel {
    /// Nearly-constant-velocity model on `[px, vx, py, vy]`.
    pub fn ncv_2d(
        tau: f64,
        noise: f64,
        survival_prob: f64,
        birth_intensity: GaussianMixture,
        birth_schedule: BirthSchedule,
    ) -> Result<Self> {
        let f1 = DMatrix::from_row_slice(2, 2, &[1.0, tau, 0.0, 1.0]);
        let q1 = DMatrix::from_row_slice(
            2,
            2,
            &[tau.powi(3) / 3.0, tau.powi(2) / 2.0, tau.powi(2) / 2.0, tau],
        ) * noise;
        let mut transition = DMatrix::zeros(4, 4);
        let mut process_noise = DMatrix::zeros(4, 4);
        for axis in 0..2 {
            transition.view_mut((2 * axis, 2 * axis), (2, 2)).copy_from(&f1);
            process_noise.view_mut((2 * axis, 2 * axis), (2, 2)).copy_from(&q1);
        }
        Self::new(transition, process_noise, survival_prob, birth_intensity, birth_schedule)
    }

    pub fn new(
        transition: DMatrix<f64>,
        process_noise: DMatrix<f64>,
        survival_prob: f64,
        birth_intensity: GaussianMixture,
        birth_schedule: BirthSchedule,
    ) -> Result<Self> {
        let n = transition.nrows();
        if transition.ncols() != n || process_noise.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, actual: process_noise.nrows() });
        }
        if !(0.0..=1.0).contains(&survival_prob) {
            return Err(Error::InvalidParameter(format!("survival probability {survival_prob}")));
        }
        if let Some(d) = birth_intensity.dim() {
            if d != n {
                return Err(Error::DimensionMismatch { expected: n, actual: d });
            }
        }
        Ok(Self { transition, process_noise, survival_prob, birth_intensity, birth_schedule })
    }

    pub fn dim(&self) -> usize {
        self.transition.nrows()
    }

    /// Birth intensity at `step`, scaled to the expected number of births.
    pub fn birth_at(&self, step: usize) -> GaussianMixture {
        let total = self.birth_intensity.total_weight();
        if total <= 0.0 {
            return GaussianMixture::empty();
        }
        self.birth_intensity.scaled(self.birth_schedule.expected(step) / total)
    }

    fn propagate(&self, g: &Gaussian) -> Result<Gaussian> {
        let f = &self.transition;
        let mean = f * g.mean();
        let cov = symmetrize(&(f * g.cov() * f.transpose() + &self.process_noise));
        Gaussian::new(mean, cov)
    }
}

/// Axis-aligned box on which clutter is uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub bounds: Vec<(f64, f64)>,
}

impl Region {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() || bounds.iter().any(|(lo, hi)| !(hi > lo)) {
            return Err(Error::InvalidParameter("region must have positive volume".into()));
        }
        Ok(Self { bounds })
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    pub fn contains(&self, z: &DVector<f64>) -> bool {
        z.len() == self.bounds.len()
            && z.iter().zip(&self.bounds).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    pub observation: DMatrix<f64>,
    pub noise: DMatrix<f64>,
    pub detection_prob: f64,
    /// Expected number of clutter measurements per scan.
    pub clutter_rate: f64,
    pub clutter_region: Region,
}

impl MeasurementModel {
    /// Position measurements of the `[px, vx, py, vy]` state.
    pub fn position_2d(noise_var: f64, detection_prob: f64, clutter_rate: f64, region: Region) -> Result<Self> {
        let observation = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        Self::new(observation, DMatrix::identity(2, 2) * noise_var, detection_prob, clutter_rate, region)
    }

    pub fn new(
        observation: DMatrix<f64>,
        noise: DMatrix<f64>,
        detection_prob: f64,
        clutter_rate: f64,
        clutter_region: Region,
    ) -> Result<Self> {
        let nz = observation.nrows();
        if noise.shape() != (nz, nz) {
            return Err(Error::DimensionMismatch { expected: nz, actual: noise.nrows() });
        }
        if clutter_region.bounds.len() != nz {
            return Err(Error::DimensionMismatch { expected: nz, actual: clutter_region.bounds.len() });
        }
        if !(0.0..=1.0).contains(&detection_prob) || !(clutter_rate >= 0.0) {
            return Err(Error::InvalidParameter("detection probability or clutter rate".into()));
        }
        let asymmetric = (&noise - noise.transpose()).abs().max() > 1e-12 * noise.abs().max().max(1.0);
        if asymmetric || noise.clone().symmetric_eigen().eigenvalues.min() < 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { observation, noise, detection_prob, clutter_rate, clutter_region })
    }

    pub fn measurement_dim(&self) -> usize {
        self.observation.nrows()
    }

    pub fn clutter_intensity(&self, z: &DVector<f64>) -> f64 {
        if self.clutter_region.contains(z) {
            self.clutter_rate / self.clutter_region.volume()
        } else {
            0.0
        }
    }
}

/// Hypothesis-management and gating parameters of a filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub ppp_prune: f64,
    pub ppp_merge: f64,
    pub ppp_max: usize,
    pub mb_prune: f64,
    pub bern_exist_prune: f64,
    pub gate: f64,
    pub murty_k: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            ppp_prune: 1e-5,
            ppp_merge: 0.1,
            ppp_max: 30,
            mb_prune: 1e-4,
            bern_exist_prune: 1e-5,
            gate: 20.0,
            murty_k: 200,
        }
    }
}

impl FilterParams {
    pub fn intensity_reduction(&self) -> IntensityReduction {
        IntensityReduction { prune: self.ppp_prune, merge: self.ppp_merge, max_components: self.ppp_max }
    }
}

/// Prediction: survival-thinned PPP plus births; every Bernoulli propagated with
/// `r <- p_S r`. `step` selects the birth rate.
pub fn predict(pmbm: &PmbmDensity, motion: &MotionModel, step: usize) -> Result<PmbmDensity> {
    let ps = motion.survival_prob;
    let mut ppp = Vec::with_capacity(pmbm.ppp.len() + motion.birth_intensity.len());
    for (w, g) in pmbm.ppp.components() {
        let w = w * ps;
        if w > 0.0 {
            ppp.push((w, motion.propagate(g)?));
        }
    }
    ppp.extend(motion.birth_at(step).into_components());

    let tracks = pmbm
        .tracks
        .iter()
        .map(|track| {
            track
                .iter()
                .map(|h| {
                    Ok(LocalHypothesis {
                        log_weight: h.log_weight,
                        bernoulli: Bernoulli {
                            r: ps * h.bernoulli.r,
                            density: motion.propagate(&h.bernoulli.density)?,
                        },
                        assigned: None,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Pmbm { ppp: GaussianMixture::new(ppp)?, tracks, globals: pmbm.globals.clone(), partners: 0 })
}

struct Innovation {
    predicted: DVector<f64>,
    cov: DMatrix<f64>,
    cov_chol: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    gain: DMatrix<f64>,
    posterior_cov: DMatrix<f64>,
}

impl Innovation {
    fn new(g: &Gaussian, mm: &MeasurementModel) -> Result<Self> {
        let h = &mm.observation;
        let cov = symmetrize(&(h * g.cov() * h.transpose() + &mm.noise));
        let cov_chol = cholesky(&cov)?;
        let pht = g.cov() * h.transpose();
        let gain = cov_chol.solve(&pht.transpose()).transpose();
        let posterior_cov = symmetrize(&(g.cov() - &gain * &cov * gain.transpose()));
        Ok(Self { predicted: h * g.mean(), cov, cov_chol, gain, posterior_cov })
    }

    fn distance_sq(&self, z: &DVector<f64>) -> f64 {
        let d = z - &self.predicted;
        d.dot(&self.cov_chol.solve(&d))
    }

    fn ln_likelihood(&self, z: &DVector<f64>) -> Result<f64> {
        ln_normal(z, &self.predicted, &self.cov)
    }

    fn posterior(&self, g: &Gaussian, z: &DVector<f64>) -> Result<Gaussian> {
        Gaussian::new(g.mean() + &self.gain * (z - &self.predicted), self.posterior_cov.clone())
    }
}

/// Placeholder density for a new track that cannot exist (no PPP mass at all).
fn placeholder_density(z: &DVector<f64>, mm: &MeasurementModel, dim: usize) -> Result<Gaussian> {
    let h = &mm.observation;
    let hht = h * h.transpose();
    let mean = h.transpose() * cholesky(&hht)?.solve(z);
    Gaussian::new(mean, DMatrix::identity(dim, dim) * 1e6)
}

/// Measurement update.
///
/// Every local hypothesis spawns a missed-detection hypothesis and one
/// detection hypothesis per gated measurement; every measurement starts a new
/// track whose two hypotheses are "explained by an existing track" (empty) and
/// "new object or clutter". Global hypotheses are extended with Murty's
/// algorithm, splitting `fp.murty_k` among the prior globals in proportion to
/// their weights.
pub fn update(
    pmbm: &PmbmDensity,
    measurements: &[DVector<f64>],
    mm: &MeasurementModel,
    fp: &FilterParams,
) -> Result<PmbmDensity> {
    let nz = mm.measurement_dim();
    for z in measurements {
        if z.len() != nz {
            return Err(Error::DimensionMismatch { expected: nz, actual: z.len() });
        }
    }
    let pd = mm.detection_prob;
    let m = measurements.len();
    let n_old = pmbm.tracks.len();

    // Per (track, prior local hypothesis): index of the missed hypothesis, and of
    // the detection hypothesis for each gated measurement.
    let mut tracks: Vec<Vec<LocalHypothesis<GaussianFamily>>> = Vec::with_capacity(n_old + m);
    let mut miss_idx: Vec<Vec<usize>> = Vec::with_capacity(n_old);
    let mut det_idx: Vec<Vec<Vec<Option<usize>>>> = Vec::with_capacity(n_old);
    for track in &pmbm.tracks {
        let mut new_track = Vec::new();
        let mut miss_t = Vec::with_capacity(track.len());
        let mut det_t = Vec::with_capacity(track.len());
        for hyp in track {
            let Bernoulli { r, density } = &hyp.bernoulli;
            let rho_miss = 1.0 - r * pd;
            let r_miss = if rho_miss > 0.0 { (r * (1.0 - pd) / rho_miss).clamp(0.0, 1.0) } else { 0.0 };
            miss_t.push(new_track.len());
            new_track.push(LocalHypothesis {
                log_weight: ln_or_floor(rho_miss),
                bernoulli: Bernoulli { r: r_miss, density: density.clone() },
                assigned: None,
            });

            let mut det_h = vec![None; m];
            if *r > 0.0 && pd > 0.0 {
                let inn = Innovation::new(density, mm)?;
                for (j, z) in measurements.iter().enumerate() {
                    if inn.distance_sq(z) >= fp.gate {
                        continue;
                    }
                    let log_weight = r.ln() + pd.ln() + inn.ln_likelihood(z)?;
                    det_h[j] = Some(new_track.len());
                    new_track.push(LocalHypothesis {
                        log_weight,
                        bernoulli: Bernoulli { r: 1.0, density: inn.posterior(density, z)? },
                        assigned: Some(j),
                    });
                }
            }
            det_t.push(det_h);
        }
        tracks.push(new_track);
        miss_idx.push(miss_t);
        det_idx.push(det_t);
    }

    // New tracks, one per measurement.
    let dim = pmbm.ppp.dim().or_else(|| pmbm.tracks.first().map(|t| t[0].bernoulli.density.dim()));
    let ppp_innovations = if pd > 0.0 {
        pmbm.ppp
            .components()
            .iter()
            .map(|(w, g)| Ok((w.ln(), g, Innovation::new(g, mm)?)))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let mut ln_rho_new = Vec::with_capacity(m);
    for (j, z) in measurements.iter().enumerate() {
        let mut ln_parts = Vec::with_capacity(ppp_innovations.len());
        let mut posteriors = Vec::with_capacity(ppp_innovations.len());
        for (ln_w, g, inn) in &ppp_innovations {
            ln_parts.push(ln_w + pd.ln() + inn.ln_likelihood(z)?);
            posteriors.push(inn.posterior(g, z)?);
        }
        let ln_detected = log_sum_exp(&ln_parts);
        let clutter = mm.clutter_intensity(z);
        let ln_clutter = if clutter > 0.0 { clutter.ln() } else { f64::NEG_INFINITY };
        let ln_rho = log_sum_exp(&[ln_clutter, ln_detected]);
        let (r, density) = if posteriors.is_empty() {
            let d = dim.ok_or_else(|| {
                Error::InvalidParameter("cannot infer state dimension for a new track".into())
            })?;
            (0.0, placeholder_density(z, mm, d)?)
        } else {
            let weights = normalise_log_weights(&ln_parts);
            let density = moment_match(weights.iter().copied().zip(posteriors.iter()))?;
            let r = if ln_rho.is_finite() { (ln_detected - ln_rho).exp().clamp(0.0, 1.0) } else { 0.0 };
            (r, density)
        };
        let ln_rho = if ln_rho.is_finite() { ln_rho.max(LN_FLOOR) } else { LN_FLOOR };
        ln_rho_new.push(ln_rho);
        tracks.push(vec![
            LocalHypothesis {
                log_weight: 0.0,
                bernoulli: Bernoulli { r: 0.0, density: density.clone() },
                assigned: None,
            },
            LocalHypothesis { log_weight: ln_rho, bernoulli: Bernoulli { r, density }, assigned: Some(j) },
        ]);
    }

    // Global hypotheses.
    let mut new_globals: Vec<(f64, Vec<usize>)> = Vec::new();
    for g in &pmbm.globals {
        if g.weight <= 0.0 {
            continue;
        }
        let mut pair = DMatrix::from_element(n_old, m, f64::INFINITY);
        let mut unassigned = vec![0.0; n_old];
        for (i, &h) in g.local_indices.iter().enumerate() {
            unassigned[i] = -tracks[i][miss_idx[i][h]].log_weight;
            for (j, d) in det_idx[i][h].iter().enumerate() {
                if let Some(d) = d {
                    pair[(i, j)] = -tracks[i][*d].log_weight + ln_rho_new[j];
                }
            }
        }
        let problem = AssignmentProblem::new(pair, &unassigned)?;
        let k = ((fp.murty_k as f64) * g.weight).ceil().max(1.0) as usize;
        for a in murty_kbest(&problem, k) {
            let mut indices = Vec::with_capacity(n_old + m);
            let mut taken = vec![false; m];
            for (i, &col) in a.row_to_col.iter().enumerate() {
                let h = g.local_indices[i];
                if col < m {
                    taken[col] = true;
                    indices.push(det_idx[i][h][col].expect("finite cost implies gated"));
                } else {
                    indices.push(miss_idx[i][h]);
                }
            }
            indices.extend(taken.iter().map(|&t| if t { 0 } else { 1 }));
            new_globals.push((g.weight.ln() - a.total_cost, indices));
        }
    }
    let ln_w: Vec<f64> = new_globals.iter().map(|(w, _)| *w).collect();
    let weights = normalise_log_weights(&ln_w);
    let globals = new_globals
        .into_iter()
        .zip(weights)
        .map(|((_, local_indices), weight)| GlobalHypothesis { weight, local_indices })
        .collect();

    let ppp = pmbm.ppp.scaled(1.0 - pd);
    Ok(Pmbm { ppp, tracks, globals, partners: m })
}

/// Hypothesis reduction: drop light globals, drop tracks that are (nearly)
/// non-existent under every surviving global, discard unused local
/// hypotheses, merge duplicate globals and prune/merge the PPP.
pub fn reduce<F: DensityFamily>(pmbm: &Pmbm<F>, fp: &FilterParams) -> Pmbm<F> {
    let ppp = F::intensity_reduce(&pmbm.ppp, &fp.intensity_reduction());
    if pmbm.globals.is_empty() {
        return Pmbm { ppp, tracks: Vec::new(), globals: Vec::new(), partners: 0 };
    }

    let mut globals: Vec<GlobalHypothesis> =
        pmbm.globals.iter().filter(|g| g.weight >= fp.mb_prune).cloned().collect();
    if globals.is_empty() {
        globals.push(pmbm.globals[pmbm.best_global().expect("non-empty")].clone());
    }

    let keep_track: Vec<bool> = (0..pmbm.tracks.len())
        .map(|t| {
            globals
                .iter()
                .any(|g| pmbm.tracks[t][g.local_indices[t]].bernoulli.r >= fp.bern_exist_prune)
        })
        .collect();

    let mut tracks = Vec::new();
    let mut remaps = Vec::new();
    for (t, track) in pmbm.tracks.iter().enumerate() {
        if !keep_track[t] {
            continue;
        }
        let mut used = vec![false; track.len()];
        for g in &globals {
            used[g.local_indices[t]] = true;
        }
        let mut remap = vec![usize::MAX; track.len()];
        let mut kept = Vec::new();
        for (h, hyp) in track.iter().enumerate() {
            if used[h] {
                remap[h] = kept.len();
                kept.push(hyp.clone());
            }
        }
        tracks.push(kept);
        remaps.push((t, remap));
    }

    let mut merged: Vec<GlobalHypothesis> = Vec::new();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    for g in &globals {
        let key: Vec<usize> = remaps.iter().map(|(t, remap)| remap[g.local_indices[*t]]).collect();
        match seen.get(&key) {
            Some(&ix) => merged[ix].weight += g.weight,
            None => {
                seen.insert(key.clone(), merged.len());
                merged.push(GlobalHypothesis { weight: g.weight, local_indices: key });
            }
        }
    }
    let total: f64 = merged.iter().map(|g| g.weight).sum();
    for g in &mut merged {
        g.weight /= total;
    }

    let mut out = Pmbm { ppp, tracks, globals: merged, partners: pmbm.partners };
    out.retire_associations();
    out
}

/// Means of the Bernoullis with `r > 0.5` under the highest-weight global.
pub fn estimate(pmbm: &PmbmDensity) -> Vec<DVector<f64>> {
    match pmbm.best_global() {
        None => Vec::new(),
        Some(g) => pmbm
            .selected(g)
            .filter(|h| h.bernoulli.r > 0.5)
            .map(|h| h.bernoulli.density.mean().clone())
            .collect(),
    }
}

/// Track-oriented PMB projection: each track's Bernoulli is the
/// global-weight-marginalised mixture of its local hypotheses, collapsed to
/// one density. Zero-existence tracks are dropped.
pub fn project_to_pmb_to<F: DensityFamily>(pmbm: &Pmbm<F>) -> Result<Pmb<F>> {
    let mut bernoullis = Vec::with_capacity(pmbm.tracks.len());
    for (t, track) in pmbm.tracks.iter().enumerate() {
        let mut beta = vec![0.0; track.len()];
        for g in &pmbm.globals {
            beta[g.local_indices[t]] += g.weight;
        }
        let r: f64 = beta.iter().zip(track).map(|(b, h)| b * h.bernoulli.r).sum();
        if !(r > 0.0) {
            continue;
        }
        let parts: Vec<(f64, &F::Density)> = beta
            .iter()
            .zip(track)
            .filter(|(b, h)| **b * h.bernoulli.r > 0.0)
            .map(|(b, h)| (b * h.bernoulli.r / r, &h.bernoulli.density))
            .collect();
        bernoullis.push(Bernoulli { r: r.min(1.0), density: F::merge(&parts)? });
    }
    Ok(Pmb { ppp: pmbm.ppp.clone(), bernoullis })
}

/// GNN PMB projection: the Bernoullis of the highest-weight global.
pub fn project_to_pmb_gnn<F: DensityFamily>(pmbm: &Pmbm<F>) -> Pmb<F> {
    let bernoullis = match pmbm.best_global() {
        None => Vec::new(),
        Some(g) => pmbm
            .selected(g)
            .filter(|h| h.bernoulli.r > 0.0)
            .map(|h| h.bernoulli.clone())
            .collect(),
    };
    Pmb { ppp: pmbm.ppp.clone(), bernoullis }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rfs::{validate, PmbDensity};
    use approx::assert_relative_eq;

    fn scalar_motion(ps: f64, q: f64, birth: f64) -> MotionModel {
        let shape = GaussianMixture::single(1.0, Gaussian::scalar(0.0, 100.0).unwrap()).unwrap();
        MotionModel::new(
            DMatrix::identity(1, 1),
            DMatrix::from_element(1, 1, q),
            ps,
            shape,
            BirthSchedule { first_step: birth, later_steps: birth },
        )
        .unwrap()
    }

    fn scalar_measurement(pd: f64, clutter: f64) -> MeasurementModel {
        MeasurementModel::new(
            DMatrix::identity(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            pd,
            clutter,
            Region::new(vec![(-50.0, 50.0)]).unwrap(),
        )
        .unwrap()
    }

    fn single_bernoulli(r: f64, m: f64) -> PmbmDensity {
        Pmbm::from_pmb(PmbDensity::new(
            GaussianMixture::empty(),
            vec![Bernoulli::new(r, Gaussian::scalar(m, 1.0).unwrap()).unwrap()],
        ))
    }

    #[test]
    fn predict_identity_dynamics_is_noop() {
        let pmbm = single_bernoulli(0.8, 2.0);
        let motion = MotionModel::new(
            DMatrix::identity(1, 1),
            DMatrix::zeros(1, 1),
            1.0,
            GaussianMixture::empty(),
            BirthSchedule { first_step: 0.0, later_steps: 0.0 },
        )
        .unwrap();
        assert_eq!(predict(&pmbm, &motion, 3).unwrap(), pmbm);
    }

    #[test]
    fn predict_scales_existence() {
        let out = predict(&single_bernoulli(0.8, 0.0), &scalar_motion(0.99, 0.1, 0.0), 2).unwrap();
        assert_relative_eq!(out.tracks[0][0].bernoulli.r, 0.792, epsilon = 1e-15);
    }

    #[test]
    fn missed_detection_update() {
        let mm = scalar_measurement(0.9, 0.0);
        let out = update(&single_bernoulli(0.5, 0.0), &[], &mm, &FilterParams::default()).unwrap();
        assert_relative_eq!(out.tracks[0][0].bernoulli.r, 0.05 / 0.55, epsilon = 1e-15);
        assert!(validate(&out).is_empty());

        let mm = scalar_measurement(0.0, 0.0);
        let prior = single_bernoulli(0.5, 0.0);
        let out = update(&prior, &[], &mm, &FilterParams::default()).unwrap();
        assert_eq!(out.tracks[0][0].bernoulli, prior.tracks[0][0].bernoulli);
        assert_eq!(out.globals, prior.globals);
    }

    #[test]
    fn far_measurement_spawns_one_track() {
        let mut prior = single_bernoulli(0.9, 0.0);
        prior.ppp = GaussianMixture::single(0.5, Gaussian::scalar(0.0, 10.0).unwrap()).unwrap();
        let mm = scalar_measurement(0.9, 5.0);
        let z = DVector::from_element(1, 40.0);
        let out = update(&prior, &[z], &mm, &FilterParams::default()).unwrap();
        assert_eq!(out.tracks.len(), 2);
        assert_eq!(out.tracks[0].len(), 1, "only the missed hypothesis survives gating");
        assert_eq!(out.globals.len(), 1);
        assert!(validate(&out).is_empty());
    }

    #[test]
    fn reduce_drops_light_globals() {
        let mm = scalar_measurement(0.9, 5.0);
        let mut prior = single_bernoulli(0.9, 0.0);
        prior.ppp = GaussianMixture::single(0.5, Gaussian::scalar(0.0, 10.0).unwrap()).unwrap();
        let zs = [DVector::from_element(1, 0.3), DVector::from_element(1, -0.4)];
        let fp = FilterParams::default();
        let out = update(&prior, &zs, &mm, &fp).unwrap();
        assert!(out.globals.len() > 1);
        let mut tweaked = out.clone();
        tweaked.globals[1].weight = 1e-6;
        let total: f64 = tweaked.globals.iter().map(|g| g.weight).sum();
        tweaked.globals.iter_mut().for_each(|g| g.weight /= total);
        let reduced = reduce(&tweaked, &fp);
        let sum: f64 = reduced.globals.iter().map(|g| g.weight).sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        assert!(reduced.globals.iter().all(|g| g.weight >= fp.mb_prune));
        assert!(validate(&reduced).is_empty());
    }

    #[test]
    fn reduce_caps_ppp() {
        let comps = (0..40)
            .map(|i| (0.1, Gaussian::scalar(10.0 * i as f64, 1.0).unwrap()))
            .collect();
        let pmbm = PmbmDensity::from_ppp(GaussianMixture::new(comps).unwrap());
        assert!(reduce(&pmbm, &FilterParams::default()).ppp.len() <= 30);
    }

    #[test]
    fn reduce_keeps_valid_density_unchanged() {
        let pmbm = single_bernoulli(0.7, 1.0);
        assert_eq!(reduce(&pmbm, &FilterParams::default()), pmbm);
    }

    fn two_global(weights: [f64; 2], rs: [f64; 2], means: [f64; 2]) -> PmbmDensity {
        let hyp = |r, m| LocalHypothesis::<GaussianFamily> {
            log_weight: 0.0,
            bernoulli: Bernoulli::new(r, Gaussian::scalar(m, 1.0).unwrap()).unwrap(),
            assigned: None,
        };
        Pmbm {
            ppp: GaussianMixture::empty(),
            tracks: vec![vec![hyp(rs[0], means[0]), hyp(rs[1], means[1])]],
            globals: vec![
                GlobalHypothesis { weight: weights[0], local_indices: vec![0] },
                GlobalHypothesis { weight: weights[1], local_indices: vec![1] },
            ],
            partners: 0,
        }
    }

    #[test]
    fn estimate_reads_best_global() {
        assert!(estimate(&PmbmDensity::from_ppp(GaussianMixture::empty())).is_empty());
        let est = estimate(&two_global([0.6, 0.4], [0.9, 0.9], [1.0, -1.0]));
        assert_eq!(est, vec![DVector::from_element(1, 1.0)]);
        let mut two = Pmbm::from_pmb(PmbDensity::new(
            GaussianMixture::empty(),
            vec![
                Bernoulli::new(0.9, Gaussian::scalar(3.0, 1.0).unwrap()).unwrap(),
                Bernoulli::new(0.3, Gaussian::scalar(5.0, 1.0).unwrap()).unwrap(),
            ],
        ));
        two.partners = 0;
        assert_eq!(estimate(&two), vec![DVector::from_element(1, 3.0)]);
    }

    #[test]
    fn track_oriented_projection_moment_matches() {
        let pmb = project_to_pmb_to(&two_global([0.5, 0.5], [1.0, 1.0], [-1.0, 1.0])).unwrap();
        assert_eq!(pmb.bernoullis.len(), 1);
        assert_relative_eq!(pmb.bernoullis[0].r, 1.0, epsilon = 1e-15);
        assert_relative_eq!(pmb.bernoullis[0].density.mean()[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(pmb.bernoullis[0].density.cov()[(0, 0)], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn gnn_projection_copies_best_global() {
        let pmbm = two_global([0.7, 0.3], [0.8, 0.6], [2.0, -2.0]);
        let pmb = project_to_pmb_gnn(&pmbm);
        assert_eq!(pmb.bernoullis, vec![pmbm.tracks[0][0].bernoulli.clone()]);
        let single = single_bernoulli(0.4, 1.0);
        assert_eq!(project_to_pmb_gnn(&single), project_to_pmb_to(&single).unwrap());
    }

    #[test]
    fn rejects_wrong_measurement_dimension() {
        let mm = scalar_measurement(0.9, 1.0);
        let z = DVector::from_element(2, 0.0);
        assert!(matches!(
            update(&single_bernoulli(0.5, 0.0), &[z], &mm, &FilterParams::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
