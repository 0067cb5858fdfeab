//! Fusion of two PMB densities.
//!
//! [`fuse_gci`] computes the weighted geometric mean of two PMB densities
//! using the closed-form power of a PMB and returns the normalised product as
//! a PMBM in track-oriented form. [`fuse_aa`] is the arithmetic-average
//! baseline.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::assignment::{murty_kbest, AssignmentProblem};
use crate::error::{Error, Result};
use crate::family::DensityFamily;
use crate::filter::FilterParams;
use crate::numeric::{ln_or_floor, normalise_log_weights};
use crate::rfs::{Bernoulli, GlobalHypothesis, LocalHypothesis, Pmb, Pmbm};

/// Weight and existence given to a Bernoulli-Bernoulli pair hypothesis in
/// [`fuse_gci`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairWeight {
    /// `rho = r1 r2 <p1, p2>` with `r = 1`: the pair hypothesis means both
    /// Bernoullis describe the same existing object, and the case where both
    /// are absent belongs to the hypothesis leaving them unassigned. The
    /// fused PMBM equals the normalised product exactly.
    #[default]
    Exact,
    /// `rho = (1 - r1)(1 - r2) + r1 r2 <p1, p2>` as in [`fuse_bernoulli_bernoulli`].
    /// The both-absent case is then counted by the pair hypothesis and by the
    /// unassigned one.
    Published,
}

impl fmt::Display for PairWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairWeight::Exact => "exact",
            PairWeight::Published => "published",
        })
    }
}

impl FromStr for PairWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(PairWeight::Exact),
            "published" => Ok(PairWeight::Published),
            other => Err(Error::InvalidParameter(format!("unknown pair weight `{other}` (exact or published)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    omega: f64,
    pub gate: f64,
    pub murty_k: usize,
    pub aa_gate: f64,
    pub pair_weight: PairWeight,
}

impl FusionParams {
    pub fn new(omega: f64, gate: f64, murty_k: usize, aa_gate: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < 1.0) {
            return Err(Error::InvalidOmega(omega));
        }
        if !(gate >= 0.0) || !(aa_gate >= 0.0) {
            return Err(Error::InvalidParameter("gates must be non-negative".into()));
        }
        if murty_k == 0 {
            return Err(Error::InvalidParameter("murty_k must be positive".into()));
        }
        Ok(Self { omega, gate, murty_k, aa_gate, pair_weight: PairWeight::default() })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Same parameters without gating.
    pub fn ungated(self) -> Self {
        Self { gate: f64::INFINITY, ..self }
    }

    pub fn with_pair_weight(self, pair_weight: PairWeight) -> Self {
        Self { pair_weight, ..self }
    }
}

impl Default for FusionParams {
    fn default() -> Self {
        Self { omega: 0.5, gate: 20.0, murty_k: 200, aa_gate: 5.0, pair_weight: PairWeight::default() }
    }
}

/// Power of a Bernoulli component up to the PMB-level normalising constant.
pub fn bernoulli_power<F: DensityFamily>(b: &Bernoulli<F>, omega: f64) -> Result<Bernoulli<F>> {
    let (scale, density) = F::density_power(&b.density, omega)?;
    let r = if b.r <= 0.0 {
        0.0
    } else if b.r >= 1.0 {
        1.0
    } else {
        let present = b.r.powf(omega) * scale;
        present / ((1.0 - b.r).powf(omega) + present)
    };
    Ok(Bernoulli { r, density })
}

/// Approximates `f^omega` by an unnormalised PMB and returns its normalised
/// form: mixture power for the PPP and a Bernoulli power per component.
pub fn pmb_power_approx<F: DensityFamily>(pmb: &Pmb<F>, omega: f64) -> Result<Pmb<F>> {
    let ppp = F::intensity_power(&pmb.ppp, omega)?;
    let bernoullis = pmb
        .bernoullis
        .iter()
        .map(|b| bernoulli_power(b, omega))
        .collect::<Result<Vec<_>>>()?;
    Ok(Pmb { ppp, bernoullis })
}

/// Product of two PPP intensities, then pruned and merged.
pub fn fuse_ppp<F: DensityFamily>(
    l1: &F::Intensity,
    l2: &F::Intensity,
    agent_fp: &FilterParams,
) -> Result<F::Intensity> {
    let prod = F::intensity_product(l1, l2)?;
    Ok(F::intensity_reduce(&prod, &agent_fp.intensity_reduction()))
}

/// Fusion of two Bernoullis: `(rho, fused Bernoulli)` with
/// `rho = (1 - r1)(1 - r2) + r1 r2 <p1, p2>`.
pub fn fuse_bernoulli_bernoulli<F: DensityFamily>(
    b1: &Bernoulli<F>,
    b2: &Bernoulli<F>,
) -> Result<(f64, Bernoulli<F>)> {
    let (inner, density) = F::density_product(&b1.density, &b2.density)?;
    let present = b1.r * b2.r * inner;
    let rho = (1.0 - b1.r) * (1.0 - b2.r) + present;
    let r = if rho > 0.0 { (present / rho).clamp(0.0, 1.0) } else { 0.0 };
    Ok((rho, Bernoulli { r, density }))
}

/// Pair hypothesis in which both Bernoullis exist and describe the same
/// object: `(r1 r2 <p1, p2>, Bernoulli with r = 1)`.
pub fn fuse_bernoulli_pair<F: DensityFamily>(
    b1: &Bernoulli<F>,
    b2: &Bernoulli<F>,
) -> Result<(f64, Bernoulli<F>)> {
    let (inner, density) = F::density_product(&b1.density, &b2.density)?;
    let rho = b1.r * b2.r * inner;
    let r = if rho > 0.0 { 1.0 } else { 0.0 };
    Ok((rho, Bernoulli { r, density }))
}

/// Fusion of a Bernoulli with a PPP intensity, counting only intensity
/// components within `gate`: `rho = 1 - r + r <p, lambda>`.
pub fn fuse_bernoulli_ppp<F: DensityFamily>(
    b: &Bernoulli<F>,
    lambda: &F::Intensity,
    gate: f64,
) -> Result<(f64, Bernoulli<F>)> {
    match F::density_intensity_product(&b.density, lambda, gate)? {
        Some((inner, density)) => {
            let present = b.r * inner;
            let rho = 1.0 - b.r + present;
            let r = if rho > 0.0 { (present / rho).clamp(0.0, 1.0) } else { 0.0 };
            Ok((rho, Bernoulli { r, density }))
        }
        None => Ok((1.0 - b.r, Bernoulli { r: 0.0, density: b.density.clone() })),
    }
}

/// GCI fusion with weight `omega` on `f1` and `1 - omega` on `f2`.
///
/// Tracks `0..n1` come from `f1`: hypothesis 0 leaves the Bernoulli
/// unassigned (fused with the other PPP) and the rest pair it with a gated
/// Bernoulli of `f2`. Tracks `n1..n1+n2` come from `f2`: hypothesis 0 is the
/// non-existent Bernoulli used when it is paired, hypothesis 1 leaves it
/// unassigned. Partners of the association are the Bernoullis of `f2`.
/// Pair hypotheses are weighted according to `fp.pair_weight`.
pub fn fuse_gci<F: DensityFamily>(
    f1: &Pmb<F>,
    f2: &Pmb<F>,
    fp: &FusionParams,
    agent_fp: &FilterParams,
) -> Result<Pmbm<F>> {
    let omega = fp.omega;
    let q1 = pmb_power_approx(f1, omega)?;
    let q2 = pmb_power_approx(f2, 1.0 - omega)?;
    let n1 = q1.bernoullis.len();
    let n2 = q2.bernoullis.len();

    let ppp = fuse_ppp::<F>(&q1.ppp, &q2.ppp, agent_fp)?;

    let mut tracks: Vec<Vec<LocalHypothesis<F>>> = Vec::with_capacity(n1 + n2);
    let mut unassigned_cost = Vec::with_capacity(n1);
    let mut pair_cost = DMatrix::from_element(n1, n2, f64::INFINITY);
    let mut pair_index = vec![vec![None; n2]; n1];

    let mut ln_rho_second = Vec::with_capacity(n2);
    let mut second_tracks = Vec::with_capacity(n2);
    for b in &q2.bernoullis {
        let (rho, fused) = fuse_bernoulli_ppp(b, &q1.ppp, fp.gate)?;
        let ln_rho = ln_or_floor(rho);
        ln_rho_second.push(ln_rho);
        let absent = Bernoulli { r: 0.0, density: fused.density.clone() };
        second_tracks.push((absent, ln_rho, fused));
    }

    for (i, b1) in q1.bernoullis.iter().enumerate() {
        let (rho, fused) = fuse_bernoulli_ppp(b1, &q2.ppp, fp.gate)?;
        let ln_rho = ln_or_floor(rho);
        unassigned_cost.push(-ln_rho);
        let mut track = vec![LocalHypothesis { log_weight: ln_rho, bernoulli: fused, assigned: None }];
        for (j, b2) in q2.bernoullis.iter().enumerate() {
            if fp.gate.is_finite() && F::association_distance(&b1.density, &b2.density)? >= fp.gate {
                continue;
            }
            let (rho, fused) = match fp.pair_weight {
                PairWeight::Exact => fuse_bernoulli_pair(b1, b2)?,
                PairWeight::Published => fuse_bernoulli_bernoulli(b1, b2)?,
            };
            if !(rho > 0.0) {
                continue;
            }
            let ln_rho = rho.ln();
            pair_cost[(i, j)] = -ln_rho + ln_rho_second[j];
            pair_index[i][j] = Some(track.len());
            track.push(LocalHypothesis { log_weight: ln_rho, bernoulli: fused, assigned: Some(j) });
        }
        tracks.push(track);
    }
    for (j, (absent, ln_rho, fused)) in second_tracks.into_iter().enumerate() {
        tracks.push(vec![
            LocalHypothesis { log_weight: 0.0, bernoulli: absent, assigned: None },
            LocalHypothesis { log_weight: ln_rho, bernoulli: fused, assigned: Some(j) },
        ]);
    }

    let problem = AssignmentProblem::new(pair_cost, &unassigned_cost)?;
    let assignments = murty_kbest(&problem, fp.murty_k);
    let ln_w: Vec<f64> = assignments.iter().map(|a| -a.total_cost).collect();
    let weights = normalise_log_weights(&ln_w);
    let globals = assignments
        .iter()
        .zip(weights)
        .map(|(a, weight)| {
            let mut local_indices = Vec::with_capacity(n1 + n2);
            let mut paired = vec![false; n2];
            for (i, &col) in a.row_to_col.iter().enumerate() {
                if col < n2 {
                    paired[col] = true;
                    local_indices.push(pair_index[i][col].expect("finite cost implies a pair hypothesis"));
                } else {
                    local_indices.push(0);
                }
            }
            local_indices.extend(paired.iter().map(|&p| if p { 0 } else { 1 }));
            GlobalHypothesis { weight, local_indices }
        })
        .collect();

    Ok(Pmbm { ppp, tracks, globals, partners: n2 })
}

/// Arithmetic-average fusion baseline.
///
/// The PPP is the weighted sum of both intensities. Bernoullis are paired
/// greedily in the order of `f1` with the closest unpaired Bernoulli of `f2`
/// whose squared Mahalanobis distance is below `aa_gate^2`. A pair becomes a
/// single Bernoulli with existence `omega r1 + (1 - omega) r2` and the
/// moment-matched density of the existence-weighted mixture; unpaired
/// Bernoullis keep their density with existence scaled by their agent weight.
pub fn fuse_aa<F: DensityFamily>(f1: &Pmb<F>, f2: &Pmb<F>, fp: &FusionParams) -> Result<Pmbm<F>> {
    let omega = fp.omega;
    let ppp = F::intensity_sum(
        &F::intensity_scaled(&f1.ppp, omega),
        &F::intensity_scaled(&f2.ppp, 1.0 - omega),
    );
    let gate_sq = fp.aa_gate * fp.aa_gate;
    let mut taken = vec![false; f2.bernoullis.len()];
    let mut bernoullis = Vec::with_capacity(f1.bernoullis.len() + f2.bernoullis.len());
    for b1 in &f1.bernoullis {
        let mut best: Option<(usize, f64)> = None;
        for (j, b2) in f2.bernoullis.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let d = F::association_distance(&b1.density, &b2.density)?;
            if d < gate_sq && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, _)) => {
                taken[j] = true;
                let b2 = &f2.bernoullis[j];
                let w1 = omega * b1.r;
                let w2 = (1.0 - omega) * b2.r;
                let r = w1 + w2;
                let density = if r > 0.0 {
                    F::merge(&[(w1 / r, &b1.density), (w2 / r, &b2.density)])?
                } else {
                    F::merge(&[(omega, &b1.density), (1.0 - omega, &b2.density)])?
                };
                bernoullis.push(Bernoulli { r: r.min(1.0), density });
            }
            None => bernoullis.push(Bernoulli { r: omega * b1.r, density: b1.density.clone() }),
        }
    }
    for (j, b2) in f2.bernoullis.iter().enumerate() {
        if !taken[j] {
            bernoullis.push(Bernoulli { r: (1.0 - omega) * b2.r, density: b2.density.clone() });
        }
    }
    Ok(Pmbm::from_pmb(Pmb { ppp, bernoullis }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::GaussianFamily;
    use crate::gaussian::{kappa, Gaussian, GaussianMixture};
    use crate::rfs::{validate, PmbDensity};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn b(r: f64, mean: f64) -> Bernoulli<GaussianFamily> {
        Bernoulli::new(r, Gaussian::scalar(mean, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn params_reject_bad_omega() {
        assert!(matches!(FusionParams::new(1.0, 20.0, 10, 5.0), Err(Error::InvalidOmega(_))));
        assert!(matches!(FusionParams::new(0.0, 20.0, 10, 5.0), Err(Error::InvalidOmega(_))));
        assert!(FusionParams::new(0.5, -1.0, 10, 5.0).is_err());
    }

    #[test]
    fn power_approx_half() {
        let k = kappa(0.5, &DMatrix::identity(1, 1)).unwrap();
        let q = bernoulli_power(&b(0.5, 0.0), 0.5).unwrap();
        let s = 0.5f64.sqrt();
        assert_relative_eq!(q.r, s * k / (s + s * k), epsilon = 1e-15);
        assert_relative_eq!(q.density.cov()[(0, 0)], 2.0, epsilon = 1e-15);
        let same = bernoulli_power(&b(0.3, 1.0), 1.0).unwrap();
        assert_relative_eq!(same.r, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn bernoulli_bernoulli_examples() {
        let (rho, fused) = fuse_bernoulli_bernoulli(&b(0.0, 0.0), &b(0.0, 3.0)).unwrap();
        assert_eq!((rho, fused.r), (1.0, 0.0));
        let (rho, fused) = fuse_bernoulli_bernoulli(&b(0.5, 0.0), &b(0.5, 2.0)).unwrap();
        let alpha = (-1.0f64).exp() / (4.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(rho, 0.25 + 0.25 * alpha, epsilon = 1e-14);
        assert_relative_eq!(fused.r, 0.25 * alpha / rho, epsilon = 1e-14);
    }

    #[test]
    fn bernoulli_ppp_gated_out() {
        let lam = GaussianMixture::single(2.0, Gaussian::scalar(100.0, 1.0).unwrap()).unwrap();
        let (rho, fused) = fuse_bernoulli_ppp(&b(0.7, 0.0), &lam, 20.0).unwrap();
        assert_relative_eq!(rho, 0.3, epsilon = 1e-15);
        assert_eq!(fused.r, 0.0);
    }

    #[test]
    fn fusion_with_pure_ppp_has_one_global() {
        let ppp = GaussianMixture::single(1.0, Gaussian::scalar(0.0, 10.0).unwrap()).unwrap();
        let f1 = PmbDensity::new(ppp.clone(), vec![b(0.8, 0.0), b(0.6, 4.0)]);
        let f2 = PmbDensity::new(ppp, Vec::new());
        let out = fuse_gci(&f1, &f2, &FusionParams::default(), &FilterParams::default()).unwrap();
        assert_eq!(out.tracks.len(), 2);
        assert!(out.tracks.iter().all(|t| t.len() == 1));
        assert_eq!(out.globals.len(), 1);
        assert!(validate(&out).is_empty());
    }

    #[test]
    fn aa_identical_inputs_self_associate() {
        let ppp = GaussianMixture::single(0.4, Gaussian::scalar(0.0, 10.0).unwrap()).unwrap();
        let f = PmbDensity::new(ppp, vec![b(0.8, 0.0), b(0.6, 10.0)]);
        let out = fuse_aa(&f, &f, &FusionParams::default()).unwrap();
        assert_eq!(out.tracks.len(), 2);
        for (t, orig) in out.tracks.iter().zip(&f.bernoullis) {
            assert_relative_eq!(t[0].bernoulli.r, orig.r, epsilon = 1e-15);
            assert_relative_eq!(t[0].bernoulli.density.mean()[0], orig.density.mean()[0], epsilon = 1e-12);
            assert_relative_eq!(t[0].bernoulli.density.cov()[(0, 0)], 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(out.ppp.total_weight(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn aa_far_apart_does_not_associate() {
        let f1 = PmbDensity::new(GaussianMixture::empty(), vec![b(0.8, 0.0)]);
        let f2 = PmbDensity::new(GaussianMixture::empty(), vec![b(0.6, 100.0)]);
        let out = fuse_aa(&f1, &f2, &FusionParams::default()).unwrap();
        assert_eq!(out.tracks.len(), 2);
        assert_relative_eq!(out.tracks[0][0].bernoulli.r, 0.4, epsilon = 1e-15);
        assert_relative_eq!(out.tracks[1][0].bernoulli.r, 0.3, epsilon = 1e-15);
    }
}
