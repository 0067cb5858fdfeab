//! Random-finite-set density types: Bernoulli components, PMB densities and
//! PMBM densities in track-oriented form.
//!
//! A [`Pmbm`] stores, per track, a list of local hypotheses and, separately, a
//! list of global hypotheses that pick one local hypothesis per track. Global
//! weights are kept normalised. Each local hypothesis records which partner
//! (measurement, or Bernoulli of the other density during fusion) it was
//! associated with in the most recent association event, so the
//! disjoint-coverage constraints on global hypotheses can be checked.

use thiserror::Error;

use crate::error::{Error, Result};
use crate::family::{DensityFamily, GaussianFamily};

/// Existence probability plus single-object density.
#[derive(Debug, Clone, PartialEq)]
pub struct Bernoulli<F: DensityFamily> {
    pub r: f64,
    pub density: F::Density,
}

/// PPP intensity together with independent Bernoulli components.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmb<F: DensityFamily> {
    pub ppp: F::Intensity,
    pub bernoullis: Vec<Bernoulli<F>>,
}

/// One association option for a track.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHypothesis<F: DensityFamily> {
    /// Natural log of the (unnormalised) local weight.
    pub log_weight: f64,
    pub bernoulli: Bernoulli<F>,
    /// Partner index this hypothesis claimed in the latest association event.
    pub assigned: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalHypothesis {
    pub weight: f64,
    /// One local-hypothesis index per track.
    pub local_indices: Vec<usize>,
}

/// Poisson multi-Bernoulli mixture in track-oriented form.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmbm<F: DensityFamily> {
    pub ppp: F::Intensity,
    pub tracks: Vec<Vec<LocalHypothesis<F>>>,
    pub globals: Vec<GlobalHypothesis>,
    /// Number of partners in the latest association event (0 once retired).
    pub partners: usize,
}

pub type BernoulliComponent = Bernoulli<GaussianFamily>;
pub type PmbDensity = Pmb<GaussianFamily>;
pub type PmbmDensity = Pmbm<GaussianFamily>;

impl<F: DensityFamily> Bernoulli<F> {
    pub fn new(r: f64, density: F::Density) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("existence probability {r} outside [0, 1]")));
        }
        Ok(Self { r, density })
    }
}

impl<F: DensityFamily> Pmb<F> {
    pub fn new(ppp: F::Intensity, bernoullis: Vec<Bernoulli<F>>) -> Self {
        Self { ppp, bernoullis }
    }

    /// Expected number of objects in the multi-Bernoulli part.
    pub fn expected_mb_cardinality(&self) -> f64 {
        self.bernoullis.iter().map(|b| b.r).sum()
    }
}

impl<F: DensityFamily> LocalHypothesis<F> {
    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }
}

impl<F: DensityFamily> Pmbm<F> {
    /// Embeds a PMB: one local hypothesis per track and a single global of weight 1.
    pub fn from_pmb(pmb: Pmb<F>) -> Self {
        let tracks: Vec<Vec<LocalHypothesis<F>>> = pmb
            .bernoullis
            .into_iter()
            .map(|bernoulli| vec![LocalHypothesis { log_weight: 0.0, bernoulli, assigned: None }])
            .collect();
        let globals = vec![GlobalHypothesis { weight: 1.0, local_indices: vec![0; tracks.len()] }];
        Self { ppp: pmb.ppp, tracks, globals, partners: 0 }
    }

    /// A PPP-only density.
    pub fn from_ppp(ppp: F::Intensity) -> Self {
        Self::from_pmb(Pmb::new(ppp, Vec::new()))
    }

    /// Index of the highest-weight global hypothesis.
    pub fn best_global(&self) -> Option<usize> {
        self.globals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.weight.total_cmp(&b.1.weight))
            .map(|(i, _)| i)
    }

    /// Local hypotheses selected by global `g`, in track order.
    pub fn selected(&self, g: usize) -> impl Iterator<Item = &LocalHypothesis<F>> + '_ {
        self.globals[g]
            .local_indices
            .iter()
            .zip(&self.tracks)
            .map(|(&a, track)| &track[a])
    }

    /// Expected number of objects in the MBM part.
    pub fn expected_mbm_cardinality(&self) -> f64 {
        (0..self.globals.len())
            .map(|g| self.globals[g].weight * self.selected(g).map(|h| h.bernoulli.r).sum::<f64>())
            .sum()
    }

    /// Drops the association records once they no longer describe the current
    /// hypothesis structure.
    pub fn retire_associations(&mut self) {
        self.partners = 0;
        for track in &mut self.tracks {
            for h in track {
                h.assigned = None;
            }
        }
    }
}

/// `pmb_to_pmbm`: lossless embedding of a PMB.
pub fn pmb_to_pmbm<F: DensityFamily>(pmb: Pmb<F>) -> Pmbm<F> {
    Pmbm::from_pmb(pmb)
}

/// Number of assignment sets between `n1` and `n2` objects where every object
/// is assigned at most once: `sum_p p! C(n1, p) C(n2, p)`.
pub fn count_assignments(n1: u64, n2: u64) -> Result<u64> {
    let mut total: u64 = 0;
    // term(p) = n1! n2! / (p! (n1-p)! (n2-p)!), built incrementally:
    // term(p+1) = term(p) (n1-p)(n2-p) / (p+1)
    let mut term: u128 = 1;
    for p in 0..=n1.min(n2) {
        let t = u64::try_from(term).map_err(|_| Error::Overflow)?;
        total = total.checked_add(t).ok_or(Error::Overflow)?;
        term = term
            .checked_mul(u128::from(n1 - p))
            .and_then(|t| t.checked_mul(u128::from(n2 - p)))
            .ok_or(Error::Overflow)?
            / u128::from(p + 1);
    }
    Ok(total)
}

/// A broken structural invariant of a [`Pmbm`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("no global hypotheses")]
    NoGlobals,
    #[error("global weights sum to {0}, not 1")]
    WeightSum(f64),
    #[error("global {global} has weight {weight} outside [0, 1]")]
    WeightRange { global: usize, weight: f64 },
    #[error("global {global} has {found} local indices for {tracks} tracks")]
    IndexCount { global: usize, found: usize, tracks: usize },
    #[error("global {global} selects missing local hypothesis {index} of track {track}")]
    IndexOutOfRange { global: usize, track: usize, index: usize },
    #[error("track {0} has no local hypotheses")]
    EmptyTrack(usize),
    #[error("track {track} hypothesis {hyp} has non-finite log weight")]
    LocalWeight { track: usize, hyp: usize },
    #[error("track {track} hypothesis {hyp} has existence {r} outside [0, 1]")]
    Existence { track: usize, hyp: usize, r: f64 },
    #[error("track {track} hypothesis {hyp} claims partner {partner} of only {partners}")]
    PartnerOutOfRange { track: usize, hyp: usize, partner: usize, partners: usize },
    #[error("global {global} assigns partner {partner} more than once")]
    PartnerConflict { global: usize, partner: usize },
    #[error("global {global} leaves partner {partner} unexplained")]
    PartnerUncovered { global: usize, partner: usize },
}

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Lists every violated invariant; an empty list means the density is valid.
pub fn validate<F: DensityFamily>(pmbm: &Pmbm<F>) -> Vec<Violation> {
    let mut out = Vec::new();
    for (t, track) in pmbm.tracks.iter().enumerate() {
        if track.is_empty() {
            out.push(Violation::EmptyTrack(t));
        }
        for (h, hyp) in track.iter().enumerate() {
            if !hyp.log_weight.is_finite() {
                out.push(Violation::LocalWeight { track: t, hyp: h });
            }
            let r = hyp.bernoulli.r;
            if !(0.0..=1.0).contains(&r) {
                out.push(Violation::Existence { track: t, hyp: h, r });
            }
            if let Some(p) = hyp.assigned {
                if p >= pmbm.partners {
                    out.push(Violation::PartnerOutOfRange {
                        track: t,
                        hyp: h,
                        partner: p,
                        partners: pmbm.partners,
                    });
                }
            }
        }
    }
    if pmbm.globals.is_empty() {
        out.push(Violation::NoGlobals);
        return out;
    }
    let sum: f64 = pmbm.globals.iter().map(|g| g.weight).sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        out.push(Violation::WeightSum(sum));
    }
    for (gi, g) in pmbm.globals.iter().enumerate() {
        if !(0.0..=1.0).contains(&g.weight) {
            out.push(Violation::WeightRange { global: gi, weight: g.weight });
        }
        if g.local_indices.len() != pmbm.tracks.len() {
            out.push(Violation::IndexCount {
                global: gi,
                found: g.local_indices.len(),
                tracks: pmbm.tracks.len(),
            });
            continue;
        }
        let mut claimed = vec![0usize; pmbm.partners];
        for (t, &a) in g.local_indices.iter().enumerate() {
            match pmbm.tracks[t].get(a) {
                None => out.push(Violation::IndexOutOfRange { global: gi, track: t, index: a }),
                Some(hyp) => {
                    if let Some(p) = hyp.assigned.filter(|p| *p < pmbm.partners) {
                        claimed[p] += 1;
                    }
                }
            }
        }
        for (p, &c) in claimed.iter().enumerate() {
            match c {
                0 => out.push(Violation::PartnerUncovered { global: gi, partner: p }),
                1 => {}
                _ => out.push(Violation::PartnerConflict { global: gi, partner: p }),
            }
        }
    }
    out
}

/// Default cap on the set size accepted by [`evaluate_set_density`].
pub const DEFAULT_SET_CAP: usize = 6;

/// Anything that can be evaluated as a multi-object density.
pub trait SetDensity<F: DensityFamily> {
    /// Literal evaluation by enumerating all partitions of `xs`.
    fn evaluate_unchecked(&self, xs: &[F::State]) -> Result<f64>;
}

/// Sum over all ways of distributing `xs` between the PPP and the Bernoullis
/// (each Bernoulli taking at most one element), without the `exp(-mass)` factor.
fn partition_sum<F: DensityFamily>(
    xs: &[F::State],
    ppp: &F::Intensity,
    bernoullis: &[&Bernoulli<F>],
) -> Result<f64> {
    let lam: Vec<f64> = xs.iter().map(|x| F::intensity_at(ppp, x)).collect::<Result<_>>()?;
    let bern: Vec<Vec<f64>> = bernoullis
        .iter()
        .map(|b| {
            xs.iter()
                .map(|x| F::density_at(&b.density, x).map(|p| b.r * p))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    fn recurse(k: usize, used: &mut [bool], lam: &[f64], bern: &[Vec<f64>], miss: &[f64]) -> f64 {
        if k == lam.len() {
            return used
                .iter()
                .zip(miss)
                .filter(|(u, _)| !**u)
                .map(|(_, m)| m)
                .product();
        }
        let mut total = 0.0;
        if lam[k] != 0.0 {
            total += lam[k] * recurse(k + 1, used, lam, bern, miss);
        }
        for i in 0..used.len() {
            if !used[i] && bern[i][k] != 0.0 {
                used[i] = true;
                total += bern[i][k] * recurse(k + 1, used, lam, bern, miss);
                used[i] = false;
            }
        }
        total
    }

    let miss: Vec<f64> = bernoullis.iter().map(|b| 1.0 - b.r).collect();
    let mut used = vec![false; bernoullis.len()];
    Ok(recurse(0, &mut used, &lam, &bern, &miss))
}

impl<F: DensityFamily> SetDensity<F> for Pmb<F> {
    fn evaluate_unchecked(&self, xs: &[F::State]) -> Result<f64> {
        let refs: Vec<&Bernoulli<F>> = self.bernoullis.iter().collect();
        Ok((-F::intensity_mass(&self.ppp)).exp() * partition_sum::<F>(xs, &self.ppp, &refs)?)
    }
}

impl<F: DensityFamily> SetDensity<F> for Pmbm<F> {
    fn evaluate_unchecked(&self, xs: &[F::State]) -> Result<f64> {
        let mut total = 0.0;
        for g in 0..self.globals.len() {
            let refs: Vec<&Bernoulli<F>> = self.selected(g).map(|h| &h.bernoulli).collect();
            total += self.globals[g].weight * partition_sum::<F>(xs, &self.ppp, &refs)?;
        }
        Ok((-F::intensity_mass(&self.ppp)).exp() * total)
    }
}

/// Multi-object density value at the set `xs` (given as a list), computed by
/// exhaustive enumeration. Exponential in `xs.len()`; meant as a test oracle.
pub fn evaluate_set_density<F: DensityFamily, D: SetDensity<F>>(
    density: &D,
    xs: &[F::State],
    cap: usize,
) -> Result<f64> {
    if xs.len() > cap {
        return Err(Error::SetTooLarge { size: xs.len(), cap });
    }
    density.evaluate_unchecked(xs)
}
