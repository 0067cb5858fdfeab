//! JSON documents for Gaussian PMB and PMBM densities.
//!
//! A PMB document looks like
//!
//! ```json
//! {
//!   "ppp": [{ "weight": 1.0, "mean": [10.0, 10.0], "cov": [[20.0, 0.0], [0.0, 20.0]] }],
//!   "bernoullis": [{ "r": 0.9, "mean": [0.0, 0.0], "cov": [[1.0, 0.0], [0.0, 1.0]] }]
//! }
//! ```
//!
//! Covariances are lists of rows.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{Gaussian, GaussianMixture};
use crate::rfs::{Bernoulli, BernoulliComponent, GlobalHypothesis, LocalHypothesis, PmbDensity, PmbmDensity, Pmbm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDoc {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliDoc {
    pub r: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmbDoc {
    #[serde(default)]
    pub ppp: Vec<ComponentDoc>,
    #[serde(default)]
    pub bernoullis: Vec<BernoulliDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalHypothesisDoc {
    pub log_weight: f64,
    pub r: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub assigned: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalHypothesisDoc {
    pub weight: f64,
    pub local_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmbmDoc {
    pub ppp: Vec<ComponentDoc>,
    pub tracks: Vec<Vec<LocalHypothesisDoc>>,
    pub globals: Vec<GlobalHypothesisDoc>,
    pub partners: usize,
}

fn cov_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn gaussian_from(mean: &[f64], cov: &[Vec<f64>]) -> Result<Gaussian> {
    let n = mean.len();
    if cov.len() != n || cov.iter().any(|r| r.len() != n) {
        return Err(Error::Format(format!("covariance must be {n}x{n}")));
    }
    let flat: Vec<f64> = cov.iter().flatten().copied().collect();
    Gaussian::new(DVector::from_column_slice(mean), DMatrix::from_row_slice(n, n, &flat))
}

fn ppp_doc(gm: &GaussianMixture) -> Vec<ComponentDoc> {
    gm.components()
        .iter()
        .map(|(w, g)| ComponentDoc { weight: *w, mean: g.mean().iter().copied().collect(), cov: cov_rows(g.cov()) })
        .collect()
}

fn ppp_from(docs: &[ComponentDoc]) -> Result<GaussianMixture> {
    let comps = docs
        .iter()
        .map(|c| Ok((c.weight, gaussian_from(&c.mean, &c.cov)?)))
        .collect::<Result<Vec<_>>>()?;
    GaussianMixture::new(comps)
}

impl From<&PmbDensity> for PmbDoc {
    fn from(pmb: &PmbDensity) -> Self {
        Self {
            ppp: ppp_doc(&pmb.ppp),
            bernoullis: pmb
                .bernoullis
                .iter()
                .map(|b| BernoulliDoc {
                    r: b.r,
                    mean: b.density.mean().iter().copied().collect(),
                    cov: cov_rows(b.density.cov()),
                })
                .collect(),
        }
    }
}

impl TryFrom<&PmbDoc> for PmbDensity {
    type Error = Error;

    fn try_from(doc: &PmbDoc) -> Result<Self> {
        let ppp = ppp_from(&doc.ppp)?;
        let bernoullis = doc
            .bernoullis
            .iter()
            .map(|b| Bernoulli::new(b.r, gaussian_from(&b.mean, &b.cov)?))
            .collect::<Result<Vec<BernoulliComponent>>>()?;
        let dims: Vec<usize> = ppp
            .dim()
            .into_iter()
            .chain(bernoullis.iter().map(|b| b.density.dim()))
            .collect();
        if let Some(&d) = dims.first() {
            if let Some(&bad) = dims.iter().find(|&&x| x != d) {
                return Err(Error::DimensionMismatch { expected: d, actual: bad });
            }
        }
        Ok(PmbDensity::new(ppp, bernoullis))
    }
}

impl From<&PmbmDensity> for PmbmDoc {
    fn from(pmbm: &PmbmDensity) -> Self {
        Self {
            ppp: ppp_doc(&pmbm.ppp),
            tracks: pmbm
                .tracks
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|h| LocalHypothesisDoc {
                            log_weight: h.log_weight,
                            r: h.bernoulli.r,
                            mean: h.bernoulli.density.mean().iter().copied().collect(),
                            cov: cov_rows(h.bernoulli.density.cov()),
                            assigned: h.assigned,
                        })
                        .collect()
                })
                .collect(),
            globals: pmbm
                .globals
                .iter()
                .map(|g| GlobalHypothesisDoc { weight: g.weight, local_indices: g.local_indices.clone() })
                .collect(),
            partners: pmbm.partners,
        }
    }
}

impl TryFrom<&PmbmDoc> for PmbmDensity {
    type Error = Error;

    fn try_from(doc: &PmbmDoc) -> Result<Self> {
        let tracks = doc
            .tracks
            .iter()
            .map(|t| {
                t.iter()
                    .map(|h| {
                        Ok(LocalHypothesis {
                            log_weight: h.log_weight,
                            bernoulli: Bernoulli::new(h.r, gaussian_from(&h.mean, &h.cov)?)?,
                            assigned: h.assigned,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let globals = doc
            .globals
            .iter()
            .map(|g| GlobalHypothesis { weight: g.weight, local_indices: g.local_indices.clone() })
            .collect();
        Ok(Pmbm { ppp: ppp_from(&doc.ppp)?, tracks, globals, partners: doc.partners })
    }
}

pub fn pmb_to_json(pmb: &PmbDensity) -> String {
    serde_json::to_string_pretty(&PmbDoc::from(pmb)).expect("plain data serialises")
}

pub fn pmb_from_json(text: &str) -> Result<PmbDensity> {
    let doc: PmbDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    PmbDensity::try_from(&doc)
}

pub fn pmbm_to_json(pmbm: &PmbmDensity) -> String {
    serde_json::to_string_pretty(&PmbmDoc::from(pmbm)).expect("plain data serialises")
}

pub fn pmbm_from_json(text: &str) -> Result<PmbmDensity> {
    let doc: PmbmDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    PmbmDensity::try_from(&doc)
}

/// Reads a PMB document; I/O failures name the path.
pub fn read_pmb(path: &Path) -> Result<PmbDensity> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    pmb_from_json(&text).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}
