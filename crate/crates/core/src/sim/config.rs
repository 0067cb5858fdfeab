//! Scenario configuration: a TOML document with one section per model.
//!
//! Every field has a default, so an empty document describes the standard
//! two-agent scenario. Overrides use dotted keys (`scenario.n_runs=1`,
//! `agent.1.detection_prob=0.8`); a bare key such as `n_runs=1` is accepted
//! when exactly one section has a field of that name.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{BirthSchedule, FilterParams, MeasurementModel, MotionModel, Region};
use crate::fusion::{FusionParams, PairWeight};
use crate::gaussian::{Gaussian, GaussianMixture};
use crate::gospa::GospaParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Projection {
    /// PMBM filter; only the fusion input is reduced to its best global hypothesis.
    PmbmGnn,
    /// PMB filter with track-oriented projection after every update and fusion.
    TrackOriented,
    /// PMB filter keeping only the best global hypothesis after every update and fusion.
    Gnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionRule {
    Gci,
    Aa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Distributed { projection: Projection, rule: FusionRule },
    Centralized,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Distributed { projection: Projection::PmbmGnn, rule: FusionRule::Gci },
        Variant::Distributed { projection: Projection::TrackOriented, rule: FusionRule::Gci },
        Variant::Distributed { projection: Projection::Gnn, rule: FusionRule::Gci },
        Variant::Distributed { projection: Projection::PmbmGnn, rule: FusionRule::Aa },
        Variant::Distributed { projection: Projection::TrackOriented, rule: FusionRule::Aa },
        Variant::Distributed { projection: Projection::Gnn, rule: FusionRule::Aa },
        Variant::Centralized,
    ];

    pub fn is_distributed(&self) -> bool {
        matches!(self, Variant::Distributed { .. })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Centralized => write!(f, "CPMBM"),
            Variant::Distributed { projection, rule } => {
                let p = match projection {
                    Projection::PmbmGnn => "DPMBM-GNNproj",
                    Projection::TrackOriented => "DPMB-TO",
                    Projection::Gnn => "DPMB-GNN",
                };
                let r = match rule {
                    FusionRule::Gci => "GCI",
                    FusionRule::Aa => "AA",
                };
                write!(f, "{p}-{r}")
            }
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .iter()
            .copied()
            .find(|v| v.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthMode {
    Scripted,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub steps: usize,
    pub n_runs: usize,
    pub seed: u64,
    pub fusion_period: usize,
    pub truth_mode: TruthMode,
    pub variants: Vec<Variant>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            steps: 81,
            n_runs: 100,
            seed: 1,
            fusion_period: 5,
            truth_mode: TruthMode::Scripted,
            variants: Variant::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionSection {
    pub tau: f64,
    pub noise: f64,
    pub survival_prob: f64,
    pub birth_mean: Vec<f64>,
    pub birth_cov_diag: Vec<f64>,
    pub birth_first_step: f64,
    pub birth_later_steps: f64,
}

impl Default for MotionSection {
    fn default() -> Self {
        Self {
            tau: 1.0,
            noise: 0.01,
            survival_prob: 0.99,
            birth_mean: vec![100.0, 0.0, 100.0, 0.0],
            birth_cov_diag: vec![150.0 * 150.0, 1.0, 150.0 * 150.0, 1.0],
            birth_first_step: 3.0,
            birth_later_steps: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSection {
    pub noise_var: f64,
    pub detection_prob: f64,
    pub clutter_rate: f64,
    pub region: Vec<[f64; 2]>,
}

impl Default for AgentSection {
    fn default() -> Self {
        Self {
            noise_var: 4.0,
            detection_prob: 0.9,
            clutter_rate: 10.0,
            region: vec![[0.0, 300.0], [0.0, 300.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub ppp_prune: f64,
    pub ppp_merge: f64,
    pub ppp_max: usize,
    pub mb_prune: f64,
    pub bern_exist_prune: f64,
    pub gate: f64,
    pub murty_k: usize,
}

impl Default for FilterSection {
    fn default() -> Self {
        let d = FilterParams::default();
        Self {
            ppp_prune: d.ppp_prune,
            ppp_merge: d.ppp_merge,
            ppp_max: d.ppp_max,
            mb_prune: d.mb_prune,
            bern_exist_prune: d.bern_exist_prune,
            gate: d.gate,
            murty_k: d.murty_k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionSection {
    pub omega: f64,
    pub gate: f64,
    pub murty_k: usize,
    pub aa_gate: f64,
    pub pair_weight: PairWeight,
}

impl Default for FusionSection {
    fn default() -> Self {
        let d = FusionParams::default();
        Self { omega: d.omega(), gate: d.gate, murty_k: d.murty_k, aa_gate: d.aa_gate, pair_weight: d.pair_weight }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GospaSection {
    pub c: f64,
    pub p: f64,
}

impl Default for GospaSection {
    fn default() -> Self {
        Self { c: 10.0, p: 2.0 }
    }
}

/// The complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub motion: MotionSection,
    #[serde(rename = "agent")]
    pub agents: Vec<AgentSection>,
    pub filter: FilterSection,
    pub fusion: FusionSection,
    pub gospa: GospaSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioSection::default(),
            motion: MotionSection::default(),
            agents: vec![AgentSection::default(), AgentSection::default()],
            filter: FilterSection::default(),
            fusion: FusionSection::default(),
            gospa: GospaSection::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Applies `key=value` overrides. Keys must name existing fields.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut doc = toml::Value::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        for ov in overrides {
            let ov = ov.as_ref();
            let (key, raw) = ov
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{ov}` is not key=value")))?;
            let path = resolve_key(&doc, key.trim())?;
            let value = parse_value(raw.trim());
            set_path(&mut doc, &path, value)?;
        }
        let cfg: Self = doc.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        if s.steps == 0 || s.fusion_period == 0 || s.n_runs == 0 {
            return Err(Error::Config("steps, n_runs and fusion_period must be at least 1".into()));
        }
        if self.agents.is_empty() {
            return Err(Error::Config("at least one [[agent]] is required".into()));
        }
        self.motion_model()?;
        for a in 0..self.agents.len() {
            self.measurement_model(a)?;
        }
        self.fusion_params()?;
        self.gospa_params()?;
        if self.filter.murty_k == 0 {
            return Err(Error::Config("filter.murty_k must be positive".into()));
        }
        Ok(())
    }

    pub fn motion_model(&self) -> Result<MotionModel> {
        let m = &self.motion;
        if m.birth_mean.len() != 4 || m.birth_cov_diag.len() != 4 {
            return Err(Error::Config("birth mean and covariance must have 4 entries".into()));
        }
        let birth = Gaussian::new(
            DVector::from_column_slice(&m.birth_mean),
            DMatrix::from_diagonal(&DVector::from_column_slice(&m.birth_cov_diag)),
        )
        .map_err(|e| Error::Config(format!("birth density: {e}")))?;
        let schedule = BirthSchedule { first_step: m.birth_first_step, later_steps: m.birth_later_steps };
        if !(schedule.first_step >= 0.0) || !(schedule.later_steps >= 0.0) {
            return Err(Error::Config("birth rates must be non-negative".into()));
        }
        MotionModel::ncv_2d(m.tau, m.noise, m.survival_prob, GaussianMixture::single(1.0, birth)?, schedule)
            .map_err(|e| Error::Config(format!("motion: {e}")))
    }

    pub fn measurement_model(&self, agent: usize) -> Result<MeasurementModel> {
        let a = self
            .agents
            .get(agent)
            .ok_or_else(|| Error::Config(format!("no agent {agent}")))?;
        let region = Region::new(a.region.iter().map(|[lo, hi]| (*lo, *hi)).collect())
            .map_err(|e| Error::Config(format!("agent {agent} region: {e}")))?;
        if !(a.noise_var > 0.0) {
            return Err(Error::Config(format!("agent {agent}: noise_var must be positive")));
        }
        MeasurementModel::position_2d(a.noise_var, a.detection_prob, a.clutter_rate, region)
            .map_err(|e| Error::Config(format!("agent {agent}: {e}")))
    }

    pub fn filter_params(&self) -> FilterParams {
        let f = &self.filter;
        FilterParams {
            ppp_prune: f.ppp_prune,
            ppp_merge: f.ppp_merge,
            ppp_max: f.ppp_max,
            mb_prune: f.mb_prune,
            bern_exist_prune: f.bern_exist_prune,
            gate: f.gate,
            murty_k: f.murty_k,
        }
    }

    pub fn fusion_params(&self) -> Result<FusionParams> {
        let f = &self.fusion;
        FusionParams::new(f.omega, f.gate, f.murty_k, f.aa_gate)
            .map(|p| p.with_pair_weight(f.pair_weight))
            .map_err(|e| Error::Config(format!("fusion: {e}")))
    }

    pub fn gospa_params(&self) -> Result<GospaParams> {
        GospaParams::new(self.gospa.c, self.gospa.p).map_err(|e| Error::Config(format!("gospa: {e}")))
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn resolve_key(doc: &toml::Value, key: &str) -> Result<Vec<String>> {
    let parts: Vec<String> = key.split('.').map(str::to_string).collect();
    if parts.len() > 1 {
        return Ok(parts);
    }
    let table = doc.as_table().expect("config is a table");
    let hits: Vec<&String> = table
        .iter()
        .filter(|(_, v)| v.as_table().is_some_and(|t| t.contains_key(key)))
        .map(|(k, _)| k)
        .collect();
    match hits.as_slice() {
        [section] => Ok(vec![(*section).clone(), key.to_string()]),
        [] => Err(Error::Config(format!("unknown configuration key `{key}`"))),
        _ => Err(Error::Config(format!("ambiguous key `{key}`; qualify it with a section"))),
    }
}

fn set_path(doc: &mut toml::Value, path: &[String], value: toml::Value) -> Result<()> {
    let full = path.join(".");
    let mut cur = doc;
    for (i, part) in path.iter().enumerate() {
        let last = i + 1 == path.len();
        let next = match cur {
            toml::Value::Table(t) => t.get_mut(part),
            toml::Value::Array(a) => part.parse::<usize>().ok().and_then(|ix| a.get_mut(ix)),
            _ => None,
        };
        let next = next.ok_or_else(|| Error::Config(format!("unknown configuration key `{full}`")))?;
        if last {
            *next = value;
            return Ok(());
        }
        cur = next;
    }
    Err(Error::Config(format!("empty configuration key `{full}`")))
}
