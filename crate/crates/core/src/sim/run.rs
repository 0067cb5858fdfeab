//! Distributed and centralised filtering runs and their Monte Carlo aggregation.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::{
    estimate, predict, project_to_pmb_gnn, project_to_pmb_to, reduce, update, FilterParams,
    MeasurementModel, MotionModel,
};
use crate::fusion::{fuse_aa, fuse_gci, FusionParams};
use crate::gaussian::GaussianMixture;
use crate::gospa::{gospa, rms_gospa, GospaParams, GospaResult, RmsGospa};
use crate::rfs::{PmbDensity, PmbmDensity};
use crate::sim::config::{FusionRule, Projection, ScenarioConfig, TruthMode, Variant};
use crate::sim::measurements::generate_measurements;
use crate::sim::truth::{sampled_truth, scripted_truth, GroundTruth};

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Truth = 0,
    Measurements = 1,
}

/// Independent generator for `(run, agent, purpose)` under a master seed.
pub fn stream_rng(seed: u64, run: usize, agent: usize, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((run as u64) << 24) | ((agent as u64) << 8) | purpose as u64);
    rng
}

/// Everything a run consumes: the truth and one measurement stream per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInputs {
    pub truth: GroundTruth,
    /// `scans[agent][step - 1]`.
    pub scans: Vec<Vec<Vec<DVector<f64>>>>,
}

/// Resolved models for one scenario.
#[derive(Debug, Clone)]
pub struct Models {
    pub motion: MotionModel,
    pub sensors: Vec<MeasurementModel>,
    pub filter: FilterParams,
    pub fusion: FusionParams,
    pub gospa: GospaParams,
    pub steps: usize,
    pub fusion_period: usize,
}

impl Models {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        Ok(Self {
            motion: cfg.motion_model()?,
            sensors: (0..cfg.agents.len()).map(|a| cfg.measurement_model(a)).collect::<Result<_>>()?,
            filter: cfg.filter_params(),
            fusion: cfg.fusion_params()?,
            gospa: cfg.gospa_params()?,
            steps: cfg.scenario.steps,
            fusion_period: cfg.scenario.fusion_period,
        })
    }
}

pub fn generate_truth(cfg: &ScenarioConfig, run: usize) -> Result<GroundTruth> {
    match cfg.scenario.truth_mode {
        TruthMode::Scripted => Ok(scripted_truth(cfg.scenario.steps, cfg.motion.tau)),
        TruthMode::Sampled => {
            let mut rng = stream_rng(cfg.scenario.seed, run, 0, Purpose::Truth);
            sampled_truth(cfg.scenario.steps, &cfg.motion_model()?, &mut rng)
        }
    }
}

pub fn generate_inputs(cfg: &ScenarioConfig, models: &Models, run: usize) -> Result<RunInputs> {
    let truth = generate_truth(cfg, run)?;
    let scans = models
        .sensors
        .iter()
        .enumerate()
        .map(|(a, mm)| {
            let mut rng = stream_rng(cfg.scenario.seed, run, a, Purpose::Measurements);
            generate_measurements(&truth, mm, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(RunInputs { truth, scans })
}

/// Per-agent, per-step GOSPA of one run of one variant.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub variant: Variant,
    /// `gospa[agent][step - 1]`.
    pub gospa: Vec<Vec<GospaResult>>,
}

fn positions(models: &Models, states: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let h = &models.sensors[0].observation;
    states.iter().map(|x| h * x).collect()
}

fn score(models: &Models, inputs: &RunInputs, step: usize, density: &PmbmDensity) -> GospaResult {
    let truth: Vec<DVector<f64>> = inputs.truth.states_at(step).into_iter().cloned().collect();
    gospa(&positions(models, &truth), &positions(models, &estimate(density)), &models.gospa)
}

fn to_fusion_input(projection: Projection, pmbm: &PmbmDensity) -> Result<PmbDensity> {
    match projection {
        Projection::TrackOriented => project_to_pmb_to(pmbm),
        Projection::PmbmGnn | Projection::Gnn => Ok(project_to_pmb_gnn(pmbm)),
    }
}

/// The density an agent keeps after an update or fusion.
fn after_step(projection: Projection, pmbm: PmbmDensity) -> Result<PmbmDensity> {
    Ok(match projection {
        Projection::PmbmGnn => pmbm,
        Projection::TrackOriented => PmbmDensity::from_pmb(project_to_pmb_to(&pmbm)?),
        Projection::Gnn => PmbmDensity::from_pmb(project_to_pmb_gnn(&pmbm)),
    })
}

/// Fuses the agents' densities, folding left to right.
pub fn fuse_agents(
    states: &[PmbmDensity],
    projection: Projection,
    rule: FusionRule,
    models: &Models,
) -> Result<PmbmDensity> {
    let (first, rest) = states.split_first().ok_or_else(|| Error::InvalidParameter("no agents".into()))?;
    let mut acc = first.clone();
    for other in rest {
        let a = to_fusion_input(projection, &acc)?;
        let b = to_fusion_input(projection, other)?;
        let fused = match rule {
            FusionRule::Gci => fuse_gci(&a, &b, &models.fusion, &models.filter)?,
            FusionRule::Aa => fuse_aa(&a, &b, &models.fusion)?,
        };
        acc = after_step(projection, reduce(&fused, &models.filter))?;
    }
    Ok(acc)
}

fn empty_density() -> PmbmDensity {
    PmbmDensity::from_ppp(GaussianMixture::empty())
}

/// Each agent runs predict, update and reduce every step; every
/// `fusion_period` steps the agents fuse and all adopt the result.
pub fn run_distributed(
    models: &Models,
    inputs: &RunInputs,
    projection: Projection,
    rule: FusionRule,
) -> Result<RunResult> {
    let n_agents = models.sensors.len();
    let mut states = vec![empty_density(); n_agents];
    let mut out = vec![Vec::with_capacity(models.steps); n_agents];
    for step in 1..=models.steps {
        for (a, state) in states.iter_mut().enumerate() {
            let predicted = predict(state, &models.motion, step)?;
            let updated = update(&predicted, &inputs.scans[a][step - 1], &models.sensors[a], &models.filter)?;
            *state = after_step(projection, reduce(&updated, &models.filter))?;
        }
        if n_agents > 1 && step % models.fusion_period == 0 {
            let fused = fuse_agents(&states, projection, rule, models)?;
            states.iter_mut().for_each(|s| *s = fused.clone());
        }
        for (a, state) in states.iter().enumerate() {
            out[a].push(score(models, inputs, step, state));
        }
    }
    Ok(RunResult { variant: Variant::Distributed { projection, rule }, gospa: out })
}

/// One PMBM filter that predicts once per step and then updates with each
/// agent's scan in turn.
pub fn run_centralized(models: &Models, inputs: &RunInputs) -> Result<RunResult> {
    let mut state = empty_density();
    let mut out = Vec::with_capacity(models.steps);
    for step in 1..=models.steps {
        state = predict(&state, &models.motion, step)?;
        for (a, mm) in models.sensors.iter().enumerate() {
            let updated = update(&state, &inputs.scans[a][step - 1], mm, &models.filter)?;
            state = reduce(&updated, &models.filter);
        }
        out.push(score(models, inputs, step, &state));
    }
    Ok(RunResult { variant: Variant::Centralized, gospa: vec![out] })
}

pub fn run_variant(models: &Models, inputs: &RunInputs, variant: Variant) -> Result<RunResult> {
    match variant {
        Variant::Centralized => run_centralized(models, inputs),
        Variant::Distributed { projection, rule } => run_distributed(models, inputs, projection, rule),
    }
}

/// Results of all runs of one variant plus their RMS aggregation over runs and agents.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub variant: Variant,
    pub fusion_period: usize,
    /// One entry per run, in run order.
    pub runs: Vec<RunResult>,
    pub rms: RmsGospa,
}

/// Runs every configured variant on `n_runs` independent scenarios.
/// Runs execute in parallel on the current rayon pool; results do not depend
/// on the number of threads.
pub fn monte_carlo(cfg: &ScenarioConfig) -> Result<Vec<VariantResult>> {
    cfg.validate()?;
    let models = Models::from_config(cfg)?;
    let variants = &cfg.scenario.variants;
    let per_run: Vec<Vec<RunResult>> = (0..cfg.scenario.n_runs)
        .into_par_iter()
        .map(|run| {
            let inputs = generate_inputs(cfg, &models, run)?;
            variants.iter().map(|&v| run_variant(&models, &inputs, v)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    variants
        .iter()
        .enumerate()
        .map(|(vi, &variant)| {
            let runs: Vec<RunResult> = per_run.iter().map(|r| r[vi].clone()).collect();
            let flat: Vec<Vec<GospaResult>> = runs.iter().flat_map(|r| r.gospa.iter().cloned()).collect();
            let rms = rms_gospa(&flat, models.gospa.p())?;
            Ok(VariantResult { variant, fusion_period: cfg.scenario.fusion_period, runs, rms })
        })
        .collect()
}
