//! GOSPA metric with `alpha = 2` and its decomposition.

use nalgebra::{DMatrix, DVector};

use crate::assignment::{best_assignment, AssignmentProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GospaParams {
    c: f64,
    p: f64,
}

impl GospaParams {
    pub fn new(c: f64, p: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("GOSPA cutoff {c} must be positive")));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("GOSPA order {p} must be at least 1")));
        }
        Ok(Self { c, p })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        2.0
    }
}

impl Default for GospaParams {
    fn default() -> Self {
        Self { c: 10.0, p: 2.0 }
    }
}

/// Total GOSPA and its three components, each a p-th power cost.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct GospaResult {
    pub total: f64,
    pub localisation: f64,
    pub missed: f64,
    pub false_: f64,
}

/// GOSPA distance between a ground-truth set and an estimated set.
pub fn gospa(truth: &[DVector<f64>], estimate: &[DVector<f64>], params: &GospaParams) -> GospaResult {
    let (c, p) = (params.c, params.p);
    let unassigned = c.powf(p) / 2.0;
    let n = truth.len();
    let m = estimate.len();

    let (localisation, assigned) = if n == 0 || m == 0 {
        (0.0, 0)
    } else {
        // rows are truths; a pair only helps when d < c, where d^p < 2 * c^p / 2
        let mut pair = DMatrix::from_element(n, m, f64::INFINITY);
        for (i, x) in truth.iter().enumerate() {
            for (j, y) in estimate.iter().enumerate() {
                let d = (x - y).norm();
                if d < c {
                    pair[(i, j)] = d.powf(p) - 2.0 * unassigned;
                }
            }
        }
        let problem = AssignmentProblem::new(pair, &vec![0.0; n]).expect("well-formed problem");
        let a = best_assignment(&problem);
        let mut loc = 0.0;
        let mut count = 0;
        for (i, j) in a.pairs(m) {
            loc += (&truth[i] - &estimate[j]).norm().powf(p);
            count += 1;
        }
        (loc, count)
    };

    let missed = unassigned * (n - assigned) as f64;
    let false_ = unassigned * (m - assigned) as f64;
    let total = (localisation + missed + false_).powf(1.0 / p);
    GospaResult { total, localisation, missed, false_ }
}

/// Root-mean-square GOSPA per step and overall.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RmsGospa {
    /// RMS of the totals over runs, per step.
    pub per_step: Vec<f64>,
    /// RMS of the localisation, missed and false costs' p-th roots, per step.
    pub per_step_localisation: Vec<f64>,
    pub per_step_missed: Vec<f64>,
    pub per_step_false: Vec<f64>,
    pub overall: f64,
}

/// RMS over runs (outer index) for each step (inner index), and over all entries.
pub fn rms_gospa(per_run_per_step: &[Vec<GospaResult>], p: f64) -> Result<RmsGospa> {
    let runs = per_run_per_step.len();
    let steps = per_run_per_step.first().map_or(0, Vec::len);
    if runs == 0 || steps == 0 {
        return Err(Error::InvalidParameter("RMS-GOSPA needs at least one run and one step".into()));
    }
    if per_run_per_step.iter().any(|r| r.len() != steps) {
        return Err(Error::InvalidParameter("runs have different numbers of steps".into()));
    }
    let rms_of = |f: &dyn Fn(&GospaResult) -> f64| -> Vec<f64> {
        (0..steps)
            .map(|k| {
                let s: f64 = per_run_per_step.iter().map(|r| f(&r[k]).powi(2)).sum();
                (s / runs as f64).sqrt()
            })
            .collect()
    };
    let per_step = rms_of(&|g| g.total);
    let per_step_localisation = rms_of(&|g| g.localisation.powf(1.0 / p));
    let per_step_missed = rms_of(&|g| g.missed.powf(1.0 / p));
    let per_step_false = rms_of(&|g| g.false_.powf(1.0 / p));
    let overall = (per_step.iter().map(|v| v * v).sum::<f64>() / steps as f64).sqrt();
    Ok(RmsGospa { per_step, per_step_localisation, per_step_missed, per_step_false, overall })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn identical_sets_cost_nothing() {
        let xs = vec![pt(0.0, 0.0), pt(5.0, 5.0)];
        assert_eq!(gospa(&xs, &xs, &GospaParams::default()), GospaResult::default());
    }

    #[test]
    fn one_missed_object() {
        let r = gospa(&[pt(0.0, 0.0)], &[], &GospaParams::default());
        assert!((r.total - 50f64.sqrt()).abs() < 1e-12);
        assert_eq!((r.missed, r.localisation, r.false_), (50.0, 0.0, 0.0));
    }

    #[test]
    fn far_estimate_counts_as_missed_and_false() {
        let r = gospa(&[pt(0.0, 0.0)], &[pt(20.0, 0.0)], &GospaParams::default());
        assert_eq!((r.missed, r.false_, r.localisation), (50.0, 50.0, 0.0));
    }

    #[test]
    fn rms_arithmetic() {
        let g = |t| GospaResult { total: t, ..Default::default() };
        let r = rms_gospa(&[vec![g(3.0)], vec![g(4.0)]], 2.0).unwrap();
        assert!((r.per_step[0] - 12.5f64.sqrt()).abs() < 1e-12);
        assert!(rms_gospa(&[], 2.0).is_err());
    }
}
