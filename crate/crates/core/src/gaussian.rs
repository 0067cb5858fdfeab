//! Gaussian and Gaussian-mixture primitives.
//!
//! Everything here is a pure function on immutable values. Covariances are
//! symmetrised before every factorisation and determinants are taken in log
//! space from the Cholesky factor, so the closed-form constants (`kappa`,
//! product scales) stay finite in higher dimensions.

use std::f64::consts::PI;

use nalgebra::{linalg::Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;

/// A normalised multivariate Gaussian density `N(x; mean, cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// `scale * N(x; mean, cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledGaussian {
    pub scale: f64,
    pub gaussian: Gaussian,
}

/// Unnormalised Gaussian mixture, used both for PPP intensities and for
/// unnormalised single-object densities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GaussianMixture {
    components: Vec<(f64, Gaussian)>,
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    symmetrize(m).cholesky().ok_or(Error::NotPositiveDefinite)
}

fn ln_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// `ln N(x; mean, cov)` without constructing a [`Gaussian`].
pub(crate) fn ln_normal(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    if x.len() != mean.len() {
        return Err(Error::DimensionMismatch { expected: mean.len(), actual: x.len() });
    }
    let chol = cholesky(cov)?;
    let diff = x - mean;
    let quad = diff.dot(&chol.solve(&diff));
    let d = x.len() as f64;
    Ok(-0.5 * (d * (2.0 * PI).ln() + ln_det(&chol) + quad))
}

impl Gaussian {
    /// Builds a Gaussian, checking dimensions, symmetry and positive definiteness.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return Err(Error::InvalidParameter("zero-dimensional Gaussian".into()));
        }
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: cov.nrows() });
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        if (&cov - cov.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::NotPositiveDefinite);
        }
        let cov = symmetrize(&cov);
        if cov.iter().any(|v| !v.is_finite()) || mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Gaussian parameter".into()));
        }
        cov.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        Ok(Self { mean, cov })
    }

    pub fn from_slices(mean: &[f64], cov: &[f64]) -> Result<Self> {
        let n = mean.len();
        if cov.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: cov.len() });
        }
        Self::new(DVector::from_column_slice(mean), DMatrix::from_row_slice(n, n, cov))
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        Self::from_slices(&[mean], &[var])
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn ln_pdf(&self, x: &DVector<f64>) -> Result<f64> {
        ln_normal(x, &self.mean, &self.cov)
    }

    pub fn pdf(&self, x: &DVector<f64>) -> Result<f64> {
        self.ln_pdf(x).map(f64::exp)
    }

    fn check_dim(&self, other: &Gaussian) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(())
    }
}

impl ScaledGaussian {
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.scale * self.gaussian.pdf(x)?)
    }
}

impl GaussianMixture {
    /// Builds a mixture; weights must be positive and all components share a dimension.
    pub fn new(components: Vec<(f64, Gaussian)>) -> Result<Self> {
        if let Some((_, first)) = components.first() {
            let d = first.dim();
            for (w, g) in &components {
                if !(*w > 0.0) || !w.is_finite() {
                    return Err(Error::InvalidParameter(format!("mixture weight {w} must be positive")));
                }
                if g.dim() != d {
                    return Err(Error::DimensionMismatch { expected: d, actual: g.dim() });
                }
            }
        }
        Ok(Self { components })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(weight: f64, g: Gaussian) -> Result<Self> {
        Self::new(vec![(weight, g)])
    }

    pub fn components(&self) -> &[(f64, Gaussian)] {
        &self.components
    }

    pub fn into_components(self) -> Vec<(f64, Gaussian)> {
        self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.components.first().map(|(_, g)| g.dim())
    }

    /// Integral of the mixture, i.e. the expected cardinality of a PPP.
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        self.components
            .iter()
            .map(|(w, g)| g.pdf(x).map(|p| w * p))
            .sum()
    }

    /// Multiplies every weight by `factor` (components with a zero result are dropped).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|(w, g)| (w * factor, g.clone()))
                .filter(|(w, _)| *w > 0.0)
                .collect(),
        }
    }

    /// Concatenation of two mixtures (sum of intensities).
    pub fn concat(&self, other: &Self) -> Self {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Self { components }
    }
}

/// Product of two Gaussian densities: `N(x; m1, P1) N(x; m2, P2) = alpha N(x; m, P)` with
/// `alpha = N(m1; m2, P1 + P2)`.
pub fn gaussian_product(g1: &Gaussian, g2: &Gaussian) -> Result<ScaledGaussian> {
    g1.check_dim(g2)?;
    let s = &g1.cov + &g2.cov;
    let chol = cholesky(&s)?;
    let diff = &g2.mean - &g1.mean;
    // K = P1 S^-1, so mean = m1 + K (m2 - m1) and P = P1 - K P1.
    let gain = chol.solve(&g1.cov).transpose();
    let mean = &g1.mean + &gain * &diff;
    let cov = symmetrize(&(&g1.cov - &gain * &g1.cov));
    let ln_scale = {
        let d = diff.len() as f64;
        -0.5 * (d * (2.0 * PI).ln() + ln_det(&chol) + diff.dot(&chol.solve(&diff)))
    };
    let gaussian = Gaussian::new(mean, cov)?;
    Ok(ScaledGaussian { scale: ln_scale.exp(), gaussian })
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::InvalidOmega(omega));
    }
    Ok(())
}

/// `ln kappa(omega, P)`, see [`kappa`].
pub fn ln_kappa(omega: f64, cov: &DMatrix<f64>) -> Result<f64> {
    check_omega(omega)?;
    let chol = cholesky(cov)?;
    let d = cov.nrows() as f64;
    let ln_det_2pi_p = d * (2.0 * PI).ln() + ln_det(&chol);
    Ok(0.5 * (1.0 - omega) * ln_det_2pi_p - 0.5 * d * omega.ln())
}

/// `kappa(omega, P) = |2 pi P / omega|^(1/2) / |2 pi P|^(omega/2)`, the integral of
/// `N(x; m, P)^omega` over `x`.
pub fn kappa(omega: f64, cov: &DMatrix<f64>) -> Result<f64> {
    ln_kappa(omega, cov).map(f64::exp)
}

/// `N(x; m, P)^omega = kappa(omega, P) N(x; m, P / omega)`.
pub fn gaussian_power(g: &Gaussian, omega: f64) -> Result<ScaledGaussian> {
    let scale = kappa(omega, &g.cov)?;
    let gaussian = Gaussian::new(g.mean.clone(), &g.cov / omega)?;
    Ok(ScaledGaussian { scale, gaussian })
}

/// Component-wise power of a mixture. The result upper-bounds the exact
/// pointwise power `gm(x)^omega` for `omega` in (0, 1].
pub fn mixture_power(gm: &GaussianMixture, omega: f64) -> Result<GaussianMixture> {
    check_omega(omega)?;
    let components = gm
        .components
        .iter()
        .map(|(w, g)| {
            let p = gaussian_power(g, omega)?;
            Ok((w.powf(omega) * p.scale, p.gaussian))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GaussianMixture { components })
}

/// Pointwise product of two mixtures; one output component per pair of inputs.
/// Pairs whose weight underflows to zero are dropped.
pub fn mixture_product(a: &GaussianMixture, b: &GaussianMixture) -> Result<GaussianMixture> {
    if let (Some(da), Some(db)) = (a.dim(), b.dim()) {
        if da != db {
            return Err(Error::DimensionMismatch { expected: da, actual: db });
        }
    }
    let mut components = Vec::with_capacity(a.len() * b.len());
    for (w1, g1) in &a.components {
        for (w2, g2) in &b.components {
            let prod = gaussian_product(g1, g2)?;
            let w = w1 * w2 * prod.scale;
            if w > 0.0 {
                components.push((w, prod.gaussian));
            }
        }
    }
    Ok(GaussianMixture { components })
}

/// Squared Mahalanobis distance `(m1 - m2)^T (P1 + P2)^-1 (m1 - m2)`.
pub fn mahalanobis_sq(g1: &Gaussian, g2: &Gaussian) -> Result<f64> {
    g1.check_dim(g2)?;
    let chol = cholesky(&(&g1.cov + &g2.cov))?;
    let diff = &g1.mean - &g2.mean;
    Ok(diff.dot(&chol.solve(&diff)).max(0.0))
}

/// The Gaussian with the first two moments of the normalised mixture.
pub fn moment_match<'a, I>(components: I) -> Result<Gaussian>
where
    I: IntoIterator<Item = (f64, &'a Gaussian)>,
{
    let components: Vec<(f64, &Gaussian)> = components.into_iter().collect();
    let (_, first) = components.first().ok_or(Error::EmptyMixture)?;
    if components.len() == 1 {
        return Ok((*first).clone());
    }
    let n = first.dim();
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidParameter("moment matching needs positive total weight".into()));
    }
    let mut mean = DVector::zeros(n);
    for (w, g) in &components {
        if g.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: g.dim() });
        }
        mean += &g.mean * (w / total);
    }
    let mut cov = DMatrix::zeros(n, n);
    for (w, g) in &components {
        let d = &g.mean - &mean;
        cov += (&g.cov + &d * d.transpose()) * (w / total);
    }
    Gaussian::new(mean, symmetrize(&cov))
}

/// Prune, merge, then cap a mixture.
///
/// Components with weight below `prune_thresh` are removed. The heaviest
/// remaining component then absorbs (by moment matching) every component whose
/// mean lies within squared Mahalanobis distance `merge_thresh` of its own
/// mean, measured with the absorbing covariance; this repeats on the
/// remainder, and whole passes repeat until nothing merges. Finally only the
/// `max_components` heaviest components are kept. Merging never changes the
/// total weight.
pub fn prune_merge_mixture(
    gm: &GaussianMixture,
    prune_thresh: f64,
    merge_thresh: f64,
    max_components: usize,
) -> GaussianMixture {
    let mut comps: Vec<(f64, Gaussian)> = gm
        .components
        .iter()
        .filter(|(w, _)| *w >= prune_thresh)
        .cloned()
        .collect();

    loop {
        let before = comps.len();
        comps = merge_pass(comps, merge_thresh);
        if comps.len() == before {
            break;
        }
    }

    comps.sort_by(|a, b| b.0.total_cmp(&a.0));
    comps.truncate(max_components.max(1));
    GaussianMixture { components: comps }
}

fn merge_pass(mut comps: Vec<(f64, Gaussian)>, merge_thresh: f64) -> Vec<(f64, Gaussian)> {
    comps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out = Vec::with_capacity(comps.len());
    while !comps.is_empty() {
        let (head_w, head) = comps.remove(0);
        let Ok(chol) = cholesky(head.cov()) else {
            out.push((head_w, head));
            continue;
        };
        let mut group = vec![(head_w, head.clone())];
        let mut rest = Vec::with_capacity(comps.len());
        for (w, g) in comps.drain(..) {
            let d = g.mean() - head.mean();
            if d.dot(&chol.solve(&d)) < merge_thresh {
                group.push((w, g));
            } else {
                rest.push((w, g));
            }
        }
        comps = rest;
        if group.len() == 1 {
            out.push((head_w, head));
        } else {
            let total: f64 = group.iter().map(|(w, _)| w).sum();
            let merged = moment_match(group.iter().map(|(w, g)| (*w, g))).unwrap_or(head);
            out.push((total, merged));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        assert_eq!(
            Gaussian::from_slices(&[0.0, 0.0], &[1.0, 0.5, 0.0, 1.0]).unwrap_err(),
            Error::NotPositiveDefinite
        );
        assert_eq!(
            Gaussian::from_slices(&[0.0, 0.0], &[1.0, 2.0, 2.0, 1.0]).unwrap_err(),
            Error::NotPositiveDefinite
        );
        assert!(matches!(
            Gaussian::new(v(&[0.0]), DMatrix::identity(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn product_of_equal_unit_gaussians() {
        let g = Gaussian::new(v(&[3.0, -1.0]), DMatrix::identity(2, 2)).unwrap();
        let p = gaussian_product(&g, &g).unwrap();
        assert_relative_eq!(p.scale, 1.0 / (4.0 * PI), max_relative = 1e-12);
        assert_relative_eq!(p.gaussian.mean(), g.mean(), epsilon = 1e-12);
        assert_relative_eq!(p.gaussian.cov(), &(DMatrix::identity(2, 2) * 0.5), epsilon = 1e-12);
    }

    #[test]
    fn product_dimension_mismatch() {
        let a = Gaussian::scalar(0.0, 1.0).unwrap();
        let b = Gaussian::new(v(&[0.0, 0.0]), DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(gaussian_product(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kappa_rejects_bad_omega() {
        let p = DMatrix::identity(1, 1);
        assert_eq!(kappa(0.0, &p).unwrap_err(), Error::InvalidOmega(0.0));
        assert_eq!(kappa(1.5, &p).unwrap_err(), Error::InvalidOmega(1.5));
        assert_relative_eq!(kappa(1.0, &(p * 7.0)).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn kappa_stays_finite_in_high_dimension() {
        let p = DMatrix::identity(40, 40) * 1e-3;
        let k = kappa(0.5, &p).unwrap();
        assert!(k.is_finite() && k > 0.0);
        let p = DMatrix::identity(40, 40) * 1e4;
        assert!(kappa(0.5, &p).unwrap().is_finite());
    }

    #[test]
    fn mahalanobis_example() {
        let a = Gaussian::scalar(0.0, 1.0).unwrap();
        let b = Gaussian::scalar(2.0, 1.0).unwrap();
        assert_relative_eq!(mahalanobis_sq(&a, &b).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(mahalanobis_sq(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn moment_match_two_symmetric_components() {
        let a = Gaussian::scalar(-1.0, 1.0).unwrap();
        let b = Gaussian::scalar(1.0, 1.0).unwrap();
        let m = moment_match([(0.5, &a), (0.5, &b)]).unwrap();
        assert_relative_eq!(m.mean()[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(m.cov()[(0, 0)], 2.0, epsilon = 1e-14);
        assert_eq!(moment_match(std::iter::empty()).unwrap_err(), Error::EmptyMixture);
        assert_eq!(moment_match([(0.3, &a)]).unwrap(), a);
    }

    #[test]
    fn prune_merge_examples() {
        let g = Gaussian::scalar(0.0, 1.0).unwrap();
        let gm = GaussianMixture::new(vec![(0.5, g.clone()), (0.5, g.clone())]).unwrap();
        let out = prune_merge_mixture(&gm, 1e-5, 0.1, 30);
        assert_eq!(out.len(), 1);
        assert_relative_eq!(out.components()[0].0, 1.0, epsilon = 1e-15);
        assert_relative_eq!(out.components()[0].1.cov()[(0, 0)], 1.0, epsilon = 1e-14);

        let far = Gaussian::scalar(50.0, 1.0).unwrap();
        let gm = GaussianMixture::new(vec![(1e-6, g.clone()), (0.9, far.clone())]).unwrap();
        let out = prune_merge_mixture(&gm, 1e-5, 0.1, 30);
        assert_eq!(out.components(), &[(0.9, far.clone())]);

        let gm = GaussianMixture::new(vec![(0.2, g.clone()), (0.7, far.clone())]).unwrap();
        let out = prune_merge_mixture(&gm, 1e-5, 0.1, 30);
        assert_eq!(out.components(), &[(0.7, far), (0.2, g)]);
    }

    #[test]
    fn prune_merge_caps_component_count() {
        let comps = (0..40)
            .map(|i| (1.0 + i as f64, Gaussian::scalar(10.0 * i as f64, 1.0).unwrap()))
            .collect();
        let out = prune_merge_mixture(&GaussianMixture::new(comps).unwrap(), 1e-5, 0.1, 30);
        assert_eq!(out.len(), 30);
        assert_relative_eq!(out.components()[0].0, 40.0);
    }

    #[test]
    fn mixture_rejects_nonpositive_weight() {
        let g = Gaussian::scalar(0.0, 1.0).unwrap();
        assert!(GaussianMixture::new(vec![(0.0, g)]).is_err());
    }
}
