//! Densities on a finite state space.
//!
//! On a grid every operation the fusion rule needs is exact: powers and
//! products are pointwise and inner products are finite sums. That makes this
//! family a reference for checking the closed-form fusion against brute-force
//! set sums. States are grid indices.

use crate::error::{Error, Result};
use crate::family::{DensityFamily, IntensityReduction};

/// A probability mass function over grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPmf(Vec<f64>);

/// A non-negative intensity over grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridIntensity(Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GridFamily;

impl GridPmf {
    /// Normalises `masses`, which must be non-negative with a positive sum.
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidParameter("grid masses must be finite and non-negative".into()));
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("grid masses sum to zero".into()));
        }
        Ok(Self(masses.into_iter().map(|m| m / total).collect()))
    }

    pub fn masses(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl GridIntensity {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidParameter("grid intensity must be finite and non-negative".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn at(values: &[f64], x: usize) -> Result<f64> {
    values
        .get(x)
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("grid index {x} out of range")))
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, actual: b });
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::InvalidOmega(omega));
    }
    Ok(())
}

impl DensityFamily for GridFamily {
    type State = usize;
    type Density = GridPmf;
    type Intensity = GridIntensity;

    fn density_at(d: &GridPmf, x: &usize) -> Result<f64> {
        at(&d.0, *x)
    }

    fn intensity_at(l: &GridIntensity, x: &usize) -> Result<f64> {
        at(&l.0, *x)
    }

    fn intensity_mass(l: &GridIntensity) -> f64 {
        l.0.iter().sum()
    }

    fn density_power(d: &GridPmf, omega: f64) -> Result<(f64, GridPmf)> {
        check_omega(omega)?;
        let powered: Vec<f64> = d.0.iter().map(|p| p.powf(omega)).collect();
        let total: f64 = powered.iter().sum();
        Ok((total, GridPmf::new(powered)?))
    }

    fn intensity_power(l: &GridIntensity, omega: f64) -> Result<GridIntensity> {
        check_omega(omega)?;
        Ok(GridIntensity(l.0.iter().map(|v| v.powf(omega)).collect()))
    }

    fn density_product(a: &GridPmf, b: &GridPmf) -> Result<(f64, GridPmf)> {
        check_len(a.len(), b.len())?;
        let prod: Vec<f64> = a.0.iter().zip(&b.0).map(|(x, y)| x * y).collect();
        let inner: f64 = prod.iter().sum();
        if inner > 0.0 {
            Ok((inner, GridPmf::new(prod)?))
        } else {
            Ok((0.0, a.clone()))
        }
    }

    fn intensity_product(a: &GridIntensity, b: &GridIntensity) -> Result<GridIntensity> {
        check_len(a.0.len(), b.0.len())?;
        Ok(GridIntensity(a.0.iter().zip(&b.0).map(|(x, y)| x * y).collect()))
    }

    fn density_intensity_product(
        p: &GridPmf,
        l: &GridIntensity,
        _gate: f64,
    ) -> Result<Option<(f64, GridPmf)>> {
        check_len(p.len(), l.0.len())?;
        let prod: Vec<f64> = p.0.iter().zip(&l.0).map(|(x, y)| x * y).collect();
        let inner: f64 = prod.iter().sum();
        if inner > 0.0 {
            Ok(Some((inner, GridPmf::new(prod)?)))
        } else {
            Ok(None)
        }
    }

    fn association_distance(_a: &GridPmf, _b: &GridPmf) -> Result<f64> {
        Ok(0.0)
    }

    fn merge(components: &[(f64, &GridPmf)]) -> Result<GridPmf> {
        let (_, first) = components.first().ok_or(Error::EmptyMixture)?;
        let mut acc = vec![0.0; first.len()];
        for (w, d) in components {
            check_len(acc.len(), d.len())?;
            for (a, p) in acc.iter_mut().zip(&d.0) {
                *a += w * p;
            }
        }
        GridPmf::new(acc)
    }

    fn intensity_scaled(l: &GridIntensity, factor: f64) -> GridIntensity {
        GridIntensity(l.0.iter().map(|v| v * factor).collect())
    }

    fn intensity_sum(a: &GridIntensity, b: &GridIntensity) -> GridIntensity {
        let n = a.0.len().max(b.0.len());
        GridIntensity(
            (0..n)
                .map(|i| a.0.get(i).copied().unwrap_or(0.0) + b.0.get(i).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    fn intensity_reduce(l: &GridIntensity, _reduction: &IntensityReduction) -> GridIntensity {
        l.clone()
    }
}
