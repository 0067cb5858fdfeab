//! Single-object density families.
//!
//! The fusion and projection algebra only needs a handful of closed-form
//! operations on single-object densities and PPP intensities: powers,
//! products, inner products and merging. [`DensityFamily`] collects them so the
//! same code runs on the Gaussian implementation used by the filters and on
//! the exact discrete-grid family in [`crate::grid`].

use std::fmt::Debug;

use nalgebra::DVector;

use crate::error::Result;
use crate::gaussian::{
    gaussian_power, gaussian_product, mahalanobis_sq, mixture_power, mixture_product,
    moment_match, prune_merge_mixture, Gaussian, GaussianMixture,
};

/// Pruning/merging settings for PPP intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityReduction {
    pub prune: f64,
    pub merge: f64,
    pub max_components: usize,
}

impl IntensityReduction {
    /// Keeps every component.
    pub const NONE: Self = Self { prune: 0.0, merge: 0.0, max_components: usize::MAX };
}

pub trait DensityFamily: Clone + Debug + PartialEq + Send + Sync + 'static {
    type State: Clone + Debug;
    /// A normalised single-object density.
    type Density: Clone + Debug + PartialEq + Send + Sync;
    /// A non-negative, unnormalised intensity function.
    type Intensity: Clone + Debug + PartialEq + Send + Sync;

    fn density_at(d: &Self::Density, x: &Self::State) -> Result<f64>;
    fn intensity_at(l: &Self::Intensity, x: &Self::State) -> Result<f64>;
    fn intensity_mass(l: &Self::Intensity) -> f64;

    /// `(integral of p^omega, p^omega normalised)`.
    fn density_power(d: &Self::Density, omega: f64) -> Result<(f64, Self::Density)>;
    fn intensity_power(l: &Self::Intensity, omega: f64) -> Result<Self::Intensity>;

    /// `(<a, b>, a b / <a, b>)`. When the inner product is zero the returned
    /// density is only a placeholder.
    fn density_product(a: &Self::Density, b: &Self::Density) -> Result<(f64, Self::Density)>;
    fn intensity_product(a: &Self::Intensity, b: &Self::Intensity) -> Result<Self::Intensity>;
    /// `(<p, lambda>, p lambda / <p, lambda>)`, restricted to intensity components
    /// within `gate` of `p`. `None` when nothing contributes.
    fn density_intensity_product(
        p: &Self::Density,
        l: &Self::Intensity,
        gate: f64,
    ) -> Result<Option<(f64, Self::Density)>>;

    /// Distance used for gating associations; smaller is closer.
    fn association_distance(a: &Self::Density, b: &Self::Density) -> Result<f64>;

    /// Collapses a weighted set of densities to one member of the family.
    fn merge(components: &[(f64, &Self::Density)]) -> Result<Self::Density>;

    fn intensity_scaled(l: &Self::Intensity, factor: f64) -> Self::Intensity;
    fn intensity_sum(a: &Self::Intensity, b: &Self::Intensity) -> Self::Intensity;
    fn intensity_reduce(l: &Self::Intensity, reduction: &IntensityReduction) -> Self::Intensity;
}

/// Gaussian single-object densities with Gaussian-mixture intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GaussianFamily;

impl DensityFamily for GaussianFamily {
    type State = DVector<f64>;
    type Density = Gaussian;
    type Intensity = GaussianMixture;

    fn density_at(d: &Gaussian, x: &DVector<f64>) -> Result<f64> {
        d.pdf(x)
    }

    fn intensity_at(l: &GaussianMixture, x: &DVector<f64>) -> Result<f64> {
        l.eval(x)
    }

    fn intensity_mass(l: &GaussianMixture) -> f64 {
        l.total_weight()
    }

    fn density_power(d: &Gaussian, omega: f64) -> Result<(f64, Gaussian)> {
        let p = gaussian_power(d, omega)?;
        Ok((p.scale, p.gaussian))
    }

    fn intensity_power(l: &GaussianMixture, omega: f64) -> Result<GaussianMixture> {
        mixture_power(l, omega)
    }

    fn density_product(a: &Gaussian, b: &Gaussian) -> Result<(f64, Gaussian)> {
        let p = gaussian_product(a, b)?;
        Ok((p.scale, p.gaussian))
    }

    fn intensity_product(a: &GaussianMixture, b: &GaussianMixture) -> Result<GaussianMixture> {
        mixture_product(a, b)
    }

    fn density_intensity_product(
        p: &Gaussian,
        l: &GaussianMixture,
        gate: f64,
    ) -> Result<Option<(f64, Gaussian)>> {
        let mut parts = Vec::with_capacity(l.len());
        for (w, g) in l.components() {
            if mahalanobis_sq(p, g)? >= gate {
                continue;
            }
            let prod = gaussian_product(p, g)?;
            let weight = w * prod.scale;
            if weight > 0.0 {
                parts.push((weight, prod.gaussian));
            }
        }
        if parts.is_empty() {
            return Ok(None);
        }
        let inner: f64 = parts.iter().map(|(w, _)| w).sum();
        let density = moment_match(parts.iter().map(|(w, g)| (*w, g)))?;
        Ok(Some((inner, density)))
    }

    fn association_distance(a: &Gaussian, b: &Gaussian) -> Result<f64> {
        mahalanobis_sq(a, b)
    }

    fn merge(components: &[(f64, &Gaussian)]) -> Result<Gaussian> {
        moment_match(components.iter().copied())
    }

    fn intensity_scaled(l: &GaussianMixture, factor: f64) -> GaussianMixture {
        l.scaled(factor)
    }

    fn intensity_sum(a: &GaussianMixture, b: &GaussianMixture) -> GaussianMixture {
        a.concat(b)
    }

    fn intensity_reduce(l: &GaussianMixture, r: &IntensityReduction) -> GaussianMixture {
        prune_merge_mixture(l, r.prune, r.merge, r.max_components)
    }
}
