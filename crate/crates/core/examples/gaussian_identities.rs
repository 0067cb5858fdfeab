//! Closed-form Gaussian identities used by the fusion rule, checked
//! numerically at a few points.
//!
//! Usage: `cargo run --example gaussian_identities`

use nalgebra::DVector;

use pmbfusion::gaussian::{gaussian_power, gaussian_product, kappa, mixture_power};
use pmbfusion::{Gaussian, GaussianMixture};

fn main() -> pmbfusion::Result<()> {
    let a = Gaussian::from_slices(&[0.0, 1.0], &[2.0, 0.3, 0.3, 1.0])?;
    let b = Gaussian::from_slices(&[1.0, -1.0], &[1.0, 0.0, 0.0, 3.0])?;

    let prod = gaussian_product(&a, &b)?;
    println!("N(x; a) N(x; b) = {:.6} N(x; m, P)", prod.scale);
    let omega = 0.5;
    let pow = gaussian_power(&a, omega)?;
    println!("N(x; a)^{omega} = {:.6} N(x; m, P / {omega})", pow.scale);
    println!("kappa({omega}, P_a) = {:.6}", kappa(omega, a.cov())?);

    let mix = GaussianMixture::new(vec![(0.6, a.clone()), (0.4, b.clone())])?;
    let powered = mixture_power(&mix, omega)?;

    println!("\n{:>14} {:>14} {:>14} {:>14} {:>14}", "x", "product", "closed form", "mix^omega", "bound");
    for x in [[0.0, 0.0], [0.5, 0.0], [1.0, -1.0], [-2.0, 3.0]] {
        let x = DVector::from_row_slice(&x);
        let direct = a.pdf(&x)? * b.pdf(&x)?;
        let closed = prod.eval(&x)?;
        let exact = mix.eval(&x)?.powf(omega);
        let bound = powered.eval(&x)?;
        println!(
            "{:>14} {direct:>14.6e} {closed:>14.6e} {exact:>14.6e} {bound:>14.6e}",
            format!("({}, {})", x[0], x[1])
        );
    }
    Ok(())
}
