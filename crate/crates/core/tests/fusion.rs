use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use pmbfusion::filter::{project_to_pmb_to, FilterParams};
use pmbfusion::fusion::{
    fuse_aa, fuse_bernoulli_bernoulli, fuse_bernoulli_pair, fuse_bernoulli_ppp, fuse_gci, fuse_ppp,
    pmb_power_approx, FusionParams, PairWeight,
};
use pmbfusion::gaussian::kappa;
use pmbfusion::rfs::{count_assignments, evaluate_set_density, validate, DEFAULT_SET_CAP};
use pmbfusion::{Bernoulli, Error, Gaussian, GaussianFamily, GaussianMixture, PmbDensity};

type B = Bernoulli<GaussianFamily>;

fn g2(x: f64, y: f64, var: f64) -> Gaussian {
    Gaussian::from_slices(&[x, y], &[var, 0.0, 0.0, var]).unwrap()
}

fn bern(r: f64, g: Gaussian) -> B {
    Bernoulli::new(r, g).unwrap()
}

fn shared_ppp() -> GaussianMixture {
    GaussianMixture::single(1.0, g2(10.0, 10.0, 20.0)).unwrap()
}

fn v2(x: f64, y: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y])
}

/// Two 3-Bernoulli PMBs whose first two components nearly coincide and whose
/// third components lie far apart.
fn example_one() -> (PmbDensity, PmbDensity) {
    let f1 = PmbDensity::new(
        shared_ppp(),
        vec![bern(0.9, g2(0.0, 0.0, 1.0)), bern(0.9, g2(20.0, 20.0, 1.0)), bern(0.6, g2(0.0, 30.0, 1.0))],
    );
    let f2 = PmbDensity::new(
        shared_ppp(),
        vec![bern(0.9, g2(0.3, -0.2, 1.0)), bern(0.9, g2(19.8, 20.1, 1.0)), bern(0.6, g2(30.0, 0.0, 1.0))],
    );
    (f1, f2)
}

fn assigned_pairs(pmbm: &pmbfusion::PmbmDensity, g: usize, n1: usize) -> Vec<(usize, usize)> {
    pmbm.selected(g)
        .take(n1)
        .enumerate()
        .filter_map(|(i, h)| h.assigned.map(|j| (i, j)))
        .collect()
}

#[test]
fn power_approx_examples() {
    let pmb = PmbDensity::new(
        GaussianMixture::single(0.7, g2(1.0, 2.0, 3.0)).unwrap(),
        vec![bern(0.4, g2(0.0, 0.0, 2.0)), bern(1.0, g2(5.0, 5.0, 1.0))],
    );
    assert_eq!(pmb_power_approx(&pmb, 1.0).unwrap(), pmb);

    let one = PmbDensity::new(GaussianMixture::empty(), vec![Bernoulli::new(0.5, Gaussian::scalar(0.0, 1.0).unwrap()).unwrap()]);
    let out = pmb_power_approx(&one, 0.5).unwrap();
    let k = kappa(0.5, &DMatrix::identity(1, 1)).unwrap();
    let s = 0.5f64.sqrt();
    assert_relative_eq!(out.bernoullis[0].r, s * k / (s + s * k), epsilon = 1e-14);
    assert_relative_eq!(out.bernoullis[0].density.cov()[(0, 0)], 2.0, epsilon = 1e-14);
    assert!(matches!(pmb_power_approx(&one, 0.0), Err(Error::InvalidOmega(_))));
}

#[test]
fn fuse_ppp_inherits_mixture_product() {
    let a = GaussianMixture::single(1.0, Gaussian::scalar(0.0, 1.0).unwrap()).unwrap();
    let b = GaussianMixture::single(1.0, Gaussian::scalar(2.0, 1.0).unwrap()).unwrap();
    let out = fuse_ppp::<GaussianFamily>(&a, &b, &FilterParams::default()).unwrap();
    assert_eq!(out.len(), 1);
    assert_relative_eq!(out.components()[0].0, 0.10378, epsilon = 1e-5);
    assert_relative_eq!(out.components()[0].1.mean()[0], 1.0, epsilon = 1e-12);
}

#[test]
fn bernoulli_bernoulli_examples() {
    let (rho, b) = fuse_bernoulli_bernoulli(&bern(1.0, g2(3.0, 4.0, 1.0)), &bern(1.0, g2(3.0, 4.0, 1.0))).unwrap();
    assert_relative_eq!(rho, 1.0 / (4.0 * PI), max_relative = 1e-12);
    assert_eq!(b.r, 1.0);
    assert_relative_eq!(b.density.cov()[(0, 0)], 0.5, epsilon = 1e-14);
    assert_relative_eq!(b.density.mean()[1], 4.0, epsilon = 1e-14);

    let (rho, b) = fuse_bernoulli_bernoulli(&bern(0.0, g2(0.0, 0.0, 1.0)), &bern(0.0, g2(9.0, 0.0, 1.0))).unwrap();
    assert_eq!((rho, b.r), (1.0, 0.0));

    let s = |m| B::new(0.5, Gaussian::scalar(m, 1.0).unwrap()).unwrap();
    let (rho, b) = fuse_bernoulli_bernoulli(&s(0.0), &s(2.0)).unwrap();
    let inner = (-1.0f64).exp() / (4.0 * PI).sqrt();
    assert_relative_eq!(rho, 0.25 + 0.25 * inner, max_relative = 1e-12);
    assert_relative_eq!(rho, 0.2759, epsilon = 1e-4);
    assert_relative_eq!(b.r, 0.0940, epsilon = 1e-4);

    let (rho, b) = fuse_bernoulli_pair(&s(0.0), &s(2.0)).unwrap();
    assert_relative_eq!(rho, 0.25 * inner, max_relative = 1e-12);
    assert_eq!(b.r, 1.0);
}

#[test]
fn bernoulli_ppp_examples() {
    let lam = GaussianMixture::single(1.0, g2(0.0, 0.0, 1.0)).unwrap();
    let (rho, b) = fuse_bernoulli_ppp(&bern(0.0, g2(0.0, 0.0, 1.0)), &lam, f64::INFINITY).unwrap();
    assert_eq!((rho, b.r), (1.0, 0.0));

    let (rho, b) = fuse_bernoulli_ppp(&bern(0.8, g2(0.0, 0.0, 1.0)), &lam, f64::INFINITY).unwrap();
    let inner = 1.0 / (4.0 * PI);
    assert_relative_eq!(rho, 0.2 + 0.8 * inner, max_relative = 1e-12);
    assert_relative_eq!(b.r, 0.8 * inner / rho, max_relative = 1e-12);

    let far = GaussianMixture::single(1.0, g2(100.0, 0.0, 1.0)).unwrap();
    let (rho, b) = fuse_bernoulli_ppp(&bern(0.8, g2(0.0, 0.0, 1.0)), &far, 20.0).unwrap();
    assert_relative_eq!(rho, 0.2, epsilon = 1e-15);
    assert_eq!(b.r, 0.0);
}

#[test]
fn fusion_with_pure_ppp_collapses() {
    let (f1, _) = example_one();
    let f2 = PmbDensity::new(shared_ppp(), vec![]);
    for pw in [PairWeight::Exact, PairWeight::Published] {
        let fp = FusionParams::default().with_pair_weight(pw);
        let out = fuse_gci(&f1, &f2, &fp, &FilterParams::default()).unwrap();
        assert_eq!(out.tracks.len(), 3);
        assert!(out.tracks.iter().all(|t| t.len() == 1));
        assert_eq!(out.globals.len(), 1);
        assert!(validate(&out).is_empty());
    }
}

#[test]
fn example_one_full_enumeration() {
    let (f1, f2) = example_one();
    for pw in [PairWeight::Exact, PairWeight::Published] {
        let fp = FusionParams::new(0.5, 20.0, 34, 5.0).unwrap().ungated().with_pair_weight(pw);
        let out = fuse_gci(&f1, &f2, &fp, &FilterParams::default()).unwrap();
        assert!(validate(&out).is_empty(), "{pw}");
        assert_eq!(out.globals.len(), 34, "{pw}");
        let best = out.best_global().unwrap();
        assert_eq!(assigned_pairs(&out, best, 3), vec![(0, 0), (1, 1)], "{pw}");
        let present: Vec<f64> = out.selected(best).map(|h| h.bernoulli.r).filter(|r| *r > 0.0).collect();
        assert_eq!(present.len(), 4, "{pw}: {present:?}");
    }
}

#[test]
fn global_count_matches_assignment_count() {
    let (f1, f2) = example_one();
    for n1 in 0..=3 {
        for n2 in 0..=3 {
            let a = PmbDensity::new(shared_ppp(), f1.bernoullis[..n1].to_vec());
            let b = PmbDensity::new(shared_ppp(), f2.bernoullis[..n2].to_vec());
            let fp = FusionParams::new(0.5, 20.0, 1000, 5.0).unwrap().ungated();
            let out = fuse_gci(&a, &b, &fp, &FilterParams::default()).unwrap();
            assert_eq!(out.globals.len() as u64, count_assignments(n1 as u64, n2 as u64).unwrap());
            assert!(validate(&out).is_empty());
        }
    }
}

#[test]
fn near_one_omega_follows_the_first_density() {
    let (f1, f2) = example_one();
    let fp = FusionParams::new(1.0 - 1e-3, 20.0, 200, 5.0).unwrap();
    let out = fuse_gci(&f1, &f2, &fp, &FilterParams::default()).unwrap();
    assert!(validate(&out).is_empty());
    assert!(out.tracks.iter().flatten().all(|h| h.log_weight.is_finite()));
    let q1 = pmb_power_approx(&f1, fp.omega()).unwrap();
    let best = out.best_global().unwrap();
    for (i, h) in out.selected(best).take(3).enumerate() {
        if h.assigned.is_some() {
            let d = (h.bernoulli.density.mean() - q1.bernoullis[i].density.mean()).amax();
            assert!(d < 0.01, "track {i} moved by {d}");
        }
    }
}

#[test]
fn aa_examples() {
    let (f1, f2) = example_one();
    let fp = FusionParams::default();

    let same = fuse_aa(&f1, &f1, &fp).unwrap();
    let pmb = project_to_pmb_to(&same).unwrap();
    assert_eq!(pmb.bernoullis.len(), 3);
    for (b, orig) in pmb.bernoullis.iter().zip(&f1.bernoullis) {
        assert_relative_eq!(b.r, orig.r, epsilon = 1e-12);
        assert_relative_eq!(b.density.mean(), orig.density.mean(), epsilon = 1e-12);
        assert_relative_eq!(b.density.cov(), orig.density.cov(), epsilon = 1e-12);
    }

    let shifted = PmbDensity::new(
        GaussianMixture::single(2.5, g2(0.0, 0.0, 5.0)).unwrap(),
        f2.bernoullis.iter().map(|b| bern(b.r, g2(b.density.mean()[0] + 200.0, 0.0, 1.0))).collect(),
    );
    let apart = fuse_aa(&f1, &shifted, &fp).unwrap();
    assert_eq!(apart.tracks.len(), 6);
    assert_relative_eq!(apart.ppp.total_weight(), 0.5 * 1.0 + 0.5 * 2.5, epsilon = 1e-12);
    assert!(validate(&apart).is_empty());
}

fn small_pmb() -> impl Strategy<Value = PmbDensity> {
    let b = (0.05..0.95f64, -4.0..4.0f64, -4.0..4.0f64, 0.5..3.0f64).prop_map(|(r, x, y, v)| bern(r, g2(x, y, v)));
    (prop::collection::vec(b, 0..=2), 0.1..2.0f64, -4.0..4.0f64)
        .prop_map(|(bs, w, c)| PmbDensity::new(GaussianMixture::single(w, g2(c, 0.0, 6.0)).unwrap(), bs))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swapping_agents_gives_the_same_density(f1 in small_pmb(), f2 in small_pmb(), pw in prop_oneof![Just(PairWeight::Exact), Just(PairWeight::Published)]) {
        let fp = FusionParams::new(0.5, 20.0, 100, 5.0).unwrap().ungated().with_pair_weight(pw);
        let agent = FilterParams::default();
        let a = fuse_gci(&f1, &f2, &fp, &agent).unwrap();
        let b = fuse_gci(&f2, &f1, &fp, &agent).unwrap();
        prop_assert!(validate(&a).is_empty());
        prop_assert!(validate(&b).is_empty());
        let sets = [vec![], vec![v2(0.5, 0.5)], vec![v2(-1.0, 2.0), v2(2.0, -1.0)]];
        for xs in &sets {
            let da = evaluate_set_density(&a, xs, DEFAULT_SET_CAP).unwrap();
            let db = evaluate_set_density(&b, xs, DEFAULT_SET_CAP).unwrap();
            prop_assert!((da - db).abs() <= 1e-9 * da.abs().max(db.abs()) + 1e-300, "{da} vs {db}");
        }
    }

    #[test]
    fn fused_local_weights_are_finite(f1 in small_pmb(), f2 in small_pmb(), omega in 0.05..0.95f64) {
        let fp = FusionParams::new(omega, 20.0, 50, 5.0).unwrap();
        let out = fuse_gci(&f1, &f2, &fp, &FilterParams::default()).unwrap();
        prop_assert!(validate(&out).is_empty());
        prop_assert!(out.tracks.iter().flatten().all(|h| h.log_weight.is_finite()));
    }
}
