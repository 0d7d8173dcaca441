use std::f64::consts::PI;

use cardpath_core::lattice::{LagrangianSpec, Potential, SpaceGrid, TimeGrid};
use cardpath_core::propagator::{
    propagate_enumerate, propagate_monte_carlo_euclidean, propagate_transfer_matrix, ConvergenceRecipe,
    PropagatorConfig, TransferEngine,
};
use cardpath_core::Complex64;

fn mehler(m: f64, w: f64, h: f64, t: f64, a: f64, b: f64) -> Complex64 {
    let i = Complex64::i();
    let (s, c) = (w * t).sin_cos();
    (Complex64::from(m * w) / (2.0 * PI * h * s * i)).sqrt()
        * (i * m * w * ((a * a + b * b) * c - 2.0 * a * b) / (2.0 * h * s)).exp()
}

fn free(m: f64, h: f64, t: f64, a: f64, b: f64) -> Complex64 {
    let i = Complex64::i();
    (Complex64::from(m) / (2.0 * PI * h * t * i)).sqrt() * (i * m * (b - a) * (b - a) / (2.0 * h * t)).exp()
}

fn error(cfg: &PropagatorConfig, exact: Complex64) -> f64 {
    let v = propagate_transfer_matrix(cfg).unwrap().value;
    (Complex64::new(v.re, v.im) - exact).norm() / exact.norm()
}

#[test]
fn probability_is_squared_modulus() {
    let cfg = PropagatorConfig::new(
        TimeGrid::new(0.0, 0.7, 4).unwrap(),
        SpaceGrid::new(-1.0, 1.0, 9).unwrap(),
        LagrangianSpec::new(1.0, Potential::custom(|r, _| r.sin())).unwrap(),
        0.6,
        -0.25,
        0.5,
    )
    .unwrap();
    let results = [
        propagate_transfer_matrix(&cfg).unwrap(),
        propagate_enumerate(&cfg).unwrap(),
        propagate_monte_carlo_euclidean(&cfg, 500, 9).unwrap(),
    ];
    for r in results {
        let expected = r.value.re * r.value.re + r.value.im * r.value.im;
        assert!((r.probability() - expected).abs() <= 1e-15 * expected);
    }
}

#[test]
fn harmonic_error_halves_as_k_doubles() {
    let lag = LagrangianSpec::harmonic(1.0, 1.0).unwrap();
    let exact = mehler(1.0, 1.0, 1.0, 1.0, -0.5, 0.5);
    let errors: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&k| {
            let cfg = ConvergenceRecipe { k, ..ConvergenceRecipe::STANDARD }
                .config(lag.clone(), 1.0, 0.0, 1.0, -0.5, 0.5)
                .unwrap();
            error(&cfg, exact)
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.8..2.2).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn free_error_stays_at_the_boundary_floor() {
    let lag = LagrangianSpec::free(1.0).unwrap();
    for k in [4, 8, 16, 32] {
        for (a, b) in [(0.0, 0.0), (-0.5, 0.5), (-1.0, 1.0)] {
            let cfg = ConvergenceRecipe { k, ..ConvergenceRecipe::STANDARD }
                .config(lag.clone(), 1.0, 0.0, 1.0, a, b)
                .unwrap();
            let e = error(&cfg, free(1.0, 1.0, 1.0, a, b));
            assert!(e < 1e-4, "k={k} ({a},{b}): {e}");
        }
    }
}

#[test]
fn free_packet_keeps_its_norm() {
    let recipe = ConvergenceRecipe { k: 20, half_width_factor: 12.0, ..ConvergenceRecipe::STANDARD };
    let cfg = recipe.config(LagrangianSpec::free(1.0).unwrap(), 1.0, 0.0, 1.0, 0.0, 0.0).unwrap();
    let space = *cfg.space();
    let sigma: f64 = 0.6;
    let mut psi: Vec<Complex64> = space
        .points()
        .iter()
        .map(|&x| Complex64::new((2.0 * PI * sigma * sigma).powf(-0.25) * (-x * x / (4.0 * sigma * sigma)).exp(), 0.0))
        .collect();
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>() * space.dx();
    assert!((norm(&psi) - 1.0).abs() < 1e-9);
    let inner = 0.5 * (space.hi() - space.lo()) * recipe.taper_fraction;
    let mut engine = TransferEngine::new(&cfg);
    for step in 1..=20 {
        psi = engine.forward(psi, step..=step).unwrap();
        assert!((norm(&psi) - 1.0).abs() < 0.01, "step {step}: {}", norm(&psi));
    }
    let leaked: f64 =
        space.points().iter().zip(&psi).filter(|(x, _)| x.abs() > inner).map(|(_, z)| z.norm_sqr() * space.dx()).sum();
    assert!(leaked < 1e-6, "{leaked}");
}

#[test]
fn converged_grid_examples() {
    let c = ConvergenceRecipe::STANDARD.config(LagrangianSpec::free(1.0).unwrap(), 1.0, 0.0, 1.0, 0.3, 0.3).unwrap();
    let k = propagate_transfer_matrix(&c).unwrap().value;
    assert!((k.modulus() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-3);
    assert!((k.arg() + PI / 4.0).abs() < 1e-3);

    let c = ConvergenceRecipe::STANDARD
        .config(LagrangianSpec::harmonic(1.0, 1.0).unwrap(), 1.0, 0.0, 1.0, 0.0, 0.0)
        .unwrap();
    assert!(error(&c, mehler(1.0, 1.0, 1.0, 1.0, 0.0, 0.0)) < 0.01);
}

#[test]
fn euclidean_estimate_scales_as_inverse_root_time() {
    let estimate = |t: f64| {
        let cfg = PropagatorConfig::new(
            TimeGrid::new(0.0, t, 8).unwrap(),
            SpaceGrid::new(-1.0, 1.0, 21).unwrap(),
            LagrangianSpec::free(1.0).unwrap(),
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        let r = propagate_monte_carlo_euclidean(&cfg, 20_000, 5).unwrap();
        (r.value.re, r.stderr.unwrap())
    };
    let (mut prev, mut prev_se) = estimate(0.4);
    for t in [0.1, 0.025] {
        let (v, se) = estimate(t);
        // quartering T doubles the kernel
        let ratio = v / prev;
        let ratio_se = ratio * ((se / v).powi(2) + (prev_se / prev).powi(2)).sqrt();
        assert!((ratio - 2.0).abs() < 3.0 * ratio_se, "{ratio} ± {ratio_se}");
        (prev, prev_se) = (v, se);
    }
}

#[test]
fn two_single_steps_compose_to_enumeration() {
    use cardpath_core::propagator::compose;
    let lag = LagrangianSpec::new(1.2, Potential::custom(|r, _| 0.5 * r * r + r.cos())).unwrap();
    let space = SpaceGrid::new(-1.5, 1.5, 7).unwrap();
    let (a, b) = (space.point(1), space.point(5));
    let two = PropagatorConfig::new(TimeGrid::new(0.0, 0.8, 2).unwrap(), space, lag.clone(), 0.9, a, b).unwrap();
    let (g1, g2) = two.grid().split_at(1).unwrap();
    let first = PropagatorConfig::new(g1, space, lag.clone(), 0.9, a, b).unwrap();
    let second = PropagatorConfig::new(g2, space, lag, 0.9, a, b).unwrap();
    let k1 = TransferEngine::new(&first).kernel_from_a().unwrap();
    let k2 = TransferEngine::new(&second).kernel_to_b().unwrap();
    let composed = compose(&k1, &k2, &space, &two.site_weights()).unwrap();
    let direct = propagate_enumerate(&two).unwrap().value;
    assert!((composed - direct).modulus() <= 1e-14 * direct.modulus());
}
