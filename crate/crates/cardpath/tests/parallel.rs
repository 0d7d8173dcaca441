use cardpath::core::lattice::{LagrangianSpec, Potential, SpaceGrid, TimeGrid};
use cardpath::core::propagator::{
    propagate_enumerate, propagate_monte_carlo_euclidean_with, propagate_transfer_matrix, EuclideanScheme,
    PropagatorConfig,
};
use cardpath::parallel::{self, Workers};

fn config(k: usize, sites: usize, potential: Potential) -> PropagatorConfig {
    PropagatorConfig::new(
        TimeGrid::new(0.0, 1.0, k).unwrap(),
        SpaceGrid::new(-2.0, 2.0, sites).unwrap(),
        LagrangianSpec::new(1.0, potential).unwrap(),
        0.8,
        -0.3,
        0.6,
    )
    .unwrap()
}

#[test]
fn transfer_matrix_is_bit_identical() {
    let cfgs = [
        config(10, 301, Potential::Free),
        config(10, 301, Potential::Harmonic { omega: 1.3 }),
        config(6, 101, Potential::custom_time_dependent(|r, t| r * t + r.sin())),
    ];
    for cfg in &cfgs {
        let seq = propagate_transfer_matrix(cfg).unwrap();
        for threads in [1, 2, 4] {
            let par = Workers::new(Some(threads)).install(|| parallel::propagate_transfer_matrix(cfg).unwrap());
            assert_eq!(par.value, seq.value);
        }
    }
}

#[test]
fn enumeration_is_bit_identical() {
    let cfg = config(4, 23, Potential::custom(|r, _| r.cos()));
    let seq = propagate_enumerate(&cfg).unwrap();
    for threads in [1, 3] {
        let par = Workers::new(Some(threads)).install(|| parallel::propagate_enumerate(&cfg).unwrap());
        assert_eq!(par.value, seq.value);
    }
}

#[test]
fn monte_carlo_is_bit_identical() {
    let cfg = config(16, 41, Potential::Harmonic { omega: 1.0 });
    for scheme in [EuclideanScheme::OpenWalk, EuclideanScheme::Bridge] {
        let seq = propagate_monte_carlo_euclidean_with(&cfg, 5000, 11, scheme).unwrap();
        for threads in [1, 4] {
            let par = Workers::new(Some(threads))
                .install(|| parallel::propagate_monte_carlo(&cfg, 5000, 11, scheme).unwrap());
            assert_eq!(par.value, seq.value);
            assert_eq!(par.stderr, seq.stderr);
        }
    }
}

#[test]
fn worker_cap_is_honoured() {
    assert_eq!(Workers::new(Some(3)).threads(), 3);
    assert_eq!(Workers::new(Some(0)).threads(), 1);
}
