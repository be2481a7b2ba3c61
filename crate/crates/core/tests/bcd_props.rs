mod common;

use common::{random_targets, rel_diff, rng};
use fimsense::{
    bcd_optimize, solve_benchmark, ArrayGeometry, BcdConfig, InitScheme, Scheme, SurfaceShape, TargetSet,
    TerminationReason,
};

fn quick() -> BcdConfig {
    BcdConfig { n_starts: 2, ..BcdConfig::default() }
}

#[test]
fn single_target_is_shape_independent() {
    let geom = ArrayGeometry::half_wavelength(3, 3, 0.5).unwrap();
    let targets = TargetSet::from_degrees(&[(70.0, 40.0)]).unwrap();
    let out = bcd_optimize(&geom, &targets, 10.0, &quick()).unwrap();
    assert!(rel_diff(out.objective, 90.0) < 1e-8);
}

#[test]
fn zero_range_is_one_sdp() {
    let geom = ArrayGeometry::half_wavelength(4, 4, 0.0).unwrap();
    let targets = TargetSet::reference();
    let out = bcd_optimize(&geom, &targets, 10.0, &BcdConfig::default()).unwrap();
    let rigid = solve_benchmark(Scheme::RaaMimo, &geom, &targets, 10.0, &BcdConfig::default()).unwrap();
    assert_eq!(out.trace.outer_iterations(), 1);
    assert_eq!(out.trace.termination_reason, TerminationReason::Stationary);
    assert_eq!(out.objective, rigid.objective);
    assert_eq!(out.start_objectives.len(), 1);
}

#[test]
fn dominance_chain_on_random_targets() {
    let mut rng = rng(21);
    for trial in 0..6 {
        let geom = ArrayGeometry::half_wavelength(3, 3, 0.5).unwrap();
        let targets = random_targets(&mut rng, 1 + trial % 3);
        let cfg = BcdConfig { rng_seed: trial as u64, ..quick() };
        let v = |s| solve_benchmark(s, &geom, &targets, 5.0, &cfg).unwrap().objective;
        let (raa_pa, fim_pa, raa_mimo, fim_mimo) =
            (v(Scheme::RaaPa), v(Scheme::FimPa), v(Scheme::RaaMimo), v(Scheme::FimMimo));
        assert!(fim_mimo >= raa_mimo * (1.0 - 1e-9), "{trial}");
        assert!(fim_mimo >= fim_pa * (1.0 - 1e-9), "{trial}");
        assert!(raa_mimo >= raa_pa * (1.0 - 1e-9), "{trial}");
        assert!(fim_pa >= raa_pa * (1.0 - 1e-9), "{trial}");
    }
}

#[test]
fn outer_sequence_is_monotone() {
    let geom = ArrayGeometry::half_wavelength(5, 5, 0.5).unwrap();
    let out = bcd_optimize(&geom, &TargetSet::reference(), 10.0, &quick()).unwrap();
    let mut seq = Vec::new();
    for r in &out.trace.records {
        seq.push(r.after_covariance);
        seq.push(r.objective);
    }
    assert!(seq.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)));
    assert!(out.trace.outer_iterations() <= 50);
    geom.validate_shape(&out.shape).unwrap();
}

#[test]
fn provided_start_is_used_and_deterministic() {
    let geom = ArrayGeometry::half_wavelength(4, 4, 0.25).unwrap();
    let start = SurfaceShape::from_vec((0..16).map(|i| if i % 2 == 0 { 0.25 } else { -0.25 }).collect());
    let cfg = BcdConfig { n_starts: 2, init_scheme: InitScheme::Provided(vec![start]), ..BcdConfig::default() };
    let a = bcd_optimize(&geom, &TargetSet::reference(), 10.0, &cfg).unwrap();
    let b = bcd_optimize(&geom, &TargetSet::reference(), 10.0, &cfg).unwrap();
    assert_eq!(a.start_objectives.len(), 2);
    assert_eq!(a.start_objectives, b.start_objectives);
    assert_eq!(a.shape, b.shape);
}
