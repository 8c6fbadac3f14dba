mod common;

use mhtlab_core::equilibria::interior_points_dimensional;
use mhtlab_core::*;
use rand::Rng;

fn mht_cycle_params() -> DimensionalParams {
    DimensionalParams::default().with_qs(700.0, 0.5)
}

/// Nontrivial Floquet multiplier from the trace of the Jacobian along one period.
fn floquet_oracle(variant: ModelVariant, p: &DimensionalParams, orbit: &PeriodicOrbit) -> f64 {
    let opts = IntegrateOptions {
        tolerances: Tolerances::new(1e-12, 1e-15),
        sample_dt: Some(orbit.period / 40_000.0),
        ..Default::default()
    };
    let traj = integrate(variant, p, orbit.anchor, orbit.period, &opts).unwrap();
    let tr: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .map(|&(t, x)| (t, jacobian(variant, x, p).unwrap().trace()))
        .collect();
    let integral: f64 = tr
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    integral.exp()
}

#[test]
fn mht_cycle_is_unique_from_two_seeds() {
    let p = mht_cycle_params();
    let budget = DetectBudget::default();
    let a = detect_attractor(
        ModelVariant::Mht,
        &p,
        State::dimensional(100.0, 1.0),
        &budget,
    )
    .unwrap();
    let b = detect_attractor(ModelVariant::Mht, &p, State::dimensional(3.0, 0.1), &budget).unwrap();
    assert_eq!(a.kind, AttractorKind::InteriorCycle);
    assert_eq!(b.kind, AttractorKind::InteriorCycle);
    let rel = (a.anchor.prey - b.anchor.prey).abs() / a.anchor.prey;
    assert!(rel < 1e-3, "anchors {} vs {}", a.anchor.prey, b.anchor.prey);
    let (ta, tb) = (a.period.unwrap(), b.period.unwrap());
    assert!((ta - tb).abs() < 1e-3 * ta);
}

#[test]
fn refined_cycle_multiplier_matches_floquet_integral() {
    let p = mht_cycle_params();
    let seed = detect_attractor(
        ModelVariant::Mht,
        &p,
        State::dimensional(100.0, 1.0),
        &DetectBudget::default(),
    )
    .unwrap();
    let orbit = refine_cycle(ModelVariant::Mht, &p, &seed, &RefineOptions::default()).unwrap();
    assert!(orbit.converged);
    assert!(orbit.is_stable());
    assert!((orbit.period - 8.789).abs() < 1e-2);
    let oracle = floquet_oracle(ModelVariant::Mht, &p, &orbit);
    assert!(
        (orbit.multiplier - oracle).abs() < 1e-3 * oracle.max(1e-3),
        "return map {} vs trace integral {}",
        orbit.multiplier,
        oracle
    );
}

#[test]
fn strong_allee_subcritical_cycle_is_unstable() {
    let v = ModelVariant::MhtAllee;
    let p = DimensionalParams::default().with_qs(4808.5, 1.01 * 14.116082450982274);
    let pts = interior_points_dimensional(v, &p).unwrap();
    let n = pts.last().unwrap().prey;
    let ic = State::dimensional(n * 1.02, p.n * n + p.effective_c(v));
    let forward = detect_attractor(v, &p, ic, &DetectBudget::default()).unwrap();
    assert_eq!(forward.kind, AttractorKind::InteriorPoint);
    let orbit = find_unstable_cycle(
        v,
        &p,
        ic,
        &DetectBudget::default(),
        &RefineOptions::default(),
    )
    .unwrap()
    .expect("an unstable cycle around the stable focus");
    assert!(orbit.converged);
    assert!(orbit.multiplier > 1.0, "multiplier {}", orbit.multiplier);
    let oracle = floquet_oracle(v, &p, &orbit);
    assert!((orbit.multiplier - oracle).abs() < 1e-3 * oracle);
}

#[test]
fn integration_is_bitwise_reproducible() {
    let p = DimensionalParams::default();
    let opts = IntegrateOptions::default();
    for v in ModelVariant::ALL {
        let ic = State::dimensional(40.0, 2.0);
        let a = integrate(v, &p, ic, 50.0, &opts).unwrap();
        let b = integrate(v, &p, ic, 50.0, &opts).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.0.to_bits(), y.0.to_bits());
            assert_eq!(x.1.prey.to_bits(), y.1.prey.to_bits());
            assert_eq!(x.1.predator.to_bits(), y.1.predator.to_bits());
        }
    }
}

#[test]
fn trajectories_stay_in_the_quadrant() {
    let mut rng = common::rng(21);
    for _ in 0..40 {
        let strong = rng.random_bool(0.5);
        let p = common::dimensional(&mut rng, strong);
        for v in ModelVariant::ALL {
            let ic = State::dimensional(
                rng.random_range(0.001..1.0) * p.k,
                rng.random_range(0.001..1.5) * p.n * p.k,
            );
            let traj = integrate(v, &p, ic, 30.0, &IntegrateOptions::default()).unwrap();
            assert!(
                traj.stats.min_component >= -1e-12,
                "{v:?}: {}",
                traj.stats.min_component
            );
            assert!(traj
                .samples
                .iter()
                .all(|(_, x)| x.prey >= 0.0 && x.predator >= 0.0));
        }
    }
}

#[test]
fn extinction_event_lands_on_threshold() {
    let p = DimensionalParams::default();
    let traj = integrate(
        ModelVariant::MhtAllee,
        &p,
        State::dimensional(5.0, 3.0),
        1000.0,
        &IntegrateOptions::default(),
    )
    .unwrap();
    let ev = traj
        .events
        .iter()
        .find(|e| e.kind == EventKind::PreyExtinctThreshold)
        .expect("prey collapses below the Allee threshold");
    let th = 1e-8 * p.k;
    assert!((ev.state.prey - th).abs() < 1e-6 * th, "{}", ev.state.prey);
}

#[test]
fn altfood_without_allee_loses_prey_beyond_transcritical() {
    let p = DimensionalParams::default().with_qs(3000.0, 1.25);
    let label = detect_attractor(
        ModelVariant::MhtAltFood,
        &p,
        State::dimensional(50.0, 2.0),
        &DetectBudget::default(),
    )
    .unwrap();
    assert_eq!(label.kind, AttractorKind::PreyExtinctPoint);
    assert!((label.anchor.predator - p.c).abs() < 1e-5 * p.c);
}

#[test]
fn rescaled_and_dimensional_frames_agree() {
    let p = DimensionalParams::default();
    let np = nondimensionalize(&p).unwrap();
    let ic = State::dimensional(60.0, 2.5);
    let t_end = 5.0;
    let dim = integrate(
        ModelVariant::MhtAlleeAltFood,
        &p,
        ic,
        t_end,
        &IntegrateOptions::default(),
    )
    .unwrap();
    let opts = IntegrateOptions {
        frame: Frame::Rescaled,
        ..Default::default()
    };
    let res = integrate(ModelVariant::MhtAlleeAltFood, &p, ic, t_end, &opts).unwrap();
    let (_, a) = dim.last();
    let (_, b) = res.last();
    assert_eq!(b.frame, Frame::Rescaled);
    let b = b.to_frame(Frame::Dimensional, &p);
    assert!((a.prey - b.prey).abs() < 1e-9 * a.prey);
    assert!((a.predator - b.predator).abs() < 1e-9 * a.predator);
    assert!(np.c > 0.0);
}

#[test]
fn singular_variants_reject_predator_axis_start() {
    let p = DimensionalParams::default();
    let err = integrate(
        ModelVariant::Mht,
        &p,
        State::dimensional(0.0, 1.0),
        1.0,
        &IntegrateOptions::default(),
    );
    assert!(matches!(err, Err(Error::Singular { .. })));
    let err = integrate(
        ModelVariant::Mht,
        &p,
        State::dimensional(-1.0, 1.0),
        1.0,
        &IntegrateOptions::default(),
    );
    assert!(matches!(err, Err(Error::OutsideQuadrant { .. })));
}
