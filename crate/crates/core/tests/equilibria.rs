mod common;

use mhtlab_core::equilibria::{
    aux_f, classify, interior_points_dimensional, jacobian_dimensional, jacobian_rescaled_raw,
    RootRegime,
};
use mhtlab_core::model::{allee_cubic_g_prime, vector_field, vector_field_rescaled};
use mhtlab_core::*;
use proptest::prelude::*;

fn lemma_of(c: NumericClass) -> Option<LemmaClass> {
    match c {
        NumericClass::Saddle => Some(LemmaClass::Saddle),
        NumericClass::Attractor => Some(LemmaClass::Attractor),
        NumericClass::Repeller => Some(LemmaClass::Repeller),
        _ => None,
    }
}

fn arb_nondim(strong: bool, alt: bool) -> impl Strategy<Value = NonDimParams> {
    (
        -7.0f64..-0.7,
        -9.0f64..-1.2,
        -7.0f64..0.7,
        -7.0f64..0.0,
        0.01f64..0.9,
    )
        .prop_map(move |(la, lc, lq, ls, mm)| NonDimParams {
            a: la.exp(),
            c: if alt { lc.exp() } else { 0.0 },
            q: lq.exp(),
            s: ls.exp(),
            m: if strong { 0.6 * mm } else { -mm },
        })
}

fn check_roots(np: &NonDimParams, variant: ModelVariant) -> std::result::Result<(), TestCaseError> {
    let roots = interior_roots(variant, np).unwrap();
    let cc = roots.coefficients;
    for &u in &roots.roots() {
        prop_assert!(cc.eval(u).abs() < 1e-10, "residual {} at {u}", cc.eval(u));
    }
    if roots.real_roots.len() == 3 {
        let sum: f64 = roots.real_roots.iter().sum();
        let prod: f64 = roots.real_roots.iter().product();
        prop_assert!((sum - cc.h_coef).abs() < 1e-8);
        prop_assert!((prod + cc.tail).abs() < 1e-8);
    }
    match roots.regime {
        RootRegime::WeakAllee => {
            if let (Some(u1), Some(u2), Some(u3)) = (roots.u1, roots.u2, roots.u3) {
                prop_assert!(0.0 < u1 && u1 < u2 && u2 < u3 && u3 < 1.0);
            }
        }
        RootRegime::Fold => {
            let e = roots.e.unwrap();
            if let Some(u1) = roots.u1 {
                prop_assert!(np.m < u1 && u1 <= e + 1e-12);
            }
            if let Some(u2) = roots.u2 {
                prop_assert!(e <= u2 && u2 < 1.0);
            }
        }
        RootRegime::Census => {}
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn strong_allee_roots(np in arb_nondim(true, false)) {
        check_roots(&np, ModelVariant::MhtAllee)?;
    }

    #[test]
    fn weak_allee_roots(np in arb_nondim(false, false)) {
        check_roots(&np, ModelVariant::MhtAllee)?;
    }

    #[test]
    fn altfood_roots(np in arb_nondim(true, true)) {
        check_roots(&np, ModelVariant::MhtAlleeAltFood)?;
    }

    #[test]
    fn interior_points_are_equilibria(np in arb_nondim(true, true)) {
        for v in [ModelVariant::MhtAllee, ModelVariant::MhtAlleeAltFood] {
            for r in interior_equilibria(v, &np).unwrap() {
                let (du, dv) = vector_field_rescaled(v, r.location, &np).unwrap();
                prop_assert!(du.abs() < 1e-10 && dv.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_forms_match_jacobian(np in arb_nondim(true, true), weak in any::<bool>()) {
        let np = if weak { NonDimParams { m: -np.m, ..np } } else { np };
        for v in [ModelVariant::MhtAllee, ModelVariant::MhtAlleeAltFood] {
            for r in interior_equilibria(v, &np).unwrap() {
                let (d, t) = (r.jacobian.det(), r.jacobian.trace());
                let scale = r.jacobian.max_abs();
                prop_assert!((r.det - d).abs() <= 1e-12 * d.abs().max(scale * scale * 1e-6));
                prop_assert!((r.trace - t).abs() <= 1e-12 * t.abs().max(scale * 1e-6));
            }
        }
    }

    #[test]
    fn lemma_agrees_with_eigenvalues(np in arb_nondim(true, true), weak in any::<bool>()) {
        let np = if weak { NonDimParams { m: -np.m, ..np } } else { np };
        for v in [ModelVariant::MhtAllee, ModelVariant::MhtAlleeAltFood] {
            for r in interior_equilibria(v, &np).unwrap() {
                if r.marginal || r.lemma_class == LemmaClass::NotCovered {
                    continue;
                }
                prop_assert_eq!(Some(r.lemma_class), lemma_of(r.numeric_class));
            }
        }
    }

    #[test]
    fn fold_lower_point_is_always_saddle(np in arb_nondim(true, true)) {
        for v in [ModelVariant::MhtAllee, ModelVariant::MhtAlleeAltFood] {
            let roots = interior_roots(v, &np).unwrap();
            if let (Some(u1), Some(_)) = (roots.u1, roots.u2) {
                let r = classify(v, u1, &np, &roots).unwrap();
                prop_assert!(r.jacobian.det() < 0.0);
            }
        }
    }

    #[test]
    fn f_identity(a in 1e-3f64..0.5, m in -0.9f64..0.9) {
        for i in 1..1000 {
            let u = i as f64 / 1000.0;
            let f = aux_f(u, a, m);
            prop_assert!((f * (u + a) / u - allee_cubic_g_prime(u, a, m)).abs() < 1e-12);
        }
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = common::rng(11);
    let mut checked = 0;
    while checked < 100 {
        let strong = rng.random_bool(0.5);
        let p = common::dimensional(&mut rng, strong);
        for v in ModelVariant::ALL {
            let n = rng.random_range(0.05..1.0) * p.k;
            let pp = rng.random_range(0.05..1.2) * p.n * p.k;
            let j = jacobian_dimensional(v, n, pp, &p).unwrap().0;
            let h = 1e-6;
            let f = |x: f64, y: f64| vector_field(v, State::dimensional(x, y), &p).unwrap();
            let dn = (h * n).max(1e-9);
            let dp = (h * pp).max(1e-9);
            let (a1, b1) = f(n + dn, pp);
            let (a0, b0) = f(n - dn, pp);
            let (a3, b3) = f(n, pp + dp);
            let (a2, b2) = f(n, pp - dp);
            let fd = [
                [(a1 - a0) / (2.0 * dn), (a3 - a2) / (2.0 * dp)],
                [(b1 - b0) / (2.0 * dn), (b3 - b2) / (2.0 * dp)],
            ];
            let scale = j.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            for r in 0..2 {
                for c in 0..2 {
                    assert!(
                        (fd[r][c] - j[r][c]).abs() <= 1e-5 * j[r][c].abs().max(1e-6 * scale),
                        "{v:?} entry ({r},{c}): fd {} vs {}",
                        fd[r][c],
                        j[r][c]
                    );
                }
            }
        }
        checked += 1;
    }
}

#[test]
fn rescaled_jacobian_matches_central_differences() {
    let mut rng = common::rng(12);
    for _ in 0..100 {
        let np = common::nondim(&mut rng, true, true);
        let u = rng.random_range(0.01..1.0);
        let v = rng.random_range(0.01..1.0);
        let j = jacobian_rescaled_raw(np.c, u, v, &np).0;
        let f = |x: f64, y: f64| {
            vector_field_rescaled(ModelVariant::MhtAlleeAltFood, State::rescaled(x, y), &np)
                .unwrap()
        };
        let h = 1e-6;
        let (a1, b1) = f(u + h, v);
        let (a0, b0) = f(u - h, v);
        let (a3, b3) = f(u, v + h);
        let (a2, b2) = f(u, v - h);
        let fd = [
            [(a1 - a0) / (2.0 * h), (a3 - a2) / (2.0 * h)],
            [(b1 - b0) / (2.0 * h), (b3 - b2) / (2.0 * h)],
        ];
        let scale = j.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for r in 0..2 {
            for c in 0..2 {
                assert!((fd[r][c] - j[r][c]).abs() <= 1e-5 * j[r][c].abs().max(1e-3 * scale));
            }
        }
    }
}

#[test]
fn saddle_node_draws_sit_on_the_fold() {
    let mut rng = common::rng(13);
    for alt in [false, true] {
        for _ in 0..200 {
            let (np, e) = common::saddle_node(&mut rng, alt);
            let v = if alt {
                ModelVariant::MhtAlleeAltFood
            } else {
                ModelVariant::MhtAllee
            };
            let roots = interior_roots(v, &np).unwrap();
            assert!(roots.double_root, "delta = {:?}", roots.delta);
            assert!((roots.e.unwrap() - e).abs() < 1e-9);
            let reports = interior_equilibria(v, &np).unwrap();
            assert_eq!(reports.len(), 1);
            let r = &reports[0];
            assert_eq!(r.which_lemma, LemmaRule::SaddleNode);
            if (np.s - r.threshold.unwrap()).abs() > 1e-9 {
                let stable = r.jacobian.trace() < 0.0;
                assert_eq!(r.lemma_class == LemmaClass::StableSaddleNode, stable);
            }
        }
    }
}

#[test]
fn weak_three_root_draws_have_three_roots() {
    let mut rng = common::rng(14);
    for _ in 0..200 {
        let np = common::weak_three_roots(&mut rng);
        let roots = interior_roots_allee(&np).unwrap();
        assert_eq!(roots.roots().len(), 3, "{np:?}");
        let reports = interior_equilibria(ModelVariant::MhtAllee, &np).unwrap();
        assert_eq!(reports[1].lemma_class, LemmaClass::Saddle);
        if !reports[1].marginal {
            assert_eq!(reports[1].numeric_class, NumericClass::Saddle);
        }
    }
}

#[test]
fn dimensional_and_rescaled_censuses_agree() {
    let mut rng = common::rng(15);
    for _ in 0..200 {
        let p = common::dimensional(&mut rng, true);
        let np = nondimensionalize(&p).unwrap();
        let dim = interior_points_dimensional(ModelVariant::MhtAlleeAltFood, &p).unwrap();
        let res = interior_roots_allee_altfood(&np).unwrap().roots();
        assert_eq!(dim.len(), res.len());
        for (x, u) in dim.iter().zip(&res) {
            assert!((x.prey - p.k * u).abs() <= 1e-8 * x.prey);
            assert!((x.predator - p.n * p.k * (u + np.c)).abs() <= 1e-8 * x.predator);
        }
    }
}

#[test]
fn boundary_census_weak_excludes_negative_threshold() {
    let np = NonDimParams {
        a: 0.04,
        c: 0.00266667,
        q: 0.0291667,
        s: 0.00208333,
        m: -0.1,
    };
    let b = boundary_equilibria(ModelVariant::MhtAlleeAltFood, &np).unwrap();
    assert!(b.iter().all(|r| r.location.prey >= 0.0));
    let strong = NonDimParams { m: 0.1, ..np };
    for r in boundary_equilibria(ModelVariant::MhtAlleeAltFood, &strong).unwrap() {
        assert_eq!(
            Some(r.lemma_class),
            lemma_of(r.numeric_class),
            "{:?}",
            r.location
        );
    }
}

#[test]
fn weak_allee_hopf_sign_at_defaults() {
    // f(u1) < 0 along the persistent branch: no Hopf point with S > 0.
    let p = DimensionalParams::default().with_m(-15.0);
    for q in [100.0, 300.0, 700.0, 1500.0, 3000.0] {
        let np = nondimensionalize(&p.with_qs(q, 1.25)).unwrap();
        let u1 = interior_roots_allee(&np).unwrap().u1.unwrap();
        assert!(aux_f(u1, np.a, np.m) < 0.0, "q = {q}");
    }
}
