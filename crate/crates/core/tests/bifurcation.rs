use mhtlab_core::*;

fn defaults() -> DimensionalParams {
    DimensionalParams::default()
}

#[test]
fn mht_hopf_separates_cycle_from_point() {
    let p = defaults();
    let locus = hopf_locus(
        ModelVariant::Mht,
        &p,
        (700.0, 800.0),
        &HopfOptions::default(),
    )
    .unwrap();
    let s_h = locus.points[0].s;
    assert!((s_h - 0.8464).abs() < 1e-3, "s_H = {s_h}");
    let budget = DetectBudget::default();
    let ic = State::dimensional(100.0, 1.0);
    let below = detect_attractor(ModelVariant::Mht, &p.with_qs(700.0, 0.5), ic, &budget).unwrap();
    let above = detect_attractor(ModelVariant::Mht, &p.with_qs(700.0, 1.25), ic, &budget).unwrap();
    assert_eq!(below.kind, AttractorKind::InteriorCycle);
    assert_eq!(above.kind, AttractorKind::InteriorPoint);
}

#[test]
fn strong_allee_locus_stays_below_collapse() {
    let p = defaults();
    let collapse = collapse_threshold(ModelVariant::MhtAllee, &p, &CollapseOptions::default())
        .unwrap()
        .unwrap();
    assert_eq!(collapse.label, CollapseLabel::QTilde1);
    let locus = hopf_locus(
        ModelVariant::MhtAllee,
        &p,
        (4000.0, 6000.0),
        &HopfOptions::default(),
    )
    .unwrap();
    assert!(!locus.points.is_empty());
    assert!(locus.points.iter().all(|h| h.q < collapse.q_star));
    assert!(locus.terminus.is_some());
}

#[test]
fn locus_is_independent_of_direction() {
    let p = defaults();
    let fwd = hopf_locus(
        ModelVariant::Mht,
        &p,
        (200.0, 1200.0),
        &HopfOptions::default(),
    )
    .unwrap();
    let rev = hopf_locus(
        ModelVariant::Mht,
        &p,
        (1200.0, 200.0),
        &HopfOptions::default(),
    )
    .unwrap();
    for h in &fwd.points {
        let r = rev
            .points
            .iter()
            .find(|r| (r.q - h.q).abs() < 1e-9 * h.q)
            .unwrap();
        assert!((r.s - h.s).abs() < 1e-9 * h.s);
    }
}

#[test]
fn weak_allee_collapse_opens_three_point_band() {
    let p = defaults().with_m(-15.0);
    let t = collapse_threshold(ModelVariant::MhtAllee, &p, &CollapseOptions::default())
        .unwrap()
        .unwrap();
    assert_eq!(t.label, CollapseLabel::QTilde2);
    let below = interior_count(ModelVariant::MhtAllee, &p.with_qs(t.q_star * 0.999, 1.25)).unwrap();
    let above = interior_count(ModelVariant::MhtAllee, &p.with_qs(t.q_star * 1.001, 1.25)).unwrap();
    assert_ne!(below, above);
}

#[test]
fn altfood_without_allee_has_no_fold() {
    let t = collapse_threshold(
        ModelVariant::MhtAltFood,
        &defaults(),
        &CollapseOptions::default(),
    )
    .unwrap();
    assert!(t.is_none());
}

#[test]
fn defaults_region_labels() {
    let p = defaults();
    let opts = ProbeOptions::default();
    let cases = [
        (ModelVariant::Mht, p, RegionTag::HatchedGreen),
        (ModelVariant::MhtAltFood, p, RegionTag::HatchedGreen),
        (ModelVariant::MhtAllee, p, RegionTag::SolidGreen),
        (
            ModelVariant::MhtAllee,
            p.with_m(-15.0),
            RegionTag::HatchedGreen,
        ),
        (ModelVariant::MhtAlleeAltFood, p, RegionTag::SolidGreen),
    ];
    for (v, fixed, tag) in cases {
        let r = classify_region(v, 700.0, 1.25, &fixed, &opts).unwrap();
        assert_eq!(r.label.tag, tag, "{v:?}: {r:?}");
        assert!(!r.uncertain);
    }
}

#[test]
fn beyond_collapse_is_red_or_brown() {
    let p = defaults();
    let opts = ProbeOptions::default();
    let red = classify_region(ModelVariant::MhtAllee, 6000.0, 1.25, &p, &opts).unwrap();
    assert_eq!(red.label.tag, RegionTag::HatchedRed);
    assert_eq!(red.probe, vec![AttractorKind::Origin]);
    let brown = classify_region(ModelVariant::MhtAlleeAltFood, 6000.0, 1.25, &p, &opts).unwrap();
    assert_eq!(brown.label.tag, RegionTag::HatchedBrown);
    assert_eq!(brown.probe, vec![AttractorKind::PreyExtinctPoint]);
}

#[test]
fn region_map_is_row_major_in_s() {
    let p = defaults();
    let opts = ProbeOptions::default();
    let q = [700.0, 6000.0];
    let s = [1.0, 2.0];
    let map = region_map(ModelVariant::MhtAllee, &p, &q, &s, &opts).unwrap();
    assert_eq!(map.len(), 4);
    for (i, r) in map.iter().enumerate() {
        assert_eq!((r.q, r.s), (q[i % 2], s[i / 2]));
    }
    assert_eq!(map[1].label.tag, RegionTag::HatchedRed);
}
