//! Hopf loci, collapse (fold) thresholds, and region classification in the
//! `(q, s)` plane.
//!
//! Interior equilibria do not depend on `s`: they lie on the predator
//! nullcline `P = nN + c` and on the `s`-free prey nullcline. At an interior
//! point the dimensional Jacobian has `J22 = -s` and `J21 = s n`, so
//! `trace = J11 - s` and `det = s (-J11 - n J12)`. The Hopf condition at a
//! fixed `q` is therefore solved by Newton on the prey-nullcline residual for
//! `N`, followed by `s = J11(N)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{detect_with, AttractorContext, AttractorKind, DetectBudget};
use crate::equilibria::{
    dimensional_interior_poly, equilibria_dimensional, interior_roots_allee,
    interior_roots_allee_altfood, jacobian_dimensional, CubicCoefficients, EquilibriumKind,
    DOUBLE_ROOT_TOL,
};
use crate::error::{Error, Result};
use crate::model::{nondimensionalize, DimensionalParams, ModelVariant, State};
use crate::poly::real_roots_in;
use crate::stability::NumericClass;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub q: f64,
    pub s: f64,
    /// Equilibrium prey as a fraction of `K`.
    pub u_star: f64,
    /// Determinant of the dimensional Jacobian (positive on the locus).
    pub det_at: f64,
    /// `|trace|` of the dimensional Jacobian.
    pub residual: f64,
    /// Consecutive points share a segment; a gap starts a new one.
    pub segment: usize,
}

/// Which interior equilibrium the locus follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Smallest prey density at the start of the range, then followed continuously.
    Lower,
    /// Largest prey density at the start of the range, then followed continuously.
    Upper,
}

impl Branch {
    /// Default for a variant: the upper point for strong Allee effects (the
    /// lower one is always a saddle), the lower point otherwise.
    pub fn default_for(variant: ModelVariant, p: &DimensionalParams) -> Self {
        if variant.has_allee() && p.m > 0.0 {
            Branch::Upper
        } else {
            Branch::Lower
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfOptions {
    /// Number of continuation steps across the `q` range.
    pub steps: usize,
    pub branch: Option<Branch>,
    pub max_halvings: usize,
}

impl Default for HopfOptions {
    fn default() -> Self {
        Self {
            steps: 200,
            branch: None,
            max_halvings: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfLocus {
    pub variant: ModelVariant,
    pub branch: Branch,
    pub points: Vec<HopfPoint>,
    /// Why tracing ended before the end of the range, if it did.
    pub terminus: Option<String>,
}

fn interior_roots_dimensional(variant: ModelVariant, p: &DimensionalParams) -> Vec<f64> {
    let poly = dimensional_interior_poly(variant, p);
    real_roots_in(&poly, 0.0, p.k)
        .into_iter()
        .map(|r| r.value)
        .collect()
}

fn branch_root(variant: ModelVariant, p: &DimensionalParams, branch: Branch) -> Option<f64> {
    let roots = interior_roots_dimensional(variant, p);
    match branch {
        Branch::Lower => roots.first().copied(),
        Branch::Upper => roots.last().copied(),
    }
}

fn newton_root(variant: ModelVariant, p: &DimensionalParams, guess: f64) -> Option<f64> {
    let poly = dimensional_interior_poly(variant, p);
    let dp = poly.derivative();
    let scale = poly.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()))
        * p.k.powi(poly.degree() as i32).max(1.0);
    let mut n = guess;
    for _ in 0..60 {
        let d = dp.eval(n);
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let step = poly.eval(n) / d;
        n -= step;
        if !(n > 0.0 && n < p.k) {
            return None;
        }
        if step.abs() <= 1e-15 * n && poly.eval(n).abs() <= 1e-12 * scale {
            return Some(n);
        }
    }
    None
}

/// Hopf data at an interior point `N` for the parameters `p` (its `s` is ignored).
fn hopf_at(variant: ModelVariant, p: &DimensionalParams, n: f64) -> Result<(f64, f64, f64)> {
    let pred = p.n * n + p.effective_c(variant);
    let j = jacobian_dimensional(variant, n, pred, p)?.0;
    let s = j[0][0];
    let at = p.with_qs(p.q, s);
    let jj = jacobian_dimensional(variant, n, pred, &at)?;
    Ok((s, jj.det(), jj.trace().abs()))
}

/// Traces the Hopf locus along `q` from `q_range.0` to `q_range.1` (either order).
pub fn hopf_locus(
    variant: ModelVariant,
    fixed: &DimensionalParams,
    q_range: (f64, f64),
    opts: &HopfOptions,
) -> Result<HopfLocus> {
    fixed.validate()?;
    let (q0, q1) = q_range;
    if !(q0 > 0.0 && q1 > 0.0 && q0.is_finite() && q1.is_finite()) || q0 == q1 {
        return Err(Error::InvalidParameter {
            name: "q_range",
            value: if q0 > 0.0 { q1 } else { q0 },
            reason: "needs two distinct positive endpoints",
        });
    }
    if opts.steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let branch = opts
        .branch
        .unwrap_or_else(|| Branch::default_for(variant, fixed));
    let mut locus = HopfLocus {
        variant,
        branch,
        points: Vec::new(),
        terminus: None,
    };
    let base = (q1 - q0) / opts.steps as f64;
    let at = |q: f64| fixed.with_qs(q, fixed.s);

    let Some(mut n_prev) = branch_root(variant, &at(q0), branch) else {
        locus.terminus = Some(format!("no interior equilibrium at q = {q0}"));
        return Ok(locus);
    };
    let mut segment = 0usize;
    let mut in_gap = true;
    let mut emit = |q: f64, n: f64, locus: &mut HopfLocus, in_gap: &mut bool| -> Result<()> {
        let (s, det, residual) = hopf_at(variant, &at(q), n)?;
        if s > 0.0 && det > 0.0 {
            if *in_gap && !locus.points.is_empty() {
                segment += 1;
            }
            *in_gap = false;
            locus.points.push(HopfPoint {
                q,
                s,
                u_star: n / fixed.k,
                det_at: det,
                residual,
                segment,
            });
        } else {
            *in_gap = true;
        }
        Ok(())
    };
    emit(q0, n_prev, &mut locus, &mut in_gap)?;

    let mut q_cur = q0;
    for i in 1..=opts.steps {
        let q_target = q0 + base * i as f64;
        let q_target = if i == opts.steps { q1 } else { q_target };
        // Sub-step toward q_target, halving on failure.
        let mut h = q_target - q_cur;
        let mut halvings = 0;
        while q_cur != q_target {
            let q_next = if (q_target - q_cur).abs() <= h.abs() {
                q_target
            } else {
                q_cur + h
            };
            let p_next = at(q_next);
            let newton = newton_root(variant, &p_next, n_prev);
            let census = interior_roots_dimensional(variant, &p_next);
            if census.is_empty() {
                locus.terminus = Some(format!(
                    "interior equilibria disappear between q = {q_cur} and q = {q_next}"
                ));
                return Ok(locus);
            }
            match newton {
                Some(n) if census.iter().any(|&c| (n - c).abs() <= 1e-8 * c) => {
                    n_prev = n;
                    q_cur = q_next;
                }
                _ => {
                    halvings += 1;
                    if halvings > opts.max_halvings {
                        locus.terminus = Some(format!(
                            "tracked equilibrium folds or is lost near q = {q_cur}"
                        ));
                        return Ok(locus);
                    }
                    h *= 0.5;
                }
            }
        }
        emit(q_target, n_prev, &mut locus, &mut in_gap)?;
    }
    Ok(locus)
}

/// Names of the fold thresholds of the interior equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollapseLabel {
    #[serde(rename = "q1")]
    Q1,
    #[serde(rename = "q2")]
    Q2,
    #[serde(rename = "q~1")]
    QTilde1,
    #[serde(rename = "q~2")]
    QTilde2,
    #[serde(rename = "q^1")]
    QHat1,
}

impl CollapseLabel {
    pub fn for_variant(variant: ModelVariant, p: &DimensionalParams) -> Option<Self> {
        match variant {
            ModelVariant::MhtAltFood => Some(CollapseLabel::Q2),
            ModelVariant::MhtAllee if p.m > 0.0 => Some(CollapseLabel::QTilde1),
            ModelVariant::MhtAllee if p.m < 0.0 => Some(CollapseLabel::QTilde2),
            ModelVariant::MhtAlleeAltFood => Some(CollapseLabel::QHat1),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CollapseLabel::Q1 => "q1",
            CollapseLabel::Q2 => "q2",
            CollapseLabel::QTilde1 => "q~1",
            CollapseLabel::QTilde2 => "q~2",
            CollapseLabel::QHat1 => "q^1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseThreshold {
    pub variant: ModelVariant,
    pub q_star: f64,
    pub label: CollapseLabel,
    /// Scaled discriminant at `q_star`.
    pub delta_scaled: f64,
    /// The double interior point (rescaled for Allee variants, dimensional otherwise).
    pub double_point: Option<State>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseOptions {
    pub q_min: f64,
    pub q_max: f64,
    /// Log-spaced grid points used to bracket the sign change.
    pub grid: usize,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            q_min: 1.0,
            q_max: 1e5,
            grid: 400,
        }
    }
}

/// Scaled discriminant whose sign change marks the fold, if defined at `p`.
pub fn fold_discriminant(variant: ModelVariant, p: &DimensionalParams) -> Result<Option<f64>> {
    match variant {
        ModelVariant::MhtAltFood => {
            // -(r/K) N^2 + b N + (r a - q c) = 0
            let b = p.r - p.r * p.a / p.k - p.q * p.n;
            let d = b * b + 4.0 * (p.r / p.k) * (p.r * p.a - p.q * p.c);
            Ok(Some(d / b.powi(2).max(1.0)))
        }
        ModelVariant::MhtAllee if p.m < 0.0 => {
            // Weak Allee: the cubic's own discriminant vanishes at both ends
            // of the three-equilibrium band.
            let np = nondimensionalize(p)?;
            let cc = CubicCoefficients::new(&np, 0.0);
            let (b, c, d) = (-cc.h_coef, -cc.l_coef, cc.tail);
            let terms = [
                18.0 * b * c * d,
                -4.0 * b.powi(3) * d,
                b * b * c * c,
                -4.0 * c.powi(3),
                -27.0 * d * d,
            ];
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            Ok(Some(
                terms.iter().sum::<f64>() / scale.max(f64::MIN_POSITIVE),
            ))
        }
        ModelVariant::MhtAllee | ModelVariant::MhtAlleeAltFood => {
            let np = nondimensionalize(p)?;
            let roots = if variant == ModelVariant::MhtAllee {
                interior_roots_allee(&np)?
            } else {
                interior_roots_allee_altfood(&np)?
            };
            let scale = match roots.g {
                Some(g) => (1.0 - np.a + np.m + g).powi(2).max(1.0),
                None => 1.0,
            };
            Ok(roots.delta.map(|d| d / scale))
        }
        _ => Err(Error::UnsupportedVariant {
            variant,
            what: "fold thresholds",
        }),
    }
}

/// Number of interior equilibria at `p`.
pub fn interior_count(variant: ModelVariant, p: &DimensionalParams) -> Result<usize> {
    Ok(real_roots_in(&dimensional_interior_poly(variant, p), 0.0, p.k).len())
}

/// Locates the predation rate at which two interior equilibria merge.
///
/// Returns `Ok(None)` when the discriminant does not change sign in the window.
pub fn collapse_threshold(
    variant: ModelVariant,
    fixed: &DimensionalParams,
    opts: &CollapseOptions,
) -> Result<Option<CollapseThreshold>> {
    fixed.validate()?;
    let label = CollapseLabel::for_variant(variant, fixed).ok_or(Error::UnsupportedVariant {
        variant,
        what: "fold thresholds",
    })?;
    let delta = |q: f64| fold_discriminant(variant, &fixed.with_qs(q, fixed.s));
    let ratio = (opts.q_max / opts.q_min).powf(1.0 / opts.grid.max(1) as f64);
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for i in 0..=opts.grid {
        let q = opts.q_min * ratio.powi(i as i32);
        let d = match delta(q) {
            Ok(Some(d)) => d,
            Ok(None) | Err(Error::Inconsistent { .. }) => {
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((qp, dp)) = prev {
            let count_changes = || -> Result<bool> {
                Ok(interior_count(variant, &fixed.with_qs(qp, fixed.s))?
                    != interior_count(variant, &fixed.with_qs(q, fixed.s))?)
            };
            if (dp > 0.0) != (d > 0.0) && count_changes()? {
                bracket = Some((qp, dp, q, d));
                break;
            }
        }
        prev = Some((q, d));
    }
    let Some((mut a, mut fa, mut b, mut fb)) = bracket else {
        return Ok(None);
    };

    // Illinois regula falsi.
    let mut side = 0i8;
    let mut q = a;
    let mut fq = fa;
    for _ in 0..200 {
        q = (a * fb - b * fa) / (fb - fa);
        if !(q > a.min(b) && q < a.max(b)) {
            q = 0.5 * (a + b);
        }
        fq = match delta(q)? {
            Some(d) => d,
            None => {
                return Err(Error::Inconsistent {
                    stage: "collapse_threshold",
                    detail: format!("discriminant undefined inside the bracket at q = {q}"),
                })
            }
        };
        if fq.abs() < DOUBLE_ROOT_TOL || (b - a).abs() <= 1e-15 * q {
            break;
        }
        if (fq > 0.0) == (fa > 0.0) {
            a = q;
            fa = fq;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = q;
            fb = fq;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    if fq.abs() >= DOUBLE_ROOT_TOL {
        return Err(Error::NotConverged {
            stage: "collapse_threshold",
            iterations: 200,
        });
    }

    let p = fixed.with_qs(q, fixed.s);
    let double_point = match variant {
        ModelVariant::MhtAltFood => {
            let b = p.r - p.r * p.a / p.k - p.q * p.n;
            let n = b / (2.0 * p.r / p.k);
            (n > 0.0).then(|| State::dimensional(n, p.n * n + p.c))
        }
        ModelVariant::MhtAllee if p.m < 0.0 => {
            let np = nondimensionalize(&p)?;
            let cc = CubicCoefficients::new(&np, 0.0);
            // Double root: the critical point of the cubic where it nearly vanishes.
            let disc = (cc.h_coef * cc.h_coef + 3.0 * cc.l_coef).max(0.0).sqrt();
            [(cc.h_coef - disc) / 3.0, (cc.h_coef + disc) / 3.0]
                .into_iter()
                .filter(|&u| u > 0.0 && u < 1.0)
                .min_by(|x, y| cc.residual(*x).total_cmp(&cc.residual(*y)))
                .map(|u| State::rescaled(u, u))
        }
        _ => {
            let np = nondimensionalize(&p)?;
            let roots = if variant == ModelVariant::MhtAllee {
                interior_roots_allee(&np)?
            } else {
                interior_roots_allee_altfood(&np)?
            };
            let c = np.effective_c(variant);
            match (roots.e, roots.double_root) {
                (Some(e), true) => Some(State::rescaled(e, e + c)),
                _ => None,
            }
        }
    };
    Ok(Some(CollapseThreshold {
        variant,
        q_star: q,
        label,
        delta_scaled: fq,
        double_point,
    }))
}

/// Legend classes of the `(q, s)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionTag {
    HatchedGreen,
    SolidGreen,
    Blue,
    Grey,
    SolidRed,
    HatchedRed,
    SolidBrown,
    HatchedBrown,
}

impl RegionTag {
    pub const ALL: [RegionTag; 8] = [
        RegionTag::HatchedGreen,
        RegionTag::SolidGreen,
        RegionTag::Blue,
        RegionTag::Grey,
        RegionTag::SolidRed,
        RegionTag::HatchedRed,
        RegionTag::SolidBrown,
        RegionTag::HatchedBrown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegionTag::HatchedGreen => "hatched_green",
            RegionTag::SolidGreen => "solid_green",
            RegionTag::Blue => "blue",
            RegionTag::Grey => "grey",
            RegionTag::SolidRed => "solid_red",
            RegionTag::HatchedRed => "hatched_red",
            RegionTag::SolidBrown => "solid_brown",
            RegionTag::HatchedBrown => "hatched_brown",
        }
    }

    pub fn meaning(self) -> &'static str {
        match self {
            RegionTag::HatchedGreen => "both populations stabilise for every initial condition",
            RegionTag::SolidGreen => "coexistence or extinction depending on the initial condition",
            RegionTag::Blue => "both populations oscillate",
            RegionTag::Grey => "three interior equilibria",
            RegionTag::SolidRed => {
                "two interior equilibria, neither attracting; both species die out"
            }
            RegionTag::HatchedRed => "no interior equilibria; both species die out",
            RegionTag::SolidBrown => "two interior equilibria, neither attracting; prey dies out",
            RegionTag::HatchedBrown => "no interior equilibria; prey dies out",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub tag: RegionTag,
    pub meaning: String,
}

impl From<RegionTag> for RegionLabel {
    fn from(tag: RegionTag) -> Self {
        Self {
            tag,
            meaning: tag.meaning().to_string(),
        }
    }
}

/// Interior equilibrium census used for region assignment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionCensus {
    pub has_allee: bool,
    pub has_alt_food: bool,
    pub interior: Vec<NumericClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub q: f64,
    pub s: f64,
    pub label: RegionLabel,
    pub uncertain: bool,
    pub census: RegionCensus,
    pub probe: Vec<AttractorKind>,
}

/// Maps an equilibrium census and probe outcomes to a legend class.
/// Returns the tag and whether the assignment is uncertain.
pub fn assign_region(census: &RegionCensus, probe: &[AttractorKind]) -> (RegionTag, bool) {
    let undetermined = probe.contains(&AttractorKind::Undetermined);
    let count = |c: NumericClass| census.interior.iter().filter(|&&x| x == c).count();
    let attractors = count(NumericClass::Attractor);
    let repellers = count(NumericClass::Repeller);
    let saddles = count(NumericClass::Saddle);
    let cycle = probe.contains(&AttractorKind::InteriorCycle);
    let extinction = probe
        .iter()
        .any(|k| matches!(k, AttractorKind::Origin | AttractorKind::PreyExtinctPoint));
    let n = census.interior.len();

    if n == 0 {
        let tag = if census.has_alt_food {
            RegionTag::HatchedBrown
        } else {
            RegionTag::HatchedRed
        };
        return (tag, undetermined);
    }
    if n == 3 {
        return (RegionTag::Grey, undetermined);
    }
    if cycle {
        return (RegionTag::Blue, undetermined);
    }
    if attractors > 0 {
        let tag = if extinction {
            RegionTag::SolidGreen
        } else {
            RegionTag::HatchedGreen
        };
        return (tag, undetermined);
    }
    if saddles > 0 && repellers > 0 && n == 2 {
        let tag = if census.has_alt_food {
            RegionTag::SolidBrown
        } else {
            RegionTag::SolidRed
        };
        return (tag, undetermined);
    }
    if repellers > 0 && !extinction {
        // A repeller whose orbits neither settle nor die out: an undetected cycle.
        return (RegionTag::Blue, true);
    }
    let tag = if extinction && census.has_alt_food {
        RegionTag::SolidBrown
    } else if extinction {
        RegionTag::SolidRed
    } else {
        RegionTag::HatchedGreen
    };
    (tag, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub budget: DetectBudget,
    /// Seed grid: prey fractions of `K` times predator fractions of `nK`.
    pub prey_fractions: [f64; 4],
    pub predator_fractions: [f64; 3],
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            budget: DetectBudget {
                t_max: 400.0,
                point_rtol: 1e-5,
                cycle_rtol: 1e-5,
                ..DetectBudget::default()
            },
            prey_fractions: [0.05, 0.3, 0.6, 0.95],
            predator_fractions: [0.1, 0.5, 1.0],
        }
    }
}

/// Seeds used by the cycle/extinction probe.
pub fn probe_seeds(ctx: &AttractorContext, opts: &ProbeOptions) -> Vec<State> {
    let p = &ctx.params;
    let mut seeds = Vec::new();
    for &fp in &opts.prey_fractions {
        for &fq in &opts.predator_fractions {
            seeds.push(State::dimensional(fp * p.k, fq * p.n * p.k));
        }
    }
    for x in &ctx.interior {
        seeds.push(State::dimensional(1.01 * x.prey, 1.01 * x.predator));
    }
    seeds
}

pub fn classify_region(
    variant: ModelVariant,
    q: f64,
    s: f64,
    fixed: &DimensionalParams,
    opts: &ProbeOptions,
) -> Result<RegionReport> {
    let p = fixed.with_qs(q, s);
    p.validate()?;
    let census_reports = equilibria_dimensional(variant, &p)?;
    let census = RegionCensus {
        has_allee: variant.has_allee(),
        has_alt_food: variant.has_alt_food(),
        interior: census_reports
            .iter()
            .filter(|r| r.kind == EquilibriumKind::Interior)
            .map(|r| r.numeric_class)
            .collect(),
    };
    let ctx = AttractorContext::new(variant, &p)?;
    let mut probe: Vec<AttractorKind> = Vec::new();
    for seed in probe_seeds(&ctx, opts) {
        let kind = detect_with(&ctx, seed, &opts.budget)?.kind;
        if !probe.contains(&kind) {
            probe.push(kind);
        }
    }
    probe.sort_by_key(|k| *k as u8);
    let (tag, uncertain) = assign_region(&census, &probe);
    Ok(RegionReport {
        q,
        s,
        label: tag.into(),
        uncertain,
        census,
        probe,
    })
}

/// Classifies every `(q, s)` cell of a grid in parallel; rows follow `s_axis`.
pub fn region_map(
    variant: ModelVariant,
    fixed: &DimensionalParams,
    q_axis: &[f64],
    s_axis: &[f64],
    opts: &ProbeOptions,
) -> Result<Vec<RegionReport>> {
    let cells: Vec<(f64, f64)> = s_axis
        .iter()
        .flat_map(|&s| q_axis.iter().map(move |&q| (q, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(q, s)| classify_region(variant, q, s, fixed, opts))
        .collect()
}
