//! Equilibrium location, Jacobians, and stability classification.
//!
//! Interior equilibria of the rescaled Allee models lie on the predator
//! nullcline (`v = u` or `v = u + C`) and solve the monic cubic
//!
//! ```text
//! u^3 - H u^2 - L u + T = 0,   H = M + 1 - A,   L = A(M+1) - Q - M,
//! ```
//!
//! with tail `T = AM` (no alternative food) or `T = AM + CQ`. Two regimes
//! are analysed in closed form:
//!
//! * weak Allee without alternative food (`M < 0`): one root `u1` always lies
//!   in `(0, 1)`; deflating by `(u - u1)` leaves a quadratic for `u2 < u3`.
//! * the fold regime (alternative food, or strong Allee where `C = 0`): the
//!   cubic has one negative root `-G`; deflating by `(u + G)` leaves a
//!   quadratic whose discriminant decides between zero, one double, or two
//!   interior points `u1 <= E <= u2`.
//!
//! Every interior point is classified twice: by the sign rules derived from
//! the closed forms of `det` and `trace` ("lemma" classes), and by the
//! eigenvalues of the analytic Jacobian ("numeric" classes).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    allee_cubic_g, allee_cubic_g_prime, consumption, nondimensionalize, prey_growth_per_capita,
    prey_growth_per_capita_deriv, DimensionalParams, Frame, ModelVariant, NonDimParams, State,
};
use crate::poly::{real_roots, real_roots_in, Poly};
use crate::stability::{classify_numeric, Mat2, NumericClass, MARGIN};

/// Relative tolerance under which the fold discriminant counts as zero
/// (after scaling by `max(1, (1-A+M+G)^2)`).
pub const DOUBLE_ROOT_TOL: f64 = 1e-10;

/// Coefficients of `u^3 - h u^2 - l u + tail`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub h_coef: f64,
    pub l_coef: f64,
    pub tail: f64,
}

impl CubicCoefficients {
    /// Interior cubic with alternative-food offset `c` (`c = 0` without alternative food).
    pub fn new(np: &NonDimParams, c: f64) -> Self {
        Self {
            h_coef: np.m + 1.0 - np.a,
            l_coef: np.a * (np.m + 1.0) - np.q - np.m,
            tail: np.a * np.m + c * np.q,
        }
    }

    pub fn poly(&self) -> Poly {
        Poly::monic_cubic(-self.h_coef, -self.l_coef, self.tail)
    }

    pub fn eval(&self, u: f64) -> f64 {
        ((u - self.h_coef) * u - self.l_coef) * u + self.tail
    }

    pub fn deriv(&self, u: f64) -> f64 {
        (3.0 * u - 2.0 * self.h_coef) * u - self.l_coef
    }

    /// Residual scaled by the coefficient magnitude.
    pub fn residual(&self, u: f64) -> f64 {
        self.eval(u).abs()
    }

    fn newton(&self, u: f64) -> f64 {
        let d = self.deriv(u);
        if d == 0.0 {
            return u;
        }
        let next = u - self.eval(u) / d;
        if self.residual(next) <= self.residual(u) {
            next
        } else {
            u
        }
    }
}

/// `f(u) = u g'(u) / (u + A)`: the trace vanishes where `S = f(u)`.
pub fn aux_f(u: f64, a: f64, m: f64) -> f64 {
    u / (u + a) * allee_cubic_g_prime(u, a, m)
}

/// `h(u) = u^2 (2u - (1-A+M)) - AM`: sign of `det` at weak-Allee interior points.
pub fn aux_h(u: f64, a: f64, m: f64) -> f64 {
    u * u * (2.0 * u - (1.0 - a + m)) - a * m
}

/// Numerator constant of the upper fold point's stability threshold.
///
/// With `w = 1-A+M+G+sqrt(D)` and `B = 1+A+M+G+sqrt(D)`:
/// `D = w [ (1+A-M-G-sqrt(D)) (1-A-M+G+sqrt(D)) + 2 B (A-G-sqrt(D)) ]`, so
/// that `f(u2) = D / (4B)`. Passing `sqrt_delta = 0` gives the saddle-node constant.
pub fn fold_threshold_numerator(a: f64, m: f64, g: f64, sqrt_delta: f64) -> f64 {
    let w = 1.0 - a + m + g + sqrt_delta;
    let b = 1.0 + a + m + g + sqrt_delta;
    w * ((1.0 + a - m - g - sqrt_delta) * (1.0 - a - m + g + sqrt_delta)
        + 2.0 * b * (a - g - sqrt_delta))
}

/// `S` threshold of the upper interior point when the discriminant is positive.
pub fn upper_point_threshold(a: f64, m: f64, g: f64, delta: f64) -> f64 {
    let sd = delta.max(0.0).sqrt();
    fold_threshold_numerator(a, m, g, sd) / (4.0 * (1.0 + a + m + g + sd))
}

/// `S` threshold of the saddle-node point `(E, E + C)`.
pub fn saddle_node_threshold(a: f64, m: f64, g: f64) -> f64 {
    fold_threshold_numerator(a, m, g, 0.0) / (4.0 * (1.0 + a + m + g))
}

/// Auxiliary functions evaluated at one interior point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxFunctions {
    pub f_of_u: f64,
    pub h_of_u: f64,
    pub gprime_of_u: f64,
    /// Upper-point threshold numerator (fold regime, positive discriminant).
    pub d_const: Option<f64>,
    /// Saddle-node threshold numerator (fold regime, zero discriminant).
    pub sn_h: Option<f64>,
}

/// Interior roots of the rescaled cubic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorRoots {
    pub u1: Option<f64>,
    pub u2: Option<f64>,
    pub u3: Option<f64>,
    /// Magnitude of the negative root (fold regime only).
    pub g: Option<f64>,
    /// Double-root location `(1-A+M+G)/2` (fold regime only).
    pub e: Option<f64>,
    /// Discriminant of the deflated quadratic.
    pub delta: Option<f64>,
    /// The discriminant is zero within [`DOUBLE_ROOT_TOL`]; `u1` is the double root.
    pub double_root: bool,
    pub regime: RootRegime,
    pub coefficients: CubicCoefficients,
    /// Every real root of the cubic (all signs), ascending.
    pub real_roots: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootRegime {
    /// Weak Allee without alternative food: deflation by the persistent root `u1`.
    WeakAllee,
    /// One negative root `-G`; deflation by `(u + G)`.
    Fold,
    /// No closed-form structure applies; roots come straight from the Sturm census.
    Census,
}

impl InteriorRoots {
    /// Interior roots in ascending order (a double root appears once).
    pub fn roots(&self) -> Vec<f64> {
        let mut v: Vec<f64> = [self.u1, self.u2, self.u3].into_iter().flatten().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

pub fn interior_roots_allee(np: &NonDimParams) -> Result<InteriorRoots> {
    np.validate()?;
    if np.m == 0.0 {
        return Err(Error::InvalidParameter {
            name: "M",
            value: 0.0,
            reason: "the interior analysis needs a nonzero Allee threshold",
        });
    }
    if np.m > 0.0 {
        return fold_roots(np, 0.0);
    }
    weak_allee_roots(np)
}

pub fn interior_roots_allee_altfood(np: &NonDimParams) -> Result<InteriorRoots> {
    np.validate()?;
    fold_roots(np, np.c)
}

/// Dispatches to the interior-root solver of an Allee variant.
pub fn interior_roots(variant: ModelVariant, np: &NonDimParams) -> Result<InteriorRoots> {
    match variant {
        ModelVariant::MhtAllee => interior_roots_allee(np),
        ModelVariant::MhtAlleeAltFood => interior_roots_allee_altfood(np),
        _ => Err(Error::UnsupportedVariant {
            variant,
            what: "rescaled interior roots",
        }),
    }
}

fn weak_allee_roots(np: &NonDimParams) -> Result<InteriorRoots> {
    let coefficients = CubicCoefficients::new(np, 0.0);
    let poly = coefficients.poly();
    let real: Vec<f64> = real_roots(&poly).into_iter().map(|r| r.value).collect();
    let positive: Vec<f64> = real
        .iter()
        .copied()
        .filter(|&u| u > 0.0 && u < 1.0)
        .collect();
    // The root continued from Q -> infinity is the smallest one in (0, 1).
    let u1 = *positive.first().ok_or_else(|| Error::Inconsistent {
        stage: "interior_roots_allee",
        detail: "no root in (0, 1) although p(0) < 0 < p(1)".into(),
    })?;
    let (a, m) = (np.a, np.m);
    let sum = 1.0 - a + m - u1;
    let delta = sum * sum + 4.0 * a * m / u1;
    let (mut u2, mut u3) = (None, None);
    if sum > 0.0 && delta > 0.0 {
        let sd = delta.sqrt();
        let lo = coefficients.newton(0.5 * (sum - sd));
        let hi = coefficients.newton(0.5 * (sum + sd));
        if lo > 0.0 && hi < 1.0 && lo > u1 {
            u2 = Some(lo);
            u3 = Some(hi);
        }
    }
    Ok(InteriorRoots {
        u1: Some(u1),
        u2,
        u3,
        g: None,
        e: None,
        delta: Some(delta),
        double_root: false,
        regime: RootRegime::WeakAllee,
        coefficients,
        real_roots: real,
    })
}

fn fold_roots(np: &NonDimParams, c: f64) -> Result<InteriorRoots> {
    let coefficients = CubicCoefficients::new(np, c);
    let poly = coefficients.poly();
    let real: Vec<f64> = real_roots(&poly).into_iter().map(|r| r.value).collect();
    let negatives: Vec<f64> = real.iter().copied().filter(|&u| u < 0.0).collect();
    let (a, m, q) = (np.a, np.m, np.q);

    if negatives.len() != 1 {
        // Weak Allee with AM + CQ <= 0: no unique negative root to deflate by.
        let interior: Vec<f64> = real
            .iter()
            .copied()
            .filter(|&u| u > 0.0 && u < 1.0)
            .collect();
        return Ok(InteriorRoots {
            u1: interior.first().copied(),
            u2: interior.get(1).copied(),
            u3: interior.get(2).copied(),
            g: None,
            e: None,
            delta: None,
            double_root: false,
            regime: RootRegime::Census,
            coefficients,
            real_roots: real,
        });
    }

    let g = -negatives[0];
    // Deflated quadratic: u^2 - (G+M+1-A) u + b0.
    let b0 = m + q - a * (m + 1.0) + g * (g - a + m + 1.0);
    if g + m > 0.0 && (c - g).abs() > 1e-12 {
        let q_rebuilt = (g + 1.0) * (g + m) * (g - a) / (c - g);
        if (q - q_rebuilt).abs() > 1e-6 * q.max(1e-300) {
            return Err(Error::Inconsistent {
                stage: "interior_roots_allee_altfood",
                detail: format!("reconstructed Q = {q_rebuilt} differs from Q = {q} (G = {g})"),
            });
        }
        let ordered = (a < g && g < c) || (a > g && g > c);
        if !ordered {
            return Err(Error::Inconsistent {
                stage: "interior_roots_allee_altfood",
                detail: format!("G = {g} is not between A = {a} and C = {c}"),
            });
        }
    }
    let lin = g - a + m + 1.0;
    let delta = lin * lin - 4.0 * b0;
    let e = 0.5 * lin;
    let scale = lin.powi(2).max(1.0);

    let mut out = InteriorRoots {
        u1: None,
        u2: None,
        u3: None,
        g: Some(g),
        e: Some(e),
        delta: Some(delta),
        double_root: false,
        regime: RootRegime::Fold,
        coefficients,
        real_roots: real,
    };
    if (delta / scale).abs() < DOUBLE_ROOT_TOL {
        if e > 0.0 && e < 1.0 {
            out.u1 = Some(e);
            out.double_root = true;
        }
    } else if delta > 0.0 {
        let sd = delta.sqrt();
        let lo = coefficients.newton(0.5 * (lin - sd));
        let hi = coefficients.newton(0.5 * (lin + sd));
        let inside: Vec<f64> = [lo, hi]
            .into_iter()
            .filter(|&u| u > 0.0 && u < 1.0)
            .collect();
        out.u1 = inside.first().copied();
        out.u2 = inside.get(1).copied();
    }
    Ok(out)
}

/// Stability class assigned by the closed-form sign rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaClass {
    Saddle,
    Attractor,
    Repeller,
    StableSaddleNode,
    UnstableSaddleNode,
    NotCovered,
}

/// Which sign rule produced a [`LemmaClass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaRule {
    /// Weak Allee, single interior point: `det > 0`, trace sign from `f(u1) - S`.
    WeakUnique,
    /// Weak Allee, three points: `u1` is a saddle iff `h(u1) < 0`.
    WeakFirst,
    /// Weak Allee, three points: `u2` is a saddle iff `u2 > u1`.
    WeakSecond,
    /// Weak Allee, three points: `u3` is a saddle iff `u3 < u1`.
    WeakThird,
    /// Axis equilibria `(0,0)`, `(1,0)`, `(M,0)`, `(0,C)`.
    AxisPoints,
    /// Fold regime: the lower interior point is always a saddle.
    FoldLower,
    /// Fold regime: the upper interior point, threshold `D / (4B)`.
    FoldUpper,
    /// Fold regime at zero discriminant: saddle-node at `(E, E + C)`.
    SaddleNode,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Boundary,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub location: State,
    pub kind: EquilibriumKind,
    pub jacobian: Mat2,
    /// Determinant from the closed form (interior points) or the matrix.
    pub det: f64,
    /// Trace from the closed form (interior points) or the matrix.
    pub trace: f64,
    pub eigenvalues: [(f64, f64); 2],
    pub lemma_class: LemmaClass,
    pub numeric_class: NumericClass,
    pub which_lemma: LemmaRule,
    /// `|S - threshold|` or `|det|` fell below the margin.
    pub marginal: bool,
    /// The `S` value at which the trace changes sign, when defined.
    pub threshold: Option<f64>,
    pub aux: Option<AuxFunctions>,
}

/// Analytic Jacobian of the dimensional vector field.
pub fn jacobian_dimensional(
    variant: ModelVariant,
    prey: f64,
    predator: f64,
    p: &DimensionalParams,
) -> Result<Mat2> {
    let (cons, cons_d) = consumption(variant, prey, p);
    let growth = prey_growth_per_capita(variant, prey, p);
    let growth_d = prey_growth_per_capita_deriv(variant, prey, p);
    let j11 = growth + prey * growth_d - cons_d * predator;
    let j12 = -cons;
    let capacity = p.n * prey + p.effective_c(variant);
    if capacity == 0.0 {
        return Err(Error::Singular {
            variant,
            prey,
            predator,
        });
    }
    let ratio = predator / capacity;
    let (j21, j22) = (p.s * ratio * ratio * p.n, p.s * (1.0 - 2.0 * ratio));
    Ok(Mat2([[j11, j12], [j21, j22]]))
}

/// Analytic Jacobian of the rescaled vector field with offset `c`.
pub fn jacobian_rescaled_raw(c: f64, u: f64, v: f64, np: &NonDimParams) -> Mat2 {
    let (a, m, q, s) = (np.a, np.m, np.q, np.s);
    let g = allee_cubic_g(u, a, m);
    let gp = allee_cubic_g_prime(u, a, m);
    Mat2([
        [
            u * (u + c) * gp + (2.0 * u + c) * (g - q * v),
            -q * u * (u + c),
        ],
        [
            s * v * (a + c + 2.0 * u - v),
            s * (c + u - 2.0 * v) * (u + a),
        ],
    ])
}

pub fn jacobian_rescaled(variant: ModelVariant, x: State, np: &NonDimParams) -> Result<Mat2> {
    if !variant.has_allee() {
        return Err(Error::UnsupportedVariant {
            variant,
            what: "a rescaled frame",
        });
    }
    Ok(jacobian_rescaled_raw(
        np.effective_c(variant),
        x.prey,
        x.predator,
        np,
    ))
}

/// Jacobian in the frame carried by `x`.
pub fn jacobian(variant: ModelVariant, x: State, p: &DimensionalParams) -> Result<Mat2> {
    match x.frame {
        Frame::Dimensional => jacobian_dimensional(variant, x.prey, x.predator, p),
        Frame::Rescaled => jacobian_rescaled(variant, x, &nondimensionalize(p)?),
    }
}

fn lemma_by_threshold(s: f64, threshold: f64) -> (LemmaClass, bool) {
    let marginal = (s - threshold).abs() < MARGIN;
    if s < threshold {
        (LemmaClass::Repeller, marginal)
    } else {
        (LemmaClass::Attractor, marginal)
    }
}

/// Classifies an interior point `u` of an Allee variant in the rescaled frame.
///
/// `roots` must come from [`interior_roots`] for the same parameters.
pub fn classify(
    variant: ModelVariant,
    u: f64,
    np: &NonDimParams,
    roots: &InteriorRoots,
) -> Result<EquilibriumReport> {
    if !variant.has_allee() {
        return Err(Error::UnsupportedVariant {
            variant,
            what: "rescaled classification",
        });
    }
    let c = np.effective_c(variant);
    let (a, m, q, s) = (np.a, np.m, np.q, np.s);
    let v = u + c;
    let j = jacobian_rescaled_raw(c, u, v, np);
    let gp = allee_cubic_g_prime(u, a, m);
    let f = aux_f(u, a, m);
    let h = aux_h(u, a, m);
    let (det, trace) = if c == 0.0 {
        (s * u * u * (u + a) * h, u * (u + a) * (f - s))
    } else {
        (
            s * u * (u + a) * (u + c) * (u + c) * (q - gp),
            (u + c) * (u + a) * (f - s),
        )
    };

    let mut aux = AuxFunctions {
        f_of_u: f,
        h_of_u: h,
        gprime_of_u: gp,
        d_const: None,
        sn_h: None,
    };
    let is = |x: Option<f64>| x.is_some_and(|r| (r - u).abs() <= 1e-12 * r.abs().max(1.0));

    let (lemma_class, which_lemma, threshold, lemma_marginal) = match roots.regime {
        RootRegime::WeakAllee => {
            let (hc, lc) = (roots.coefficients.h_coef, roots.coefficients.l_coef);
            let u1 = roots.u1.unwrap_or(f64::NAN);
            let delta = roots.delta.unwrap_or(f64::NAN);
            if hc <= 0.0 || lc >= 0.0 {
                let (cls, mg) = lemma_by_threshold(s, f);
                (cls, LemmaRule::WeakUnique, Some(f), mg)
            } else if delta > 0.0 && roots.u2.is_some() {
                let (rule, saddle) = if is(roots.u1) {
                    (LemmaRule::WeakFirst, aux_h(u1, a, m) < 0.0)
                } else if is(roots.u2) {
                    (LemmaRule::WeakSecond, u > u1)
                } else {
                    (LemmaRule::WeakThird, u < u1)
                };
                if saddle {
                    (LemmaClass::Saddle, rule, Some(f), false)
                } else {
                    let (cls, mg) = lemma_by_threshold(s, f);
                    (cls, rule, Some(f), mg)
                }
            } else {
                (LemmaClass::NotCovered, LemmaRule::None, Some(f), false)
            }
        }
        RootRegime::Fold => {
            let g = roots.g.unwrap_or(f64::NAN);
            let delta = roots.delta.unwrap_or(f64::NAN);
            if roots.double_root {
                let sn_h = fold_threshold_numerator(a, m, g, 0.0);
                aux.sn_h = Some(sn_h);
                let thr = saddle_node_threshold(a, m, g);
                let marginal = (s - thr).abs() < MARGIN;
                let cls = if s > thr {
                    LemmaClass::StableSaddleNode
                } else {
                    LemmaClass::UnstableSaddleNode
                };
                (cls, LemmaRule::SaddleNode, Some(thr), marginal)
            } else if is(roots.u1) && roots.u2.is_some() {
                (LemmaClass::Saddle, LemmaRule::FoldLower, None, false)
            } else if is(roots.u2) {
                let d = fold_threshold_numerator(a, m, g, delta.sqrt());
                aux.d_const = Some(d);
                let thr = upper_point_threshold(a, m, g, delta);
                let (cls, mg) = lemma_by_threshold(s, thr);
                (cls, LemmaRule::FoldUpper, Some(thr), mg)
            } else {
                (LemmaClass::NotCovered, LemmaRule::None, Some(f), false)
            }
        }
        RootRegime::Census => (LemmaClass::NotCovered, LemmaRule::None, Some(f), false),
    };

    let numeric_class = classify_numeric(&j, MARGIN);
    Ok(EquilibriumReport {
        location: State::rescaled(u, v),
        kind: EquilibriumKind::Interior,
        jacobian: j,
        det,
        trace,
        eigenvalues: j.eigenvalues(),
        lemma_class,
        numeric_class,
        which_lemma,
        marginal: lemma_marginal || det.abs() < MARGIN || numeric_class.is_marginal(),
        threshold,
        aux: Some(aux),
    })
}

/// All interior equilibria of an Allee variant, classified, in the rescaled frame.
pub fn interior_equilibria(
    variant: ModelVariant,
    np: &NonDimParams,
) -> Result<Vec<EquilibriumReport>> {
    let roots = interior_roots(variant, np)?;
    roots
        .roots()
        .into_iter()
        .map(|u| classify(variant, u, np, &roots))
        .collect()
}

fn boundary_report(
    j: Mat2,
    location: State,
    lemma_class: LemmaClass,
    margin_abs: bool,
) -> EquilibriumReport {
    let numeric_class = if margin_abs {
        classify_numeric(&j, MARGIN)
    } else {
        classify_scaled(&j)
    };
    EquilibriumReport {
        location,
        kind: EquilibriumKind::Boundary,
        jacobian: j,
        det: j.det(),
        trace: j.trace(),
        eigenvalues: j.eigenvalues(),
        lemma_class,
        numeric_class,
        which_lemma: if lemma_class == LemmaClass::NotCovered {
            LemmaRule::None
        } else {
            LemmaRule::AxisPoints
        },
        marginal: numeric_class.is_marginal(),
        threshold: None,
        aux: None,
    }
}

/// Axis equilibria of an Allee variant in the rescaled frame.
///
/// `(0,0)`, `(1,0)`, `(M,0)` when `M > 0`, and `(0,C)` with alternative food.
/// The axis sign rules assume a strong Allee effect; with `M <= 0` the origin
/// and `(0,C)` are reported as not covered.
pub fn boundary_equilibria(
    variant: ModelVariant,
    np: &NonDimParams,
) -> Result<Vec<EquilibriumReport>> {
    if !variant.has_allee() {
        return Err(Error::UnsupportedVariant {
            variant,
            what: "rescaled boundary equilibria",
        });
    }
    np.validate()?;
    let c = np.effective_c(variant);
    let strong = np.m > 0.0;
    let mut out = Vec::new();
    let origin_class = if c > 0.0 && strong {
        LemmaClass::Saddle
    } else {
        LemmaClass::NotCovered
    };
    out.push(boundary_report(
        jacobian_rescaled_raw(c, 0.0, 0.0, np),
        State::rescaled(0.0, 0.0),
        origin_class,
        false,
    ));
    out.push(boundary_report(
        jacobian_rescaled_raw(c, 1.0, 0.0, np),
        State::rescaled(1.0, 0.0),
        LemmaClass::Saddle,
        false,
    ));
    if strong {
        out.push(boundary_report(
            jacobian_rescaled_raw(c, np.m, 0.0, np),
            State::rescaled(np.m, 0.0),
            LemmaClass::Repeller,
            false,
        ));
    }
    if c > 0.0 {
        let cls = if strong {
            LemmaClass::Attractor
        } else {
            LemmaClass::NotCovered
        };
        out.push(boundary_report(
            jacobian_rescaled_raw(c, 0.0, c, np),
            State::rescaled(0.0, c),
            cls,
            false,
        ));
    }
    Ok(out)
}

/// Numeric class with margins relative to the Jacobian's magnitude.
pub fn classify_scaled(j: &Mat2) -> NumericClass {
    let scale = j.max_abs().max(f64::MIN_POSITIVE);
    let normalized = j.scale(1.0 / scale);
    classify_numeric(&normalized, MARGIN)
}

/// Polynomial in `N` whose roots in `(0, K)` are the interior equilibria.
pub(crate) fn dimensional_interior_poly(variant: ModelVariant, p: &DimensionalParams) -> Poly {
    let c = p.effective_c(variant);
    // Prey per-capita growth times (N + a) minus q (nN + c), expanded.
    // logistic factor: r (1 - N/K) = r - (r/K) N
    let logistic = [p.r, -p.r / p.k];
    let mut growth: Vec<f64> = logistic.to_vec();
    if variant.has_allee() {
        growth = mul(&growth, &[-p.m, 1.0]);
    }
    if variant.has_holling2() {
        growth = mul(&growth, &[p.a, 1.0]);
    }
    let predation = [p.q * c, p.q * p.n];
    let len = growth.len().max(2);
    let coeffs: Vec<f64> = (0..len)
        .map(|i| growth.get(i).copied().unwrap_or(0.0) - predation.get(i).copied().unwrap_or(0.0))
        .collect();
    Poly::new(coeffs)
}

fn mul(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Interior equilibria of any variant in the dimensional frame, ascending in `N`.
pub fn interior_points_dimensional(
    variant: ModelVariant,
    p: &DimensionalParams,
) -> Result<Vec<State>> {
    p.validate()?;
    let poly = dimensional_interior_poly(variant, p);
    let dp = poly.derivative();
    let c = p.effective_c(variant);
    Ok(real_roots_in(&poly, 0.0, p.k)
        .into_iter()
        .map(|r| {
            let mut n = r.value;
            let d = dp.eval(n);
            if d != 0.0 && !r.touching {
                let next = n - poly.eval(n) / d;
                if poly.eval(next).abs() <= poly.eval(n).abs() {
                    n = next;
                }
            }
            State::dimensional(n, p.n * n + c)
        })
        .collect())
}

/// Complete equilibrium census of a variant in the dimensional frame.
///
/// The origin is omitted for variants whose predator equation is singular on
/// the predator axis. For the Allee variants the lemma classes are carried
/// over from the rescaled analysis (the frames are related by a positive time
/// change, so classes agree at corresponding points).
pub fn equilibria_dimensional(
    variant: ModelVariant,
    p: &DimensionalParams,
) -> Result<Vec<EquilibriumReport>> {
    p.validate()?;
    let c = p.effective_c(variant);
    let mut out = Vec::new();

    let mut axis = Vec::new();
    if !variant.singular_at_zero_prey() {
        axis.push(State::dimensional(0.0, 0.0));
        axis.push(State::dimensional(0.0, c));
    }
    if variant.has_allee() && p.m > 0.0 {
        axis.push(State::dimensional(p.m, 0.0));
    }
    axis.push(State::dimensional(p.k, 0.0));
    for x in axis {
        let j = jacobian_dimensional(variant, x.prey, x.predator, p)?;
        out.push(boundary_report(j, x, LemmaClass::NotCovered, false));
    }

    let rescaled = if variant.has_allee() && p.m != 0.0 {
        let np = nondimensionalize(p)?;
        Some(interior_equilibria(variant, &np)?)
    } else {
        None
    };
    for x in interior_points_dimensional(variant, p)? {
        let j = jacobian_dimensional(variant, x.prey, x.predator, p)?;
        let mut report = boundary_report(j, x, LemmaClass::NotCovered, false);
        report.kind = EquilibriumKind::Interior;
        report.which_lemma = LemmaRule::None;
        if let Some(reports) = &rescaled {
            let u = x.prey / p.k;
            if let Some(r) = reports
                .iter()
                .find(|r| (r.location.prey - u).abs() <= 1e-6 * u.max(1e-3))
            {
                report.lemma_class = r.lemma_class;
                report.which_lemma = r.which_lemma;
                report.threshold = r.threshold.map(|t| t * p.r * p.k);
            }
        }
        out.push(report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::vector_field_rescaled;

    fn defaults_np(m: f64) -> NonDimParams {
        nondimensionalize(&DimensionalParams::default().with_m(m)).unwrap()
    }

    /// Brute-force sign-change scan on a 1e-5 grid.
    fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
        let n = ((hi - lo) / 1e-5) as usize;
        let mut out = Vec::new();
        let mut prev = f(lo);
        for i in 1..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let y = f(x);
            if (y > 0.0) != (prev > 0.0) {
                let (mut a, mut b) = (x - (hi - lo) / n as f64, x);
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    if (f(mid) > 0.0) == (f(a) > 0.0) {
                        a = mid
                    } else {
                        b = mid
                    }
                }
                out.push(0.5 * (a + b));
            }
            prev = y;
        }
        out
    }

    #[test]
    fn strong_allee_default_roots_match_scan() {
        let np = defaults_np(15.0);
        let roots = interior_roots_allee(&np).unwrap();
        let c = roots.coefficients;
        let oracle = scan_roots(|u| c.eval(u), -1.0, 1.0);
        assert_eq!(oracle.len(), 3);
        assert!((oracle[0] + 0.0331).abs() < 2e-4);
        assert!((oracle[1] - 0.1253).abs() < 1e-4);
        assert!((oracle[2] - 0.9678).abs() < 1e-4);
        let got = roots.roots();
        assert_eq!(got.len(), 2);
        assert!((got[0] - oracle[1]).abs() < 1e-9);
        assert!((got[1] - oracle[2]).abs() < 1e-9);
        // Vieta: sum = H, product = -AM
        let all = &roots.real_roots;
        assert!((all.iter().sum::<f64>() - 1.06).abs() < 1e-8);
        assert!((all.iter().product::<f64>() + 0.004).abs() < 1e-8);
    }

    #[test]
    fn weak_allee_default_single_root() {
        let np = defaults_np(-15.0);
        let roots = interior_roots_allee(&np).unwrap();
        let c = roots.coefficients;
        let oracle = scan_roots(|u| c.eval(u), 0.0, 1.0);
        assert_eq!(oracle.len(), 1);
        assert!((oracle[0] - 0.9740).abs() < 1e-4);
        assert_eq!(roots.roots().len(), 1);
        assert!((roots.u1.unwrap() - oracle[0]).abs() < 1e-9);
        assert_eq!(roots.real_roots.len(), 1, "other two roots complex");
        let (du, dv) = vector_field_rescaled(
            ModelVariant::MhtAllee,
            State::rescaled(roots.u1.unwrap(), roots.u1.unwrap()),
            &np,
        )
        .unwrap();
        assert!(du.abs() < 1e-12 && dv.abs() < 1e-12);
    }

    #[test]
    fn strong_allee_large_q_no_interior() {
        let np = NonDimParams {
            a: 0.04,
            c: 0.0,
            q: 10.0,
            s: 0.002,
            m: 0.1,
        };
        let roots = interior_roots_allee(&np).unwrap();
        assert!(roots.roots().is_empty());
        let seq = crate::poly::sturm_sequence(&roots.coefficients.poly());
        assert_eq!(crate::poly::count_roots(&seq, 0.0, 1.0), 0);
    }

    #[test]
    fn altfood_default_fold_structure() {
        let np = defaults_np(15.0);
        let roots = interior_roots_allee_altfood(&np).unwrap();
        let c = roots.coefficients;
        let oracle = scan_roots(|u| c.eval(u), -1.0, 1.0);
        let g = roots.g.unwrap();
        assert!((g + oracle[0]).abs() < 1e-9);
        assert!((g - 0.0335).abs() < 1e-4);
        assert!(np.a > g && g > np.c);
        assert!((roots.delta.unwrap() - 0.7085).abs() < 1e-3);
        assert!((roots.u1.unwrap() - 0.1259).abs() < 1e-4);
        assert!((roots.u2.unwrap() - 0.9676).abs() < 1e-4);
        let e = roots.e.unwrap();
        assert!(np.m < roots.u1.unwrap() && roots.u1.unwrap() <= e && e <= roots.u2.unwrap());
    }

    #[test]
    fn altfood_large_q_has_no_interior() {
        let mut np = defaults_np(15.0);
        np.q = 5.0;
        let roots = interior_roots_allee_altfood(&np).unwrap();
        assert!(roots.delta.unwrap() < 0.0);
        assert!(roots.roots().is_empty());
    }

    #[test]
    fn boundary_census_defaults() {
        let np = defaults_np(15.0);
        let b = boundary_equilibria(ModelVariant::MhtAlleeAltFood, &np).unwrap();
        assert_eq!(b.len(), 4);
        let oc = b
            .iter()
            .find(|r| r.location.prey == 0.0 && r.location.predator > 0.0)
            .unwrap();
        assert_eq!(oc.lemma_class, LemmaClass::Attractor);
        assert_eq!(oc.numeric_class, NumericClass::Attractor);
        let ev = oc.eigenvalues;
        let want_u = -np.c * (np.a * np.m + np.q * np.c);
        let want_v = -np.a * np.c * np.s;
        assert!((want_u + 1.087e-5).abs() < 1e-8);
        assert!((want_v + 2.222e-7).abs() < 1e-10);
        assert!((ev[0].0 - want_u).abs() < 1e-15);
        assert!((ev[1].0 - want_v).abs() < 1e-15);
        let j = oc.jacobian.0;
        assert_eq!(j[0][1], 0.0);
        assert!((j[1][0] - np.a * np.c * np.s).abs() < 1e-18);
    }

    #[test]
    fn weak_boundary_excludes_threshold_point() {
        let np = defaults_np(-15.0);
        let b = boundary_equilibria(ModelVariant::MhtAlleeAltFood, &np).unwrap();
        assert!(b.iter().all(|r| r.location.prey >= 0.0));
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn weak_allee_default_is_attractor() {
        let np = defaults_np(-15.0);
        let reports = interior_equilibria(ModelVariant::MhtAllee, &np).unwrap();
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        let f = r.aux.unwrap().f_of_u;
        assert!((f + 0.9936).abs() < 1e-3, "f = {f}");
        assert_eq!(r.which_lemma, LemmaRule::WeakUnique);
        assert_eq!(r.lemma_class, LemmaClass::Attractor);
        assert_eq!(r.numeric_class, NumericClass::Attractor);
    }

    #[test]
    fn fold_lower_point_is_saddle() {
        let np = defaults_np(15.0);
        for v in [ModelVariant::MhtAllee, ModelVariant::MhtAlleeAltFood] {
            let reports = interior_equilibria(v, &np).unwrap();
            assert_eq!(reports.len(), 2);
            assert_eq!(reports[0].lemma_class, LemmaClass::Saddle);
            assert_eq!(reports[0].numeric_class, NumericClass::Saddle);
            assert_eq!(reports[1].lemma_class, reports[1].numeric_class_as_lemma());
        }
    }

    #[test]
    fn upper_threshold_sweep_matches_eigenvalues() {
        // Sweep S across the upper point's threshold near the fold.
        let mut np = defaults_np(15.0);
        np.q = 5000.0 * 0.025 / 600.0;
        let roots = interior_roots_allee_altfood(&np).unwrap();
        let u2 = roots.u2.unwrap();
        let thr = upper_point_threshold(np.a, np.m, roots.g.unwrap(), roots.delta.unwrap());
        assert!(thr > 0.0);
        assert!((thr - aux_f(u2, np.a, np.m)).abs() < 1e-12);
        for (ds, want) in [
            (-1e-4, NumericClass::Repeller),
            (1e-4, NumericClass::Attractor),
        ] {
            np.s = thr + ds;
            let r = classify(ModelVariant::MhtAlleeAltFood, u2, &np, &roots).unwrap();
            assert_eq!(r.numeric_class, want);
            assert_eq!(r.lemma_class, r.numeric_class_as_lemma());
        }
    }

    #[test]
    fn closed_forms_match_matrix() {
        for (v, m) in [
            (ModelVariant::MhtAllee, 15.0),
            (ModelVariant::MhtAllee, -15.0),
            (ModelVariant::MhtAlleeAltFood, 15.0),
        ] {
            let np = defaults_np(m);
            for r in interior_equilibria(v, &np).unwrap() {
                let (d, t) = (r.jacobian.det(), r.jacobian.trace());
                assert!(
                    (r.det - d).abs() <= 1e-12 * d.abs().max(1e-300),
                    "{v:?} det"
                );
                assert!(
                    (r.trace - t).abs() <= 1e-12 * t.abs().max(1e-300),
                    "{v:?} trace"
                );
            }
        }
    }

    #[test]
    fn jacobian_off_diagonals_at_interior_point() {
        let np = defaults_np(-15.0);
        let u1 = interior_roots_allee(&np).unwrap().u1.unwrap();
        let j = jacobian_rescaled(ModelVariant::MhtAllee, State::rescaled(u1, u1), &np)
            .unwrap()
            .0;
        assert!((j[0][1] + np.q * u1 * u1).abs() < 1e-15);
        assert!((j[1][0] - np.s * u1 * (u1 + np.a)).abs() < 1e-15);
        assert!((j[1][1] + np.s * u1 * (u1 + np.a)).abs() < 1e-15);
    }

    #[test]
    fn dimensional_census_matches_rescaled() {
        let p = DimensionalParams::default();
        let np = nondimensionalize(&p).unwrap();
        let dim = interior_points_dimensional(ModelVariant::MhtAlleeAltFood, &p).unwrap();
        let res = interior_roots_allee_altfood(&np).unwrap().roots();
        assert_eq!(dim.len(), res.len());
        for (x, u) in dim.iter().zip(res) {
            assert!((x.prey / p.k - u).abs() < 1e-10);
        }
    }

    #[test]
    fn mht_and_altfood_default_census() {
        let p = DimensionalParams::default();
        let mht = interior_points_dimensional(ModelVariant::Mht, &p).unwrap();
        assert_eq!(mht.len(), 1);
        assert!((mht[0].prey - 1.751).abs() < 1e-3);
        let alt = interior_points_dimensional(ModelVariant::MhtAltFood, &p).unwrap();
        assert_eq!(alt.len(), 1);
        assert!((alt[0].prey - 1.2415).abs() < 1e-3);
        let lg = interior_points_dimensional(ModelVariant::LeslieGower, &p).unwrap();
        assert_eq!(lg.len(), 1);
        assert!((lg[0].prey - 4.0 / (4.0 / 150.0 + 700.0 * 0.025)).abs() < 1e-12);
    }

    impl EquilibriumReport {
        fn numeric_class_as_lemma(&self) -> LemmaClass {
            match self.numeric_class {
                NumericClass::Saddle => LemmaClass::Saddle,
                NumericClass::Attractor => LemmaClass::Attractor,
                NumericClass::Repeller => LemmaClass::Repeller,
                _ => LemmaClass::NotCovered,
            }
        }
    }
}
