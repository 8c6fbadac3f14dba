//! Model variants, parameter sets and vector fields.
//!
//! Five predator-prey models share one skeleton: a prey equation built from a
//! growth term and a predation term, and a Leslie-Gower type predator equation
//! whose carrying capacity is proportional to prey (plus an optional
//! alternative-food offset `c`).
//!
//! | variant            | prey growth               | predation        | predator capacity |
//! |--------------------|---------------------------|------------------|-------------------|
//! | `LeslieGower`      | `rN(1-N/K)`               | `qNP`            | `nN`              |
//! | `Mht`              | `rN(1-N/K)`               | `qNP/(N+a)`      | `nN`              |
//! | `MhtAllee`         | `rN(1-N/K)(N-m)`          | `qNP/(N+a)`      | `nN`              |
//! | `MhtAltFood`       | `rN(1-N/K)`               | `qNP/(N+a)`      | `nN+c`            |
//! | `MhtAlleeAltFood`  | `rN(1-N/K)(N-m)`          | `qNP/(N+a)`      | `nN+c`            |
//!
//! The two Allee variants also have a rescaled polynomial form in
//! `(u, v) = (N/K, P/(nK))` obtained with a positive time change; see
//! [`vector_field_rescaled`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight ecological parameters of the dimensional models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalParams {
    /// Prey intrinsic growth rate.
    pub r: f64,
    /// Prey carrying capacity.
    #[serde(rename = "K")]
    pub k: f64,
    /// Maximum predation rate.
    pub q: f64,
    /// Half-saturation prey density.
    pub a: f64,
    /// Predator intrinsic growth rate.
    pub s: f64,
    /// Quality of prey as food for the predator.
    pub n: f64,
    /// Alternative-food offset of the predator carrying capacity.
    pub c: f64,
    /// Allee threshold (positive: strong, negative: weak).
    pub m: f64,
}

impl Default for DimensionalParams {
    /// Vole and weasel values at the operating point `(q, s) = (700, 1.25)`
    /// with a strong Allee threshold `m = 15`.
    fn default() -> Self {
        Self {
            r: 4.0,
            k: 150.0,
            q: 700.0,
            a: 6.0,
            s: 1.25,
            n: 0.025,
            c: 0.01,
            m: 15.0,
        }
    }
}

impl DimensionalParams {
    pub fn with_qs(self, q: f64, s: f64) -> Self {
        Self { q, s, ..self }
    }

    pub fn with_m(self, m: f64) -> Self {
        Self { m, ..self }
    }

    pub fn with_c(self, c: f64) -> Self {
        Self { c, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r", self.r),
            ("K", self.k),
            ("q", self.q),
            ("a", self.a),
            ("s", self.s),
            ("n", self.n),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "c",
                value: self.c,
                reason: "must be finite and >= 0",
            });
        }
        if !(self.m.is_finite() && self.m < self.k) {
            return Err(Error::InvalidParameter {
                name: "m",
                value: self.m,
                reason: "must be finite and < K",
            });
        }
        Ok(())
    }

    /// Alternative-food offset seen by `variant` (zero when the variant has none).
    pub fn effective_c(&self, variant: ModelVariant) -> f64 {
        if variant.has_alt_food() {
            self.c
        } else {
            0.0
        }
    }
}

/// Rescaled parameters of the Allee models.
///
/// `A = a/K`, `C = c/(nK)`, `Q = qn/(rK)`, `S = s/(rK)`, `M = m/K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonDimParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl NonDimParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("A", self.a), ("Q", self.q), ("S", self.s)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "C",
                value: self.c,
                reason: "must be finite and >= 0",
            });
        }
        if !(self.m.is_finite() && self.m < 1.0) {
            return Err(Error::InvalidParameter {
                name: "M",
                value: self.m,
                reason: "must be finite and < 1",
            });
        }
        Ok(())
    }

    /// Alternative-food offset seen by `variant` in the rescaled frame.
    pub fn effective_c(&self, variant: ModelVariant) -> f64 {
        if variant.has_alt_food() {
            self.c
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelVariant {
    LeslieGower,
    #[serde(rename = "MHT")]
    Mht,
    #[serde(rename = "MHT_Allee")]
    MhtAllee,
    #[serde(rename = "MHT_AltFood")]
    MhtAltFood,
    #[serde(rename = "MHT_AlleeAltFood")]
    MhtAlleeAltFood,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 5] = [
        ModelVariant::LeslieGower,
        ModelVariant::Mht,
        ModelVariant::MhtAllee,
        ModelVariant::MhtAltFood,
        ModelVariant::MhtAlleeAltFood,
    ];

    pub fn has_allee(self) -> bool {
        matches!(self, ModelVariant::MhtAllee | ModelVariant::MhtAlleeAltFood)
    }

    pub fn has_alt_food(self) -> bool {
        matches!(
            self,
            ModelVariant::MhtAltFood | ModelVariant::MhtAlleeAltFood
        )
    }

    /// Holling type II predation (every variant except Leslie-Gower).
    pub fn has_holling2(self) -> bool {
        !matches!(self, ModelVariant::LeslieGower)
    }

    /// Whether the predator equation is singular on the predator axis `N = 0`.
    pub fn singular_at_zero_prey(self) -> bool {
        !self.has_alt_food()
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::LeslieGower => "LeslieGower",
            ModelVariant::Mht => "MHT",
            ModelVariant::MhtAllee => "MHT_Allee",
            ModelVariant::MhtAltFood => "MHT_AltFood",
            ModelVariant::MhtAlleeAltFood => "MHT_AlleeAltFood",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModelVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!(
                    "unknown variant `{s}` (expected one of LeslieGower, MHT, MHT_Allee, MHT_AltFood, MHT_AlleeAltFood)"
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// `(N, P)` in voles/ha and weasels/ha, time in years.
    Dimensional,
    /// `(u, v) = (N/K, P/(nK))` with rescaled time.
    Rescaled,
}

impl Frame {
    pub fn name(self) -> &'static str {
        match self {
            Frame::Dimensional => "dimensional",
            Frame::Rescaled => "rescaled",
        }
    }
}

/// A (prey, predator) pair tagged with its frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub prey: f64,
    pub predator: f64,
    pub frame: Frame,
}

impl State {
    pub fn dimensional(prey: f64, predator: f64) -> Self {
        Self {
            prey,
            predator,
            frame: Frame::Dimensional,
        }
    }

    pub fn rescaled(prey: f64, predator: f64) -> Self {
        Self {
            prey,
            predator,
            frame: Frame::Rescaled,
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.prey, self.predator]
    }

    pub fn in_first_quadrant(&self) -> bool {
        self.prey >= 0.0 && self.predator >= 0.0
    }

    /// Converts between frames with `N = K u`, `P = n K v`.
    pub fn to_frame(self, frame: Frame, p: &DimensionalParams) -> State {
        match (self.frame, frame) {
            (Frame::Dimensional, Frame::Rescaled) => {
                State::rescaled(self.prey / p.k, self.predator / (p.n * p.k))
            }
            (Frame::Rescaled, Frame::Dimensional) => {
                State::dimensional(self.prey * p.k, self.predator * p.n * p.k)
            }
            _ => self,
        }
    }
}

pub fn nondimensionalize(p: &DimensionalParams) -> Result<NonDimParams> {
    for (name, value) in [("r", p.r), ("K", p.k), ("n", p.n)] {
        if value == 0.0 {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "division by zero in rescaling",
            });
        }
    }
    p.validate()?;
    let np = NonDimParams {
        a: p.a / p.k,
        c: p.c / (p.n * p.k),
        q: p.q * p.n / (p.r * p.k),
        s: p.s / (p.r * p.k),
        m: p.m / p.k,
    };
    np.validate()?;
    Ok(np)
}

/// Holling type II consumption `qN/(N+a)`.
pub fn holling2(prey: f64, q: f64, a: f64) -> f64 {
    q * prey / (prey + a)
}

/// Per-capita prey growth with an Allee threshold, `r(1-N/K)(N-m)`.
pub fn allee_per_capita(prey: f64, r: f64, k: f64, m: f64) -> f64 {
    r * (1.0 - prey / k) * (prey - m)
}

/// Per-capita predator growth with alternative food, `s(1 - P/(nN+c))`.
pub fn predator_per_capita_altfood(
    prey: f64,
    predator: f64,
    s: f64,
    n: f64,
    c: f64,
) -> Result<f64> {
    let capacity = n * prey + c;
    if capacity == 0.0 {
        return Err(Error::Singular {
            variant: ModelVariant::MhtAltFood,
            prey,
            predator,
        });
    }
    Ok(s * (1.0 - predator / capacity))
}

/// Per-capita prey growth in the absence of predators.
pub(crate) fn prey_growth_per_capita(
    variant: ModelVariant,
    prey: f64,
    p: &DimensionalParams,
) -> f64 {
    if variant.has_allee() {
        allee_per_capita(prey, p.r, p.k, p.m)
    } else {
        p.r * (1.0 - prey / p.k)
    }
}

/// Derivative of [`prey_growth_per_capita`] with respect to prey.
pub(crate) fn prey_growth_per_capita_deriv(
    variant: ModelVariant,
    prey: f64,
    p: &DimensionalParams,
) -> f64 {
    if variant.has_allee() {
        p.r * ((1.0 - prey / p.k) - (prey - p.m) / p.k)
    } else {
        -p.r / p.k
    }
}

/// Consumption per predator: `qN/(N+a)` or `qN`, and its prey derivative.
pub(crate) fn consumption(variant: ModelVariant, prey: f64, p: &DimensionalParams) -> (f64, f64) {
    if variant.has_holling2() {
        let value = holling2(prey, p.q, p.a);
        let deriv = p.q * p.a / ((prey + p.a) * (prey + p.a));
        (value, deriv)
    } else {
        (p.q * prey, p.q)
    }
}

/// Right-hand side `(dN/dt, dP/dt)` of the dimensional model.
pub fn vector_field(variant: ModelVariant, x: State, p: &DimensionalParams) -> Result<(f64, f64)> {
    let (prey, predator) = (x.prey, x.predator);
    let (dn, dp) = dimensional_rhs(variant, prey, predator, p)?;
    Ok((dn, dp))
}

pub(crate) fn dimensional_rhs(
    variant: ModelVariant,
    prey: f64,
    predator: f64,
    p: &DimensionalParams,
) -> Result<(f64, f64)> {
    let capacity = p.n * prey + p.effective_c(variant);
    let dn = prey * prey_growth_per_capita(variant, prey, p)
        - consumption(variant, prey, p).0 * predator;
    let dp = if predator == 0.0 {
        0.0
    } else if capacity == 0.0 {
        return Err(Error::Singular {
            variant,
            prey,
            predator,
        });
    } else {
        p.s * predator * (1.0 - predator / capacity)
    };
    Ok((dn, dp))
}

/// Right-hand side `(du/dtau, dv/dtau)` of the rescaled Allee models.
///
/// With `g(u) = (u+A)(1-u)(u-M)`:
///
/// * `MhtAllee`: `u^2 (g(u) - Qv)`, `S v (u+A)(u-v)`
/// * `MhtAlleeAltFood`: `u (u+C)(g(u) - Qv)`, `S v (u+A)(u-v+C)`
///
/// The first is the second with `C = 0`.
pub fn vector_field_rescaled(
    variant: ModelVariant,
    x: State,
    np: &NonDimParams,
) -> Result<(f64, f64)> {
    if !variant.has_allee() {
        return Err(Error::UnsupportedVariant {
            variant,
            what: "a rescaled frame",
        });
    }
    Ok(rescaled_rhs(
        np.effective_c(variant),
        x.prey,
        x.predator,
        np,
    ))
}

pub(crate) fn rescaled_rhs(c: f64, u: f64, v: f64, np: &NonDimParams) -> (f64, f64) {
    let g = allee_cubic_g(u, np.a, np.m);
    let du = u * (u + c) * (g - np.q * v);
    let dv = np.s * v * (u + np.a) * (u - v + c);
    (du, dv)
}

/// Positive factor `dt/dtau` linking rescaled and dimensional time for the
/// Allee variants (`u(u+A)/(rK)` or `(u+A)(u+C)/(rK)`).
pub fn rescaled_time_factor(variant: ModelVariant, u: f64, p: &DimensionalParams) -> Result<f64> {
    let a = p.a / p.k;
    match variant {
        ModelVariant::MhtAllee => Ok(u * (u + a) / (p.r * p.k)),
        ModelVariant::MhtAlleeAltFood => {
            let c = p.c / (p.n * p.k);
            Ok((u + a) * (u + c) / (p.r * p.k))
        }
        _ => Err(Error::UnsupportedVariant {
            variant,
            what: "a rescaled frame",
        }),
    }
}

/// `g(u) = (u+A)(1-u)(u-M)`.
pub fn allee_cubic_g(u: f64, a: f64, m: f64) -> f64 {
    (u + a) * (1.0 - u) * (u - m)
}

/// `g'(u) = (1-u)(u-M) + (u+A)(1-u) - (u+A)(u-M)`.
pub fn allee_cubic_g_prime(u: f64, a: f64, m: f64) -> f64 {
    (1.0 - u) * (u - m) + (u + a) * (1.0 - u) - (u + a) * (u - m)
}
