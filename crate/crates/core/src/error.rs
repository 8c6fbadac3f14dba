use thiserror::Error;

use crate::model::ModelVariant;

/// Errors raised by the analysis layer.
///
/// Variants split into two families: domain errors (bad parameters, states
/// outside a vector field's domain, unsupported requests) and numerical
/// failures (solver breakdowns). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("vector field of {variant:?} is singular at prey={prey}, predator={predator}")]
    Singular {
        variant: ModelVariant,
        prey: f64,
        predator: f64,
    },

    #[error("state ({prey}, {predator}) lies outside the closed first quadrant")]
    OutsideQuadrant { prey: f64, predator: f64 },

    #[error("{variant:?} does not support {what}")]
    UnsupportedVariant {
        variant: ModelVariant,
        what: &'static str,
    },

    #[error("step size underflow at t={t} (h={h}) in state ({prey}, {predator})")]
    StepSizeUnderflow {
        t: f64,
        h: f64,
        prey: f64,
        predator: f64,
    },

    #[error("{stage} did not converge after {iterations} iterations")]
    NotConverged {
        stage: &'static str,
        iterations: usize,
    },

    #[error("inconsistent result in {stage}: {detail}")]
    Inconsistent { stage: &'static str, detail: String },

    #[error("degenerate input to {stage}: {detail}")]
    Degenerate { stage: &'static str, detail: String },
}

impl Error {
    /// True for solver breakdowns, false for domain/input errors.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. }
                | Error::NotConverged { .. }
                | Error::Inconsistent { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
