//! 2x2 Jacobians and eigenvalue-based classification.

use serde::{Deserialize, Serialize};

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Eigenvalues as `(re, im)` pairs, ordered by real part.
    pub fn eigenvalues(&self) -> [(f64, f64); 2] {
        let tr = self.trace();
        let det = self.det();
        let disc = 0.25 * tr * tr - det;
        if disc >= 0.0 {
            let root = disc.sqrt();
            // Stable quadratic formula for the smaller-magnitude root.
            let big = 0.5 * tr + root.copysign(tr);
            let small = if big != 0.0 { det / big } else { 0.0 };
            let (lo, hi) = if big < small {
                (big, small)
            } else {
                (small, big)
            };
            [(lo, 0.0), (hi, 0.0)]
        } else {
            let im = (-disc).sqrt();
            [(0.5 * tr, -im), (0.5 * tr, im)]
        }
    }

    pub fn scale(&self, k: f64) -> Mat2 {
        let m = self.0;
        Mat2([[k * m[0][0], k * m[0][1]], [k * m[1][0], k * m[1][1]]])
    }
}

/// Classification of a fixed point from its Jacobian eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericClass {
    Saddle,
    Attractor,
    Repeller,
    /// `det > 0` and trace within the margin: Hopf boundary.
    CenterMargin,
    /// `|det|` within the margin: a zero eigenvalue.
    Degenerate,
}

/// Default margin below which `|det|` or `|trace|` counts as zero.
pub const MARGIN: f64 = 1e-9;

/// Classifies with absolute margins on `det` and `trace`.
pub fn classify_numeric(j: &Mat2, margin: f64) -> NumericClass {
    let det = j.det();
    let tr = j.trace();
    if det.abs() < margin {
        NumericClass::Degenerate
    } else if det < 0.0 {
        NumericClass::Saddle
    } else if tr.abs() < margin {
        NumericClass::CenterMargin
    } else if tr < 0.0 {
        NumericClass::Attractor
    } else {
        NumericClass::Repeller
    }
}

impl NumericClass {
    pub fn is_marginal(self) -> bool {
        matches!(self, NumericClass::CenterMargin | NumericClass::Degenerate)
    }
}
