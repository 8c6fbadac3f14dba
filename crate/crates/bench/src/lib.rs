//! Benchmark fixtures for `mhtlab-core`.

use mhtlab_core::{DimensionalParams, State};

/// Default parameters with the predator intrinsic rate replaced.
pub fn params_with_s(s: f64) -> DimensionalParams {
    DimensionalParams {
        s,
        ..DimensionalParams::default()
    }
}

/// Default parameters with a weak Allee effect.
pub fn weak_allee() -> DimensionalParams {
    DimensionalParams {
        m: -15.0,
        ..DimensionalParams::default()
    }
}

/// A few starting points inside the positive quadrant.
pub fn seeds() -> [State; 3] {
    [
        State::dimensional(60.0, 2.5),
        State::dimensional(100.0, 1.0),
        State::dimensional(140.0, 4.0),
    ]
}
