//! Basin-of-attraction maps over a grid of initial conditions.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{detect_with, AttractorContext, AttractorKind, DetectBudget};
use crate::error::{Error, Result};
use crate::model::{DimensionalParams, ModelVariant, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Upper prey bound; defaults to `K`.
    pub prey_max: Option<f64>,
    /// Upper predator bound; defaults to `1.1 n K`.
    pub predator_max: Option<f64>,
}

impl GridSpec {
    pub fn square(n: usize) -> Self {
        Self {
            nx: n,
            ny: n,
            prey_max: None,
            predator_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinGrid {
    pub variant: ModelVariant,
    pub params: DimensionalParams,
    pub budget: DetectBudget,
    pub prey_axis: Vec<f64>,
    pub predator_axis: Vec<f64>,
    /// Row-major: `cells[j * nx + i]` holds the label of `(prey_axis[i], predator_axis[j])`.
    pub cells: Vec<AttractorKind>,
}

impl BasinGrid {
    pub fn get(&self, i: usize, j: usize) -> AttractorKind {
        self.cells[j * self.prey_axis.len() + i]
    }

    pub fn count(&self, kind: AttractorKind) -> usize {
        self.cells.iter().filter(|&&k| k == kind).count()
    }

    pub fn undetermined_fraction(&self) -> f64 {
        self.count(AttractorKind::Undetermined) as f64 / self.cells.len().max(1) as f64
    }

    /// Distinct labels present, in a fixed order.
    pub fn labels(&self) -> Vec<AttractorKind> {
        [
            AttractorKind::InteriorPoint,
            AttractorKind::InteriorCycle,
            AttractorKind::Origin,
            AttractorKind::PreyExtinctPoint,
            AttractorKind::Undetermined,
        ]
        .into_iter()
        .filter(|&k| self.count(k) > 0)
        .collect()
    }
}

/// Grid axes. Cells on the axes are excluded, so both start one spacing in.
pub fn grid_axes(p: &DimensionalParams, spec: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    if spec.nx == 0 || spec.ny == 0 {
        return Err(Error::InvalidParameter {
            name: "grid",
            value: spec.nx.min(spec.ny) as f64,
            reason: "grid dimensions must be positive",
        });
    }
    let nmax = spec.prey_max.unwrap_or(p.k);
    let pmax = spec.predator_max.unwrap_or(1.1 * p.n * p.k);
    for (name, v) in [("prey_max", nmax), ("predator_max", pmax)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                reason: "must be positive and finite",
            });
        }
    }
    let axis = |n: usize, max: f64| (1..=n).map(|i| max * i as f64 / n as f64).collect();
    Ok((axis(spec.nx, nmax), axis(spec.ny, pmax)))
}

pub fn basin_map(
    variant: ModelVariant,
    p: &DimensionalParams,
    spec: &GridSpec,
    budget: &DetectBudget,
) -> Result<BasinGrid> {
    basin_map_cancellable(variant, p, spec, budget, &AtomicBool::new(false))
}

/// [`basin_map`] that stops scheduling cells once `cancel` is set; the
/// remaining cells are reported as undetermined.
pub fn basin_map_cancellable(
    variant: ModelVariant,
    p: &DimensionalParams,
    spec: &GridSpec,
    budget: &DetectBudget,
    cancel: &AtomicBool,
) -> Result<BasinGrid> {
    p.validate()?;
    budget.tolerances.validate()?;
    let (prey_axis, predator_axis) = grid_axes(p, spec)?;
    let ctx = AttractorContext::new(variant, p)?;
    let nx = prey_axis.len();
    let cells = (0..nx * predator_axis.len())
        .into_par_iter()
        .map(|idx| {
            if cancel.load(Ordering::Relaxed) {
                return AttractorKind::Undetermined;
            }
            let ic = State::dimensional(prey_axis[idx % nx], predator_axis[idx / nx]);
            detect_with(&ctx, ic, budget)
                .map(|l| l.kind)
                .unwrap_or(AttractorKind::Undetermined)
        })
        .collect();
    Ok(BasinGrid {
        variant,
        params: *p,
        budget: *budget,
        prey_axis,
        predator_axis,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_skip_zero() {
        let p = DimensionalParams::default();
        let (x, y) = grid_axes(&p, &GridSpec::square(4)).unwrap();
        assert_eq!(x, vec![37.5, 75.0, 112.5, 150.0]);
        assert!((y[3] - 1.1 * 0.025 * 150.0).abs() < 1e-12);
    }

    #[test]
    fn strong_allee_small_grid_is_bistable() {
        let p = DimensionalParams::default();
        let g = basin_map(
            ModelVariant::MhtAllee,
            &p,
            &GridSpec::square(8),
            &DetectBudget::default(),
        )
        .unwrap();
        assert!(g.count(AttractorKind::Origin) > 0);
        assert!(g.count(AttractorKind::InteriorPoint) > 0);
        assert_eq!(g.undetermined_fraction(), 0.0);
    }

    #[test]
    fn cancelled_map_is_undetermined() {
        let p = DimensionalParams::default();
        let g = basin_map_cancellable(
            ModelVariant::MhtAllee,
            &p,
            &GridSpec::square(3),
            &DetectBudget::default(),
            &AtomicBool::new(true),
        )
        .unwrap();
        assert_eq!(g.undetermined_fraction(), 1.0);
    }
}
