//! Predator-prey models of May-Holling-Tanner type with Allee effects and
//! alternative food: equilibria, stability, trajectories, bifurcation loci,
//! and basins of attraction.
//!
//! ```
//! use mhtlab_core::{interior_equilibria, nondimensionalize, DimensionalParams, LemmaClass, ModelVariant};
//!
//! let np = nondimensionalize(&DimensionalParams::default()).unwrap();
//! let eqs = interior_equilibria(ModelVariant::MhtAllee, &np).unwrap();
//! assert_eq!(eqs.len(), 2);
//! assert_eq!(eqs[0].lemma_class, LemmaClass::Saddle);
//! ```

pub mod basins;
pub mod bifurcation;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod ode;
pub mod poly;
pub mod stability;

pub use basins::{basin_map, BasinGrid, GridSpec};
pub use bifurcation::{
    assign_region, classify_region, collapse_threshold, hopf_locus, interior_count, region_map,
    Branch, CollapseLabel, CollapseOptions, CollapseThreshold, HopfLocus, HopfOptions, HopfPoint,
    ProbeOptions, RegionLabel, RegionReport, RegionTag,
};
pub use dynamics::{
    detect_attractor, find_unstable_cycle, integrate, refine_cycle, AttractorKind, AttractorLabel,
    DetectBudget, Event, EventKind, IntegrateOptions, PeriodicOrbit, RefineOptions, Trajectory,
};
pub use equilibria::{
    boundary_equilibria, classify, equilibria_dimensional, interior_equilibria, interior_roots,
    interior_roots_allee, interior_roots_allee_altfood, jacobian, AuxFunctions, CubicCoefficients,
    EquilibriumKind, EquilibriumReport, InteriorRoots, LemmaClass, LemmaRule,
};
pub use error::{Error, Result};
pub use model::{
    nondimensionalize, vector_field, vector_field_rescaled, DimensionalParams, Frame, ModelVariant,
    NonDimParams, State,
};
pub use ode::Tolerances;
pub use stability::{classify_numeric, Mat2, NumericClass};
