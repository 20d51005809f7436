//! Cost-constrained designs for cluster randomized trials that target the
//! average treatment effect, its heterogeneity across a covariate, or both.
//!
//! The crate covers four tasks:
//!
//! * variances of the two estimators ([`variance`]),
//! * locally optimal designs for known ICCs ([`lod`]),
//! * maximin designs over a rectangle of plausible ICCs ([`maximin`]),
//! * power at a point and its range over a rectangle ([`power`]).
//!
//! [`scenario`] and [`ops`] are the flat request layer used by the command
//! line and the HTTP service. [`reproduce`] rebuilds the reference tables.
//!
//! ```
//! use crt_design::{lod_hte, CostModel, DesignSpace, IccPair, ScaleModel};
//!
//! let cost = CostModel::new(100_000.0, 500.0, 50.0)?;
//! let icc = IccPair::new(0.05, 0.75)?;
//! let lod = lod_hte(&icc, &cost, &ScaleModel::default(), &DesignSpace::default())?;
//! assert_eq!((lod.design.m, lod.design.n), (22, 62));
//! # Ok::<(), crt_design::DesignError>(())
//! ```

pub mod error;
pub mod lod;
pub mod maximin;
pub mod model;
pub mod ops;
pub mod power;
pub mod report;
pub mod reproduce;
pub mod scenario;
pub mod variance;

pub use error::{DesignError, Result};
pub use lod::{
    lod_ate, lod_compound, lod_hte, round_design, CompoundWeighting, LodOptions, LodResult, Rounding,
};
pub use maximin::{
    compound_criterion, criterion_surface, maximin_ate, maximin_compound, maximin_hte, re_ate, re_hte,
    Criterion, CriterionSurface, MaximinResult, MaximinSearch,
};
pub use model::{CostModel, Design, DesignSpace, EffectSpec, IccPair, ParameterSpace, ScaleModel};
pub use power::{power_ate, power_bounds, power_hte, EffectTest, PowerBounds, PowerOptions, PowerReport};
pub use report::Table;
pub use scenario::ScenarioConfig;
pub use variance::{hte_ate_ratio, n_for_m, var_ate, var_hte};
