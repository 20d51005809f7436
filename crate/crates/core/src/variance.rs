//! Sampling variances of the treatment-effect estimators.
//!
//! The `*_variance` functions take real-valued `m` and `n` so that the
//! optimizers can work on the budget-exhausting allocation `n = B/(c+sm)`;
//! `var_hte` and `var_ate` evaluate a concrete [`Design`].

use crate::error::{DesignError, Result};
use crate::model::{CostModel, Design, IccPair, ScaleModel};

/// Variance inflation `1 + (m-1) rho_y` of a cluster of size `m`.
pub fn design_effect(m: f64, rho_y: f64) -> f64 {
    1.0 + (m - 1.0) * rho_y
}

/// Denominator factor `1 + (m-2) rho_y - (m-1) rho_x rho_y` of the
/// heterogeneity variance. Bounded below by `1 - rho_y` for valid ICCs.
pub fn hte_denominator(m: f64, icc: &IccPair) -> f64 {
    let (ry, rx) = (icc.rho_y(), icc.rho_x());
    1.0 + (m - 2.0) * ry - (m - 1.0) * rx * ry
}

/// Variance of the treatment-by-covariate interaction estimator.
pub fn hte_variance(m: f64, n: f64, icc: &IccPair, scale: &ScaleModel) -> Result<f64> {
    let denom = hte_denominator(m, icc);
    if !(denom.is_finite() && denom > 0.0) {
        return Err(DesignError::Degenerate(format!(
            "heterogeneity variance denominator is {denom} at m = {m}, rho_y = {}, rho_x = {}",
            icc.rho_y(),
            icc.rho_x()
        )));
    }
    let ry = icc.rho_y();
    Ok(scale.var_y_given_x() * (1.0 - ry) * design_effect(m, ry)
        / (n * m * scale.var_w() * scale.var_x() * denom))
}

/// Variance of the average treatment effect estimator.
pub fn ate_variance(m: f64, n: f64, rho_y: f64, scale: &ScaleModel) -> f64 {
    scale.var_y_given_x() * design_effect(m, rho_y) / (n * m * scale.var_w())
}

pub fn var_hte(design: &Design, icc: &IccPair, scale: &ScaleModel) -> Result<f64> {
    hte_variance(f64::from(design.m), f64::from(design.n), icc, scale)
}

pub fn var_ate(design: &Design, icc: &IccPair, scale: &ScaleModel) -> f64 {
    ate_variance(f64::from(design.m), f64::from(design.n), icc.rho_y(), scale)
}

/// `var_hte / var_ate`, which does not depend on `n`.
pub fn hte_ate_ratio(m: u32, icc: &IccPair, scale: &ScaleModel) -> Result<f64> {
    let m = f64::from(m);
    let denom = hte_denominator(m, icc);
    if denom.is_nan() || denom <= 0.0 {
        return Err(DesignError::Degenerate(format!(
            "heterogeneity variance denominator is {denom} at m = {m}"
        )));
    }
    Ok((1.0 - icc.rho_y()) / (scale.var_x() * denom))
}

/// Clusters of size `m` the budget pays for.
pub fn n_for_m(m: u32, cost: &CostModel) -> Result<u32> {
    cost.clusters_for(m)
}

/// Heterogeneity variance when the whole budget goes to clusters of size `m`.
pub fn budget_hte_variance(m: f64, icc: &IccPair, cost: &CostModel, scale: &ScaleModel) -> Result<f64> {
    hte_variance(m, cost.continuous_clusters(m), icc, scale)
}

/// ATE variance when the whole budget goes to clusters of size `m`.
pub fn budget_ate_variance(m: f64, rho_y: f64, cost: &CostModel, scale: &ScaleModel) -> f64 {
    ate_variance(m, cost.continuous_clusters(m), rho_y, scale)
}
