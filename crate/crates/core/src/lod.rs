//! Locally optimal designs: the best cluster size when the ICCs are known.
//!
//! Every optimizer works on the budget-exhausting allocation, finds a
//! continuous optimum `m_c` in closed form, caps it at the largest size the
//! design space admits and then rounds it to an integer design.

use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::model::{CostModel, Design, DesignSpace, IccPair, ScaleModel};
use crate::variance::{budget_ate_variance, budget_hte_variance, var_ate, var_hte};

/// How a continuous optimum is turned into an integer cluster size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    /// Round down. Matches the reference design tables.
    #[default]
    Floor,
    /// Evaluate the two neighbouring integers and keep the better one.
    BestNeighbor,
}

/// How the HTE reference variance enters the compound optimum's weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompoundWeighting {
    /// `w_hte = (1 - lambda) var*_HTE`, with no `(1 - rho_y)` adjustment.
    /// Matches the reference compound design tables, but the resulting root
    /// maximizes `lambda RE_ATE + (1 - lambda)(1 - rho_y) RE_HTE`.
    #[default]
    Unadjusted,
    /// `w_hte = (1 - lambda) var*_HTE / (1 - rho_y)`, whose root maximizes
    /// the compound criterion itself.
    Consistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LodOptions {
    #[serde(default)]
    pub rounding: Rounding,
    #[serde(default)]
    pub weighting: CompoundWeighting,
}

/// Weights of the compound criterion's closed-form optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompoundWeights {
    pub lambda: f64,
    pub w_ate: f64,
    pub w_hte: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LodResult {
    pub design: Design,
    /// The continuous optimum exceeded the largest admissible size.
    pub capped: bool,
    /// Whether the existence condition of the closed-form optimum held.
    pub condition_satisfied: bool,
    pub m_continuous: f64,
    /// Variance (single objectives) or compound criterion at `design`.
    pub objective_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<CompoundWeights>,
}

/// Unconstrained sizes minimizing each budget-exhausting variance within a
/// design space, with the corresponding unit-scale variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceOptimum {
    pub m_hte: f64,
    pub var_hte: f64,
    pub m_ate: f64,
    pub var_ate: f64,
}

/// Condition under which the heterogeneity variance has an interior
/// minimum: `rho_y (k+1) / (rho_y k + 1) < rho_x <= 1`.
pub fn hte_condition(icc: &IccPair, k: f64) -> bool {
    let ry = icc.rho_y();
    ry * (k + 1.0) / (ry * k + 1.0) < icc.rho_x()
}

/// Closed-form minimizer of the budget-exhausting heterogeneity variance,
/// when it exists.
pub fn hte_optimum(icc: &IccPair, k: f64) -> Option<f64> {
    let (ry, rx) = (icc.rho_y(), icc.rho_x());
    if ry <= 0.0 || k <= 0.0 || !hte_condition(icc, k) {
        return None;
    }
    let radicand = (1.0 - ry) * (rx - ry) * (1.0 - (k + 2.0) * ry + (k + 1.0) * rx * ry) / (ry * k);
    let num = (1.0 - ry) * (1.0 - rx) + radicand.max(0.0).sqrt();
    let den = (rx - ry) / k - ry * (1.0 - rx);
    let m = num / den;
    (m.is_finite() && m > 0.0).then_some(m)
}

/// Closed-form minimizer `sqrt((1 - rho_y) k / rho_y)` of the
/// budget-exhausting ATE variance. Infinite without clustering.
pub fn ate_optimum(rho_y: f64, k: f64) -> f64 {
    if rho_y > 0.0 {
        ((1.0 - rho_y) * k / rho_y).sqrt()
    } else if k > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn bounds(cost: &CostModel, space: &DesignSpace) -> Result<(f64, f64)> {
    space.cluster_sizes(cost)?;
    Ok((f64::from(space.m_min()), space.upper_bound(cost)))
}

/// Reference optima used by the relative efficiencies.
pub fn reference_optimum(icc: &IccPair, cost: &CostModel, space: &DesignSpace) -> Result<ReferenceOptimum> {
    let (lower, upper) = bounds(cost, space)?;
    let unit = ScaleModel::default();
    let k = cost.cost_ratio();

    let m_ate = ate_optimum(icc.rho_y(), k).clamp(lower, upper);
    let var_ate = budget_ate_variance(m_ate, icc.rho_y(), cost, &unit);

    let mut candidates = Vec::with_capacity(3);
    if let Some(m) = hte_optimum(icc, k) {
        if m <= upper {
            candidates.push(m.max(lower));
        }
    }
    candidates.push(lower);
    candidates.push(upper);
    let mut best = (f64::NAN, f64::INFINITY);
    for m in candidates {
        let v = budget_hte_variance(m, icc, cost, &unit)?;
        if v < best.1 {
            best = (m, v);
        }
    }
    Ok(ReferenceOptimum {
        m_hte: best.0,
        var_hte: best.1,
        m_ate,
        var_ate,
    })
}

/// Rounds `m_continuous` to an admissible integer size and allocates the
/// budget to it. `score` is minimized when comparing neighbours.
pub fn round_design<F>(
    m_continuous: f64,
    cost: &CostModel,
    space: &DesignSpace,
    rounding: Rounding,
    score: F,
) -> Result<Design>
where
    F: Fn(&Design) -> Result<f64>,
{
    let sizes = space.cluster_sizes(cost)?;
    let (lo, hi) = (*sizes.start(), *sizes.end());
    let clamp = |m: f64| (m.max(f64::from(lo)) as u32).clamp(lo, hi);
    let floor = clamp(m_continuous.floor());
    let pick = match rounding {
        Rounding::Floor => floor,
        Rounding::BestNeighbor => {
            let ceil = clamp(m_continuous.ceil());
            let a = Design::for_budget(floor, cost)?;
            if ceil == floor {
                floor
            } else {
                let b = Design::for_budget(ceil, cost)?;
                if score(&b)? < score(&a)? {
                    ceil
                } else {
                    floor
                }
            }
        }
    };
    Ok(Design::for_budget(pick, cost)?.with_continuous(m_continuous))
}

/// Locally optimal design for the heterogeneity effect.
pub fn lod_hte(
    icc: &IccPair,
    cost: &CostModel,
    scale: &ScaleModel,
    space: &DesignSpace,
) -> Result<LodResult> {
    lod_hte_with(icc, cost, scale, space, &LodOptions::default())
}

pub fn lod_hte_with(
    icc: &IccPair,
    cost: &CostModel,
    scale: &ScaleModel,
    space: &DesignSpace,
    options: &LodOptions,
) -> Result<LodResult> {
    let (lower, upper) = bounds(cost, space)?;
    let k = cost.cost_ratio();
    let (m_c, capped) = if k == 0.0 {
        // Without a cluster cost the objective is monotone in m.
        let at = |m| budget_hte_variance(m, icc, cost, scale);
        if at(upper)? < at(lower)? {
            (upper, true)
        } else {
            (lower, false)
        }
    } else {
        match hte_optimum(icc, k) {
            Some(m) if m <= upper => (m.max(lower), false),
            _ => (upper, true),
        }
    };
    let design = round_design(m_c, cost, space, options.rounding, |d| var_hte(d, icc, scale))?;
    Ok(LodResult {
        objective_value: var_hte(&design, icc, scale)?,
        design,
        capped,
        condition_satisfied: hte_condition(icc, k),
        m_continuous: m_c,
        weights: None,
    })
}

/// Locally optimal design for the average treatment effect.
pub fn lod_ate(rho_y: f64, cost: &CostModel, scale: &ScaleModel, space: &DesignSpace) -> Result<LodResult> {
    lod_ate_with(rho_y, cost, scale, space, &LodOptions::default())
}

pub fn lod_ate_with(
    rho_y: f64,
    cost: &CostModel,
    scale: &ScaleModel,
    space: &DesignSpace,
    options: &LodOptions,
) -> Result<LodResult> {
    let icc = IccPair::new(rho_y, 0.0)?;
    let (lower, upper) = bounds(cost, space)?;
    let m_opt = ate_optimum(rho_y, cost.cost_ratio());
    let capped = m_opt > upper;
    let m_c = m_opt.clamp(lower, upper);
    let design = round_design(m_c, cost, space, options.rounding, |d| {
        Ok(var_ate(d, &icc, scale))
    })?;
    Ok(LodResult {
        objective_value: var_ate(&design, &icc, scale),
        design,
        capped,
        condition_satisfied: !capped,
        m_continuous: m_c,
        weights: None,
    })
}

/// Compound criterion `lambda RE_ATE + (1 - lambda) RE_HTE` of the
/// budget-exhausting allocation at size `m`.
pub fn compound_value(
    m: f64,
    icc: &IccPair,
    lambda: f64,
    reference: &ReferenceOptimum,
    cost: &CostModel,
) -> Result<f64> {
    let unit = ScaleModel::default();
    let re_ate = reference.var_ate / budget_ate_variance(m, icc.rho_y(), cost, &unit);
    let re_hte = reference.var_hte / budget_hte_variance(m, icc, cost, &unit)?;
    Ok(lambda * re_ate + (1.0 - lambda) * re_hte)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(DesignError::invalid("lambda", "must lie in [0, 1]"))
    }
}

/// Weights of the compound optimum: each single-objective reference variance
/// scaled by its share of the criterion.
pub fn compound_weights(
    lambda: f64,
    reference: &ReferenceOptimum,
    icc: &IccPair,
    weighting: CompoundWeighting,
) -> CompoundWeights {
    let w_hte = (1.0 - lambda) * reference.var_hte;
    CompoundWeights {
        lambda,
        w_ate: lambda * reference.var_ate,
        w_hte: match weighting {
            CompoundWeighting::Unadjusted => w_hte,
            CompoundWeighting::Consistent => w_hte / (1.0 - icc.rho_y()),
        },
    }
}

/// Condition under which the compound optimum lies in the interior.
pub fn compound_condition(icc: &IccPair, k: f64, weights: &CompoundWeights) -> bool {
    let (ry, rx) = (icc.rho_y(), icc.rho_x());
    weights.w_ate > weights.w_hte * ((k + 1.0) * ry - rx * (k * ry + 1.0))
}

/// Root of the first-order condition of the compound criterion, if real.
pub fn compound_root(icc: &IccPair, k: f64, weights: &CompoundWeights) -> Option<f64> {
    let (ry, rx) = (icc.rho_y(), icc.rho_x());
    let (wa, wh) = (weights.w_ate, weights.w_hte);
    let a1 = ry * ry * (1.0 - rx);
    let a2 = 2.0 * ry * (1.0 - ry) * (1.0 - rx);
    let a3 = (1.0 - 2.0 * ry + rx * ry) * (1.0 - ry);
    let b1 = ry * (rx - ry);
    let a = wh * (k * a1 - b1) - wa * ry;
    let b = wh * k * a2;
    let c = wa * k * (1.0 - ry) + wh * k * a3;
    let m = if a == 0.0 {
        if b == 0.0 {
            return None;
        }
        -c / b
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        (-b - disc.sqrt()) / (2.0 * a)
    };
    (m.is_finite() && m > 0.0).then_some(m)
}

/// Locally optimal design for the compound criterion with weight `lambda`
/// on the ATE.
pub fn lod_compound(
    icc: &IccPair,
    cost: &CostModel,
    scale: &ScaleModel,
    space: &DesignSpace,
    lambda: f64,
) -> Result<LodResult> {
    lod_compound_with(icc, cost, scale, space, lambda, &LodOptions::default())
}

pub fn lod_compound_with(
    icc: &IccPair,
    cost: &CostModel,
    _scale: &ScaleModel,
    space: &DesignSpace,
    lambda: f64,
    options: &LodOptions,
) -> Result<LodResult> {
    check_lambda(lambda)?;
    let (lower, upper) = bounds(cost, space)?;
    let k = cost.cost_ratio();
    let reference = reference_optimum(icc, cost, space)?;
    let weights = compound_weights(lambda, &reference, icc, options.weighting);
    let criterion = |m: f64| compound_value(m, icc, lambda, &reference, cost);
    let condition = compound_condition(icc, k, &weights);

    let endpoints = || -> Result<(f64, bool)> {
        if criterion(upper)? > criterion(lower)? {
            Ok((upper, true))
        } else {
            Ok((lower, false))
        }
    };
    let (m_c, capped) = if k == 0.0 {
        endpoints()?
    } else if !condition {
        (upper, true)
    } else {
        match compound_root(icc, k, &weights) {
            Some(m) if m > upper => (upper, true),
            Some(m) => (m.max(lower), false),
            None => endpoints()?,
        }
    };
    let design = round_design(m_c, cost, space, options.rounding, |d| {
        criterion(f64::from(d.m)).map(|v| -v)
    })?;
    Ok(LodResult {
        objective_value: criterion(f64::from(design.m))?,
        design,
        capped,
        condition_satisfied: condition,
        m_continuous: m_c,
        weights: Some(weights),
    })
}
