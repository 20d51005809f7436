//! Built-in scenarios and the design tables and figure datasets derived
//! from them.
//!
//! Two reference setups share a budget of 100,000 with cost ratios 10 and 20.
//! The third is a diabetes-prevention trial with a budget of 20,000, where
//! the heterogeneity of interest is by baseline BMI or by impaired fasting
//! glucose (IFG).

use crate::error::{DesignError, Result};
use crate::lod::{lod_compound, lod_hte};
use crate::maximin::{Criterion, MaximinSearch};
use crate::model::{CostModel, Design, DesignSpace, EffectSpec, IccPair, ParameterSpace, ScaleModel};
use crate::power::{levels, power, power_bounds, power_curve, EffectTest, PowerOptions};
use crate::report::{Cell, Table};
use crate::scenario::ScenarioConfig;

pub const TABLE_IDS: [&str; 7] = ["table2", "table3", "table4", "table5", "fig1", "fig2", "fig3"];

/// Outcome-ICC rows of the locally optimal design tables.
pub const TABLE_RHO_Y: [f64; 4] = [0.005, 0.05, 0.1, 0.2];
/// Covariate-ICC rows of the locally optimal design tables.
pub const TABLE_RHO_X: [f64; 5] = [0.1, 0.2, 0.5, 0.75, 1.0];
pub const TABLE3_LAMBDAS: [f64; 3] = [0.4, 0.6, 0.85];
pub const FIG2_LAMBDAS: [f64; 3] = [0.4, 0.6, 0.85];
pub const KDPP_LAMBDAS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];

/// Standardized effect size used throughout the reference setups.
pub const REFERENCE_EFFECT: f64 = 0.2;

/// Reference setup with cluster cost `k` times the individual cost
/// (10 or 20).
pub fn reference_cost(k: u32) -> Result<CostModel> {
    match k {
        10 => CostModel::new(100_000.0, 500.0, 50.0),
        20 => CostModel::new(100_000.0, 2_000.0, 100.0),
        _ => Err(DesignError::invalid(
            "k",
            "reference setups exist for k = 10 and k = 20",
        )),
    }
}

pub fn reference_params() -> ParameterSpace {
    ParameterSpace::new((0.005, 0.2), (0.1, 1.0), ParameterSpace::DEFAULT_STEPS).expect("valid preset")
}

pub fn reference_effects() -> EffectSpec {
    EffectSpec::new(REFERENCE_EFFECT, REFERENCE_EFFECT, 0.05).expect("valid preset")
}

pub fn table_iccs() -> Vec<IccPair> {
    TABLE_RHO_Y
        .iter()
        .flat_map(|&ry| {
            TABLE_RHO_X
                .iter()
                .map(move |&rx| IccPair::new(ry, rx).expect("valid preset"))
        })
        .collect()
}

/// Effect modifier in the diabetes-prevention setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modifier {
    Bmi,
    Ifg,
}

impl Modifier {
    pub const ALL: [Modifier; 2] = [Modifier::Bmi, Modifier::Ifg];

    pub fn name(&self) -> &'static str {
        match self {
            Modifier::Bmi => "BMI",
            Modifier::Ifg => "IFG",
        }
    }

    /// Standard deviation of the modifier.
    pub fn sd_x(&self) -> f64 {
        match self {
            Modifier::Bmi => 4.031,
            Modifier::Ifg => 0.417,
        }
    }

    /// Interaction effect of interest.
    pub fn beta_hte(&self) -> f64 {
        match self {
            Modifier::Bmi => -0.375,
            Modifier::Ifg => -1.5,
        }
    }

    /// ICCs estimated from the trial data.
    pub fn observed_icc(&self) -> IccPair {
        match self {
            Modifier::Bmi => IccPair::new(0.028, 0.055),
            Modifier::Ifg => IccPair::new(0.032, 0.012),
        }
        .expect("valid preset")
    }

    pub fn scale(&self) -> ScaleModel {
        ScaleModel::from_sd(KDPP_SD_Y, self.sd_x()).expect("valid preset")
    }

    pub fn effects(&self) -> EffectSpec {
        EffectSpec::new(KDPP_BETA_ATE, self.beta_hte(), 0.05).expect("valid preset")
    }
}

pub const KDPP_SD_Y: f64 = 10.27;
pub const KDPP_BETA_ATE: f64 = -1.5;

pub fn kdpp_cost() -> CostModel {
    CostModel::new(20_000.0, 100.0, 5.0).expect("valid preset")
}

pub fn kdpp_params() -> ParameterSpace {
    ParameterSpace::new((0.005, 0.1), (0.1, 0.75), ParameterSpace::DEFAULT_STEPS).expect("valid preset")
}

/// Practical limits of the trial: clusters of 8 to 40 and at least 66 of them.
pub fn kdpp_designs() -> DesignSpace {
    DesignSpace::new(8, Some(40), 66).expect("valid preset")
}

/// Maximin search of the diabetes-prevention setup. References ignore the
/// practical limits.
pub fn kdpp_search() -> MaximinSearch {
    MaximinSearch::new(kdpp_params(), kdpp_designs(), kdpp_cost())
        .with_reference(DesignSpace::default())
        .expect("valid preset")
}

pub fn reference_search(k: u32) -> Result<MaximinSearch> {
    Ok(MaximinSearch::new(
        reference_params(),
        DesignSpace::default(),
        reference_cost(k)?,
    ))
}

pub const PRESET_IDS: [&str; 5] = ["k10", "k20", "kdpp", "kdpp-bmi", "kdpp-ifg"];

/// A built-in setup as a scenario, to be layered under a config file and
/// flags. `kdpp` carries the average effect only; the `kdpp-*` variants add a
/// modifier and its interaction effect.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let reference = |k: u32| -> Result<ScenarioConfig> {
        let cost = reference_cost(k)?;
        let params = reference_params();
        Ok(ScenarioConfig {
            budget: Some(cost.budget()),
            cluster_cost: Some(cost.cluster_cost()),
            indiv_cost: Some(cost.individual_cost()),
            rho_y_min: Some(params.rho_y().lo),
            rho_y_max: Some(params.rho_y().hi),
            rho_x_min: Some(params.rho_x().lo),
            rho_x_max: Some(params.rho_x().hi),
            min_clusters: Some(DesignSpace::default().n_min()),
            beta_ate: Some(REFERENCE_EFFECT),
            beta_hte: Some(REFERENCE_EFFECT),
            ..Default::default()
        })
    };
    let kdpp = || {
        let cost = kdpp_cost();
        let params = kdpp_params();
        let designs = kdpp_designs();
        let reference = DesignSpace::default();
        ScenarioConfig {
            budget: Some(cost.budget()),
            cluster_cost: Some(cost.cluster_cost()),
            indiv_cost: Some(cost.individual_cost()),
            var_y: Some(KDPP_SD_Y * KDPP_SD_Y),
            rho_y_min: Some(params.rho_y().lo),
            rho_y_max: Some(params.rho_y().hi),
            rho_x_min: Some(params.rho_x().lo),
            rho_x_max: Some(params.rho_x().hi),
            min_cluster_size: Some(designs.m_min()),
            max_cluster_size: designs.m_max(),
            min_clusters: Some(designs.n_min()),
            reference_min_cluster_size: Some(reference.m_min()),
            reference_min_clusters: Some(reference.n_min()),
            beta_ate: Some(KDPP_BETA_ATE),
            ..Default::default()
        }
    };
    let modified = |m: Modifier| ScenarioConfig {
        var_x: Some(m.sd_x() * m.sd_x()),
        beta_hte: Some(m.beta_hte()),
        rho_y: Some(m.observed_icc().rho_y()),
        rho_x: Some(m.observed_icc().rho_x()),
        ..kdpp()
    };
    match name {
        "k10" => reference(10),
        "k20" => reference(20),
        "kdpp" => Ok(kdpp()),
        "kdpp-bmi" => Ok(modified(Modifier::Bmi)),
        "kdpp-ifg" => Ok(modified(Modifier::Ifg)),
        other => Err(DesignError::invalid(
            "preset",
            format!(
                "unknown preset '{other}', expected one of {}",
                PRESET_IDS.join(", ")
            ),
        )),
    }
}

pub fn reproduce(id: &str) -> Result<Table> {
    match id {
        "table2" => table2(),
        "table3" => table3(),
        "table4" => table4(),
        "table5" => table5(),
        "fig1" => fig1(),
        "fig2" => fig2(),
        "fig3" => fig3(),
        other => Err(DesignError::invalid(
            "table_id",
            format!("unknown id '{other}', expected one of {}", TABLE_IDS.join(", ")),
        )),
    }
}

/// HTE locally optimal designs and their power for both cost ratios.
pub fn table2() -> Result<Table> {
    let scale = ScaleModel::default();
    let effects = reference_effects();
    let mut t = Table::new(vec!["k", "rho_y", "rho_x", "m", "n", "capped", "power_hte"]);
    for k in [10, 20] {
        let cost = reference_cost(k)?;
        for icc in table_iccs() {
            let lod = lod_hte(&icc, &cost, &scale, &DesignSpace::default())?;
            let p = power(
                EffectTest::Hte,
                &lod.design,
                &icc,
                &effects,
                &scale,
                &PowerOptions::default(),
            )?;
            t.push(vec![
                k.into(),
                icc.rho_y().into(),
                icc.rho_x().into(),
                lod.design.m.into(),
                lod.design.n.into(),
                lod.capped.into(),
                p.power.into(),
            ]);
        }
    }
    Ok(t)
}

/// Compound locally optimal designs for `k = 10`.
pub fn table3() -> Result<Table> {
    let scale = ScaleModel::default();
    let effects = reference_effects();
    let opts = PowerOptions::default();
    let cost = reference_cost(10)?;
    let mut t = Table::new(vec![
        "rho_y",
        "rho_x",
        "lambda",
        "m",
        "n",
        "power_ate",
        "power_hte",
    ]);
    for icc in table_iccs() {
        for lambda in TABLE3_LAMBDAS {
            let lod = lod_compound(&icc, &cost, &scale, &DesignSpace::default(), lambda)?;
            let pa = power(EffectTest::Ate, &lod.design, &icc, &effects, &scale, &opts)?;
            let ph = power(EffectTest::Hte, &lod.design, &icc, &effects, &scale, &opts)?;
            t.push(vec![
                icc.rho_y().into(),
                icc.rho_x().into(),
                lambda.into(),
                lod.design.m.into(),
                lod.design.n.into(),
                pa.power.into(),
                ph.power.into(),
            ]);
        }
    }
    Ok(t)
}

/// Compound locally optimal designs at the observed trial ICCs. The
/// cluster-size ceiling of 40 is not applied here.
pub fn table4() -> Result<Table> {
    let cost = kdpp_cost();
    let opts = PowerOptions::default();
    let space = DesignSpace::default();
    let mut t = Table::new(vec![
        "modifier",
        "lambda",
        "criterion",
        "m",
        "n",
        "power_ate",
        "power_hte",
    ]);
    for modifier in Modifier::ALL {
        let icc = modifier.observed_icc();
        let scale = modifier.scale();
        let effects = modifier.effects();
        for lambda in KDPP_LAMBDAS {
            let lod = lod_compound(&icc, &cost, &scale, &space, lambda)?;
            let pa = power(EffectTest::Ate, &lod.design, &icc, &effects, &scale, &opts)?;
            let ph = power(EffectTest::Hte, &lod.design, &icc, &effects, &scale, &opts)?;
            t.push(vec![
                modifier.name().into(),
                lambda.into(),
                lod.objective_value.into(),
                lod.design.m.into(),
                lod.design.n.into(),
                pa.power.into(),
                ph.power.into(),
            ]);
        }
    }
    Ok(t)
}

/// Compound maximin designs of the diabetes-prevention setup with power
/// bounds over its ICC rectangle.
pub fn table5() -> Result<Table> {
    let search = kdpp_search();
    let opts = PowerOptions::default();
    let mut t = Table::new(vec![
        "lambda",
        "criterion",
        "m",
        "n",
        "ate_lower",
        "ate_upper",
        "bmi_lower",
        "bmi_upper",
        "ifg_lower",
        "ifg_upper",
    ]);
    for lambda in KDPP_LAMBDAS {
        let r = search.run(Criterion::Compound(lambda))?;
        let d = r.design;
        let bmi = Modifier::Bmi;
        let ate = power_bounds(
            EffectTest::Ate,
            &d,
            search.params(),
            &bmi.effects(),
            &bmi.scale(),
            &opts,
        )?;
        let mut row: Vec<Cell> = vec![lambda.into(), r.min_value.into(), d.m.into(), d.n.into()];
        row.extend([ate.lower.into(), ate.upper.into()]);
        for modifier in Modifier::ALL {
            let b = power_bounds(
                EffectTest::Hte,
                &d,
                search.params(),
                &modifier.effects(),
                &modifier.scale(),
                &opts,
            )?;
            row.extend([b.lower.into(), b.upper.into()]);
        }
        t.push(row);
    }
    Ok(t)
}

fn corner_curves(t: &mut Table, k: u32, criterion: Criterion) -> Result<()> {
    let search = reference_search(k)?;
    let best = search.run(criterion)?;
    let (ry, rx) = (search.params().rho_y(), search.params().rho_x());
    let corners = ParameterSpace::new((ry.lo, ry.hi), (rx.lo, rx.hi), 1)?;
    let surface = MaximinSearch::new(corners, *search.designs(), *search.cost()).surface(criterion)?;
    for (g, icc) in surface.grid.iter().enumerate() {
        for (d, v) in surface.designs.iter().zip(surface.column(g)) {
            t.push(vec![
                k.into(),
                criterion.lambda().into(),
                d.m.into(),
                d.n.into(),
                icc.rho_y().into(),
                icc.rho_x().into(),
                v.into(),
                best.design.m.into(),
            ]);
        }
    }
    Ok(())
}

/// HTE relative efficiency against `m` at the four corners of the
/// reference ICC rectangle.
pub fn fig1() -> Result<Table> {
    let mut t = Table::new(vec![
        "k",
        "lambda",
        "m",
        "n",
        "rho_y",
        "rho_x",
        "value",
        "maximin_m",
    ]);
    for k in [10, 20] {
        corner_curves(&mut t, k, Criterion::Hte)?;
    }
    Ok(t)
}

/// Compound criterion against `m` at the corners, for three priority weights.
pub fn fig2() -> Result<Table> {
    let mut t = Table::new(vec![
        "k",
        "lambda",
        "m",
        "n",
        "rho_y",
        "rho_x",
        "value",
        "maximin_m",
    ]);
    for lambda in FIG2_LAMBDAS {
        for k in [10, 20] {
            corner_curves(&mut t, k, Criterion::Compound(lambda))?;
        }
    }
    Ok(t)
}

/// HTE power of each HTE maximin design against the covariate-ICC for four
/// outcome-ICCs.
pub fn fig3() -> Result<Table> {
    let scale = ScaleModel::default();
    let effects = reference_effects();
    let mut t = Table::new(vec!["k", "m", "n", "rho_y", "rho_x", "power"]);
    for k in [10, 20] {
        let search = reference_search(k)?;
        let d: Design = search.run(Criterion::Hte)?.design;
        let curve = power_curve(
            EffectTest::Hte,
            &d,
            &TABLE_RHO_Y,
            search.params(),
            &effects,
            &scale,
            &PowerOptions::default(),
        )?;
        for r in curve {
            t.push(vec![
                k.into(),
                r.m.into(),
                r.n.into(),
                r.rho_y.into(),
                r.rho_x.into(),
                r.power.into(),
            ]);
        }
    }
    Ok(t)
}

/// Default fixed levels for a power curve over `params`: the table
/// outcome-ICCs that fall in range, or four evenly spaced ones.
pub fn curve_levels(params: &ParameterSpace) -> Vec<f64> {
    let range = params.rho_y();
    let inside: Vec<f64> = TABLE_RHO_Y
        .iter()
        .copied()
        .filter(|r| range.contains(*r))
        .collect();
    if inside.len() == TABLE_RHO_Y.len() {
        inside
    } else {
        levels(range.lo, range.hi, 4)
    }
}
