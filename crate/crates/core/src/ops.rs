//! Request-level operations shared by the command line and the HTTP
//! service: a [`ScenarioConfig`] goes in, a serializable document comes out.
//! Everything is validated before any sweep starts.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::lod::{lod_ate_with, lod_compound_with, lod_hte_with, LodResult};
use crate::maximin::{Criterion, MaximinSearch, SurfaceRecord};
use crate::model::{Design, IccPair};
use crate::power::{power, power_bounds, power_curve, EffectTest, PowerBounds, PowerRecord, PowerReport};
use crate::report::Table;
use crate::scenario::ScenarioConfig;
use crate::variance::{var_ate, var_hte};

/// Version of the request and response layout.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    Point,
    Bounds,
    Curve,
}

impl FromStr for PowerMode {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(PowerMode::Point),
            "bounds" => Ok(PowerMode::Bounds),
            "curve" => Ok(PowerMode::Curve),
            other => Err(DesignError::invalid(
                "mode",
                format!("unknown power mode '{other}', expected point, bounds or curve"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LodDocument {
    pub criterion: &'static str,
    pub lambda: Option<f64>,
    pub m: u32,
    pub n: u32,
    pub capped: bool,
    pub condition_satisfied: bool,
    pub m_continuous: f64,
    /// Variance of the single objective, or the compound criterion.
    pub objective_value: f64,
    /// Present when the covariate ICC is known.
    pub var_hte: Option<f64>,
    pub var_ate: f64,
    pub total_cost: f64,
    pub power: Vec<PowerReport>,
}

impl LodDocument {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(vec![
            "criterion",
            "lambda",
            "m",
            "n",
            "capped",
            "condition",
            "m_continuous",
            "var_hte",
            "var_ate",
            "cost",
        ]);
        t.push(vec![
            self.criterion.into(),
            self.lambda.into(),
            self.m.into(),
            self.n.into(),
            self.capped.into(),
            self.condition_satisfied.into(),
            self.m_continuous.into(),
            self.var_hte.into(),
            self.var_ate.into(),
            self.total_cost.into(),
        ]);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximinDocument {
    pub criterion: &'static str,
    pub lambda: Option<f64>,
    pub m: u32,
    pub n: u32,
    pub min_value: f64,
    pub worst_case_iccs: Vec<IccPair>,
    pub candidates: usize,
    pub grid_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<Vec<SurfaceRecord>>,
}

impl MaximinDocument {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(vec![
            "criterion",
            "lambda",
            "m",
            "n",
            "min_value",
            "worst_rho_y",
            "worst_rho_x",
        ]);
        for icc in &self.worst_case_iccs {
            t.push(vec![
                self.criterion.into(),
                self.lambda.into(),
                self.m.into(),
                self.n.into(),
                self.min_value.into(),
                icc.rho_y().into(),
                icc.rho_x().into(),
            ]);
        }
        t
    }

    pub fn surface_table(&self) -> Option<Table> {
        let records = self.surface.as_ref()?;
        let mut t = Table::new(vec!["m", "n", "rho_y", "rho_x", "value", "kind", "lambda"]);
        for r in records {
            t.push(vec![
                r.m.into(),
                r.n.into(),
                r.rho_y.into(),
                r.rho_x.into(),
                r.value.into(),
                r.kind.into(),
                r.lambda.into(),
            ]);
        }
        Some(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PowerDocument {
    Point {
        m: u32,
        n: u32,
        rho_y: f64,
        rho_x: f64,
        reports: Vec<PowerReport>,
    },
    Bounds {
        m: u32,
        n: u32,
        bounds: Vec<PowerBounds>,
    },
    Curve {
        m: u32,
        n: u32,
        records: Vec<PowerRecord>,
    },
}

impl PowerDocument {
    pub fn to_table(&self) -> Table {
        match self {
            PowerDocument::Point {
                m,
                n,
                rho_y,
                rho_x,
                reports,
            } => {
                let mut t = Table::new(vec![
                    "test", "m", "n", "rho_y", "rho_x", "effect", "alpha", "power",
                ]);
                for r in reports {
                    t.push(vec![
                        r.test.name().into(),
                        (*m).into(),
                        (*n).into(),
                        (*rho_y).into(),
                        (*rho_x).into(),
                        r.effect.into(),
                        r.alpha.into(),
                        r.power.into(),
                    ]);
                }
                t
            }
            PowerDocument::Bounds { m, n, bounds } => {
                let mut t = Table::new(vec![
                    "test",
                    "m",
                    "n",
                    "lower",
                    "upper",
                    "argmin_rho_y",
                    "argmin_rho_x",
                    "argmax_rho_y",
                    "argmax_rho_x",
                ]);
                for b in bounds {
                    t.push(vec![
                        b.test.name().into(),
                        (*m).into(),
                        (*n).into(),
                        b.lower.into(),
                        b.upper.into(),
                        b.argmin.rho_y().into(),
                        b.argmin.rho_x().into(),
                        b.argmax.rho_y().into(),
                        b.argmax.rho_x().into(),
                    ]);
                }
                t
            }
            PowerDocument::Curve { records, .. } => {
                let mut t = Table::new(vec![
                    "test", "m", "n", "rho_y", "rho_x", "effect", "alpha", "power",
                ]);
                for r in records {
                    t.push(vec![
                        r.test.into(),
                        r.m.into(),
                        r.n.into(),
                        r.rho_y.into(),
                        r.rho_x.into(),
                        r.effect.into(),
                        r.alpha.into(),
                        r.power.into(),
                    ]);
                }
                t
            }
        }
    }
}

fn check_kind(kind: &str) -> Result<()> {
    match kind {
        "hte" | "ate" | "compound" => Ok(()),
        other => Err(DesignError::invalid(
            "kind",
            format!("unknown criterion '{other}', expected hte, ate or compound"),
        )),
    }
}

/// ICC pair for an ATE-only computation: the covariate ICC does not enter the
/// ATE variance, so zero stands in when it is not given.
fn ate_icc(cfg: &ScenarioConfig) -> Result<IccPair> {
    match cfg.rho_x {
        Some(_) => cfg.icc(),
        None => IccPair::new(cfg.rho_y()?, 0.0),
    }
}

fn powers(cfg: &ScenarioConfig, design: &Design) -> Result<Vec<PowerReport>> {
    if !cfg.has_effect() && cfg.test.is_none() {
        return Ok(Vec::new());
    }
    let effects = cfg.effect_spec()?;
    let scale = cfg.scale_model()?;
    let opts = cfg.power_options();
    cfg.tests()?
        .into_iter()
        .map(|t| {
            let icc = match t {
                EffectTest::Hte => cfg.icc()?,
                EffectTest::Ate => ate_icc(cfg)?,
            };
            power(t, design, &icc, &effects, &scale, &opts)
        })
        .collect()
}

/// Locally optimal design of `kind` (`hte`, `ate` or `compound`).
pub fn lod(cfg: &ScenarioConfig, kind: &str) -> Result<LodDocument> {
    check_kind(kind)?;
    let cost = cfg.cost_model()?;
    let scale = cfg.scale_model()?;
    let space = cfg.design_space()?;
    let opts = cfg.lod_options();
    let (result, lambda): (LodResult, Option<f64>) = match kind {
        "hte" => (lod_hte_with(&cfg.icc()?, &cost, &scale, &space, &opts)?, None),
        "ate" => (lod_ate_with(cfg.rho_y()?, &cost, &scale, &space, &opts)?, None),
        _ => {
            let lambda = cfg.lambda()?;
            (
                lod_compound_with(&cfg.icc()?, &cost, &scale, &space, lambda, &opts)?,
                Some(lambda),
            )
        }
    };
    let d = result.design;
    let icc = if kind == "ate" { ate_icc(cfg)? } else { cfg.icc()? };
    let var_hte = match (kind, cfg.rho_x) {
        ("ate", None) => None,
        _ => Some(var_hte(&d, &icc, &scale)?),
    };
    Ok(LodDocument {
        criterion: match kind {
            "hte" => "hte",
            "ate" => "ate",
            _ => "compound",
        },
        lambda,
        m: d.m,
        n: d.n,
        capped: result.capped,
        condition_satisfied: result.condition_satisfied,
        m_continuous: result.m_continuous,
        objective_value: result.objective_value,
        var_hte,
        var_ate: var_ate(&d, &icc, &scale),
        total_cost: cost.total_cost(d.m, d.n),
        power: powers(cfg, &d)?,
    })
}

/// The validated search and criterion of a maximin request, so callers can
/// check its size before running it.
pub fn maximin_plan(cfg: &ScenarioConfig, kind: &str) -> Result<(MaximinSearch, Criterion)> {
    check_kind(kind)?;
    let criterion = cfg.criterion(kind)?;
    Ok((cfg.maximin_search()?, criterion))
}

pub fn maximin(cfg: &ScenarioConfig, kind: &str, with_surface: bool) -> Result<MaximinDocument> {
    let (search, criterion) = maximin_plan(cfg, kind)?;
    run_maximin(&search, criterion, with_surface)
}

pub fn run_maximin(
    search: &MaximinSearch,
    criterion: Criterion,
    with_surface: bool,
) -> Result<MaximinDocument> {
    let r = search.run(criterion)?;
    Ok(MaximinDocument {
        criterion: criterion.name(),
        lambda: criterion.lambda(),
        m: r.design.m,
        n: r.design.n,
        min_value: r.min_value,
        worst_case_iccs: r.worst_case_iccs,
        candidates: r.surface.designs.len(),
        grid_points: r.surface.grid.len(),
        surface: with_surface.then(|| r.surface.records()),
    })
}

pub fn power_document(cfg: &ScenarioConfig, mode: PowerMode) -> Result<PowerDocument> {
    let design = cfg.design()?;
    let (m, n) = (design.m, design.n);
    match mode {
        PowerMode::Point => {
            let icc = match cfg.tests()?.as_slice() {
                [EffectTest::Ate] => ate_icc(cfg)?,
                _ => cfg.icc()?,
            };
            Ok(PowerDocument::Point {
                m,
                n,
                rho_y: icc.rho_y(),
                rho_x: icc.rho_x(),
                reports: powers(cfg, &design)?,
            })
        }
        PowerMode::Bounds => {
            let params = cfg.parameter_space()?;
            let effects = cfg.effect_spec()?;
            let scale = cfg.scale_model()?;
            let opts = cfg.power_options();
            let bounds = cfg
                .tests()?
                .into_iter()
                .map(|t| power_bounds(t, &design, &params, &effects, &scale, &opts))
                .collect::<Result<_>>()?;
            Ok(PowerDocument::Bounds { m, n, bounds })
        }
        PowerMode::Curve => {
            let params = cfg.parameter_space()?;
            let levels = cfg.curve_levels()?;
            let effects = cfg.effect_spec()?;
            let scale = cfg.scale_model()?;
            let opts = cfg.power_options();
            let mut records = Vec::new();
            for t in cfg.tests()? {
                records.extend(power_curve(
                    t, &design, &levels, &params, &effects, &scale, &opts,
                )?);
            }
            Ok(PowerDocument::Curve { m, n, records })
        }
    }
}
