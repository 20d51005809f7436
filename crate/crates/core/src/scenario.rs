//! Flat, serializable description of a design problem.
//!
//! A [`ScenarioConfig`] is what the command line reads from a config file
//! and what the HTTP service receives as a request body. Every field is
//! optional; the accessor for a domain type reports the first missing or
//! invalid key by its config name.

use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::lod::{CompoundWeighting, LodOptions, Rounding};
use crate::maximin::{Criterion, MaximinSearch};
use crate::model::{CostModel, Design, DesignSpace, EffectSpec, IccPair, ParameterSpace, ScaleModel};
use crate::power::{levels, Approximation, AteVariance, EffectTest, PowerOptions};
use crate::reproduce::curve_levels;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indiv_cost: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_w: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_y_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_y_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_steps: Option<u32>,
    /// Fixed outcome-ICC levels of a power curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_y_levels: Option<Vec<f64>>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_cluster_size: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_cluster_size: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_clusters: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_min_cluster_size: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_max_cluster_size: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_min_clusters: Option<u32>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounding: Option<Rounding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compound_weighting: Option<CompoundWeighting>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_ate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_hte: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximation: Option<Approximation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ate_variance: Option<AteVariance>,
    /// Which test a power request is about. Without it every test with a
    /// given effect is reported.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<EffectTest>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

fn required<T: Copy>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| DesignError::invalid(field, "is required"))
}

impl ScenarioConfig {
    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: ScenarioConfig) -> ScenarioConfig {
        let base = &mut self;
        overlay!(base, top;
            budget, cluster_cost, indiv_cost, var_y, var_x, var_w,
            rho_y, rho_x, rho_y_min, rho_y_max, rho_x_min, rho_x_max, grid_steps, rho_y_levels,
            min_cluster_size, max_cluster_size, min_clusters,
            reference_min_cluster_size, reference_max_cluster_size, reference_min_clusters,
            lambda, rounding, compound_weighting, m, n, beta_ate, beta_hte, alpha, approximation, ate_variance, test,
        );
        self
    }

    pub fn cost_model(&self) -> Result<CostModel> {
        CostModel::new(
            required(self.budget, "budget")?,
            required(self.cluster_cost, "cluster_cost")?,
            required(self.indiv_cost, "indiv_cost")?,
        )
    }

    pub fn scale_model(&self) -> Result<ScaleModel> {
        let d = ScaleModel::default();
        ScaleModel::new(
            self.var_y.unwrap_or(d.var_y_given_x()),
            self.var_x.unwrap_or(d.var_x()),
            self.var_w.unwrap_or(d.var_w()),
        )
    }

    pub fn icc(&self) -> Result<IccPair> {
        IccPair::new(required(self.rho_y, "rho_y")?, required(self.rho_x, "rho_x")?)
    }

    pub fn rho_y(&self) -> Result<f64> {
        let ry = required(self.rho_y, "rho_y")?;
        IccPair::new(ry, 0.0)?;
        Ok(ry)
    }

    pub fn parameter_space(&self) -> Result<ParameterSpace> {
        ParameterSpace::new(
            (
                required(self.rho_y_min, "rho_y_min")?,
                required(self.rho_y_max, "rho_y_max")?,
            ),
            (
                required(self.rho_x_min, "rho_x_min")?,
                required(self.rho_x_max, "rho_x_max")?,
            ),
            self.grid_steps.unwrap_or(ParameterSpace::DEFAULT_STEPS),
        )
    }

    pub fn design_space(&self) -> Result<DesignSpace> {
        let d = DesignSpace::default();
        DesignSpace::new(
            self.min_cluster_size.unwrap_or(d.m_min()),
            self.max_cluster_size,
            self.min_clusters.unwrap_or(d.n_min()),
        )
    }

    /// Space for the locally optimal references of a maximin search; the
    /// search space itself unless a reference key is set.
    pub fn reference_space(&self) -> Result<DesignSpace> {
        if self.reference_min_cluster_size.is_none()
            && self.reference_max_cluster_size.is_none()
            && self.reference_min_clusters.is_none()
        {
            return self.design_space();
        }
        let d = DesignSpace::default();
        DesignSpace::new(
            self.reference_min_cluster_size.unwrap_or(d.m_min()),
            self.reference_max_cluster_size,
            self.reference_min_clusters.unwrap_or(d.n_min()),
        )
        .map_err(|e| match e {
            DesignError::InvalidInput { field, message } => DesignError::InvalidInput {
                field: format!("reference_{field}"),
                message,
            },
            other => other,
        })
    }

    pub fn lambda(&self) -> Result<f64> {
        let l = required(self.lambda, "lambda")?;
        if !(0.0..=1.0).contains(&l) {
            return Err(DesignError::invalid("lambda", "must lie in [0, 1]"));
        }
        Ok(l)
    }

    pub fn lod_options(&self) -> LodOptions {
        LodOptions {
            rounding: self.rounding.unwrap_or_default(),
            weighting: self.compound_weighting.unwrap_or_default(),
        }
    }

    /// `(m, n)` as given, or `n` from the budget when only `m` is set.
    pub fn design(&self) -> Result<Design> {
        let m = required(self.m, "m")?;
        match (self.n, self.cost_model()) {
            (Some(n), Ok(cost)) => Design::budgeted(m, n, &cost),
            (Some(n), Err(_)) => Design::new(m, n),
            (None, Ok(cost)) => Design::for_budget(m, &cost),
            (None, Err(_)) => Err(DesignError::invalid("n", "is required without a budget")),
        }
    }

    /// Effects on the outcome scale; a missing effect is taken as zero.
    pub fn effect_spec(&self) -> Result<EffectSpec> {
        if self.beta_ate.is_none() && self.beta_hte.is_none() {
            return Err(DesignError::invalid("beta_hte", "an effect size is required"));
        }
        EffectSpec::new(
            self.beta_ate.unwrap_or(0.0),
            self.beta_hte.unwrap_or(0.0),
            self.alpha.unwrap_or(0.05),
        )
    }

    pub fn has_effect(&self) -> bool {
        self.beta_ate.is_some() || self.beta_hte.is_some()
    }

    pub fn power_options(&self) -> PowerOptions {
        PowerOptions {
            approximation: self.approximation.unwrap_or_default(),
            ate_variance: self.ate_variance.unwrap_or_default(),
        }
    }

    pub fn tests(&self) -> Result<Vec<EffectTest>> {
        if let Some(t) = self.test {
            return Ok(vec![t]);
        }
        let mut out = Vec::new();
        if self.beta_hte.is_some() {
            out.push(EffectTest::Hte);
        }
        if self.beta_ate.is_some() {
            out.push(EffectTest::Ate);
        }
        if out.is_empty() {
            return Err(DesignError::invalid("beta_hte", "an effect size is required"));
        }
        Ok(out)
    }

    /// Outcome-ICC levels of a power curve: as given, or defaults spread over
    /// the outcome-ICC range.
    pub fn curve_levels(&self) -> Result<Vec<f64>> {
        match &self.rho_y_levels {
            Some(v) if v.is_empty() => Err(DesignError::invalid("rho_y_levels", "must not be empty")),
            Some(v) => {
                if let Some(bad) = v.iter().find(|r| !(0.0..1.0).contains(*r)) {
                    return Err(DesignError::invalid(
                        "rho_y_levels",
                        format!("{bad} is outside [0, 1)"),
                    ));
                }
                Ok(v.clone())
            }
            None => {
                let params = self.parameter_space()?;
                let r = params.rho_y();
                Ok(if r.lo == r.hi {
                    levels(r.lo, r.hi, 1)
                } else {
                    curve_levels(&params)
                })
            }
        }
    }

    pub fn maximin_search(&self) -> Result<MaximinSearch> {
        let cost = self.cost_model()?;
        MaximinSearch::new(self.parameter_space()?, self.design_space()?, cost)
            .with_reference(self.reference_space()?)
    }

    /// Number of criterion evaluations a maximin run over this scenario
    /// performs.
    pub fn maximin_cells(&self) -> Result<usize> {
        let search = self.maximin_search()?;
        let sizes = search.designs().cluster_sizes(search.cost())?;
        Ok(sizes.count() * search.params().cell_count())
    }

    pub fn criterion(&self, kind: &str) -> Result<Criterion> {
        match kind {
            "hte" => Ok(Criterion::Hte),
            "ate" => Ok(Criterion::Ate),
            "compound" => Ok(Criterion::Compound(self.lambda()?)),
            other => Err(DesignError::invalid(
                "kind",
                format!("unknown criterion '{other}', expected hte, ate or compound"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k10() -> ScenarioConfig {
        ScenarioConfig {
            budget: Some(100_000.0),
            cluster_cost: Some(500.0),
            indiv_cost: Some(50.0),
            ..Default::default()
        }
    }

    #[test]
    fn missing_key_is_named() {
        let err = k10().icc().unwrap_err();
        assert_eq!(err.field(), Some("rho_y"));
        let cfg = ScenarioConfig {
            rho_y: Some(0.1),
            ..k10()
        };
        assert_eq!(cfg.icc().unwrap_err().field(), Some("rho_x"));
    }

    #[test]
    fn overlay_prefers_the_top_layer() {
        let top = ScenarioConfig {
            budget: Some(5.0),
            lambda: Some(0.6),
            ..Default::default()
        };
        let merged = k10().overlay(top);
        assert_eq!(merged.budget, Some(5.0));
        assert_eq!(merged.cluster_cost, Some(500.0));
        assert_eq!(merged.lambda, Some(0.6));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<ScenarioConfig>(r#"{"budget": 1, "bugdet": 2}"#).unwrap_err();
        assert!(err.to_string().contains("bugdet"));
    }

    #[test]
    fn json_round_trip() {
        let cfg = ScenarioConfig {
            rho_y: Some(0.05),
            rho_x: Some(0.75),
            rounding: Some(Rounding::BestNeighbor),
            ..k10()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn design_from_budget() {
        let cfg = ScenarioConfig { m: Some(22), ..k10() };
        let d = cfg.design().unwrap();
        assert_eq!((d.m, d.n), (22, 62));
        let bare = ScenarioConfig {
            m: Some(22),
            ..Default::default()
        };
        assert_eq!(bare.design().unwrap_err().field(), Some("n"));
    }

    #[test]
    fn reference_space_defaults_to_the_design_space() {
        let cfg = ScenarioConfig {
            min_cluster_size: Some(8),
            max_cluster_size: Some(40),
            min_clusters: Some(66),
            ..k10()
        };
        assert_eq!(cfg.reference_space().unwrap(), cfg.design_space().unwrap());
        let cfg = ScenarioConfig {
            reference_min_clusters: Some(6),
            ..cfg
        };
        assert_eq!(cfg.reference_space().unwrap(), DesignSpace::default());
    }
}
