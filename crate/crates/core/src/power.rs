//! Power of the two-sided Wald tests for the average and heterogeneity
//! effects, at a point or across an ICC rectangle.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{DesignError, Result};
use crate::model::{Design, EffectSpec, IccPair, ParameterSpace, ScaleModel};
use crate::variance::{var_ate, var_hte};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectTest {
    Hte,
    Ate,
}

impl EffectTest {
    pub fn name(&self) -> &'static str {
        match self {
            EffectTest::Hte => "hte",
            EffectTest::Ate => "ate",
        }
    }
}

/// Reference distribution of the test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approximation {
    #[default]
    Normal,
    /// t distribution with `n - 2` degrees of freedom.
    StudentT,
}

/// Variance used for the ATE test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AteVariance {
    /// Residual variance after removing the within-cluster share
    /// `(1 - rho_y)`. Reproduces the reference power tables.
    #[default]
    Residual,
    /// Full ATE variance.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PowerOptions {
    #[serde(default)]
    pub approximation: Approximation,
    #[serde(default)]
    pub ate_variance: AteVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerReport {
    pub test: EffectTest,
    pub power: f64,
    /// Effect on the outcome scale.
    pub effect: f64,
    pub standardized_effect: f64,
    pub variance: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBounds {
    pub test: EffectTest,
    pub lower: f64,
    pub upper: f64,
    pub argmin: IccPair,
    pub argmax: IccPair,
    /// Grid points skipped because the variance was undefined there.
    pub degenerate_cells: Vec<IccPair>,
}

/// One evaluated power, in export layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRecord {
    pub test: &'static str,
    pub m: u32,
    pub n: u32,
    pub rho_y: f64,
    pub rho_x: f64,
    pub effect: f64,
    pub alpha: f64,
    pub power: f64,
}

impl PowerRecord {
    fn new(design: &Design, icc: &IccPair, report: &PowerReport) -> Self {
        PowerRecord {
            test: report.test.name(),
            m: design.m,
            n: design.n,
            rho_y: icc.rho_y(),
            rho_x: icc.rho_x(),
            effect: report.effect,
            alpha: report.alpha,
            power: report.power,
        }
    }
}

/// `P(reject)` for an effect `beta` estimated with variance `variance`.
pub fn wald_power(beta: f64, variance: f64, alpha: f64, approximation: Approximation, n: u32) -> Result<f64> {
    if !(variance.is_finite() && variance > 0.0) {
        return Err(DesignError::Degenerate(format!(
            "estimator variance is {variance}"
        )));
    }
    let shift = beta.abs() / variance.sqrt();
    let p = match approximation {
        Approximation::Normal => {
            let z = Normal::new(0.0, 1.0).expect("standard normal");
            z.cdf(shift - z.inverse_cdf(1.0 - alpha / 2.0))
        }
        Approximation::StudentT => {
            if n <= 2 {
                return Err(DesignError::Degenerate(format!(
                    "t approximation needs more than 2 clusters, got {n}"
                )));
            }
            let t = StudentsT::new(0.0, 1.0, f64::from(n - 2))
                .map_err(|e| DesignError::Degenerate(e.to_string()))?;
            t.cdf(shift - t.inverse_cdf(1.0 - alpha / 2.0))
        }
    };
    Ok(p)
}

pub fn power_hte(
    design: &Design,
    icc: &IccPair,
    effects: &EffectSpec,
    scale: &ScaleModel,
) -> Result<PowerReport> {
    power(
        EffectTest::Hte,
        design,
        icc,
        effects,
        scale,
        &PowerOptions::default(),
    )
}

pub fn power_ate(
    design: &Design,
    icc: &IccPair,
    effects: &EffectSpec,
    scale: &ScaleModel,
) -> Result<PowerReport> {
    power(
        EffectTest::Ate,
        design,
        icc,
        effects,
        scale,
        &PowerOptions::default(),
    )
}

pub fn power(
    test: EffectTest,
    design: &Design,
    icc: &IccPair,
    effects: &EffectSpec,
    scale: &ScaleModel,
    options: &PowerOptions,
) -> Result<PowerReport> {
    let (effect, standardized_effect, variance) = match test {
        EffectTest::Hte => (
            effects.beta_hte(),
            effects.standardized_hte(scale),
            var_hte(design, icc, scale)?,
        ),
        EffectTest::Ate => {
            let total = var_ate(design, icc, scale);
            let variance = match options.ate_variance {
                AteVariance::Residual => total * (1.0 - icc.rho_y()),
                AteVariance::Total => total,
            };
            (effects.beta_ate(), effects.standardized_ate(scale), variance)
        }
    };
    Ok(PowerReport {
        test,
        power: wald_power(effect, variance, effects.alpha(), options.approximation, design.n)?,
        effect,
        standardized_effect,
        variance,
        alpha: effects.alpha(),
    })
}

/// Smallest and largest power of `design` over the grid of `params`.
pub fn power_bounds(
    test: EffectTest,
    design: &Design,
    params: &ParameterSpace,
    effects: &EffectSpec,
    scale: &ScaleModel,
    options: &PowerOptions,
) -> Result<PowerBounds> {
    let mut lower = (f64::INFINITY, None);
    let mut upper = (f64::NEG_INFINITY, None);
    let mut degenerate_cells = Vec::new();
    for icc in params.grid() {
        match power(test, design, &icc, effects, scale, options) {
            Ok(r) => {
                if r.power < lower.0 {
                    lower = (r.power, Some(icc));
                }
                if r.power > upper.0 {
                    upper = (r.power, Some(icc));
                }
            }
            Err(DesignError::Degenerate(_)) => degenerate_cells.push(icc),
            Err(e) => return Err(e),
        }
    }
    match (lower.1, upper.1) {
        (Some(argmin), Some(argmax)) => Ok(PowerBounds {
            test,
            lower: lower.0,
            upper: upper.0,
            argmin,
            argmax,
            degenerate_cells,
        }),
        _ => Err(DesignError::Degenerate(
            "power is undefined at every grid point".into(),
        )),
    }
}

/// Power at every grid point of `params`.
pub fn power_grid(
    test: EffectTest,
    design: &Design,
    params: &ParameterSpace,
    effects: &EffectSpec,
    scale: &ScaleModel,
    options: &PowerOptions,
) -> Result<Vec<PowerRecord>> {
    params
        .grid()
        .iter()
        .map(|icc| {
            power(test, design, icc, effects, scale, options).map(|r| PowerRecord::new(design, icc, &r))
        })
        .collect()
}

/// `count` evenly spaced levels spanning `[lo, hi]`.
pub fn levels(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 || lo == hi {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Power against the covariate-ICC axis of `params`, one curve per fixed
/// outcome-ICC in `rho_y_levels`.
pub fn power_curve(
    test: EffectTest,
    design: &Design,
    rho_y_levels: &[f64],
    params: &ParameterSpace,
    effects: &EffectSpec,
    scale: &ScaleModel,
    options: &PowerOptions,
) -> Result<Vec<PowerRecord>> {
    let mut out = Vec::new();
    for &ry in rho_y_levels {
        for rx in params.rho_x_axis() {
            let icc = IccPair::new(ry, rx)?;
            let r = power(test, design, &icc, effects, scale, options)?;
            out.push(PowerRecord::new(design, &icc, &r));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn icc(ry: f64, rx: f64) -> IccPair {
        IccPair::new(ry, rx).unwrap()
    }

    #[test]
    fn size_of_the_test_under_the_null() {
        let es = EffectSpec::new(0.0, 0.0, 0.05).unwrap();
        let d = Design::new(10, 20).unwrap();
        let r = power_hte(&d, &icc(0.1, 0.5), &es, &ScaleModel::default()).unwrap();
        assert!((r.power - 0.025).abs() < 1e-9);
    }

    #[test]
    fn table_design_power() {
        // k = 10, rho_y = 0.05, rho_x = 0.75 locally optimal design
        let es = EffectSpec::new(0.2, 0.2, 0.05).unwrap();
        let d = Design::new(22, 62).unwrap();
        let r = power_hte(&d, &icc(0.05, 0.75), &es, &ScaleModel::default()).unwrap();
        assert!((r.power - 0.830).abs() < 5e-4);
    }

    #[test]
    fn residual_ate_variance_is_smaller() {
        let es = EffectSpec::new(0.2, 0.2, 0.05).unwrap();
        let d = Design::new(9, 105).unwrap();
        let c = icc(0.1, 1.0);
        let residual = power_ate(&d, &c, &es, &ScaleModel::default()).unwrap();
        let total = power(
            EffectTest::Ate,
            &d,
            &c,
            &es,
            &ScaleModel::default(),
            &PowerOptions {
                ate_variance: AteVariance::Total,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((residual.power - 0.676).abs() < 5e-4);
        assert!(total.power < residual.power);
    }

    #[test]
    fn student_t_is_more_conservative() {
        let es = EffectSpec::new(0.2, 0.2, 0.05).unwrap();
        let d = Design::new(22, 12).unwrap();
        let c = icc(0.05, 0.75);
        let opts = PowerOptions {
            approximation: Approximation::StudentT,
            ..Default::default()
        };
        let t = power(EffectTest::Hte, &d, &c, &es, &ScaleModel::default(), &opts).unwrap();
        let z = power_hte(&d, &c, &es, &ScaleModel::default()).unwrap();
        assert!(t.power < z.power);
    }

    #[test]
    fn bounds_bracket_every_cell() {
        let es = EffectSpec::new(0.2, 0.2, 0.05).unwrap();
        let d = Design::new(22, 62).unwrap();
        let ps = ParameterSpace::new((0.005, 0.2), (0.1, 1.0), 10).unwrap();
        let opts = PowerOptions::default();
        let b = power_bounds(EffectTest::Hte, &d, &ps, &es, &ScaleModel::default(), &opts).unwrap();
        let all = power_grid(EffectTest::Hte, &d, &ps, &es, &ScaleModel::default(), &opts).unwrap();
        assert!(all.iter().all(|r| r.power >= b.lower && r.power <= b.upper));
        assert!(b.degenerate_cells.is_empty());
    }

    #[test]
    fn curve_layout() {
        let es = EffectSpec::new(0.2, 0.2, 0.05).unwrap();
        let d = Design::new(22, 62).unwrap();
        let ps = ParameterSpace::new((0.005, 0.2), (0.1, 1.0), 9).unwrap();
        let lv = [0.005, 0.05, 0.1, 0.2];
        let c = power_curve(
            EffectTest::Hte,
            &d,
            &lv,
            &ps,
            &es,
            &ScaleModel::default(),
            &PowerOptions::default(),
        )
        .unwrap();
        assert_eq!(c.len(), 40);
        assert_eq!(levels(0.0, 0.3, 4).len(), 4);
        assert_eq!(levels(0.2, 0.2, 4), vec![0.2]);
    }
}
