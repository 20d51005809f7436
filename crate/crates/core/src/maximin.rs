//! Maximin designs: the cluster size whose worst relative efficiency over a
//! rectangle of plausible ICCs is largest.
//!
//! Relative efficiencies compare budget-exhausting allocations, so they are
//! free of the outcome and covariate scales and of the rounding of `n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::lod::{check_lambda, reference_optimum, ReferenceOptimum};
use crate::model::{CostModel, Design, DesignSpace, IccPair, ParameterSpace, ScaleModel};
use crate::variance::{budget_ate_variance, budget_hte_variance};

/// Relative tolerance when collecting the ICCs that attain the minimum.
const WORST_CASE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Relative efficiency for the heterogeneity effect.
    Hte,
    /// Relative efficiency for the average effect.
    Ate,
    /// `lambda RE_ATE + (1 - lambda) RE_HTE`.
    Compound(f64),
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Hte => "hte",
            Criterion::Ate => "ate",
            Criterion::Compound(_) => "compound",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Criterion::Compound(l) => Some(*l),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Criterion::Compound(l) => check_lambda(*l),
            _ => Ok(()),
        }
    }

    fn evaluate(&self, m: f64, icc: &IccPair, reference: &ReferenceOptimum, cost: &CostModel) -> Result<f64> {
        let unit = ScaleModel::default();
        let ate = || reference.var_ate / budget_ate_variance(m, icc.rho_y(), cost, &unit);
        let hte = || budget_hte_variance(m, icc, cost, &unit).map(|v| reference.var_hte / v);
        Ok(match self {
            Criterion::Hte => hte()?,
            Criterion::Ate => ate(),
            Criterion::Compound(l) => l * ate() + (1.0 - l) * hte()?,
        })
    }
}

/// Relative efficiency of `design` for the heterogeneity effect at `icc`,
/// against the locally optimal size within `space`.
pub fn re_hte(design: &Design, icc: &IccPair, cost: &CostModel, space: &DesignSpace) -> Result<f64> {
    criterion_value(Criterion::Hte, design, icc, cost, space)
}

/// Relative efficiency of `design` for the average effect.
pub fn re_ate(design: &Design, icc: &IccPair, cost: &CostModel, space: &DesignSpace) -> Result<f64> {
    criterion_value(Criterion::Ate, design, icc, cost, space)
}

pub fn compound_criterion(
    design: &Design,
    icc: &IccPair,
    lambda: f64,
    cost: &CostModel,
    space: &DesignSpace,
) -> Result<f64> {
    criterion_value(Criterion::Compound(lambda), design, icc, cost, space)
}

pub fn criterion_value(
    criterion: Criterion,
    design: &Design,
    icc: &IccPair,
    cost: &CostModel,
    space: &DesignSpace,
) -> Result<f64> {
    criterion.validate()?;
    let reference = reference_optimum(icc, cost, space)?;
    criterion.evaluate(f64::from(design.m), icc, &reference, cost)
}

/// Criterion values for every admissible cluster size and grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSurface {
    pub criterion: Criterion,
    pub designs: Vec<Design>,
    pub grid: Vec<IccPair>,
    /// Row-major: one row of `grid.len()` values per design.
    pub values: Vec<f64>,
}

/// One cell of a criterion surface, in export layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceRecord {
    pub m: u32,
    pub n: u32,
    pub rho_y: f64,
    pub rho_x: f64,
    pub value: f64,
    pub kind: &'static str,
    pub lambda: Option<f64>,
}

impl CriterionSurface {
    pub fn row(&self, design_index: usize) -> &[f64] {
        let w = self.grid.len();
        &self.values[design_index * w..(design_index + 1) * w]
    }

    /// Minimum over the grid for each design, with the first grid index
    /// attaining it.
    pub fn minima(&self) -> Vec<(f64, usize)> {
        (0..self.designs.len())
            .map(|i| {
                self.row(i).iter().enumerate().fold(
                    (f64::INFINITY, 0),
                    |acc, (g, &v)| if v < acc.0 { (v, g) } else { acc },
                )
            })
            .collect()
    }

    /// Values of every design at a single grid point.
    pub fn column(&self, grid_index: usize) -> Vec<f64> {
        (0..self.designs.len()).map(|i| self.row(i)[grid_index]).collect()
    }

    pub fn records(&self) -> Vec<SurfaceRecord> {
        let mut out = Vec::with_capacity(self.values.len());
        for (i, d) in self.designs.iter().enumerate() {
            for (icc, &value) in self.grid.iter().zip(self.row(i)) {
                out.push(SurfaceRecord {
                    m: d.m,
                    n: d.n,
                    rho_y: icc.rho_y(),
                    rho_x: icc.rho_x(),
                    value,
                    kind: self.criterion.name(),
                    lambda: self.criterion.lambda(),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximinResult {
    pub criterion: Criterion,
    pub design: Design,
    /// Smallest criterion value of `design` over the grid.
    pub min_value: f64,
    /// Grid points at which `design` attains `min_value`.
    pub worst_case_iccs: Vec<IccPair>,
    #[serde(skip)]
    pub surface: CriterionSurface,
}

/// A maximin problem: the ICC rectangle, the admissible designs, and the
/// space over which the locally optimal references are taken.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximinSearch {
    params: ParameterSpace,
    designs: DesignSpace,
    reference: DesignSpace,
    cost: CostModel,
}

impl MaximinSearch {
    /// References are taken over the search space itself.
    pub fn new(params: ParameterSpace, designs: DesignSpace, cost: CostModel) -> Self {
        MaximinSearch {
            params,
            reference: designs,
            designs,
            cost,
        }
    }

    /// Uses a wider space for the locally optimal references, e.g. when the
    /// search is restricted by practical limits the references should ignore.
    pub fn with_reference(mut self, reference: DesignSpace) -> Result<Self> {
        reference.cluster_sizes(&self.cost)?;
        if !reference.contains(&self.designs, &self.cost) {
            return Err(DesignError::invalid(
                "reference_space",
                "must contain the design space being searched",
            ));
        }
        self.reference = reference;
        Ok(self)
    }

    pub fn params(&self) -> &ParameterSpace {
        &self.params
    }

    pub fn designs(&self) -> &DesignSpace {
        &self.designs
    }

    pub fn reference(&self) -> &DesignSpace {
        &self.reference
    }

    pub fn cost(&self) -> &CostModel {
        &self.cost
    }

    /// Admissible integer designs, each with the budget-exhausting `n`.
    pub fn candidates(&self) -> Result<Vec<Design>> {
        let mut out = Vec::new();
        for m in self.designs.cluster_sizes(&self.cost)? {
            let d = Design::for_budget(m, &self.cost)?;
            if d.n >= self.designs.n_min() {
                out.push(d);
            }
        }
        if out.is_empty() {
            return Err(DesignError::Configuration(
                "no cluster size leaves enough clusters".into(),
            ));
        }
        Ok(out)
    }

    pub fn surface(&self, criterion: Criterion) -> Result<CriterionSurface> {
        criterion.validate()?;
        let designs = self.candidates()?;
        let grid = self.params.grid();
        let references = grid
            .par_iter()
            .map(|icc| reference_optimum(icc, &self.cost, &self.reference))
            .collect::<Result<Vec<_>>>()?;
        let rows = designs
            .par_iter()
            .map(|d| {
                let m = f64::from(d.m);
                grid.iter()
                    .zip(&references)
                    .map(|(icc, r)| criterion.evaluate(m, icc, r, &self.cost))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CriterionSurface {
            criterion,
            designs,
            grid,
            values: rows.concat(),
        })
    }

    pub fn run(&self, criterion: Criterion) -> Result<MaximinResult> {
        let surface = self.surface(criterion)?;
        let minima = surface.minima();
        let mut best = 0;
        for (i, (v, _)) in minima.iter().enumerate() {
            if *v > minima[best].0 {
                best = i;
            }
        }
        let min_value = minima[best].0;
        let worst_case_iccs = surface
            .grid
            .iter()
            .zip(surface.row(best))
            .filter(|(_, &v)| v <= min_value + WORST_CASE_TOL * min_value.abs().max(1.0))
            .map(|(icc, _)| *icc)
            .collect();
        Ok(MaximinResult {
            criterion,
            design: surface.designs[best],
            min_value,
            worst_case_iccs,
            surface,
        })
    }
}

pub fn maximin_hte(
    params: &ParameterSpace,
    designs: &DesignSpace,
    cost: &CostModel,
) -> Result<MaximinResult> {
    MaximinSearch::new(params.clone(), *designs, *cost).run(Criterion::Hte)
}

pub fn maximin_ate(
    params: &ParameterSpace,
    designs: &DesignSpace,
    cost: &CostModel,
) -> Result<MaximinResult> {
    MaximinSearch::new(params.clone(), *designs, *cost).run(Criterion::Ate)
}

pub fn maximin_compound(
    params: &ParameterSpace,
    designs: &DesignSpace,
    cost: &CostModel,
    lambda: f64,
) -> Result<MaximinResult> {
    MaximinSearch::new(params.clone(), *designs, *cost).run(Criterion::Compound(lambda))
}

pub fn criterion_surface(
    criterion: Criterion,
    params: &ParameterSpace,
    designs: &DesignSpace,
    cost: &CostModel,
) -> Result<CriterionSurface> {
    MaximinSearch::new(params.clone(), *designs, *cost).surface(criterion)
}
