//! Domain types shared by every design computation.
//!
//! Constructors validate their invariants, so a value of any of these types
//! can be handed to the variance, optimization and power routines without
//! further checks.

use serde::Serialize;

use crate::error::{DesignError, Result};

/// Relative slack used when flooring budget-derived cluster counts, so that
/// exact divisions such as `B / (c + 2s) == 1` are not lost to rounding.
const FLOOR_SLACK: f64 = 1e-12;

fn check_finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(DesignError::invalid(field, "must be a finite number"))
    }
}

/// Budget split into a per-cluster and a per-individual cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel {
    budget: f64,
    cluster_cost: f64,
    individual_cost: f64,
}

impl CostModel {
    pub fn new(budget: f64, cluster_cost: f64, individual_cost: f64) -> Result<Self> {
        check_finite("budget", budget)?;
        check_finite("cluster_cost", cluster_cost)?;
        check_finite("indiv_cost", individual_cost)?;
        if budget <= 0.0 {
            return Err(DesignError::invalid("budget", "must be positive"));
        }
        if individual_cost <= 0.0 {
            return Err(DesignError::invalid("indiv_cost", "must be positive"));
        }
        if cluster_cost < 0.0 {
            return Err(DesignError::invalid("cluster_cost", "must be non-negative"));
        }
        if budget < cluster_cost + 2.0 * individual_cost {
            return Err(DesignError::invalid(
                "budget",
                format!(
                    "must cover at least one cluster of two ({})",
                    cluster_cost + 2.0 * individual_cost
                ),
            ));
        }
        Ok(CostModel {
            budget,
            cluster_cost,
            individual_cost,
        })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn cluster_cost(&self) -> f64 {
        self.cluster_cost
    }

    pub fn individual_cost(&self) -> f64 {
        self.individual_cost
    }

    /// Cluster-to-individual cost ratio `k = c / s`.
    pub fn cost_ratio(&self) -> f64 {
        self.cluster_cost / self.individual_cost
    }

    /// Cost of recruiting one cluster of size `m`.
    pub fn cost_per_cluster(&self, m: f64) -> f64 {
        self.cluster_cost + self.individual_cost * m
    }

    /// Number of clusters of size `m` that exhaust the budget, not rounded.
    pub fn continuous_clusters(&self, m: f64) -> f64 {
        self.budget / self.cost_per_cluster(m)
    }

    /// Largest whole number of clusters of size `m` the budget can pay for.
    pub fn clusters_for(&self, m: u32) -> Result<u32> {
        if m < 2 {
            return Err(DesignError::invalid("m", "cluster size must be at least 2"));
        }
        let per_cluster = self.cost_per_cluster(f64::from(m));
        if per_cluster > self.budget * (1.0 + FLOOR_SLACK) {
            return Err(DesignError::Unaffordable {
                m,
                cluster_cost: per_cluster,
                budget: self.budget,
            });
        }
        let n = self.continuous_clusters(f64::from(m));
        Ok((n * (1.0 + FLOOR_SLACK)).floor().max(1.0) as u32)
    }

    /// Total spend of `n` clusters of size `m`.
    pub fn total_cost(&self, m: u32, n: u32) -> f64 {
        f64::from(n) * self.cost_per_cluster(f64::from(m))
    }

    pub fn is_affordable(&self, m: u32, n: u32) -> bool {
        self.total_cost(m, n) <= self.budget * (1.0 + FLOOR_SLACK)
    }

    /// Cluster size at which the budget pays for exactly `n_min` clusters.
    pub fn max_cluster_size(&self, n_min: u32) -> f64 {
        (self.budget / f64::from(n_min) - self.cluster_cost) / self.individual_cost
    }

    /// Same cost ratio with every money amount multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        CostModel::new(
            self.budget * factor,
            self.cluster_cost * factor,
            self.individual_cost * factor,
        )
    }
}

/// Outcome-ICC (adjusted for the effect modifier) and covariate-ICC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IccPair {
    rho_y: f64,
    rho_x: f64,
}

impl IccPair {
    pub fn new(rho_y: f64, rho_x: f64) -> Result<Self> {
        check_finite("rho_y", rho_y)?;
        check_finite("rho_x", rho_x)?;
        if !(0.0..1.0).contains(&rho_y) {
            return Err(DesignError::invalid("rho_y", "must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&rho_x) {
            return Err(DesignError::invalid("rho_x", "must lie in [0, 1]"));
        }
        Ok(IccPair { rho_y, rho_x })
    }

    /// Outcome-ICC conditional on the covariate.
    pub fn rho_y(&self) -> f64 {
        self.rho_y
    }

    /// Covariate-ICC.
    pub fn rho_x(&self) -> f64 {
        self.rho_x
    }
}

/// Outcome, covariate and treatment-assignment variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleModel {
    var_y_given_x: f64,
    var_x: f64,
    var_w: f64,
}

impl Default for ScaleModel {
    /// Unit outcome and covariate variances with 1:1 allocation.
    fn default() -> Self {
        ScaleModel {
            var_y_given_x: 1.0,
            var_x: 1.0,
            var_w: 0.25,
        }
    }
}

impl ScaleModel {
    pub fn new(var_y_given_x: f64, var_x: f64, var_w: f64) -> Result<Self> {
        check_finite("var_y", var_y_given_x)?;
        check_finite("var_x", var_x)?;
        check_finite("var_w", var_w)?;
        if var_y_given_x <= 0.0 {
            return Err(DesignError::invalid("var_y", "must be positive"));
        }
        if var_x <= 0.0 {
            return Err(DesignError::invalid("var_x", "must be positive"));
        }
        if var_w <= 0.0 || var_w > 0.25 {
            return Err(DesignError::invalid("var_w", "must lie in (0, 0.25]"));
        }
        Ok(ScaleModel {
            var_y_given_x,
            var_x,
            var_w,
        })
    }

    /// Builds the scales from standard deviations with 1:1 allocation.
    pub fn from_sd(sd_y_given_x: f64, sd_x: f64) -> Result<Self> {
        ScaleModel::new(sd_y_given_x * sd_y_given_x, sd_x * sd_x, 0.25)
    }

    pub fn var_y_given_x(&self) -> f64 {
        self.var_y_given_x
    }

    pub fn var_x(&self) -> f64 {
        self.var_x
    }

    pub fn var_w(&self) -> f64 {
        self.var_w
    }

    /// Copy with the outcome variance multiplied by `factor`.
    pub fn with_outcome_scaled(&self, factor: f64) -> Result<Self> {
        ScaleModel::new(self.var_y_given_x * factor, self.var_x, self.var_w)
    }
}

/// A concrete trial: `n` clusters of `m` individuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Design {
    pub m: u32,
    pub n: u32,
    /// Whether the design fits the budget it was built against. Designs built
    /// without a cost model are reported as feasible.
    pub feasible: bool,
    /// Unrounded optimum the design was derived from, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_continuous: Option<f64>,
}

impl Design {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m < 2 {
            return Err(DesignError::invalid("m", "cluster size must be at least 2"));
        }
        if n < 2 {
            return Err(DesignError::invalid("n", "number of clusters must be at least 2"));
        }
        Ok(Design {
            m,
            n,
            feasible: true,
            m_continuous: None,
        })
    }

    /// Design with feasibility checked against `cost`.
    pub fn budgeted(m: u32, n: u32, cost: &CostModel) -> Result<Self> {
        let mut design = Design::new(m, n)?;
        design.feasible = cost.is_affordable(m, n);
        Ok(design)
    }

    /// Cluster size `m` with as many clusters as the budget pays for.
    pub fn for_budget(m: u32, cost: &CostModel) -> Result<Self> {
        let n = cost.clusters_for(m)?;
        Design::budgeted(m, n, cost)
    }

    pub fn with_continuous(mut self, m_continuous: f64) -> Self {
        self.m_continuous = Some(m_continuous);
        self
    }

    pub fn total_size(&self) -> u64 {
        u64::from(self.m) * u64::from(self.n)
    }
}

/// Effect sizes on the outcome scale and the two-sided significance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectSpec {
    beta_ate: f64,
    beta_hte: f64,
    alpha: f64,
}

impl EffectSpec {
    pub fn new(beta_ate: f64, beta_hte: f64, alpha: f64) -> Result<Self> {
        check_finite("beta_ate", beta_ate)?;
        check_finite("beta_hte", beta_hte)?;
        check_finite("alpha", alpha)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(DesignError::invalid("alpha", "must lie in (0, 1)"));
        }
        Ok(EffectSpec {
            beta_ate,
            beta_hte,
            alpha,
        })
    }

    /// Effects given in standardized units, converted to the outcome scale
    /// of `scale`.
    pub fn standardized(delta_ate: f64, delta_hte: f64, alpha: f64, scale: &ScaleModel) -> Result<Self> {
        let sd_y = scale.var_y_given_x().sqrt();
        let sd_x = scale.var_x().sqrt();
        EffectSpec::new(delta_ate * sd_y, delta_hte * sd_y / sd_x, alpha)
    }

    pub fn beta_ate(&self) -> f64 {
        self.beta_ate
    }

    pub fn beta_hte(&self) -> f64 {
        self.beta_hte
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn standardized_hte(&self, scale: &ScaleModel) -> f64 {
        self.beta_hte * scale.var_x().sqrt() / scale.var_y_given_x().sqrt()
    }

    pub fn standardized_ate(&self, scale: &ScaleModel) -> f64 {
        self.beta_ate / scale.var_y_given_x().sqrt()
    }
}

/// Closed interval of ICC values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IccRange {
    pub lo: f64,
    pub hi: f64,
}

impl IccRange {
    fn points(&self, steps: u32) -> Vec<f64> {
        if self.lo == self.hi {
            return vec![self.lo];
        }
        let span = self.hi - self.lo;
        (0..=steps)
            .map(|i| {
                if i == steps {
                    self.hi
                } else {
                    self.lo + span * f64::from(i) / f64::from(steps)
                }
            })
            .collect()
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lo && value <= self.hi
    }
}

/// Rectangle of plausible ICC values, discretized into a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSpace {
    rho_y: IccRange,
    rho_x: IccRange,
    grid_steps: u32,
}

impl ParameterSpace {
    pub const DEFAULT_STEPS: u32 = 40;

    /// `grid_steps` is the number of intervals per axis, so every axis has
    /// `grid_steps + 1` points including both ends.
    pub fn new(rho_y: (f64, f64), rho_x: (f64, f64), grid_steps: u32) -> Result<Self> {
        IccPair::new(rho_y.0, rho_x.0)?;
        IccPair::new(rho_y.1, rho_x.1)?;
        if rho_y.0 > rho_y.1 {
            return Err(DesignError::invalid("rho_y_min", "must not exceed rho_y_max"));
        }
        if rho_x.0 > rho_x.1 {
            return Err(DesignError::invalid("rho_x_min", "must not exceed rho_x_max"));
        }
        if grid_steps == 0 {
            return Err(DesignError::invalid("grid_steps", "must be positive"));
        }
        Ok(ParameterSpace {
            rho_y: IccRange {
                lo: rho_y.0,
                hi: rho_y.1,
            },
            rho_x: IccRange {
                lo: rho_x.0,
                hi: rho_x.1,
            },
            grid_steps,
        })
    }

    /// Single-point space.
    pub fn point(icc: IccPair) -> Self {
        ParameterSpace {
            rho_y: IccRange {
                lo: icc.rho_y(),
                hi: icc.rho_y(),
            },
            rho_x: IccRange {
                lo: icc.rho_x(),
                hi: icc.rho_x(),
            },
            grid_steps: 1,
        }
    }

    pub fn rho_y(&self) -> IccRange {
        self.rho_y
    }

    pub fn rho_x(&self) -> IccRange {
        self.rho_x
    }

    pub fn grid_steps(&self) -> u32 {
        self.grid_steps
    }

    pub fn rho_y_axis(&self) -> Vec<f64> {
        self.rho_y.points(self.grid_steps)
    }

    pub fn rho_x_axis(&self) -> Vec<f64> {
        self.rho_x.points(self.grid_steps)
    }

    /// Every grid point, outcome-ICC major. Always contains the corners.
    pub fn grid(&self) -> Vec<IccPair> {
        let xs = self.rho_x_axis();
        self.rho_y_axis()
            .into_iter()
            .flat_map(|ry| xs.iter().map(move |&rx| IccPair { rho_y: ry, rho_x: rx }))
            .collect()
    }

    pub fn cell_count(&self) -> usize {
        self.rho_y_axis().len() * self.rho_x_axis().len()
    }

    /// The (up to four) corners: (lo, lo), (lo, hi), (hi, lo), (hi, hi).
    pub fn corners(&self) -> Vec<IccPair> {
        let mut out = Vec::with_capacity(4);
        for ry in [self.rho_y.lo, self.rho_y.hi] {
            for rx in [self.rho_x.lo, self.rho_x.hi] {
                let icc = IccPair { rho_y: ry, rho_x: rx };
                if !out.contains(&icc) {
                    out.push(icc);
                }
            }
        }
        out
    }

    pub fn is_corner(&self, icc: &IccPair) -> bool {
        (icc.rho_y == self.rho_y.lo || icc.rho_y == self.rho_y.hi)
            && (icc.rho_x == self.rho_x.lo || icc.rho_x == self.rho_x.hi)
    }
}

/// Admissible cluster sizes and the minimum number of clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignSpace {
    m_min: u32,
    m_max: Option<u32>,
    n_min: u32,
}

impl Default for DesignSpace {
    fn default() -> Self {
        DesignSpace {
            m_min: 2,
            m_max: None,
            n_min: 6,
        }
    }
}

impl DesignSpace {
    pub fn new(m_min: u32, m_max: Option<u32>, n_min: u32) -> Result<Self> {
        if m_min < 2 {
            return Err(DesignError::invalid("min_cluster_size", "must be at least 2"));
        }
        if n_min < 2 {
            return Err(DesignError::invalid("min_clusters", "must be at least 2"));
        }
        if let Some(m_max) = m_max {
            if m_max < m_min {
                return Err(DesignError::invalid(
                    "max_cluster_size",
                    "must not be below min_cluster_size",
                ));
            }
        }
        Ok(DesignSpace { m_min, m_max, n_min })
    }

    pub fn m_min(&self) -> u32 {
        self.m_min
    }

    pub fn m_max(&self) -> Option<u32> {
        self.m_max
    }

    pub fn n_min(&self) -> u32 {
        self.n_min
    }

    /// Copy without the explicit cluster-size ceiling; only the minimum
    /// number of clusters then bounds `m`.
    pub fn without_m_max(&self) -> Self {
        DesignSpace { m_max: None, ..*self }
    }

    /// Continuous upper bound on `m`: the explicit ceiling or the size at
    /// which only `n_min` clusters remain affordable, whichever is smaller.
    pub fn upper_bound(&self, cost: &CostModel) -> f64 {
        let cap = cost.max_cluster_size(self.n_min);
        match self.m_max {
            Some(m_max) => cap.min(f64::from(m_max)),
            None => cap,
        }
    }

    /// Integer cluster sizes the space admits under `cost`.
    pub fn cluster_sizes(&self, cost: &CostModel) -> Result<std::ops::RangeInclusive<u32>> {
        let upper = self.upper_bound(cost);
        // Tolerate round-off when the cap is an exact integer.
        let upper_int = (upper * (1.0 + FLOOR_SLACK)).floor();
        if upper_int < f64::from(self.m_min) {
            return Err(DesignError::Configuration(format!(
                "largest affordable cluster size with {} clusters is {:.3}, below the minimum {}",
                self.n_min, upper, self.m_min
            )));
        }
        Ok(self.m_min..=upper_int as u32)
    }

    pub fn contains(&self, other: &DesignSpace, cost: &CostModel) -> bool {
        self.m_min <= other.m_min && self.upper_bound(cost) >= other.upper_bound(cost) - 1e-9
    }
}
