//! Design search, per-scenario dispatch and an exhaustive oracle for tiny
//! instances.

mod bounds;
mod dispatch;
mod hourly;
mod levels;
mod oracle;
mod search;

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::model::{CostReport, Design, Dispatch, Economics};
use crate::scenarios::{
    averaged_scenario, filter_scenarios, DemandProfile, Policy, Scenario, ScenarioFilter,
};

pub use bounds::{device_lower_bound, DeviceBound};
pub use dispatch::solve_dispatch;
pub use oracle::{brute_force_oracle, brute_force_oracle_with, OracleLimits};
pub use search::{evaluate_design, solve_design, working_scenarios};

/// Everything that defines an instance apart from solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub catalog: Catalog,
    pub scenarios: Vec<Scenario>,
    pub demand: DemandProfile,
    #[serde(default)]
    pub economics: Economics,
}

impl Problem {
    pub fn new(catalog: Catalog, scenarios: Vec<Scenario>, demand: DemandProfile) -> Self {
        Problem {
            catalog,
            scenarios,
            demand,
            economics: Economics::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::EmptySet("an empty scenario set".into()));
        }
        crate::scenarios::check_probabilities(&self.scenarios)?;
        self.demand.validate()?;
        for s in &self.scenarios {
            s.validate()?;
            if s.hours() != self.demand.hours() {
                return Err(Error::validation(
                    &s.id,
                    "weather",
                    format!(
                        "{} hours of weather for {} hours of demand",
                        s.hours(),
                        self.demand.hours()
                    ),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    Stochastic,
    Deterministic,
}

/// Restricts sizing and dispatch to uniform grids, matching the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Values per continuous sizing variable.
    pub sizing_points: usize,
    /// Output levels per device and hour, including zero.
    pub power_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Installation subsets evaluated before the search gives up.
    pub max_outer_iters: usize,
    /// Initial samples of the continuous sizing box.
    pub sizing_grid_points: usize,
    /// Refinement sweeps per dispatch hour.
    pub dispatch_max_iters: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Run scenarios on the rayon pool (ignored without the `parallel` feature).
    pub parallel: bool,
    /// Equipment that must be installed.
    pub force_install: Vec<String>,
    pub grid: Option<GridSpec>,
    /// Output levels per device and hour outside grid mode.
    pub dispatch_levels: usize,
    /// Charge or discharge levels per direction for storage.
    pub storage_levels: usize,
    /// Design evaluations allowed per installation subset.
    pub max_sizing_evals: usize,
    /// Branch-and-bound nodes per hourly subproblem before falling back to
    /// local search.
    pub node_budget: usize,
    /// Feasibility tolerance in MW or t/h.
    pub feasibility_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_tol: 1e-3,
            abs_tol: 1e-3,
            max_outer_iters: 40,
            sizing_grid_points: 6,
            dispatch_max_iters: 8,
            seed: 0,
            mode: Mode::Stochastic,
            parallel: true,
            force_install: Vec::new(),
            grid: None,
            dispatch_levels: 6,
            storage_levels: 4,
            max_sizing_evals: 40,
            node_budget: 20_000,
            feasibility_tol: crate::model::DEFAULT_TOL,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::validation("options", field, msg));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.feasibility_tol > 0.0) {
            return bad("rel_tol", "tolerances must be positive");
        }
        if self.sizing_grid_points < 2 || self.dispatch_levels < 2 || self.storage_levels < 2 {
            return bad("sizing_grid_points", "grid sizes must be at least 2");
        }
        if let Some(g) = self.grid {
            if g.sizing_points < 2 || g.power_points < 2 {
                return bad("grid", "grid sizes must be at least 2");
            }
        }
        if self.max_outer_iters == 0 || self.max_sizing_evals == 0 || self.node_budget == 0 {
            return bad("max_outer_iters", "iteration limits must be positive");
        }
        Ok(())
    }

    /// Options for an exact grid-restricted solve comparable with the oracle.
    pub fn grid_exact(grid: GridSpec) -> Self {
        SolverOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-9,
            max_outer_iters: usize::MAX,
            max_sizing_evals: usize::MAX,
            node_budget: usize::MAX,
            grid: Some(grid),
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// Search closed and every subproblem was solved exactly on its grid.
    Optimal,
    /// Search closed, but sizing or dispatch used heuristics.
    Feasible,
    Infeasible,
    /// Stopped at `max_outer_iters` with subsets left unexplored.
    IterLimit,
}

/// One outer iteration: the subset tried and the incumbent afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub subset: Vec<String>,
    /// Bound that ranked the subset; the oracle ranks nothing.
    pub lower_bound: Option<f64>,
    /// Best TAC of this subset, `None` when no sizing was feasible.
    pub tac: Option<f64>,
    pub incumbent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub design: Design,
    pub dispatches: Vec<Dispatch>,
    pub report: CostReport,
    pub status: Status,
    pub outer_iterations: usize,
    pub log: Vec<IterationRecord>,
}

/// Probability-weighted average of the scenarios under `policy`, solved as
/// a one-scenario program.
pub fn solve_deterministic(
    problem: &Problem,
    policy: Policy,
    options: &SolverOptions,
) -> Result<Solution> {
    let same = filter_scenarios(&problem.scenarios, ScenarioFilter::Policy(policy))?;
    let avg = averaged_scenario(&same, policy)?;
    let single = Problem {
        scenarios: vec![avg],
        ..problem.clone()
    };
    solve_design(&single, options)
}

/// `n` evenly spaced values from `lo` to `hi` inclusive; a single value
/// when the interval is degenerate.
pub fn grid_values(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}
