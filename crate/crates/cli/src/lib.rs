//! Batch front end: case presets, report files and hourly CSV series.

pub mod artifacts;
pub mod case;
pub mod compare;
pub mod error;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use memg_core::solver::{
    brute_force_oracle_with, solve_design, working_scenarios, GridSpec, OracleLimits, Problem,
    Solution, SolverOptions, Status,
};

use artifacts::{
    read_json, write_json, write_series, ReportRecord, RunRecord, REPORT_FILE, SOLUTION_FILE,
};
pub use case::{Case, CaseConfig, PolicySelection};
pub use error::{exit, CliError, Result};

pub const COMPARISON_FILE: &str = "comparison.json";
pub const ORACLE_FILE: &str = "oracle.json";
pub const ORACLE_SOLVER_FILE: &str = "solver.json";

/// Exit code for a finished solve.
pub fn status_exit_code(status: Status) -> i32 {
    match status {
        Status::Optimal | Status::Feasible => exit::OK,
        Status::Infeasible => exit::INFEASIBLE,
        Status::IterLimit => exit::ITER_LIMIT,
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_solution_files(
    dir: &Path,
    problem: &Problem,
    options: &SolverOptions,
    solution: &Solution,
) -> Result<()> {
    let installed: Vec<String> = solution
        .design
        .installed_ids()
        .map(str::to_string)
        .collect();
    let report = ReportRecord {
        status: solution.status,
        installed: installed.clone(),
        first_stage: solution.report.first_stage(),
        report: solution.report.clone(),
    };
    write_json(&dir.join(REPORT_FILE), &report)?;
    let scenarios = working_scenarios(problem, options.mode)?;
    write_series(dir, problem, &installed, &scenarios, &solution.dispatches)
}

/// Builds the case, solves it and writes every artifact into `config.out`.
pub fn run_case(config: &CaseConfig) -> Result<RunRecord> {
    let problem = config.build_problem()?;
    let options = config.effective_options();
    log::info!(
        "{:?}: {} candidates, {} scenarios, {} hours",
        config.case,
        problem.catalog.len(),
        problem.scenarios.len(),
        problem.demand.hours()
    );
    let solution = solve_design(&problem, &options)?;
    log::info!(
        "{:?} after {} subsets, TAC {:.6e}",
        solution.status,
        solution.outer_iterations,
        solution.report.tac
    );
    create_dir(&config.out)?;
    write_solution_files(&config.out, &problem, &options, &solution)?;
    let record = RunRecord {
        case: config.case,
        policy: config.policy,
        deterministic: config.deterministic,
        problem,
        options,
        solution,
    };
    write_json(&config.out.join(SOLUTION_FILE), &record)?;
    Ok(record)
}

/// Compares two `solution.json` files and writes `comparison.json`.
pub fn compare_files(a: &Path, b: &Path, out: &Path) -> Result<compare::Comparison> {
    let ra: RunRecord = read_json(a)?;
    let rb: RunRecord = read_json(b)?;
    let c = compare::compare(&ra, &rb)?;
    create_dir(out)?;
    write_json(&out.join(COMPARISON_FILE), &c)?;
    Ok(c)
}

/// Input of `memg oracle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub problem: Problem,
    pub grid: GridSpec,
    #[serde(default)]
    pub limits: Option<OracleLimits>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub instance: OracleInstance,
    pub solution: Solution,
}

/// Solves an instance exhaustively; with `with_solver` the main solver is
/// also run on the same grid and written next to it.
pub fn run_oracle(
    instance_path: &Path,
    out: &Path,
    with_solver: bool,
) -> Result<(Solution, Option<Solution>)> {
    let instance: OracleInstance = read_json(instance_path)?;
    let limits = instance.limits.unwrap_or_default();
    let oracle = brute_force_oracle_with(&instance.problem, instance.grid, &limits)?;
    let solver = if with_solver {
        Some(solve_design(
            &instance.problem,
            &SolverOptions::grid_exact(instance.grid),
        )?)
    } else {
        None
    };
    create_dir(out)?;
    let record = OracleRecord {
        instance,
        solution: oracle.clone(),
    };
    write_json(&out.join(ORACLE_FILE), &record)?;
    if let Some(s) = &solver {
        write_json(&out.join(ORACLE_SOLVER_FILE), s)?;
    }
    Ok((oracle, solver))
}

/// Path of the solution file a run writes into `dir`.
pub fn solution_path(dir: &Path) -> PathBuf {
    dir.join(SOLUTION_FILE)
}
