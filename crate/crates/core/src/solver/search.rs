//! Outer search over installation subsets and their sizings.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{Catalog, EquipmentSpec};
use crate::error::{Error, Result};
use crate::model::{
    capital_cost, installed_devices, maintenance_cost, scenario_cost, CostReport, Design, Dispatch,
    ScenarioCost,
};
use crate::par;
use crate::scenarios::{averaged_scenario, Policy, Scenario};

use super::bounds::{capacity, device_lower_bound, may_cover, Capacity};
use super::dispatch::{dispatch_scenario, DispatchSettings};
use super::{grid_values, IterationRecord, Mode, Problem, Solution, SolverOptions, Status};

/// Largest catalog the subset enumeration accepts.
const MAX_CANDIDATES: usize = 24;

/// Dispatches and costs of one design.
#[derive(Debug, Clone)]
struct Evaluation {
    report: CostReport,
    dispatches: Vec<Dispatch>,
    exact: bool,
}

fn evaluate(
    design: &Design,
    problem: &Problem,
    scenarios: &[Scenario],
    options: &SolverOptions,
) -> Result<Evaluation> {
    let catalog = &problem.catalog;
    let econ = &problem.economics;
    let devices = installed_devices(design, catalog)?;
    let set = DispatchSettings::from_options(options);
    let runs = par::map(scenarios, options.parallel, |s| {
        dispatch_scenario(&devices, s, &problem.demand, econ, &set)
    });
    let mut costs = Vec::with_capacity(scenarios.len());
    let mut dispatches = Vec::with_capacity(scenarios.len());
    let mut exact = true;
    for (s, run) in scenarios.iter().zip(runs) {
        match run {
            Ok((d, ex)) => {
                exact &= ex;
                costs.push(scenario_cost(&d, s, catalog, econ)?);
                dispatches.push(d);
            }
            Err(Error::InfeasibleDispatch { .. }) => {
                costs.push(ScenarioCost::infeasible(s));
                dispatches.push(Dispatch {
                    scenario: s.id.clone(),
                    hours: Vec::new(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    let report = CostReport::assemble(
        econ.crf()?,
        capital_cost(design, catalog),
        maintenance_cost(design, catalog),
        costs,
    );
    Ok(Evaluation {
        report,
        dispatches,
        exact,
    })
}

/// Dispatches every scenario of `problem` for a fixed design and
/// aggregates the costs. Scenarios without a feasible dispatch make the
/// report infeasible with an infinite TAC.
pub fn evaluate_design(
    design: &Design,
    problem: &Problem,
    options: &SolverOptions,
) -> Result<CostReport> {
    problem.validate()?;
    options.validate()?;
    design.validate(&problem.catalog, &problem.economics)?;
    Ok(evaluate(design, problem, &problem.scenarios, options)?.report)
}

/// Scenario set actually optimised: the input set, or in deterministic
/// mode one averaged scenario per policy carrying that policy's mass.
pub fn working_scenarios(problem: &Problem, mode: Mode) -> Result<Vec<Scenario>> {
    match mode {
        Mode::Stochastic => Ok(problem.scenarios.clone()),
        Mode::Deterministic => {
            let mut out = Vec::new();
            for policy in [Policy::CapAndTrade, Policy::EmissionTax] {
                let same: Vec<Scenario> = problem
                    .scenarios
                    .iter()
                    .filter(|s| s.policy == policy)
                    .cloned()
                    .collect();
                if same.is_empty() {
                    continue;
                }
                let mass: f64 = same.iter().map(|s| s.probability).sum();
                let mut avg = averaged_scenario(&same, policy)?;
                avg.id = format!("avg-{}", policy.name());
                avg.probability = mass;
                out.push(avg);
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarKind {
    Rating,
    Capacity,
    Tilt,
}

/// One continuous sizing variable of a subset.
#[derive(Debug, Clone)]
struct Var {
    device: usize,
    kind: VarKind,
    lo: f64,
    hi: f64,
}

fn sizing_vars(members: &[&EquipmentSpec]) -> Vec<Var> {
    let mut vars = Vec::new();
    for (i, s) in members.iter().enumerate() {
        vars.push(Var {
            device: i,
            kind: VarKind::Rating,
            lo: s.rp_min,
            hi: s.rp_max,
        });
        if s.is_storage() {
            vars.push(Var {
                device: i,
                kind: VarKind::Capacity,
                lo: s.cap_min,
                hi: s.cap_max,
            });
        }
        if let Some(sol) = s.solar() {
            let (lo, hi) = sol.tilt_bounds_rad();
            vars.push(Var {
                device: i,
                kind: VarKind::Tilt,
                lo,
                hi,
            });
        }
    }
    vars
}

fn build_design(
    catalog: &Catalog,
    members: &[&EquipmentSpec],
    vars: &[Var],
    x: &[f64],
) -> Result<Design> {
    let mut d = Design::empty(catalog);
    for (i, s) in members.iter().enumerate() {
        let rp = vars
            .iter()
            .zip(x)
            .find(|(v, _)| v.device == i && v.kind == VarKind::Rating)
            .map_or(s.rp_min, |(_, &x)| x);
        d.install(s, rp)?;
    }
    for (v, &xv) in vars.iter().zip(x) {
        let id = &members[v.device].id;
        match v.kind {
            VarKind::Rating => {}
            VarKind::Capacity => {
                d.set_storage_cap(id, xv);
            }
            VarKind::Tilt => {
                d.set_tilt(id, xv);
            }
        }
    }
    Ok(d)
}

/// Best sizing found for one subset.
struct SubsetResult {
    design: Design,
    eval: Evaluation,
    /// Every point of the sizing grid was evaluated or provably dominated.
    exhaustive: bool,
}

struct Sizer<'a> {
    problem: &'a Problem,
    scenarios: &'a [Scenario],
    options: &'a SolverOptions,
    members: Vec<&'a EquipmentSpec>,
    vars: Vec<Var>,
    /// Second-stage lower bound of the subset, used to skip sizings whose
    /// first stage alone cannot beat the incumbent.
    second_lb: f64,
    incumbent: f64,
    cache: HashMap<Vec<u64>, Option<f64>>,
    best: Option<(Vec<f64>, Design, Evaluation)>,
    evals: usize,
    exact: bool,
}

impl Sizer<'_> {
    fn first_stage(&self, d: &Design) -> Result<f64> {
        let c = &self.problem.catalog;
        Ok(self.problem.economics.crf()? * capital_cost(d, c) + maintenance_cost(d, c))
    }

    /// TAC at `x`, `None` when infeasible or dominated.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let design = build_design(&self.problem.catalog, &self.members, &self.vars, x)?;
        let cutoff = self
            .incumbent
            .min(self.best.as_ref().map_or(f64::INFINITY, |b| b.2.report.tac));
        let value = if self.first_stage(&design)? + self.second_lb >= cutoff {
            None
        } else {
            self.evals += 1;
            let ev = evaluate(&design, self.problem, self.scenarios, self.options)?;
            let tac = ev.report.tac;
            if !ev.report.feasible {
                None
            } else {
                self.exact &= ev.exact;
                if self.best.as_ref().is_none_or(|b| tac < b.2.report.tac) {
                    self.best = Some((x.to_vec(), design, ev));
                }
                Some(tac)
            }
        };
        self.cache.insert(key, value);
        Ok(value)
    }

    fn budget_left(&self) -> bool {
        self.evals < self.options.max_sizing_evals
    }

    fn grid_search(&mut self, points: usize) -> Result<bool> {
        let axes: Vec<Vec<f64>> = self
            .vars
            .iter()
            .map(|v| grid_values(v.lo, v.hi, points))
            .collect();
        let total = axes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
        if let Some(total) = total.filter(|&n| n <= self.options.max_sizing_evals) {
            let mut idx = vec![0usize; axes.len()];
            for _ in 0..total {
                let x: Vec<f64> = idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
                self.eval(&x)?;
                for k in (0..idx.len()).rev() {
                    idx[k] += 1;
                    if idx[k] < axes[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            return Ok(true);
        }
        // Compass search on the lattice from the largest sizing.
        let mut cur: Vec<usize> = axes.iter().map(|a| a.len() - 1).collect();
        let at = |ix: &[usize]| -> Vec<f64> { ix.iter().zip(&axes).map(|(&i, a)| a[i]).collect() };
        let mut val = self.eval(&at(&cur))?;
        let mut step = points / 2;
        while step >= 1 && self.budget_left() {
            let mut moved = false;
            for k in 0..cur.len() {
                for dir in [-1i64, 1] {
                    let j = cur[k] as i64 + dir * step as i64;
                    if j < 0 || j as usize >= axes[k].len() || !self.budget_left() {
                        continue;
                    }
                    let mut cand = cur.clone();
                    cand[k] = j as usize;
                    let v = self.eval(&at(&cand))?;
                    if better(v, val) {
                        cur = cand;
                        val = v;
                        moved = true;
                    }
                }
            }
            if !moved {
                step /= 2;
            }
        }
        Ok(false)
    }

    fn continuous_search(&mut self) -> Result<()> {
        let n = self.vars.len();
        let span: Vec<f64> = self.vars.iter().map(|v| v.hi - v.lo).collect();
        let vars = self.vars.clone();
        let point = |u: &[f64]| -> Vec<f64> {
            vars.iter()
                .zip(u)
                .map(|(v, &t)| v.lo + t * (v.hi - v.lo))
                .collect()
        };
        let mut starts: Vec<Vec<f64>> = vec![vec![1.0; n], vec![0.0; n], vec![0.5; n]];
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed);
        let shift: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        for k in 1..=self.options.sizing_grid_points.saturating_sub(3) {
            starts.push(
                (0..n)
                    .map(|d| (halton(k, PRIMES[d % PRIMES.len()]) + shift[d]).fract())
                    .collect(),
            );
        }
        let mut cur: Option<(Vec<f64>, f64)> = None;
        for u in &starts {
            if !self.budget_left() {
                break;
            }
            if let Some(v) = self.eval(&point(u))? {
                if cur.as_ref().is_none_or(|c| v < c.1) {
                    cur = Some((u.clone(), v));
                }
            }
        }
        let Some((mut u, mut val)) = cur else {
            return Ok(());
        };
        let mut step = 0.25;
        while step > 1e-3 && self.budget_left() {
            let mut moved = false;
            for k in 0..n {
                if span[k] <= 0.0 {
                    continue;
                }
                for dir in [-1.0, 1.0] {
                    if !self.budget_left() {
                        break;
                    }
                    let mut cand = u.clone();
                    cand[k] = (cand[k] + dir * step).clamp(0.0, 1.0);
                    if cand[k] == u[k] {
                        continue;
                    }
                    if let Some(v) = self.eval(&point(&cand))? {
                        if v < val {
                            u = cand;
                            val = v;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        Ok(())
    }
}

fn better(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `k` in base `b`.
fn halton(mut k: usize, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while k > 0 {
        f /= b as f64;
        r += f * (k as u64 % b) as f64;
        k /= b as usize;
    }
    r
}

/// Candidate subsets with their lower bounds, best bound first; ties go to
/// the lexicographically smaller id list.
fn ranked_subsets(
    problem: &Problem,
    scenarios: &[Scenario],
    options: &SolverOptions,
) -> Result<Vec<(f64, Vec<usize>)>> {
    let specs: Vec<&EquipmentSpec> = problem.catalog.iter().collect();
    let n = specs.len();
    if n > MAX_CANDIDATES {
        return Err(Error::InstanceTooLarge(format!(
            "{n} candidates, at most {MAX_CANDIDATES} supported"
        )));
    }
    let mut forced = 0u32;
    for id in &options.force_install {
        let i = specs.iter().position(|s| &s.id == id).ok_or_else(|| {
            Error::validation(
                "options",
                "force_install",
                format!("unknown equipment `{id}`"),
            )
        })?;
        forced |= 1 << i;
    }
    let max_installed = problem.economics.max_installed;
    if forced.count_ones() as usize > max_installed {
        return Err(Error::validation(
            "options",
            "force_install",
            "more forced installs than the install limit",
        ));
    }
    let hours = problem.demand.hours();
    let lb = specs
        .iter()
        .map(|s| device_lower_bound(s, scenarios, hours, &problem.economics).map(|b| b.total()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if mask & forced != forced || mask.count_ones() as usize > max_installed {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let bound: f64 = members.iter().map(|&i| lb[i]).sum();
        out.push((bound, members));
    }
    let ids = |m: &[usize]| -> Vec<&str> {
        let mut v: Vec<&str> = m.iter().map(|&i| specs[i].id.as_str()).collect();
        v.sort();
        v
    };
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| ids(&a.1).cmp(&ids(&b.1))));
    Ok(out)
}

/// Minimises the total annualised cost over installation subsets, sizings
/// and per-scenario dispatch.
pub fn solve_design(problem: &Problem, options: &SolverOptions) -> Result<Solution> {
    problem.validate()?;
    options.validate()?;
    let scenarios = working_scenarios(problem, options.mode)?;
    let specs: Vec<&EquipmentSpec> = problem.catalog.iter().collect();
    let hours = problem.demand.hours();
    let caps = specs
        .iter()
        .map(|s| capacity(s, &scenarios, hours))
        .collect::<Result<Vec<Capacity>>>()?;
    let second_lb: Vec<f64> = specs
        .iter()
        .map(|s| {
            device_lower_bound(s, &scenarios, hours, &problem.economics).map(|b| b.second_stage)
        })
        .collect::<Result<_>>()?;

    let ranked = ranked_subsets(problem, &scenarios, options)?;
    let mut best: Option<SubsetResult> = None;
    let mut log: Vec<IterationRecord> = Vec::new();
    let mut closed = true;
    let mut all_exact = true;
    let mut iterations = 0usize;

    for (bound, members) in &ranked {
        let inc = best.as_ref().map_or(f64::INFINITY, |b| b.eval.report.tac);
        if inc.is_finite() {
            let gap = options.abs_tol.max(options.rel_tol * inc.abs());
            if *bound >= inc - gap {
                break;
            }
        }
        let member_caps: Vec<&Capacity> = members.iter().map(|&i| &caps[i]).collect();
        if !may_cover(&member_caps, &scenarios, &problem.demand, hours) {
            continue;
        }
        if iterations >= options.max_outer_iters {
            closed = false;
            break;
        }
        iterations += 1;
        let member_specs: Vec<&EquipmentSpec> = members.iter().map(|&i| specs[i]).collect();
        let vars = sizing_vars(&member_specs);
        let mut sizer = Sizer {
            problem,
            scenarios: &scenarios,
            options,
            members: member_specs,
            vars,
            second_lb: members.iter().map(|&i| second_lb[i]).sum(),
            incumbent: inc,
            cache: HashMap::new(),
            best: None,
            evals: 0,
            exact: true,
        };
        let exhaustive = match options.grid {
            Some(g) => sizer.grid_search(g.sizing_points)?,
            None => {
                sizer.continuous_search()?;
                false
            }
        };
        all_exact &= exhaustive && sizer.exact;
        let found = sizer.best.take().map(|(_, design, eval)| SubsetResult {
            design,
            eval,
            exhaustive,
        });
        let tac = found.as_ref().map(|f| f.eval.report.tac);
        if let Some(f) = found {
            if f.eval.report.tac < inc {
                best = Some(f);
            }
        }
        let incumbent = best.as_ref().map(|b| b.eval.report.tac);
        log::debug!(
            "subset {:?}: bound {bound:.2}, tac {tac:?}, incumbent {incumbent:?}",
            ids_of(&specs, members)
        );
        log.push(IterationRecord {
            iteration: iterations,
            subset: ids_of(&specs, members),
            lower_bound: Some(*bound),
            tac,
            incumbent,
        });
    }

    let best = match best {
        Some(b) => b,
        None if !closed => return Err(Error::IterationLimit { iterations }),
        None => return Err(Error::Infeasible),
    };
    let status = if !closed {
        Status::IterLimit
    } else if all_exact && best.exhaustive {
        Status::Optimal
    } else {
        Status::Feasible
    };
    Ok(Solution {
        design: best.design,
        dispatches: best.eval.dispatches,
        report: best.eval.report,
        status,
        outer_iterations: iterations,
        log,
    })
}

fn ids_of(specs: &[&EquipmentSpec], members: &[usize]) -> Vec<String> {
    members.iter().map(|&i| specs[i].id.clone()).collect()
}
