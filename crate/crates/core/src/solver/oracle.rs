//! Exhaustive reference solver for tiny grid-restricted instances.
//!
//! Only the grids are shared with the main solver: the sizing grid, the
//! per-device operating levels and the storage lattice. Flows, balances
//! and costs go through the model layer, and storage trajectories are
//! enumerated explicitly.

use serde::{Deserialize, Serialize};

use crate::catalog::EquipmentSpec;
use crate::devices::OperatingPoint;
use crate::error::{Error, Result};
use crate::model::{
    assemble_hour, installed_devices, scenario_cost, total_annualized_cost, Design, DeviceHour,
    Dispatch, HourDispatch, InstalledDevice,
};
use crate::scenarios::Scenario;

use super::levels::{device_levels, LevelGrid, Prices, StorageLattice};
use super::{grid_values, GridSpec, IterationRecord, Problem, Solution, Status};

const ORACLE_TOL: f64 = 1e-9;

/// Size limits above which the oracle refuses to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub candidates: usize,
    pub hours: usize,
    pub scenarios: usize,
    pub grid_points: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            candidates: 3,
            hours: 4,
            scenarios: 2,
            grid_points: 12,
        }
    }
}

impl OracleLimits {
    pub fn check(&self, problem: &Problem, grid: &GridSpec) -> Result<()> {
        let too_large = |what: &str, got: usize, max: usize| {
            Err(Error::InstanceTooLarge(format!(
                "{got} {what}, at most {max}"
            )))
        };
        if problem.catalog.len() > self.candidates {
            return too_large("candidates", problem.catalog.len(), self.candidates);
        }
        if problem.demand.hours() > self.hours {
            return too_large("hours", problem.demand.hours(), self.hours);
        }
        if problem.scenarios.len() > self.scenarios {
            return too_large("scenarios", problem.scenarios.len(), self.scenarios);
        }
        let points = grid.sizing_points.max(grid.power_points);
        if points > self.grid_points {
            return too_large("grid points", points, self.grid_points);
        }
        Ok(())
    }
}

/// Every sizing of `members` on the grid, in lexicographic order of the
/// per-device (rating, capacity, tilt) values.
fn sizings(
    catalog: &crate::catalog::Catalog,
    members: &[&EquipmentSpec],
    points: usize,
) -> Result<Vec<Design>> {
    let mut designs = vec![Design::empty(catalog)];
    for s in members {
        let rps = grid_values(s.rp_min, s.rp_max, points);
        let caps = if s.is_storage() {
            grid_values(s.cap_min, s.cap_max, points)
        } else {
            vec![f64::NAN]
        };
        let tilts = match s.solar() {
            Some(sol) => {
                let (lo, hi) = sol.tilt_bounds_rad();
                grid_values(lo, hi, points)
            }
            None => vec![f64::NAN],
        };
        let mut next = Vec::new();
        for d in &designs {
            for &rp in &rps {
                for &cap in &caps {
                    for &tilt in &tilts {
                        let mut e = d.clone();
                        e.install(s, rp)?;
                        if !cap.is_nan() {
                            e.set_storage_cap(&s.id, cap);
                        }
                        if !tilt.is_nan() {
                            e.set_tilt(&s.id, tilt);
                        }
                        next.push(e);
                    }
                }
            }
        }
        designs = next;
    }
    Ok(designs)
}

/// Cheapest balanced hour for fixed storage operation, by enumerating every
/// combination of the other devices' levels.
fn best_hour(
    devices: &[InstalledDevice<'_>],
    storage_ops: &[(usize, OperatingPoint)],
    scenario: &Scenario,
    problem: &Problem,
    t: usize,
    options: &[Vec<OperatingPoint>],
) -> Result<Option<(f64, HourDispatch)>> {
    let demand = problem.demand.at(t);
    let gens: Vec<usize> = (0..devices.len())
        .filter(|&k| !devices[k].spec.is_storage())
        .collect();
    let mut idx = vec![0usize; gens.len()];
    let mut best: Option<(f64, HourDispatch)> = None;
    loop {
        let mut ops = vec![OperatingPoint::default(); devices.len()];
        for (g, &k) in gens.iter().enumerate() {
            ops[k] = options[g][idx[g]];
        }
        for &(k, op) in storage_ops {
            ops[k] = op;
        }
        let hour: Vec<DeviceHour> = devices
            .iter()
            .zip(&ops)
            .map(|(d, op)| DeviceHour {
                id: d.id().to_string(),
                op: *op,
                flows: d.flows(op),
            })
            .collect();
        if let Ok(h) = assemble_hour(hour, &demand, ORACLE_TOL) {
            let one = Dispatch {
                scenario: scenario.id.clone(),
                hours: vec![h],
            };
            let c = scenario_cost(&one, scenario, &problem.catalog, &problem.economics)?.net();
            if best.as_ref().is_none_or(|b| c < b.0) {
                best = Some((c, one.hours.into_iter().next().expect("one hour")));
            }
        }
        let mut g = 0;
        loop {
            if g == gens.len() {
                return Ok(best);
            }
            idx[g] += 1;
            if idx[g] < options[g].len() {
                break;
            }
            idx[g] = 0;
            g += 1;
        }
    }
}

/// Cheapest dispatch of one scenario on the grid, `None` if infeasible.
fn best_dispatch(
    design: &Design,
    scenario: &Scenario,
    problem: &Problem,
    grid: &GridSpec,
) -> Result<Option<(f64, Dispatch)>> {
    let devices = installed_devices(design, &problem.catalog)?;
    let hours = problem.demand.hours();
    let pr = Prices::new(scenario, &problem.economics);
    let level_grid = LevelGrid {
        points: grid.power_points,
        valve_points: false,
    };
    let stores: Vec<(usize, StorageLattice)> = (0..devices.len())
        .filter_map(|k| StorageLattice::new(&devices[k], grid.power_points).map(|l| (k, l)))
        .collect();
    let mut joint: Vec<Vec<i64>> = vec![Vec::new()];
    for (_, l) in &stores {
        joint = joint
            .iter()
            .flat_map(|p| {
                l.actions
                    .iter()
                    .map(move |&a| p.iter().copied().chain([a]).collect())
            })
            .collect();
    }

    // table[t][a]: cheapest hour t under joint storage action a.
    let mut table: Vec<Vec<Option<(f64, HourDispatch)>>> = Vec::with_capacity(hours);
    for t in 0..hours {
        let w = &scenario.weather[t];
        let options = devices
            .iter()
            .filter(|d| !d.spec.is_storage())
            .map(|d| {
                Ok(device_levels(d, w, level_grid, &pr)?
                    .into_iter()
                    .map(|l| l.op)
                    .collect())
            })
            .collect::<Result<Vec<Vec<OperatingPoint>>>>()?;
        let mut row = Vec::with_capacity(joint.len());
        for a in &joint {
            let sops: Vec<(usize, OperatingPoint)> = stores
                .iter()
                .zip(a)
                .map(|((k, l), &s)| (*k, l.op(s, 0.0)))
                .collect();
            row.push(best_hour(&devices, &sops, scenario, problem, t, &options)?);
        }
        table.push(row);
    }

    // Every action sequence, checked against the lattice bounds.
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut seq = vec![0usize; hours];
    'outer: loop {
        let mut k = vec![0i64; stores.len()];
        let mut cost = 0.0;
        let mut ok = true;
        for (t, &ai) in seq.iter().enumerate() {
            match &table[t][ai] {
                Some((c, _)) => cost += c,
                None => {
                    ok = false;
                    break;
                }
            }
            for (s, (_, l)) in stores.iter().enumerate() {
                k[s] += joint[ai][s];
                if k[s] < l.kmin || k[s] > l.kmax {
                    ok = false;
                }
            }
        }
        if ok
            && stores
                .iter()
                .zip(&k)
                .all(|((_, l), &ks)| !l.cyclic || ks == 0)
            && best.as_ref().is_none_or(|b| cost < b.0)
        {
            best = Some((cost, seq.clone()));
        }
        let mut t = 0;
        loop {
            if t == hours {
                break 'outer;
            }
            seq[t] += 1;
            if seq[t] < joint.len() {
                break;
            }
            seq[t] = 0;
            t += 1;
        }
    }
    let Some((cost, seq)) = best else {
        return Ok(None);
    };

    let mut soc: Vec<f64> = stores.iter().map(|(_, l)| l.soc0).collect();
    let mut out = Dispatch {
        scenario: scenario.id.clone(),
        hours: Vec::with_capacity(hours),
    };
    for (t, &ai) in seq.iter().enumerate() {
        let (_, h) = table[t][ai].as_ref().expect("sequence uses feasible hours");
        let mut h = h.clone();
        for (s, (k, l)) in stores.iter().enumerate() {
            let op = l.op(joint[ai][s], soc[s]);
            soc[s] = op.soc;
            h.devices[*k].op = op;
        }
        out.hours.push(h);
    }
    Ok(Some((cost, out)))
}

/// Global optimum of the grid-restricted problem by exhaustive enumeration
/// of installation subsets, sizings, operating levels and storage steps.
pub fn brute_force_oracle(problem: &Problem, grid: GridSpec) -> Result<Solution> {
    brute_force_oracle_with(problem, grid, &OracleLimits::default())
}

pub fn brute_force_oracle_with(
    problem: &Problem,
    grid: GridSpec,
    limits: &OracleLimits,
) -> Result<Solution> {
    problem.validate()?;
    limits.check(problem, &grid)?;
    let specs: Vec<&EquipmentSpec> = problem.catalog.iter().collect();
    let n = specs.len();
    let mut best: Option<(f64, Design, Vec<Dispatch>)> = None;
    let mut log = Vec::new();
    let mut subsets = 0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize > problem.economics.max_installed {
            continue;
        }
        subsets += 1;
        let members: Vec<&EquipmentSpec> = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| specs[i])
            .collect();
        let mut subset_best: Option<f64> = None;
        for design in sizings(&problem.catalog, &members, grid.sizing_points)? {
            let mut dispatches = Vec::new();
            for s in &problem.scenarios {
                match best_dispatch(&design, s, problem, &grid)? {
                    Some((_, d)) => dispatches.push(d),
                    None => break,
                }
            }
            if dispatches.len() != problem.scenarios.len() {
                continue;
            }
            let report = total_annualized_cost(
                &design,
                &dispatches,
                &problem.scenarios,
                &problem.catalog,
                &problem.economics,
            )?;
            let tac = report.tac;
            if subset_best.is_none_or(|b| tac < b) {
                subset_best = Some(tac);
            }
            if best.as_ref().is_none_or(|b| tac < b.0) {
                best = Some((tac, design, dispatches));
            }
        }
        log.push(IterationRecord {
            iteration: subsets,
            subset: members.iter().map(|s| s.id.clone()).collect(),
            lower_bound: None,
            tac: subset_best,
            incumbent: best.as_ref().map(|b| b.0),
        });
    }
    let (_, design, dispatches) = best.ok_or(Error::Infeasible)?;
    let report = total_annualized_cost(
        &design,
        &dispatches,
        &problem.scenarios,
        &problem.catalog,
        &problem.economics,
    )?;
    Ok(Solution {
        design,
        dispatches,
        report,
        status: Status::Optimal,
        outer_iterations: subsets,
        log,
    })
}
