//! Recourse problem of one scenario for a fixed design.
//!
//! Each hour is solved by branch and bound over the level tables for every
//! storage step, then a dynamic program over the SOC lattice stitches the
//! hours together. Outside grid mode a coordinate sweep refines the chosen
//! levels over the continuous operating ranges.

use crate::catalog::{Catalog, Physics};
use crate::devices::OperatingPoint;
use crate::error::{Error, Result};
use crate::model::{
    assemble_hour, installed_devices, Design, DeviceHour, Dispatch, Economics, InstalledDevice,
};
use crate::resource::Resource;
use crate::scenarios::{DemandProfile, Scenario};

use super::hourly::{HourTable, Req, BALANCE_TOL};
use super::levels::{device_levels, level_of, Level, LevelGrid, Prices, StorageLattice};
use super::SolverOptions;

/// Cost and generator operating points of one hour under one storage
/// action, `None` when that action leaves the hour uncovered.
type HourBest = Option<(f64, Vec<OperatingPoint>)>;

const ROWS: [Resource; 4] = [
    Resource::Electricity,
    Resource::Heat,
    Resource::Sng,
    Resource::Co2,
];

/// Dispatch settings derived from the options.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DispatchSettings {
    pub grid: LevelGrid,
    pub storage_points: usize,
    pub refine_sweeps: usize,
    pub node_budget: usize,
    pub tol: f64,
}

impl DispatchSettings {
    pub fn from_options(o: &SolverOptions) -> Self {
        match o.grid {
            Some(g) => DispatchSettings {
                grid: LevelGrid {
                    points: g.power_points,
                    valve_points: false,
                },
                storage_points: g.power_points,
                refine_sweeps: 0,
                node_budget: o.node_budget,
                tol: o.feasibility_tol,
            },
            None => DispatchSettings {
                grid: LevelGrid {
                    points: o.dispatch_levels,
                    valve_points: true,
                },
                storage_points: o.storage_levels,
                refine_sweeps: o.dispatch_max_iters,
                node_budget: o.node_budget,
                tol: o.feasibility_tol,
            },
        }
    }

    fn fine(&self) -> LevelGrid {
        LevelGrid {
            points: 4 * (self.grid.points - 1) + 1,
            valve_points: true,
        }
    }
}

/// Cost-minimal dispatch of one scenario for a fixed design.
pub fn solve_dispatch(
    design: &Design,
    scenario: &Scenario,
    demand: &DemandProfile,
    catalog: &Catalog,
    econ: &Economics,
    options: &SolverOptions,
) -> Result<Dispatch> {
    options.validate()?;
    let devices = installed_devices(design, catalog)?;
    dispatch_scenario(
        &devices,
        scenario,
        demand,
        econ,
        &DispatchSettings::from_options(options),
    )
    .map(|(d, _)| d)
}

/// Dispatch plus whether every hourly subproblem was solved exactly.
pub(crate) fn dispatch_scenario(
    devices: &[InstalledDevice<'_>],
    scenario: &Scenario,
    demand: &DemandProfile,
    econ: &Economics,
    set: &DispatchSettings,
) -> Result<(Dispatch, bool)> {
    let hours = scenario.hours().min(demand.hours());
    let pr = Prices::new(scenario, econ);
    let gens: Vec<usize> = (0..devices.len())
        .filter(|&k| !devices[k].spec.is_storage())
        .collect();
    let stores: Vec<(usize, StorageLattice)> = (0..devices.len())
        .filter_map(|k| StorageLattice::new(&devices[k], set.storage_points).map(|l| (k, l)))
        .collect();
    let joint = joint_actions(&stores);

    // best[t][a]: cheapest operating points of the generating devices in
    // hour t under joint storage action a.
    let mut best: Vec<Vec<HourBest>> = Vec::with_capacity(hours);
    let mut exact = true;
    let mut idle_gaps: Vec<Option<(usize, f64)>> = Vec::with_capacity(hours);
    for t in 0..hours {
        let w = &scenario.weather[t];
        let tables = gens
            .iter()
            .map(|&k| device_levels(&devices[k], w, set.grid, &pr))
            .collect::<Result<Vec<_>>>()?;
        let table = HourTable::new(tables.clone());
        let fine = if set.refine_sweeps > 0 {
            Some(
                gens.iter()
                    .map(|&k| device_levels(&devices[k], w, set.fine(), &pr))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let d = demand.at(t);
        let base: Req = [d.electricity, d.heat, d.sng, 0.0];
        let mut row = Vec::with_capacity(joint.len());
        let mut warm: Option<Vec<usize>> = None;
        let mut first_gap: Option<(usize, f64)> = None;
        let mut idle_gap: Option<(usize, f64)> = None;
        for a in &joint {
            let mut req = base;
            req[0] += stores
                .iter()
                .zip(a)
                .map(|((_, l), &s)| l.net_charge(s))
                .sum::<f64>();
            match table.solve(&req, warm.as_deref(), set.node_budget) {
                Some(choice) => {
                    exact &= choice.exact;
                    let mut picked: Vec<Level> = choice
                        .pick
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| tables[i][p])
                        .collect();
                    if let Some(fine) = &fine {
                        refine(
                            &gens,
                            devices,
                            &pr,
                            fine,
                            &req,
                            &mut picked,
                            set.refine_sweeps,
                        );
                    }
                    let cost = picked.iter().map(|l| l.cost).sum();
                    warm = Some(choice.pick);
                    row.push(Some((cost, picked.iter().map(|l| l.op).collect())));
                }
                None => {
                    let gap = table.shortfall(&req).unwrap_or((0, 0.0));
                    if first_gap.is_none() {
                        first_gap = Some(gap);
                    }
                    if a.iter().all(|&x| x == 0) {
                        idle_gap = Some(gap);
                    }
                    row.push(None);
                }
            }
        }
        if row.iter().all(Option::is_none) {
            let (r, gap) = first_gap.unwrap_or((0, 0.0));
            return Err(Error::InfeasibleDispatch {
                scenario: scenario.id.clone(),
                hour: t,
                resource: ROWS[r],
                shortfall: gap,
            });
        }
        best.push(row);
        idle_gaps.push(idle_gap);
    }

    // Idling storage is always on the lattice, so a missing path means some
    // hour needs more than the storage can shift into it.
    let path = storage_path(&stores, &joint, &best).ok_or_else(|| {
        let (hour, (r, gap)) = idle_gaps
            .iter()
            .enumerate()
            .find_map(|(t, g)| g.map(|g| (t, g)))
            .unwrap_or((0, (0, 0.0)));
        Error::InfeasibleDispatch {
            scenario: scenario.id.clone(),
            hour,
            resource: ROWS[r],
            shortfall: gap,
        }
    })?;

    let mut soc: Vec<f64> = stores.iter().map(|(_, l)| l.soc0).collect();
    let mut out = Dispatch {
        scenario: scenario.id.clone(),
        hours: Vec::with_capacity(hours),
    };
    for (t, &ai) in path.iter().enumerate() {
        let (_, ops) = best[t][ai].as_ref().expect("path uses feasible actions");
        let mut dev_ops = vec![OperatingPoint::default(); devices.len()];
        for (g, &k) in gens.iter().enumerate() {
            dev_ops[k] = ops[g];
        }
        for (s, (k, lat)) in stores.iter().enumerate() {
            let op = lat.op(joint[ai][s], soc[s]);
            soc[s] = op.soc;
            dev_ops[*k] = op;
        }
        let hour_devices = devices
            .iter()
            .zip(dev_ops)
            .map(|(dev, op)| DeviceHour {
                id: dev.id().to_string(),
                flows: dev.flows(&op),
                op,
            })
            .collect();
        let h = assemble_hour(hour_devices, &demand.at(t), set.tol).map_err(|s| {
            Error::InfeasibleDispatch {
                scenario: scenario.id.clone(),
                hour: t,
                resource: s.resource,
                shortfall: s.amount,
            }
        })?;
        out.hours.push(h);
    }
    Ok((out, exact))
}

/// Cartesian product of the storage step sets, first storage slowest.
pub(crate) fn joint_actions(stores: &[(usize, StorageLattice)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for (_, l) in stores {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                l.actions.iter().map(move |&a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

/// Cheapest sequence of joint actions keeping every SOC on its lattice and,
/// for cyclic units, back at the start after the last hour.
fn storage_path(
    stores: &[(usize, StorageLattice)],
    joint: &[Vec<i64>],
    best: &[Vec<HourBest>],
) -> Option<Vec<usize>> {
    let hours = best.len();
    let dims: Vec<usize> = stores
        .iter()
        .map(|(_, l)| (l.kmax - l.kmin + 1) as usize)
        .collect();
    let states: usize = dims.iter().product();
    let encode = |ks: &[i64]| -> Option<usize> {
        let mut idx = 0;
        for (s, (_, l)) in stores.iter().enumerate() {
            if ks[s] < l.kmin || ks[s] > l.kmax {
                return None;
            }
            idx = idx * dims[s] + (ks[s] - l.kmin) as usize;
        }
        Some(idx)
    };
    let decode = |mut idx: usize| -> Vec<i64> {
        let mut ks = vec![0; stores.len()];
        for s in (0..stores.len()).rev() {
            ks[s] = (idx % dims[s]) as i64 + stores[s].1.kmin;
            idx /= dims[s];
        }
        ks
    };
    let zero = encode(&vec![0; stores.len()]).expect("initial SOC lies on the lattice");

    // value[t][state]: cheapest cost of hours t.. from `state`.
    let mut value = vec![vec![f64::INFINITY; states]; hours + 1];
    for (st, v) in value[hours].iter_mut().enumerate() {
        let ks = decode(st);
        let terminal_ok = stores
            .iter()
            .zip(&ks)
            .all(|((_, l), &k)| !l.cyclic || k == 0);
        if terminal_ok {
            *v = 0.0;
        }
    }
    let mut choice = vec![vec![usize::MAX; states]; hours];
    for t in (0..hours).rev() {
        for st in 0..states {
            let ks = decode(st);
            let mut bv = f64::INFINITY;
            let mut bc = usize::MAX;
            for (ai, a) in joint.iter().enumerate() {
                let Some((c, _)) = &best[t][ai] else { continue };
                let next: Vec<i64> = ks.iter().zip(a).map(|(k, d)| k + d).collect();
                let Some(ns) = encode(&next) else { continue };
                let v = c + value[t + 1][ns];
                if v < bv {
                    bv = v;
                    bc = ai;
                }
            }
            value[t][st] = bv;
            choice[t][st] = bc;
        }
    }
    if !value[0][zero].is_finite() {
        return None;
    }
    let mut path = Vec::with_capacity(hours);
    let mut st = zero;
    for ch in &choice {
        let ai = ch[st];
        path.push(ai);
        let ks = decode(st);
        let next: Vec<i64> = ks.iter().zip(&joint[ai]).map(|(k, d)| k + d).collect();
        st = encode(&next).expect("choice stays on the lattice");
    }
    Some(path)
}

fn violation(sums: &[f64; 4], req: &Req) -> f64 {
    (0..4).map(|r| req[r] - sums[r]).fold(0.0, f64::max)
}

fn add(sums: &mut [f64; 4], l: &Level, sign: f64) {
    sums[0] += sign * l.elec;
    sums[1] += sign * l.heat;
    sums[2] += sign * l.sng;
    sums[3] += sign * l.co2;
}

/// Scalar handle on a device's operating range for the line search; CHP
/// units and storage are left to the sampled table.
fn param(dev: &InstalledDevice<'_>, op: &OperatingPoint) -> Option<f64> {
    if !op.on {
        return None;
    }
    match &dev.spec.physics {
        Physics::Wind(_) | Physics::Solar(_) | Physics::Conventional(_) | Physics::Linear(_) => {
            Some(op.power)
        }
        Physics::HeatPump(_) => Some(op.heat),
        Physics::P2g(_) => Some(op.xi),
        _ => None,
    }
}

fn with_param(dev: &InstalledDevice<'_>, template: &OperatingPoint, x: f64) -> OperatingPoint {
    let mut op = *template;
    match &dev.spec.physics {
        Physics::HeatPump(_) => op.heat = x,
        Physics::P2g(_) => op.xi = x,
        _ => op.power = x,
    }
    op
}

/// Coordinate sweeps: each device in turn moves to the cheapest sampled
/// level that keeps the hour covered, then a golden-section search between
/// the neighbouring samples polishes the move.
fn refine(
    gens: &[usize],
    devices: &[InstalledDevice<'_>],
    pr: &Prices,
    fine: &[Vec<Level>],
    req: &Req,
    picked: &mut [Level],
    sweeps: usize,
) {
    let mut sums = [0.0; 4];
    for l in picked.iter() {
        add(&mut sums, l, 1.0);
    }
    for _ in 0..sweeps {
        let before: f64 = picked.iter().map(|l| l.cost).sum();
        for (g, &k) in gens.iter().enumerate() {
            let dev = &devices[k];
            let mut rest = sums;
            add(&mut rest, &picked[g], -1.0);
            let covers = |l: &Level| {
                let mut s = rest;
                add(&mut s, l, 1.0);
                violation(&s, req) <= BALANCE_TOL
            };
            let mut cur = picked[g];
            for l in &fine[g] {
                if l.cost < cur.cost - 1e-12 && covers(l) {
                    cur = *l;
                }
            }
            // Line search between the neighbours of the chosen sample.
            if let Some(x0) = param(dev, &cur.op) {
                let mut xs: Vec<f64> = fine[g].iter().filter_map(|l| param(dev, &l.op)).collect();
                xs.sort_by(f64::total_cmp);
                xs.dedup();
                let pos = xs
                    .iter()
                    .position(|&x| x >= x0)
                    .unwrap_or(xs.len().saturating_sub(1));
                let lo = xs[pos.saturating_sub(1)].min(x0);
                let hi = xs[(pos + 1).min(xs.len() - 1)].max(x0);
                let template = cur.op;
                let eval = |x: f64| {
                    let l = level_of(dev, with_param(dev, &template, x), pr);
                    let mut s = rest;
                    add(&mut s, &l, 1.0);
                    (l, l.cost + 1e9 * violation(&s, req).max(0.0))
                };
                let (a, b) = golden(lo, hi, |x| eval(x).1);
                let x = 0.5 * (a + b);
                let (l, _) = eval(x);
                if l.cost < cur.cost - 1e-12 && covers(&l) {
                    cur = l;
                }
            }
            picked[g] = cur;
            sums = rest;
            add(&mut sums, &cur, 1.0);
        }
        let after: f64 = picked.iter().map(|l| l.cost).sum();
        if after >= before - 1e-9 * before.abs().max(1.0) {
            break;
        }
    }
}

fn golden(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_895;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if b - a <= 1e-9 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d);
        }
    }
    (a, b)
}
