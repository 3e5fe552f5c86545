//! Discrete operating options of one device in one hour and their
//! separable hourly cost.

use std::f64::consts::PI;

use crate::catalog::{ChpPhysics, Physics};
use crate::devices::{chp_cost_unchecked, chp_feasible, cvt_cost, OperatingPoint};
use crate::environment::WeatherHour;
use crate::error::Result;
use crate::model::{Economics, InstalledDevice};
use crate::resource::ResourceFlows;
use crate::scenarios::{Policy, Scenario, CO2_CAP_RATE};

use super::grid_values;

const CHP_TOL: f64 = 1e-9;

/// An operating point with its net contributions to the hourly balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Level {
    pub op: OperatingPoint,
    /// $ for this hour, including CO₂ charges and credits and SNG sales.
    pub cost: f64,
    pub elec: f64,
    pub heat: f64,
    pub sng: f64,
    /// Net CO₂ emitted.
    pub co2: f64,
}

/// Hourly prices seen by the dispatch.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Prices {
    pub co2: f64,
    pub sng: f64,
    pub trading: bool,
    pub coal: f64,
    pub biomass: f64,
}

impl Prices {
    pub fn new(s: &Scenario, econ: &Economics) -> Self {
        Prices {
            co2: s.co2_price,
            sng: s.sng_price,
            trading: s.policy == Policy::CapAndTrade,
            coal: econ.coal_price,
            biomass: econ.biomass_price,
        }
    }
}

/// Cost of one device for one hour; summed over devices this equals the
/// scenario's second-stage cost per day.
pub(crate) fn hourly_cost(
    dev: &InstalledDevice<'_>,
    op: &OperatingPoint,
    f: &ResourceFlows,
    pr: &Prices,
) -> f64 {
    let mut c = 0.0;
    match &dev.spec.physics {
        Physics::Chp(p) if op.on => c += chp_cost_unchecked(op.power, op.heat, p),
        Physics::Conventional(p) if op.on => c += cvt_cost(op.power, p),
        Physics::P2g(p) => c += p.cc * f.con.co2,
        _ => {}
    }
    c += (f.con.coal - f.gen.coal) * pr.coal + (f.con.biomass - f.gen.biomass) * pr.biomass;
    c += pr.co2 * (f.gen.co2 - f.con.co2);
    if pr.trading && dev.kind().counts_toward_cap() {
        c -= pr.co2 * CO2_CAP_RATE * op.power;
    }
    if dev.spec.p2g().is_some() {
        c -= pr.sng * f.gen.sng;
    }
    c
}

pub(crate) fn level_of(dev: &InstalledDevice<'_>, op: OperatingPoint, pr: &Prices) -> Level {
    let f = dev.flows(&op);
    Level {
        cost: hourly_cost(dev, &op, &f, pr),
        elec: f.gen.electricity - f.con.electricity,
        heat: f.gen.heat - f.con.heat,
        sng: f.gen.sng - f.con.sng,
        co2: f.gen.co2 - f.con.co2,
        op,
    }
}

/// Heat interval of the polygon at electric output `p`.
pub(crate) fn chp_heat_slice(chp: &ChpPhysics, p: f64) -> Option<(f64, f64)> {
    let c = chp.corners();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..4 {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        let (pmin, pmax) = (a[0].min(b[0]), a[0].max(b[0]));
        if p < pmin || p > pmax {
            continue;
        }
        if a[0] == b[0] {
            lo = lo.min(a[1].min(b[1]));
            hi = hi.max(a[1].max(b[1]));
        } else {
            let h = a[1] + (p - a[0]) * (b[1] - a[1]) / (b[0] - a[0]);
            lo = lo.min(h);
            hi = hi.max(h);
        }
    }
    (lo <= hi).then(|| (lo.max(0.0), hi.max(0.0)))
}

/// Valve-point minima `p_min + kπ/e` inside `[lo, hi]`.
pub(crate) fn valve_points(dev: &InstalledDevice<'_>, lo: f64, hi: f64) -> Vec<f64> {
    let Physics::Conventional(c) = &dev.spec.physics else {
        return Vec::new();
    };
    if c.d == 0.0 || c.e <= 0.0 {
        return Vec::new();
    }
    let period = PI / c.e;
    let k0 = ((lo - c.p_min) / period).ceil() as i64;
    let k1 = ((hi - c.p_min) / period).floor() as i64;
    (k0..=k1)
        .map(|k| c.p_min + k as f64 * period)
        .filter(|p| *p >= lo && *p <= hi)
        .collect()
}

/// Settings shared by all level tables of one dispatch.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelGrid {
    pub points: usize,
    /// Add valve-point minima of coal units.
    pub valve_points: bool,
}

/// All discrete options of a non-storage device for one hour, off first.
pub(crate) fn device_levels(
    dev: &InstalledDevice<'_>,
    weather: &WeatherHour,
    grid: LevelGrid,
    pr: &Prices,
) -> Result<Vec<Level>> {
    let n = grid.points;
    let mut ops: Vec<OperatingPoint> = vec![OperatingPoint::default()];
    match &dev.spec.physics {
        Physics::Wind(_) | Physics::Solar(_) => {
            let avail = dev.availability(weather)?.unwrap_or(0.0);
            if avail > 0.0 {
                for p in grid_values(0.0, avail, n).into_iter().skip(1) {
                    ops.push(OperatingPoint {
                        power: p,
                        on: true,
                        ..Default::default()
                    });
                }
            }
        }
        Physics::Chp(_) => {
            let chp = dev.chp().expect("CHP device carries its polygon");
            let (plo, phi) = chp.power_range();
            if phi > 0.0 {
                for p in grid_values(plo, phi, n) {
                    let Some((hlo, hhi)) = chp_heat_slice(chp, p) else {
                        continue;
                    };
                    for h in grid_values(hlo, hhi, n) {
                        if chp_feasible(p, h, chp, CHP_TOL) {
                            ops.push(OperatingPoint {
                                power: p,
                                heat: h,
                                on: true,
                                ..Default::default()
                            });
                        }
                    }
                }
            }
        }
        Physics::Conventional(_) | Physics::Linear(_) => {
            let (lo, hi) = dev.committed_range();
            if hi > 0.0 {
                let mut ps = grid_values(lo, hi, n);
                if grid.valve_points {
                    ps.extend(valve_points(dev, lo, hi));
                    ps.sort_by(f64::total_cmp);
                    ps.dedup();
                }
                for p in ps {
                    ops.push(OperatingPoint {
                        power: p,
                        on: true,
                        ..Default::default()
                    });
                }
            }
        }
        Physics::HeatPump(_) => {
            let hi = dev.spec.max_load * dev.rp;
            if hi > 0.0 {
                for h in grid_values(0.0, hi, n).into_iter().skip(1) {
                    ops.push(OperatingPoint {
                        heat: h,
                        on: true,
                        ..Default::default()
                    });
                }
            }
        }
        Physics::P2g(p) => {
            for xi in grid_values(0.0, dev.xi_max(), n) {
                ops.push(OperatingPoint {
                    power: p.soec_rated_power,
                    xi,
                    on: true,
                    ..Default::default()
                });
            }
        }
        Physics::Storage(_) => {}
    }
    Ok(ops.into_iter().map(|op| level_of(dev, op, pr)).collect())
}

/// Charge and discharge lattice of a storage unit: SOC moves in steps of
/// `delta` from its initial value and each hour changes by at most
/// `steps` steps either way.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StorageLattice {
    pub delta: f64,
    pub soc0: f64,
    pub kmin: i64,
    pub kmax: i64,
    /// Allowed step changes per hour, ascending.
    pub actions: Vec<i64>,
    /// SOC must return to `soc0` at the end of the day.
    pub cyclic: bool,
}

impl StorageLattice {
    pub fn new(dev: &InstalledDevice<'_>, points: usize) -> Option<Self> {
        let st = dev.spec.storage()?;
        let soc0 = st.soc_init_fraction * dev.cap;
        let steps = points.max(2) as i64 - 1;
        let delta = st.q_max * dev.rp / steps as f64;
        if !(delta > 0.0) {
            return Some(StorageLattice {
                delta: 0.0,
                soc0,
                kmin: 0,
                kmax: 0,
                actions: vec![0],
                cyclic: st.cyclic,
            });
        }
        let kmin = ((st.soc_lo * dev.cap - soc0) / delta - 1e-9).ceil() as i64;
        let kmax = ((st.soc_hi * dev.cap - soc0) / delta + 1e-9).floor() as i64;
        let floor = st.q_min * dev.rp;
        let actions = (-steps..=steps)
            .filter(|&a| a == 0 || a.unsigned_abs() as f64 * delta >= floor - 1e-9)
            .collect();
        Some(StorageLattice {
            delta,
            soc0,
            kmin: kmin.min(0),
            kmax: kmax.max(0),
            actions,
            cyclic: st.cyclic,
        })
    }

    /// Operating point for a step change `a`, starting from `soc_prev`.
    pub fn op(&self, a: i64, soc_prev: f64) -> OperatingPoint {
        let amount = a.unsigned_abs() as f64 * self.delta;
        let (charge, discharge) = if a > 0 { (amount, 0.0) } else { (0.0, amount) };
        OperatingPoint {
            charge,
            discharge,
            soc: soc_prev + charge - discharge,
            ..Default::default()
        }
    }

    /// Net electricity drawn by step `a`.
    pub fn net_charge(&self, a: i64) -> f64 {
        a as f64 * self.delta
    }
}
