//! Per-device lower bounds on the annualised cost and capacity screening
//! of installation subsets.

use serde::{Deserialize, Serialize};

use crate::catalog::{EquipmentSpec, Physics};
use crate::devices::OperatingPoint;
use crate::error::Result;
use crate::model::{Design, Economics, InstalledDevice};
use crate::scenarios::{DemandProfile, Scenario, CO2_CAP_RATE};

use super::levels::{level_of, Prices};

/// Lower bound on what one device adds to the total annualised cost of
/// any design containing it. The bound is additive over devices because
/// every cost term is attributed to exactly one device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceBound {
    /// Annualised capital plus maintenance at the smallest sizing, $/yr.
    pub first_stage: f64,
    /// Expected operating cost net of credits and sales, $/yr.
    pub second_stage: f64,
}

impl DeviceBound {
    pub fn total(&self) -> f64 {
        self.first_stage + self.second_stage
    }
}

/// Minimum of `a·x² + b·x` over `[0, hi]`.
fn quad_min(a: f64, b: f64, hi: f64) -> f64 {
    let f = |x: f64| a * x * x + b * x;
    let mut m = f(0.0).min(f(hi));
    if a > 0.0 {
        let x = -b / (2.0 * a);
        if x > 0.0 && x < hi {
            m = m.min(f(x));
        }
    }
    m
}

/// Smallest hourly cost the device can reach at any sizing and operating
/// point under the given prices. Off is always available, so the floor is
/// never positive.
fn hourly_floor(spec: &EquipmentSpec, full: &InstalledDevice<'_>, pr: &Prices) -> f64 {
    let credit = if pr.trading && spec.kind.counts_toward_cap() {
        CO2_CAP_RATE * pr.co2
    } else {
        0.0
    };
    let ef = spec.emission_factor();
    let on = match &spec.physics {
        Physics::Wind(_) | Physics::Solar(_) => (pr.co2 * ef - credit) * spec.rp_max,
        Physics::Linear(l) => {
            let fuel = match l.fuel {
                crate::catalog::Fuel::Coal => pr.coal,
                crate::catalog::Fuel::Biomass => pr.biomass,
            };
            let coef = fuel * l.fuel_per_mwh + pr.co2 * ef - credit;
            (coef * spec.max_load * spec.rp_max).min(0.0)
        }
        Physics::Conventional(c) => {
            // The valve ripple is non-negative and the emission floor can
            // only raise the charge, so both are dropped.
            let a = c.c + pr.co2 * c.ef * c.h_co2;
            let b = c.b + pr.co2 * c.ef * c.g_co2 - credit;
            let k = c.a + pr.co2 * c.ef * c.f_co2;
            k + quad_min(a, b, spec.max_load * spec.rp_max)
        }
        Physics::Chp(c) => {
            let chp = full.chp().unwrap_or(c);
            let (_, pmax) = chp.power_range();
            let (_, hmax) = chp.heat_range();
            let cross = if c.zz < 0.0 { c.zz * pmax * hmax } else { 0.0 };
            c.kk + quad_min(c.ii, c.ll + pr.co2 * ef - credit, pmax)
                + quad_min(c.yy, c.jj, hmax)
                + cross
        }
        Physics::P2g(p) => {
            let at = |xi: f64| {
                let op = OperatingPoint {
                    power: p.soec_rated_power,
                    xi,
                    on: true,
                    ..Default::default()
                };
                level_of(full, op, pr).cost
            };
            at(0.0).min(at(full.xi_max()))
        }
        Physics::Storage(_) | Physics::HeatPump(_) => 0.0,
    };
    on.min(0.0)
}

/// Bound for one catalog entry over a scenario set and horizon.
pub fn device_lower_bound(
    spec: &EquipmentSpec,
    scenarios: &[Scenario],
    hours: usize,
    econ: &Economics,
) -> Result<DeviceBound> {
    let crf = econ.crf()?;
    let mut capital = spec.psi0 * 1e6 * spec.rp_min + spec.gamma0;
    let mut maintenance = spec.psik * spec.rp_min + spec.gammak;
    if spec.is_storage() {
        capital += spec.omega0 * spec.cap_min;
        maintenance += spec.omegak * spec.cap_min;
    }
    let mut design = Design::default();
    design.install(spec, spec.rp_max)?;
    let full = InstalledDevice::new(spec, &design)?;
    let second: f64 = scenarios
        .iter()
        .map(|s| s.probability * hourly_floor(spec, &full, &Prices::new(s, econ)))
        .sum::<f64>()
        * hours as f64
        * econ.days_per_year;
    Ok(DeviceBound {
        first_stage: crf * capital + maintenance,
        second_stage: second,
    })
}

/// Largest hourly contributions of a device at its largest sizing, used to
/// discard subsets that cannot cover demand.
#[derive(Debug, Clone)]
pub(crate) struct Capacity {
    /// Electricity per scenario and hour.
    pub elec: Vec<Vec<f64>>,
    pub heat: f64,
    pub sng: f64,
    /// Fixed electricity draw of a unit that must run to deliver SNG.
    pub sng_draw: f64,
}

pub(crate) fn capacity(
    spec: &EquipmentSpec,
    scenarios: &[Scenario],
    hours: usize,
) -> Result<Capacity> {
    let mut design = Design::default();
    design.install(spec, spec.rp_max)?;
    if spec.is_storage() {
        design.set_storage_cap(&spec.id, spec.cap_max);
    }
    let full = InstalledDevice::new(spec, &design)?;
    let mut elec = vec![vec![0.0; hours]; scenarios.len()];
    let (mut heat, mut sng, mut sng_draw) = (0.0, 0.0, 0.0);
    let solar = spec.solar().is_some();
    let constant = match &spec.physics {
        Physics::Wind(_) => None,
        // Tilt changes the output, so the rating is the ceiling of any lit hour.
        Physics::Solar(_) => Some(spec.rp_max),
        Physics::Linear(_) | Physics::Conventional(_) => Some(spec.max_load * spec.rp_max),
        Physics::Chp(_) => {
            let chp = full.chp().expect("CHP device carries its polygon");
            heat = chp.heat_range().1;
            Some(chp.power_range().1)
        }
        Physics::Storage(st) => Some(st.q_max * spec.rp_max),
        Physics::HeatPump(_) => {
            heat = spec.max_load * spec.rp_max;
            Some(0.0)
        }
        Physics::P2g(p) => {
            let f = full.flows(&OperatingPoint {
                power: p.soec_rated_power,
                xi: full.xi_max(),
                on: true,
                ..Default::default()
            });
            sng = f.gen.sng;
            sng_draw = f.con.electricity;
            Some(0.0)
        }
    };
    for (w, s) in scenarios.iter().enumerate() {
        for (t, e) in elec[w].iter_mut().enumerate().take(hours) {
            let wh = &s.weather[t];
            *e = match constant {
                Some(_) if solar && wh.g_horizontal <= 0.0 => 0.0,
                Some(v) => v,
                None => full.availability(wh)?.unwrap_or(0.0),
            };
        }
    }
    Ok(Capacity {
        elec,
        heat,
        sng,
        sng_draw,
    })
}

/// Necessary condition for a subset to have a feasible dispatch.
pub(crate) fn may_cover(
    members: &[&Capacity],
    scenarios: &[Scenario],
    demand: &DemandProfile,
    hours: usize,
) -> bool {
    let heat: f64 = members.iter().map(|c| c.heat).sum();
    let sng: f64 = members.iter().map(|c| c.sng).sum();
    let draw = members
        .iter()
        .filter(|c| c.sng > 0.0)
        .map(|c| c.sng_draw)
        .fold(f64::INFINITY, f64::min);
    for t in 0..hours {
        let d = demand.at(t);
        if heat < d.heat - 1e-9 || sng < d.sng - 1e-9 {
            return false;
        }
        let need = d.electricity
            + if d.sng > 0.0 && draw.is_finite() {
                draw
            } else {
                0.0
            };
        for w in 0..scenarios.len() {
            let e: f64 = members.iter().map(|c| c.elec[w][t]).sum();
            if e < need - 1e-9 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::default_catalog;
    use crate::scenarios::default_scenarios;

    #[test]
    fn bounds_are_finite_with_nonpositive_operation() {
        let cat = default_catalog();
        let sc = default_scenarios();
        for s in cat.iter() {
            let b = device_lower_bound(s, &sc, 24, &Economics::default()).unwrap();
            assert!(b.first_stage >= 0.0, "{}", s.id);
            assert!(
                b.second_stage <= 0.0 && b.second_stage.is_finite(),
                "{}",
                s.id
            );
        }
    }

    #[test]
    fn quadratic_minimum() {
        assert_eq!(quad_min(1.0, -4.0, 10.0), -4.0);
        assert_eq!(quad_min(1.0, 4.0, 10.0), 0.0);
        assert_eq!(quad_min(-1.0, 0.0, 3.0), -9.0);
    }
}
