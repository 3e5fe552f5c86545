use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, Physics};
use crate::devices::{chp_edge_residuals, OperatingPoint, M_CH4};
use crate::model::{installed_devices, Design, Dispatch, Economics, InstalledDevice};
use crate::resource::{Resource, ResourceFlows};
use crate::scenarios::{DemandProfile, Scenario};

/// Relative accuracy required between a wind farm's rating and its rotor.
const ROTOR_REL_TOL: f64 = 1e-6;

/// One violated constraint. Each check flags `residual > tol`, so raising
/// the tolerance can only remove violations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub equipment: Option<String>,
    pub scenario: Option<String>,
    pub hour: Option<usize>,
    pub resource: Option<Resource>,
    pub residual: f64,
}

struct Sink<'a> {
    tol: f64,
    scenario: Option<&'a str>,
    out: Vec<Violation>,
}

impl Sink<'_> {
    fn flag(
        &mut self,
        constraint: &str,
        equipment: Option<&str>,
        hour: Option<usize>,
        resource: Option<Resource>,
        residual: f64,
    ) {
        if residual > self.tol || residual.is_nan() {
            self.out.push(Violation {
                constraint: constraint.to_string(),
                equipment: equipment.map(str::to_string),
                scenario: self.scenario.map(str::to_string),
                hour,
                resource,
                residual,
            });
        }
    }
}

/// First-stage constraints: rating and capacity bounds, install limit,
/// rotor consistency and tilt range.
pub fn check_design(
    design: &Design,
    catalog: &Catalog,
    econ: &Economics,
    tol: f64,
) -> Vec<Violation> {
    let mut sink = Sink {
        tol,
        scenario: None,
        out: Vec::new(),
    };
    design_checks(design, catalog, econ, &mut sink);
    sink.out
}

fn design_checks(design: &Design, catalog: &Catalog, econ: &Economics, sink: &mut Sink<'_>) {
    let unknown = design
        .install
        .keys()
        .chain(design.rated_power.keys())
        .chain(design.storage_cap.keys())
        .filter(|id| catalog.get(id).is_none());
    for id in unknown {
        sink.flag("unknown_equipment", Some(id), None, None, f64::INFINITY);
    }
    for s in catalog.iter() {
        let id = Some(s.id.as_str());
        if design.is_installed(&s.id) {
            let rp = design.rated_power.get(&s.id).copied().unwrap_or(0.0);
            sink.flag("rated_power_bounds", id, None, None, s.rp_min - rp);
            sink.flag("rated_power_bounds", id, None, None, rp - s.rp_max);
            if s.is_storage() {
                let cap = design.storage_cap.get(&s.id).copied().unwrap_or(0.0);
                sink.flag("storage_cap_bounds", id, None, None, s.cap_min - cap);
                sink.flag("storage_cap_bounds", id, None, None, cap - s.cap_max);
            }
            if let Some(w) = s.wind() {
                let residual = match design.rotor_diameter.get(&s.id) {
                    Some(&d) => match crate::devices::wind_rated_power(d, w) {
                        Ok(p) => (p - rp).abs() / rp.abs().max(f64::MIN_POSITIVE),
                        Err(_) => f64::INFINITY,
                    },
                    None => f64::INFINITY,
                };
                // Flags when the relative gap exceeds max(tol, ROTOR_REL_TOL).
                let allowed = ROTOR_REL_TOL.max(sink.tol);
                sink.flag(
                    "rotor_diameter",
                    id,
                    None,
                    None,
                    residual - allowed + sink.tol,
                );
            }
            if let Some(sol) = s.solar() {
                let (lo, hi) = sol.tilt_bounds_rad();
                match design.tilt.get(&s.id) {
                    Some(&b) => {
                        sink.flag("tilt_bounds", id, None, None, lo - b);
                        sink.flag("tilt_bounds", id, None, None, b - hi);
                    }
                    None => sink.flag("tilt_bounds", id, None, None, f64::INFINITY),
                }
            }
        } else {
            let rp = design.rated_power.get(&s.id).copied().unwrap_or(0.0);
            let cap = design.storage_cap.get(&s.id).copied().unwrap_or(0.0);
            sink.flag("rated_power_bounds", id, None, None, rp.abs());
            sink.flag("storage_cap_bounds", id, None, None, cap.abs());
        }
    }
    let excess = design.install_count() as f64 - econ.max_installed as f64;
    sink.flag("install_limit", None, None, None, excess);
}

fn max_flow_gap(a: &ResourceFlows, b: &ResourceFlows) -> f64 {
    Resource::ALL
        .iter()
        .map(|&r| (a.gen[r] - b.gen[r]).abs().max((a.con[r] - b.con[r]).abs()))
        .fold(0.0, f64::max)
}

fn op_magnitude(op: &OperatingPoint) -> f64 {
    [op.power, op.heat, op.charge, op.discharge, op.xi * M_CH4]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
}

/// All first- and second-stage constraints of one scenario.
pub fn check_feasibility(
    design: &Design,
    dispatch: &Dispatch,
    scenario: &Scenario,
    demand: &DemandProfile,
    catalog: &Catalog,
    econ: &Economics,
    tol: f64,
) -> Vec<Violation> {
    let mut sink = Sink {
        tol,
        scenario: Some(&scenario.id),
        out: Vec::new(),
    };
    design_checks(design, catalog, econ, &mut sink);

    let hours = dispatch.hours.len();
    let horizon_gap = (hours as f64 - scenario.hours() as f64)
        .abs()
        .max((hours as f64 - demand.hours() as f64).abs());
    sink.flag("horizon", None, None, None, horizon_gap);
    let hours = hours.min(scenario.hours()).min(demand.hours());

    let devices = match installed_devices(design, catalog) {
        Ok(d) => d,
        Err(_) => {
            sink.flag("device_model", None, None, None, f64::INFINITY);
            return sink.out;
        }
    };

    let mut soc_prev: Vec<f64> = devices
        .iter()
        .map(|d| {
            d.spec
                .storage()
                .map_or(0.0, |s| s.soc_init_fraction * d.cap)
        })
        .collect();

    for t in 0..hours {
        let hd = &dispatch.hours[t];
        let ht = Some(t);
        for d in &hd.devices {
            if !devices.iter().any(|x| x.id() == d.id) {
                let mag =
                    op_magnitude(&d.op).max(max_flow_gap(&d.flows, &ResourceFlows::default()));
                sink.flag("not_installed", Some(&d.id), ht, None, mag);
            }
        }
        for (k, dev) in devices.iter().enumerate() {
            let op = hd.device(dev.id()).map(|d| d.op).unwrap_or_default();
            let flows = hd.device(dev.id()).map(|d| d.flows).unwrap_or_default();
            device_checks(
                dev,
                &op,
                &flows,
                &scenario.weather[t],
                t,
                &mut soc_prev[k],
                &mut sink,
            );
        }

        let gen = hd.total_gen();
        let con = hd.total_con();
        let dem = demand.at(t);
        for r in Resource::ALL {
            let rr = Some(r);
            let residual = gen[r] + hd.purchase[r] - con[r] - hd.excess[r] - hd.spin[r] - dem[r];
            sink.flag("balance", None, ht, rr, residual.abs());
            sink.flag("nonnegativity", None, ht, rr, -hd.purchase[r]);
            sink.flag("nonnegativity", None, ht, rr, -hd.excess[r]);
            sink.flag("nonnegativity", None, ht, rr, -hd.spin[r]);
            if econ.purchase_price(r).is_none() {
                sink.flag("purchase_not_allowed", None, ht, rr, hd.purchase[r]);
            }
            if r != Resource::Co2 {
                sink.flag("excess_not_allowed", None, ht, rr, hd.excess[r]);
            }
            if matches!(r, Resource::Co2 | Resource::Coal | Resource::Biomass) {
                sink.flag("slack_not_allowed", None, ht, rr, hd.spin[r]);
            }
        }
    }

    for (k, dev) in devices.iter().enumerate() {
        if let Some(st) = dev.spec.storage() {
            if st.cyclic && hours > 0 {
                let soc0 = st.soc_init_fraction * dev.cap;
                sink.flag(
                    "soc_terminal",
                    Some(dev.id()),
                    Some(hours - 1),
                    None,
                    (soc_prev[k] - soc0).abs(),
                );
            }
        }
    }
    sink.out
}

fn device_checks(
    dev: &InstalledDevice<'_>,
    op: &OperatingPoint,
    flows: &ResourceFlows,
    weather: &crate::environment::WeatherHour,
    t: usize,
    soc_prev: &mut f64,
    sink: &mut Sink<'_>,
) {
    let id = Some(dev.id());
    let ht = Some(t);
    for v in [op.power, op.heat, op.charge, op.discharge, op.xi * M_CH4] {
        sink.flag("nonnegativity", id, ht, None, -v);
    }
    sink.flag(
        "flow_consistency",
        id,
        ht,
        None,
        max_flow_gap(flows, &dev.flows(op)),
    );

    match &dev.spec.physics {
        Physics::Chp(_) => {
            if op.on {
                let chp = dev.chp().expect("CHP device carries its polygon");
                let worst = chp_edge_residuals(op.power, op.heat, chp)
                    .into_iter()
                    .fold(-op.heat, f64::max);
                sink.flag("chp_region", id, ht, None, worst);
            } else {
                sink.flag(
                    "commitment",
                    id,
                    ht,
                    None,
                    op.power.abs().max(op.heat.abs()),
                );
            }
        }
        _ if dev.kind().is_committed_generator() => {
            let (lo, hi) = dev.committed_range();
            if op.on {
                sink.flag("min_power", id, ht, None, lo - op.power);
                sink.flag("max_power", id, ht, None, op.power - hi);
            } else {
                sink.flag("commitment", id, ht, None, op.power.abs());
            }
        }
        Physics::Wind(_) | Physics::Solar(_) => match dev.availability(weather) {
            Ok(Some(avail)) => sink.flag("availability", id, ht, None, op.power - avail),
            _ => sink.flag("availability", id, ht, None, f64::INFINITY),
        },
        Physics::Storage(st) => {
            let (lo, hi) = (st.q_min * dev.rp, st.q_max * dev.rp);
            if op.charge > 0.0 {
                sink.flag("charge_bounds", id, ht, None, lo - op.charge);
            }
            sink.flag("charge_bounds", id, ht, None, op.charge - hi);
            if op.discharge > 0.0 {
                sink.flag("discharge_bounds", id, ht, None, lo - op.discharge);
            }
            sink.flag("discharge_bounds", id, ht, None, op.discharge - hi);
            sink.flag("exclusivity", id, ht, None, op.charge.min(op.discharge));
            let expected = *soc_prev + op.charge - op.discharge;
            sink.flag("soc_recursion", id, ht, None, (op.soc - expected).abs());
            sink.flag("soc_bounds", id, ht, None, st.soc_lo * dev.cap - op.soc);
            sink.flag("soc_bounds", id, ht, None, op.soc - st.soc_hi * dev.cap);
            *soc_prev = op.soc;
        }
        Physics::HeatPump(_) => {
            sink.flag(
                "max_power",
                id,
                ht,
                None,
                op.heat - dev.spec.max_load * dev.rp,
            );
        }
        Physics::P2g(_) => {
            if op.on {
                sink.flag("extent_bound", id, ht, None, (op.xi - dev.xi_max()) * M_CH4);
            } else {
                sink.flag("commitment", id, ht, None, op.xi * M_CH4);
            }
        }
        _ => {}
    }
}
