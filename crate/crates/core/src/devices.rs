//! Operating-point models for individual devices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::catalog::{ChpPhysics, ConventionalPhysics, P2GPhysics, SolarPhysics, WindPhysics};
use crate::error::{Error, Result};
use crate::resource::ResourceFlows;

/// Molar masses in t/mol.
pub const M_CO2: f64 = 44.009e-6;
pub const M_CH4: f64 = 16.043e-6;
pub const M_H2: f64 = 2.016e-6;
pub const M_H2O: f64 = 18.015e-6;

/// Stoichiometry of CO₂ + 4 H₂ → 2 H₂O + CH₄, species order (CO₂, H₂, H₂O, CH₄).
pub const SABATIER_NU: [f64; 4] = [-1.0, -4.0, 2.0, 1.0];

/// Relative bracket width at which the extent bisection stops.
const EXTENT_REL_TOL: f64 = 1e-12;

/// State of one device in one hour.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub power: f64,
    pub heat: f64,
    pub on: bool,
    pub charge: f64,
    pub discharge: f64,
    pub soc: f64,
    pub xi: f64,
}

impl OperatingPoint {
    pub fn is_valid(&self) -> bool {
        self.power >= 0.0
            && self.heat >= 0.0
            && self.charge >= 0.0
            && self.discharge >= 0.0
            && !(self.charge > 0.0 && self.discharge > 0.0)
            && self.xi >= 0.0
    }
}

fn per_turbine_rated(d_rotor: f64, phys: &WindPhysics) -> f64 {
    0.5 * phys.rho_air * (PI * d_rotor * d_rotor / 4.0) * phys.cp * phys.v_rated.powi(3) / 1e6
}

/// Rated power of the whole farm in MW for a rotor diameter in m.
pub fn wind_rated_power(d_rotor: f64, phys: &WindPhysics) -> Result<f64> {
    if !(d_rotor > 0.0 && d_rotor.is_finite()) {
        return Err(Error::Domain(format!(
            "rotor diameter must be positive, got {d_rotor}"
        )));
    }
    Ok(per_turbine_rated(d_rotor, phys) * f64::from(phys.turbines_per_farm))
}

/// Inverse of [`wind_rated_power`].
pub fn rotor_diameter_for(rated_farm_mw: f64, phys: &WindPhysics) -> Result<f64> {
    if !(rated_farm_mw > 0.0) {
        return Err(Error::Domain(format!(
            "rated power must be positive, got {rated_farm_mw}"
        )));
    }
    let per_turbine_w = rated_farm_mw * 1e6 / f64::from(phys.turbines_per_farm);
    let coeff = 0.5 * phys.rho_air * (PI / 4.0) * phys.cp * phys.v_rated.powi(3);
    Ok((per_turbine_w / coeff).sqrt())
}

/// Farm output in MW at hub-height wind speed `v_hub`.
///
/// Cut-out takes precedence over the rated branch.
pub fn wind_power(v_hub: f64, d_rotor: f64, phys: &WindPhysics) -> f64 {
    let n = f64::from(phys.turbines_per_farm);
    if v_hub < phys.v_cut_in || v_hub >= phys.v_cut_out {
        0.0
    } else if v_hub < phys.v_rated {
        n * 0.5 * phys.rho_air * (PI * d_rotor * d_rotor / 4.0) * phys.cp * v_hub.powi(3) / 1e6
    } else {
        n * per_turbine_rated(d_rotor, phys)
    }
}

/// Array output in MW.
pub fn pv_power(g_beta: f64, eta: f64, phys: &SolarPhysics) -> f64 {
    g_beta * eta * phys.area * phys.eta_inverter / 1e6
}

/// Fuel cost in $/h with the rectified-sine valve-point term.
pub fn cvt_cost(p: f64, phys: &ConventionalPhysics) -> f64 {
    phys.c * p * p + phys.b * p + phys.a + (phys.d * (phys.e * (phys.p_min - p)).sin()).abs()
}

/// CO₂ emission in t/h, floored at zero.
pub fn cvt_emission(p: f64, phys: &ConventionalPhysics) -> f64 {
    (phys.ef * (phys.h_co2 * p * p + phys.g_co2 * p + phys.f_co2)).max(0.0)
}

/// Membership of `(p, h)` in the CHP operating polygon, using the three
/// edge inequalities C–D, A–B and B–C. The fourth edge is the heat floor.
pub fn chp_feasible(p: f64, h: f64, phys: &ChpPhysics, tol: f64) -> bool {
    chp_edge_residuals(p, h, phys).iter().all(|&r| r <= tol) && h >= -tol
}

/// Signed violations of the three edge inequalities (positive means outside).
pub fn chp_edge_residuals(p: f64, h: f64, phys: &ChpPhysics) -> [f64; 3] {
    let [a, b, c, d] = phys.corners();
    let (ap, ah) = (a[0], a[1]);
    let (bp, bh) = (b[0], b[1]);
    let (cp, ch) = (c[0], c[1]);
    let (dp, dh) = (d[0], d[1]);
    let _ = ah;
    // (p − Dp) ≥ (h − Dh)(Dp − Cp)/(Dh − Ch)
    let r17 = (h - dh) * ((dp - cp) / (dh - ch)) - (p - dp);
    // (p − Ap) ≤ (h − Dh)(Ap − Bp)/(Ah − Bh)
    let r18 = (p - ap) - (h - dh) * ((ap - bp) / (a[1] - bh));
    // (p − Bp) ≥ (h − Bh)(Bp − Cp)/(Bh − Ch)
    let r19 = (h - bh) * ((bp - cp) / (bh - ch)) - (p - bp);
    [r17, r18, r19]
}

/// Fuel cost of a CHP unit in $/h.
pub fn chp_cost(p: f64, h: f64, phys: &ChpPhysics) -> Result<f64> {
    if !chp_feasible(p, h, phys, 1e-9) {
        return Err(Error::InfeasiblePoint {
            id: "CHP".into(),
            power: p,
            heat: h,
        });
    }
    Ok(chp_cost_unchecked(p, h, phys))
}

pub(crate) fn chp_cost_unchecked(p: f64, h: f64, c: &ChpPhysics) -> f64 {
    c.kk + c.ll * p + c.ii * p * p + c.jj * h + c.yy * h * h + c.zz * h * p
}

/// Outlet molar flows at extent `xi`.
pub fn species_at_extent(xi: f64, phys: &P2GPhysics) -> [f64; 4] {
    let n_in = phys.n_in.as_array();
    std::array::from_fn(|j| n_in[j] + xi * SABATIER_NU[j])
}

pub fn partial_pressures(xi: f64, phys: &P2GPhysics) -> [f64; 4] {
    let n = species_at_extent(xi, phys);
    let total: f64 = n.iter().sum();
    std::array::from_fn(|j| phys.pp_in * n[j] / total)
}

/// `K·P_CO2·P_H2⁴ − P_H2O²·P_CH4`; non-negative while the mixture has not
/// passed equilibrium.
pub fn equilibrium_residual(xi: f64, phys: &P2GPhysics) -> f64 {
    let k = phys.keq.eval(phys.t_in);
    let [co2, h2, h2o, ch4] = partial_pressures(xi, phys);
    k * co2 * h2.powi(4) - h2o * h2o * ch4
}

/// Residual normalised by the magnitude of both sides.
pub fn equilibrium_residual_relative(xi: f64, phys: &P2GPhysics) -> f64 {
    let k = phys.keq.eval(phys.t_in);
    let [co2, h2, h2o, ch4] = partial_pressures(xi, phys);
    let lhs = k * co2 * h2.powi(4);
    let rhs = h2o * h2o * ch4;
    let scale = lhs.abs() + rhs.abs();
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs) / scale
    }
}

/// Largest extent allowed by stoichiometry alone.
pub fn stoichiometric_limit(phys: &P2GPhysics) -> f64 {
    phys.n_in.co2.min(phys.n_in.h2 / 4.0)
}

/// Largest reaction extent in mol/h for which the equilibrium inequality
/// holds, found by bisection.
pub fn sabatier_max_extent(phys: &P2GPhysics) -> Result<f64> {
    if !(phys.n_in.co2 > 0.0 && phys.n_in.h2 > 0.0) {
        return Err(Error::Domain(
            "methanation needs CO₂ and H₂ in the feed".into(),
        ));
    }
    if equilibrium_residual(0.0, phys) < 0.0 {
        return Err(Error::Domain(
            "feed is already beyond equilibrium at zero extent".into(),
        ));
    }
    let limit = stoichiometric_limit(phys);
    check_residual_monotone(phys, limit)?;
    if equilibrium_residual(limit, phys) >= 0.0 {
        return Ok(limit);
    }
    let (mut lo, mut hi) = (0.0, limit);
    while hi - lo > EXTENT_REL_TOL * limit {
        let mid = 0.5 * (lo + hi);
        if equilibrium_residual(mid, phys) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn check_residual_monotone(phys: &P2GPhysics, limit: f64) -> Result<()> {
    const SAMPLES: usize = 64;
    let mut prev = equilibrium_residual(0.0, phys);
    for i in 1..=SAMPLES {
        let r = equilibrium_residual(limit * i as f64 / SAMPLES as f64, phys);
        if r > prev * (1.0 + 1e-12) + f64::EPSILON {
            return Err(Error::Domain(format!(
                "equilibrium residual is not monotone in the extent at T = {} K, P = {} bar",
                phys.t_in, phys.pp_in
            )));
        }
        prev = r;
    }
    Ok(())
}

/// SNG output in t/h at extent `xi`.
pub fn sng_rate(xi: f64, phys: &P2GPhysics) -> f64 {
    xi * M_CH4 * phys.sng_yield
}

/// Flows of an operating P2G unit at extent `xi`.
pub fn p2g_flows(xi: f64, phys: &P2GPhysics) -> Result<ResourceFlows> {
    let xi_max = sabatier_max_extent(phys)?;
    p2g_flows_bounded(xi, xi_max, phys)
}

pub(crate) fn p2g_flows_bounded(xi: f64, xi_max: f64, phys: &P2GPhysics) -> Result<ResourceFlows> {
    if !(xi >= 0.0) || xi > xi_max * (1.0 + 1e-9) {
        return Err(Error::Domain(format!(
            "reaction extent {xi} mol/h outside [0, {xi_max}]"
        )));
    }
    let mut flows = ResourceFlows::default();
    flows.con.electricity = phys.soec_rated_power;
    flows.con.co2 = xi * M_CO2;
    flows.gen.sng = sng_rate(xi, phys);
    Ok(flows)
}

/// Lossless one-hour state-of-charge update.
pub fn battery_step(soc_prev: f64, pch: f64, pdch: f64) -> Result<f64> {
    battery_step_with_efficiency(soc_prev, pch, pdch, 1.0, 1.0)
}

/// State-of-charge update with charge/discharge efficiencies; both equal
/// to one reproduces [`battery_step`].
pub fn battery_step_with_efficiency(
    soc_prev: f64,
    pch: f64,
    pdch: f64,
    eta_charge: f64,
    eta_discharge: f64,
) -> Result<f64> {
    if pch < 0.0 || pdch < 0.0 {
        return Err(Error::Domain(format!(
            "charge and discharge must be non-negative ({pch}, {pdch})"
        )));
    }
    if pch > 0.0 && pdch > 0.0 {
        return Err(Error::MutualExclusion {
            charge: pch,
            discharge: pdch,
        });
    }
    Ok(soc_prev + eta_charge * pch - pdch / eta_discharge)
}
