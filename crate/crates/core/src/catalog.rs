//! Candidate-equipment catalog.
//!
//! A catalog file is a JSON array of [`EquipmentSpec`] objects. Rating
//! bounds and cost coefficients follow the published candidate table; the
//! `physics` blocks carry device parameters whose published sources are
//! external, so the bundled values are provisional and only structural
//! properties of them should be relied upon.
//!
//! Units: MW, MWh, m/s, W/m², °C (ambient and cell), K (reactor), $, t.
//! `psi0` is the one exception and is given in M$/MW, as in the table.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bundled catalog, see `data/default_catalog.json`.
pub const DEFAULT_CATALOG_JSON: &str = include_str!("../data/default_catalog.json");

/// Upper bound on the rotor power coefficient (Betz limit).
pub const BETZ_LIMIT: f64 = 16.0 / 27.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquipmentKind {
    WindFarm,
    SolarArray,
    #[serde(rename = "BiomassCC")]
    BiomassCc,
    BiomassFired,
    Conventional,
    #[serde(rename = "CHP")]
    Chp,
    #[serde(rename = "IGCC")]
    Igcc,
    Storage,
    HeatPump,
    P2G,
}

impl EquipmentKind {
    /// Members of the generator set whose output counts toward the hourly
    /// CO₂ cap, together with wind farms and solar arrays.
    pub fn counts_toward_cap(self) -> bool {
        matches!(
            self,
            EquipmentKind::WindFarm
                | EquipmentKind::SolarArray
                | EquipmentKind::BiomassCc
                | EquipmentKind::BiomassFired
                | EquipmentKind::Conventional
                | EquipmentKind::Chp
                | EquipmentKind::Igcc
        )
    }

    /// Dispatchable generators subject to the commitment bounds.
    pub fn is_committed_generator(self) -> bool {
        matches!(
            self,
            EquipmentKind::BiomassCc
                | EquipmentKind::BiomassFired
                | EquipmentKind::Conventional
                | EquipmentKind::Chp
                | EquipmentKind::Igcc
        )
    }

    fn physics_model(self) -> &'static str {
        match self {
            EquipmentKind::WindFarm => "wind",
            EquipmentKind::SolarArray => "solar",
            EquipmentKind::Conventional => "conventional",
            EquipmentKind::Chp => "chp",
            EquipmentKind::BiomassCc | EquipmentKind::BiomassFired | EquipmentKind::Igcc => {
                "linear"
            }
            EquipmentKind::Storage => "storage",
            EquipmentKind::HeatPump => "heat_pump",
            EquipmentKind::P2G => "p2g",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindPhysics {
    pub v_cut_in: f64,
    pub v_rated: f64,
    pub v_cut_out: f64,
    pub cp: f64,
    pub rho_air: f64,
    pub z_hub: f64,
    pub z_anemometer: f64,
    pub alpha: f64,
    pub turbines_per_farm: u32,
}

/// Form of the tilt factor applied to diffuse irradiance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlucherForm {
    /// `0.5 (1 + cos(β/2))`, the half-angle form.
    #[default]
    AsPrinted,
    /// `0.5 (1 + cos β)`, the usual isotropic sky-view factor.
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolarPhysics {
    pub area: f64,
    pub eta_inverter: f64,
    pub p_spa: f64,
    pub q_spa: f64,
    pub m_spa: f64,
    pub r_spa: f64,
    pub s_spa: f64,
    pub u_spa: f64,
    pub h_spa: f64,
    #[serde(default = "default_g_beta0")]
    pub g_beta0: f64,
    #[serde(default = "default_theta_cell0")]
    pub theta_cell0: f64,
    #[serde(default = "default_am0")]
    pub am0: f64,
    pub albedo: f64,
    #[serde(default = "default_tilt_min")]
    pub tilt_min_deg: f64,
    #[serde(default = "default_tilt_max")]
    pub tilt_max_deg: f64,
    #[serde(default)]
    pub klucher: KlucherForm,
}

fn default_g_beta0() -> f64 {
    1000.0
}
fn default_theta_cell0() -> f64 {
    25.0
}
fn default_am0() -> f64 {
    1.5
}
fn default_tilt_min() -> f64 {
    20.0
}
fn default_tilt_max() -> f64 {
    70.0
}

impl SolarPhysics {
    pub fn tilt_bounds_rad(&self) -> (f64, f64) {
        (
            self.tilt_min_deg.to_radians(),
            self.tilt_max_deg.to_radians(),
        )
    }
}

/// Valve-point cost and quadratic emission curve of a coal unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionalPhysics {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub ef: f64,
    pub f_co2: f64,
    pub g_co2: f64,
    pub h_co2: f64,
    pub p_min: f64,
}

/// A corner of the CHP operating polygon, `[power MW, heat MW]`.
pub type Corner = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChpPhysics {
    pub corner_a: Corner,
    pub corner_b: Corner,
    pub corner_c: Corner,
    pub corner_d: Corner,
    pub kk: f64,
    pub ll: f64,
    pub ii: f64,
    pub jj: f64,
    pub yy: f64,
    pub zz: f64,
}

impl ChpPhysics {
    pub fn corners(&self) -> [Corner; 4] {
        [self.corner_a, self.corner_b, self.corner_c, self.corner_d]
    }

    pub fn power_range(&self) -> (f64, f64) {
        span(self.corners().iter().map(|c| c[0]))
    }

    pub fn heat_range(&self) -> (f64, f64) {
        span(self.corners().iter().map(|c| c[1]))
    }

    /// Same unit with every corner multiplied by `factor`; cost
    /// coefficients are unchanged.
    pub fn scaled(&self, factor: f64) -> ChpPhysics {
        let s = |c: Corner| [c[0] * factor, c[1] * factor];
        ChpPhysics {
            corner_a: s(self.corner_a),
            corner_b: s(self.corner_b),
            corner_c: s(self.corner_c),
            corner_d: s(self.corner_d),
            ..self.clone()
        }
    }
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesFlows {
    pub co2: f64,
    pub h2: f64,
    pub h2o: f64,
    pub ch4: f64,
}

impl SpeciesFlows {
    pub fn as_array(&self) -> [f64; 4] {
        [self.co2, self.h2, self.h2o, self.ch4]
    }
}

/// `ln K = a / T + b ln T + c T + d`, K in bar⁻².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeqCorrelation {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl KeqCorrelation {
    pub fn eval(&self, t: f64) -> f64 {
        (self.a / t + self.b * t.ln() + self.c * t + self.d).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P2GPhysics {
    pub soec_rated_power: f64,
    pub t_in: f64,
    pub pp_in: f64,
    pub n_in: SpeciesFlows,
    pub keq: KeqCorrelation,
    /// CO₂ capture operating cost, $/t.
    pub cc: f64,
    pub h2_per_mwh: f64,
    /// Mass of SNG delivered per mass of methane produced.
    #[serde(default = "one")]
    pub sng_yield: f64,
}

impl P2GPhysics {
    pub fn co2_per_t_sng(&self) -> f64 {
        crate::devices::M_CO2 / (crate::devices::M_CH4 * self.sng_yield)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoragePhysics {
    #[serde(default)]
    pub q_min: f64,
    #[serde(default = "one")]
    pub q_max: f64,
    #[serde(default = "default_soc_lo")]
    pub soc_lo: f64,
    #[serde(default = "default_soc_hi")]
    pub soc_hi: f64,
    /// Initial state of charge as a fraction of the installed capacity.
    #[serde(default = "default_soc_init")]
    pub soc_init_fraction: f64,
    /// Require the end-of-day state of charge to equal the initial one.
    #[serde(default = "yes")]
    pub cyclic: bool,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_soc_lo() -> f64 {
    0.2
}
fn default_soc_hi() -> f64 {
    0.8
}
fn default_soc_init() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatPumpPhysics {
    pub cop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fuel {
    Coal,
    Biomass,
}

/// Constant-emission generator burning a purchased fuel at a fixed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGenPhysics {
    pub fuel: Fuel,
    /// t of fuel per MWh of electricity.
    pub fuel_per_mwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Physics {
    Wind(WindPhysics),
    Solar(SolarPhysics),
    Conventional(ConventionalPhysics),
    Chp(ChpPhysics),
    Linear(LinearGenPhysics),
    Storage(StoragePhysics),
    HeatPump(HeatPumpPhysics),
    P2g(P2GPhysics),
}

impl Physics {
    fn model(&self) -> &'static str {
        match self {
            Physics::Wind(_) => "wind",
            Physics::Solar(_) => "solar",
            Physics::Conventional(_) => "conventional",
            Physics::Chp(_) => "chp",
            Physics::Linear(_) => "linear",
            Physics::Storage(_) => "storage",
            Physics::HeatPump(_) => "heat_pump",
            Physics::P2g(_) => "p2g",
        }
    }
}

/// One row of the candidate table plus its device model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquipmentSpec {
    pub id: String,
    pub kind: EquipmentKind,
    pub rp_min: f64,
    pub rp_max: f64,
    #[serde(default)]
    pub cap_min: f64,
    #[serde(default)]
    pub cap_max: f64,
    /// Installation cost per rated power, M$/MW.
    #[serde(default)]
    pub psi0: f64,
    /// Fixed installation cost, $.
    #[serde(default)]
    pub gamma0: f64,
    /// Storage installation cost per capacity, $/MWh.
    #[serde(default)]
    pub omega0: f64,
    /// Maintenance per rated power, $/MW.
    #[serde(default)]
    pub psik: f64,
    /// Fixed maintenance, $.
    #[serde(default)]
    pub gammak: f64,
    /// Storage maintenance per capacity, $/MWh.
    #[serde(default)]
    pub omegak: f64,
    /// t CO₂ per MWh; `None` when emissions follow the device's own curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub co2_per_mwh: Option<f64>,
    /// Minimum load as a fraction of rated power while committed.
    #[serde(default)]
    pub min_load: f64,
    /// Maximum load as a fraction of rated power.
    #[serde(default = "one")]
    pub max_load: f64,
    pub physics: Physics,
}

impl EquipmentSpec {
    pub fn wind(&self) -> Option<&WindPhysics> {
        match &self.physics {
            Physics::Wind(w) => Some(w),
            _ => None,
        }
    }

    pub fn solar(&self) -> Option<&SolarPhysics> {
        match &self.physics {
            Physics::Solar(s) => Some(s),
            _ => None,
        }
    }

    pub fn storage(&self) -> Option<&StoragePhysics> {
        match &self.physics {
            Physics::Storage(s) => Some(s),
            _ => None,
        }
    }

    pub fn p2g(&self) -> Option<&P2GPhysics> {
        match &self.physics {
            Physics::P2g(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_storage(&self) -> bool {
        self.kind == EquipmentKind::Storage
    }

    /// Emission factor for constant-emission devices, zero otherwise.
    pub fn emission_factor(&self) -> f64 {
        self.co2_per_mwh.unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.id.as_str();
        if id.trim().is_empty() {
            return Err(Error::validation("<unnamed>", "id", "must not be empty"));
        }
        finite_nonneg(id, "rp_min", self.rp_min)?;
        finite_nonneg(id, "rp_max", self.rp_max)?;
        if self.rp_min > self.rp_max {
            return Err(Error::validation(id, "rp_min", "rp_min exceeds rp_max"));
        }
        finite_nonneg(id, "cap_min", self.cap_min)?;
        finite_nonneg(id, "cap_max", self.cap_max)?;
        if self.cap_min > self.cap_max {
            return Err(Error::validation(id, "cap_min", "cap_min exceeds cap_max"));
        }
        for (field, v) in [
            ("psi0", self.psi0),
            ("gamma0", self.gamma0),
            ("omega0", self.omega0),
            ("psik", self.psik),
            ("gammak", self.gammak),
            ("omegak", self.omegak),
        ] {
            finite_nonneg(id, field, v)?;
        }
        if let Some(ef) = self.co2_per_mwh {
            finite_nonneg(id, "co2_per_mwh", ef)?;
        }
        if !(0.0..=1.0).contains(&self.min_load) {
            return Err(Error::validation(id, "min_load", "must lie in [0, 1]"));
        }
        if !(self.max_load > 0.0 && self.max_load <= 1.0) || self.min_load > self.max_load {
            return Err(Error::validation(
                id,
                "max_load",
                "must lie in (0, 1] and not below min_load",
            ));
        }
        if self.kind.physics_model() != self.physics.model() {
            return Err(Error::validation(
                id,
                "physics",
                format!(
                    "kind {:?} requires a `{}` physics block, found `{}`",
                    self.kind,
                    self.kind.physics_model(),
                    self.physics.model()
                ),
            ));
        }
        if self.is_storage() && self.cap_max <= 0.0 {
            return Err(Error::validation(
                id,
                "cap_max",
                "storage needs a positive capacity",
            ));
        }
        match &self.physics {
            Physics::Wind(w) => validate_wind(id, w),
            Physics::Solar(s) => validate_solar(id, s),
            Physics::Conventional(c) => validate_conventional(id, c),
            Physics::Chp(c) => validate_chp(id, c),
            Physics::Linear(l) => finite_nonneg(id, "physics.fuel_per_mwh", l.fuel_per_mwh),
            Physics::Storage(s) => validate_storage(id, s),
            Physics::HeatPump(h) => positive(id, "physics.cop", h.cop),
            Physics::P2g(p) => validate_p2g(id, p),
        }
    }
}

fn finite_nonneg(id: &str, field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            id,
            field,
            format!("must be finite and >= 0, got {v}"),
        ))
    }
}

fn positive(id: &str, field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            id,
            field,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn finite(id: &str, field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(id, field, "must be finite"))
    }
}

fn validate_wind(id: &str, w: &WindPhysics) -> Result<()> {
    positive(id, "physics.v_cut_in", w.v_cut_in)?;
    finite(id, "physics.v_rated", w.v_rated)?;
    finite(id, "physics.v_cut_out", w.v_cut_out)?;
    if !(w.v_cut_in < w.v_rated && w.v_rated < w.v_cut_out) {
        return Err(Error::validation(
            id,
            "physics.v_rated",
            "need 0 < v_cut_in < v_rated < v_cut_out",
        ));
    }
    if !(w.cp > 0.0 && w.cp < BETZ_LIMIT) {
        return Err(Error::validation(
            id,
            "physics.cp",
            "must lie in (0, 16/27)",
        ));
    }
    positive(id, "physics.rho_air", w.rho_air)?;
    positive(id, "physics.z_hub", w.z_hub)?;
    positive(id, "physics.z_anemometer", w.z_anemometer)?;
    finite_nonneg(id, "physics.alpha", w.alpha)?;
    if w.turbines_per_farm == 0 {
        return Err(Error::validation(
            id,
            "physics.turbines_per_farm",
            "must be >= 1",
        ));
    }
    Ok(())
}

fn validate_solar(id: &str, s: &SolarPhysics) -> Result<()> {
    positive(id, "physics.area", s.area)?;
    if !(s.eta_inverter > 0.0 && s.eta_inverter <= 1.0) {
        return Err(Error::validation(
            id,
            "physics.eta_inverter",
            "must lie in (0, 1]",
        ));
    }
    for (f, v) in [
        ("physics.p_spa", s.p_spa),
        ("physics.q_spa", s.q_spa),
        ("physics.m_spa", s.m_spa),
        ("physics.r_spa", s.r_spa),
        ("physics.s_spa", s.s_spa),
        ("physics.u_spa", s.u_spa),
    ] {
        finite(id, f, v)?;
    }
    finite_nonneg(id, "physics.h_spa", s.h_spa)?;
    positive(id, "physics.g_beta0", s.g_beta0)?;
    positive(id, "physics.theta_cell0", s.theta_cell0)?;
    positive(id, "physics.am0", s.am0)?;
    if !(0.0..=1.0).contains(&s.albedo) {
        return Err(Error::validation(
            id,
            "physics.albedo",
            "must lie in [0, 1]",
        ));
    }
    if !(s.tilt_min_deg >= 0.0 && s.tilt_min_deg < s.tilt_max_deg && s.tilt_max_deg <= 90.0) {
        return Err(Error::validation(
            id,
            "physics.tilt_min_deg",
            "need 0 <= tilt_min < tilt_max <= 90",
        ));
    }
    Ok(())
}

fn validate_conventional(id: &str, c: &ConventionalPhysics) -> Result<()> {
    for (f, v) in [
        ("physics.a", c.a),
        ("physics.b", c.b),
        ("physics.d", c.d),
        ("physics.f_co2", c.f_co2),
        ("physics.g_co2", c.g_co2),
        ("physics.h_co2", c.h_co2),
    ] {
        finite(id, f, v)?;
    }
    finite_nonneg(id, "physics.c", c.c)?;
    finite_nonneg(id, "physics.e", c.e)?;
    finite_nonneg(id, "physics.ef", c.ef)?;
    finite_nonneg(id, "physics.p_min", c.p_min)?;
    Ok(())
}

fn cross(o: Corner, a: Corner, b: Corner) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn validate_chp(id: &str, c: &ChpPhysics) -> Result<()> {
    let corners = c.corners();
    for (i, corner) in corners.iter().enumerate() {
        let name = ["corner_a", "corner_b", "corner_c", "corner_d"][i];
        finite_nonneg(id, &format!("physics.{name}"), corner[0])?;
        finite_nonneg(id, &format!("physics.{name}"), corner[1])?;
    }
    // Strictly convex, non-degenerate: all turns share one sign.
    let turns: Vec<f64> = (0..4)
        .map(|i| cross(corners[i], corners[(i + 1) % 4], corners[(i + 2) % 4]))
        .collect();
    let scale = corners
        .iter()
        .flat_map(|c| c.iter())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let eps = 1e-9 * scale * scale;
    let all_pos = turns.iter().all(|&t| t > eps);
    let all_neg = turns.iter().all(|&t| t < -eps);
    if !(all_pos || all_neg) {
        return Err(Error::validation(
            id,
            "physics.corners",
            "corners must form a non-degenerate convex quadrilateral",
        ));
    }
    // The edge formulas divide by these heat differences.
    let [a, b, cc, d] = corners;
    if (d[1] - cc[1]).abs() <= eps || (a[1] - b[1]).abs() <= eps || (b[1] - cc[1]).abs() <= eps {
        return Err(Error::validation(
            id,
            "physics.corners",
            "edges C-D, A-B and B-C must not be horizontal in heat",
        ));
    }
    for (f, v) in [
        ("physics.kk", c.kk),
        ("physics.ll", c.ll),
        ("physics.ii", c.ii),
        ("physics.jj", c.jj),
        ("physics.yy", c.yy),
        ("physics.zz", c.zz),
    ] {
        finite(id, f, v)?;
    }
    Ok(())
}

fn validate_storage(id: &str, s: &StoragePhysics) -> Result<()> {
    if !(0.0 <= s.q_min && s.q_min < s.q_max && s.q_max <= 1.0) {
        return Err(Error::validation(
            id,
            "physics.q_min",
            "need 0 <= q_min < q_max <= 1",
        ));
    }
    if !(0.0 <= s.soc_lo && s.soc_lo < s.soc_hi && s.soc_hi <= 1.0) {
        return Err(Error::validation(
            id,
            "physics.soc_lo",
            "need 0 <= soc_lo < soc_hi <= 1",
        ));
    }
    if !(s.soc_lo..=s.soc_hi).contains(&s.soc_init_fraction) {
        return Err(Error::validation(
            id,
            "physics.soc_init_fraction",
            "initial state of charge must lie inside the SOC envelope",
        ));
    }
    Ok(())
}

fn validate_p2g(id: &str, p: &P2GPhysics) -> Result<()> {
    positive(id, "physics.soec_rated_power", p.soec_rated_power)?;
    positive(id, "physics.t_in", p.t_in)?;
    positive(id, "physics.pp_in", p.pp_in)?;
    for (f, v) in [
        ("physics.n_in.co2", p.n_in.co2),
        ("physics.n_in.h2", p.n_in.h2),
        ("physics.n_in.h2o", p.n_in.h2o),
        ("physics.n_in.ch4", p.n_in.ch4),
    ] {
        finite_nonneg(id, f, v)?;
    }
    for (f, v) in [
        ("physics.keq.a", p.keq.a),
        ("physics.keq.b", p.keq.b),
        ("physics.keq.c", p.keq.c),
        ("physics.keq.d", p.keq.d),
    ] {
        finite(id, f, v)?;
    }
    finite_nonneg(id, "physics.cc", p.cc)?;
    positive(id, "physics.h2_per_mwh", p.h2_per_mwh)?;
    positive(id, "physics.sng_yield", p.sng_yield)?;
    // The electrolyzer must be able to supply the hydrogen feed.
    let h2_feed = p.n_in.h2 * crate::devices::M_H2;
    let h2_supply = p.h2_per_mwh * p.soec_rated_power;
    if h2_feed > h2_supply * (1.0 + 1e-9) {
        return Err(Error::validation(
            id,
            "physics.n_in.h2",
            format!(
                "hydrogen feed {h2_feed:.4} t/h exceeds electrolyzer output {h2_supply:.4} t/h"
            ),
        ));
    }
    Ok(())
}

/// Validated, immutable list of candidates in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Catalog {
    specs: Vec<EquipmentSpec>,
}

impl Catalog {
    pub fn new(specs: Vec<EquipmentSpec>) -> Result<Self> {
        let mut seen = HashSet::new();
        for spec in &specs {
            spec.validate()?;
            if !seen.insert(spec.id.as_str()) {
                return Err(Error::validation(&spec.id, "id", "duplicate equipment id"));
            }
        }
        Ok(Catalog { specs })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let specs: Vec<EquipmentSpec> = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "catalog".into(),
            message: e.to_string(),
        })?;
        Catalog::new(specs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.specs).expect("catalog serializes")
    }

    pub fn specs(&self) -> &[EquipmentSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EquipmentSpec> {
        self.specs.iter().find(|s| s.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.id == id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EquipmentSpec> {
        self.specs.iter()
    }

    /// Sub-catalog restricted to `ids`, kept in catalog order.
    pub fn restrict(&self, ids: &[&str]) -> Result<Catalog> {
        for id in ids {
            if self.get(id).is_none() {
                return Err(Error::validation(id, "id", "not present in catalog"));
            }
        }
        Ok(Catalog {
            specs: self
                .specs
                .iter()
                .filter(|s| ids.contains(&s.id.as_str()))
                .cloned()
                .collect(),
        })
    }
}

impl<'a> IntoIterator for &'a Catalog {
    type Item = &'a EquipmentSpec;
    type IntoIter = std::slice::Iter<'a, EquipmentSpec>;

    fn into_iter(self) -> Self::IntoIter {
        self.specs.iter()
    }
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Catalog::from_json(&text)
}

pub fn default_catalog() -> Catalog {
    Catalog::from_json(DEFAULT_CATALOG_JSON).expect("bundled catalog is valid")
}
