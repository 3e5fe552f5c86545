use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, ChpPhysics, EquipmentKind, EquipmentSpec, Physics};
use crate::devices::{
    cvt_emission, p2g_flows_bounded, pv_power, rotor_diameter_for, sabatier_max_extent, wind_power,
    OperatingPoint,
};
use crate::environment::{shear_wind_speed, solar_hour, WeatherHour};
use crate::error::{Error, Result};
use crate::model::Economics;
use crate::resource::{Resource, ResourceFlows};

/// First-stage decisions. Maps are keyed by equipment id; only installed
/// devices appear in the sizing maps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Design {
    pub install: BTreeMap<String, bool>,
    /// MW.
    pub rated_power: BTreeMap<String, f64>,
    /// MWh.
    pub storage_cap: BTreeMap<String, f64>,
    /// m.
    pub rotor_diameter: BTreeMap<String, f64>,
    /// rad.
    pub tilt: BTreeMap<String, f64>,
}

impl Design {
    /// Nothing installed.
    pub fn empty(catalog: &Catalog) -> Self {
        Design {
            install: catalog.iter().map(|s| (s.id.clone(), false)).collect(),
            ..Design::default()
        }
    }

    pub fn is_installed(&self, id: &str) -> bool {
        self.install.get(id).copied().unwrap_or(false)
    }

    pub fn install_count(&self) -> usize {
        self.install.values().filter(|&&b| b).count()
    }

    pub fn installed_ids(&self) -> impl Iterator<Item = &str> {
        self.install
            .iter()
            .filter(|(_, &b)| b)
            .map(|(k, _)| k.as_str())
    }

    pub fn rated_power_of(&self, id: &str) -> f64 {
        if self.is_installed(id) {
            self.rated_power.get(id).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    pub fn storage_cap_of(&self, id: &str) -> f64 {
        if self.is_installed(id) {
            self.storage_cap.get(id).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    /// Installs `spec` at rated power `rp`. Wind farms get the matching
    /// rotor diameter, solar arrays the middle of their tilt range and
    /// storage its minimum capacity; override with the setters.
    pub fn install(&mut self, spec: &EquipmentSpec, rp: f64) -> Result<&mut Self> {
        let id = spec.id.clone();
        self.install.insert(id.clone(), true);
        self.rated_power.insert(id.clone(), rp);
        if let Some(w) = spec.wind() {
            self.rotor_diameter
                .insert(id.clone(), rotor_diameter_for(rp, w)?);
        }
        if let Some(s) = spec.solar() {
            let (lo, hi) = s.tilt_bounds_rad();
            self.tilt.entry(id.clone()).or_insert(0.5 * (lo + hi));
        }
        if spec.is_storage() {
            self.storage_cap.entry(id).or_insert(spec.cap_min);
        }
        Ok(self)
    }

    pub fn set_storage_cap(&mut self, id: &str, cap: f64) -> &mut Self {
        self.storage_cap.insert(id.to_string(), cap);
        self
    }

    pub fn set_tilt(&mut self, id: &str, beta: f64) -> &mut Self {
        self.tilt.insert(id.to_string(), beta);
        self
    }

    pub fn uninstall(&mut self, id: &str) -> &mut Self {
        self.install.insert(id.to_string(), false);
        self.rated_power.remove(id);
        self.storage_cap.remove(id);
        self.rotor_diameter.remove(id);
        self.tilt.remove(id);
        self
    }

    /// Errors on the first violated first-stage constraint.
    pub fn validate(&self, catalog: &Catalog, econ: &Economics) -> Result<()> {
        match super::check_design(self, catalog, econ, super::DEFAULT_TOL).first() {
            None => Ok(()),
            Some(v) => Err(Error::validation(
                v.equipment.as_deref().unwrap_or("design"),
                &v.constraint,
                format!("residual {}", v.residual),
            )),
        }
    }
}

/// An installed device with its sizing resolved and derived constants
/// precomputed.
#[derive(Debug, Clone)]
pub struct InstalledDevice<'a> {
    pub spec: &'a EquipmentSpec,
    pub rp: f64,
    pub cap: f64,
    pub rotor_diameter: f64,
    pub tilt: f64,
    chp: Option<ChpPhysics>,
    xi_max: f64,
}

impl<'a> InstalledDevice<'a> {
    pub fn new(spec: &'a EquipmentSpec, design: &Design) -> Result<Self> {
        let id = spec.id.as_str();
        let rp = design.rated_power_of(id);
        let chp = match &spec.physics {
            Physics::Chp(c) if spec.rp_max > 0.0 => Some(c.scaled(rp / spec.rp_max)),
            Physics::Chp(c) => Some(c.clone()),
            _ => None,
        };
        let xi_max = match spec.p2g() {
            Some(p) => sabatier_max_extent(p)?,
            None => 0.0,
        };
        let rotor_diameter = match spec.wind() {
            Some(w) => match design.rotor_diameter.get(id) {
                Some(&d) => d,
                None => rotor_diameter_for(rp, w)?,
            },
            None => 0.0,
        };
        Ok(InstalledDevice {
            spec,
            rp,
            cap: design.storage_cap_of(id),
            rotor_diameter,
            tilt: design.tilt.get(id).copied().unwrap_or(0.0),
            chp,
            xi_max,
        })
    }

    pub fn id(&self) -> &str {
        &self.spec.id
    }

    pub fn kind(&self) -> EquipmentKind {
        self.spec.kind
    }

    /// Operating polygon scaled to the installed rating.
    pub fn chp(&self) -> Option<&ChpPhysics> {
        self.chp.as_ref()
    }

    /// Largest methanation extent, mol/h (zero for other devices).
    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    /// Lower and upper electric output while committed.
    pub fn committed_range(&self) -> (f64, f64) {
        match &self.chp {
            Some(c) => c.power_range(),
            None => (self.spec.min_load * self.rp, self.spec.max_load * self.rp),
        }
    }

    /// Weather-limited output in MW for wind farms and solar arrays, `None`
    /// for other devices.
    pub fn availability(&self, w: &WeatherHour) -> Result<Option<f64>> {
        match &self.spec.physics {
            Physics::Wind(p) => {
                let v = shear_wind_speed(w.v_anemometer, p.z_anemometer, p.z_hub, p.alpha)?;
                Ok(Some(wind_power(v, self.rotor_diameter, p).min(self.rp)))
            }
            Physics::Solar(p) => {
                let sh = solar_hour(w, self.tilt, p)?;
                Ok(Some(
                    pv_power(sh.irradiance.g_beta, sh.efficiency, p).min(self.rp),
                ))
            }
            _ => Ok(None),
        }
    }

    /// Resource flows implied by an operating point.
    pub fn flows(&self, op: &OperatingPoint) -> ResourceFlows {
        let mut f = ResourceFlows::default();
        let ef = self.spec.emission_factor();
        match &self.spec.physics {
            Physics::Wind(_) | Physics::Solar(_) => {
                f.gen.electricity = op.power;
                f.gen.co2 = ef * op.power;
            }
            Physics::Linear(l) => {
                f.gen.electricity = op.power;
                f.gen.co2 = ef * op.power;
                let fuel = match l.fuel {
                    crate::catalog::Fuel::Coal => Resource::Coal,
                    crate::catalog::Fuel::Biomass => Resource::Biomass,
                };
                f.con[fuel] = l.fuel_per_mwh * op.power;
            }
            Physics::Conventional(c) => {
                f.gen.electricity = op.power;
                if op.on {
                    f.gen.co2 = cvt_emission(op.power, c);
                }
            }
            Physics::Chp(_) => {
                f.gen.electricity = op.power;
                f.gen.heat = op.heat;
                f.gen.co2 = ef * op.power;
            }
            Physics::Storage(_) => {
                f.gen.electricity = op.discharge;
                f.con.electricity = op.charge;
            }
            Physics::HeatPump(hp) => {
                f.gen.heat = op.heat;
                f.con.electricity = op.heat / hp.cop;
            }
            Physics::P2g(p) => {
                if op.on {
                    if let Ok(flows) = p2g_flows_bounded(op.xi, f64::INFINITY, p) {
                        f = flows;
                    }
                }
            }
        }
        f
    }
}

/// Installed devices in catalog order.
pub fn installed_devices<'a>(
    design: &Design,
    catalog: &'a Catalog,
) -> Result<Vec<InstalledDevice<'a>>> {
    catalog
        .iter()
        .filter(|s| design.is_installed(&s.id))
        .map(|s| InstalledDevice::new(s, design))
        .collect()
}
