//! Deterministic equivalent of the two-stage design problem: design and
//! dispatch records, exact cost accounting and constraint checking.

mod cost;
mod design;
mod dispatch;
mod feasibility;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::resource::Resource;

pub use cost::{
    capital_cost, carbon_trading_cost, crf, emission_tax_cost, maintenance_cost, operational_cost,
    scenario_cost, sng_revenue, total_annualized_cost, CostReport, ScenarioCost,
};
pub use design::{installed_devices, Design, InstalledDevice};
pub use dispatch::{assemble_hour, DeviceHour, Dispatch, HourDispatch, Shortfall};
pub use feasibility::{check_design, check_feasibility, Violation};

/// Annualisation and market parameters shared by every scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Economics {
    pub interest_rate: f64,
    pub lifetime_years: f64,
    pub days_per_year: f64,
    /// Upper bound on the number of installed devices.
    pub max_installed: usize,
    /// $/t, bought for the IGCC units.
    pub coal_price: f64,
    /// $/t, bought for the biomass units.
    pub biomass_price: f64,
}

impl Default for Economics {
    fn default() -> Self {
        Economics {
            interest_rate: 0.15,
            lifetime_years: 20.0,
            days_per_year: 365.0,
            max_installed: 9,
            coal_price: 80.0,
            biomass_price: 35.0,
        }
    }
}

impl Economics {
    pub fn crf(&self) -> Result<f64> {
        crf(self.interest_rate, self.lifetime_years)
    }

    /// Price of a resource that may be bought from outside; `None` for
    /// resources that must be produced on site.
    pub fn purchase_price(&self, r: Resource) -> Option<f64> {
        match r {
            Resource::Coal => Some(self.coal_price),
            Resource::Biomass => Some(self.biomass_price),
            _ => None,
        }
    }
}

/// Balance and bound tolerance in MW or t/h.
pub const DEFAULT_TOL: f64 = 1e-6;
