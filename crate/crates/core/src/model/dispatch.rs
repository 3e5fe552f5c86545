use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::devices::OperatingPoint;
use crate::resource::{Resource, ResourceFlows, ResourceVec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceHour {
    pub id: String,
    pub op: OperatingPoint,
    pub flows: ResourceFlows,
}

/// Second-stage decisions of one hour. `purchase` is u, `excess` is yx and
/// `spin` is the free curtailment slack of the balance.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HourDispatch {
    pub devices: Vec<DeviceHour>,
    pub purchase: ResourceVec,
    pub excess: ResourceVec,
    pub spin: ResourceVec,
}

impl HourDispatch {
    pub fn total_gen(&self) -> ResourceVec {
        let mut v = ResourceVec::default();
        for d in &self.devices {
            v += &d.flows.gen;
        }
        v
    }

    pub fn total_con(&self) -> ResourceVec {
        let mut v = ResourceVec::default();
        for d in &self.devices {
            v += &d.flows.con;
        }
        v
    }

    /// Output in MW of the devices whose generation earns CO₂ allowance.
    pub fn cap_power(&self, catalog: &Catalog) -> f64 {
        self.devices
            .iter()
            .filter(|d| {
                catalog
                    .get(&d.id)
                    .is_some_and(|s| s.kind.counts_toward_cap())
            })
            .map(|d| d.op.power)
            .sum()
    }

    pub fn device(&self, id: &str) -> Option<&DeviceHour> {
        self.devices.iter().find(|d| d.id == id)
    }
}

/// Dispatch of one scenario over the horizon.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dispatch {
    pub scenario: String,
    pub hours: Vec<HourDispatch>,
}

/// Unmet requirement found while closing an hourly balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shortfall {
    pub resource: Resource,
    pub amount: f64,
}

/// Closes the hourly balance: fuels are bought, net CO₂ becomes excess and
/// surplus electricity, heat and SNG go to the slack.
pub fn assemble_hour(
    devices: Vec<DeviceHour>,
    demand: &ResourceVec,
    tol: f64,
) -> std::result::Result<HourDispatch, Shortfall> {
    let mut h = HourDispatch {
        devices,
        ..HourDispatch::default()
    };
    let gen = h.total_gen();
    let con = h.total_con();
    for r in Resource::ALL {
        let net = gen[r] - con[r] - demand[r];
        match r {
            Resource::Coal | Resource::Biomass => h.purchase[r] = (-net).max(0.0),
            Resource::Co2 => {
                if net < -tol {
                    return Err(Shortfall {
                        resource: r,
                        amount: -net,
                    });
                }
                h.excess[r] = net.max(0.0);
            }
            Resource::Electricity | Resource::Heat | Resource::Sng => {
                if net < -tol {
                    return Err(Shortfall {
                        resource: r,
                        amount: -net,
                    });
                }
                h.spin[r] = net.max(0.0);
            }
        }
    }
    Ok(h)
}
