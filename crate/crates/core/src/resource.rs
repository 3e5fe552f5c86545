//! Resources exchanged inside the microgrid and a fixed-size per-resource vector.

use std::fmt;
use std::ops::{AddAssign, Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Electricity and heat are in MW; all material flows are in t/h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    Electricity,
    Heat,
    Sng,
    Co2,
    Coal,
    Biomass,
}

impl Resource {
    pub const ALL: [Resource; 6] = [
        Resource::Electricity,
        Resource::Heat,
        Resource::Sng,
        Resource::Co2,
        Resource::Coal,
        Resource::Biomass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Resource::Electricity => "electricity",
            Resource::Heat => "heat",
            Resource::Sng => "sng",
            Resource::Co2 => "co2",
            Resource::Coal => "coal",
            Resource::Biomass => "biomass",
        }
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceVec {
    pub electricity: f64,
    pub heat: f64,
    pub sng: f64,
    pub co2: f64,
    pub coal: f64,
    pub biomass: f64,
}

impl ResourceVec {
    pub fn iter(&self) -> impl Iterator<Item = (Resource, f64)> + '_ {
        Resource::ALL.into_iter().map(move |r| (r, self[r]))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.iter().all(|(_, v)| v >= 0.0)
    }
}

impl Index<Resource> for ResourceVec {
    type Output = f64;

    fn index(&self, r: Resource) -> &f64 {
        match r {
            Resource::Electricity => &self.electricity,
            Resource::Heat => &self.heat,
            Resource::Sng => &self.sng,
            Resource::Co2 => &self.co2,
            Resource::Coal => &self.coal,
            Resource::Biomass => &self.biomass,
        }
    }
}

impl IndexMut<Resource> for ResourceVec {
    fn index_mut(&mut self, r: Resource) -> &mut f64 {
        match r {
            Resource::Electricity => &mut self.electricity,
            Resource::Heat => &mut self.heat,
            Resource::Sng => &mut self.sng,
            Resource::Co2 => &mut self.co2,
            Resource::Coal => &mut self.coal,
            Resource::Biomass => &mut self.biomass,
        }
    }
}

impl AddAssign<&ResourceVec> for ResourceVec {
    fn add_assign(&mut self, rhs: &ResourceVec) {
        for r in Resource::ALL {
            self[r] += rhs[r];
        }
    }
}

/// Generation and consumption of one device in one hour.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceFlows {
    pub gen: ResourceVec,
    pub con: ResourceVec,
}

impl ResourceFlows {
    pub fn is_nonnegative(&self) -> bool {
        self.gen.is_nonnegative() && self.con.is_nonnegative()
    }
}
