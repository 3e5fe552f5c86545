use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, Physics};
use crate::devices::{chp_cost_unchecked, cvt_cost};
use crate::error::{Error, Result};
use crate::model::{Design, Dispatch, Economics};
use crate::resource::Resource;
use crate::scenarios::{co2_cap, Policy, Scenario};

/// Capital recovery factor.
pub fn crf(interest: f64, lifetime: f64) -> Result<f64> {
    if !(interest > 0.0 && interest.is_finite()) {
        return Err(Error::Domain(format!(
            "interest rate must be positive, got {interest}"
        )));
    }
    if !(lifetime >= 1.0) {
        return Err(Error::Domain(format!(
            "lifetime must be at least one year, got {lifetime}"
        )));
    }
    let g = (1.0 + interest).powf(lifetime);
    Ok(interest * g / (g - 1.0))
}

/// Installation cost in $.
pub fn capital_cost(design: &Design, catalog: &Catalog) -> f64 {
    catalog
        .iter()
        .filter(|s| design.is_installed(&s.id))
        .map(|s| {
            let mut c = s.psi0 * 1e6 * design.rated_power_of(&s.id) + s.gamma0;
            if s.is_storage() {
                c += s.omega0 * design.storage_cap_of(&s.id);
            }
            c
        })
        .sum()
}

/// Maintenance cost in $/yr.
pub fn maintenance_cost(design: &Design, catalog: &Catalog) -> f64 {
    catalog
        .iter()
        .filter(|s| design.is_installed(&s.id))
        .map(|s| {
            let mut c = s.psik * design.rated_power_of(&s.id) + s.gammak;
            if s.is_storage() {
                c += s.omegak * design.storage_cap_of(&s.id);
            }
            c
        })
        .sum()
}

/// Purchases, CHP and coal-unit fuel and CO₂ capture, $/yr.
pub fn operational_cost(dispatch: &Dispatch, catalog: &Catalog, econ: &Economics) -> f64 {
    let mut daily = 0.0;
    for h in &dispatch.hours {
        for r in Resource::ALL {
            if let Some(price) = econ.purchase_price(r) {
                daily += h.purchase[r] * price;
            }
        }
        for d in &h.devices {
            let Some(spec) = catalog.get(&d.id) else {
                continue;
            };
            match &spec.physics {
                Physics::Chp(c) if d.op.on => daily += chp_cost_unchecked(d.op.power, d.op.heat, c),
                Physics::Conventional(c) if d.op.on => daily += cvt_cost(d.op.power, c),
                Physics::P2g(p) => daily += d.flows.con.co2 * p.cc,
                _ => {}
            }
        }
    }
    econ.days_per_year * daily
}

fn days(econ: Option<&Economics>) -> f64 {
    econ.map_or(365.0, |e| e.days_per_year)
}

/// Cost of buying allowance beyond the cap, negative when surplus
/// allowance is sold, $/yr.
pub fn carbon_trading_cost(
    dispatch: &Dispatch,
    scenario: &Scenario,
    catalog: &Catalog,
) -> Result<f64> {
    trading_cost_with(dispatch, scenario, catalog, None)
}

fn trading_cost_with(
    dispatch: &Dispatch,
    scenario: &Scenario,
    catalog: &Catalog,
    econ: Option<&Economics>,
) -> Result<f64> {
    if scenario.policy != Policy::CapAndTrade {
        return Err(Error::PolicyMismatch {
            scenario: scenario.id.clone(),
            expected: Policy::CapAndTrade.name(),
        });
    }
    let mut sum = 0.0;
    for h in &dispatch.hours {
        sum += days(econ) * (h.excess.co2 - co2_cap(h.cap_power(catalog))) * scenario.co2_price;
    }
    Ok(sum)
}

/// Tax on every emitted tonne, $/yr.
pub fn emission_tax_cost(dispatch: &Dispatch, scenario: &Scenario) -> Result<f64> {
    tax_cost_with(dispatch, scenario, None)
}

fn tax_cost_with(
    dispatch: &Dispatch,
    scenario: &Scenario,
    econ: Option<&Economics>,
) -> Result<f64> {
    if scenario.policy != Policy::EmissionTax {
        return Err(Error::PolicyMismatch {
            scenario: scenario.id.clone(),
            expected: Policy::EmissionTax.name(),
        });
    }
    let mut sum = 0.0;
    for h in &dispatch.hours {
        sum += days(econ) * h.excess.co2 * scenario.co2_price;
    }
    Ok(sum)
}

/// Sales of SNG produced by P2G units, $/yr.
pub fn sng_revenue(dispatch: &Dispatch, scenario: &Scenario, catalog: &Catalog) -> f64 {
    revenue_with(dispatch, scenario, catalog, None)
}

fn revenue_with(
    dispatch: &Dispatch,
    scenario: &Scenario,
    catalog: &Catalog,
    econ: Option<&Economics>,
) -> f64 {
    let mut sum = 0.0;
    for h in &dispatch.hours {
        let gen: f64 = h
            .devices
            .iter()
            .filter(|d| catalog.get(&d.id).is_some_and(|s| s.p2g().is_some()))
            .map(|d| d.flows.gen.sng)
            .sum();
        sum += days(econ) * scenario.sng_price * gen;
    }
    sum
}

/// Second-stage cost terms of one scenario, all in $/yr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCost {
    pub scenario: String,
    pub probability: f64,
    #[serde(with = "nonfinite")]
    pub operational: f64,
    #[serde(with = "nonfinite")]
    pub trading: f64,
    #[serde(with = "nonfinite")]
    pub tax: f64,
    #[serde(with = "nonfinite")]
    pub revenue: f64,
}

impl ScenarioCost {
    pub fn net(&self) -> f64 {
        self.operational + self.trading + self.tax - self.revenue
    }

    pub(crate) fn infeasible(scenario: &Scenario) -> Self {
        ScenarioCost {
            scenario: scenario.id.clone(),
            probability: scenario.probability,
            operational: f64::INFINITY,
            trading: 0.0,
            tax: 0.0,
            revenue: 0.0,
        }
    }
}

pub fn scenario_cost(
    dispatch: &Dispatch,
    scenario: &Scenario,
    catalog: &Catalog,
    econ: &Economics,
) -> Result<ScenarioCost> {
    let (trading, tax) = match scenario.policy {
        Policy::CapAndTrade => (
            trading_cost_with(dispatch, scenario, catalog, Some(econ))?,
            0.0,
        ),
        Policy::EmissionTax => (0.0, tax_cost_with(dispatch, scenario, Some(econ))?),
    };
    Ok(ScenarioCost {
        scenario: scenario.id.clone(),
        probability: scenario.probability,
        operational: operational_cost(dispatch, catalog, econ),
        trading,
        tax,
        revenue: revenue_with(dispatch, scenario, catalog, Some(econ)),
    })
}

/// Annualised cost decomposition of a design and its dispatches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub crf: f64,
    /// $.
    pub capital: f64,
    /// $/yr.
    pub maintenance: f64,
    pub scenarios: Vec<ScenarioCost>,
    #[serde(with = "nonfinite")]
    pub expected_second_stage: f64,
    #[serde(with = "nonfinite")]
    pub tac: f64,
    pub feasible: bool,
}

impl CostReport {
    pub(crate) fn assemble(
        crf: f64,
        capital: f64,
        maintenance: f64,
        scenarios: Vec<ScenarioCost>,
    ) -> Self {
        let expected_second_stage: f64 = scenarios.iter().map(|s| s.probability * s.net()).sum();
        let tac = crf * capital + maintenance + expected_second_stage;
        CostReport {
            crf,
            capital,
            maintenance,
            feasible: tac.is_finite(),
            scenarios,
            expected_second_stage,
            tac,
        }
    }

    /// `|tac − (crf·capital + maintenance + Σ π·net)| / max(1, |tac|)`.
    pub fn identity_residual(&self) -> f64 {
        let second: f64 = self.scenarios.iter().map(|s| s.probability * s.net()).sum();
        let rhs = self.crf * self.capital + self.maintenance + second;
        (self.tac - rhs).abs() / self.tac.abs().max(1.0)
    }

    pub fn first_stage(&self) -> f64 {
        self.crf * self.capital + self.maintenance
    }
}

pub fn total_annualized_cost(
    design: &Design,
    dispatches: &[Dispatch],
    scenarios: &[Scenario],
    catalog: &Catalog,
    econ: &Economics,
) -> Result<CostReport> {
    if dispatches.len() != scenarios.len() {
        return Err(Error::Domain(format!(
            "{} dispatches for {} scenarios",
            dispatches.len(),
            scenarios.len()
        )));
    }
    let per = scenarios
        .iter()
        .zip(dispatches)
        .map(|(s, d)| scenario_cost(d, s, catalog, econ))
        .collect::<Result<Vec<_>>>()?;
    Ok(CostReport::assemble(
        econ.crf()?,
        capital_cost(design, catalog),
        maintenance_cost(design, catalog),
        per,
    ))
}

/// Non-finite values travel as `null` and come back as +∞.
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
