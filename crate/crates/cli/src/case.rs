//! Case presets and assembly of a problem from files or bundled data.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use memg_core::catalog::{default_catalog, load_catalog};
use memg_core::scenarios::{
    build_scenarios, default_demand, default_rows, default_weather, filter_scenarios, load_demand,
    load_rows, load_weather_dir, Policy, ScenarioFilter, SngDemand, SNG_DENSITY_KG_M3,
};
use memg_core::solver::{Mode, Problem, SolverOptions};

use crate::error::{CliError, Result};

/// Mandatory SNG sale of the second case, t/h.
pub const CASE2_SNG_RATE: f64 = 0.25;

/// Renewables whose installation the third case makes obligatory.
pub const CASE3_FORCED: [&str; 4] = ["WT-1", "WT-2", "SPA-1", "SPA-2"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Case1,
    Case2,
    Case3,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySelection {
    Trade,
    Tax,
    #[default]
    Both,
}

impl PolicySelection {
    pub fn filter(self) -> ScenarioFilter {
        match self {
            PolicySelection::Trade => ScenarioFilter::Policy(Policy::CapAndTrade),
            PolicySelection::Tax => ScenarioFilter::Policy(Policy::EmissionTax),
            PolicySelection::Both => ScenarioFilter::All,
        }
    }
}

/// One batch run. Paths left empty fall back to the bundled data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseConfig {
    pub case: Case,
    #[serde(default)]
    pub policy: PolicySelection,
    #[serde(default)]
    pub catalog: Option<PathBuf>,
    /// Directory with `winter.csv`, `spring.csv`, `summer.csv`, `autumn.csv`.
    #[serde(default)]
    pub weather: Option<PathBuf>,
    #[serde(default)]
    pub demand: Option<PathBuf>,
    /// JSON list of scenario rows replacing the bundled table.
    #[serde(default)]
    pub scenario_table: Option<PathBuf>,
    /// Restrict the catalog to these ids.
    #[serde(default)]
    pub candidates: Option<Vec<String>>,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub options: SolverOptions,
    pub out: PathBuf,
}

impl CaseConfig {
    pub fn new(case: Case, out: impl Into<PathBuf>) -> Self {
        CaseConfig {
            case,
            policy: PolicySelection::Both,
            catalog: None,
            weather: None,
            demand: None,
            scenario_table: None,
            candidates: None,
            deterministic: false,
            options: SolverOptions::default(),
            out: out.into(),
        }
    }

    /// Options after the case presets are applied.
    pub fn effective_options(&self) -> SolverOptions {
        let mut o = self.options.clone();
        if self.case == Case::Case3 {
            for id in CASE3_FORCED {
                if !o.force_install.iter().any(|f| f == id) {
                    o.force_install.push(id.to_string());
                }
            }
            o.force_install.sort();
        }
        if self.deterministic {
            o.mode = Mode::Deterministic;
        }
        o
    }

    pub fn build_problem(&self) -> Result<Problem> {
        let mut catalog = match &self.catalog {
            Some(p) => load_catalog(p)?,
            None => default_catalog(),
        };
        if let Some(ids) = &self.candidates {
            let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
            catalog = catalog.restrict(&ids)?;
        }
        let weather = match &self.weather {
            Some(dir) => load_weather_dir(dir)?,
            None => default_weather(),
        };
        let rows = match &self.scenario_table {
            Some(p) => load_rows(p)?,
            None => default_rows(),
        };
        let all = build_scenarios(&weather, &rows, SNG_DENSITY_KG_M3)?;
        let scenarios = filter_scenarios(&all, self.policy.filter())?;
        let mut demand = match &self.demand {
            Some(p) => load_demand(p)?,
            None => default_demand(),
        };
        if self.case == Case::Case2 {
            demand = demand.with_sng_mode(SngDemand::Mandatory {
                rate: CASE2_SNG_RATE,
            });
        }
        let problem = Problem::new(catalog, scenarios, demand);
        problem.validate()?;
        let options = self.effective_options();
        options.validate()?;
        for id in &options.force_install {
            if problem.catalog.get(id).is_none() {
                return Err(CliError::Config(format!(
                    "forced install `{id}` is not in the catalog"
                )));
            }
        }
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let c = CaseConfig::new(Case::Case2, "x");
        let p = c.build_problem().unwrap();
        assert_eq!(p.demand.sng_mode, SngDemand::Mandatory { rate: 0.25 });
        assert_eq!(p.scenarios.len(), 32);

        let mut c = CaseConfig::new(Case::Case3, "x");
        c.options.force_install = vec!["WT-1".into(), "HP".into()];
        assert_eq!(
            c.effective_options().force_install,
            ["HP", "SPA-1", "SPA-2", "WT-1", "WT-2"]
        );

        let mut c = CaseConfig::new(Case::Case1, "x");
        c.policy = PolicySelection::Trade;
        let p = c.build_problem().unwrap();
        assert_eq!(p.scenarios.len(), 16);
        assert!(p.scenarios.iter().all(|s| s.policy == Policy::CapAndTrade));
        assert!((p.scenarios.iter().map(|s| s.probability).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forced_ids_must_exist() {
        let mut c = CaseConfig::new(Case::Case3, "x");
        c.candidates = Some(vec!["CVT-1".into(), "HP".into()]);
        assert!(matches!(c.build_problem(), Err(CliError::Config(_))));
    }
}
