//! JSON and CSV outputs of a run.
//!
//! Every CSV has one row per scenario and hour, in the order the scenarios
//! were solved. Device columns follow the sorted ids of the installed set.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use memg_core::model::{CostReport, Dispatch};
use memg_core::scenarios::{co2_cap, Policy, Scenario};
use memg_core::solver::{Problem, Solution, SolverOptions, Status};

use crate::case::{Case, PolicySelection};
use crate::error::{CliError, Result};

pub const SOLUTION_FILE: &str = "solution.json";
pub const REPORT_FILE: &str = "cost_report.json";
pub const GENERATION_CSV: &str = "generation.csv";
pub const HEAT_CSV: &str = "heat.csv";
pub const EXCESS_CO2_CSV: &str = "excess_co2.csv";
pub const CAP_CSV: &str = "cap.csv";
pub const TRADING_CSV: &str = "trading.csv";
pub const SNG_CSV: &str = "sng.csv";

pub const CSV_FILES: [&str; 6] = [
    GENERATION_CSV,
    HEAT_CSV,
    EXCESS_CO2_CSV,
    CAP_CSV,
    TRADING_CSV,
    SNG_CSV,
];

/// Contents of `solution.json`: the instance, the settings and the result,
/// enough to re-evaluate the design elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub case: Case,
    pub policy: PolicySelection,
    pub deterministic: bool,
    pub problem: Problem,
    pub options: SolverOptions,
    pub solution: Solution,
}

/// Contents of `cost_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub status: Status,
    pub installed: Vec<String>,
    pub first_stage: f64,
    pub report: CostReport,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(dir: &Path, name: &str, header: &[String]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(header)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Table {
            path: dir.join(name),
            writer,
        })
    }

    fn row(
        &mut self,
        scenario: &str,
        hour: usize,
        values: impl IntoIterator<Item = String>,
    ) -> Result<()> {
        let mut rec = vec![scenario.to_string(), (hour + 1).to_string()];
        rec.extend(values);
        self.writer
            .write_record(&rec)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    fn finish(self) -> Result<()> {
        let bytes = self
            .writer
            .into_inner()
            .map_err(|e| CliError::Config(e.to_string()))?;
        fs::write(&self.path, bytes).map_err(|e| CliError::io(&self.path, e))
    }
}

fn header(lead: &[&str], rest: impl IntoIterator<Item = String>) -> Vec<String> {
    lead.iter().map(|s| s.to_string()).chain(rest).collect()
}

fn num(v: f64) -> String {
    // -0 would otherwise print as "-0"
    if v == 0.0 {
        "0".into()
    } else {
        v.to_string()
    }
}

/// Writes the hourly series of `dispatches`, which must line up with
/// `scenarios`.
pub fn write_series(
    dir: &Path,
    problem: &Problem,
    installed: &[String],
    scenarios: &[Scenario],
    dispatches: &[Dispatch],
) -> Result<()> {
    if scenarios.len() != dispatches.len() {
        return Err(CliError::Config(format!(
            "{} dispatches for {} scenarios",
            dispatches.len(),
            scenarios.len()
        )));
    }
    let ids = || installed.iter().cloned();
    let mut gen = Table::new(
        dir,
        GENERATION_CSV,
        &header(
            &["scenario", "hour"],
            ids().chain(["curtailed".into(), "demand".into()]),
        ),
    )?;
    let mut heat = Table::new(
        dir,
        HEAT_CSV,
        &header(
            &["scenario", "hour"],
            ids().chain(["surplus".into(), "demand".into()]),
        ),
    )?;
    let mut excess = Table::new(
        dir,
        EXCESS_CO2_CSV,
        &header(&["scenario", "hour", "policy", "excess_co2"], []),
    )?;
    let mut cap = Table::new(
        dir,
        CAP_CSV,
        &header(&["scenario", "hour", "cap_power", "cap"], []),
    )?;
    let mut trading = Table::new(
        dir,
        TRADING_CSV,
        &header(
            &[
                "scenario",
                "hour",
                "policy",
                "co2_price",
                "allowance_balance",
                "cost",
                "revenue",
            ],
            [],
        ),
    )?;
    let mut sng = Table::new(
        dir,
        SNG_CSV,
        &header(
            &[
                "scenario",
                "hour",
                "generated",
                "consumed",
                "sold",
                "required",
            ],
            [],
        ),
    )?;

    for (s, d) in scenarios.iter().zip(dispatches) {
        let policy = match s.policy {
            Policy::CapAndTrade => "trade",
            Policy::EmissionTax => "tax",
        };
        for t in 0..problem.demand.hours() {
            let demand = problem.demand.at(t);
            let Some(h) = d.hours.get(t) else {
                // Infeasible scenarios carry no dispatch; keep the row count.
                let blank = || std::iter::repeat_n(String::new(), installed.len() + 2);
                gen.row(&s.id, t, blank())?;
                heat.row(&s.id, t, blank())?;
                excess.row(&s.id, t, [policy.to_string(), String::new()])?;
                cap.row(&s.id, t, [String::new(), String::new()])?;
                trading.row(
                    &s.id,
                    t,
                    [
                        policy.to_string(),
                        num(s.co2_price),
                        String::new(),
                        String::new(),
                        String::new(),
                    ],
                )?;
                sng.row(
                    &s.id,
                    t,
                    std::iter::repeat_n(String::new(), 3).chain([num(demand.sng)]),
                )?;
                continue;
            };
            let per = |f: &dyn Fn(&memg_core::model::DeviceHour) -> f64| -> Vec<String> {
                installed
                    .iter()
                    .map(|id| num(h.device(id).map_or(0.0, f)))
                    .collect()
            };
            gen.row(
                &s.id,
                t,
                per(&|x| x.flows.gen.electricity)
                    .into_iter()
                    .chain([num(h.spin.electricity), num(demand.electricity)]),
            )?;
            heat.row(
                &s.id,
                t,
                per(&|x| x.flows.gen.heat)
                    .into_iter()
                    .chain([num(h.spin.heat), num(demand.heat)]),
            )?;
            excess.row(&s.id, t, [policy.to_string(), num(h.excess.co2)])?;
            let cp = h.cap_power(&problem.catalog);
            let allowance = co2_cap(cp);
            cap.row(&s.id, t, [num(cp), num(allowance)])?;
            let (balance, net) = match s.policy {
                Policy::CapAndTrade => (
                    h.excess.co2 - allowance,
                    (h.excess.co2 - allowance) * s.co2_price,
                ),
                Policy::EmissionTax => (h.excess.co2, h.excess.co2 * s.co2_price),
            };
            trading.row(
                &s.id,
                t,
                [
                    policy.to_string(),
                    num(s.co2_price),
                    num(balance),
                    num(net.max(0.0)),
                    num((-net).max(0.0)),
                ],
            )?;
            let g = h.total_gen().sng;
            let c = h.total_con().sng;
            sng.row(&s.id, t, [num(g), num(c), num(g - c), num(demand.sng)])?;
        }
    }
    for table in [gen, heat, excess, cap, trading, sng] {
        table.finish()?;
    }
    Ok(())
}
