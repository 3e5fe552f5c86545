//! Side-by-side comparison of two runs and cross-evaluation of their designs.

use serde::{Deserialize, Serialize};

use memg_core::model::{CostReport, Design};
use memg_core::solver::evaluate_design;

use crate::artifacts::RunRecord;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquipmentRow {
    pub id: String,
    pub installed_a: bool,
    pub installed_b: bool,
    pub rated_power_a: f64,
    pub rated_power_b: f64,
    /// b minus a, MW.
    pub rated_power_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub a: f64,
    pub b: f64,
    /// b minus a.
    pub delta: f64,
}

impl Pair {
    fn new(a: f64, b: f64) -> Self {
        Pair { a, b, delta: b - a }
    }
}

/// TAC terms, annualised, in $/yr. Second-stage terms are expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostDeltas {
    pub annualized_capital: Pair,
    pub maintenance: Pair,
    pub operational: Pair,
    pub trading: Pair,
    pub tax: Pair,
    pub revenue: Pair,
    pub tac: Pair,
}

/// TAC of each design under each run's scenario set. `None` marks a design
/// with no feasible dispatch in some scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEvaluation {
    pub design_a_under_a: Option<f64>,
    pub design_a_under_b: Option<f64>,
    pub design_b_under_a: Option<f64>,
    pub design_b_under_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub equipment: Vec<EquipmentRow>,
    pub only_in_a: Vec<String>,
    pub only_in_b: Vec<String>,
    pub costs: CostDeltas,
    pub cross: CrossEvaluation,
}

fn expected(r: &CostReport, f: impl Fn(&memg_core::model::ScenarioCost) -> f64) -> f64 {
    r.scenarios.iter().map(|s| s.probability * f(s)).sum()
}

fn check_compatible(a: &RunRecord, b: &RunRecord) -> Result<()> {
    let (pa, pb) = (&a.problem, &b.problem);
    if pa.catalog != pb.catalog {
        return Err(CliError::IncompatibleInstances(
            "the catalogs differ".into(),
        ));
    }
    if pa.demand != pb.demand {
        return Err(CliError::IncompatibleInstances(
            "the demand profiles differ".into(),
        ));
    }
    if pa.economics != pb.economics {
        return Err(CliError::IncompatibleInstances(
            "the economic parameters differ".into(),
        ));
    }
    Ok(())
}

fn finite(r: &CostReport) -> Option<f64> {
    r.tac.is_finite().then_some(r.tac)
}

fn cross_tac(design: &Design, run: &RunRecord) -> Result<Option<f64>> {
    Ok(finite(&evaluate_design(
        design,
        &run.problem,
        &run.options,
    )?))
}

pub fn compare(a: &RunRecord, b: &RunRecord) -> Result<Comparison> {
    check_compatible(a, b)?;
    let (da, db) = (&a.solution.design, &b.solution.design);
    let mut equipment = Vec::new();
    let (mut only_in_a, mut only_in_b) = (Vec::new(), Vec::new());
    for spec in a.problem.catalog.iter() {
        let id = spec.id.clone();
        let (ia, ib) = (da.is_installed(&id), db.is_installed(&id));
        match (ia, ib) {
            (true, false) => only_in_a.push(id.clone()),
            (false, true) => only_in_b.push(id.clone()),
            _ => {}
        }
        let (ra, rb) = (da.rated_power_of(&id), db.rated_power_of(&id));
        equipment.push(EquipmentRow {
            id,
            installed_a: ia,
            installed_b: ib,
            rated_power_a: ra,
            rated_power_b: rb,
            rated_power_delta: rb - ra,
        });
    }
    equipment.sort_by(|x, y| x.id.cmp(&y.id));
    only_in_a.sort();
    only_in_b.sort();

    let (ra, rb) = (&a.solution.report, &b.solution.report);
    let term =
        |f: fn(&memg_core::model::ScenarioCost) -> f64| Pair::new(expected(ra, f), expected(rb, f));
    let costs = CostDeltas {
        annualized_capital: Pair::new(ra.crf * ra.capital, rb.crf * rb.capital),
        maintenance: Pair::new(ra.maintenance, rb.maintenance),
        operational: term(|s| s.operational),
        trading: term(|s| s.trading),
        tax: term(|s| s.tax),
        revenue: term(|s| s.revenue),
        tac: Pair::new(ra.tac, rb.tac),
    };
    let cross = CrossEvaluation {
        design_a_under_a: cross_tac(da, a)?,
        design_a_under_b: cross_tac(da, b)?,
        design_b_under_a: cross_tac(db, a)?,
        design_b_under_b: cross_tac(db, b)?,
    };
    Ok(Comparison {
        equipment,
        only_in_a,
        only_in_b,
        costs,
        cross,
    })
}
