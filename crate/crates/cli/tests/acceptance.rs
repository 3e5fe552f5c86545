//! Acceptance checks. Runs without the test harness so every criterion
//! prints one PASS or FAIL line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use memg_cli::{run_case, Case, CaseConfig, PolicySelection};
use memg_core::catalog::{default_catalog, EquipmentKind, Physics};
use memg_core::devices::{
    battery_step, chp_feasible, equilibrium_residual_relative, rotor_diameter_for,
    sabatier_max_extent, species_at_extent, wind_power, OperatingPoint, M_CH4,
};
use memg_core::environment::{diffuse_fraction, tilted_irradiance, WeatherHour};
use memg_core::model::{
    assemble_hour, carbon_trading_cost, check_feasibility, crf, emission_tax_cost,
    installed_devices, total_annualized_cost, Design, DeviceHour, Dispatch, Economics,
};
use memg_core::scenarios::{
    averaged_scenario, default_scenarios, DemandProfile, Policy, Scenario, Season,
};
use memg_core::solver::{
    brute_force_oracle, evaluate_design, solve_design, GridSpec, Problem, Solution, SolverOptions,
};
use memg_core::Error;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Every solution produced below, for the cost-identity criterion.
#[derive(Default)]
struct Collected {
    solutions: Vec<(String, Problem, Vec<Scenario>, Solution)>,
}

impl Collected {
    fn add(&mut self, label: &str, p: &Problem, scenarios: &[Scenario], s: &Solution) {
        self.solutions
            .push((label.to_string(), p.clone(), scenarios.to_vec(), s.clone()));
    }
}

// ---------------------------------------------------------------------------

fn crf_value() -> Outcome {
    let v = crf(0.15, 20.0).map_err(|e| e.to_string())?;
    check((v - 0.15976).abs() <= 1e-4, format!("CRF = {v}"))?;
    Ok(format!("CRF(0.15, 20) = {v:.6}"))
}

fn scenario_table() -> Outcome {
    use Policy::{CapAndTrade as T, EmissionTax as X};
    use Season::{Autumn as Au, Spring as Sp, Summer as Su, Winter as Wi};
    let expected: [(Season, Policy, f64, f64); 32] = [
        (Wi, T, 50.0, 0.86),
        (Wi, T, 100.0, 0.86),
        (Wi, X, 50.0, 0.86),
        (Wi, X, 100.0, 0.86),
        (Sp, T, 50.0, 0.86),
        (Sp, T, 100.0, 0.86),
        (Sp, X, 50.0, 0.86),
        (Sp, X, 100.0, 0.86),
        (Su, T, 50.0, 0.86),
        (Su, T, 100.0, 0.86),
        (Su, X, 50.0, 0.86),
        (Su, X, 100.0, 0.86),
        (Au, T, 50.0, 0.86),
        (Au, T, 100.0, 0.86),
        (Au, X, 50.0, 0.86),
        (Au, X, 100.0, 0.86),
        (Wi, T, 50.0, 1.72),
        (Sp, X, 100.0, 1.72),
        (Su, T, 50.0, 1.72),
        (Au, X, 100.0, 1.72),
        (Wi, X, 50.0, 1.72),
        (Sp, T, 100.0, 1.72),
        (Su, X, 50.0, 1.72),
        (Au, T, 100.0, 1.72),
        (Wi, X, 100.0, 1.72),
        (Sp, T, 50.0, 1.72),
        (Su, X, 100.0, 1.72),
        (Au, T, 50.0, 1.72),
        (Wi, T, 100.0, 1.72),
        (Sp, X, 50.0, 1.72),
        (Su, T, 100.0, 1.72),
        (Au, X, 50.0, 1.72),
    ];
    let set = default_scenarios();
    check(set.len() == 32, format!("{} scenarios", set.len()))?;
    for (k, (s, &(season, policy, co2, gas))) in set.iter().zip(&expected).enumerate() {
        let id = format!("w{}", k + 1);
        let same = s.id == id
            && s.season == Some(season)
            && s.policy == policy
            && s.co2_price == co2
            && s.gas_price == gas;
        check(
            same,
            format!(
                "{id} differs: {:?} {:?} {} {}",
                s.season, s.policy, s.co2_price, s.gas_price
            ),
        )?;
        check(
            s.probability == 1.0 / 32.0,
            format!("{id} has probability {}", s.probability),
        )?;
    }
    let total: f64 = set.iter().map(|s| s.probability).sum();
    check(
        (total - 1.0).abs() <= 1e-12,
        format!("probabilities sum to {total}"),
    )?;
    Ok("32 rows match, each with probability 1/32".into())
}

/// Random dispatch that keeps every device in its operating region, with
/// demand set to what the devices deliver.
fn random_fixture(
    rng: &mut ChaCha8Rng,
) -> (
    memg_core::catalog::Catalog,
    Design,
    Scenario,
    DemandProfile,
    Dispatch,
) {
    let pool = [
        "WT-1", "WT-2", "SPA-1", "SPA-2", "CVT-1", "CVT-2", "CHP-1", "CHP-3", "BBFB", "BCC-1",
        "IGCC-1", "HP",
    ];
    let cat = default_catalog();
    let mut design = Design::empty(&cat);
    let n = rng.random_range(2..=5);
    let mut picked: Vec<&str> = Vec::new();
    while picked.len() < n {
        let id = pool[rng.random_range(0..pool.len())];
        if !picked.contains(&id) {
            picked.push(id);
        }
    }
    for id in &picked {
        let s = cat.get(id).unwrap();
        design
            .install(s, rng.random_range(s.rp_min..=s.rp_max).max(1.0))
            .unwrap();
        if let Some(sol) = s.solar() {
            let (lo, hi) = sol.tilt_bounds_rad();
            design.set_tilt(id, rng.random_range(lo..=hi));
        }
    }
    let all = default_scenarios();
    let scenario = all[rng.random_range(0..all.len())].clone();
    let devices = installed_devices(&design, &cat).unwrap();
    let (mut elec, mut heat) = (Vec::new(), Vec::new());
    let mut hours = Vec::new();
    for w in &scenario.weather {
        let mut ops: Vec<OperatingPoint> = devices
            .iter()
            .map(|d| {
                let mut op = OperatingPoint::default();
                match &d.spec.physics {
                    Physics::Wind(_) | Physics::Solar(_) => {
                        op.power = rng.random::<f64>() * d.availability(w).unwrap().unwrap();
                    }
                    Physics::Conventional(_) | Physics::Linear(_) => {
                        if rng.random_bool(0.8) {
                            let (lo, hi) = d.committed_range();
                            op.on = true;
                            op.power = rng.random_range(lo..=hi);
                        }
                    }
                    Physics::Chp(_) => {
                        if rng.random_bool(0.8) {
                            let corners = d.chp().unwrap().corners();
                            let wts: Vec<f64> =
                                (0..4).map(|_| rng.random::<f64>() + 1e-3).collect();
                            let sum: f64 = wts.iter().sum();
                            op.on = true;
                            op.power = corners.iter().zip(&wts).map(|(c, w)| c[0] * w / sum).sum();
                            op.heat = corners.iter().zip(&wts).map(|(c, w)| c[1] * w / sum).sum();
                        }
                    }
                    Physics::HeatPump(_) => {
                        op.heat = rng.random::<f64>() * d.rp * d.spec.max_load;
                        op.on = op.heat > 0.0;
                    }
                    _ => unreachable!("pool has no storage or P2G"),
                }
                op
            })
            .collect();
        let net = |ops: &[OperatingPoint]| -> (f64, f64) {
            let (mut e, mut h) = (0.0, 0.0);
            for (d, op) in devices.iter().zip(ops) {
                let f = d.flows(op);
                e += f.gen.electricity - f.con.electricity;
                h += f.gen.heat - f.con.heat;
            }
            (e, h)
        };
        let (mut e, mut h) = net(&ops);
        if e < 0.0 {
            for (d, op) in devices.iter().zip(ops.iter_mut()) {
                if d.spec.kind == EquipmentKind::HeatPump {
                    *op = OperatingPoint::default();
                }
            }
            (e, h) = net(&ops);
        }
        let demand = memg_core::resource::ResourceVec {
            electricity: e.max(0.0),
            heat: h.max(0.0),
            ..Default::default()
        };
        let dh: Vec<DeviceHour> = devices
            .iter()
            .zip(&ops)
            .map(|(d, op)| DeviceHour {
                id: d.id().to_string(),
                op: *op,
                flows: d.flows(op),
            })
            .collect();
        hours.push(assemble_hour(dh, &demand, 1e-9).expect("demand equals supply"));
        elec.push(demand.electricity);
        heat.push(demand.heat);
    }
    let n = elec.len();
    let demand = DemandProfile::new(elec, heat, vec![0.0; n]).unwrap();
    let dispatch = Dispatch {
        scenario: scenario.id.clone(),
        hours,
    };
    (cat, design, scenario, demand, dispatch)
}

fn tax_minus_trade() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a7a);
    let econ = Economics::default();
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let (cat, design, mut s, demand, dispatch) = random_fixture(&mut rng);
        let v = check_feasibility(&design, &dispatch, &s, &demand, &cat, &econ, 1e-9);
        check(
            v.is_empty(),
            format!("fixture {k} is infeasible: {:?}", &v[..v.len().min(2)]),
        )?;
        s.co2_price = rng.random_range(1.0..200.0);
        let mut trade = s.clone();
        trade.policy = Policy::CapAndTrade;
        let mut tax = s.clone();
        tax.policy = Policy::EmissionTax;
        let et = emission_tax_cost(&dispatch, &tax).map_err(|e| e.to_string())?;
        let ct = carbon_trading_cost(&dispatch, &trade, &cat).map_err(|e| e.to_string())?;
        let allowance: f64 = dispatch
            .hours
            .iter()
            .map(|h| {
                let p: f64 = h
                    .devices
                    .iter()
                    .filter(|d| cat.get(&d.id).unwrap().kind.counts_toward_cap())
                    .map(|d| d.op.power)
                    .sum();
                365.0 * 0.3 * p * s.co2_price
            })
            .sum();
        let r = ((et - ct) - allowance).abs() / allowance.abs().max(1.0);
        worst = worst.max(r);
        check(
            r <= 1e-9,
            format!(
                "fixture {k}: ET-CT = {}, allowance value {allowance}",
                et - ct
            ),
        )?;
    }
    Ok(format!("1000 fixtures, worst relative gap {worst:.2e}"))
}

fn cost_identity(collected: &Collected) -> Outcome {
    check(!collected.solutions.is_empty(), "no solutions collected")?;
    let mut worst: f64 = 0.0;
    for (label, p, scenarios, s) in &collected.solutions {
        let r = total_annualized_cost(
            &s.design,
            &s.dispatches,
            scenarios,
            &p.catalog,
            &p.economics,
        )
        .map_err(|e| e.to_string())?;
        let second: f64 = r
            .scenarios
            .iter()
            .map(|c| c.probability * (c.operational + c.trading + c.tax - c.revenue))
            .sum();
        let rhs = r.crf * r.capital + r.maintenance + second;
        let a = rel(s.report.tac, rhs);
        let b = rel(s.report.tac, r.tac);
        worst = worst.max(a).max(b);
        check(
            a <= 1e-9 && b <= 1e-9,
            format!("{label}: TAC {} vs decomposition {rhs}", s.report.tac),
        )?;
    }
    Ok(format!(
        "{} solutions, worst relative residual {worst:.2e}",
        collected.solutions.len()
    ))
}

// ---------------------------------------------------------------------------

const GRID: GridSpec = GridSpec {
    sizing_points: 3,
    power_points: 3,
};

struct Tiny {
    problem: Problem,
    label: String,
}

fn random_tiny(rng: &mut ChaCha8Rng, same_policy: bool) -> Tiny {
    let cat = default_catalog();
    let ids: Vec<String> = cat.iter().map(|s| s.id.clone()).collect();
    let k = rng.random_range(1..=3);
    let mut picked: Vec<String> = Vec::new();
    while picked.len() < k {
        let id = ids[rng.random_range(0..ids.len())].clone();
        if !picked.contains(&id) {
            picked.push(id);
        }
    }
    let refs: Vec<&str> = picked.iter().map(String::as_str).collect();
    let catalog = cat.restrict(&refs).unwrap();
    let hours = rng.random_range(2..=4);
    let count = if same_policy {
        2
    } else {
        rng.random_range(1..=2)
    };
    let all = default_scenarios();
    let first = rng.random_range(0..all.len());
    let mut chosen = vec![all[first].clone()];
    while chosen.len() < count {
        let s = &all[rng.random_range(0..all.len())];
        if s.id != chosen[0].id && (!same_policy || s.policy == chosen[0].policy) {
            chosen.push(s.clone());
        }
    }
    let start = rng.random_range(0..=24 - hours);
    for s in &mut chosen {
        s.weather = s.weather[start..start + hours].to_vec();
        s.probability = 1.0 / count as f64;
    }
    let heats = catalog
        .iter()
        .any(|s| matches!(s.physics, Physics::Chp(_) | Physics::HeatPump(_)));
    let elec: Vec<f64> = (0..hours).map(|_| rng.random_range(5.0..40.0)).collect();
    let heat: Vec<f64> = (0..hours)
        .map(|_| {
            if heats {
                rng.random_range(0.0..15.0)
            } else {
                0.0
            }
        })
        .collect();
    let demand = DemandProfile::new(elec, heat, vec![0.0; hours]).unwrap();
    let label = format!(
        "{refs:?} {hours}h {}",
        chosen
            .iter()
            .map(|s| s.id.as_str())
            .collect::<Vec<_>>()
            .join("+")
    );
    Tiny {
        problem: Problem::new(catalog, chosen, demand),
        label,
    }
}

fn oracle_equivalence(collected: &mut Collected) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut matched, mut both_infeasible, mut tries) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    while matched < 20 {
        tries += 1;
        check(
            tries <= 400,
            format!("only {matched} feasible instances in 400 draws"),
        )?;
        let t = random_tiny(&mut rng, false);
        let o = brute_force_oracle(&t.problem, GRID);
        let s = solve_design(&t.problem, &SolverOptions::grid_exact(GRID));
        match (o, s) {
            (Ok(o), Ok(s)) => {
                let r = rel(o.report.tac, s.report.tac);
                worst = worst.max(r);
                check(
                    r <= 1e-6,
                    format!(
                        "{}: oracle {} solver {}",
                        t.label, o.report.tac, s.report.tac
                    ),
                )?;
                for (d, sc) in s.dispatches.iter().zip(&t.problem.scenarios) {
                    let p = &t.problem;
                    let v = check_feasibility(
                        &s.design,
                        d,
                        sc,
                        &p.demand,
                        &p.catalog,
                        &p.economics,
                        1e-6,
                    );
                    check(
                        v.is_empty(),
                        format!("{}: {:?}", t.label, &v[..v.len().min(2)]),
                    )?;
                }
                collected.add(
                    &format!("oracle {}", t.label),
                    &t.problem,
                    &t.problem.scenarios,
                    &o,
                );
                collected.add(
                    &format!("solver {}", t.label),
                    &t.problem,
                    &t.problem.scenarios,
                    &s,
                );
                matched += 1;
            }
            (Err(Error::Infeasible), Err(Error::Infeasible)) => both_infeasible += 1,
            (o, s) => {
                return Err(format!(
                    "{}: oracle {:?} solver {:?}",
                    t.label,
                    o.map(|x| x.report.tac).map_err(|e| e.to_string()),
                    s.map(|x| x.report.tac).map_err(|e| e.to_string())
                ))
            }
        }
    }
    Ok(format!(
        "{matched} instances agree (worst {worst:.1e}), {both_infeasible} infeasible for both"
    ))
}

fn physics_suite() -> Outcome {
    let cat = default_catalog();
    let mut notes = Vec::new();

    // Wind curve continuity at the rated speed.
    for id in ["WT-1", "WT-2"] {
        let spec = cat.get(id).unwrap();
        let w = spec.wind().unwrap();
        let d = rotor_diameter_for(spec.rp_max, w).map_err(|e| e.to_string())?;
        let at = wind_power(w.v_rated, d, w);
        let below = wind_power(w.v_rated * (1.0 - 1e-13), d, w);
        check(
            rel(at, below) < 1e-9,
            format!("{id}: {below} below rated vs {at}"),
        )?;
    }
    notes.push("wind continuous");

    // Tilted irradiance is the sum of its three components.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let g = rng.random_range(1.0..1100.0);
        let hour = WeatherHour {
            v_anemometer: 5.0,
            g_horizontal: g,
            theta_a: 20.0,
            h0: g / rng.random_range(0.02..1.0),
            theta: rng.random_range(0.0..1.5),
            theta_z: rng.random_range(0.0..1.45),
        };
        let t = tilted_irradiance(
            &hour,
            rng.random_range(0.0..1.5),
            rng.random_range(0.0..0.9),
        )
        .map_err(|e| e.to_string())?;
        check(
            t.g_beta == t.g_d_beta + t.g_b_beta + t.g_r_beta,
            "irradiance components do not add up",
        )?;
    }
    notes.push("irradiance additive");

    check(
        diffuse_fraction(0.8) == 0.18,
        format!("f(0.8) = {}", diffuse_fraction(0.8)),
    )?;
    check(
        (diffuse_fraction(0.5) - 0.6339).abs() <= 1e-4,
        format!("f(0.5) = {}", diffuse_fraction(0.5)),
    )?;
    notes.push("diffuse branches");

    // CHP polygon: corners feasible, midpoints of feasible pairs feasible.
    for spec in cat.iter() {
        let Some(c) = (match &spec.physics {
            Physics::Chp(c) => Some(c),
            _ => None,
        }) else {
            continue;
        };
        for corner in c.corners() {
            check(
                chp_feasible(corner[0], corner[1], c, 1e-9),
                format!("{} corner {corner:?}", spec.id),
            )?;
        }
        let (pl, ph) = c.power_range();
        let (hl, hh) = c.heat_range();
        let mut pairs = 0;
        while pairs < 1000 {
            let a = [rng.random_range(pl..=ph), rng.random_range(hl..=hh)];
            let b = [rng.random_range(pl..=ph), rng.random_range(hl..=hh)];
            if !(chp_feasible(a[0], a[1], c, 0.0) && chp_feasible(b[0], b[1], c, 0.0)) {
                continue;
            }
            pairs += 1;
            let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            check(
                chp_feasible(m[0], m[1], c, 1e-9),
                format!("{} midpoint {m:?}", spec.id),
            )?;
        }
    }
    notes.push("CHP convex");

    // Sabatier atom balance and equilibrium at the largest extent.
    let p2g = cat.get("P2G").unwrap().p2g().unwrap();
    let xi_max = sabatier_max_extent(p2g).map_err(|e| e.to_string())?;
    let atoms = |n: [f64; 4]| {
        [
            n[0] + n[3],
            2.0 * n[1] + 2.0 * n[2] + 4.0 * n[3],
            2.0 * n[0] + n[2],
        ]
    };
    let feed = atoms(species_at_extent(0.0, p2g));
    for k in 0..=20 {
        let out = atoms(species_at_extent(xi_max * k as f64 / 20.0, p2g));
        for (a, b) in feed.iter().zip(&out) {
            check(rel(*a, *b) <= 1e-9, format!("atom balance {a} vs {b}"))?;
        }
    }
    let res = equilibrium_residual_relative(xi_max, p2g).abs();
    check(
        res <= 1e-6,
        format!("equilibrium residual {res:.2e} at the largest extent"),
    )?;
    notes.push("Sabatier balanced");

    // Battery energy over a day.
    for _ in 0..200 {
        let s0 = 100.0;
        let mut soc = s0;
        let mut net = 0.0;
        for _ in 0..24 {
            let x = rng.random_range(-160i32..=160) as f64 / 8.0;
            let (pch, pdch) = if x >= 0.0 { (x, 0.0) } else { (0.0, -x) };
            soc = battery_step(soc, pch, pdch).map_err(|e| e.to_string())?;
            net += pch - pdch;
        }
        check(
            soc - s0 == net,
            format!("SOC change {} vs net charge {net}", soc - s0),
        )?;
    }
    notes.push("battery conserves energy");
    Ok(notes.join(", "))
}

fn value_of_stochastic_solution(collected: &mut Collected) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut finite, mut tries) = (0, 0, 0);
    let mut min_gap = f64::INFINITY;
    while checked < 10 {
        tries += 1;
        check(
            tries <= 400,
            format!("only {checked} feasible instances in 400 draws"),
        )?;
        let t = random_tiny(&mut rng, true);
        let Ok(rp) = brute_force_oracle(&t.problem, GRID) else {
            continue;
        };
        let policy = t.problem.scenarios[0].policy;
        let avg = averaged_scenario(&t.problem.scenarios, policy).map_err(|e| e.to_string())?;
        let single = Problem {
            scenarios: vec![avg],
            ..t.problem.clone()
        };
        let Ok(det) = brute_force_oracle(&single, GRID) else {
            continue;
        };
        collected.add(
            &format!("averaged {}", t.label),
            &single,
            &single.scenarios,
            &det,
        );
        let eev = evaluate_design(&det.design, &t.problem, &SolverOptions::grid_exact(GRID))
            .map_err(|e| e.to_string())?;
        check(
            eev.tac >= rp.report.tac - 1e-6 * rp.report.tac.abs(),
            format!("{}: EEV {} < RP {}", t.label, eev.tac, rp.report.tac),
        )?;
        if eev.tac.is_finite() {
            finite += 1;
            min_gap = min_gap.min(eev.tac - rp.report.tac);
        }
        checked += 1;
    }
    Ok(format!(
        "{checked} instances, {finite} with finite EEV, smallest VSS {min_gap:.3e} $/yr"
    ))
}

/// Two equiprobable scenarios with the given hub-independent wind speeds.
fn wind_problem(speeds: [f64; 2]) -> Problem {
    let base = default_scenarios()[0].clone();
    let hours = 24;
    let scenarios: Vec<Scenario> = speeds
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut s = base.clone();
            s.id = format!("wind-{k}");
            for w in &mut s.weather {
                w.v_anemometer = v;
            }
            s.probability = 0.5;
            s
        })
        .collect();
    let catalog = default_catalog().restrict(&["WT-1", "CVT-1"]).unwrap();
    let demand = DemandProfile::new(vec![30.0; hours], vec![0.0; hours], vec![0.0; hours]).unwrap();
    let mut p = Problem::new(catalog, scenarios, demand);
    p.economics.max_installed = 1;
    p
}

fn wind_variance(collected: &mut Collected) -> Outcome {
    let steady = wind_problem([10.0, 10.0]);
    let gusty = wind_problem([0.0, 20.0]);
    let o = SolverOptions::default();
    let a = solve_design(&steady, &o).map_err(|e| e.to_string())?;
    let b = solve_design(&gusty, &o).map_err(|e| e.to_string())?;
    collected.add("steady wind", &steady, &steady.scenarios, &a);
    collected.add("variable wind", &gusty, &gusty.scenarios, &b);
    let ia: Vec<&str> = a.design.installed_ids().collect();
    let ib: Vec<&str> = b.design.installed_ids().collect();
    check(
        a.design.is_installed("WT-1") && !b.design.is_installed("WT-1"),
        format!("steady {ia:?}, variable {ib:?}"),
    )?;
    check(
        b.design.is_installed("CVT-1"),
        format!("variable selects {ib:?}"),
    )?;
    Ok(format!(
        "mean 10 m/s: steady selects {ia:?}, variable selects {ib:?}"
    ))
}

fn case2_sng(collected: &mut Collected) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = CaseConfig::new(Case::Case2, dir.path());
    cfg.policy = PolicySelection::Both;
    cfg.options.max_outer_iters = 6;
    let run = run_case(&cfg).map_err(|e| e.to_string())?;
    let p = &run.problem;
    let s = &run.solution;
    collected.add("case 2", p, &p.scenarios, s);
    check(s.design.is_installed("P2G"), "P2G not installed")?;
    let phys = p.catalog.get("P2G").unwrap().p2g().unwrap();
    let bound = sabatier_max_extent(phys).map_err(|e| e.to_string())? * M_CH4 * phys.sng_yield;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    check(
        s.dispatches.len() == 32,
        format!("{} dispatches", s.dispatches.len()),
    )?;
    for d in &s.dispatches {
        check(
            d.hours.len() == 24,
            format!("{}: {} hours", d.scenario, d.hours.len()),
        )?;
        for (t, h) in d.hours.iter().enumerate() {
            let u = h.device("P2G").ok_or("P2G missing from dispatch")?;
            let sng = u.flows.gen.sng;
            lo = lo.min(sng);
            hi = hi.max(sng);
            check(
                sng >= 0.25 - 1e-9,
                format!("{} hour {t}: {sng} t/h", d.scenario),
            )?;
            check(
                sng <= bound * (1.0 + 1e-9),
                format!("{} hour {t}: {sng} above {bound}", d.scenario),
            )?;
            if u.op.on {
                check(
                    (u.flows.con.electricity - 10.0).abs() <= 1e-9,
                    format!("{} hour {t}: draw {}", d.scenario, u.flows.con.electricity),
                )?;
            }
        }
    }
    Ok(format!(
        "SNG in [{lo:.4}, {hi:.4}] t/h, bound {bound:.4}, draw 10 MW, status {:?}",
        s.status
    ))
}

fn binary_determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let out = root.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_memg"))
            .args([
                "run",
                "--case",
                "1",
                "--policy",
                "trade",
                "--seed",
                "11",
                "--max-outer-iters",
                "4",
                "--out",
            ])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        check(
            matches!(status.code(), Some(0) | Some(4)),
            format!("exit status {status}"),
        )?;
        let mut all = std::fs::read(out.join("solution.json")).map_err(|e| e.to_string())?;
        for f in memg_cli::artifacts::CSV_FILES
            .iter()
            .chain([&"cost_report.json"])
        {
            all.extend(std::fs::read(out.join(f)).map_err(|e| e.to_string())?);
        }
        Ok(all)
    };
    let a = run("a")?;
    let b = run("b")?;
    check(a == b, "outputs differ between runs")?;
    Ok(format!("two runs, {} identical bytes", a.len()))
}

fn main() {
    let mut collected = Collected::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        println!("{tag} {name}: {detail}");
        results.push((name, r));
    };
    record("crf", &mut crf_value);
    record("scenario-table", &mut scenario_table);
    record("tax-trade-identity", &mut tax_minus_trade);
    record("oracle-equivalence", &mut || {
        oracle_equivalence(&mut collected)
    });
    record("physics-suite", &mut physics_suite);
    record("value-of-stochastic-solution", &mut || {
        value_of_stochastic_solution(&mut collected)
    });
    record("wind-variance-selection", &mut || {
        wind_variance(&mut collected)
    });
    record("case2-sng", &mut || case2_sng(&mut collected));
    record("cost-decomposition", &mut || cost_identity(&collected));
    record("binary-determinism", &mut binary_determinism);
    let failed = results.iter().filter(|(_, r)| r.is_err()).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
