use memg_core::catalog::{default_catalog, Catalog, Physics};
use memg_core::model::check_feasibility;
use memg_core::scenarios::{default_scenarios, DemandProfile, Scenario};
use memg_core::solver::{
    brute_force_oracle, solve_design, GridSpec, Problem, Solution, SolverOptions,
};
use memg_core::Error;

const GRID: GridSpec = GridSpec {
    sizing_points: 3,
    power_points: 3,
};

fn tiny(ids: &[&str], scenario_idx: &[usize], elec: f64, heat: f64) -> Problem {
    let all = default_scenarios();
    let mut sc: Vec<Scenario> = scenario_idx.iter().map(|&i| all[i].clone()).collect();
    for s in &mut sc {
        s.weather.truncate(3);
        s.probability = 1.0 / scenario_idx.len() as f64;
    }
    let e = vec![elec, elec * 1.2, elec * 0.8];
    let demand = DemandProfile::new(e, vec![heat; 3], vec![0.0; 3]).unwrap();
    Problem::new(default_catalog().restrict(ids).unwrap(), sc, demand)
}

fn cases() -> Vec<(Vec<&'static str>, f64, f64)> {
    vec![
        (vec!["CVT-1", "CVT-2"], 30.0, 0.0),
        (vec!["WT-1", "CVT-1", "ES"], 25.0, 0.0),
        (vec!["CHP-1", "HP", "CVT-2"], 30.0, 12.0),
        (vec!["BBFB", "IGCC-1"], 35.0, 0.0),
        (vec!["SPA-1", "CVT-2", "P2G"], 20.0, 0.0),
    ]
}

/// Multiplies every monetary coefficient by `k`.
fn scale_costs(p: &Problem, k: f64) -> Problem {
    let specs = p
        .catalog
        .iter()
        .map(|s| {
            let mut s = s.clone();
            for v in [
                &mut s.psi0,
                &mut s.gamma0,
                &mut s.omega0,
                &mut s.psik,
                &mut s.gammak,
                &mut s.omegak,
            ] {
                *v *= k;
            }
            match &mut s.physics {
                Physics::Conventional(c) => {
                    c.a *= k;
                    c.b *= k;
                    c.c *= k;
                    c.d *= k;
                }
                Physics::Chp(c) => {
                    for v in [
                        &mut c.kk, &mut c.ll, &mut c.ii, &mut c.jj, &mut c.yy, &mut c.zz,
                    ] {
                        *v *= k;
                    }
                }
                Physics::P2g(g) => g.cc *= k,
                _ => {}
            }
            s
        })
        .collect();
    let mut q = p.clone();
    q.catalog = Catalog::new(specs).unwrap();
    q.economics.coal_price *= k;
    q.economics.biomass_price *= k;
    for s in &mut q.scenarios {
        s.co2_price *= k;
        s.gas_price *= k;
        s.sng_price *= k;
    }
    q
}

fn assert_feasible(p: &Problem, s: &Solution, tol: f64) {
    for (d, sc) in s.dispatches.iter().zip(&p.scenarios) {
        let v = check_feasibility(&s.design, d, sc, &p.demand, &p.catalog, &p.economics, tol);
        assert!(v.is_empty(), "{}: {:?}", sc.id, v);
    }
}

#[test]
fn scaling_every_price_keeps_the_selected_design() {
    let mut checked = 0;
    for (ids, e, h) in cases() {
        let p = tiny(&ids, &[0, 20], e, h);
        let base = match brute_force_oracle(&p, GRID) {
            Ok(s) => s,
            Err(Error::Infeasible) => continue,
            Err(err) => panic!("{err}"),
        };
        for k in [0.25, 3.0, 10.0] {
            let q = scale_costs(&p, k);
            let o = brute_force_oracle(&q, GRID).unwrap();
            assert_eq!(o.design, base.design, "{ids:?} k={k}");
            assert!(
                (o.report.tac - k * base.report.tac).abs() <= 1e-9 * o.report.tac.abs(),
                "{ids:?} k={k}"
            );
            let s = solve_design(&q, &SolverOptions::grid_exact(GRID)).unwrap();
            assert_eq!(s.design, base.design, "solver {ids:?} k={k}");
        }
        checked += 1;
    }
    assert!(checked >= 4, "only {checked} feasible cases");
}

#[test]
fn more_scenarios_never_beat_the_best_single_one() {
    let mut checked = 0;
    for (ids, e, h) in cases() {
        let pair = tiny(&ids, &[1, 30], e, h);
        let joint = match brute_force_oracle(&pair, GRID) {
            Ok(s) => s,
            Err(Error::Infeasible) => continue,
            Err(err) => panic!("{err}"),
        };
        assert_feasible(&pair, &joint, 1e-6);
        let singles: Vec<f64> = [1, 30]
            .iter()
            .filter_map(|&i| brute_force_oracle(&tiny(&ids, &[i], e, h), GRID).ok())
            .map(|s| s.report.tac)
            .collect();
        let best = singles.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(
            joint.report.tac >= best - 1e-6 * best.abs(),
            "{ids:?}: {} < {best}",
            joint.report.tac
        );
        let solved = solve_design(&pair, &SolverOptions::grid_exact(GRID)).unwrap();
        assert!(solved.report.tac >= best - 1e-6 * best.abs());
        assert_feasible(&pair, &solved, 1e-6);
        checked += 1;
    }
    assert!(checked >= 4, "only {checked} feasible cases");
}
