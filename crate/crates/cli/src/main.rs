use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use memg_cli::artifacts::read_json;
use memg_cli::{
    compare_files, exit, run_case, run_oracle, status_exit_code, Case, CaseConfig, CliError,
    PolicySelection,
};

#[derive(Parser)]
#[command(
    name = "memg",
    version,
    about = "Multi-energy microgrid design under carbon-policy uncertainty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Trade,
    Tax,
    Both,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Solve a case and write its reports and hourly series.
    Run {
        #[arg(long, value_enum)]
        case: CaseArg,
        /// Full run configuration as JSON; flags given here override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Directory holding winter.csv, spring.csv, summer.csv and autumn.csv.
        #[arg(long)]
        weather: Option<PathBuf>,
        #[arg(long)]
        demand: Option<PathBuf>,
        /// JSON scenario table replacing the bundled one.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Scenario policies to keep [default: both].
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "force-install", num_args = 1..)]
        force_install: Vec<String>,
        /// Optimise against one averaged scenario per policy.
        #[arg(long)]
        deterministic: bool,
        /// Restrict the catalog to these ids (comma separated).
        #[arg(long, value_delimiter = ',')]
        candidates: Option<Vec<String>>,
        /// Solver options as JSON.
        #[arg(long)]
        options: Option<PathBuf>,
        #[arg(long)]
        max_outer_iters: Option<usize>,
        #[arg(long)]
        max_sizing_evals: Option<usize>,
        #[arg(long)]
        sizing_grid_points: Option<usize>,
        /// Run scenarios on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Compare two solution files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustive search of a tiny grid-restricted instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also run the main solver on the same grid.
        #[arg(long)]
        with_solver: bool,
    },
}

fn build_config(cmd: Command) -> Result<CaseConfig, CliError> {
    let Command::Run {
        case,
        config,
        catalog,
        weather,
        demand,
        scenarios,
        policy,
        out,
        seed,
        force_install,
        deterministic,
        candidates,
        options,
        max_outer_iters,
        max_sizing_evals,
        sizing_grid_points,
        sequential,
    } = cmd
    else {
        unreachable!("only run builds a config")
    };
    let case = match case {
        CaseArg::One => Case::Case1,
        CaseArg::Two => Case::Case2,
        CaseArg::Three => Case::Case3,
        CaseArg::Custom => Case::Custom,
    };
    let mut c = match config {
        Some(p) => {
            let mut c: CaseConfig = read_json(&p)?;
            c.case = case;
            c.out = out;
            c
        }
        None => CaseConfig::new(case, out),
    };
    if let Some(p) = policy {
        c.policy = match p {
            PolicyArg::Trade => PolicySelection::Trade,
            PolicyArg::Tax => PolicySelection::Tax,
            PolicyArg::Both => PolicySelection::Both,
        };
    }
    c.catalog = catalog.or(c.catalog);
    c.weather = weather.or(c.weather);
    c.demand = demand.or(c.demand);
    c.scenario_table = scenarios.or(c.scenario_table);
    c.candidates = candidates.or(c.candidates);
    c.deterministic |= deterministic;
    if let Some(p) = options {
        c.options = read_json(&p)?;
    }
    if let Some(s) = seed {
        c.options.seed = s;
    }
    if let Some(n) = max_outer_iters {
        c.options.max_outer_iters = n;
    }
    if let Some(n) = max_sizing_evals {
        c.options.max_sizing_evals = n;
    }
    if let Some(n) = sizing_grid_points {
        c.options.sizing_grid_points = n;
    }
    if sequential {
        c.options.parallel = false;
    }
    for id in force_install {
        if !c.options.force_install.contains(&id) {
            c.options.force_install.push(id);
        }
    }
    Ok(c)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        cmd @ Command::Run { .. } => {
            let config = build_config(cmd)?;
            let record = run_case(&config)?;
            let s = &record.solution;
            let installed: Vec<&str> = s.design.installed_ids().collect();
            println!("status: {:?}", s.status);
            println!("installed: {}", installed.join(", "));
            println!("TAC: {:.2} $/yr", s.report.tac);
            println!("written to {}", config.out.display());
            Ok(status_exit_code(s.status))
        }
        Command::Compare { a, b, out } => {
            let c = compare_files(&a, &b, &out)?;
            println!("only in A: {}", c.only_in_a.join(", "));
            println!("only in B: {}", c.only_in_b.join(", "));
            println!(
                "TAC A {:.2}, B {:.2}, delta {:.2}",
                c.costs.tac.a, c.costs.tac.b, c.costs.tac.delta
            );
            Ok(exit::OK)
        }
        Command::Oracle {
            instance,
            out,
            with_solver,
        } => {
            let (oracle, solver) = run_oracle(&instance, &out, with_solver)?;
            println!("oracle TAC: {:.6}", oracle.report.tac);
            if let Some(s) = solver {
                println!("solver TAC: {:.6} ({:?})", s.report.tac, s.status);
            }
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("memg: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
