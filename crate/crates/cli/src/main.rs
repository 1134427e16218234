mod cli;
mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use optexec::evaluation::{load_prices_file, mc_expected_cost_with};
use optexec::rng::GENERATOR_NAME;
use optexec::strategies::midpoint;
use optexec::{
    bertsimas_allocation, compare, expected_cost_closed_form, one_time_allocation, simulate_path,
    solve_constrained, solve_fiscal, AllocationVector, BacktestReport, CostSpec, Error,
    EvaluationMode, Execution, MarketParams, NamedAllocation, NoiseModel, PolicyTable,
    SolveOptions, TimeGrid, Violation,
};

use cli::{
    BacktestArgs, Cli, Command, CompareArgs, CostArgs, CostKind, ExecArgs, ProblemArgs, ReportArgs,
    RolloutArgs, SimulateArgs, SolveArgs,
};

const EXIT_INPUT: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

fn main() -> ExitCode {
    let args = match config::merge(&Cli::command(), std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let cli = Cli::parse_from(args);
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Rollout(a) => rollout(a),
        Command::Simulate(a) => simulate(a),
        Command::Backtest(a) => backtest(a),
        Command::Compare(a) => compare_model(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ResourceLimit { .. } => {
                    eprintln!("hint: lower K or N, or raise --work-budget");
                    ExitCode::from(EXIT_RESOURCE)
                }
                _ => ExitCode::from(EXIT_INPUT),
            }
        }
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParameter(vec![Violation::new(field, message)])
}

fn cost_spec(c: &CostArgs) -> optexec::Result<CostSpec> {
    match c.cost {
        CostKind::Fiscal => Ok(CostSpec::Fiscal),
        CostKind::Constrained => CostSpec::constrained(c.cl, c.cu, c.gamma, c.lb, c.ub),
    }
}

fn solve_options(e: &ExecArgs) -> SolveOptions {
    SolveOptions {
        execution: execution(e),
        work_budget: e.work_budget,
        ..SolveOptions::default()
    }
}

fn execution(e: &ExecArgs) -> Execution {
    if e.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn time_grid(p: &ProblemArgs) -> optexec::Result<TimeGrid> {
    match p.horizon {
        Some(t) => TimeGrid::new(p.n, t),
        None => TimeGrid::with_steps(p.n),
    }
}

/// Builds spec, grid and market parameters, reporting every invalid field at
/// once rather than stopping at the first.
fn problem(p: &ProblemArgs) -> optexec::Result<(CostSpec, TimeGrid, MarketParams)> {
    let spec = cost_spec(&p.cost);
    let grid = time_grid(p);
    let params = MarketParams::new(p.beta, p.x0);
    match (spec, grid, params) {
        (Ok(s), Ok(g), Ok(m)) => Ok((s, g, m)),
        (s, g, m) => {
            let mut violations = Vec::new();
            for e in [s.err(), g.err(), m.err()].into_iter().flatten() {
                match e {
                    Error::InvalidParameter(v) => violations.extend(v),
                    other => return Err(other),
                }
            }
            Err(Error::InvalidParameter(violations))
        }
    }
}

fn warn_beta(params: &MarketParams) {
    if !params.beta_in_recommended_range() {
        eprintln!(
            "warning: beta = {} is outside the calibrated range; results are still computed",
            params.beta()
        );
    }
}

/// Parses `A` or `e1:p1,e2:p2,...`.
fn parse_noise(s: &str) -> optexec::Result<NoiseModel> {
    let s = s.trim();
    if !s.contains(':') {
        let a: f64 = s
            .parse()
            .map_err(|_| invalid("noise", format!("cannot read `{s}` as a number")))?;
        return NoiseModel::symmetric(a.abs());
    }
    let mut support = Vec::new();
    for part in s.split(',') {
        let (e, p) = part
            .split_once(':')
            .ok_or_else(|| invalid("noise", format!("expected value:probability, got `{part}`")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid("noise", format!("cannot read `{t}` as a number")))
        };
        support.push((num(e)?, num(p)?));
    }
    NoiseModel::new(support)
}

/// Optimal unit-price schedule for the given cost; for the fiscal cost every
/// single purchase ties, and the solver's deferral schedule is returned.
fn dp_schedule(
    k: usize,
    grid: TimeGrid,
    beta: f64,
    spec: CostSpec,
    opts: &SolveOptions,
) -> optexec::Result<AllocationVector> {
    let unit = MarketParams::new(beta, 1.0)?;
    let table = match spec {
        CostSpec::Fiscal => solve_fiscal(k, grid, unit, opts)?,
        CostSpec::Constrained(_) => solve_constrained(k, grid, unit, spec, opts)?,
    };
    table.rollout(k)
}

fn strategy(
    name: &str,
    k: usize,
    n: usize,
    dp: &mut dyn FnMut() -> optexec::Result<AllocationVector>,
) -> optexec::Result<NamedAllocation> {
    let alloc = match name {
        "dp" => dp()?,
        "bertsimas" => bertsimas_allocation(k, n),
        "onetime@mid" => one_time_allocation(k, n, midpoint(n))?,
        other => match other.strip_prefix("onetime@").map(str::parse::<usize>) {
            Some(Ok(j)) => one_time_allocation(k, n, j)?,
            _ => {
                return Err(invalid(
                    "strategies",
                    format!(
                        "unknown strategy `{other}`; use dp, bertsimas, onetime@mid or onetime@<j>"
                    ),
                ))
            }
        },
    };
    Ok(NamedAllocation::new(name, alloc))
}

fn strategies(
    list: &str,
    k: usize,
    n: usize,
    mut dp: impl FnMut() -> optexec::Result<AllocationVector>,
) -> optexec::Result<Vec<NamedAllocation>> {
    let mut cached: Option<AllocationVector> = None;
    let mut dp_once = || -> optexec::Result<AllocationVector> {
        if cached.is_none() {
            cached = Some(dp()?);
        }
        Ok(cached.clone().expect("just filled"))
    };
    let names: Vec<&str> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(invalid("strategies", "no strategies given"));
    }
    names
        .iter()
        .map(|s| strategy(s, k, n, &mut dp_once))
        .collect()
}

fn print_schedule(alloc: &AllocationVector) {
    let u = alloc.purchases();
    println!(
        "schedule u_0..u_{} (shares per decision point, total {}):",
        u.len() - 1,
        alloc.total()
    );
    for (row, chunk) in u.chunks(10).enumerate() {
        let cells: Vec<String> = chunk.iter().map(|v| format!("{v:>6}")).collect();
        println!("  {:>5}: {}", row * 10, cells.join(""));
    }
}

fn describe(spec: &CostSpec) -> String {
    match spec {
        CostSpec::Fiscal => "fiscal".into(),
        CostSpec::Constrained(b) => format!(
            "constrained (C_l = {}, C_u = {}, gamma = {}, LB = {}, UB = {})",
            b.c_lower, b.c_upper, b.gamma, b.lb, b.ub
        ),
    }
}

fn create(path: &Path) -> optexec::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn solve(a: SolveArgs) -> optexec::Result<()> {
    let p = &a.problem;
    let (spec, grid, params) = problem(p)?;
    warn_beta(&params);
    let opts = solve_options(&a.exec);
    let unit = MarketParams::new(p.beta, 1.0)?;
    let table = match spec {
        CostSpec::Fiscal => solve_fiscal(p.k, grid, unit, &opts)?,
        CostSpec::Constrained(_) => solve_constrained(p.k, grid, unit, spec, &opts)?,
    };
    println!(
        "K = {}  N = {}  T = {}  beta = {}  x0 = {}  cost = {}",
        p.k,
        p.n,
        grid.horizon(),
        p.beta,
        p.x0,
        describe(&spec)
    );
    let expected = p.x0 * table.value(0, p.k);
    println!("optimal expected cost: {expected:.6} (currency)");
    if spec.is_fiscal() {
        println!(
            "note: the fiscal cost is degenerate. J[k][r] = r, so buying all K shares at any \
             single decision point costs K * x0 = {expected}; the schedule below defers to t_N."
        );
    }
    print_schedule(&table.rollout(p.k)?);
    if let Some(out) = &a.out {
        let mut w = create(out)?;
        table.write_csv(&mut w)?;
        w.flush()?;
        println!("policy table written to {}", out.display());
    }
    Ok(())
}

fn rollout(a: RolloutArgs) -> optexec::Result<()> {
    let file = File::open(&a.policy).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", a.policy.display()),
        ))
    })?;
    let table = PolicyTable::read_csv(std::io::BufReader::new(file))?;
    let k = a.k.unwrap_or(table.capacity());
    print_schedule(&table.rollout(k)?);
    Ok(())
}

fn simulate(a: SimulateArgs) -> optexec::Result<()> {
    let p = &a.problem;
    let (spec, grid, params) = problem(p)?;
    warn_beta(&params);
    let noise = parse_noise(&a.noise.noise)?;
    let opts = solve_options(&a.exec);
    let s = strategy(&a.strategy, p.k, p.n, &mut || {
        dp_schedule(p.k, grid, p.beta, spec, &opts)
    })?;
    let est = mc_expected_cost_with(
        &s.allocation,
        &params,
        &noise,
        &spec,
        &grid,
        a.paths,
        a.seed,
        execution(&a.exec),
    )?;
    let exact = expected_cost_closed_form(&s.allocation, &params, &spec, &grid)?;
    println!("strategy: {}  cost = {}", s.name, describe(&spec));
    print_schedule(&s.allocation);
    println!(
        "Monte-Carlo mean: {:.6}  standard error: {:.6}  ({} paths, seed {}, generator {GENERATOR_NAME})",
        est.mean, est.standard_error, est.n_paths, est.seed
    );
    println!("closed-form expectation: {exact:.6}");
    if let Some(out) = &a.path_out {
        let path = simulate_path(p.k, &s.allocation, &params, &noise, a.seed)?;
        let mut w = create(out)?;
        writeln!(w, "k,price")?;
        for (k, x) in path.prices().iter().enumerate() {
            writeln!(w, "{k},{}", optexec::fmt::significant(*x, 12))?;
        }
        w.flush()?;
        println!("sample price path written to {}", out.display());
    }
    Ok(())
}

fn emit_report(report: &BacktestReport, r: &ReportArgs) -> optexec::Result<()> {
    print!("{}", report.render_table());
    if let Some(out) = &r.csv_out {
        let mut w = create(out)?;
        report.write_csv(&mut w)?;
        w.flush()?;
        println!("report written to {}", out.display());
    }
    Ok(())
}

fn backtest(a: BacktestArgs) -> optexec::Result<()> {
    let mut path = load_prices_file(&a.prices)?;
    if path.len() < 2 {
        return Err(invalid("prices", "need at least two prices"));
    }
    let n = match a.n {
        Some(n) => {
            if n + 1 > path.len() {
                return Err(invalid(
                    "n",
                    format!("N = {n} needs {} prices, file has {}", n + 1, path.len()),
                ));
            }
            path = path.truncated(n + 1)?;
            n
        }
        None => path.len() - 1,
    };
    let spec = cost_spec(&a.cost)?;
    let grid = TimeGrid::with_steps(n)?;
    let opts = solve_options(&a.exec);
    let list = strategies(&a.report.strategies, a.k, n, || {
        dp_schedule(a.k, grid, a.beta, spec, &opts)
    })?;
    let source = a
        .prices
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| a.prices.display().to_string());
    let mode = EvaluationMode::Historical {
        path: &path,
        source,
        impact_beta: a.impact_adjusted.then_some(a.beta),
    };
    let report = compare(&mode, &list, a.report.baseline.as_deref())?;
    if a.impact_adjusted {
        println!("prices adjusted for own impact with beta = {}", a.beta);
    }
    emit_report(&report, &a.report)
}

fn compare_model(a: CompareArgs) -> optexec::Result<()> {
    let p = &a.problem;
    let (spec, grid, params) = problem(p)?;
    warn_beta(&params);
    let noise = parse_noise(&a.noise.noise)?;
    let opts = solve_options(&a.exec);
    let list = strategies(&a.report.strategies, p.k, p.n, || {
        dp_schedule(p.k, grid, p.beta, spec, &opts)
    })?;
    let mode = EvaluationMode::Model {
        params,
        noise,
        spec,
        grid,
        n_paths: a.paths,
        seed: a.seed,
        execution: execution(&a.exec),
    };
    let report = compare(&mode, &list, a.report.baseline.as_deref())?;
    emit_report(&report, &a.report)
}
