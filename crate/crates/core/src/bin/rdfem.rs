use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rdfem::harness::output::fmt_sci;
use rdfem::harness::{registry, run_properties, run_study, solve, write_csv, write_vtk, RunConfig, StudyOptions};
use rdfem::{Error, ProblemSpec, Result, Scheme};

#[derive(Parser)]
#[command(name = "rdfem", version, about = "Finite element solvers for damped-pumped reaction-diffusion equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and print the error table.
    Study(RunArgs),
    /// Solve on a single grid.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Grid resolution (cells per side).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Run the randomized property suite.
    Props {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// List the built-in problems.
    List,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// TOML or JSON run configuration; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// Restrict to one scheme: cfem, ncfem or dg.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Comma-separated grid list, e.g. 4,8,16.
    #[arg(long, value_delimiter = ',')]
    grids: Option<Vec<usize>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    final_time: Option<f64>,
    /// Reference resolution for problems without a closed-form solution.
    #[arg(long)]
    n_ref: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write VTK files of final fields.
    #[arg(long)]
    vtk: bool,
}

fn resolve(args: &RunArgs) -> Result<(RunConfig, ProblemSpec)> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let run = &mut cfg.run;
    if args.problem.is_some() {
        run.problem = args.problem.clone();
    }
    run.scheme = args.scheme.or(run.scheme);
    run.grids = args.grids.clone().or(run.grids.take());
    run.dt = args.dt.or(run.dt);
    run.gamma = args.gamma.or(run.gamma);
    run.final_time = args.final_time.or(run.final_time);
    run.n_ref = args.n_ref.or(run.n_ref);
    if args.out_dir.is_some() {
        cfg.output.out_dir = args.out_dir.clone();
    }
    cfg.output.vtk |= args.vtk;
    let problem = cfg.problem()?;
    Ok((cfg, problem))
}

fn study(args: &RunArgs) -> Result<bool> {
    let (cfg, problem) = resolve(args)?;
    let opts = StudyOptions {
        solver: cfg.solver,
        grids: None,
        n_ref: cfg.run.n_ref,
    };
    let studies = run_study(&problem, &opts)?;
    let mut ok = true;
    for s in &studies {
        let r = &s.report;
        println!("# {} / {} ({})", r.problem, r.scheme, r.norm);
        if let Some((n_ref, secs)) = s.reference {
            println!("# reference grid {n_ref} ({secs:.1} s)");
        }
        println!("{:>10} {:>14} {:>14} {:>6} {:>9}", "grid", "h", "error", "rate", "stable");
        for (row, run) in r.rows.iter().zip(&s.runs) {
            let rate = row.rate.map_or_else(|| "N/A".into(), |v| format!("{v:.2}"));
            println!(
                "{:>10} {:>14} {:>14} {:>6} {:>9}",
                row.grid,
                fmt_sci(row.h, 6),
                fmt_sci(row.error, 6),
                rate,
                run.stability.holds()
            );
        }
        ok &= s.stability_holds();
        if let Some(dir) = &cfg.output.out_dir {
            let path = dir.join(format!("{}_{}.csv", r.problem, r.scheme));
            write_csv(r, &path)?;
            println!("# wrote {}", path.display());
        }
    }
    Ok(ok)
}

fn solve_one(args: &RunArgs, grid: Option<usize>) -> Result<bool> {
    let (cfg, problem) = resolve(args)?;
    let n = grid
        .or_else(|| problem.grids.first().copied())
        .ok_or_else(|| Error::InvalidArgument("no grid given".into()))?;
    let mut ok = true;
    for &scheme in &problem.schemes {
        let p = problem.with_scheme(scheme);
        let out = solve(&p, n, &cfg.solver)?;
        let err = out.error.map_or_else(|| "n/a".into(), |e| fmt_sci(e, 6));
        println!(
            "{} / {scheme}: grid {n}, {} steps of {}, error {err}, stability {:.4e} <= {:.4e}",
            p.name,
            out.steps,
            fmt_sci(out.dt, 3),
            out.stability.lhs,
            out.stability.rhs
        );
        ok &= out.stability.holds();
        if cfg.output.vtk {
            let dir = cfg.output.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            let path = dir.join(format!("{}_{scheme}_{n}.vtk", p.name));
            write_vtk(&out.field, &p.name, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(ok)
}

fn props(seed: u64) -> Result<bool> {
    let results = run_properties(seed)?;
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    Ok(results.iter().all(|r| r.passed))
}

fn list() -> Result<bool> {
    for p in registry() {
        let schemes: Vec<&str> = p.schemes.iter().map(|s| s.name()).collect();
        println!("{:<18} {}D  [{}]  {}", p.name, p.dim, schemes.join(","), p.description);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Study(args) => study(args),
        Command::Solve { run, grid } => solve_one(run, *grid),
        Command::Props { seed } => props(*seed),
        Command::List => list(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: a check failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
