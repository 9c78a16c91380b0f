use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use relaxfr::output::OutputFormat;
use relaxfr::problems::{get_problem, PROBLEM_NAMES};
use relaxfr::runner::{convergence, RunConfig, Simulation};
use relaxfr::tableau::{DoubleButcherTableau, TABLEAU_NAMES};
use relaxfr::Error;

#[derive(Parser, Debug)]
#[command(name = "relaxfr", version, about = "Relaxation flux reconstruction solver for hyperbolic conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct Overrides {
    /// Problem name (see `list-problems`).
    #[arg(long)]
    problem: Option<String>,
    /// Flat `key = value` config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    tableau: Option<String>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Any config key, as `key=value`; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a problem to its final time.
    Run {
        #[command(flatten)]
        overrides: Overrides,
        /// Directory for frames and report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<OutputFormat>,
        /// Steps between intermediate frames (0: first and last only).
        #[arg(long)]
        output_every: Option<usize>,
    },
    /// List registered problems.
    ListProblems,
    /// Check structure and order conditions of every registered tableau.
    VerifyTableaux,
    /// Grid refinement study against the exact solution.
    Convergence {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
}

fn build_config(o: &Overrides) -> anyhow::Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut cfg = RunConfig::new(o.problem.as_deref().unwrap_or(""));
            cfg.apply_kv_text(&text)?;
            cfg
        }
        None => RunConfig::new(o.problem.as_deref().unwrap_or("")),
    };
    if let Some(p) = &o.problem {
        cfg.problem = p.clone();
    }
    if cfg.problem.is_empty() {
        bail!("no problem given; use --problem or a config file with `problem = ...`");
    }
    cfg.nx = o.nx.or(cfg.nx);
    cfg.ny = o.ny.or(cfg.ny);
    cfg.degree = o.degree.or(cfg.degree);
    cfg.eps_max = o.eps_max.or(cfg.eps_max);
    cfg.eps_min = o.eps_min.or(cfg.eps_min);
    if let Some(t) = &o.tableau {
        cfg.tableau = Some(t.clone());
    }
    cfg.cfl = o.cfl.or(cfg.cfl);
    cfg.t_final = o.t_final.or(cfg.t_final);
    for kv in &o.set {
        let (k, v) = kv.split_once('=').with_context(|| format!("expected KEY=VALUE, got `{kv}`"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn list_problems() -> anyhow::Result<()> {
    for name in PROBLEM_NAMES {
        let p = get_problem(name)?;
        let res = if p.dim() == 2 {
            format!("{}x{}", p.n[0], p.n[1])
        } else {
            p.n[0].to_string()
        };
        println!(
            "{:<18} {:<16} N={} elements={:<6} t_final={:<6} eps_max={:<8.1e} {:<17} {}",
            p.name,
            p.equation.name(),
            p.degree,
            res,
            p.t_final,
            p.eps_max,
            p.tableau,
            p.description
        );
    }
    Ok(())
}

fn verify_tableaux() -> anyhow::Result<bool> {
    let mut all_ok = true;
    for name in TABLEAU_NAMES {
        let tab = DoubleButcherTableau::by_name(name)?;
        let structure = tab.verify_structure();
        let order = tab.verify_order(tab.order);
        let ok = structure.passed() && order.passed();
        all_ok &= ok;
        println!(
            "{:<18} stages={} order={} structure={} order_conditions={} ({} checks, max residual {:.2e}){}",
            tab.name,
            tab.stages,
            tab.order,
            if structure.passed() { "ok" } else { "FAIL" },
            if order.passed() { "ok" } else { "FAIL" },
            order.checks,
            order.max_residual.max(structure.max_residual),
            if tab.implicit_stiffly_accurate() { " stiffly-accurate" } else { "" }
        );
        for v in structure.violations.iter().chain(&order.violations) {
            println!("    violation: {v}");
        }
    }
    Ok(all_ok)
}

fn run(o: &Overrides, out: &Option<PathBuf>, format: Option<OutputFormat>, every: Option<usize>) -> anyhow::Result<()> {
    let mut cfg = build_config(o)?;
    if out.is_some() {
        cfg.out_dir = out.clone();
    }
    if let Some(f) = format {
        cfg.format = f;
    }
    if let Some(e) = every {
        cfg.output_every = e;
    }
    let mut sim = Simulation::new(&cfg)?;
    log::info!(
        "{}: {} elements, N={}, {}, t_final={}",
        sim.problem.name,
        sim.disc.mesh.n_elements(),
        sim.disc.basis.degree,
        sim.disc.tableau.name,
        sim.t_final
    );
    let report = sim.run()?;
    print!("{}", report.to_kv_string());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Inadmissible { .. }) => 2,
        Some(Error::NonFinite { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            overrides,
            out,
            format,
            output_every,
        } => run(overrides, out, *format, *output_every),
        Command::ListProblems => list_problems(),
        Command::VerifyTableaux => match verify_tableaux() {
            Ok(true) => Ok(()),
            Ok(false) => Err(anyhow::anyhow!("tableau verification failed")),
            Err(e) => Err(e),
        },
        Command::Convergence { overrides, levels } => build_config(overrides)
            .and_then(|cfg| Ok(convergence(&cfg, *levels)?))
            .map(|rows| {
                println!("{:>8} {:>24} {:>8}", "nx", "l2_error", "eoc");
                for r in rows {
                    let eoc = r.eoc.map(|e| format!("{e:.3}")).unwrap_or_else(|| "-".into());
                    println!("{:>8} {:>24.16e} {:>8}", r.nx, r.l2_error, eoc);
                }
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
