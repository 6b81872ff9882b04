use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use proxcd::harness::{
    reference_solution, run_sweep, write_instance, ExperimentSpec, Mode, Summary,
};
use proxcd::SolverKind;

#[derive(Parser, Debug)]
#[command(name = "proxcd", version, about = "Benchmark driver for proximally accelerated coordinate descent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an instance (A.mtx, b.txt, meta.json) to the output directory.
    Generate(Opts),
    /// Compute the reference optimum and write reference.json.
    Reference(Opts),
    /// Run the selected solvers and write CSV traces and summary.json.
    Run(Opts),
    /// Generate, then run; the instance lands in <out>/instance.
    All(Opts),
}

/// Every flag overrides the matching field of `--config`.
#[derive(Args, Debug, Default)]
struct Opts {
    /// JSON file with the same fields as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated list; runs one experiment per value.
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    /// Comma-separated subset of gm,fgm,cdm,acdm,ccdm.
    #[arg(long, value_delimiter = ',', value_parser = parse_solver)]
    solvers: Option<Vec<SolverKind>>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Proximal parameter; 0 picks the mean coordinate constant.
    #[arg(long)]
    h: Option<f64>,
    /// Instance seed (and the solver seed when --seeds is absent).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    time_budget_s: Option<f64>,
    #[arg(long)]
    cost_budget: Option<u64>,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    inner_budget: Option<u64>,
    #[arg(long)]
    trace_every: Option<u64>,
    #[arg(long)]
    verify_stop: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    ref_tol: Option<f64>,
    #[arg(long)]
    ref_time_cap_s: Option<f64>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: proxcd::Error| e.to_string())
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: proxcd::Error| e.to_string())
}

impl Opts {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => ExperimentSpec::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = &self.$flag { spec.$($field).+ = v.clone().into(); })*
            };
        }
        set!(
            mode => mode, m => m, n => n, density => density, gamma => gamma,
            gammas => gammas, solvers => solvers, seeds => seeds, out => out,
            ref_tol => ref_tol, ref_time_cap_s => ref_time_cap,
            eps => solver.eps, delta => solver.delta, h => solver.h, seed => solver.seed,
            time_budget_s => solver.time_budget, trace_every => solver.trace_every,
        );
        if let Some(p) = &self.matrix {
            spec.matrix = Some(p.clone());
            if self.mode.is_none() {
                spec.mode = Mode::File;
            }
        }
        if let Some(p) = &self.b {
            spec.b = Some(p.clone());
        }
        if let Some(v) = self.cost_budget {
            spec.solver.cost_budget = Some(v);
        }
        if let Some(v) = self.max_iters {
            spec.solver.max_iters = Some(v);
        }
        if let Some(v) = self.inner_budget {
            spec.solver.inner_budget_override = Some(v);
        }
        if self.verify_stop {
            spec.solver.verify_stop = true;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn generate(spec: &ExperimentSpec, dir: &Path) -> Result<()> {
    let (problem, meta) = spec.build_instance()?;
    write_instance(&problem, &meta, dir)?;
    println!(
        "wrote {}x{} instance with {} nonzeros to {}",
        meta.m,
        meta.n,
        meta.nnz,
        dir.display()
    );
    Ok(())
}

fn print_summary(summary: &Summary) {
    println!(
        "f* = {:.12} (reference {:.12}, ‖∇f‖ = {:.2e}{})",
        summary.f_star.value,
        summary.f_star.reference.f_star,
        summary.f_star.reference.grad_norm_at_ref,
        if summary.f_star.reference.warning { ", NOT CONVERGED" } else { "" }
    );
    println!("{:<6} {:>8} {:>14} {:>12}", "solver", "rel gap", "cost units", "wall ms");
    for (solver, table) in &summary.decades {
        for d in table {
            println!("{:<6} {:>8.0e} {:>14} {:>12.1}", solver, d.rel_gap, d.cost_units, d.wall_ms);
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(opts) => {
            let spec = opts.spec()?;
            if spec.mode == Mode::File {
                bail!("generate needs --mode uniform or nonuniform");
            }
            generate(&spec, &spec.out)
        }
        Command::Reference(opts) => {
            let spec = opts.spec()?;
            let (problem, _) = spec.build_instance()?;
            let reference = reference_solution(&problem, spec.ref_tol, spec.ref_time_cap)?;
            fs::create_dir_all(&spec.out).with_context(|| format!("creating {}", spec.out.display()))?;
            let path = spec.out.join("reference.json");
            fs::write(&path, serde_json::to_string_pretty(&reference)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            println!("f* = {:.15} (‖∇f‖ = {:.3e})", reference.f_star, reference.grad_norm_at_ref);
            Ok(())
        }
        Command::Run(opts) => {
            let spec = opts.spec()?;
            for summary in run_sweep(&spec)? {
                print_summary(&summary);
            }
            Ok(())
        }
        Command::All(opts) => {
            let spec = opts.spec()?;
            if spec.mode != Mode::File {
                generate(&spec, &spec.out.join("instance"))?;
            }
            for summary in run_sweep(&spec)? {
                print_summary(&summary);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
