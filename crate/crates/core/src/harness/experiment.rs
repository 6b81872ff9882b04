//! Experiment runs: one instance, a reference value, every requested
//! `(solver, seed)` pair, one CSV trace per run and a JSON summary.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::io::{read_instance, write_json, InstanceMeta};
use super::reference::{reference_solution, ReferenceSolution};
use super::{gen_nonuniform, gen_uniform, simplex_b};
use crate::error::{Error, Result};
use crate::oracles::{Oracle, SoftMaxProblem};
use crate::solvers::{prng, RunTrace, SolverConfig, SolverKind, StopReason};
use crate::sparse::read_matrix_market;

pub const SUMMARY_FILE: &str = "summary.json";
/// Gaps below this are written as this value.
pub const GAP_FLOOR: f64 = 1e-15;
const MAX_DECADE: i32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Uniform,
    Nonuniform,
    File,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Uniform => "uniform",
            Mode::Nonuniform => "nonuniform",
            Mode::File => "file",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Mode::Uniform),
            "nonuniform" => Ok(Mode::Nonuniform),
            "file" => Ok(Mode::File),
            _ => Err(Error::config(format!(
                "unknown mode {s:?}; valid modes are uniform, nonuniform, file"
            ))),
        }
    }
}

/// Everything a run needs. Solver settings are flattened into the same JSON
/// object; `seed` there is the instance seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub matrix: Option<PathBuf>,
    /// `b` file for file mode; generated from the seed when absent.
    pub b: Option<PathBuf>,
    pub m: usize,
    pub n: usize,
    pub density: f64,
    pub gamma: f64,
    /// Sweep over several `gamma`; each gets its own subdirectory.
    pub gammas: Vec<f64>,
    /// Solver seeds; empty means the instance seed only.
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverKind>,
    #[serde(flatten)]
    pub solver: SolverConfig,
    pub out: PathBuf,
    pub ref_tol: f64,
    /// Seconds allowed for the reference run.
    pub ref_time_cap: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            mode: Mode::Nonuniform,
            matrix: None,
            b: None,
            m: 1000,
            n: 2000,
            density: 0.2,
            gamma: 0.6,
            gammas: Vec::new(),
            seeds: Vec::new(),
            solvers: SolverKind::ALL.to_vec(),
            solver: SolverConfig::default(),
            out: PathBuf::from("out"),
            ref_tol: 1e-9,
            ref_time_cap: 120.0,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        for &g in std::iter::once(&self.gamma).chain(&self.gammas) {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::config(format!("gamma must be positive, got {g}")));
            }
        }
        match self.mode {
            Mode::Uniform => {
                if !(self.density > 0.0 && self.density <= 1.0) {
                    return Err(Error::config(format!("density must lie in (0, 1], got {}", self.density)));
                }
                if self.m < 2 || self.n < 2 {
                    return Err(Error::config("uniform mode needs m, n >= 2"));
                }
            }
            Mode::Nonuniform => {
                if self.m < 10 || self.n < 10 {
                    return Err(Error::config("nonuniform mode needs m, n >= 10"));
                }
            }
            Mode::File => {
                if self.matrix.is_none() {
                    return Err(Error::config("file mode needs a matrix path"));
                }
            }
        }
        if self.solvers.is_empty() {
            return Err(Error::config("no solvers selected"));
        }
        if !(self.ref_tol > 0.0) || !(self.ref_time_cap > 0.0) {
            return Err(Error::config("reference tolerance and time cap must be positive"));
        }
        Ok(())
    }

    pub fn run_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.solver.seed]
        } else {
            self.seeds.clone()
        }
    }

    /// Builds (or loads) the instance for `self.gamma`.
    pub fn build_instance(&self) -> Result<(SoftMaxProblem, InstanceMeta)> {
        let seed = self.solver.seed;
        let problem = match self.mode {
            Mode::Uniform => gen_uniform(self.m, self.n, self.density, self.gamma, seed)?,
            Mode::Nonuniform => gen_nonuniform(self.m, self.n, self.gamma, seed)?,
            Mode::File => {
                let matrix = self.matrix.as_deref().ok_or_else(|| Error::config("file mode needs a matrix path"))?;
                match &self.b {
                    Some(b) => read_instance(matrix, b, self.gamma)?,
                    None => {
                        let a = read_matrix_market(matrix)?;
                        let b = simplex_b(&a, &mut prng(seed))?;
                        SoftMaxProblem::new(a, b, self.gamma)?
                    }
                }
            }
        };
        let density = (self.mode == Mode::Uniform).then_some(self.density);
        let seed = (self.mode != Mode::File || self.b.is_none()).then_some(seed);
        let meta = InstanceMeta::describe(&problem, self.mode.name(), density, seed);
        Ok((problem, meta))
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub solver: String,
    pub seed: u64,
    pub iter: u64,
    pub cost_units: u64,
    pub wall_ms: f64,
    pub f_value: f64,
    pub gap: f64,
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn write_trace_csv(path: &Path, trace: &RunTrace, f_star: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in &trace.records {
        w.serialize(TraceRow {
            solver: trace.solver.clone(),
            seed: trace.seed,
            iter: r.iter,
            cost_units: r.cost_units,
            wall_ms: (r.wall_ms * 1e3).round() / 1e3,
            f_value: r.f_value,
            gap: (r.f_value - f_star).max(GAP_FLOOR),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FStar {
    pub value: f64,
    pub reference: ReferenceSolution,
    /// `reference.f_star − value`: how far the best benchmark iterate
    /// undercut the reference.
    pub lowered_by: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub solver: SolverKind,
    pub seed: u64,
    pub csv: String,
    pub iterations: u64,
    pub cost_units: u64,
    pub stop: Option<StopReason>,
    /// Set when the run failed; the CSV then holds the partial trace.
    pub error: Option<String>,
    pub final_gap: Option<f64>,
}

/// Median (over seeds) wall time and cost to first reach a relative gap
/// `(f − f*) / (f(0) − f*) ≤ 10^-decade`. Runs that never reach it count as
/// infinitely slow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecadeEntry {
    pub decade: i32,
    pub rel_gap: f64,
    pub wall_ms: f64,
    pub cost_units: u64,
    pub reached: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub instance: InstanceMeta,
    pub f_star: FStar,
    /// `f(0) − f*`, the normaliser of relative gaps.
    pub initial_gap: f64,
    pub runs: Vec<RunSummary>,
    pub decades: BTreeMap<String, Vec<DecadeEntry>>,
}

impl Summary {
    pub fn decade(&self, solver: SolverKind, decade: i32) -> Option<&DecadeEntry> {
        self.decades.get(solver.name())?.iter().find(|d| d.decade == decade)
    }
}

pub fn csv_name(solver: SolverKind, seed: u64) -> String {
    format!("{solver}_seed{seed}.csv")
}

/// Runs one experiment for `spec.gamma` and writes its outputs to `spec.out`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Summary> {
    spec.validate()?;
    let (problem, meta) = spec.build_instance()?;
    log::info!("instance {}x{} nnz {} gamma {}", meta.m, meta.n, meta.nnz, meta.gamma);
    let reference = reference_solution(&problem, spec.ref_tol, spec.ref_time_cap)?;
    log::info!("reference f* = {} (‖∇f‖ = {:.2e})", reference.f_star, reference.grad_norm_at_ref);
    run_with_reference(spec, &problem, meta, reference)
}

/// As [`run_experiment`] with a precomputed instance and reference.
pub fn run_with_reference(
    spec: &ExperimentSpec,
    problem: &SoftMaxProblem,
    meta: InstanceMeta,
    reference: ReferenceSolution,
) -> Result<Summary> {
    spec.validate()?;
    let out = &spec.out;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let x0 = vec![0.0; problem.dim()];
    let f0 = problem.value(&x0)?;

    let mut traces = Vec::new();
    for &kind in &spec.solvers {
        for seed in spec.run_seeds() {
            let mut config = spec.solver.clone();
            config.seed = seed;
            config.f_star.get_or_insert(reference.f_star);
            log::info!("running {kind} seed {seed}");
            let outcome = match kind.run(problem, &x0, &config) {
                Ok(run) => (run.trace, Some(run.stop), None, run.iterations, run.cost_units),
                Err(Error::Numeric { msg, trace }) => {
                    log::warn!("{kind} seed {seed} failed: {msg}");
                    let trace = trace.map_or_else(|| RunTrace::new(kind.name(), &config), |t| *t);
                    let (iters, cost) = trace.last().map_or((0, 0), |r| (r.iter, r.cost_units));
                    (trace, None, Some(msg), iters, cost)
                }
                Err(e) => return Err(e),
            };
            traces.push((kind, seed, outcome));
        }
    }

    let best_seen = traces
        .iter()
        .flat_map(|(_, _, o)| o.0.records.iter().map(|r| r.f_value))
        .fold(f64::INFINITY, f64::min);
    let f_star = reference.f_star.min(best_seen);
    let initial_gap = f0 - f_star;

    let mut runs = Vec::new();
    let mut reach: BTreeMap<SolverKind, Vec<Vec<Option<(f64, u64)>>>> = BTreeMap::new();
    for (kind, seed, (trace, stop, error, iterations, cost_units)) in &traces {
        let name = csv_name(*kind, *seed);
        write_trace_csv(&out.join(&name), trace, f_star)?;
        let firsts = (1..=MAX_DECADE)
            .map(|d| {
                let target = initial_gap * 10f64.powi(-d);
                trace
                    .records
                    .iter()
                    .find(|r| r.f_value - f_star <= target)
                    .map(|r| (r.wall_ms, r.cost_units))
            })
            .collect();
        reach.entry(*kind).or_default().push(firsts);
        runs.push(RunSummary {
            solver: *kind,
            seed: *seed,
            csv: name,
            iterations: *iterations,
            cost_units: *cost_units,
            stop: *stop,
            error: error.clone(),
            final_gap: trace.last().map(|r| (r.f_value - f_star).max(GAP_FLOOR)),
        });
    }

    let decades = reach
        .into_iter()
        .map(|(kind, per_run)| (kind.name().to_string(), decade_table(&per_run)))
        .collect();

    let summary = Summary {
        instance: meta,
        f_star: FStar {
            value: f_star,
            lowered_by: reference.f_star - f_star,
            reference,
        },
        initial_gap,
        runs,
        decades,
    };
    write_json(&summary, out.join(SUMMARY_FILE))?;
    Ok(summary)
}

fn decade_table(per_run: &[Vec<Option<(f64, u64)>>]) -> Vec<DecadeEntry> {
    let runs = per_run.len();
    let mut table = Vec::new();
    for d in 0..MAX_DECADE as usize {
        let hits: Vec<(f64, u64)> = per_run.iter().filter_map(|r| r[d]).collect();
        // lower median with misses sorted last
        let mid = (runs - 1) / 2;
        if hits.len() <= mid {
            break;
        }
        let mut walls: Vec<f64> = hits.iter().map(|h| h.0).collect();
        let mut costs: Vec<u64> = hits.iter().map(|h| h.1).collect();
        walls.sort_by(f64::total_cmp);
        costs.sort_unstable();
        let decade = d as i32 + 1;
        table.push(DecadeEntry {
            decade,
            rel_gap: 10f64.powi(-decade),
            wall_ms: walls[mid],
            cost_units: costs[mid],
            reached: hits.len(),
            runs,
        });
    }
    table
}

/// Runs [`run_experiment`] once per entry of `spec.gammas` (or once for
/// `spec.gamma` when the list is empty), each in `out/gamma_<value>`.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<Summary>> {
    if spec.gammas.is_empty() {
        return Ok(vec![run_experiment(spec)?]);
    }
    spec.gammas
        .iter()
        .map(|&g| {
            let mut s = spec.clone();
            s.gamma = g;
            s.gammas.clear();
            s.out = spec.out.join(format!("gamma_{g}"));
            run_experiment(&s)
        })
        .collect()
}
