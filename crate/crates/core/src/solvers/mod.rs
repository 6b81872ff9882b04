//! Solvers over an [`Oracle`](crate::oracles::Oracle).
//!
//! Every solver returns a [`SolverRun`] whose [`RunTrace`] records
//! `(iteration, cost units, wall time, objective)` tuples on a fixed
//! schedule. What an "iteration" means is solver specific:
//!
//! | solver | iteration | trace schedule |
//! |--------|-----------|----------------|
//! | GM, FGM | one full-gradient step | every `trace_every` steps |
//! | CDM, ACDM | one coordinate step | every `trace_every * n` steps |
//! | Catalyst CDM | one outer (proximal) step | every `trace_every` outer steps |
//!
//! Objective evaluations done only for the trace are neither charged in cost
//! units nor counted in wall time.

mod acdm;
mod budget;
mod cdm;
mod gradient;
mod meta;

pub use acdm::{acdm_coefficient, acdm_run};
pub use budget::{
    inner_budget, inner_budget_from_ratios, optimal_h, outer_budget, OUTER_BUDGET_FACTOR,
};
pub use cdm::{cdm_baseline, cdm_run, CoordinateSampler};
pub use gradient::{fgm_reference, fgm_run, gm_run, FgmMomentum, ReferenceRun};
pub use meta::{
    accelerated_proximal, catalyst_cdm, next_coefficient, subproblem_stop, CatalystPlan, CdmProx,
    ExactProx, MetaState, ProxSolver, ProxStep,
};

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::Oracle;

/// Deterministic generator used for coordinate sampling.
pub type Prng = rand_chacha::ChaCha8Rng;

pub fn prng(seed: u64) -> Prng {
    use rand::SeedableRng;
    Prng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Proximal regularization; `0` selects the mean coordinate constant.
    pub h: f64,
    /// Target accuracy in objective value.
    pub eps: f64,
    /// Failure probability for the inner budget, in `(0, 1)`.
    pub delta: f64,
    /// Estimate of `‖x₀ − x*‖²`; defaults to the dimension `n`.
    pub r2_estimate: Option<f64>,
    pub inner_budget_override: Option<u64>,
    /// Wall-clock budget in seconds.
    #[serde(alias = "time_budget_s")]
    pub time_budget: f64,
    /// Stop once this many cost units have been spent.
    pub cost_budget: Option<u64>,
    /// Stop after this many iterations (see the module table).
    pub max_iters: Option<u64>,
    pub seed: u64,
    pub trace_every: u64,
    /// Stop inner solves early on the gradient-norm criterion.
    pub verify_stop: bool,
    /// Known optimal value; enables stopping once `f − f* ≤ eps`.
    pub f_star: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 0.0,
            eps: 1e-6,
            delta: 0.1,
            r2_estimate: None,
            inner_budget_override: None,
            time_budget: 60.0,
            cost_budget: None,
            max_iters: None,
            seed: 0,
            trace_every: 1,
            verify_stop: false,
            f_star: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.time_budget > 0.0) {
            return Err(Error::config(format!(
                "time budget must be positive, got {}",
                self.time_budget
            )));
        }
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(Error::config(format!("H must be finite and nonnegative, got {}", self.h)));
        }
        if let Some(r2) = self.r2_estimate {
            if !(r2 >= 0.0 && r2.is_finite()) {
                return Err(Error::config(format!("R² estimate must be nonnegative, got {r2}")));
            }
        }
        if self.trace_every == 0 {
            return Err(Error::config("trace_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: u64,
    pub cost_units: u64,
    pub wall_ms: f64,
    pub f_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub solver: String,
    pub seed: u64,
    pub config: SolverConfig,
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn new(solver: impl Into<String>, config: &SolverConfig) -> Self {
        Self {
            solver: solver.into(),
            seed: config.seed,
            config: config.clone(),
            records: Vec::new(),
        }
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// First record with `f_value − f_star ≤ gap`.
    pub fn first_reaching(&self, f_star: f64, gap: f64) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.f_value - f_star <= gap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The solver's own iteration budget ran out.
    Budget,
    /// `f − f* ≤ eps` against the configured reference value.
    TargetReached,
    TimeBudget,
    CostBudget,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub x: Vec<f64>,
    pub trace: RunTrace,
    pub iterations: u64,
    pub cost_units: u64,
    pub stop: StopReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Gm,
    Fgm,
    Cdm,
    Acdm,
    Ccdm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Gm,
        SolverKind::Fgm,
        SolverKind::Cdm,
        SolverKind::Acdm,
        SolverKind::Ccdm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gm => "gm",
            SolverKind::Fgm => "fgm",
            SolverKind::Cdm => "cdm",
            SolverKind::Acdm => "acdm",
            SolverKind::Ccdm => "ccdm",
        }
    }

    pub fn run<O: Oracle>(self, oracle: &O, x0: &[f64], config: &SolverConfig) -> Result<SolverRun> {
        match self {
            SolverKind::Gm => gm_run(oracle, x0, config),
            SolverKind::Fgm => fgm_run(oracle, x0, config),
            SolverKind::Cdm => cdm_baseline(oracle, x0, config),
            SolverKind::Acdm => acdm_run(oracle, x0, config),
            SolverKind::Ccdm => catalyst_cdm(oracle, x0, config),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                let valid: Vec<_> = SolverKind::ALL.iter().map(|k| k.name()).collect();
                Error::config(format!(
                    "unknown solver {s:?}; valid names are {}",
                    valid.join(", ")
                ))
            })
    }
}

/// Shared bookkeeping: trace records, stopping rules, wall clock with
/// measurement time excluded.
pub(crate) struct Recorder {
    trace: RunTrace,
    start: Instant,
    excluded: Duration,
    time_budget: Duration,
    cost_budget: Option<u64>,
    max_iters: Option<u64>,
    target: Option<f64>,
}

impl Recorder {
    pub(crate) fn new(solver: &str, config: &SolverConfig) -> Self {
        Self {
            trace: RunTrace::new(solver, config),
            start: Instant::now(),
            excluded: Duration::ZERO,
            time_budget: Duration::from_secs_f64(config.time_budget.min(1e9)),
            cost_budget: config.cost_budget,
            max_iters: config.max_iters,
            target: config.f_star.map(|f| f + config.eps),
        }
    }

    fn elapsed(&self) -> Duration {
        self.start.elapsed().saturating_sub(self.excluded)
    }

    /// Evaluates `value` off the clock and appends a record. Returns
    /// `Some(TargetReached)` when the target gap is met.
    pub(crate) fn record(
        &mut self,
        iter: u64,
        cost_units: u64,
        value: impl FnOnce() -> Result<f64>,
    ) -> Result<Option<StopReason>> {
        if let Some(last) = self.trace.records.last() {
            if iter <= last.iter || cost_units <= last.cost_units {
                return Ok(None);
            }
        }
        let wall_ms = self.elapsed().as_secs_f64() * 1e3;
        let t0 = Instant::now();
        let f_value = value();
        self.excluded += t0.elapsed();
        let f_value = match f_value {
            Ok(v) if v.is_finite() => v,
            Ok(v) => return Err(self.numeric(format!("objective became {v} at iteration {iter}"))),
            Err(Error::Numeric { msg, .. }) | Err(Error::Input(msg)) => {
                return Err(self.numeric(msg))
            }
            Err(e) => return Err(e),
        };
        self.trace.records.push(TraceRecord {
            iter,
            cost_units,
            wall_ms,
            f_value,
        });
        Ok(self.target.filter(|t| f_value <= *t).map(|_| StopReason::TargetReached))
    }

    /// Budget checks that do not need an objective value.
    pub(crate) fn exhausted(&self, iter: u64, cost_units: u64) -> Option<StopReason> {
        if self.max_iters.is_some_and(|m| iter >= m) {
            return Some(StopReason::MaxIters);
        }
        if self.cost_budget.is_some_and(|c| cost_units >= c) {
            return Some(StopReason::CostBudget);
        }
        if self.elapsed() >= self.time_budget {
            return Some(StopReason::TimeBudget);
        }
        None
    }

    /// Wraps a failure together with the trace recorded so far.
    pub(crate) fn numeric(&self, msg: String) -> Error {
        Error::Numeric {
            msg,
            trace: Some(Box::new(self.trace.clone())),
        }
    }

    pub(crate) fn attach(&self, err: Error) -> Error {
        match err {
            Error::Numeric { msg, trace: None } => self.numeric(msg),
            other => other,
        }
    }

    pub(crate) fn finish(self) -> RunTrace {
        self.trace
    }
}
