//! Accelerated proximal outer loop.
//!
//! With `λ = 1/(2H)`, `A₀ = 0` and `v₀ = x₀`, each outer iteration does
//!
//! ```text
//! a_{k+1} = (λ + √(λ² + 4λA_k)) / 2,   A_{k+1} = A_k + a_{k+1}
//! x̃_k     = (A_k v_k + a_{k+1} x_k) / A_{k+1}
//! v_{k+1} ≈ argmin_y f(y) + H/2 ‖y − x̃_k‖²
//! x_{k+1} = x_k − a_{k+1} ∇f(v_{k+1})
//! ```
//!
//! The subproblem is handed to a [`ProxSolver`]. [`catalyst_cdm`] uses
//! randomized coordinate descent with a fixed iteration budget;
//! [`ExactProx`] plugs in a closed-form minimizer for analysis.

use super::budget::{inner_budget, optimal_h, outer_budget};
use super::cdm::{cdm_run, CoordinateSampler};
use super::{Prng, Recorder, SolverConfig, SolverRun, StopReason};
use crate::error::Result;
use crate::oracles::{EnvelopeOracle, Oracle};

/// Coefficients and sequences of the outer loop.
#[derive(Debug, Clone)]
pub struct MetaState {
    alpha_sum: f64,
    lambda: f64,
    a_next: f64,
    v: Vec<f64>,
    x: Vec<f64>,
    xt: Vec<f64>,
    outer_iter: u64,
}

/// Positive root of `a² = λ (A + a)`.
pub fn next_coefficient(lambda: f64, alpha_sum: f64) -> f64 {
    (lambda + (lambda * lambda + 4.0 * lambda * alpha_sum).sqrt()) / 2.0
}

impl MetaState {
    pub fn new(x0: Vec<f64>, h: f64) -> Self {
        Self {
            alpha_sum: 0.0,
            lambda: 1.0 / (2.0 * h),
            a_next: 0.0,
            v: x0.clone(),
            xt: x0.clone(),
            x: x0,
            outer_iter: 0,
        }
    }

    /// Computes `a_{k+1}`, `A_{k+1}` and the proximal center `x̃_k`.
    /// Returns `a_{k+1}`.
    pub fn advance(&mut self) -> f64 {
        let a = next_coefficient(self.lambda, self.alpha_sum);
        let prev = self.alpha_sum;
        self.alpha_sum = prev + a;
        let (wv, wx) = self.center_weights(prev, a);
        for ((t, v), x) in self.xt.iter_mut().zip(&self.v).zip(&self.x) {
            *t = wv * v + wx * x;
        }
        self.a_next = a;
        a
    }

    fn center_weights(&self, prev: f64, a: f64) -> (f64, f64) {
        (prev / self.alpha_sum, a / self.alpha_sum)
    }

    /// Weights of `v_k` and `x_k` in the latest center.
    pub fn last_center_weights(&self) -> (f64, f64) {
        self.center_weights(self.alpha_sum - self.a_next, self.a_next)
    }

    /// Stores `v_{k+1}` and takes `x_{k+1} = x_k − a_{k+1} ∇f(v_{k+1})`.
    pub fn complete(&mut self, v_next: Vec<f64>, grad_at_v: &[f64]) {
        for (x, g) in self.x.iter_mut().zip(grad_at_v) {
            *x -= self.a_next * g;
        }
        self.v = v_next;
        self.outer_iter += 1;
    }

    pub fn alpha_sum(&self) -> f64 {
        self.alpha_sum
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The most recent `a_{k+1}`.
    pub fn a(&self) -> f64 {
        self.a_next
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn center(&self) -> &[f64] {
        &self.xt
    }

    pub fn outer_iter(&self) -> u64 {
        self.outer_iter
    }
}

/// Result of one subproblem solve.
#[derive(Debug, Clone)]
pub struct ProxStep {
    /// Approximate minimizer `v_{k+1}`.
    pub y: Vec<f64>,
    /// `∇f(y)` of the base objective.
    pub grad: Vec<f64>,
    /// `f(y)` of the base objective.
    pub value: f64,
    pub cost_units: u64,
    pub inner_iters: u64,
}

/// Approximately minimizes `f(y) + H/2 ‖y − center‖²`.
pub trait ProxSolver<O: Oracle> {
    fn solve(&mut self, oracle: &O, center: &[f64], h: f64) -> Result<ProxStep>;
}

/// Closed-form subproblem solutions, for problems that have them.
pub struct ExactProx<F>(pub F);

impl<O, F> ProxSolver<O> for ExactProx<F>
where
    O: Oracle,
    F: FnMut(&[f64], f64) -> Vec<f64>,
{
    fn solve(&mut self, oracle: &O, center: &[f64], h: f64) -> Result<ProxStep> {
        let y = (self.0)(center, h);
        let grad = oracle.gradient(&y)?;
        let value = oracle.value(&y)?;
        Ok(ProxStep {
            y,
            grad,
            value,
            cost_units: oracle.gradient_cost(),
            inner_iters: 0,
        })
    }
}

/// Randomized coordinate descent on the envelope with sampling
/// `p_i = (H + L_i)/Z` and steps `1/(H + L_i)`, warm-started at the center.
pub struct CdmProx {
    sampler: CoordinateSampler,
    inv_lipschitz: Vec<f64>,
    n_inner: u64,
    rng: Prng,
    verify_stop: bool,
}

impl CdmProx {
    pub fn new(component_lipschitz: &[f64], h: f64, n_inner: u64, seed: u64, verify_stop: bool) -> Result<Self> {
        let ell: Vec<f64> = component_lipschitz.iter().map(|l| l + h).collect();
        Ok(Self {
            sampler: CoordinateSampler::new(&ell)?,
            inv_lipschitz: ell.iter().map(|l| 1.0 / l).collect(),
            n_inner,
            rng: super::prng(seed),
            verify_stop,
        })
    }

    pub fn sampler(&self) -> &CoordinateSampler {
        &self.sampler
    }

    pub fn n_inner(&self) -> u64 {
        self.n_inner
    }
}

impl<O: Oracle> ProxSolver<O> for CdmProx {
    fn solve(&mut self, oracle: &O, center: &[f64], h: f64) -> Result<ProxStep> {
        let env = EnvelopeOracle::new(oracle, center.to_vec(), h)?;
        let mut state = env.init_state(center.to_vec())?;
        let mut done = 0u64;
        if self.verify_stop {
            let chunk = (oracle.dim() as u64).max(1);
            while done < self.n_inner {
                let k = chunk.min(self.n_inner - done);
                cdm_run(&env, &mut state, &self.sampler, &self.inv_lipschitz, k, &mut self.rng)?;
                done += k;
                let g = env.state_gradient(&mut state);
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if subproblem_stop(norm, env.point(&state), center, h) {
                    break;
                }
            }
        } else {
            cdm_run(&env, &mut state, &self.sampler, &self.inv_lipschitz, self.n_inner, &mut self.rng)?;
            done = self.n_inner;
        }

        let mut base = state.into_base();
        let grad = oracle.state_gradient(&mut base);
        let value = oracle.state_value(&base);
        Ok(ProxStep {
            y: oracle.point(&base).to_vec(),
            grad,
            value,
            cost_units: oracle.work(&base),
            inner_iters: done,
        })
    }
}

/// Inexactness test for a subproblem solution:
/// `‖∇F(y)‖ ≤ (H/2) ‖y − x̃‖`.
pub fn subproblem_stop(grad_norm: f64, y: &[f64], center: &[f64], h: f64) -> bool {
    let dist = y
        .iter()
        .zip(center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    grad_norm <= 0.5 * h * dist
}

/// Runs the outer loop for at most `n_outer` iterations. Returns the
/// iterate `v_k` with the lowest objective seen (earliest on ties).
pub fn accelerated_proximal<O, P>(
    oracle: &O,
    x0: &[f64],
    h: f64,
    n_outer: u64,
    config: &SolverConfig,
    name: &str,
    prox: &mut P,
) -> Result<SolverRun>
where
    O: Oracle,
    P: ProxSolver<O>,
{
    config.validate()?;
    let mut rec = Recorder::new(name, config);
    let f0 = oracle.value(x0)?;
    let mut best = (f0, x0.to_vec());
    let mut meta = MetaState::new(x0.to_vec(), h);
    let mut cost = 0u64;
    let mut stop = rec.record(0, 0, || Ok(f0))?;

    while stop.is_none() {
        let k = meta.outer_iter();
        if k >= n_outer {
            stop = Some(StopReason::Budget);
            break;
        }
        if let Some(s) = rec.exhausted(k, cost) {
            stop = Some(s);
            break;
        }
        meta.advance();
        let step = prox.solve(oracle, meta.center(), h).map_err(|e| rec.attach(e))?;
        cost += step.cost_units;
        let value = step.value;
        if !value.is_finite() {
            return Err(rec.numeric(format!("objective became {value} at outer iteration {}", k + 1)));
        }
        if value < best.0 {
            best = (value, step.y.clone());
        }
        meta.complete(step.y, &step.grad);

        let iter = meta.outer_iter();
        let due = iter % config.trace_every == 0 || iter == n_outer;
        let reached = config.f_star.is_some_and(|f| value - f <= config.eps);
        if due || reached {
            stop = rec.record(iter, cost, || Ok(value))?;
        }
    }

    Ok(SolverRun {
        x: best.1,
        trace: rec.finish(),
        iterations: meta.outer_iter(),
        cost_units: cost,
        stop: stop.unwrap_or(StopReason::Budget),
    })
}

/// Budgets and constants resolved for one Catalyst CDM run.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalystPlan {
    pub h: f64,
    /// `Σ (H + L_i)`.
    pub z: f64,
    pub lipschitz: f64,
    pub r2: f64,
    pub n_outer: u64,
    pub n_inner: u64,
}

impl CatalystPlan {
    pub fn resolve<O: Oracle>(oracle: &O, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let lips = oracle.component_lipschitz();
        let h = if config.h > 0.0 { config.h } else { optimal_h(&lips)? };
        let z: f64 = lips.iter().map(|l| h + l).sum();
        let lipschitz = oracle.gradient_lipschitz();
        let r2 = config.r2_estimate.unwrap_or(oracle.dim() as f64);
        let n_outer = outer_budget(h, r2, config.eps);
        let n_inner = match config.inner_budget_override {
            Some(n) => n,
            None => inner_budget(z, h, lipschitz, n_outer, config.delta)?,
        };
        Ok(Self {
            h,
            z,
            lipschitz,
            r2,
            n_outer,
            n_inner,
        })
    }
}

/// The accelerated outer loop with coordinate descent inner solves.
pub fn catalyst_cdm<O: Oracle>(oracle: &O, x0: &[f64], config: &SolverConfig) -> Result<SolverRun> {
    let plan = CatalystPlan::resolve(oracle, config)?;
    log::debug!(
        "ccdm: H={:.4e} Z/H={:.1} L/H={:.1} outer={} inner={}",
        plan.h,
        plan.z / plan.h,
        plan.lipschitz / plan.h,
        plan.n_outer,
        plan.n_inner
    );
    let mut prox = CdmProx::new(
        &oracle.component_lipschitz(),
        plan.h,
        plan.n_inner,
        config.seed,
        config.verify_stop,
    )?;
    accelerated_proximal(oracle, x0, plan.h, plan.n_outer, config, "ccdm", &mut prox)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{QuadraticProblem, SoftMaxProblem};
    use crate::sparse::SparseMatrix;

    #[test]
    fn coefficient_recurrence_by_hand() {
        let mut m = MetaState::new(vec![0.0], 0.5);
        assert_eq!(m.lambda(), 1.0);
        let a1 = m.advance();
        assert_eq!(a1, 1.0);
        assert_eq!(m.alpha_sum(), 1.0);
        m.complete(vec![0.0], &[0.0]);
        let a2 = m.advance();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((a2 - golden).abs() < 1e-15);
        assert!((m.alpha_sum() - (1.0 + golden)).abs() < 1e-15);
        assert!((a2 - 1.6180).abs() < 1e-4);
        assert!((m.alpha_sum() - 2.6180).abs() < 1e-4);
    }

    #[test]
    fn root_identity_and_center_weights() {
        let mut m = MetaState::new(vec![1.0, -1.0], 0.37);
        for _ in 0..500 {
            let a = m.advance();
            let rel = (a * a - m.lambda() * m.alpha_sum()).abs() / (a * a);
            assert!(rel < 1e-10);
            let (wv, wx) = m.last_center_weights();
            assert!((wv + wx - 1.0).abs() < 1e-12);
            m.complete(vec![0.0, 0.0], &[0.1, 0.2]);
        }
    }

    #[test]
    fn first_center_is_start() {
        let mut m = MetaState::new(vec![2.0, 3.0], 1.0);
        m.advance();
        assert_eq!(m.center(), &[2.0, 3.0]);
    }

    #[test]
    fn stop_rule_cases() {
        assert!(subproblem_stop(0.0, &[1.0, 2.0], &[1.0, 2.0], 3.0));
        // ‖y − x̃‖ = 5, H = 2: threshold 5, so H‖y − x̃‖ = 10 fails.
        assert!(!subproblem_stop(10.0, &[3.0, 4.0], &[0.0, 0.0], 2.0));
        assert!(subproblem_stop(5.0, &[3.0, 4.0], &[0.0, 0.0], 2.0));
    }

    #[test]
    fn stop_rule_at_envelope_minimizer() {
        let q = QuadraticProblem::new(vec![1.0, 5.0, 0.2], vec![1.0, 2.0, 3.0]).unwrap();
        let center = [0.0, 0.0, 0.0];
        let h = 1.5;
        let y = q.envelope_minimizer(&center, h);
        let env = EnvelopeOracle::new(&q, center.to_vec(), h).unwrap();
        let g = env.gradient(&y).unwrap();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-14);
        assert!(subproblem_stop(norm, &y, &center, h));
    }

    #[test]
    fn zero_problem_stays_put() {
        let a = SparseMatrix::from_triplets(&[], 4, 3).unwrap();
        let p = SoftMaxProblem::new(a, vec![0.0; 3], 0.6).unwrap();
        let cfg = SolverConfig {
            h: 1.0,
            max_iters: Some(5),
            ..Default::default()
        };
        let run = catalyst_cdm(&p, &[0.0; 3], &cfg).unwrap();
        assert_eq!(run.x, vec![0.0; 3]);
        for r in &run.trace.records {
            assert!((r.f_value - 0.6 * 4f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn plan_uses_mean_constant_when_auto() {
        let q = QuadraticProblem::new(vec![1.0, 2.0, 3.0], vec![0.0; 3]).unwrap();
        let cfg = SolverConfig {
            eps: 1e-2,
            r2_estimate: Some(1.0),
            ..Default::default()
        };
        let plan = CatalystPlan::resolve(&q, &cfg).unwrap();
        assert_eq!(plan.h, 2.0);
        assert_eq!(plan.z, 12.0);
        assert_eq!(plan.n_outer, outer_budget(2.0, 1.0, 1e-2));
        assert_eq!(plan.n_inner, inner_budget(12.0, 2.0, 3.0, plan.n_outer, 0.1).unwrap());
    }

    #[test]
    fn verify_stop_ends_inner_solves_early() {
        let q = QuadraticProblem::new(vec![1.0, 2.0, 3.0, 4.0], vec![1.0; 4]).unwrap();
        let mut prox = CdmProx::new(&q.component_lipschitz(), 2.5, 10_000, 1, true).unwrap();
        let step = prox.solve(&q, &[0.0; 4], 2.5).unwrap();
        assert!(step.inner_iters < 10_000);
        let mut full = CdmProx::new(&q.component_lipschitz(), 2.5, 10_000, 1, false).unwrap();
        assert_eq!(full.solve(&q, &[0.0; 4], 2.5).unwrap().inner_iters, 10_000);
    }
}
