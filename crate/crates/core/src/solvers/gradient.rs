//! Full-gradient baselines: gradient descent and Nesterov's fast gradient
//! method, both with constant step `1/L`.

use std::time::Instant;

use super::{Recorder, SolverConfig, SolverRun, StopReason};
use crate::error::{Error, Result};
use crate::oracles::Oracle;

fn step_size<O: Oracle>(oracle: &O, solver: &str) -> Result<f64> {
    let l = oracle.gradient_lipschitz();
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::config(format!("{solver} needs a positive gradient Lipschitz constant, got {l}")));
    }
    Ok(1.0 / l)
}

/// Gradient descent `x ← x − ∇f(x)/L`.
pub fn gm_run<O: Oracle>(oracle: &O, x0: &[f64], config: &SolverConfig) -> Result<SolverRun> {
    config.validate()?;
    let step = step_size(oracle, "GM")?;
    let mut rec = Recorder::new("gm", config);
    let mut x = x0.to_vec();
    let mut cost = 0u64;
    let mut iter = 0u64;
    let mut stop = rec.record(0, 0, || oracle.value(&x))?;
    while stop.is_none() {
        if let Some(s) = rec.exhausted(iter, cost) {
            rec.record(iter, cost, || oracle.value(&x))?;
            stop = Some(s);
            break;
        }
        let g = oracle.gradient(&x).map_err(|e| rec.attach(e))?;
        cost += oracle.gradient_cost();
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        iter += 1;
        if iter % config.trace_every == 0 {
            stop = rec.record(iter, cost, || oracle.value(&x))?;
        }
    }
    Ok(SolverRun {
        x,
        trace: rec.finish(),
        iterations: iter,
        cost_units: cost,
        stop: stop.unwrap_or(StopReason::Budget),
    })
}

/// Momentum sequence `t_{k+1} = (1 + √(1 + 4t_k²)) / 2` from `t₀ = 1`.
#[derive(Debug, Clone, Copy)]
pub struct FgmMomentum {
    t: f64,
}

impl Default for FgmMomentum {
    fn default() -> Self {
        Self { t: 1.0 }
    }
}

impl FgmMomentum {
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Advances to `t_{k+1}` and returns the extrapolation weight
    /// `(t_k − 1) / t_{k+1}`.
    pub fn advance(&mut self) -> f64 {
        let next = (1.0 + (1.0 + 4.0 * self.t * self.t).sqrt()) / 2.0;
        let beta = (self.t - 1.0) / next;
        self.t = next;
        beta
    }

    pub fn reset(&mut self) {
        self.t = 1.0;
    }
}

/// One FGM step from `y`: returns the new `x` given the previous one and
/// updates `y` in place. Also returns `⟨∇f(y), x_new − x_prev⟩` for restarts.
fn fgm_step(
    grad_y: &[f64],
    step: f64,
    y: &mut [f64],
    x_prev: &mut Vec<f64>,
    momentum: &mut FgmMomentum,
) -> f64 {
    let mut x: Vec<f64> = y.iter().zip(grad_y).map(|(yi, gi)| yi - step * gi).collect();
    let beta = momentum.advance();
    let mut progress = 0.0;
    for ((yi, xi), (pi, gi)) in y.iter_mut().zip(&x).zip(x_prev.iter().zip(grad_y)) {
        progress += gi * (xi - pi);
        *yi = xi + beta * (xi - pi);
    }
    std::mem::swap(x_prev, &mut x);
    progress
}

/// Fast gradient method with constant step `1/L`. Records `f(x_k)`.
pub fn fgm_run<O: Oracle>(oracle: &O, x0: &[f64], config: &SolverConfig) -> Result<SolverRun> {
    config.validate()?;
    let step = step_size(oracle, "FGM")?;
    let mut rec = Recorder::new("fgm", config);
    let mut x = x0.to_vec();
    let mut y = x0.to_vec();
    let mut momentum = FgmMomentum::default();
    let mut cost = 0u64;
    let mut iter = 0u64;
    let mut stop = rec.record(0, 0, || oracle.value(&x))?;
    while stop.is_none() {
        if let Some(s) = rec.exhausted(iter, cost) {
            rec.record(iter, cost, || oracle.value(&x))?;
            stop = Some(s);
            break;
        }
        let g = oracle.gradient(&y).map_err(|e| rec.attach(e))?;
        cost += oracle.gradient_cost();
        fgm_step(&g, step, &mut y, &mut x, &mut momentum);
        iter += 1;
        if iter % config.trace_every == 0 {
            stop = rec.record(iter, cost, || oracle.value(&x))?;
        }
    }
    Ok(SolverRun {
        x,
        trace: rec.finish(),
        iterations: iter,
        cost_units: cost,
        stop: stop.unwrap_or(StopReason::Budget),
    })
}

/// Output of [`fgm_reference`].
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub x: Vec<f64>,
    /// Lowest objective evaluated.
    pub f_value: f64,
    /// `‖∇f‖₂` at `x`.
    pub grad_norm: f64,
    pub iterations: u64,
    pub wall_ms: f64,
    pub converged: bool,
}

/// FGM with gradient-based adaptive restart, run until `‖∇f(x)‖₂ ≤ tol` or
/// `time_cap` seconds. Used to compute reference optima.
pub fn fgm_reference<O: Oracle>(oracle: &O, x0: &[f64], tol: f64, time_cap: f64) -> Result<ReferenceRun> {
    if !(tol > 0.0) {
        return Err(Error::config(format!("reference tolerance must be positive, got {tol}")));
    }
    let start = Instant::now();
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut x = x0.to_vec();
    let mut g = oracle.gradient(&x)?;
    let mut grad_norm = norm(&g);
    let mut f_value = oracle.value(&x)?;
    let l = oracle.gradient_lipschitz();
    if grad_norm <= tol || !(l > 0.0) {
        return Ok(ReferenceRun {
            x,
            f_value,
            grad_norm,
            iterations: 0,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            converged: grad_norm <= tol,
        });
    }
    let step = 1.0 / l;
    let mut y = x.clone();
    let mut momentum = FgmMomentum::default();
    let mut iterations = 0u64;
    const CHECK_EVERY: u64 = 10;
    loop {
        let gy = oracle.gradient(&y)?;
        let progress = fgm_step(&gy, step, &mut y, &mut x, &mut momentum);
        iterations += 1;
        if progress > 0.0 {
            momentum.reset();
            y.copy_from_slice(&x);
        }
        if iterations % CHECK_EVERY == 0 {
            g = oracle.gradient(&x)?;
            grad_norm = norm(&g);
            f_value = f_value.min(oracle.value(&x)?);
            if !grad_norm.is_finite() {
                return Err(Error::numeric("reference run diverged"));
            }
            if grad_norm <= tol || start.elapsed().as_secs_f64() >= time_cap {
                break;
            }
        }
    }
    Ok(ReferenceRun {
        x,
        f_value,
        grad_norm,
        iterations,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        converged: grad_norm <= tol,
    })
}
