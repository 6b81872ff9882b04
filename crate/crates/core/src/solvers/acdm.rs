//! Accelerated coordinate descent with sampling `p_i ∝ √L_i` (non-strongly
//! convex variant).
//!
//! With `S = Σ √L_i`, each step solves `S² a² = A + a`, sets `α = a / (A + a)`
//! and
//!
//! ```text
//! y = (1 − α) x + α v
//! x = y − ∇_i f(y) / L_i · e_i
//! v = v − a S / √L_i · ∇_i f(y) · e_i
//! ```
//!
//! which gives `E f(x_k) − f* ≤ 2 S² ‖x₀ − x*‖² / k²`.

use super::cdm::CoordinateSampler;
use super::{Recorder, SolverConfig, SolverRun};
use crate::error::{Error, Result};
use crate::oracles::Oracle;

/// Step coefficient: positive root of `S² a² − a − A = 0`.
pub fn acdm_coefficient(s: f64, alpha_sum: f64) -> f64 {
    let s2 = s * s;
    (1.0 + (1.0 + 4.0 * s2 * alpha_sum).sqrt()) / (2.0 * s2)
}

/// Runs ACDM from `x0`. Iterations count coordinate steps; each step forms
/// the combination `y` explicitly, so it costs `n + m + 2 nnz(A_i)` units on
/// SoftMax rather than `nnz(A_i)`.
pub fn acdm_run<O: Oracle>(oracle: &O, x0: &[f64], config: &SolverConfig) -> Result<SolverRun> {
    config.validate()?;
    let lipschitz = oracle.component_lipschitz();
    let roots: Vec<f64> = lipschitz.iter().map(|l| l.sqrt()).collect();
    let sampler = CoordinateSampler::new(&roots)
        .map_err(|e| Error::config(format!("ACDM needs positive coordinate constants: {e}")))?;
    let s: f64 = roots.iter().sum();
    let mut rng = super::prng(config.seed);

    let mut rec = Recorder::new("acdm", config);
    let mut x = oracle.init_state(x0.to_vec())?;
    let mut cost = oracle.work(&x);
    let mut v = x.clone();
    let mut y = x.clone();
    let mut alpha_sum = 0.0;

    let epoch = oracle.dim() as u64 * config.trace_every;
    let mut iter = 0u64;
    let stop = loop {
        if let Some(st) = rec.record(iter, cost, || Ok(oracle.state_value(&x)))? {
            break st;
        }
        if let Some(st) = rec.exhausted(iter, cost) {
            break st;
        }
        let chunk = config.max_iters.map_or(epoch, |m| epoch.min(m - iter));
        for _ in 0..chunk {
            let i = sampler.sample(&mut rng);
            let a = acdm_coefficient(s, alpha_sum);
            alpha_sum += a;
            let alpha = a / alpha_sum;

            let w = oracle.work(&y);
            oracle
                .combine_into(&mut y, &x, 1.0 - alpha, &v, alpha)
                .map_err(|e| rec.attach(e))?;
            cost += oracle.work(&y) - w;
            let g = oracle.component_gradient(&y, i);

            x.clone_from(&y);
            let w = oracle.work(&x);
            oracle.apply_step(&mut x, i, -g / lipschitz[i]).map_err(|e| rec.attach(e))?;
            cost += oracle.work(&x) - w;

            let w = oracle.work(&v);
            oracle
                .apply_step(&mut v, i, -a * s / roots[i] * g)
                .map_err(|e| rec.attach(e))?;
            cost += oracle.work(&v) - w;
        }
        iter += chunk;
    };

    Ok(SolverRun {
        x: oracle.point(&x).to_vec(),
        trace: rec.finish(),
        iterations: iter,
        cost_units: cost,
        stop,
    })
}
