//! Randomized coordinate descent with importance sampling.
//!
//! Coordinates are drawn with probability proportional to a weight vector
//! (the coordinate Lipschitz constants for plain CDM) using a cumulative
//! table and binary search, O(log n) per draw.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::{Prng, Recorder, SolverConfig, SolverRun};
use crate::error::{Error, Result};
use crate::oracles::Oracle;

#[derive(Debug, Clone)]
pub struct CoordinateSampler {
    index: WeightedIndex<f64>,
    probabilities: Vec<f64>,
}

impl CoordinateSampler {
    /// Sampler with `P(i) = weights[i] / Σ weights`.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::config(format!(
                "sampling weights must be positive and finite, got {w}"
            )));
        }
        let index = WeightedIndex::new(weights)
            .map_err(|e| Error::config(format!("cannot build sampler: {e}")))?;
        let total: f64 = weights.iter().sum();
        let probabilities = weights.iter().map(|w| w / total).collect();
        Ok(Self {
            index,
            probabilities,
        })
    }

    pub fn sample(&self, rng: &mut Prng) -> usize {
        self.index.sample(rng)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// Takes `n_steps` coordinate steps `y_i ← y_i − ∇_i F(y) / ℓ_i` in place,
/// with `i` drawn from `sampler` and `inv_lipschitz[i] = 1/ℓ_i`.
pub fn cdm_run<O: Oracle>(
    oracle: &O,
    state: &mut O::State,
    sampler: &CoordinateSampler,
    inv_lipschitz: &[f64],
    n_steps: u64,
    rng: &mut Prng,
) -> Result<()> {
    for _ in 0..n_steps {
        let i = sampler.sample(rng);
        let g = oracle.component_gradient(state, i);
        oracle.apply_step(state, i, -g * inv_lipschitz[i])?;
    }
    Ok(())
}

/// Plain CDM on `f`: sampling ∝ `L_i`, step `1/L_i`. Requires every `L_i > 0`.
pub fn cdm_baseline<O: Oracle>(oracle: &O, x0: &[f64], config: &SolverConfig) -> Result<SolverRun> {
    config.validate()?;
    let lipschitz = oracle.component_lipschitz();
    let sampler = CoordinateSampler::new(&lipschitz)
        .map_err(|e| Error::config(format!("CDM needs positive coordinate constants: {e}")))?;
    let inv: Vec<f64> = lipschitz.iter().map(|l| 1.0 / l).collect();
    let mut rng = super::prng(config.seed);

    let mut rec = Recorder::new("cdm", config);
    let mut state = oracle.init_state(x0.to_vec())?;
    let epoch = oracle.dim() as u64 * config.trace_every;
    let mut iter = 0u64;
    let stop = loop {
        let cost = oracle.work(&state);
        if let Some(s) = rec.record(iter, cost, || Ok(oracle.state_value(&state)))? {
            break s;
        }
        if let Some(s) = rec.exhausted(iter, cost) {
            break s;
        }
        let chunk = config.max_iters.map_or(epoch, |m| epoch.min(m - iter));
        cdm_run(oracle, &mut state, &sampler, &inv, chunk, &mut rng).map_err(|e| rec.attach(e))?;
        iter += chunk;
    };

    let cost_units = oracle.work(&state);
    Ok(SolverRun {
        x: oracle.point(&state).to_vec(),
        trace: rec.finish(),
        iterations: iter,
        cost_units,
        stop,
    })
}
