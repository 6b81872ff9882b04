//! First-order oracles.
//!
//! An [`Oracle`] exposes full evaluations at arbitrary points and, through a
//! mutable per-run state, cheap coordinate access: the state represents one
//! point `y` and keeps whatever caches make `∇_i f(y)` and a move along
//! coordinate `i` inexpensive. Coordinate solvers only ever talk to the state.

mod envelope;
mod quadratic;
mod softmax;

pub use envelope::{EnvelopeOracle, EnvelopeState};
pub use quadratic::{QuadraticProblem, QuadraticState};
pub use softmax::{SoftMaxCache, SoftMaxProblem, DENOM_DROP, REFRESH_ARG_LIMIT};

use crate::error::{Error, Result};

pub trait Oracle {
    /// Incremental state for one point. Owned by a single solver run.
    type State: Clone + std::fmt::Debug;

    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Cost units touched by one from-scratch [`Oracle::gradient`] call.
    fn gradient_cost(&self) -> u64;

    /// Coordinate Lipschitz constants `L_i` of the gradient.
    fn component_lipschitz(&self) -> Vec<f64>;

    /// Lipschitz constant `L` of the full gradient.
    fn gradient_lipschitz(&self) -> f64;

    fn init_state(&self, y: Vec<f64>) -> Result<Self::State>;

    /// The point the state represents.
    fn point<'s>(&self, state: &'s Self::State) -> &'s [f64];

    /// Objective at the state's point, from cached quantities.
    fn state_value(&self, state: &Self::State) -> f64;

    /// Full gradient at the state's point, reusing cached quantities.
    fn state_gradient(&self, state: &mut Self::State) -> Vec<f64>;

    /// `∇_i f` at the state's point.
    fn component_gradient(&self, state: &Self::State, i: usize) -> f64;

    /// Moves the state's point by `delta` along coordinate `i`.
    fn apply_step(&self, state: &mut Self::State, i: usize, delta: f64) -> Result<()>;

    /// Overwrites `out` with the state of `wa * point(a) + wb * point(b)`.
    fn combine_into(
        &self,
        out: &mut Self::State,
        a: &Self::State,
        wa: f64,
        b: &Self::State,
        wb: f64,
    ) -> Result<()>;

    /// Total cost units charged to the state since it was created.
    fn work(&self, state: &Self::State) -> u64;
}

pub(crate) fn check_point(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::input(format!("point has length {}, expected {n}", x.len())));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!("non-finite coordinate {} at index {i}", x[i])));
    }
    Ok(())
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
