use super::{check_point, sq_dist, Oracle};
use crate::error::{Error, Result};

/// `F(y) = f(y) + H/2 ‖y − x̃‖²` over a borrowed base oracle `f`.
///
/// Every inner subproblem of the accelerated outer loop is one of these.
/// Coordinate constants become `L_i + H` and the full constant `L + H`.
#[derive(Debug, Clone)]
pub struct EnvelopeOracle<'a, O> {
    base: &'a O,
    center: Vec<f64>,
    h: f64,
}

impl<'a, O: Oracle> EnvelopeOracle<'a, O> {
    pub fn new(base: &'a O, center: Vec<f64>, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config(format!("regularization H must be positive, got {h}")));
        }
        check_point(&center, base.dim())?;
        Ok(Self { base, center, h })
    }

    pub fn base(&self) -> &'a O {
        self.base
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn into_center(self) -> Vec<f64> {
        self.center
    }
}

/// Base state plus the running `‖y − x̃‖²`.
#[derive(Debug, Clone)]
pub struct EnvelopeState<S> {
    base: S,
    sqdist: f64,
    steps_since_sync: usize,
}

impl<S> EnvelopeState<S> {
    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn into_base(self) -> S {
        self.base
    }

    pub fn sqdist(&self) -> f64 {
        self.sqdist
    }
}

impl<O: Oracle> Oracle for EnvelopeOracle<'_, O> {
    type State = EnvelopeState<O::State>;

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, y: &[f64]) -> Result<f64> {
        Ok(self.base.value(y)? + 0.5 * self.h * sq_dist(y, &self.center))
    }

    fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.base.gradient(y)?;
        for ((gi, yi), ci) in g.iter_mut().zip(y).zip(&self.center) {
            *gi += self.h * (yi - ci);
        }
        Ok(g)
    }

    fn gradient_cost(&self) -> u64 {
        self.base.gradient_cost()
    }

    fn component_lipschitz(&self) -> Vec<f64> {
        self.base
            .component_lipschitz()
            .into_iter()
            .map(|l| l + self.h)
            .collect()
    }

    fn gradient_lipschitz(&self) -> f64 {
        self.base.gradient_lipschitz() + self.h
    }

    fn init_state(&self, y: Vec<f64>) -> Result<Self::State> {
        let sqdist = sq_dist(&y, &self.center);
        Ok(EnvelopeState {
            base: self.base.init_state(y)?,
            sqdist,
            steps_since_sync: 0,
        })
    }

    fn point<'s>(&self, state: &'s Self::State) -> &'s [f64] {
        self.base.point(&state.base)
    }

    fn state_value(&self, state: &Self::State) -> f64 {
        self.base.state_value(&state.base) + 0.5 * self.h * state.sqdist
    }

    fn state_gradient(&self, state: &mut Self::State) -> Vec<f64> {
        let mut g = self.base.state_gradient(&mut state.base);
        let y = self.base.point(&state.base);
        for ((gi, yi), ci) in g.iter_mut().zip(y).zip(&self.center) {
            *gi += self.h * (yi - ci);
        }
        g
    }

    fn component_gradient(&self, state: &Self::State, i: usize) -> f64 {
        let y = self.base.point(&state.base);
        self.base.component_gradient(&state.base, i) + self.h * (y[i] - self.center[i])
    }

    fn apply_step(&self, state: &mut Self::State, i: usize, delta: f64) -> Result<()> {
        let before = self.base.point(&state.base)[i] - self.center[i];
        self.base.apply_step(&mut state.base, i, delta)?;
        let after = self.base.point(&state.base)[i] - self.center[i];
        state.sqdist += after * after - before * before;
        state.steps_since_sync += 1;
        // Resynchronise once per n steps so rounding drift stays bounded at
        // amortized O(1) cost.
        if state.steps_since_sync >= self.dim() {
            state.sqdist = sq_dist(self.base.point(&state.base), &self.center);
            state.steps_since_sync = 0;
        }
        Ok(())
    }

    fn combine_into(
        &self,
        out: &mut Self::State,
        a: &Self::State,
        wa: f64,
        b: &Self::State,
        wb: f64,
    ) -> Result<()> {
        self.base.combine_into(&mut out.base, &a.base, wa, &b.base, wb)?;
        out.sqdist = sq_dist(self.base.point(&out.base), &self.center);
        out.steps_since_sync = 0;
        Ok(())
    }

    fn work(&self, state: &Self::State) -> u64 {
        self.base.work(&state.base)
    }
}
