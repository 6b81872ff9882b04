use super::{check_point, Oracle};
use crate::error::{Error, Result};

/// Separable quadratic `½ Σ d_i (x_i − w_i)²` with closed-form minimizer `w`.
///
/// Acts as a diagonal matrix for cost accounting: one unit per coordinate.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    d: Vec<f64>,
    w: Vec<f64>,
}

impl QuadraticProblem {
    pub fn new(d: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::config("quadratic needs at least one coordinate"));
        }
        if d.len() != w.len() {
            return Err(Error::input(format!(
                "d has length {}, w has length {}",
                d.len(),
                w.len()
            )));
        }
        if let Some(v) = d.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::config(format!("diagonal entries must be positive, got {v}")));
        }
        check_point(&w, d.len())?;
        Ok(Self { d, w })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.d
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.w
    }

    /// `(x*, f*)`.
    pub fn analytic_min(&self) -> (Vec<f64>, f64) {
        (self.w.clone(), 0.0)
    }

    /// Minimizer of `f(y) + H/2 ‖y − center‖²`:
    /// `y_i = (d_i w_i + H c_i) / (d_i + H)`.
    pub fn envelope_minimizer(&self, center: &[f64], h: f64) -> Vec<f64> {
        self.d
            .iter()
            .zip(&self.w)
            .zip(center)
            .map(|((&d, &w), &c)| (d * w + h * c) / (d + h))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticState {
    y: Vec<f64>,
    units: u64,
}

impl QuadraticState {
    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

impl Oracle for QuadraticProblem {
    type State = QuadraticState;

    fn dim(&self) -> usize {
        self.d.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.dim())?;
        Ok(0.5
            * self
                .d
                .iter()
                .zip(&self.w)
                .zip(x)
                .map(|((&d, &w), &x)| d * (x - w) * (x - w))
                .sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(x, self.dim())?;
        Ok(self
            .d
            .iter()
            .zip(&self.w)
            .zip(x)
            .map(|((&d, &w), &x)| d * (x - w))
            .collect())
    }

    fn gradient_cost(&self) -> u64 {
        self.d.len() as u64
    }

    fn component_lipschitz(&self) -> Vec<f64> {
        self.d.clone()
    }

    fn gradient_lipschitz(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    fn init_state(&self, y: Vec<f64>) -> Result<QuadraticState> {
        check_point(&y, self.dim())?;
        let units = y.len() as u64;
        Ok(QuadraticState { y, units })
    }

    fn point<'s>(&self, state: &'s QuadraticState) -> &'s [f64] {
        &state.y
    }

    fn state_value(&self, state: &QuadraticState) -> f64 {
        self.value(&state.y).unwrap_or(f64::NAN)
    }

    fn state_gradient(&self, state: &mut QuadraticState) -> Vec<f64> {
        state.units += self.gradient_cost();
        self.d
            .iter()
            .zip(&self.w)
            .zip(&state.y)
            .map(|((&d, &w), &x)| d * (x - w))
            .collect()
    }

    fn component_gradient(&self, state: &QuadraticState, i: usize) -> f64 {
        self.d[i] * (state.y[i] - self.w[i])
    }

    fn apply_step(&self, state: &mut QuadraticState, i: usize, delta: f64) -> Result<()> {
        if !delta.is_finite() {
            return Err(Error::numeric(format!("non-finite step {delta} on coordinate {i}")));
        }
        state.y[i] += delta;
        state.units += 1;
        Ok(())
    }

    fn combine_into(
        &self,
        out: &mut QuadraticState,
        a: &QuadraticState,
        wa: f64,
        b: &QuadraticState,
        wb: f64,
    ) -> Result<()> {
        for ((o, &ya), &yb) in out.y.iter_mut().zip(&a.y).zip(&b.y) {
            *o = wa * ya + wb * yb;
        }
        out.units += self.d.len() as u64;
        Ok(())
    }

    fn work(&self, state: &QuadraticState) -> u64 {
        state.units
    }
}
