//! The SoftMax (LogSumExp) objective
//!
//! ```text
//! f(x) = γ ln Σ_j exp([Ax]_j / γ) − ⟨b, x⟩
//! ```
//!
//! and its incremental cache. With `p = softmax(Ax / γ)` the gradient is
//! `Aᵀp − b`, so a coordinate step along `i` only changes the entries of `Ax`
//! in the support of column `i`. The cache stores `z = Ay`, shifted
//! exponentials `exp((z_j − μ)/γ)` and their sum, which makes both a gradient
//! component and a step cost `nnz(A[:, i])`.
//!
//! The shift `μ` only needs to approximate `max_j z_j`. It is recomputed every
//! `m` steps (amortized O(1) per step), whenever an exponent argument
//! exceeds [`REFRESH_ARG_LIMIT`], and when the running denominator falls
//! below [`DENOM_DROP`] times its peak since the last refresh: rounding error
//! in the running sum scales with that peak, so a large drop leaves few
//! correct digits.

use super::{check_point, dot, Oracle};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// An exponent argument above this value forces an immediate refresh.
pub const REFRESH_ARG_LIMIT: f64 = 30.0;

/// Below this the incrementally maintained denominator is no longer trusted.
const DENOM_FLOOR: f64 = 1e-200;

/// Largest tolerated ratio between the current denominator and its peak.
pub const DENOM_DROP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct SoftMaxProblem {
    a: SparseMatrix,
    b: Vec<f64>,
    gamma: f64,
    lipschitz: f64,
    component_lipschitz: Vec<f64>,
}

impl SoftMaxProblem {
    /// Precomputes `L = max_j ‖A_j‖² / γ` and `L_i = (max_j |A_ji|)² / γ`.
    pub fn new(a: SparseMatrix, b: Vec<f64>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::config(format!("gamma must be positive and finite, got {gamma}")));
        }
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::input("SoftMax needs at least one row and one column"));
        }
        if b.len() != a.cols() {
            return Err(Error::input(format!(
                "b has length {}, expected {}",
                b.len(),
                a.cols()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("b has non-finite entries"));
        }
        let lipschitz = a.row_sqnorm_max() / gamma;
        let component_lipschitz = a.col_abs_max().into_iter().map(|c| c * c / gamma).collect();
        Ok(Self {
            a,
            b,
            gamma,
            lipschitz,
            component_lipschitz,
        })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Softmax weights of `z / γ` and the log-partition `γ ln Σ exp(z_j / γ)`.
    fn softmax_of(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let mu = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = z.iter().map(|&zj| ((zj - mu) / self.gamma).exp()).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        (w, mu + self.gamma * s.ln())
    }

    /// Builds a consistent cache at `y0`.
    pub fn cache_init(&self, y0: Vec<f64>) -> Result<SoftMaxCache> {
        check_point(&y0, self.a.cols())?;
        let z = self.a.matvec(&y0)?;
        let m = self.a.rows();
        let mut cache = SoftMaxCache {
            by: dot(&self.b, &y0),
            y: y0,
            z,
            shift: 0.0,
            exps: vec![0.0; m],
            denom: 0.0,
            denom_peak: 0.0,
            steps_since_refresh: 0,
            cost_units: 0,
            overhead_units: self.a.nnz() as u64,
            refreshes: 0,
        };
        self.cache_refresh(&mut cache)?;
        Ok(cache)
    }

    /// `∇_i f(y)` from the cache; reads `nnz(A[:, i])` entries.
    pub fn cache_component_gradient(&self, c: &SoftMaxCache, i: usize) -> f64 {
        let (rows, vals) = self.a.col(i);
        let num: f64 = rows.iter().zip(vals).map(|(&r, &v)| v * c.exps[r]).sum();
        num / c.denom - self.b[i]
    }

    /// `y_i += delta`, updating `z`, the touched exponentials and the
    /// denominator in `nnz(A[:, i])` operations.
    pub fn cache_apply_step(&self, c: &mut SoftMaxCache, i: usize, delta: f64) -> Result<()> {
        if !delta.is_finite() {
            return Err(Error::numeric(format!("non-finite step {delta} on coordinate {i}")));
        }
        let (rows, vals) = self.a.col(i);
        c.y[i] += delta;
        c.by += self.b[i] * delta;
        c.cost_units += rows.len() as u64;
        c.steps_since_refresh += 1;

        let mut change = 0.0;
        let mut max_arg = f64::NEG_INFINITY;
        for (&r, &v) in rows.iter().zip(vals) {
            c.z[r] += delta * v;
            let arg = (c.z[r] - c.shift) / self.gamma;
            max_arg = max_arg.max(arg);
            let e = arg.exp();
            change += e - c.exps[r];
            c.exps[r] = e;
        }
        c.denom += change;
        c.denom_peak = c.denom_peak.max(c.denom);

        if c.steps_since_refresh >= self.a.rows()
            || max_arg > REFRESH_ARG_LIMIT
            || !(c.denom > DENOM_FLOOR)
            || c.denom < DENOM_DROP * c.denom_peak
        {
            self.cache_refresh(c)?;
        }
        Ok(())
    }

    /// Resets the shift to `max_j z_j` and recomputes every exponential and
    /// the denominator from `z`. Costs `m` units.
    pub fn cache_refresh(&self, c: &mut SoftMaxCache) -> Result<()> {
        let mu = c.z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !mu.is_finite() {
            return Err(Error::numeric(format!("A·y has a non-finite entry (max {mu})")));
        }
        c.shift = mu;
        let mut denom = 0.0;
        for (e, &zj) in c.exps.iter_mut().zip(&c.z) {
            *e = ((zj - mu) / self.gamma).exp();
            denom += *e;
        }
        if !(denom.is_finite() && denom >= 1.0) {
            return Err(Error::numeric(format!("softmax denominator {denom} after refresh")));
        }
        c.denom = denom;
        c.denom_peak = denom;
        c.steps_since_refresh = 0;
        c.overhead_units += c.z.len() as u64;
        c.refreshes += 1;
        Ok(())
    }

    /// `f(y)` from the cache in O(1).
    pub fn cache_value(&self, c: &SoftMaxCache) -> f64 {
        c.shift + self.gamma * c.denom.ln() - c.by
    }

    /// Full gradient at `y` from the cached `z`. Refreshes first, then one
    /// pass over the columns (`nnz` units).
    pub fn cache_gradient(&self, c: &mut SoftMaxCache) -> Result<Vec<f64>> {
        self.cache_refresh(c)?;
        let scale = 1.0 / c.denom;
        let mut g = vec![0.0; self.a.cols()];
        self.a.matvec_transpose_into(&c.exps, &mut g);
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi = *gi * scale - bi;
        }
        c.overhead_units += self.a.nnz() as u64;
        Ok(g)
    }
}

impl Oracle for SoftMaxProblem {
    type State = SoftMaxCache;

    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.a.cols())?;
        let z = self.a.matvec(x)?;
        let (_, lse) = self.softmax_of(&z);
        Ok(lse - dot(&self.b, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(x, self.a.cols())?;
        let z = self.a.matvec(x)?;
        let (w, _) = self.softmax_of(&z);
        let mut g = self.a.matvec_transpose(&w)?;
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        Ok(g)
    }

    /// One product with `A` and one with `Aᵀ`.
    fn gradient_cost(&self) -> u64 {
        2 * self.a.nnz() as u64
    }

    fn component_lipschitz(&self) -> Vec<f64> {
        self.component_lipschitz.clone()
    }

    fn gradient_lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn init_state(&self, y: Vec<f64>) -> Result<SoftMaxCache> {
        self.cache_init(y)
    }

    fn point<'s>(&self, state: &'s SoftMaxCache) -> &'s [f64] {
        &state.y
    }

    fn state_value(&self, state: &SoftMaxCache) -> f64 {
        self.cache_value(state)
    }

    fn state_gradient(&self, state: &mut SoftMaxCache) -> Vec<f64> {
        // A consistent cache always has a finite z, so the refresh inside
        // cannot fail here; fall back to recomputation if it somehow does.
        match self.cache_gradient(state) {
            Ok(g) => g,
            Err(_) => self.gradient(&state.y).unwrap_or_else(|_| vec![f64::NAN; self.dim()]),
        }
    }

    fn component_gradient(&self, state: &SoftMaxCache, i: usize) -> f64 {
        self.cache_component_gradient(state, i)
    }

    fn apply_step(&self, state: &mut SoftMaxCache, i: usize, delta: f64) -> Result<()> {
        self.cache_apply_step(state, i, delta)
    }

    /// Dense combination of both `y` and `z`: `n + m` operations plus a
    /// refresh, charged as `n` units plus the refresh's `m`.
    fn combine_into(
        &self,
        out: &mut SoftMaxCache,
        a: &SoftMaxCache,
        wa: f64,
        b: &SoftMaxCache,
        wb: f64,
    ) -> Result<()> {
        for ((o, &ya), &yb) in out.y.iter_mut().zip(&a.y).zip(&b.y) {
            *o = wa * ya + wb * yb;
        }
        for ((o, &za), &zb) in out.z.iter_mut().zip(&a.z).zip(&b.z) {
            *o = wa * za + wb * zb;
        }
        out.by = wa * a.by + wb * b.by;
        out.overhead_units += self.a.cols() as u64;
        self.cache_refresh(out)
    }

    fn work(&self, state: &SoftMaxCache) -> u64 {
        state.cost_units + state.overhead_units
    }
}

/// Incremental SoftMax state for one point `y`.
#[derive(Debug, Clone)]
pub struct SoftMaxCache {
    y: Vec<f64>,
    z: Vec<f64>,
    shift: f64,
    exps: Vec<f64>,
    denom: f64,
    denom_peak: f64,
    by: f64,
    steps_since_refresh: usize,
    cost_units: u64,
    overhead_units: u64,
    refreshes: u64,
}

impl SoftMaxCache {
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Cached `A y`.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Current exp-normalize shift `μ`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn exps(&self) -> &[f64] {
        &self.exps
    }

    pub fn denom(&self) -> f64 {
        self.denom
    }

    pub fn steps_since_refresh(&self) -> usize {
        self.steps_since_refresh
    }

    /// Matrix entries touched by coordinate steps.
    pub fn cost_units(&self) -> u64 {
        self.cost_units
    }

    /// Units spent outside coordinate steps: the initial product, refreshes,
    /// cached full gradients and dense combinations.
    pub fn overhead_units(&self) -> u64 {
        self.overhead_units
    }

    pub fn refreshes(&self) -> u64 {
        self.refreshes
    }
}
