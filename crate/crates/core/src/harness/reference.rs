//! Reference optimal values.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::oracles::Oracle;
use crate::solvers::fgm_reference;

pub const REFERENCE_ENGINE: &str = "fgm with gradient restart from x = 0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub f_star: f64,
    pub grad_norm_at_ref: f64,
    pub engine: String,
    pub wall_ms: f64,
    pub iterations: u64,
    pub tol: f64,
    /// The time cap was hit with `‖∇f‖ > 10 tol`.
    pub warning: bool,
}

/// Runs the reference engine from the origin until `‖∇f‖₂ ≤ tol` or
/// `time_cap` seconds.
pub fn reference_solution<O: Oracle>(oracle: &O, tol: f64, time_cap: f64) -> Result<ReferenceSolution> {
    let x0 = vec![0.0; oracle.dim()];
    let run = fgm_reference(oracle, &x0, tol, time_cap)?;
    let warning = run.grad_norm > 10.0 * tol;
    if warning {
        log::warn!(
            "reference stopped at ‖∇f‖ = {:.3e} after {} iterations (tolerance {tol:.1e})",
            run.grad_norm,
            run.iterations
        );
    }
    Ok(ReferenceSolution {
        f_star: run.f_value,
        grad_norm_at_ref: run.grad_norm,
        engine: REFERENCE_ENGINE.to_string(),
        wall_ms: run.wall_ms,
        iterations: run.iterations,
        tol,
        warning,
    })
}
