//! Iteration budgets of the accelerated coordinate method and the choice of
//! the proximal parameter `H`.

use crate::error::{Error, Result};

/// `4√15 / 5`, the constant in the outer iteration count.
pub const OUTER_BUDGET_FACTOR: f64 = 3.098_386_676_965_933_4;

/// Mean of the coordinate Lipschitz constants, the recommended `H`.
pub fn optimal_h(component_lipschitz: &[f64]) -> Result<f64> {
    if component_lipschitz.is_empty() {
        return Err(Error::config("cannot choose H without coordinate constants"));
    }
    if let Some(l) = component_lipschitz.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::config(format!("coordinate constants must be nonnegative, got {l}")));
    }
    let mean = component_lipschitz.iter().sum::<f64>() / component_lipschitz.len() as f64;
    if mean <= 0.0 {
        return Err(Error::config("all coordinate constants are zero; set H explicitly"));
    }
    Ok(mean)
}

/// `max(1, ⌈(4√15/5) √(H R² / ε)⌉)` outer iterations.
pub fn outer_budget(h: f64, r2: f64, eps: f64) -> u64 {
    let n = (OUTER_BUDGET_FACTOR * (h * r2 / eps).sqrt()).ceil();
    if n.is_finite() && n >= 1.0 {
        n as u64
    } else {
        1
    }
}

/// Coordinate steps per subproblem:
///
/// ```text
/// ⌈ (Z/H) ln( (Ñ/δ) (1 + L/H) (3 + 2L/H)² ) ⌉
/// ```
///
/// with `Z = Σ (H + L_i)` and `Ñ` the outer budget.
pub fn inner_budget(z: f64, h: f64, l: f64, n_outer: u64, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(z > 0.0 && h > 0.0 && l >= 0.0) || n_outer == 0 {
        return Err(Error::config(format!(
            "inner budget needs Z, H > 0, L >= 0 and at least one outer step (Z={z}, H={h}, L={l}, N={n_outer})"
        )));
    }
    Ok(inner_budget_from_ratios(z / h, l / h, n_outer as f64 / delta))
}

/// [`inner_budget`] in terms of the ratios `Z/H`, `L/H` and `Ñ/δ`.
pub fn inner_budget_from_ratios(z_over_h: f64, l_over_h: f64, outer_over_delta: f64) -> u64 {
    let arg = outer_over_delta * (1.0 + l_over_h) * (3.0 + 2.0 * l_over_h).powi(2);
    (z_over_h * arg.ln()).ceil() as u64
}
