//! Random SoftMax instances with 0/1 matrices.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::oracles::SoftMaxProblem;
use crate::solvers::{prng, Prng};
use crate::sparse::SparseMatrix;

/// Every entry present independently with probability `density`, value 1.
/// Empty columns get one entry in a uniformly random row.
pub fn gen_uniform(m: usize, n: usize, density: f64, gamma: f64, seed: u64) -> Result<SoftMaxProblem> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::config(format!("density must lie in (0, 1], got {density}")));
    }
    if m < 2 || n < 2 {
        return Err(Error::config(format!("generated instances need m, n >= 2, got {m}x{n}")));
    }
    let mut rng = prng(seed);
    let patterns: Vec<Vec<usize>> = (0..m)
        .map(|_| (0..n).filter(|_| rng.random::<f64>() < density).collect())
        .collect();
    assemble(patterns, n, gamma, &mut rng)
}

/// Row 0 fully dense, then `round(0.9m)` rows with `round(0.1n)` ones and
/// the remaining rows with `round(0.9n)` ones, columns drawn uniformly
/// without replacement.
pub fn gen_nonuniform(m: usize, n: usize, gamma: f64, seed: u64) -> Result<SoftMaxProblem> {
    if m < 10 || n < 10 {
        return Err(Error::config(format!("nonuniform instances need m, n >= 10, got {m}x{n}")));
    }
    let sparse_rows = ((0.9 * m as f64).round() as usize).min(m - 1);
    let light = ((0.1 * n as f64).round() as usize).max(1);
    let heavy = (0.9 * n as f64).round() as usize;

    let mut rng = prng(seed);
    let mut patterns = Vec::with_capacity(m);
    patterns.push((0..n).collect());
    for j in 1..m {
        let k = if j <= sparse_rows { light } else { heavy };
        let mut cols = index::sample(&mut rng, n, k).into_vec();
        cols.sort_unstable();
        patterns.push(cols);
    }
    assemble(patterns, n, gamma, &mut rng)
}

fn assemble(mut patterns: Vec<Vec<usize>>, n: usize, gamma: f64, rng: &mut Prng) -> Result<SoftMaxProblem> {
    repair_empty_columns(&mut patterns, n, rng);
    let a = SparseMatrix::from_row_patterns(patterns, n, 1.0)?;
    let b = simplex_b(&a, rng)?;
    SoftMaxProblem::new(a, b, gamma)
}

fn repair_empty_columns(patterns: &mut [Vec<usize>], n: usize, rng: &mut Prng) {
    let mut seen = vec![false; n];
    for &c in patterns.iter().flatten() {
        seen[c] = true;
    }
    let m = patterns.len();
    let mut touched = Vec::new();
    for (c, _) in seen.iter().enumerate().filter(|(_, s)| !**s) {
        let r = rng.random_range(0..m);
        patterns[r].push(c);
        touched.push(r);
    }
    for r in touched {
        patterns[r].sort_unstable();
    }
}

/// `b = Aᵀp` for `p` the softmax of `m` standard normals. Such `b` is a
/// gradient of the log-sum-exp term, so the objective is bounded below.
pub fn simplex_b(a: &SparseMatrix, rng: &mut Prng) -> Result<Vec<f64>> {
    let z: Vec<f64> = (0..a.rows()).map(|_| rng.sample(StandardNormal)).collect();
    let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = z.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    a.matvec_transpose(&p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::Oracle;

    #[test]
    fn full_density_is_all_ones() {
        let p = gen_uniform(4, 6, 1.0, 0.5, 1).unwrap();
        assert_eq!(p.matrix().nnz(), 24);
        assert!(p.component_lipschitz().iter().all(|&l| l == 2.0));
        assert_eq!(p.gradient_lipschitz(), 12.0);
    }

    #[test]
    fn tiny_density_still_covers_columns() {
        let p = gen_uniform(5, 40, 1e-12, 1.0, 3).unwrap();
        let a = p.matrix();
        assert!((0..40).all(|i| a.col_nnz(i) == 1));
        assert_eq!(a.nnz(), 40);
    }

    #[test]
    fn nonuniform_ten_by_ten() {
        let p = gen_nonuniform(10, 10, 0.6, 9).unwrap();
        let a = p.matrix();
        assert_eq!(a.row_nnz(0), 10);
        assert!((1..10).all(|j| a.row_nnz(j) == 1));
        assert_eq!(a.nnz(), 19);
    }

    #[test]
    fn nonuniform_row_profile() {
        let p = gen_nonuniform(100, 50, 0.6, 2).unwrap();
        let a = p.matrix();
        let counts: Vec<usize> = (0..100).map(|j| a.row_nnz(j)).collect();
        assert_eq!(counts[0], 50);
        assert!(counts[1..=90].iter().all(|&c| c == 5));
        assert!(counts[91..].iter().all(|&c| c == 45));
        assert!((p.gradient_lipschitz() - 50.0 / 0.6).abs() < 1e-12);
    }

    #[test]
    fn b_is_a_simplex_combination_of_columns() {
        let p = gen_uniform(30, 20, 0.3, 0.6, 4).unwrap();
        let a = p.matrix();
        for (i, &bi) in p.b().iter().enumerate() {
            assert!(bi > 0.0 && bi <= 1.0 + 1e-12);
            assert!(a.col_nnz(i) > 0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(gen_uniform(5, 5, 0.0, 1.0, 0), Err(Error::Config(_))));
        assert!(matches!(gen_uniform(5, 5, 1.5, 1.0, 0), Err(Error::Config(_))));
        assert!(matches!(gen_uniform(1, 5, 0.5, 1.0, 0), Err(Error::Config(_))));
        assert!(matches!(gen_nonuniform(9, 50, 1.0, 0), Err(Error::Config(_))));
    }

    #[test]
    fn seeded() {
        let a = gen_uniform(20, 30, 0.2, 0.6, 11).unwrap();
        let b = gen_uniform(20, 30, 0.2, 0.6, 11).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(a.b(), b.b());
    }
}
