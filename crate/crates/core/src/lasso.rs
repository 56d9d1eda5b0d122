//! L1-penalized least squares by cyclic coordinate descent.
//!
//! Solves min (1/2T) * sum_t (y_t - sum_j x_tj b_j)^2 + lambda * sum_j |b_j|
//! pathwise over a descending penalty grid with warm starts, and selects the
//! penalty by K-fold cross-validation (contiguous blocks of a seeded shuffle,
//! ties broken toward the larger, sparser penalty).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A coefficient counts as zero when its magnitude is at or below this.
pub const TOL_COEF: f64 = 1e-9;
/// Objective-level tolerance used by the KKT checks.
pub const TOL_OBJ: f64 = 1e-10;
/// Hard cap on coordinate-descent sweeps per penalty value.
pub const MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Error)]
pub enum LassoError {
    #[error("non-finite value in inputs")]
    NonFinite,
    #[error("design column {col} has {found} rows, expected {expected}")]
    RaggedColumns {
        col: usize,
        expected: usize,
        found: usize,
    },
    #[error("at least 2 observations required, found {0}")]
    TooFewRows(usize),
    #[error("penalty grid is empty")]
    EmptyGrid,
    #[error("penalty grid must be strictly descending and non-negative")]
    BadGrid,
    #[error("{folds} folds requested for {rows} rows; need 2 <= folds <= rows")]
    BadFolds { folds: usize, rows: usize },
    #[error("coordinate descent did not converge within {0} sweeps")]
    NoConvergence(usize),
}

/// Cross-validated fit in design space: dense coefficients over the columns
/// of the design matrix, the selected penalty, and the CV curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CvFit {
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub lambda_index: usize,
    /// `(lambda, mean out-of-fold squared error)` per grid point.
    pub cv_curve: Vec<(f64, f64)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

fn validate_problem(y: &[f64], cols: &[Vec<f64>]) -> Result<(), LassoError> {
    let t = y.len();
    if t < 2 {
        return Err(LassoError::TooFewRows(t));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LassoError::NonFinite);
    }
    for (j, col) in cols.iter().enumerate() {
        if col.len() != t {
            return Err(LassoError::RaggedColumns {
                col: j,
                expected: t,
                found: col.len(),
            });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(LassoError::NonFinite);
        }
    }
    Ok(())
}

fn validate_grid(grid: &[f64]) -> Result<(), LassoError> {
    if grid.is_empty() {
        return Err(LassoError::EmptyGrid);
    }
    if grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(LassoError::BadGrid);
    }
    if grid.windows(2).any(|w| w[0] <= w[1]) {
        return Err(LassoError::BadGrid);
    }
    Ok(())
}

/// The penalized objective at `beta`.
pub fn objective(y: &[f64], cols: &[Vec<f64>], beta: &[f64], lambda: f64) -> f64 {
    let t = y.len();
    let mut sse = 0.0;
    for r in 0..t {
        let mut fit = 0.0;
        for (j, col) in cols.iter().enumerate() {
            fit += col[r] * beta[j];
        }
        let e = y[r] - fit;
        sse += e * e;
    }
    sse / (2.0 * t as f64) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Smallest penalty at which the solution is entirely zero:
/// `max_j |x_j' y| / T`. Expects centered data.
pub fn lambda_max(y: &[f64], cols: &[Vec<f64>]) -> f64 {
    let inv_t = 1.0 / y.len() as f64;
    cols.iter()
        .map(|col| (dot(col, y) * inv_t).abs())
        .fold(0.0, f64::max)
}

/// Logarithmically spaced descending grid from `lmax` down to
/// `min_ratio * lmax`. Degenerates to `[0]` when `lmax` is zero.
pub fn default_lambda_grid(lmax: f64, n_points: usize, min_ratio: f64) -> Vec<f64> {
    if lmax <= 0.0 || n_points == 0 {
        return vec![0.0];
    }
    if n_points == 1 {
        return vec![lmax];
    }
    let log_max = lmax.ln();
    let log_min = (lmax * min_ratio).ln();
    (0..n_points)
        .map(|k| {
            let frac = k as f64 / (n_points - 1) as f64;
            (log_max + frac * (log_min - log_max)).exp()
        })
        .collect()
}

fn coordinate_descent(
    beta: &mut [f64],
    residual: &mut [f64],
    cols: &[Vec<f64>],
    col_sq: &[f64],
    inv_t: f64,
    lambda: f64,
) -> Result<(), LassoError> {
    for _ in 0..MAX_SWEEPS {
        #[cfg(debug_assertions)]
        let obj_before = sweep_objective(residual, beta, inv_t, lambda);
        let mut max_step = 0.0f64;
        for (j, col) in cols.iter().enumerate() {
            if col_sq[j] == 0.0 {
                continue;
            }
            let rho = dot(col, residual) * inv_t + col_sq[j] * beta[j];
            let updated = soft_threshold(rho, lambda) / col_sq[j];
            let step = updated - beta[j];
            if step != 0.0 {
                for (r, x) in residual.iter_mut().zip(col) {
                    *r -= step * x;
                }
                beta[j] = updated;
                max_step = max_step.max(step.abs());
            }
        }
        #[cfg(debug_assertions)]
        {
            let obj_after = sweep_objective(residual, beta, inv_t, lambda);
            debug_assert!(
                obj_after <= obj_before + 1e-12 * (1.0 + obj_before.abs()),
                "objective increased within a sweep: {obj_before} -> {obj_after}"
            );
        }
        if max_step <= TOL_COEF {
            return Ok(());
        }
    }
    Err(LassoError::NoConvergence(MAX_SWEEPS))
}

#[cfg(debug_assertions)]
fn sweep_objective(residual: &[f64], beta: &[f64], inv_t: f64, lambda: f64) -> f64 {
    let sse: f64 = residual.iter().map(|r| r * r).sum();
    0.5 * inv_t * sse + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Solves the penalized problem at every grid point, warm-starting each
/// solution from the previous (larger) penalty. Expects centered data.
pub fn solve_lasso_path(
    y: &[f64],
    cols: &[Vec<f64>],
    grid: &[f64],
) -> Result<Vec<Vec<f64>>, LassoError> {
    validate_problem(y, cols)?;
    validate_grid(grid)?;
    let inv_t = 1.0 / y.len() as f64;
    let col_sq: Vec<f64> = cols.iter().map(|c| dot(c, c) * inv_t).collect();
    let mut beta = vec![0.0; cols.len()];
    let mut residual = y.to_vec();
    let mut path = Vec::with_capacity(grid.len());
    for &lambda in grid {
        coordinate_descent(&mut beta, &mut residual, cols, &col_sq, inv_t, lambda)?;
        path.push(beta.clone());
    }
    Ok(path)
}

/// Fold id per row: one seeded shuffle of the row indices cut into
/// contiguous blocks (the first `t % folds` blocks are one row longer).
fn fold_assignment(t: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..t).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = t / folds;
    let extra = t % folds;
    let mut fold_of = vec![0usize; t];
    let mut pos = 0;
    for fold in 0..folds {
        let size = base + usize::from(fold < extra);
        for _ in 0..size {
            fold_of[order[pos]] = fold;
            pos += 1;
        }
    }
    fold_of
}

struct CenteredProblem {
    y: Vec<f64>,
    cols: Vec<Vec<f64>>,
    y_mean: f64,
    col_means: Vec<f64>,
}

fn center_rows(y: &[f64], cols: &[Vec<f64>], rows: &[usize]) -> CenteredProblem {
    let inv = 1.0 / rows.len() as f64;
    let y_mean = rows.iter().map(|&r| y[r]).sum::<f64>() * inv;
    let col_means: Vec<f64> = cols
        .iter()
        .map(|c| rows.iter().map(|&r| c[r]).sum::<f64>() * inv)
        .collect();
    CenteredProblem {
        y: rows.iter().map(|&r| y[r] - y_mean).collect(),
        cols: cols
            .iter()
            .zip(&col_means)
            .map(|(c, m)| rows.iter().map(|&r| c[r] - m).collect())
            .collect(),
        y_mean,
        col_means,
    }
}

/// K-fold cross-validation over the penalty grid on raw (uncentered) data.
///
/// Each training fold is centered with its own means and held-out rows are
/// predicted on the training-fold scale. The winning penalty minimizes the
/// pooled out-of-fold squared error, ties going to the larger penalty, and
/// the returned coefficients are refit on all rows at that penalty.
pub fn cross_validate_lambda(
    y: &[f64],
    cols: &[Vec<f64>],
    folds: usize,
    grid: &[f64],
    seed: u64,
) -> Result<CvFit, LassoError> {
    validate_problem(y, cols)?;
    validate_grid(grid)?;
    let t = y.len();
    if folds < 2 || folds > t {
        return Err(LassoError::BadFolds { folds, rows: t });
    }

    let fold_of = fold_assignment(t, folds, seed);
    let mut sq_err = vec![0.0f64; grid.len()];
    for fold in 0..folds {
        let train: Vec<usize> = (0..t).filter(|r| fold_of[*r] != fold).collect();
        let held: Vec<usize> = (0..t).filter(|r| fold_of[*r] == fold).collect();
        let problem = center_rows(y, cols, &train);
        let path = solve_lasso_path(&problem.y, &problem.cols, grid)?;
        for (g, beta) in path.iter().enumerate() {
            let active: Vec<(usize, f64)> = beta
                .iter()
                .enumerate()
                .filter(|(_, b)| **b != 0.0)
                .map(|(j, b)| (j, *b))
                .collect();
            for &r in &held {
                let mut pred = problem.y_mean;
                for &(j, b) in &active {
                    pred += (cols[j][r] - problem.col_means[j]) * b;
                }
                let e = y[r] - pred;
                sq_err[g] += e * e;
            }
        }
    }

    let cv_curve: Vec<(f64, f64)> = grid
        .iter()
        .zip(&sq_err)
        .map(|(l, s)| (*l, s / t as f64))
        .collect();
    // Grid is descending, so scanning with a strict `<` keeps the largest
    // penalty among exact ties.
    let mut lambda_index = 0;
    for (g, (_, err)) in cv_curve.iter().enumerate() {
        if *err < cv_curve[lambda_index].1 {
            lambda_index = g;
        }
    }

    let all_rows: Vec<usize> = (0..t).collect();
    let full = center_rows(y, cols, &all_rows);
    let path = solve_lasso_path(&full.y, &full.cols, grid)?;
    Ok(CvFit {
        coefficients: path[lambda_index].clone(),
        lambda: grid[lambda_index],
        lambda_index,
        cv_curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_problem(t: usize, p: usize, seed: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut r = rng(seed);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..t).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let y: Vec<f64> = (0..t).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect();
        (center(&y), cols.iter().map(|c| center(c)).collect())
    }

    fn center(v: &[f64]) -> Vec<f64> {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| x - m).collect()
    }

    /// Orthonormal-in-T columns: x_j' x_k / T = [j == k], by modified
    /// Gram-Schmidt on a random matrix.
    fn orthonormal_cols(t: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng(seed);
        let mut cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..t).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let scale = (t as f64).sqrt();
        for j in 0..p {
            for k in 0..j {
                let proj = dot(&cols[j], &cols[k]) / dot(&cols[k], &cols[k]);
                let prev = cols[k].clone();
                for (x, q) in cols[j].iter_mut().zip(&prev) {
                    *x -= proj * q;
                }
            }
            let norm = dot(&cols[j], &cols[j]).sqrt();
            for x in cols[j].iter_mut() {
                *x = *x / norm * scale;
            }
        }
        cols
    }

    #[test]
    fn lambda_at_or_above_max_gives_exact_zero() {
        let (y, cols) = random_problem(60, 8, 1);
        let lmax = lambda_max(&y, &cols);
        let path = solve_lasso_path(&y, &cols, &[2.0 * lmax, lmax]).unwrap();
        for beta in &path {
            assert!(beta.iter().all(|b| *b == 0.0));
        }
    }

    #[test]
    fn orthonormal_design_matches_soft_threshold() {
        let t = 80;
        let p = 6;
        let cols = orthonormal_cols(t, p, 7);
        let mut r = rng(8);
        let truth: Vec<f64> = (0..p).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect();
        let mut y = vec![0.0; t];
        for (j, col) in cols.iter().enumerate() {
            for (yr, x) in y.iter_mut().zip(col) {
                *yr += truth[j] * x;
            }
        }
        let inv_t = 1.0 / t as f64;
        let beta_ols: Vec<f64> = cols.iter().map(|c| dot(c, &y) * inv_t).collect();
        let lmax = lambda_max(&y, &cols);
        let grid = default_lambda_grid(lmax, 20, 1e-2);
        let path = solve_lasso_path(&y, &cols, &grid).unwrap();
        for (g, lambda) in grid.iter().enumerate() {
            for j in 0..p {
                let expect = soft_threshold(beta_ols[j], *lambda);
                assert!(
                    (path[g][j] - expect).abs() < 1e-8,
                    "grid {g} coef {j}: {} vs {}",
                    path[g][j],
                    expect
                );
            }
        }
    }

    /// Gaussian elimination with partial pivoting; normal-equations oracle.
    fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let pivot = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, pivot);
            b.swap(k, pivot);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    #[test]
    fn zero_penalty_recovers_least_squares() {
        let (y, cols) = random_problem(50, 5, 2);
        let p = cols.len();
        let gram: Vec<Vec<f64>> = (0..p)
            .map(|j| (0..p).map(|k| dot(&cols[j], &cols[k])).collect())
            .collect();
        let rhs: Vec<f64> = cols.iter().map(|c| dot(c, &y)).collect();
        let ols = solve_dense(gram, rhs);
        let lmax = lambda_max(&y, &cols);
        let grid = default_lambda_grid(lmax, 30, 1e-4);
        let mut grid = grid;
        grid.push(0.0);
        let path = solve_lasso_path(&y, &cols, &grid).unwrap();
        let beta = path.last().unwrap();
        for j in 0..p {
            assert!((beta[j] - ols[j]).abs() < 1e-6, "{} vs {}", beta[j], ols[j]);
        }
    }

    #[test]
    fn kkt_conditions_hold_at_convergence() {
        for seed in 0..20 {
            let (y, cols) = random_problem(60, 10, 100 + seed);
            let lmax = lambda_max(&y, &cols);
            let lambda = 0.3 * lmax;
            let path = solve_lasso_path(&y, &cols, &[lambda]).unwrap();
            let beta = &path[0];
            let t = y.len();
            let mut residual = y.clone();
            for (j, col) in cols.iter().enumerate() {
                for (r, x) in residual.iter_mut().zip(col) {
                    *r -= beta[j] * x;
                }
            }
            for (j, col) in cols.iter().enumerate() {
                let grad = dot(col, &residual) / t as f64;
                if beta[j].abs() > TOL_COEF {
                    assert!(
                        (grad - lambda * beta[j].signum()).abs() <= 10.0 * TOL_OBJ,
                        "active KKT violated at {j}"
                    );
                } else {
                    assert!(grad.abs() <= lambda + 10.0 * TOL_OBJ, "inactive KKT violated at {j}");
                }
            }
        }
    }

    #[test]
    fn warm_start_path_matches_cold_solutions() {
        let (y, cols) = random_problem(40, 6, 5);
        let lmax = lambda_max(&y, &cols);
        let grid = default_lambda_grid(lmax, 12, 1e-2);
        let warm = solve_lasso_path(&y, &cols, &grid).unwrap();
        for (g, lambda) in grid.iter().enumerate() {
            let cold = solve_lasso_path(&y, &cols, &[*lambda]).unwrap();
            for j in 0..cols.len() {
                assert!((warm[g][j] - cold[0][j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn cv_zero_target_selects_largest_lambda() {
        let (_, cols) = random_problem(30, 4, 9);
        let y = vec![0.0; 30];
        let grid = vec![1.0, 0.5, 0.1];
        let fit = cross_validate_lambda(&y, &cols, 5, &grid, 3).unwrap();
        assert_eq!(fit.lambda_index, 0);
        assert_eq!(fit.lambda, 1.0);
        assert!(fit.coefficients.iter().all(|b| *b == 0.0));
        assert!(fit.cv_curve.iter().all(|(_, e)| *e == 0.0));
    }

    #[test]
    fn cv_recovers_noiseless_single_column() {
        let t = 200;
        let (_, cols) = random_problem(t, 5, 11);
        let y: Vec<f64> = cols[0].clone();
        let lmax = lambda_max(&y, &cols);
        let grid = default_lambda_grid(lmax, 40, 1e-4);
        let fit = cross_validate_lambda(&y, &cols, 10, &grid, 3).unwrap();
        assert!(fit.coefficients[0].abs() > 0.5, "column 1 not selected");
        // CV error near zero at the winning penalty, near var(y) at lambda_max.
        assert!(fit.cv_curve[fit.lambda_index].1 < 1e-3);
        let var_y = y.iter().map(|v| v * v).sum::<f64>() / t as f64;
        let at_max = fit.cv_curve[0].1;
        assert!((at_max - var_y).abs() / var_y < 0.25);
    }

    #[test]
    fn cv_is_deterministic_for_fixed_seed() {
        let (y, cols) = random_problem(50, 6, 13);
        let lmax = lambda_max(&y, &cols);
        let grid = default_lambda_grid(lmax, 25, 1e-3);
        let a = cross_validate_lambda(&y, &cols, 5, &grid, 42).unwrap();
        let b = cross_validate_lambda(&y, &cols, 5, &grid, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (y, cols) = random_problem(20, 3, 17);
        assert!(matches!(
            solve_lasso_path(&y, &cols, &[]),
            Err(LassoError::EmptyGrid)
        ));
        assert!(matches!(
            solve_lasso_path(&y, &cols, &[0.1, 0.2]),
            Err(LassoError::BadGrid)
        ));
        let mut bad_y = y.clone();
        bad_y[0] = f64::NAN;
        assert!(matches!(
            solve_lasso_path(&bad_y, &cols, &[0.1]),
            Err(LassoError::NonFinite)
        ));
        assert!(matches!(
            cross_validate_lambda(&y, &cols, 1, &[0.1], 0),
            Err(LassoError::BadFolds { .. })
        ));
        assert!(matches!(
            cross_validate_lambda(&y, &cols, 21, &[0.1], 0),
            Err(LassoError::BadFolds { .. })
        ));
    }

    #[test]
    fn fold_blocks_partition_rows() {
        let fold_of = fold_assignment(23, 5, 7);
        let mut counts = [0usize; 5];
        for f in &fold_of {
            counts[*f] += 1;
        }
        assert_eq!(counts.iter().sum::<usize>(), 23);
        assert_eq!(counts.iter().max(), Some(&5));
        assert_eq!(counts.iter().min(), Some(&4));
    }
}
