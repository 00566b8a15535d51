//! Least squares on the fixed-effect-absorbed design.

use super::absorb::{demean_columns, singleton_mask, ABSORB_TOL, MAX_SWEEPS};
use super::design::Design;
use super::linalg::{
    inverse_spd, pivoted_retained, solve_spd, submatrix, subvector, weighted_gram, weighted_xty,
};
use super::vcov::cluster_sandwich;
use super::{ConvergenceLog, EstimateResult, EstimationError};

pub(super) fn gather<T: Copy>(values: &[T], rows: &[usize]) -> Vec<T> {
    rows.iter().map(|&i| values[i]).collect()
}

pub(super) fn distinct_clusters(cluster: &[u32]) -> usize {
    let size = cluster.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut seen = vec![false; size];
    for &c in cluster {
        seen[c as usize] = true;
    }
    seen.into_iter().filter(|&s| s).count()
}

/// Weighted-least-squares core shared with the IRLS inner loop: absorbs,
/// prunes collinear columns, and solves the normal equations by Cholesky
/// on the pruned Gram matrix.
pub fn fit_ols(design: &Design) -> Result<EstimateResult, EstimationError> {
    let n_input = design.y.len();
    if n_input == 0 {
        return Err(EstimationError::AllRowsDropped);
    }
    let (keep, n_dropped_singleton) = singleton_mask(&design.fe, n_input);
    let rows: Vec<usize> = (0..n_input).filter(|&i| keep[i]).collect();
    if rows.is_empty() {
        return Err(EstimationError::AllRowsDropped);
    }
    let y = gather(&design.y, &rows);
    let cols: Vec<Vec<f64>> = design.cols.iter().map(|c| gather(c, &rows)).collect();
    let fe: Vec<Vec<u32>> = design.fe.iter().map(|l| gather(l, &rows)).collect();
    let cluster = gather(&design.cluster, &rows);
    let n = rows.len();
    let weights = vec![1.0; n];

    let mut work: Vec<Vec<f64>> = Vec::with_capacity(cols.len() + 1);
    work.push(y.clone());
    work.extend(cols.iter().cloned());
    demean_columns(&mut work, &fe, &weights, ABSORB_TOL, MAX_SWEEPS)?;
    let y_tilde = work[0].clone();
    let x_tilde = &work[1..];

    let gram = weighted_gram(x_tilde, None);
    let (retained, dropped) = pivoted_retained(&gram, 1e-9);
    if retained.is_empty() && !design.cols.is_empty() {
        return Err(EstimationError::Numeric {
            message: "every regressor was absorbed or collinear".to_string(),
        });
    }
    let x_r: Vec<Vec<f64>> = retained.iter().map(|&k| x_tilde[k].clone()).collect();
    let gram_r = submatrix(&gram, &retained);
    let rhs_r = subvector(&weighted_xty(x_tilde, &y_tilde, None), &retained);
    let beta = solve_spd(&gram_r, &rhs_r).ok_or_else(|| EstimationError::Numeric {
        message: "normal equations are numerically singular".to_string(),
    })?;

    let residuals: Vec<f64> = (0..n)
        .map(|i| {
            let xb: f64 = x_r.iter().zip(beta.iter()).map(|(c, b)| c[i] * b).sum();
            y_tilde[i] - xb
        })
        .collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    // Fit is reported against the original outcome, so the absorbed fixed
    // effects count toward explained variation.
    let mean_y: f64 = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let fit = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };

    let bread_inv = inverse_spd(&gram_r).ok_or_else(|| EstimationError::Numeric {
        message: "Gram inverse failed".to_string(),
    })?;
    let (vcov, se) = cluster_sandwich(&x_r, &residuals, &cluster, &bread_inv)?;

    let fitted: Vec<f64> = (0..n).map(|i| y[i] - residuals[i]).collect();
    Ok(EstimateResult {
        terms: retained.iter().map(|&k| design.terms[k]).collect(),
        names: retained.iter().map(|&k| design.names[k].clone()).collect(),
        coefficients: beta.iter().copied().collect(),
        vcov_clustered: vcov,
        se,
        n_obs_used: n,
        n_clusters: distinct_clusters(&cluster),
        n_dropped_separation: 0,
        n_dropped_singleton,
        dropped_collinear: dropped.iter().map(|&k| design.names[k].clone()).collect(),
        fit,
        convergence: ConvergenceLog {
            iterations: 1,
            final_relative_change: 0.0,
            deviance_trace: vec![rss],
        },
        fitted,
        used_rows: rows,
    })
}
