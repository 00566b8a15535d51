//! Poisson pseudo-maximum-likelihood via iteratively reweighted least
//! squares with fixed-effect absorption inside every iteration.

use super::absorb::{demean_columns, singleton_mask, ABSORB_TOL, MAX_SWEEPS};
use super::design::Design;
use super::linalg::{
    inverse_spd, pivoted_retained, solve_spd, submatrix, subvector, weighted_gram, weighted_xty,
};
use super::ols::{distinct_clusters, gather};
use super::separation::separated_rows;
use super::vcov::cluster_sandwich;
use super::{ConvergenceLog, EstimateResult, EstimationError};

const MAX_ITER: usize = 100;
const DEVIANCE_TOL: f64 = 1e-9;
const MIN_WEIGHT: f64 = 1e-10;
const ETA_CLAMP: f64 = 700.0;

/// Poisson deviance `2 Σ [y·ln(y/μ) - (y - μ)]` with `0·ln 0 = 0`.
fn deviance(y: &[f64], mu: &[f64]) -> f64 {
    let mut d = 0.0;
    for (yi, mi) in y.iter().zip(mu) {
        let m = mi.max(1e-300);
        if *yi > 0.0 {
            d += yi * (yi / m).ln() - (yi - m);
        } else {
            d += m;
        }
    }
    2.0 * d
}

pub fn fit_ppml(design: &Design) -> Result<EstimateResult, EstimationError> {
    let n_input = design.y.len();
    if n_input == 0 {
        return Err(EstimationError::AllRowsDropped);
    }

    // Alternate singleton and separation drops to a fixed point: removing
    // separated rows can create fresh singletons and vice versa.
    let mut rows: Vec<usize> = (0..n_input).collect();
    let mut n_dropped_singleton = 0;
    let mut n_dropped_separation = 0;
    for _ in 0..10 {
        let fe_cur: Vec<Vec<u32>> = design.fe.iter().map(|l| gather(l, &rows)).collect();
        let (keep, dropped) = singleton_mask(&fe_cur, rows.len());
        if dropped > 0 {
            n_dropped_singleton += dropped;
            rows = rows
                .iter()
                .enumerate()
                .filter_map(|(pos, &r)| keep[pos].then_some(r))
                .collect();
            continue;
        }
        let y_cur = gather(&design.y, &rows);
        let cols_cur: Vec<Vec<f64>> = design.cols.iter().map(|c| gather(c, &rows)).collect();
        let separated = separated_rows(&y_cur, &cols_cur, &fe_cur)?;
        if separated.is_empty() {
            break;
        }
        n_dropped_separation += separated.len();
        let mut kill = vec![false; rows.len()];
        for pos in separated {
            kill[pos] = true;
        }
        rows = rows
            .iter()
            .enumerate()
            .filter_map(|(pos, &r)| (!kill[pos]).then_some(r))
            .collect();
    }
    if rows.is_empty() {
        return Err(EstimationError::AllRowsDropped);
    }

    let y = gather(&design.y, &rows);
    let cols: Vec<Vec<f64>> = design.cols.iter().map(|c| gather(c, &rows)).collect();
    let fe: Vec<Vec<u32>> = design.fe.iter().map(|l| gather(l, &rows)).collect();
    let cluster = gather(&design.cluster, &rows);
    let n = rows.len();
    let ybar = y.iter().sum::<f64>() / n as f64;
    if !(ybar > 0.0) {
        return Err(EstimationError::Numeric {
            message: "every retained count is zero".to_string(),
        });
    }

    let mut mu: Vec<f64> = y.iter().map(|&v| 0.5 * (v + ybar)).collect();
    let mut eta: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
    let mut dev = deviance(&y, &mu);
    let mut trace = vec![dev];
    let mut retained: Option<(Vec<usize>, Vec<usize>)> = None;

    struct IterationState {
        x_r: Vec<Vec<f64>>,
        gram_r: nalgebra::DMatrix<f64>,
        beta: nalgebra::DVector<f64>,
        scores: Vec<f64>,
    }
    let mut state: Option<IterationState> = None;
    let mut iterations = 0;
    let mut final_change = f64::INFINITY;
    let mut converged = false;

    while iterations < MAX_ITER {
        iterations += 1;
        let weights: Vec<f64> = mu.iter().map(|m| m.max(MIN_WEIGHT)).collect();
        let z: Vec<f64> =
            (0..n).map(|i| eta[i] + (y[i] - mu[i]) / weights[i]).collect();
        let mut work: Vec<Vec<f64>> = Vec::with_capacity(cols.len() + 1);
        work.push(z.clone());
        work.extend(cols.iter().cloned());
        demean_columns(&mut work, &fe, &weights, ABSORB_TOL, MAX_SWEEPS)?;
        let z_tilde = work[0].clone();
        let x_tilde = &work[1..];

        let gram = weighted_gram(x_tilde, Some(&weights));
        // Exact collinearity is structural (weight-invariant), so decide
        // the retained set once on the first pass.
        if retained.is_none() {
            retained = Some(pivoted_retained(&gram, 1e-9));
        }
        let keep = retained.as_ref().unwrap().0.clone();
        let x_r: Vec<Vec<f64>> = keep.iter().map(|&k| x_tilde[k].clone()).collect();
        let gram_r = submatrix(&gram, &keep);
        let rhs_r = subvector(&weighted_xty(x_tilde, &z_tilde, Some(&weights)), &keep);
        let beta = match solve_spd(&gram_r, &rhs_r) {
            Some(beta) => beta,
            None => {
                return Err(EstimationError::Numeric {
                    message: "weighted normal equations became singular".to_string(),
                })
            }
        };

        let xb: Vec<f64> = (0..n)
            .map(|i| x_r.iter().zip(beta.iter()).map(|(c, b)| c[i] * b).sum())
            .collect();
        let scores: Vec<f64> = (0..n).map(|i| weights[i] * (z_tilde[i] - xb[i])).collect();

        let eta_prev = eta.clone();
        let dev_prev = dev;
        let mut eta_new: Vec<f64> = (0..n)
            .map(|i| (z[i] - (z_tilde[i] - xb[i])).clamp(-ETA_CLAMP, ETA_CLAMP))
            .collect();
        let mut mu_new: Vec<f64> = eta_new.iter().map(|e| e.exp()).collect();
        let mut dev_new = deviance(&y, &mu_new);
        // Step-halve on deviance increase, but never against the
        // initialization: the starting mean profile lies outside the model
        // space and its deviance is not a valid reference.
        let mut halvings = 0;
        while iterations > 1 && dev_new > dev_prev * (1.0 + 1e-12) + 1e-12 && halvings < 20 {
            for i in 0..n {
                eta_new[i] = 0.5 * (eta_new[i] + eta_prev[i]);
            }
            mu_new = eta_new.iter().map(|e| e.exp()).collect();
            dev_new = deviance(&y, &mu_new);
            halvings += 1;
        }

        eta = eta_new;
        mu = mu_new;
        dev = dev_new;
        trace.push(dev);
        final_change = (dev - dev_prev).abs() / (dev.abs() + 0.1);
        state = Some(IterationState { x_r, gram_r, beta, scores });
        if final_change <= DEVIANCE_TOL {
            converged = true;
            break;
        }
    }

    if !converged {
        return Err(EstimationError::NonConvergence { iterations, trace });
    }
    let state = state.expect("at least one IRLS iteration ran");
    let (keep, dropped) = retained.expect("retained set fixed on first iteration");

    let null_dev = deviance(&y, &vec![ybar; n]);
    let fit = if null_dev > 0.0 { 1.0 - dev / null_dev } else { 0.0 };

    let bread_inv = inverse_spd(&state.gram_r).ok_or_else(|| EstimationError::Numeric {
        message: "weighted Gram inverse failed".to_string(),
    })?;
    let (vcov, se) = cluster_sandwich(&state.x_r, &state.scores, &cluster, &bread_inv)?;

    Ok(EstimateResult {
        terms: keep.iter().map(|&k| design.terms[k]).collect(),
        names: keep.iter().map(|&k| design.names[k].clone()).collect(),
        coefficients: state.beta.iter().copied().collect(),
        vcov_clustered: vcov,
        se,
        n_obs_used: n,
        n_clusters: distinct_clusters(&cluster),
        n_dropped_separation,
        n_dropped_singleton,
        dropped_collinear: dropped.iter().map(|&k| design.names[k].clone()).collect(),
        fit,
        convergence: ConvergenceLog {
            iterations,
            final_relative_change: final_change,
            deviance_trace: trace,
        },
        fitted: mu,
        used_rows: rows,
    })
}
