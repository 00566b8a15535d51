//! Separation detection for Poisson regression.
//!
//! A zero-count observation is separated when some direction `γ` of the
//! regressor-plus-fixed-effect space has `x_i'γ = 0` on every positive
//! count and `x_i'γ > 0` on that observation: the likelihood then pushes
//! its mean to the zero boundary and no finite estimate exists. Such
//! rows must be dropped before IRLS or it stalls.
//!
//! The certificate is found by an iterative rectifier: regress a
//! candidate target `u` (supported on the zero-count rows) on the full
//! design, with large weights pinning the positive-count rows to zero;
//! rectify the fitted values at zero; repeat. This alternates projection
//! onto the design's column space with projection onto the nonnegative
//! cone, so it converges to a nonnegative certificate direction when one
//! exists and collapses to zero when none does.

use super::absorb::{demean_columns, MAX_SWEEPS};
use super::linalg::{pivoted_retained, solve_spd, submatrix, subvector, weighted_gram, weighted_xty};
use super::EstimationError;

/// Weight pinning positive-count rows to the zero target.
const PIN_WEIGHT: f64 = 1e6;
/// Rows whose normalized certificate value exceeds this are separated.
const CERT_TOL: f64 = 1e-5;

/// Returns indices of separated rows (possibly empty).
pub fn separated_rows(
    y: &[f64],
    cols: &[Vec<f64>],
    fe: &[Vec<u32>],
) -> Result<Vec<usize>, EstimationError> {
    let n = y.len();
    let zero_rows: Vec<usize> = (0..n).filter(|&i| y[i] == 0.0).collect();
    if zero_rows.is_empty() || zero_rows.len() == n {
        // All-positive: nothing to do. All-zero: the caller rejects the
        // sample outright.
        return Ok(Vec::new());
    }
    let weights: Vec<f64> =
        (0..n).map(|i| if y[i] == 0.0 { 1.0 } else { PIN_WEIGHT }).collect();
    let mut u: Vec<f64> = (0..n).map(|i| if y[i] == 0.0 { 1.0 } else { 0.0 }).collect();

    for _ in 0..100 {
        // Fitted values of the weighted regression of u on the design.
        let mut work: Vec<Vec<f64>> = Vec::with_capacity(cols.len() + 1);
        work.push(u.clone());
        work.extend(cols.iter().cloned());
        demean_columns(&mut work, fe, &weights, 1e-11, MAX_SWEEPS)?;
        let u_tilde = &work[0];
        let x_tilde = &work[1..];

        let fitted: Vec<f64> = if x_tilde.is_empty() {
            (0..n).map(|i| u[i] - u_tilde[i]).collect()
        } else {
            let gram = weighted_gram(x_tilde, Some(&weights));
            let rhs = weighted_xty(x_tilde, u_tilde, Some(&weights));
            let (retained, _) = pivoted_retained(&gram, 1e-9);
            if retained.is_empty() {
                (0..n).map(|i| u[i] - u_tilde[i]).collect()
            } else {
                let sub_cols: Vec<Vec<f64>> =
                    retained.iter().map(|&k| x_tilde[k].clone()).collect();
                let beta = solve_spd(&submatrix(&gram, &retained), &subvector(&rhs, &retained))
                    .ok_or_else(|| EstimationError::Numeric {
                        message: "separation certificate solve failed".to_string(),
                    })?;
                (0..n)
                    .map(|i| {
                        let xb: f64 =
                            sub_cols.iter().zip(beta.iter()).map(|(c, b)| c[i] * b).sum();
                        u[i] - (u_tilde[i] - xb)
                    })
                    .collect()
            }
        };

        let mut next = vec![0.0f64; n];
        let mut max_v = 0.0f64;
        for &i in &zero_rows {
            let v = fitted[i].max(0.0);
            next[i] = v;
            if v > max_v {
                max_v = v;
            }
        }
        // Without a certificate the rectified candidate contracts
        // geometrically (leaving only weighted-regression leak of order
        // 1/PIN_WEIGHT); with one it stabilizes at the certificate's
        // own scale. No renormalization: rescaling would amplify the
        // leak back to unity and manufacture false certificates.
        if max_v <= 1e-10 {
            return Ok(Vec::new());
        }
        let mut delta = 0.0f64;
        for &i in &zero_rows {
            delta = delta.max((next[i] - u[i]).abs());
        }
        u = next;
        if delta <= 1e-9 * max_v {
            let scale = max_v;
            return Ok(zero_rows
                .into_iter()
                .filter(|&i| u[i] > CERT_TOL * scale)
                .collect());
        }
    }
    // Undecided after the iteration cap: claim nothing and let the fit
    // surface any stall loudly rather than silently dropping rows.
    Ok(Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_zeros_means_no_separation() {
        let y = vec![1.0, 2.0, 3.0];
        let cols = vec![vec![1.0, 1.0, 1.0]];
        assert!(separated_rows(&y, &cols, &[]).unwrap().is_empty());
    }

    #[test]
    fn dummy_perfectly_predicting_zeros_is_certified() {
        // Rows 3..6 have a dummy of 1 and all-zero counts: along +dummy the
        // mean collapses to the boundary, so those rows are separated.
        let y = vec![2.0, 1.0, 4.0, 0.0, 0.0, 0.0];
        let dummy = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let intercept = vec![1.0; 6];
        let x = vec![vec![0.3, -0.2, 0.5, 0.1, -0.6, 0.4], intercept, dummy];
        let separated = separated_rows(&y, &x, &[]).unwrap();
        assert_eq!(separated, vec![3, 4, 5]);
    }

    #[test]
    fn all_zero_fixed_effect_group_is_certified_via_absorption() {
        // Group 2 of one absorbed level has only zero counts.
        let y = vec![1.0, 3.0, 0.0, 2.0, 0.0, 0.0];
        let fe = vec![vec![0u32, 0, 1, 1, 2, 2]];
        let x = vec![vec![0.2, -0.1, 0.7, 0.3, -0.4, 0.9]];
        let separated = separated_rows(&y, &x, &fe).unwrap();
        assert_eq!(separated, vec![4, 5]);
    }

    #[test]
    fn interior_zeros_are_not_separated() {
        // Zeros exist but no direction isolates them: intercept-only plus a
        // balanced regressor.
        let y = vec![0.0, 2.0, 0.0, 3.0, 1.0, 0.0];
        let x = vec![vec![1.0; 6], vec![0.5, 0.5, -0.5, -0.5, 0.0, 0.0]];
        assert!(separated_rows(&y, &x, &[]).unwrap().is_empty());
    }
}
