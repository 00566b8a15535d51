//! Fixed-effect absorption by weighted alternating projections, plus the
//! iterative singleton-group drop that precedes it.

use super::EstimationError;

/// Absorption stops when no subtracted group mean exceeds this.
pub const ABSORB_TOL: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 10_000;

/// Marks rows to keep after iteratively dropping observations that are
/// alone in any fixed-effect group (they carry no identifying variation
/// and distort the degrees of freedom). Returns the keep mask and the
/// number of rows dropped.
pub fn singleton_mask(fe: &[Vec<u32>], n: usize) -> (Vec<bool>, usize) {
    let mut keep = vec![true; n];
    if fe.is_empty() {
        return (keep, 0);
    }
    let mut dropped = 0;
    loop {
        let mut changed = false;
        for level in fe {
            let size = level.iter().copied().max().map_or(0, |m| m as usize + 1);
            let mut counts = vec![0u32; size];
            for i in 0..n {
                if keep[i] {
                    counts[level[i] as usize] += 1;
                }
            }
            for i in 0..n {
                if keep[i] && counts[level[i] as usize] == 1 {
                    keep[i] = false;
                    dropped += 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (keep, dropped)
}

/// Demeans every column in place by weighted alternating projections:
/// Gauss–Seidel sweeps over the levels, subtracting group-weighted means,
/// until the largest subtracted mean in a sweep is at most `tol`.
/// Returns the number of sweeps taken.
pub fn demean_columns(
    cols: &mut [Vec<f64>],
    fe: &[Vec<u32>],
    weights: &[f64],
    tol: f64,
    max_sweeps: usize,
) -> Result<usize, EstimationError> {
    if fe.is_empty() || cols.is_empty() {
        return Ok(0);
    }
    let n = weights.len();
    let sizes: Vec<usize> =
        fe.iter().map(|l| l.iter().copied().max().map_or(0, |m| m as usize + 1)).collect();
    // Group weight totals are invariant across sweeps.
    let weight_sums: Vec<Vec<f64>> = fe
        .iter()
        .zip(&sizes)
        .map(|(codes, &size)| {
            let mut sums = vec![0.0; size];
            for i in 0..n {
                sums[codes[i] as usize] += weights[i];
            }
            sums
        })
        .collect();

    let mut means: Vec<f64> = Vec::new();
    for sweep in 1..=max_sweeps {
        let mut max_change = 0.0f64;
        for (level, (codes, wsum)) in fe.iter().zip(&weight_sums).enumerate() {
            means.clear();
            means.resize(sizes[level], 0.0);
            for col in cols.iter_mut() {
                for m in means.iter_mut() {
                    *m = 0.0;
                }
                for i in 0..n {
                    means[codes[i] as usize] += weights[i] * col[i];
                }
                for (m, &w) in means.iter_mut().zip(wsum) {
                    if w > 0.0 {
                        *m /= w;
                    }
                }
                for i in 0..n {
                    let m = means[codes[i] as usize];
                    col[i] -= m;
                    if m.abs() > max_change {
                        max_change = m.abs();
                    }
                }
            }
        }
        if max_change <= tol {
            return Ok(sweep);
        }
    }
    Err(EstimationError::AbsorptionStalled { sweeps: max_sweeps })
}
