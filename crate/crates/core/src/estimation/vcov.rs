//! Cluster-robust sandwich covariance.

use nalgebra::DMatrix;

use super::EstimationError;

/// `(X'WX)^{-1} (Σ_g s_g s_g') (X'WX)^{-1}` with `s_g` the within-cluster
/// sum of per-row scores `score_i · x_i`, scaled by the finite-sample
/// factor `G/(G-1) · (N-1)/(N-K)`. `K` counts the retained regressor
/// columns. `cols` is the fixed-effect-absorbed design.
pub fn cluster_sandwich(
    cols: &[Vec<f64>],
    scores: &[f64],
    cluster: &[u32],
    bread_inv: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, Vec<f64>), EstimationError> {
    let p = cols.len();
    let n = scores.len();
    let n_clusters = cluster.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut seen = vec![false; n_clusters];
    for &c in cluster {
        seen[c as usize] = true;
    }
    let g = seen.iter().filter(|&&s| s).count();
    if g <= 1 {
        return Err(EstimationError::SingleCluster);
    }
    if n <= p {
        return Err(EstimationError::Numeric {
            message: format!("degrees of freedom exhausted: n = {n}, k = {p}"),
        });
    }

    // Within-cluster score sums.
    let mut sums = vec![vec![0.0f64; p]; n_clusters];
    for i in 0..n {
        let slot = &mut sums[cluster[i] as usize];
        for k in 0..p {
            slot[k] += scores[i] * cols[k][i];
        }
    }
    let mut meat = DMatrix::zeros(p, p);
    for s in &sums {
        for a in 0..p {
            if s[a] == 0.0 {
                continue;
            }
            for b in a..p {
                meat[(a, b)] += s[a] * s[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            meat[(a, b)] = meat[(b, a)];
        }
    }

    let g = g as f64;
    let nf = n as f64;
    let kf = p as f64;
    let factor = g / (g - 1.0) * (nf - 1.0) / (nf - kf);
    let vcov = bread_inv * meat * bread_inv * factor;
    let se: Vec<f64> = (0..p).map(|k| vcov[(k, k)].max(0.0).sqrt()).collect();
    Ok((vcov, se))
}
