//! Small dense helpers shared by the fitters: weighted Gram assembly and
//! collinearity detection by diagonal-pivoted Cholesky.

use nalgebra::{DMatrix, DVector};

/// `X'WX` over column-major regressors (`W = I` when `weights` is None).
pub fn weighted_gram(cols: &[Vec<f64>], weights: Option<&[f64]>) -> DMatrix<f64> {
    let p = cols.len();
    let n = cols.first().map_or(0, Vec::len);
    let mut gram = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let mut acc = 0.0;
            match weights {
                Some(w) => {
                    for i in 0..n {
                        acc += w[i] * cols[a][i] * cols[b][i];
                    }
                }
                None => {
                    for i in 0..n {
                        acc += cols[a][i] * cols[b][i];
                    }
                }
            }
            gram[(a, b)] = acc;
            gram[(b, a)] = acc;
        }
    }
    gram
}

/// `X'Wy` over column-major regressors.
pub fn weighted_xty(cols: &[Vec<f64>], y: &[f64], weights: Option<&[f64]>) -> DVector<f64> {
    let p = cols.len();
    let n = y.len();
    let mut out = DVector::zeros(p);
    for a in 0..p {
        let mut acc = 0.0;
        match weights {
            Some(w) => {
                for i in 0..n {
                    acc += w[i] * cols[a][i] * y[i];
                }
            }
            None => {
                for i in 0..n {
                    acc += cols[a][i] * y[i];
                }
            }
        }
        out[a] = acc;
    }
    out
}

/// Greedy diagonal-pivoted Cholesky elimination on a copy of the Gram
/// matrix. Columns whose pivot drops below `threshold_ratio` times the
/// leading pivot are flagged collinear. Returns (retained, dropped)
/// index sets, each in ascending order.
pub fn pivoted_retained(gram: &DMatrix<f64>, threshold_ratio: f64) -> (Vec<usize>, Vec<usize>) {
    let p = gram.nrows();
    let mut work = gram.clone();
    let mut in_basis = vec![false; p];
    let mut retained = Vec::new();
    let mut leading_pivot: Option<f64> = None;
    loop {
        let mut best = usize::MAX;
        let mut best_value = 0.0;
        for j in 0..p {
            if !in_basis[j] && work[(j, j)] > best_value {
                best = j;
                best_value = work[(j, j)];
            }
        }
        if best == usize::MAX {
            break;
        }
        match leading_pivot {
            None => leading_pivot = Some(best_value),
            Some(first) => {
                if best_value <= threshold_ratio * first {
                    break;
                }
            }
        }
        in_basis[best] = true;
        retained.push(best);
        // Schur complement update of the remaining block.
        for i in 0..p {
            if in_basis[i] {
                continue;
            }
            let f = work[(i, best)] / best_value;
            for j in 0..p {
                if in_basis[j] {
                    continue;
                }
                let delta = f * work[(best, j)];
                work[(i, j)] -= delta;
            }
        }
    }
    retained.sort_unstable();
    let dropped: Vec<usize> = (0..p).filter(|j| !in_basis[*j]).collect();
    (retained, dropped)
}

pub fn submatrix(gram: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    let k = keep.len();
    DMatrix::from_fn(k, k, |i, j| gram[(keep[i], keep[j])])
}

pub fn subvector(v: &DVector<f64>, keep: &[usize]) -> DVector<f64> {
    DVector::from_fn(keep.len(), |i, _| v[keep[i]])
}

pub fn solve_spd(gram: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    gram.clone().cholesky().map(|ch| ch.solve(rhs))
}

pub fn inverse_spd(gram: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    gram.clone().cholesky().map(|ch| ch.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoting_drops_an_exact_duplicate_column() {
        let x = vec![
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0, 4.0, 6.0, 8.0], // 2x the second column
        ];
        let gram = weighted_gram(&x, None);
        let (retained, dropped) = pivoted_retained(&gram, 1e-9);
        assert_eq!(retained.len(), 2);
        assert_eq!(dropped.len(), 1);
        // One of the two proportional columns survives.
        assert!(dropped[0] == 1 || dropped[0] == 2);
    }

    #[test]
    fn full_rank_keeps_everything() {
        let x = vec![vec![1.0, 1.0, 1.0], vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 4.0]];
        let gram = weighted_gram(&x, None);
        let (retained, dropped) = pivoted_retained(&gram, 1e-9);
        assert_eq!(retained, vec![0, 1, 2]);
        assert!(dropped.is_empty());
    }

    #[test]
    fn zero_column_is_dropped() {
        let x = vec![vec![1.0, 1.0, 1.0], vec![0.0, 0.0, 0.0]];
        let gram = weighted_gram(&x, None);
        let (retained, dropped) = pivoted_retained(&gram, 1e-9);
        assert_eq!(retained, vec![0]);
        assert_eq!(dropped, vec![1]);
    }

    #[test]
    fn weighted_gram_matches_hand_computation() {
        let x = vec![vec![1.0, 2.0], vec![3.0, -1.0]];
        let w = vec![2.0, 0.5];
        let gram = weighted_gram(&x, Some(&w));
        assert_eq!(gram[(0, 0)], 2.0 * 1.0 + 0.5 * 4.0);
        assert_eq!(gram[(0, 1)], 2.0 * 3.0 + 0.5 * (-2.0));
        assert_eq!(gram[(1, 1)], 2.0 * 9.0 + 0.5 * 1.0);
    }
}
