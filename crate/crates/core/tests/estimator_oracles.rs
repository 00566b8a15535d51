//! Oracle equivalence for the absorbed estimators: on instances small
//! enough to carry explicit dummy columns, the high-dimensional
//! fixed-effect path must reproduce the brute-force fits.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};

use shipfreq_core::estimation::{cluster_sandwich, fit_ols, fit_ppml, Design, Field, Term};

struct Instance {
    y_ols: Vec<f64>,
    y_ppml: Vec<f64>,
    cols: Vec<Vec<f64>>,
    fe: Vec<Vec<u32>>,
    cluster: Vec<u32>,
}

/// Random instance with crossed fixed-effect levels. Regenerates until
/// no level has singleton or all-zero-count groups, so the absorbed path
/// and the dummy oracle keep identical samples.
fn instance(seed: u64) -> Instance {
    'outer: for attempt in 0.. {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(attempt * 7919));
        let n = rng.random_range(120..=500);
        let n_levels = rng.random_range(2..=3usize);
        let fe: Vec<Vec<u32>> = (0..n_levels)
            .map(|_| {
                let groups = rng.random_range(4..=10u32);
                (0..n).map(|_| rng.random_range(0..groups)).collect()
            })
            .collect();
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let effects: Vec<Vec<f64>> = fe
            .iter()
            .map(|codes| {
                let groups = *codes.iter().max().unwrap() as usize + 1;
                (0..groups).map(|_| rng.random_range(-0.4..0.4)).collect()
            })
            .collect();
        let beta = [0.5, -0.3, 0.2];
        let mut y_ols = Vec::with_capacity(n);
        let mut y_ppml = Vec::with_capacity(n);
        for i in 0..n {
            let mut eta = 1.2;
            for (k, b) in beta.iter().enumerate() {
                eta += b * cols[k][i];
            }
            for (codes, eff) in fe.iter().zip(&effects) {
                eta += eff[codes[i] as usize];
            }
            y_ols.push(eta + rng.random_range(-0.3..0.3));
            let lambda = eta.exp().clamp(0.5, 60.0);
            let draw = Poisson::new(lambda).unwrap().sample(&mut rng);
            y_ppml.push(draw);
        }
        // Reject configurations the oracle cannot share.
        for codes in &fe {
            let groups = *codes.iter().max().unwrap() as usize + 1;
            let mut count = vec![0u32; groups];
            let mut positive = vec![false; groups];
            for i in 0..n {
                count[codes[i] as usize] += 1;
                if y_ppml[i] > 0.0 {
                    positive[codes[i] as usize] = true;
                }
            }
            if count.iter().any(|&c| c <= 1) || positive.iter().any(|p| !p) {
                continue 'outer;
            }
        }
        let cluster: Vec<u32> = (0..n).map(|_| rng.random_range(0..8u32)).collect();
        return Instance { y_ols, y_ppml, cols, fe, cluster };
    }
    unreachable!()
}

fn design_from(y: Vec<f64>, inst: &Instance) -> Design {
    let terms: Vec<Term> = (0..inst.cols.len()).map(|_| Term::Raw(Field::LnGdp)).collect();
    let names: Vec<String> = (0..inst.cols.len()).map(|k| format!("x{k}")).collect();
    Design {
        y,
        cols: inst.cols.clone(),
        terms,
        names,
        fe: inst.fe.clone(),
        fe_names: (0..inst.fe.len()).map(|k| format!("fe{k}")).collect(),
        cluster: inst.cluster.clone(),
        cluster_name: "cluster".to_string(),
        n_clusters: 8,
    }
}

/// Intercept plus slopes plus one dummy per non-reference group of each level.
fn dummy_columns(inst: &Instance) -> Vec<Vec<f64>> {
    let n = inst.cluster.len();
    let mut full: Vec<Vec<f64>> = vec![vec![1.0; n]];
    full.extend(inst.cols.iter().cloned());
    for codes in &inst.fe {
        let groups = *codes.iter().max().unwrap() as usize + 1;
        for g in 1..groups {
            full.push((0..n).map(|i| f64::from(u8::from(codes[i] == g as u32))).collect());
        }
    }
    full
}

fn ols_oracle(full: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let n = y.len();
    let p = full.len();
    let x = DMatrix::from_fn(n, p, |i, j| full[j][i]);
    let xtx = x.transpose() * &x;
    let inv = xtx.try_inverse()?;
    let beta = inv * x.transpose() * DVector::from_column_slice(y);
    Some(beta.iter().copied().collect())
}

fn poisson_oracle(full: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let n = y.len();
    let p = full.len();
    let x = DMatrix::from_fn(n, p, |i, j| full[j][i]);
    let mut beta = DVector::zeros(p);
    beta[0] = (y.iter().sum::<f64>() / n as f64).ln();
    for _ in 0..200 {
        let eta = &x * &beta;
        let mu: Vec<f64> = eta.iter().map(|e| e.exp()).collect();
        let grad = x.transpose() * DVector::from_fn(n, |i, _| y[i] - mu[i]);
        let mut hess = DMatrix::zeros(p, p);
        for i in 0..n {
            for a in 0..p {
                let xa = x[(i, a)] * mu[i];
                for b in a..p {
                    hess[(a, b)] += xa * x[(i, b)];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
        }
        let step = hess.cholesky()?.solve(&grad);
        beta += &step;
        if step.amax() <= 1e-13 {
            return Some(beta.iter().copied().collect());
        }
    }
    None
}

#[test]
fn absorbed_fits_match_explicit_dummy_oracles_on_twenty_instances() {
    let mut checked = 0;
    let mut seed = 1u64;
    while checked < 20 {
        let inst = instance(seed);
        seed += 1;
        let full = dummy_columns(&inst);
        let (Some(ols_ref), Some(ppml_ref)) =
            (ols_oracle(&full, &inst.y_ols), poisson_oracle(&full, &inst.y_ppml))
        else {
            continue; // disconnected dummy design; next draw
        };

        let ols_fit = fit_ols(&design_from(inst.y_ols.clone(), &inst)).unwrap();
        assert_eq!(ols_fit.n_dropped_singleton, 0);
        for k in 0..3 {
            let diff = (ols_fit.coefficients[k] - ols_ref[k + 1]).abs();
            assert!(
                diff <= 1e-6,
                "instance {seed}: OLS slope {k} differs by {diff:e}"
            );
        }

        let ppml_fit = fit_ppml(&design_from(inst.y_ppml.clone(), &inst)).unwrap();
        assert_eq!(ppml_fit.n_dropped_separation, 0);
        for k in 0..3 {
            let diff = (ppml_fit.coefficients[k] - ppml_ref[k + 1]).abs();
            assert!(
                diff <= 1e-6,
                "instance {seed}: PPML slope {k} differs by {diff:e}"
            );
        }
        checked += 1;
    }
}

#[test]
fn fitted_cluster_vcov_matches_brute_force_sandwich() {
    // 30 rows, 5 clusters, no absorbed effects, so the oracle can see the
    // exact design the fitter used.
    let mut rng = ChaCha12Rng::seed_from_u64(404);
    let n = 30;
    let cols: Vec<Vec<f64>> = vec![
        vec![1.0; n],
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
    ];
    let y: Vec<f64> = (0..n)
        .map(|i| 0.4 + 0.9 * cols[1][i] - 0.5 * cols[2][i] + rng.random_range(-0.4..0.4))
        .collect();
    let cluster: Vec<u32> = (0..n).map(|i| (i % 5) as u32).collect();
    let design = Design {
        y: y.clone(),
        cols: cols.clone(),
        terms: vec![Term::Intercept, Term::Raw(Field::LnGdp), Term::Raw(Field::LnGdpPc)],
        names: vec!["intercept".into(), "x1".into(), "x2".into()],
        fe: vec![],
        fe_names: vec![],
        cluster: cluster.clone(),
        cluster_name: "cluster".into(),
        n_clusters: 5,
    };
    let result = fit_ols(&design).unwrap();

    // Brute force from explicit per-cluster score outer products.
    let p = 3;
    let x = DMatrix::from_fn(n, p, |i, j| cols[j][i]);
    let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
    let residual: Vec<f64> = (0..n)
        .map(|i| {
            let fit: f64 = (0..p).map(|k| cols[k][i] * result.coefficients[k]).sum();
            y[i] - fit
        })
        .collect();
    let mut meat = DMatrix::<f64>::zeros(p, p);
    for g in 0..5u32 {
        let mut s = DVector::<f64>::zeros(p);
        for i in 0..n {
            if cluster[i] == g {
                for k in 0..p {
                    s[k] += residual[i] * cols[k][i];
                }
            }
        }
        meat += &s * s.transpose();
    }
    let nf = n as f64;
    let factor = 5.0 / 4.0 * (nf - 1.0) / (nf - p as f64);
    let oracle = &xtx_inv * meat * &xtx_inv * factor;
    let diff = (&result.vcov_clustered - &oracle).amax();
    assert!(diff <= 1e-10 * oracle.amax(), "vcov differs by {diff:e}");

    // Consistency of the reusable sandwich entry point on the same data.
    let (direct, _) = cluster_sandwich(&cols, &residual, &cluster, &xtx_inv).unwrap();
    assert!((&direct - &oracle).amax() <= 1e-10 * oracle.amax());
}
