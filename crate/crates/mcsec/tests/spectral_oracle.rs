//! Oracle tests for maximal correlation.
//!
//! The library computes rho_m through the singular values of the
//! standardized joint matrix. The oracle here never builds that matrix: it
//! maximizes the correlation definition directly by alternating conditional
//! expectations on the joint pmf, which converges to the same supremum.
//! Agreement between the two routes validates both.

mod common;

use common::{random_joint, rng};
use mcsec::spectral::b_matrix;
use mcsec::{correlation_report, maximal_correlation, JointPmf};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Alternating conditional expectations: g -> f = E[g|X] -> g = E[f|Y],
/// recentred and renormalized each round. The correlation estimate is
/// nondecreasing, so a vanishing increment certifies convergence.
fn ace_rho_once(joint: &JointPmf, rng: &mut ChaCha12Rng) -> f64 {
    let rows = joint.n_rows();
    let cols = joint.n_cols();
    let px: Vec<f64> = (0..rows).map(|i| joint.row_marginal().get(i)).collect();
    let py: Vec<f64> = (0..cols).map(|j| joint.col_marginal().get(j)).collect();

    let center_norm = |v: &mut [f64], w: &[f64]| -> f64 {
        let mean: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
        for x in v.iter_mut() {
            *x -= mean;
        }
        let var: f64 = v.iter().zip(w).map(|(a, b)| a * a * b).sum();
        let norm = var.sqrt();
        if norm > 1e-300 {
            for x in v.iter_mut() {
                *x /= norm;
            }
        }
        norm
    };

    let mut g: Vec<f64> = (0..cols).map(|_| rng.random::<f64>() - 0.5).collect();
    if center_norm(&mut g, &py) <= 1e-300 {
        return 0.0;
    }
    let mut f = vec![0.0f64; rows];
    let mut rho_prev = -1.0;
    for iter in 0..200_000 {
        for (x, fx) in f.iter_mut().enumerate() {
            *fx = (0..cols).map(|y| joint.p(x, y) * g[y]).sum::<f64>() / px[x];
        }
        if center_norm(&mut f, &px) <= 1e-300 {
            return 0.0;
        }
        for (y, gy) in g.iter_mut().enumerate() {
            *gy = (0..rows).map(|x| joint.p(x, y) * f[x]).sum::<f64>() / py[y];
        }
        let rho = center_norm(&mut g, &py);
        if rho <= 1e-300 {
            return 0.0;
        }
        if iter > 10 && rho - rho_prev < 1e-12 {
            return rho;
        }
        rho_prev = rho;
    }
    rho_prev
}

fn ace_rho(joint: &JointPmf, seed: u64) -> f64 {
    let mut best = 0.0f64;
    for restart in 0..3 {
        let mut r = rng(seed.wrapping_add(restart));
        best = best.max(ace_rho_once(joint, &mut r));
    }
    best
}

#[test]
fn ace_oracle_agrees_on_100_random_joints() {
    let mut r = rng(0xace);
    for trial in 0..100u64 {
        let rows = r.random_range(2..=12);
        let cols = r.random_range(2..=12);
        let joint = random_joint(&mut r, rows, cols);
        let spectral = maximal_correlation(&joint);
        let oracle = ace_rho(&joint, 0x5eed ^ trial);
        assert!(
            (spectral - oracle).abs() <= 1e-6,
            "trial {trial} ({rows}x{cols}): spectral {spectral} vs ACE {oracle}"
        );
        let report = correlation_report(&joint);
        assert!(report.sandwich_ok, "trial {trial}: sandwich violated");
        assert!(report.mi_bound_ok, "trial {trial}: MI bound violated");
    }
}

#[test]
fn sqrt_marginal_is_a_left_null_vector() {
    let mut r = rng(0xb0);
    for _ in 0..50 {
        let rows = r.random_range(2..=10);
        let cols = r.random_range(2..=10);
        let joint = random_joint(&mut r, rows, cols);
        let b = b_matrix(&joint);
        let u: Vec<f64> = (0..rows)
            .map(|i| joint.row_marginal().get(i).sqrt())
            .collect();
        for j in 0..cols {
            let dot: f64 = (0..rows).map(|i| u[i] * b[(i, j)]).sum();
            assert!(dot.abs() <= 1e-10, "column {j}: {dot}");
        }
    }
}

#[test]
fn merging_ciphertext_columns_never_increases_rho() {
    let mut r = rng(0xd47a);
    for trial in 0..100 {
        let rows = r.random_range(2..=10);
        let cols = r.random_range(3..=10);
        let joint = random_joint(&mut r, rows, cols);
        let rho = maximal_correlation(&joint);

        let a = r.random_range(0..cols);
        let b = loop {
            let b = r.random_range(0..cols);
            if b != a {
                break b;
            }
        };
        let (keep, drop) = (a.min(b), a.max(b));
        let mut flat = Vec::with_capacity(rows * (cols - 1));
        for i in 0..rows {
            for j in 0..cols {
                if j == drop {
                    continue;
                }
                let mut p = joint.p(i, j);
                if j == keep {
                    p += joint.p(i, drop);
                }
                flat.push(p);
            }
        }
        let merged = JointPmf::from_flat(flat, rows, cols - 1).unwrap();
        let rho_merged = maximal_correlation(&merged);
        assert!(
            rho_merged <= rho + 1e-9,
            "trial {trial}: {rho_merged} > {rho}"
        );
    }
}

#[test]
fn rho_is_permutation_invariant() {
    let mut r = rng(0x9e37);
    for trial in 0..50 {
        let rows = r.random_range(2..=12);
        let cols = r.random_range(2..=12);
        let joint = random_joint(&mut r, rows, cols);
        let rho = maximal_correlation(&joint);

        let mut row_perm: Vec<usize> = (0..rows).collect();
        let mut col_perm: Vec<usize> = (0..cols).collect();
        for i in (1..rows).rev() {
            row_perm.swap(i, r.random_range(0..=i));
        }
        for i in (1..cols).rev() {
            col_perm.swap(i, r.random_range(0..=i));
        }
        let mut flat = vec![0.0f64; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                flat[row_perm[i] * cols + col_perm[j]] = joint.p(i, j);
            }
        }
        let permuted = JointPmf::from_flat(flat, rows, cols).unwrap();
        assert!(
            (maximal_correlation(&permuted) - rho).abs() <= 1e-12,
            "trial {trial}"
        );
    }
}
