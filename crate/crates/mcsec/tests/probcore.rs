//! Property tests for the probability core: the chi-square/collision-entropy
//! identity, permutation invariance of mutual information, and entropy
//! ordering, each checked against independently computed quantities.

mod common;

use common::{random_joint, random_pmf, random_sparse_pmf, rng};
use mcsec::constructions::ReferenceCipher;
use mcsec::{JointPmf, MessageDistributionScenario, Pmf};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn chi_square_against_uniform_matches_collision_entropy() {
    // chi2(p || Unif[2^k]) = 2^(k - H2(p)) - 1, over power-of-two sizes.
    let mut r = rng(0x9e3779b97f4a7c15);
    for k in 1..=10u32 {
        let len = 1usize << k;
        for _ in 0..20 {
            let p = random_pmf(&mut r, len);
            let chi2 = p.chi_square(&Pmf::uniform(len)).unwrap();
            let predicted = (k as f64 - p.renyi_entropy2()).exp2() - 1.0;
            assert!(
                (chi2 - predicted).abs() <= 1e-9,
                "k={k}: {chi2} vs {predicted}"
            );
        }
    }
    // extreme case: a point mass over 2^k outcomes
    for k in 1..=10u32 {
        let len = 1usize << k;
        let p = Pmf::point_mass(len, len / 2);
        let chi2 = p.chi_square(&Pmf::uniform(len)).unwrap();
        assert!((chi2 - (len as f64 - 1.0)).abs() <= 1e-9);
        assert!(p.renyi_entropy2().abs() <= 1e-12);
    }
}

proptest! {
    // The identity holds at any alphabet size m with n = log2(m).
    #[test]
    fn chi_square_identity_any_alphabet(raw in prop::collection::vec(1e-6..1.0f64, 2..200)) {
        let total: f64 = raw.iter().sum();
        let p = Pmf::new(raw.iter().map(|x| x / total).collect()).unwrap();
        let m = p.len();
        let chi2 = p.chi_square(&Pmf::uniform(m)).unwrap();
        let predicted = ((m as f64).log2() - p.renyi_entropy2()).exp2() - 1.0;
        prop_assert!((chi2 - predicted).abs() <= 1e-9);
    }

    #[test]
    fn renyi_entropy_stays_in_range(raw in prop::collection::vec(0.0..1.0f64, 1..64)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let p = Pmf::new(raw.iter().map(|x| x / total).collect()).unwrap();
        let h2 = p.renyi_entropy2();
        prop_assert!(h2 >= -1e-12);
        prop_assert!(h2 <= (p.support_size() as f64).log2() + 1e-12);
    }
}

#[test]
fn mutual_information_is_permutation_invariant() {
    let mut r = rng(0xc0ffee);
    for trial in 0..50 {
        let rows = r.random_range(2..=12);
        let cols = r.random_range(2..=12);
        let joint = random_joint(&mut r, rows, cols);
        let mi = joint.mutual_information();

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
            (permuted.mutual_information() - mi).abs() <= 1e-12,
            "trial {trial}"
        );
    }
}

#[test]
fn renyi_shannon_support_ordering_on_1000_pmfs() {
    let mut r = rng(0xfeed);
    for trial in 0..1000 {
        let len = r.random_range(1..=64);
        let p = if trial % 2 == 0 {
            random_pmf(&mut r, len)
        } else {
            random_sparse_pmf(&mut r, len, 0.4)
        };
        let shannon: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
        let h2 = p.renyi_entropy2();
        assert!(
            h2 <= shannon + 1e-12,
            "trial {trial}: H2 {h2} > H {shannon}"
        );
        assert!(
            shannon <= (p.support_size() as f64).log2() + 1e-12,
            "trial {trial}"
        );
    }
}

#[test]
fn fixed_entropy_and_divergence_values() {
    let p = Pmf::new(vec![0.7, 0.1, 0.1, 0.1]).unwrap();
    assert!((p.renyi_entropy2() - (-0.52f64.log2())).abs() <= 1e-12);
    let p = Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
    assert!((p.renyi_entropy2() - 1.0).abs() <= 1e-12);
    assert!((Pmf::uniform(4).renyi_entropy2() - 2.0).abs() <= 1e-12);

    let point = Pmf::point_mass(2, 0);
    let half = Pmf::uniform(2);
    assert!((point.chi_square(&half).unwrap() - 1.0).abs() <= 1e-12);
    assert!(half.chi_square(&half).unwrap().abs() <= 1e-12);
}

#[test]
fn conditional_of_shift_cipher_column() {
    // C2 sends messages 0 and 3 to ciphertext 0 (keys 0 and 1), so the
    // message law given that column is half-and-half on {0, 3}.
    let joint = MessageDistributionScenario::uniform(ReferenceCipher::C2.build().unwrap())
        .induced_joint()
        .unwrap();
    let cond = joint.conditional_pmf(0).unwrap();
    assert_eq!(cond.as_slice(), &[0.5, 0.0, 0.0, 0.5]);

    // independence: conditional equals the row marginal
    let product = JointPmf::from_rows(vec![vec![0.1, 0.3], vec![0.15, 0.45]]).unwrap();
    let cond = product.conditional_pmf(1).unwrap();
    assert!((cond.get(0) - 0.4).abs() <= 1e-12);
    assert!((cond.get(1) - 0.6).abs() <= 1e-12);

    // identity coupling: point mass
    let ident = JointPmf::from_rows(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
    assert_eq!(ident.conditional_pmf(1).unwrap().as_slice(), &[0.0, 1.0]);
    assert!((ident.mutual_information() - 1.0).abs() <= 1e-12);
}
