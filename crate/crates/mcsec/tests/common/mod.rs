//! Seeded random instance generators shared by the oracle test suites.
#![allow(dead_code)]

use mcsec::{Cipher, JointPmf, MessageDistributionScenario, Pmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random pmf with strictly positive entries.
pub fn random_pmf(rng: &mut ChaCha12Rng, len: usize) -> Pmf {
    loop {
        let mut v: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        let total: f64 = v.iter().sum();
        if total < 1e-9 {
            continue;
        }
        for x in &mut v {
            *x /= total;
        }
        return Pmf::new(v).unwrap();
    }
}

/// Random pmf in which each entry is zeroed with probability `zero_p`
/// (at least one entry stays positive).
pub fn random_sparse_pmf(rng: &mut ChaCha12Rng, len: usize, zero_p: f64) -> Pmf {
    loop {
        let mut v: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random::<f64>() < zero_p {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        let total: f64 = v.iter().sum();
        if total < 1e-9 {
            continue;
        }
        for x in &mut v {
            *x /= total;
        }
        return Pmf::new(v).unwrap();
    }
}

/// Random joint pmf with strictly positive cells.
pub fn random_joint(rng: &mut ChaCha12Rng, rows: usize, cols: usize) -> JointPmf {
    let mut flat: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random::<f64>() + 1e-6)
        .collect();
    let total: f64 = flat.iter().sum();
    for x in &mut flat {
        *x /= total;
    }
    JointPmf::from_flat(flat, rows, cols).unwrap()
}

/// Random valid cipher: independent random permutations per key.
pub fn random_cipher(rng: &mut ChaCha12Rng, n_messages: usize, n_keys: usize) -> Cipher {
    mcsec::constructions::random_permutation_cipher(n_messages, n_keys, rng.random::<u64>())
        .unwrap()
}

/// Random (cipher, pmf) scenario over at most `max_messages` messages.
pub fn random_scenario(rng: &mut ChaCha12Rng, max_messages: usize) -> MessageDistributionScenario {
    let n_messages = rng.random_range(2..=max_messages);
    let n_keys = rng.random_range(1..=8);
    let cipher = random_cipher(rng, n_messages, n_keys);
    let pmf = if rng.random::<f64>() < 0.5 {
        random_pmf(rng, n_messages)
    } else {
        random_sparse_pmf(rng, n_messages, 0.3)
    };
    MessageDistributionScenario::new(cipher, pmf).unwrap()
}
