//! Cipher constructions whose maximal correlation has a closed spectral
//! form, plus cascading and the small reference ciphers used throughout the
//! test batteries.
//!
//! Two families are built here. XOR stream ciphers draw 2^s keystream words
//! on n bits; the singular values of their correlation matrix are exactly
//! the absolute Walsh biases of the keystream multiset over nonzero
//! frequencies v,
//!
//! ```text
//! bias(v) = (1/|K|) * sum_k (-1)^(v . G(k)),
//! ```
//!
//! so `walsh_rho` computes the maximal correlation with one Hadamard
//! transform instead of an SVD, reaching n = 28 where no dense matrix
//! fits. Permutation-family ciphers apply one of d random permutations or
//! their inverses (2d keys total); their correlation is the second
//! adjacency eigenvalue of the regular multigraph the family draws,
//! |lambda_2| / deg, so good ciphers of this family are exactly expander
//! graphs. The two routes overlap with the SVD route on small instances and
//! must agree with it to 1e-9; keeping them independent is the point.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::cipher::{Cipher, MAX_TABLE_ENTRIES};
use crate::spectral::symmetric_spectral_norm;
use crate::{Error, Result};

/// Largest n accepted by `walsh_rho`; the transform needs a 2^n accumulator.
pub const MAX_WALSH_BITS: u32 = 28;

/// Largest n for which a cipher table (dense or XOR-virtual) may be built.
pub const MAX_CIPHER_BITS: u32 = 16;

/// An XOR stream cipher before table form: 2^s keystream words on n bits.
#[derive(Debug, Clone, PartialEq)]
pub struct KeystreamSpec {
    n: u32,
    s: u32,
    streams: Vec<u64>,
    seed: Option<u64>,
}

impl KeystreamSpec {
    pub fn new(n: u32, s: u32, streams: Vec<u64>, seed: Option<u64>) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::InvalidCipher(format!(
                "keystream spec needs 1 <= n <= 63 (got {n})"
            )));
        }
        if s >= 32 || streams.len() != 1usize << s {
            return Err(Error::InvalidCipher(format!(
                "keystream spec with s = {s} needs exactly 2^s words (got {})",
                streams.len()
            )));
        }
        let mask = u64::MAX >> (64 - n);
        if let Some((k, &w)) = streams.iter().enumerate().find(|(_, &w)| w > mask) {
            return Err(Error::InvalidCipher(format!(
                "keystream word {k} = {w:#x} does not fit in {n} bits"
            )));
        }
        Ok(Self {
            n,
            s,
            streams,
            seed,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn streams(&self) -> &[u64] {
        &self.streams
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Draw 2^s keystream words uniformly from n-bit strings.
pub fn random_stream_cipher(n: u32, s: u32, seed: u64) -> Result<KeystreamSpec> {
    if n == 0 || n > MAX_WALSH_BITS {
        return Err(Error::InvalidCipher(format!(
            "random stream cipher needs 1 <= n <= {MAX_WALSH_BITS} (got {n})"
        )));
    }
    if s > 20 {
        return Err(Error::TooLarge(format!(
            "random stream cipher with s = {s} would draw 2^{s} words"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mask = u64::MAX >> (64 - n);
    let streams = (0..1usize << s).map(|_| rng.next_u64() & mask).collect();
    KeystreamSpec::new(n, s, streams, Some(seed))
}

/// Materialize the spec as a cipher in XOR keystream form.
pub fn build_stream_cipher(spec: &KeystreamSpec) -> Result<Cipher> {
    if spec.n > MAX_CIPHER_BITS {
        return Err(Error::TooLarge(format!(
            "stream cipher table needs n <= {MAX_CIPHER_BITS} (got {})",
            spec.n
        )));
    }
    let label = match spec.seed {
        Some(seed) => format!("stream(n={},s={},seed={seed})", spec.n, spec.s),
        None => format!("stream(n={},s={})", spec.n, spec.s),
    };
    Cipher::from_keystream(label, spec.n, spec.streams.clone())
}

/// In-place fast Walsh-Hadamard transform; after the call
/// `data[v] = sum_w (-1)^(v.w) before[w]`.
pub fn fwht(data: &mut [f64]) {
    debug_assert!(data.len().is_power_of_two());
    let mut h = 1;
    while h < data.len() {
        for block in (0..data.len()).step_by(h * 2) {
            for i in block..block + h {
                let (x, y) = (data[i], data[i + h]);
                data[i] = x + y;
                data[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// Maximal correlation of the stream cipher under a uniform message: the
/// largest absolute Walsh bias of the keystream multiset over v != 0.
pub fn walsh_rho(spec: &KeystreamSpec) -> Result<f64> {
    if spec.n > MAX_WALSH_BITS {
        return Err(Error::TooLarge(format!(
            "walsh transform needs n <= {MAX_WALSH_BITS} (got {})",
            spec.n
        )));
    }
    Ok(walsh_biases(spec)
        .into_iter()
        .skip(1)
        .fold(0.0f64, |acc, b| acc.max(b.abs()))
        .min(1.0))
}

/// All 2^n signed biases, indexed by frequency v; bias(0) = 1.
pub(crate) fn walsh_biases(spec: &KeystreamSpec) -> Vec<f64> {
    let size = 1usize << spec.n;
    let mut counts = vec![0.0f64; size];
    let weight = 1.0 / spec.streams.len() as f64;
    for &w in &spec.streams {
        counts[w as usize] += weight;
    }
    fwht(&mut counts);
    counts
}

/// A family of d permutations of [0, 2^n); the cipher applies permutation k
/// for keys k < d and the inverse of permutation k - d for keys d <= k < 2d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpanderSpec {
    n: u32,
    d: usize,
    permutations: Vec<Vec<u32>>,
    seed: Option<u64>,
}

impl ExpanderSpec {
    pub fn new(n: u32, d: usize, permutations: Vec<Vec<u32>>, seed: Option<u64>) -> Result<Self> {
        if n == 0 || n > MAX_CIPHER_BITS {
            return Err(Error::InvalidCipher(format!(
                "permutation family needs 1 <= n <= {MAX_CIPHER_BITS} (got {n})"
            )));
        }
        if d == 0 || permutations.len() != d {
            return Err(Error::InvalidCipher(format!(
                "permutation family with d = {d} has {} permutations",
                permutations.len()
            )));
        }
        let size = 1usize << n;
        if (2 * d)
            .checked_mul(size)
            .is_none_or(|t| t > MAX_TABLE_ENTRIES)
        {
            return Err(Error::TooLarge(format!(
                "permutation family table of {} x {size} entries exceeds {MAX_TABLE_ENTRIES}",
                2 * d
            )));
        }
        let mut seen = vec![false; size];
        for (idx, perm) in permutations.iter().enumerate() {
            if perm.len() != size {
                return Err(Error::InvalidCipher(format!(
                    "permutation {idx} has {} entries, expected {size}",
                    perm.len()
                )));
            }
            seen.fill(false);
            for &image in perm {
                if image as usize >= size || seen[image as usize] {
                    return Err(Error::InvalidCipher(format!(
                        "permutation {idx} is not a bijection on [0, {size})"
                    )));
                }
                seen[image as usize] = true;
            }
        }
        Ok(Self {
            n,
            d,
            permutations,
            seed,
        })
    }

    /// Draw d independent uniform permutations (Fisher-Yates).
    pub fn random(n: u32, d: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_CIPHER_BITS {
            return Err(Error::InvalidCipher(format!(
                "permutation family needs 1 <= n <= {MAX_CIPHER_BITS} (got {n})"
            )));
        }
        let size = 1usize << n;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let permutations = (0..d)
            .map(|_| {
                let mut perm: Vec<u32> = (0..size as u32).collect();
                perm.shuffle(&mut rng);
                perm
            })
            .collect();
        Self::new(n, d, permutations, Some(seed))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_keys(&self) -> usize {
        2 * self.d
    }

    pub fn permutations(&self) -> &[Vec<u32>] {
        &self.permutations
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("expander spec serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: ExpanderSpec = serde_json::from_str(text).map_err(|e| {
            Error::BadCipherFile(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        // Re-validate: serde fills fields without checking bijectivity.
        Self::new(raw.n, raw.d, raw.permutations, raw.seed)
    }
}

/// Build the 2d-key cipher: keys [0, d) apply the permutations, keys
/// [d, 2d) their inverses, so decryption uses the same family.
pub fn build_expander_cipher(spec: &ExpanderSpec) -> Result<Cipher> {
    let size = 1usize << spec.n;
    let mut table = vec![0u32; 2 * spec.d * size];
    for (idx, perm) in spec.permutations.iter().enumerate() {
        table[idx * size..(idx + 1) * size].copy_from_slice(perm);
        let inverse_row = &mut table[(spec.d + idx) * size..(spec.d + idx + 1) * size];
        for (m, &image) in perm.iter().enumerate() {
            inverse_row[image as usize] = m as u32;
        }
    }
    let label = match spec.seed {
        Some(seed) => format!("expander(n={},d={},seed={seed})", spec.n, spec.d),
        None => format!("expander(n={},d={})", spec.n, spec.d),
    };
    Cipher::from_flat_table(label, size, 2 * spec.d, size, table)
}

/// Maximal correlation of the permutation-family cipher under a uniform
/// message, via the adjacency spectrum: ||A/deg - J/2^n|| where A counts
/// keys with E(k, m) = c and deg = 2d.
///
/// Pairing each permutation with its inverse makes A symmetric, so the norm
/// is the largest absolute eigenvalue on the complement of the all-ones
/// direction: |lambda_2| / deg.
pub fn expander_lambda2_rho(spec: &ExpanderSpec) -> Result<f64> {
    let size = 1usize << spec.n;
    if size > (1 << 13) {
        return Err(Error::TooLarge(format!(
            "adjacency spectrum for 2^{} nodes not supported",
            spec.n
        )));
    }
    let deg = 2.0 * spec.d as f64;
    let uniform = 1.0 / size as f64;
    let mut shifted = DMatrix::from_element(size, size, -uniform);
    let per_key = 1.0 / deg;
    for perm in &spec.permutations {
        for (m, &image) in perm.iter().enumerate() {
            shifted[(m, image as usize)] += per_key;
            shifted[(image as usize, m)] += per_key;
        }
    }
    Ok(symmetric_spectral_norm(&shifted).min(1.0))
}

/// Compose two ciphers: encrypt with `first`, then encrypt the result with
/// `second`. Keys are pairs, laid out as k1 * |K2| + k2.
pub fn cascade(first: &Cipher, second: &Cipher) -> Result<Cipher> {
    if first.n_ciphertexts() != second.n_messages() {
        return Err(Error::CascadeMismatch {
            first_out: first.n_ciphertexts(),
            second_in: second.n_messages(),
        });
    }
    let n_keys = first.n_keys().checked_mul(second.n_keys()).filter(|total| {
        total
            .checked_mul(first.n_messages())
            .is_some_and(|t| t <= MAX_TABLE_ENTRIES)
    });
    let Some(n_keys) = n_keys else {
        return Err(Error::TooLarge(format!(
            "cascade table of {} x {} keys exceeds {MAX_TABLE_ENTRIES} entries",
            first.n_keys(),
            second.n_keys()
        )));
    };
    let n_messages = first.n_messages();
    let mut table = vec![0u32; n_keys * n_messages];
    for k1 in 0..first.n_keys() {
        for k2 in 0..second.n_keys() {
            let row = (k1 * second.n_keys() + k2) * n_messages;
            for m in 0..n_messages {
                table[row + m] = second.encrypt(k2, first.encrypt(k1, m)) as u32;
            }
        }
    }
    Cipher::from_flat_table(
        format!("cascade({}, {})", first.label(), second.label()),
        n_messages,
        n_keys,
        second.n_ciphertexts(),
        table,
    )
}

/// The named ciphers every battery and example leans on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceCipher {
    /// m + 2k mod 4 with k in {0, 1}: masks only the high bit.
    C1,
    /// m + k mod 4 with k in {0, 1}.
    C2,
    /// One-time pad on the top s bits of n; the rest go through in clear.
    Msb { n: u32, s: u32 },
    /// m + k mod (2^n - 1) with 2^n keys and the fixed point 2^n - 1:
    /// vanishing mutual information but maximal correlation 1.
    Counterexample { n: u32 },
    /// One-time pad on n bits.
    Otp { n: u32 },
}

impl ReferenceCipher {
    /// Parse names of the form `c1`, `c2`, `msb(n,s)`, `counterexample(n)`,
    /// `otp(n)`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        let unknown = || Error::UnknownReference(name.to_string());
        match name {
            "c1" => return Ok(Self::C1),
            "c2" => return Ok(Self::C2),
            _ => {}
        }
        let (head, rest) = name.split_once('(').ok_or_else(unknown)?;
        let args = rest.strip_suffix(')').ok_or_else(unknown)?;
        let parts: Vec<u32> = args
            .split(',')
            .map(|a| a.trim().parse::<u32>().map_err(|_| unknown()))
            .collect::<Result<_>>()?;
        match (head, parts.as_slice()) {
            ("msb", [n, s]) => Ok(Self::Msb { n: *n, s: *s }),
            ("counterexample", [n]) => Ok(Self::Counterexample { n: *n }),
            ("otp", [n]) => Ok(Self::Otp { n: *n }),
            _ => Err(unknown()),
        }
    }

    pub fn build(self) -> Result<Cipher> {
        match self {
            Self::C1 => {
                // Adding 2 mod 4 flips the high bit, so C1 is the XOR cipher
                // with keystream {0, 2}.
                Cipher::from_keystream("c1", 2, vec![0b00, 0b10])
            }
            Self::C2 => Cipher::from_rows(
                "c2",
                4,
                4,
                (0..2u32)
                    .map(|k| (0..4u32).map(|m| (m + k) % 4).collect())
                    .collect(),
            ),
            Self::Msb { n, s } => {
                if n == 0 || n > MAX_CIPHER_BITS || s > n {
                    return Err(Error::InvalidCipher(format!(
                        "msb(n={n},s={s}) needs 1 <= n <= {MAX_CIPHER_BITS} and s <= n"
                    )));
                }
                let words = (0..1u64 << s).map(|k| k << (n - s)).collect();
                Cipher::from_keystream(format!("msb({n},{s})"), n, words)
            }
            Self::Counterexample { n } => {
                if n == 0 || n > 13 {
                    return Err(Error::InvalidCipher(format!(
                        "counterexample(n={n}) needs 1 <= n <= 13"
                    )));
                }
                let size = 1u32 << n;
                let fixed = size - 1;
                let rows = (0..size)
                    .map(|k| {
                        (0..size)
                            .map(|m| if m == fixed { fixed } else { (m + k) % fixed })
                            .collect()
                    })
                    .collect();
                Cipher::from_rows(
                    format!("counterexample({n})"),
                    size as usize,
                    size as usize,
                    rows,
                )
            }
            Self::Otp { n } => {
                if n == 0 || n > 13 {
                    return Err(Error::InvalidCipher(format!(
                        "otp(n={n}) needs 1 <= n <= 13"
                    )));
                }
                Cipher::from_keystream(format!("otp({n})"), n, (0..1u64 << n).collect())
            }
        }
    }
}

/// Deterministic per-trial seed for parameter sweeps.
pub fn trial_seed(seed: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ trial_index)
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A cipher drawing each key's row as an independent uniform permutation.
/// This is the generic small test instance; it has no special structure.
pub fn random_permutation_cipher(n_messages: usize, n_keys: usize, seed: u64) -> Result<Cipher> {
    if n_messages == 0 || n_keys == 0 {
        return Err(Error::InvalidCipher("empty alphabet".into()));
    }
    if n_messages > 1 << MAX_CIPHER_BITS
        || n_keys
            .checked_mul(n_messages)
            .is_none_or(|t| t > MAX_TABLE_ENTRIES)
    {
        return Err(Error::TooLarge(format!(
            "random cipher of {n_keys} x {n_messages} entries"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let rows = (0..n_keys)
        .map(|_| {
            let mut perm: Vec<u32> = (0..n_messages as u32).collect();
            perm.shuffle(&mut rng);
            perm
        })
        .collect();
    Cipher::from_rows(
        format!("random(|M|={n_messages},|K|={n_keys},seed={seed})"),
        n_messages,
        n_messages,
        rows,
    )
}

/// One trial row of a Monte Carlo stream-cipher sweep.
#[derive(Debug, Clone, Serialize)]
pub struct StreamTrial {
    pub trial: u64,
    pub seed: u64,
    pub rho: f64,
    pub pass: bool,
}

/// Summary of a sweep: how often a fresh random keystream meets the target
/// correlation, next to the failure probability the key-length formula
/// guarantees for these parameters.
#[derive(Debug, Clone, Serialize)]
pub struct StreamSweepSummary {
    pub n: u32,
    pub s: u32,
    pub rho_target: f64,
    pub trials: u64,
    pub passes: u64,
    pub pass_fraction: Option<f64>,
    pub epsilon_implied_log2: Option<f64>,
}

/// Run `trials` independent random stream ciphers and test each against the
/// target correlation. Trial t uses `trial_seed(seed, t)`.
pub fn montecarlo_stream(
    n: u32,
    s: u32,
    rho_target: f64,
    trials: u64,
    seed: u64,
) -> Result<(Vec<StreamTrial>, StreamSweepSummary)> {
    if !(0.0..=1.0).contains(&rho_target) {
        return Err(Error::InvalidQuery(format!(
            "target rho must lie in [0, 1] (got {rho_target})"
        )));
    }
    let mut rows = Vec::with_capacity(trials.min(1 << 20) as usize);
    let mut passes = 0u64;
    for trial in 0..trials {
        let trial_seed = trial_seed(seed, trial);
        let spec = random_stream_cipher(n, s, trial_seed)?;
        let rho = walsh_rho(&spec)?;
        let pass = rho <= rho_target;
        passes += u64::from(pass);
        rows.push(StreamTrial {
            trial,
            seed: trial_seed,
            rho,
            pass,
        });
    }
    // Invert the key-length formula: with 2^(s-2) rho^2 - n =: b positive,
    // a random keystream misses the target with probability at most 2^-b.
    let exponent = s as f64 - 2.0 + 2.0 * rho_target.log2();
    let implied = if exponent.exp2().is_finite() {
        -(exponent.exp2() - n as f64).max(0.0)
    } else {
        f64::NEG_INFINITY
    };
    let summary = StreamSweepSummary {
        n,
        s,
        rho_target,
        trials,
        passes,
        pass_fraction: (trials > 0).then(|| passes as f64 / trials as f64),
        epsilon_implied_log2: (trials > 0).then_some(implied),
    };
    Ok((rows, summary))
}
