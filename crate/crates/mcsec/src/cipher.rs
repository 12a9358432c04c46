//! Finite deterministic ciphers and the joint distribution they induce.
//!
//! A cipher is a table E(k, m) -> c with every per-key row injective, so a
//! held key always decrypts. Two storage forms exist: a dense table, and a
//! keystream form for XOR ciphers (c = m XOR word[k]) which both compresses
//! the common construction and marks the cipher as eligible for the Walsh
//! spectral route. Under a message distribution and an independent uniform
//! key, the induced plaintext/ciphertext joint pmf is
//! p(m, c) = p(m) * |{k : E(k,m) = c}| / |K|.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pmf::{JointPmf, Pmf, MAX_ALPHABET};
use crate::{Error, Result};

/// Cap on n_keys * n_messages, dense or virtual.
pub const MAX_TABLE_ENTRIES: usize = 1 << 26;

/// Cipher file format version this crate reads and writes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
enum Table {
    /// Row-major n_keys x n_messages ciphertext indices.
    Dense(Vec<u32>),
    /// XOR keystream words; E(k, m) = m XOR words[k].
    Keystream(Vec<u64>),
}

/// A validated cipher table.
#[derive(Debug, Clone, PartialEq)]
pub struct Cipher {
    label: String,
    n_messages: usize,
    n_keys: usize,
    n_ciphertexts: usize,
    table: Table,
}

fn check_sizes(label: &str, n_messages: usize, n_keys: usize, n_ciphertexts: usize) -> Result<()> {
    if n_messages == 0 || n_keys == 0 || n_ciphertexts == 0 {
        return Err(Error::InvalidCipher(format!(
            "{label:?}: empty alphabet (|M|={n_messages}, |K|={n_keys}, |C|={n_ciphertexts})"
        )));
    }
    if n_ciphertexts < n_messages {
        return Err(Error::InvalidCipher(format!(
            "{label:?}: n_ciphertexts {n_ciphertexts} < n_messages {n_messages}, no key can be injective"
        )));
    }
    if n_messages > MAX_ALPHABET || n_ciphertexts > MAX_ALPHABET || n_keys > MAX_ALPHABET {
        return Err(Error::TooLarge(format!(
            "{label:?}: alphabet sizes {n_messages}/{n_keys}/{n_ciphertexts} exceed {MAX_ALPHABET}"
        )));
    }
    if n_keys
        .checked_mul(n_messages)
        .is_none_or(|t| t > MAX_TABLE_ENTRIES)
    {
        return Err(Error::TooLarge(format!(
            "{label:?}: table of {n_keys} x {n_messages} entries exceeds {MAX_TABLE_ENTRIES}"
        )));
    }
    Ok(())
}

impl Cipher {
    /// Build from per-key rows of ciphertext indices.
    pub fn from_rows(
        label: impl Into<String>,
        n_messages: usize,
        n_ciphertexts: usize,
        rows: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let label = label.into();
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n_messages {
                return Err(Error::InvalidCipher(format!(
                    "{label:?}: key {k} row has {} entries, expected {n_messages}",
                    row.len()
                )));
            }
        }
        let n_keys = rows.len();
        let flat: Vec<u32> = rows.into_iter().flatten().collect();
        Self::from_flat_table(label, n_messages, n_keys, n_ciphertexts, flat)
    }

    pub(crate) fn from_flat_table(
        label: impl Into<String>,
        n_messages: usize,
        n_keys: usize,
        n_ciphertexts: usize,
        table: Vec<u32>,
    ) -> Result<Self> {
        let label = label.into();
        check_sizes(&label, n_messages, n_keys, n_ciphertexts)?;
        if table.len() != n_keys * n_messages {
            return Err(Error::InvalidCipher(format!(
                "{label:?}: table has {} entries, expected {}",
                table.len(),
                n_keys * n_messages
            )));
        }
        // Injectivity per key; remembers which message first hit a ciphertext.
        let mut seen_key = vec![u32::MAX; n_ciphertexts];
        let mut seen_msg = vec![0u32; n_ciphertexts];
        for k in 0..n_keys {
            for m in 0..n_messages {
                let c = table[k * n_messages + m] as usize;
                if c >= n_ciphertexts {
                    return Err(Error::InvalidCipher(format!(
                        "{label:?}: E({k}, {m}) = {c} out of range (n_ciphertexts = {n_ciphertexts})"
                    )));
                }
                if seen_key[c] == k as u32 {
                    return Err(Error::KeyCollision {
                        label,
                        key: k,
                        m1: seen_msg[c] as usize,
                        m2: m,
                        c,
                    });
                }
                seen_key[c] = k as u32;
                seen_msg[c] = m as u32;
            }
        }
        Ok(Self {
            label,
            n_messages,
            n_keys,
            n_ciphertexts,
            table: Table::Dense(table),
        })
    }

    /// Build an XOR cipher on n-bit words from its keystream. Injectivity is
    /// automatic; words must fit in n bits.
    pub fn from_keystream(label: impl Into<String>, n_bits: u32, words: Vec<u64>) -> Result<Self> {
        let label = label.into();
        if n_bits == 0 || n_bits > 16 {
            return Err(Error::InvalidCipher(format!(
                "{label:?}: keystream cipher needs 1 <= n <= 16 (got {n_bits})"
            )));
        }
        if words.is_empty() {
            return Err(Error::InvalidCipher(format!(
                "{label:?}: no keystream words"
            )));
        }
        let size = 1usize << n_bits;
        check_sizes(&label, size, words.len(), size)?;
        for (k, &w) in words.iter().enumerate() {
            if w >= size as u64 {
                return Err(Error::InvalidCipher(format!(
                    "{label:?}: keystream word {k} = {w:#x} does not fit in {n_bits} bits"
                )));
            }
        }
        Ok(Self {
            label,
            n_messages: size,
            n_keys: words.len(),
            n_ciphertexts: size,
            table: Table::Keystream(words),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_messages(&self) -> usize {
        self.n_messages
    }

    pub fn n_keys(&self) -> usize {
        self.n_keys
    }

    pub fn n_ciphertexts(&self) -> usize {
        self.n_ciphertexts
    }

    /// Message length in bits; not necessarily an integer.
    pub fn n_bits(&self) -> f64 {
        (self.n_messages as f64).log2()
    }

    /// Key length in bits; not necessarily an integer.
    pub fn s_bits(&self) -> f64 {
        (self.n_keys as f64).log2()
    }

    pub fn encrypt(&self, key: usize, msg: usize) -> usize {
        match &self.table {
            Table::Dense(t) => t[key * self.n_messages + msg] as usize,
            Table::Keystream(words) => msg ^ words[key] as usize,
        }
    }

    /// The keystream words when this cipher is stored in XOR form.
    pub fn keystream(&self) -> Option<&[u64]> {
        match &self.table {
            Table::Keystream(words) => Some(words),
            Table::Dense(_) => None,
        }
    }

    /// Joint pmf of (plaintext, ciphertext) under `message_pmf` and an
    /// independent uniform key.
    pub fn induced_joint(&self, message_pmf: &Pmf) -> Result<JointPmf> {
        if message_pmf.len() != self.n_messages {
            return Err(Error::LengthMismatch {
                left: message_pmf.len(),
                right: self.n_messages,
            });
        }
        let cells = self
            .n_messages
            .checked_mul(self.n_ciphertexts)
            .filter(|&t| t <= MAX_TABLE_ENTRIES);
        let Some(cells) = cells else {
            return Err(Error::TooLarge(format!(
                "joint of {} x {} cells exceeds {MAX_TABLE_ENTRIES}",
                self.n_messages, self.n_ciphertexts
            )));
        };
        let mut counts = vec![0u32; cells];
        for k in 0..self.n_keys {
            for m in 0..self.n_messages {
                counts[m * self.n_ciphertexts + self.encrypt(k, m)] += 1;
            }
        }
        let mut flat = vec![0.0f64; cells];
        for m in 0..self.n_messages {
            let scale = message_pmf.get(m) / self.n_keys as f64;
            for c in 0..self.n_ciphertexts {
                let cnt = counts[m * self.n_ciphertexts + c];
                if cnt != 0 {
                    flat[m * self.n_ciphertexts + c] = cnt as f64 * scale;
                }
            }
        }
        JointPmf::from_flat_with_row_marginal(
            flat,
            self.n_messages,
            self.n_ciphertexts,
            message_pmf.clone(),
        )
    }

    pub fn to_json_string(&self) -> String {
        let file = match &self.table {
            Table::Dense(t) => CipherFile {
                format_version: FORMAT_VERSION,
                label: self.label.clone(),
                n_messages: self.n_messages,
                n_keys: self.n_keys,
                n_ciphertexts: self.n_ciphertexts,
                table: Some(
                    (0..self.n_keys)
                        .map(|k| t[k * self.n_messages..(k + 1) * self.n_messages].to_vec())
                        .collect(),
                ),
                keystream: None,
            },
            Table::Keystream(words) => {
                let n_bits = self.n_messages.trailing_zeros();
                let width = n_bits.div_ceil(4) as usize;
                CipherFile {
                    format_version: FORMAT_VERSION,
                    label: self.label.clone(),
                    n_messages: self.n_messages,
                    n_keys: self.n_keys,
                    n_ciphertexts: self.n_ciphertexts,
                    table: None,
                    keystream: Some(words.iter().map(|w| format!("{w:0width$x}")).collect()),
                }
            }
        };
        let mut s = serde_json::to_string_pretty(&file).expect("cipher file serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: CipherFile = serde_json::from_str(text).map_err(|e| {
            Error::BadCipherFile(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::BadCipherFile(format!(
                "unsupported format_version {} (this build reads {FORMAT_VERSION})",
                file.format_version
            )));
        }
        match (file.table, file.keystream) {
            (Some(rows), None) => {
                if rows.len() != file.n_keys {
                    return Err(Error::BadCipherFile(format!(
                        "table has {} rows but n_keys = {}",
                        rows.len(),
                        file.n_keys
                    )));
                }
                Cipher::from_rows(file.label, file.n_messages, file.n_ciphertexts, rows)
            }
            (None, Some(words)) => {
                if file.n_ciphertexts != file.n_messages {
                    return Err(Error::BadCipherFile(format!(
                        "keystream cipher needs n_ciphertexts = n_messages (got {} vs {})",
                        file.n_ciphertexts, file.n_messages
                    )));
                }
                if !file.n_messages.is_power_of_two() {
                    return Err(Error::BadCipherFile(format!(
                        "keystream cipher needs a power-of-two alphabet (got {})",
                        file.n_messages
                    )));
                }
                if words.len() != file.n_keys {
                    return Err(Error::BadCipherFile(format!(
                        "keystream has {} words but n_keys = {}",
                        words.len(),
                        file.n_keys
                    )));
                }
                let n_bits = file.n_messages.trailing_zeros();
                let width = n_bits.div_ceil(4) as usize;
                let mut parsed = Vec::with_capacity(words.len());
                for (k, w) in words.iter().enumerate() {
                    if w.len() != width {
                        return Err(Error::BadCipherFile(format!(
                            "keystream word {k} ({w:?}) must be exactly {width} hex digits"
                        )));
                    }
                    let value = u64::from_str_radix(w, 16).map_err(|_| {
                        Error::BadCipherFile(format!("keystream word {k} ({w:?}) is not hex"))
                    })?;
                    parsed.push(value);
                }
                Cipher::from_keystream(file.label, n_bits, parsed)
            }
            (Some(_), Some(_)) => Err(Error::BadCipherFile(
                "both table and keystream present; exactly one is required".into(),
            )),
            (None, None) => Err(Error::BadCipherFile(
                "neither table nor keystream present".into(),
            )),
        }
    }

    pub fn write_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn read_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CipherFile {
    format_version: u32,
    label: String,
    n_messages: usize,
    n_keys: usize,
    n_ciphertexts: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    table: Option<Vec<Vec<u32>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    keystream: Option<Vec<String>>,
}

/// A cipher together with the message distribution it is used under.
#[derive(Debug, Clone)]
pub struct MessageDistributionScenario {
    pub cipher: Cipher,
    pub message_pmf: Pmf,
}

impl MessageDistributionScenario {
    pub fn new(cipher: Cipher, message_pmf: Pmf) -> Result<Self> {
        if message_pmf.len() != cipher.n_messages() {
            return Err(Error::LengthMismatch {
                left: message_pmf.len(),
                right: cipher.n_messages(),
            });
        }
        Ok(Self {
            cipher,
            message_pmf,
        })
    }

    pub fn uniform(cipher: Cipher) -> Self {
        let message_pmf = Pmf::uniform(cipher.n_messages());
        Self {
            cipher,
            message_pmf,
        }
    }

    pub fn induced_joint(&self) -> Result<JointPmf> {
        self.cipher.induced_joint(&self.message_pmf)
    }
}
