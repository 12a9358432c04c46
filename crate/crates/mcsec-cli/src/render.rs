//! Output assembly: 10-significant-digit numbers, aligned key-value
//! blocks, CSV rows. Everything renders to strings first so the caller
//! decides between stdout and `--out`, and repeated runs stay
//! byte-identical.

use std::fmt::Write as _;
use std::path::Path;

/// Format with 10 significant digits: positional notation for moderate
/// magnitudes, scientific otherwise. Deterministic for a given bit pattern.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0.000000000".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..10).contains(&mag) {
        let decimals = (9 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.9e}")
    }
}

/// Rows of `key  value`, keys padded to the longest.
#[derive(Default)]
pub struct KvBlock {
    rows: Vec<(String, String)>,
}

impl KvBlock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.rows.push((key.to_string(), value.into()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, sig10(value));
    }

    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}

/// Write to stdout, treating a closed pipe as an orderly stop rather than
/// a panic (`mcsec ... | head` must stay quiet).
pub fn write_stdout(payload: &str) -> std::io::Result<()> {
    use std::io::Write;
    match std::io::stdout().write_all(payload.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => other,
    }
}

/// Write `payload` to `out` when given, stdout otherwise.
pub fn emit(out: Option<&Path>, payload: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, payload),
        None => write_stdout(payload),
    }
}

/// Pretty JSON plus the trailing newline every payload carries.
pub fn json_payload(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}
