//! Key-length and advantage formulas, evaluated in the log2 domain.
//!
//! Quantities like "the advantage of the best eavesdropper against a 1 GB
//! message with a 512-bit key" live around 10^-72, far below what linear
//! f64 arithmetic can carry through intermediate steps. Every evaluator
//! here therefore takes and returns log2-scale values; the decimal strings
//! are rendered at the end by splitting the exponent (see
//! [`render_decimal`]). All results stay finite for message lengths up to
//! 10^12 bits and log2(rho) down to -10^6.

use crate::{Error, Result};

/// Slack for `satisfied` comparisons against a supplied key length.
const KEY_TOL: f64 = 1e-6;

/// log2(2^a + 2^b), exact at the extremes: never below max(a, b), never
/// above max(a, b) + 1.
pub fn log2_sum_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

/// One evaluated formula. `value_log2` is the log2-domain value; for key
/// lengths that is the bit count itself, for probability-scale quantities
/// it is log2 of the probability. `value_decimal` renders the linear
/// quantity 2^value_log2 in scientific notation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundResult {
    pub name: String,
    pub value_log2: f64,
    pub value_decimal: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfied: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundResult {
    pub fn new(name: impl Into<String>, value_log2: f64) -> Self {
        Self {
            name: name.into(),
            value_log2,
            value_decimal: render_decimal(value_log2),
            satisfied: None,
            note: None,
        }
    }

    fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Mark whether a supplied key length meets this threshold.
    fn checked_against_key(mut self, s_bits: f64) -> Self {
        self.satisfied = Some(s_bits + KEY_TOL >= self.value_log2);
        self
    }
}

/// Scientific-notation rendering of 2^value_log2, 10 significant digits,
/// without ever materializing the linear value (whose decimal exponent may
/// exceed the f64 range).
pub fn render_decimal(value_log2: f64) -> String {
    if value_log2 == f64::NEG_INFINITY {
        return "0".to_string();
    }
    let e10 = value_log2 * std::f64::consts::LOG10_2;
    let mut exp = e10.floor() as i64;
    let mut mant = 10f64.powf(e10 - e10.floor());
    // Keep the mantissa in [1, 10) after rounding to 9 fraction digits.
    if mant >= 10.0 - 5e-10 {
        mant = 1.0;
        exp += 1;
    }
    format!("{mant:.9}e{exp}")
}

/// Minimum key length of any cipher whose maximal correlation is at most
/// rho on n-bit messages: log2(1 / (rho^2 + 2^-n)). Tends to 2 log2(1/rho)
/// as n grows.
pub fn converse_min_key(n_bits: f64, rho_log2: f64) -> BoundResult {
    let value = -log2_sum_exp(2.0 * rho_log2, -n_bits);
    BoundResult::new("converse_min_key_bits", value)
}

/// Key length at which a Ramanujan-graph cipher reaches correlation rho:
/// log2(d) >= 2 log2(1/rho) + 2.
pub fn expander_key_for_rho(rho_log2: f64) -> BoundResult {
    BoundResult::new("expander_key_bits", -2.0 * rho_log2 + 2.0)
}

/// Key length at which a random binary additive stream cipher has
/// correlation at most rho except with probability epsilon:
/// 2 log2(1/rho) + log2(n) + log2(1 + (1/n) log2(1/epsilon)) + 2.
pub fn stream_key_for_rho(n_bits: f64, rho_log2: f64, epsilon_log2: f64) -> BoundResult {
    let value = -2.0 * rho_log2 + n_bits.log2() + (1.0 + (-epsilon_log2) / n_bits).log2() + 2.0;
    BoundResult::new("stream_key_bits", value)
}

/// The correlation guaranteed (at epsilon = 1, i.e. for some keystream) by
/// an s-bit stream-cipher key on n-bit messages; the inversion of
/// [`stream_key_for_rho`]. Clamped at rho = 1 when the key is too short to
/// promise anything.
pub fn stream_rho_for_key(n_bits: f64, s_bits: f64) -> BoundResult {
    let raw = -(s_bits - n_bits.log2() - 2.0) / 2.0;
    let mut r = BoundResult::new("stream_rho", raw.min(0.0));
    if raw > 0.0 {
        r = r.noted("key shorter than log2(n) + 2: no nontrivial correlation guarantee");
    }
    r
}

/// The epsilon for which the stream-cipher key formula is tight at
/// (n, s, rho): log2(epsilon) = -max(0, 2^(s - 2 + 2 log2(rho)) - n).
/// NEG_INFINITY means the guarantee holds for every keystream draw.
pub fn stream_epsilon_for_key(n_bits: f64, s_bits: f64, rho_log2: f64) -> BoundResult {
    let exponent = s_bits - 2.0 + 2.0 * rho_log2;
    let value = if exponent >= f64::MAX.log2() {
        f64::NEG_INFINITY
    } else {
        -(exponent.exp2() - n_bits).max(0.0)
    };
    BoundResult::new("stream_epsilon", value)
}

const EXISTENCE_NOTE: &str =
    "existence-only: alpha is an unspecified positive constant, supplied by the caller";

/// Key length at which random d-regular graphs yield a rho-secure cipher:
/// (2 log2(1/rho)) (1 + alpha / log2(n)) + alpha, for n >= 2 bits.
pub fn rand_achieve_key(n_bits: f64, rho_log2: f64, alpha: f64) -> Result<BoundResult> {
    if n_bits < 2.0 {
        return Err(Error::InvalidQuery(
            "random-graph key formula needs a message length of at least 2 bits".into(),
        ));
    }
    let value = (-2.0 * rho_log2) * (1.0 + alpha / n_bits.log2()) + alpha;
    Ok(BoundResult::new("rand_graph_key_bits", value).noted(EXISTENCE_NOTE))
}

/// Message-length-free variant:
/// (2 log2(1/rho)) (1 + (3 alpha / 2) / log2(log2(1/rho) + 1)), rho < 1.
pub fn rand_achieve_key_n_free(rho_log2: f64, alpha: f64) -> Result<BoundResult> {
    if rho_log2 >= 0.0 {
        return Err(Error::InvalidQuery(
            "message-length-free key formula needs rho < 1".into(),
        ));
    }
    let denom = (-rho_log2 + 1.0).log2();
    let value = (-2.0 * rho_log2) * (1.0 + 1.5 * alpha / denom);
    Ok(BoundResult::new("rand_graph_key_bits_n_free", value).noted(EXISTENCE_NOTE))
}

/// Advantage cap 2^((n - t) / 2) rho for any guessed function, halved for
/// one-bit functions. Log domain: (n - t) / 2 + log2(rho) [- 1].
pub fn advantage_bound(n_bits: f64, t_bits: f64, rho_log2: f64, one_bit: bool) -> BoundResult {
    let value = (n_bits - t_bits) / 2.0 + rho_log2 - if one_bit { 1.0 } else { 0.0 };
    let name = if one_bit {
        "one_bit_advantage_bound"
    } else {
        "advantage_bound"
    };
    BoundResult::new(name, value)
}

/// Guess-probability cap (1 + B) / 2 for one-bit balanced functions, where
/// B is the general advantage bound at (n, t, rho).
pub fn one_bit_guess_cap(n_bits: f64, t_bits: f64, rho_log2: f64) -> BoundResult {
    let b_log2 = (n_bits - t_bits) / 2.0 + rho_log2;
    BoundResult::new("one_bit_guess_cap", log2_sum_exp(-1.0, b_log2 - 1.0))
}

/// Advantage cap 2^(l/2) rho when l message bits are handed to the
/// eavesdropper as side information (uniform message).
pub fn leaked_advantage_bound(leaked_bits: f64, rho_log2: f64) -> BoundResult {
    BoundResult::new("leaked_bits_advantage_bound", leaked_bits / 2.0 + rho_log2)
}

/// Key length achieving collision-entropy-constrained security at (t,
/// epsilon): n - t + 2 log2(1/epsilon) + 2, together with the two known
/// lower bounds it is compared against (n - t for any such cipher, and
/// n - t + log2(1/epsilon) - O(1) for public-coin schemes; the O(1) has no
/// stated value and is rendered as 0).
pub fn entropic_key_remark(n_bits: f64, t_bits: f64, epsilon_log2: f64) -> Vec<BoundResult> {
    let gap = n_bits - t_bits;
    vec![
        BoundResult::new("entropic_key_bits", gap - 2.0 * epsilon_log2 + 2.0),
        BoundResult::new("entropic_lower_bound_bits", gap)
            .noted("lower bound for any entropically secure cipher"),
        BoundResult::new("entropic_public_coin_lower_bits", gap - epsilon_log2).noted(
            "public-coin lower bound n - t + log2(1/epsilon) - O(1), with the O(1) set to 0",
        ),
    ]
}

/// Mutual-information secrecy criteria, as a required scale for rho.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MiCriterion {
    /// I(M;C) -> 0.
    Strong,
    /// I(M;C)/n -> 0.
    Weak,
    /// I(M;C)/n <= R_L.
    Leakage(f64),
}

/// The log2(rho) scale that implies the named mutual-information
/// criterion. These are asymptotic statements; the returned value is the
/// exact leading term and the dropped correction is named in the note.
pub fn mi_secrecy_thresholds(n_bits: f64, criterion: MiCriterion) -> Result<BoundResult> {
    let r = match criterion {
        MiCriterion::Strong => BoundResult::new("strong_secrecy_rho_log2", -n_bits / 2.0)
            .noted("rho = o(2^(-n/2)): any rho of strictly smaller order suffices"),
        MiCriterion::Weak => BoundResult::new("weak_secrecy_rho_log2", -n_bits / 2.0)
            .noted("rho = 2^(-n/2 + o(n)): leading exponent, o(n) correction dropped"),
        MiCriterion::Leakage(rl) => {
            if !(0.0..=1.0).contains(&rl) {
                return Err(Error::InvalidQuery(format!(
                    "leakage rate must lie in [0, 1], got {rl}"
                )));
            }
            BoundResult::new("leakage_rate_rho_log2", -(1.0 - rl) * n_bits / 2.0).noted(
                "rho = 2^(-(1 - R_L) n / 2 + o(n)): leading exponent, o(n) correction dropped",
            )
        }
    };
    Ok(r)
}

/// One grid point of the key-length comparison curves.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Fig2Row {
    pub rho_log2: f64,
    pub converse_bits: f64,
    pub expander_bits: f64,
    pub stream_bits: f64,
}

/// Default log2(rho) grid for the comparison curves: 40 points from -20 to
/// -0.5 in steps of 0.5.
pub const DEFAULT_GRID_LO: f64 = -20.0;
pub const DEFAULT_GRID_HI: f64 = -0.5;
pub const DEFAULT_GRID_STEPS: usize = 40;

pub fn default_grid() -> Vec<f64> {
    linear_grid(DEFAULT_GRID_LO, DEFAULT_GRID_HI, DEFAULT_GRID_STEPS)
}

fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + i as f64 * (hi - lo) / (steps - 1) as f64)
        .collect()
}

/// Parse a `lo:hi:steps` grid specification of log2(rho) values (all <= 0).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(Error::InvalidQuery(format!(
            "grid must be lo:hi:steps, got {spec:?}"
        )));
    };
    let lo: f64 = lo
        .parse()
        .map_err(|_| Error::InvalidQuery(format!("bad grid lower end {lo:?}")))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| Error::InvalidQuery(format!("bad grid upper end {hi:?}")))?;
    let steps: usize = steps
        .parse()
        .map_err(|_| Error::InvalidQuery(format!("bad grid step count {steps:?}")))?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || hi > 0.0 {
        return Err(Error::InvalidQuery(format!(
            "grid needs finite lo <= hi <= 0, got {lo}:{hi}"
        )));
    }
    if steps == 0 || steps > 1_000_000 {
        return Err(Error::InvalidQuery(format!(
            "grid step count must be in [1, 10^6], got {steps}"
        )));
    }
    if steps == 1 && lo != hi {
        return Err(Error::InvalidQuery(
            "a single-point grid needs lo = hi".into(),
        ));
    }
    Ok(linear_grid(lo, hi, steps))
}

/// The three key-length curves (lower bound, Ramanujan expander, random
/// stream cipher at epsilon = 1) over a log2(rho) grid, at message length
/// n_bits. Converse <= expander <= stream pointwise.
pub fn fig2_curves(n_bits: f64, grid: &[f64]) -> Vec<Fig2Row> {
    grid.iter()
        .map(|&rho_log2| Fig2Row {
            rho_log2,
            converse_bits: converse_min_key(n_bits, rho_log2).value_log2,
            expander_bits: expander_key_for_rho(rho_log2).value_log2,
            stream_bits: stream_key_for_rho(n_bits, rho_log2, 0.0).value_log2,
        })
        .collect()
}

/// A bag of optional parameters from which [`BoundQuery::evaluate`] reports
/// every formula it can feed. Unset fields simply skip their formulas;
/// inconsistent values error.
#[derive(Debug, Clone, Default)]
pub struct BoundQuery {
    pub n_bits: Option<f64>,
    pub s_bits: Option<f64>,
    pub rho_log2: Option<f64>,
    pub t_bits: Option<f64>,
    pub tau_bits: Option<f64>,
    pub epsilon_log2: Option<f64>,
    pub leaked_bits: Option<f64>,
    pub alpha: Option<f64>,
    pub criterion: Option<MiCriterion>,
}

impl BoundQuery {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidQuery(msg));
        if let Some(n) = self.n_bits {
            if !(n > 0.0 && n <= 1e12) {
                return bad(format!(
                    "message length must be in (0, 10^12] bits, got {n}"
                ));
            }
        }
        if let Some(s) = self.s_bits {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!(
                    "key length must be a finite nonnegative bit count, got {s}"
                ));
            }
        }
        if let Some(r) = self.rho_log2 {
            if !(-1e6..=0.0).contains(&r) {
                return bad(format!("log2(rho) must be in [-10^6, 0], got {r}"));
            }
        }
        if let Some(e) = self.epsilon_log2 {
            if !(e <= 0.0 && e.is_finite()) {
                return bad(format!("log2(epsilon) must be finite and <= 0, got {e}"));
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("alpha must be a positive constant, got {a}"));
            }
        }
        for (name, v) in [
            ("t", self.t_bits),
            ("tau", self.tau_bits),
            ("leaked bit count", self.leaked_bits),
        ] {
            let (Some(v), Some(n)) = (v, self.n_bits) else {
                if let Some(v) = v {
                    return bad(format!("{name} = {v} needs the message length n"));
                }
                continue;
            };
            if !(v >= 0.0 && v <= n) {
                return bad(format!("{name} must lie in [0, n] = [0, {n}], got {v}"));
            }
        }
        Ok(())
    }

    /// Evaluate every formula the supplied fields can feed, in a fixed
    /// order. Errors if the fields determine nothing.
    pub fn evaluate(&self) -> Result<Vec<BoundResult>> {
        self.validate()?;
        let mut out = Vec::new();
        let with_key = |r: BoundResult| match self.s_bits {
            Some(s) => r.checked_against_key(s),
            None => r,
        };

        // rho can be supplied directly or solved from (n, s) through the
        // stream-cipher guarantee.
        let rho_log2 = match (self.rho_log2, self.n_bits, self.s_bits) {
            (Some(r), _, _) => Some(r),
            (None, Some(n), Some(s)) => {
                let r = stream_rho_for_key(n, s);
                let v = r.value_log2;
                out.push(r);
                Some(v)
            }
            _ => None,
        };

        if let Some(rho) = rho_log2 {
            if let Some(n) = self.n_bits {
                out.push(with_key(converse_min_key(n, rho)));
            }
            out.push(with_key(expander_key_for_rho(rho)));
            if let Some(n) = self.n_bits {
                out.push(with_key(stream_key_for_rho(
                    n,
                    rho,
                    self.epsilon_log2.unwrap_or(0.0),
                )));
                if let (Some(s), Some(_)) = (self.s_bits, self.rho_log2) {
                    out.push(stream_epsilon_for_key(n, s, rho));
                }
            }
            if let Some(alpha) = self.alpha {
                if let Some(n) = self.n_bits {
                    if n >= 2.0 {
                        out.push(rand_achieve_key(n, rho, alpha)?);
                    }
                }
                if rho < 0.0 {
                    out.push(rand_achieve_key_n_free(rho, alpha)?);
                }
            }
            if let Some(n) = self.n_bits {
                let (t, t_note) = match self.t_bits {
                    Some(t) => (t, None),
                    None => (n, Some("tightest message class: uniform (t = n)")),
                };
                let mut general = advantage_bound(n, t, rho, false);
                let mut one_bit = advantage_bound(n, t, rho, true);
                if let Some(note) = t_note {
                    general = general.noted(note);
                    one_bit = one_bit.noted(note);
                }
                out.push(general);
                out.push(one_bit);
                out.push(one_bit_guess_cap(n, t, rho));
                if let Some(tau) = self.tau_bits {
                    out.push(BoundResult::new(
                        "side_info_advantage_bound",
                        (n - tau) / 2.0 + rho,
                    ));
                }
            }
            if let Some(l) = self.leaked_bits {
                out.push(leaked_advantage_bound(l, rho));
            }
        }

        if let (Some(n), Some(t)) = (self.n_bits, self.t_bits) {
            out.extend(entropic_key_remark(n, t, self.epsilon_log2.unwrap_or(0.0)));
        }
        if let Some(criterion) = self.criterion {
            if let Some(n) = self.n_bits {
                out.push(mi_secrecy_thresholds(n, criterion)?);
            } else {
                return Err(Error::InvalidQuery(
                    "secrecy criteria need the message length n".into(),
                ));
            }
        }

        if out.is_empty() {
            return Err(Error::InvalidQuery(
                "nothing to evaluate: supply rho (or n and s), and optionally t, tau, epsilon, leaked, alpha, criterion"
                    .into(),
            ));
        }
        Ok(out)
    }
}
