//! Probability mass functions over small finite alphabets.
//!
//! `Pmf` is a validated probability vector, `JointPmf` a validated
//! probability matrix with cached marginals. Constructors renormalize when
//! the total is within [`NORMALIZATION_TOLERANCE`] of one and reject it
//! otherwise, so every value that escapes this module sums to one up to
//! machine precision. Long sums use pairwise accumulation to keep rounding
//! error near machine epsilon even for million-entry joints.

use crate::{Error, Result};

/// Hard cap on alphabet sizes accepted anywhere in the crate.
pub const MAX_ALPHABET: usize = 1 << 16;

/// Deviation from a total of 1.0 below which constructors silently
/// renormalize and above which they error.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Base case length below which plain left-to-right summation is used.
const PAIRWISE_CUTOFF: usize = 64;

/// Sum with pairwise splitting; error grows like eps * log(len) instead of
/// eps * len.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_CUTOFF {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

pub(crate) fn pairwise_sum_iter<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let terms: Vec<f64> = it.into_iter().collect();
    pairwise_sum(&terms)
}

fn check_entries(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf("no outcomes".into()));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidPmf(format!("entry {i} is {p}")));
        }
    }
    Ok(())
}

/// A probability vector: entries nonnegative, total one.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() > MAX_ALPHABET {
            return Err(Error::TooLarge(format!(
                "alphabet size {} exceeds {}",
                probs.len(),
                MAX_ALPHABET
            )));
        }
        check_entries(&probs)?;
        let total = pairwise_sum(&probs);
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidPmf(format!(
                "entries sum to {total}, more than {NORMALIZATION_TOLERANCE} away from 1"
            )));
        }
        if total != 1.0 {
            for p in &mut probs {
                *p /= total;
            }
        }
        Ok(Self { probs })
    }

    pub fn uniform(len: usize) -> Self {
        assert!((1..=MAX_ALPHABET).contains(&len));
        Self {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        assert!(at < len && len <= MAX_ALPHABET);
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Self { probs }
    }

    /// Parse the text format used by CLI `--pmf` files: one probability per
    /// line, `#` starts a comment, blank lines ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut probs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let p: f64 = line.parse().map_err(|_| {
                Error::InvalidPmf(format!("line {}: cannot parse {line:?}", lineno + 1))
            })?;
            probs.push(p);
        }
        Self::new(probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.probs.iter()
    }

    /// Number of outcomes with nonzero probability.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Collision (Renyi order-2) entropy in bits: -log2 sum p^2.
    pub fn renyi_entropy2(&self) -> f64 {
        -pairwise_sum_iter(self.probs.iter().map(|p| p * p)).log2()
    }

    /// Chi-square divergence of `self` from `q`: sum p^2/q - 1, with
    /// 0^2/0 := 0. Errors when some outcome has p > 0 but q = 0.
    pub fn chi_square(&self, q: &Pmf) -> Result<f64> {
        if self.len() != q.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: q.len(),
            });
        }
        let mut terms = Vec::with_capacity(self.len());
        for (i, (&p, &qi)) in self.probs.iter().zip(q.probs.iter()).enumerate() {
            if qi == 0.0 {
                if p > 0.0 {
                    return Err(Error::InfiniteChiSquare { index: i, p });
                }
                terms.push(0.0);
            } else {
                terms.push(p * p / qi);
            }
        }
        Ok(pairwise_sum(&terms) - 1.0)
    }
}

/// A joint probability matrix with cached marginals.
///
/// Rows index the first coordinate (plaintext, in the cipher use), columns
/// the second (ciphertext). The marginals are computed once at construction;
/// they always agree with fresh row/column sums to within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    probs: Vec<f64>, // row-major, n_rows x n_cols
    n_rows: usize,
    n_cols: usize,
    row_marginal: Pmf,
    col_marginal: Pmf,
}

impl JointPmf {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::InvalidPmf("no rows".into()));
        }
        let n_cols = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::InvalidPmf(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(flat, n_rows, n_cols)
    }

    pub fn from_flat(flat: Vec<f64>, n_rows: usize, n_cols: usize) -> Result<Self> {
        Self::build(flat, n_rows, n_cols, None)
    }

    /// Constructor for joints whose row marginal is known exactly by
    /// construction (a rational rescale of `row_marginal`); skips the lossy
    /// recomputation of that marginal.
    pub(crate) fn from_flat_with_row_marginal(
        flat: Vec<f64>,
        n_rows: usize,
        n_cols: usize,
        row_marginal: Pmf,
    ) -> Result<Self> {
        Self::build(flat, n_rows, n_cols, Some(row_marginal))
    }

    fn build(
        mut flat: Vec<f64>,
        n_rows: usize,
        n_cols: usize,
        row_marginal: Option<Pmf>,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidPmf("empty joint".into()));
        }
        if n_rows > MAX_ALPHABET || n_cols > MAX_ALPHABET {
            return Err(Error::TooLarge(format!(
                "joint alphabet {n_rows} x {n_cols} exceeds {MAX_ALPHABET} per axis"
            )));
        }
        if flat.len() != n_rows * n_cols {
            return Err(Error::LengthMismatch {
                left: flat.len(),
                right: n_rows * n_cols,
            });
        }
        check_entries(&flat)?;
        let total = pairwise_sum(&flat);
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidPmf(format!(
                "joint entries sum to {total}, more than {NORMALIZATION_TOLERANCE} away from 1"
            )));
        }
        if total != 1.0 {
            for p in &mut flat {
                *p /= total;
            }
        }
        let row_sums: Vec<f64> = (0..n_rows)
            .map(|i| pairwise_sum(&flat[i * n_cols..(i + 1) * n_cols]))
            .collect();
        let mut col_sums = vec![0.0; n_cols];
        for i in 0..n_rows {
            for (j, s) in col_sums.iter_mut().enumerate() {
                *s += flat[i * n_cols + j];
            }
        }
        let row_marginal = match row_marginal {
            Some(pmf) => {
                debug_assert!(pmf.len() == n_rows);
                pmf
            }
            None => Pmf::new(row_sums)?,
        };
        let col_marginal = Pmf::new(col_sums)?;
        Ok(Self {
            probs: flat,
            n_rows,
            n_cols,
            row_marginal,
            col_marginal,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.n_cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_marginal(&self) -> &Pmf {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &Pmf {
        &self.col_marginal
    }

    /// Mutual information in bits, with the 0 log 0 := 0 convention.
    pub fn mutual_information(&self) -> f64 {
        let mut terms = Vec::with_capacity(self.probs.len());
        for i in 0..self.n_rows {
            let pr = self.row_marginal.get(i);
            for j in 0..self.n_cols {
                let p = self.p(i, j);
                if p > 0.0 {
                    terms.push(p * (p / (pr * self.col_marginal.get(j))).log2());
                }
            }
        }
        pairwise_sum(&terms)
    }

    /// The conditional row distribution given column `col`.
    pub fn conditional_pmf(&self, col: usize) -> Result<Pmf> {
        if col >= self.n_cols {
            return Err(Error::LengthMismatch {
                left: col,
                right: self.n_cols,
            });
        }
        let mass = self.col_marginal.get(col);
        if mass == 0.0 {
            return Err(Error::ZeroColumn { column: col });
        }
        Pmf::new((0..self.n_rows).map(|i| self.p(i, col) / mass).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn pairwise_is_accurate_on_long_skewed_input() {
        // 2^20 tiny terms after a single 1.0; naive summation loses them all
        // below the eps of the running total far faster than pairwise does.
        let n = 1 << 20;
        let mut xs = vec![1e-18; n];
        xs[0] = 1.0;
        let exact = 1.0 + (n as f64 - 1.0) * 1e-18;
        assert!((pairwise_sum(&xs) - exact).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_and_unnormalized() {
        assert!(Pmf::new(vec![0.5, -0.5, 1.0]).is_err());
        assert!(Pmf::new(vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![]).is_err());
    }

    #[test]
    fn renormalizes_within_tolerance_only() {
        let p = Pmf::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((pairwise_sum(p.as_slice()) - 1.0).abs() < 1e-15);
        assert!(Pmf::new(vec![0.5, 0.5 + 5e-9]).is_err());
    }

    #[test]
    fn conditional_of_zero_column_errors() {
        let j = JointPmf::from_rows(vec![vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        assert!(matches!(
            j.conditional_pmf(1),
            Err(Error::ZeroColumn { column: 1 })
        ));
    }

    #[test]
    fn marginals_match_fresh_sums() {
        let j = JointPmf::from_rows(vec![vec![0.1, 0.2, 0.05], vec![0.3, 0.15, 0.2]]).unwrap();
        for i in 0..2 {
            let s: f64 = (0..3).map(|c| j.p(i, c)).sum();
            assert!((s - j.row_marginal().get(i)).abs() < 1e-12);
        }
        for c in 0..3 {
            let s: f64 = (0..2).map(|i| j.p(i, c)).sum();
            assert!((s - j.col_marginal().get(c)).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_text_handles_comments() {
        let p = Pmf::parse_text("# header\n0.25\n0.25 # tail\n\n0.5\n").unwrap();
        assert_eq!(p.as_slice(), &[0.25, 0.25, 0.5]);
        assert!(Pmf::parse_text("0.5\nnope\n").is_err());
    }
}
