//! Exhaustive eavesdropper advantage on small instances.
//!
//! The eavesdropper picks a function f of the plaintext and guesses f(M)
//! from the ciphertext. For a fixed f the best guess is the MAP rule, so the
//! advantage of the pair is
//!
//! ```text
//! adv(f) = sum_c max_i P{f(M) = i, C = c} - max_i P{f(M) = i},
//! ```
//!
//! and the quantity of interest is its maximum over f. Functions of the
//! plaintext matter only through the partition they induce, so the general
//! search enumerates set partitions (feasible to |M| = 10) and the one-bit
//! search enumerates subsets with Gray-code updates (feasible to |M| = 20).
//! Everything here is exact enumeration; the bound checks compare the exact
//! optimum against what the correlation of the cipher promises.

use crate::cipher::MessageDistributionScenario;
use crate::partitions::{canonical_growth_string, SetPartitions};
use crate::pmf::{JointPmf, Pmf};
use crate::spectral::maximal_correlation;
use crate::{Error, Result};

/// Message-count cap for the set-partition search (Bell(10) = 115975).
pub const GENERAL_MAX_MESSAGES: usize = 10;

/// Message-count cap for the subset search (2^20 subsets).
pub const ONE_BIT_MAX_MESSAGES: usize = 20;

/// Slack used by every bound check in this module.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryMode {
    /// f ranges over all functions of the plaintext.
    General,
    /// f ranges over {0,1}-valued functions.
    OneBit,
}

/// The exact optimum of the advantage search.
///
/// `best_partition` is the canonical growth string of the maximizing f;
/// ties go to the first partition in enumeration order. The guess
/// probability is the MAP success P{f(M) = guess(C)} for that f.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AdvantageResult {
    pub mode: AdversaryMode,
    pub best_partition: Vec<usize>,
    pub best_guess_probability: f64,
    pub baseline_probability: f64,
    pub advantage: f64,
}

/// Observation model for the search core: per-message mass over the columns
/// the guesser sees, and over the columns the baseline sees. For the plain
/// search the baseline sees nothing (a single column); with side information
/// it sees h(M).
struct SearchInstance<'a> {
    obs: &'a [Vec<f64>],
    base: &'a [Vec<f64>],
}

fn map_success(groups: &[usize], n_groups: usize, rows: &[Vec<f64>]) -> f64 {
    let n_cols = rows[0].len();
    let mut mass = vec![0.0f64; n_groups * n_cols];
    for (m, row) in rows.iter().enumerate() {
        let g = groups[m];
        for (c, &p) in row.iter().enumerate() {
            mass[g * n_cols + c] += p;
        }
    }
    (0..n_cols)
        .map(|c| {
            (0..n_groups)
                .map(|g| mass[g * n_cols + c])
                .fold(0.0f64, f64::max)
        })
        .sum()
}

fn advantage_of(groups: &[usize], n_groups: usize, inst: &SearchInstance) -> (f64, f64, f64) {
    let success = map_success(groups, n_groups, inst.obs);
    let baseline = map_success(groups, n_groups, inst.base);
    (success, baseline, success - baseline)
}

fn search_general(n_messages: usize, inst: &SearchInstance) -> AdvantageResult {
    let mut best: Option<(f64, AdvantageResult)> = None;
    for partition in SetPartitions::new(n_messages) {
        let n_groups = partition.iter().copied().max().unwrap() + 1;
        let (success, baseline, adv) = advantage_of(&partition, n_groups, inst);
        if best.as_ref().is_none_or(|(b, _)| adv > *b) {
            best = Some((
                adv,
                AdvantageResult {
                    mode: AdversaryMode::General,
                    best_partition: partition,
                    best_guess_probability: success,
                    baseline_probability: baseline,
                    advantage: adv,
                },
            ));
        }
    }
    best.expect("at least one partition").1
}

fn search_one_bit(n_messages: usize, inst: &SearchInstance) -> AdvantageResult {
    let n_obs = inst.obs[0].len();
    let n_base = inst.base[0].len();
    let obs_total: Vec<f64> = (0..n_obs)
        .map(|c| inst.obs.iter().map(|row| row[c]).sum())
        .collect();
    let base_total: Vec<f64> = (0..n_base)
        .map(|c| inst.base.iter().map(|row| row[c]).sum())
        .collect();

    // Gray-code walk over subsets; mass vectors are updated incrementally
    // and recomputed exactly whenever a subset takes the lead.
    let mut in_set = vec![false; n_messages];
    let mut obs_mass = vec![0.0f64; n_obs];
    let mut base_mass = vec![0.0f64; n_base];

    let exact = |in_set: &[bool]| {
        let groups: Vec<usize> = in_set.iter().map(|&b| usize::from(b)).collect();
        advantage_of(&groups, 2, inst)
    };

    let (mut best_success, mut best_baseline, mut best_adv) = exact(&in_set);
    let mut best_set = in_set.clone();

    for step in 1u64..1u64 << n_messages {
        let flip = step.trailing_zeros() as usize;
        let sign = if in_set[flip] { -1.0 } else { 1.0 };
        in_set[flip] = !in_set[flip];
        for (c, m) in obs_mass.iter_mut().enumerate() {
            *m += sign * inst.obs[flip][c];
        }
        for (c, m) in base_mass.iter_mut().enumerate() {
            *m += sign * inst.base[flip][c];
        }
        let success: f64 = (0..n_obs)
            .map(|c| obs_mass[c].max(obs_total[c] - obs_mass[c]))
            .sum();
        let baseline: f64 = (0..n_base)
            .map(|c| base_mass[c].max(base_total[c] - base_mass[c]))
            .sum();
        if success - baseline > best_adv - 1e-12 {
            // Candidate within drift range of the lead: recompute exactly.
            let (s, b, adv) = exact(&in_set);
            if adv > best_adv {
                best_adv = adv;
                best_success = s;
                best_baseline = b;
                best_set.copy_from_slice(&in_set);
            }
        }
    }

    let groups: Vec<usize> = best_set.iter().map(|&b| usize::from(b)).collect();
    AdvantageResult {
        mode: AdversaryMode::OneBit,
        best_partition: canonical_growth_string(&groups),
        best_guess_probability: best_success,
        baseline_probability: best_baseline,
        advantage: best_adv,
    }
}

fn joint_rows(joint: &JointPmf) -> Vec<Vec<f64>> {
    (0..joint.n_rows()).map(|m| joint.row(m).to_vec()).collect()
}

fn check_message_cap(n_messages: usize, mode: AdversaryMode) -> Result<()> {
    let cap = match mode {
        AdversaryMode::General => GENERAL_MAX_MESSAGES,
        AdversaryMode::OneBit => ONE_BIT_MAX_MESSAGES,
    };
    if n_messages > cap {
        return Err(Error::TooLarge(format!(
            "advantage search in {mode:?} mode handles at most {cap} messages (got {n_messages})"
        )));
    }
    Ok(())
}

/// Exact maximal advantage of the scenario, by exhaustive search.
pub fn optimal_advantage(
    scenario: &MessageDistributionScenario,
    mode: AdversaryMode,
) -> Result<AdvantageResult> {
    let n_messages = scenario.cipher.n_messages();
    check_message_cap(n_messages, mode)?;
    let joint = scenario.induced_joint()?;
    let obs = joint_rows(&joint);
    let base: Vec<Vec<f64>> = scenario.message_pmf.iter().map(|&p| vec![p]).collect();
    let inst = SearchInstance {
        obs: &obs,
        base: &base,
    };
    Ok(match mode {
        AdversaryMode::General => search_general(n_messages, &inst),
        AdversaryMode::OneBit => search_one_bit(n_messages, &inst),
    })
}

/// A computed quantity next to the bound it must respect.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub satisfied: bool,
}

impl BoundCheck {
    fn new(value: f64, bound: f64) -> Self {
        Self {
            value,
            bound,
            slack: bound - value,
            satisfied: value <= bound + BOUND_TOL,
        }
    }
}

/// Advantage-versus-correlation check for one scenario.
///
/// The guarantee: with t the collision entropy of the message distribution
/// and rho the maximal correlation of the cipher under a uniform message,
/// no f does better than 2^((n-t)/2) * rho, and no one-bit f does better
/// than half that.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AdvantageBoundCheck {
    pub advantage: AdvantageResult,
    pub n_bits: f64,
    pub t_bits: f64,
    pub rho_uniform: f64,
    pub check: BoundCheck,
}

/// Maximal correlation of the cipher under a uniform message distribution.
pub fn uniform_rho(scenario: &MessageDistributionScenario) -> Result<f64> {
    let uniform = Pmf::uniform(scenario.cipher.n_messages());
    Ok(maximal_correlation(
        &scenario.cipher.induced_joint(&uniform)?,
    ))
}

pub fn check_advantage_bound(
    scenario: &MessageDistributionScenario,
    mode: AdversaryMode,
) -> Result<AdvantageBoundCheck> {
    let advantage = optimal_advantage(scenario, mode)?;
    let n_bits = scenario.cipher.n_bits();
    let t_bits = scenario.message_pmf.renyi_entropy2();
    let rho_uniform = uniform_rho(scenario)?;
    let halving = match mode {
        AdversaryMode::General => 1.0,
        AdversaryMode::OneBit => 0.5,
    };
    let bound = ((n_bits - t_bits) / 2.0).exp2() * rho_uniform * halving;
    let check = BoundCheck::new(advantage.advantage, bound);
    Ok(AdvantageBoundCheck {
        advantage,
        n_bits,
        t_bits,
        rho_uniform,
        check,
    })
}

/// A scenario where the eavesdropper also sees h(M) for a fixed public
/// function h, together with the entropy floor tau the pair must satisfy:
/// sum_a P{h(M)=a} 2^(-H2(M | h(M)=a)/2) <= 2^(-tau/2).
#[derive(Debug, Clone)]
pub struct SideInfoScenario {
    pub scenario: MessageDistributionScenario,
    pub h: Vec<usize>,
    pub n_labels: usize,
    pub tau_bits: f64,
}

/// The largest tau the pair (scenario, h) satisfies; any tau at or below
/// this passes the side-information entropy condition.
pub fn tightest_tau(scenario: &MessageDistributionScenario, h: &[usize]) -> Result<f64> {
    let n_messages = scenario.cipher.n_messages();
    if h.len() != n_messages {
        return Err(Error::SideInfo(format!(
            "h assigns {} messages, cipher has {n_messages}",
            h.len()
        )));
    }
    let n_labels = h.iter().copied().max().unwrap_or(0) + 1;
    let mut label_mass = vec![0.0f64; n_labels];
    for (m, &a) in h.iter().enumerate() {
        label_mass[a] += scenario.message_pmf.get(m);
    }
    let mut total = 0.0;
    for (a, &pa) in label_mass.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        let collision: f64 = h
            .iter()
            .enumerate()
            .filter(|&(_, &lbl)| lbl == a)
            .map(|(m, _)| {
                let q = scenario.message_pmf.get(m) / pa;
                q * q
            })
            .sum();
        // pa * 2^(-H2/2) with H2 = -log2(collision)
        total += pa * collision.sqrt();
    }
    Ok(-2.0 * total.log2())
}

impl SideInfoScenario {
    pub fn new(
        scenario: MessageDistributionScenario,
        h: Vec<usize>,
        tau_bits: f64,
    ) -> Result<Self> {
        let best = tightest_tau(&scenario, &h)?;
        // tau condition, with the usual slack: 2^(-tau/2) >= sum - eps.
        if (-tau_bits / 2.0).exp2() + BOUND_TOL < (-best / 2.0).exp2() {
            return Err(Error::SideInfo(format!(
                "tau = {tau_bits} bits violates the entropy condition; tightest admissible tau = {best}"
            )));
        }
        let n_labels = h.iter().copied().max().unwrap_or(0) + 1;
        Ok(Self {
            scenario,
            h,
            n_labels,
            tau_bits,
        })
    }
}

/// Side-information advantage check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SideInfoCheck {
    pub advantage: AdvantageResult,
    pub n_bits: f64,
    pub tau_bits: f64,
    pub rho_uniform: f64,
    pub check: BoundCheck,
}

/// Exact optimal advantage when the guesser sees (C, h(M)) and the baseline
/// already knows h(M); bounded by 2^((n-tau)/2) * rho.
pub fn side_info_advantage(side: &SideInfoScenario, mode: AdversaryMode) -> Result<SideInfoCheck> {
    let scenario = &side.scenario;
    let n_messages = scenario.cipher.n_messages();
    check_message_cap(n_messages, mode)?;
    let joint = scenario.induced_joint()?;
    let n_c = joint.n_cols();
    let n_labels = side.n_labels;
    // Observation columns are pairs (c, a); only a = h(m) is reachable from
    // message m.
    let obs: Vec<Vec<f64>> = (0..n_messages)
        .map(|m| {
            let mut row = vec![0.0f64; n_c * n_labels];
            for c in 0..n_c {
                row[c * n_labels + side.h[m]] = joint.p(m, c);
            }
            row
        })
        .collect();
    let base: Vec<Vec<f64>> = (0..n_messages)
        .map(|m| {
            let mut row = vec![0.0f64; n_labels];
            row[side.h[m]] = scenario.message_pmf.get(m);
            row
        })
        .collect();
    let inst = SearchInstance {
        obs: &obs,
        base: &base,
    };
    let advantage = match mode {
        AdversaryMode::General => search_general(n_messages, &inst),
        AdversaryMode::OneBit => search_one_bit(n_messages, &inst),
    };
    let n_bits = scenario.cipher.n_bits();
    let rho_uniform = uniform_rho(scenario)?;
    let bound = ((n_bits - side.tau_bits) / 2.0).exp2() * rho_uniform;
    let check = BoundCheck::new(advantage.advantage, bound);
    Ok(SideInfoCheck {
        advantage,
        n_bits,
        tau_bits: side.tau_bits,
        rho_uniform,
        check,
    })
}

/// Parse side-information files: one `message_index label` pair per line,
/// `#` comments ignored. Every message must be assigned exactly once.
/// Labels are arbitrary tokens, numbered by first appearance.
pub fn parse_side_info(text: &str, n_messages: usize) -> Result<(Vec<usize>, usize)> {
    let mut h: Vec<Option<usize>> = vec![None; n_messages];
    let mut labels: Vec<String> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(idx), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::SideInfo(format!(
                "line {}: expected `message_index label`",
                lineno + 1
            )));
        };
        let m: usize = idx.parse().map_err(|_| {
            Error::SideInfo(format!("line {}: bad message index {idx:?}", lineno + 1))
        })?;
        if m >= n_messages {
            return Err(Error::SideInfo(format!(
                "line {}: message {m} out of range (n_messages = {n_messages})",
                lineno + 1
            )));
        }
        if h[m].is_some() {
            return Err(Error::SideInfo(format!(
                "line {}: message {m} assigned twice",
                lineno + 1
            )));
        }
        let a = labels.iter().position(|l| l == label).unwrap_or_else(|| {
            labels.push(label.to_string());
            labels.len() - 1
        });
        h[m] = Some(a);
    }
    let h: Vec<usize> = h
        .into_iter()
        .enumerate()
        .map(|(m, v)| v.ok_or_else(|| Error::SideInfo(format!("message {m} never assigned"))))
        .collect::<Result<_>>()?;
    Ok((h, labels.len()))
}

/// Indistinguishability check under two measures.
///
/// For every partition f and every guess function g of the ciphertext, the
/// deviation |P'{f(M)=g(C)} - sum_i P'{f(M)=i} P{g(C)=i}| is bounded by
/// 2^((n-t)/2) * rho, where P' uses the scenario pmf, P the uniform one, t
/// the collision entropy of the scenario pmf, and rho the uniform-message
/// maximal correlation. The maximum over g decomposes per ciphertext column
/// (each column picks its own label, including a label outside the range of
/// f), so only partitions are enumerated; `max_deviation` is exact.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EntropicCheck {
    pub max_deviation: f64,
    pub worst_partition: Vec<usize>,
    pub n_bits: f64,
    pub t_bits: f64,
    pub rho_uniform: f64,
    pub check: BoundCheck,
}

pub fn entropic_security_check(scenario: &MessageDistributionScenario) -> Result<EntropicCheck> {
    let n_messages = scenario.cipher.n_messages();
    check_message_cap(n_messages, AdversaryMode::General)?;
    let joint = scenario.induced_joint()?;
    let uniform = Pmf::uniform(n_messages);
    let uniform_joint = scenario.cipher.induced_joint(&uniform)?;
    let rho_uniform = maximal_correlation(&uniform_joint);
    let n_c = joint.n_cols();

    let mut best_dev = -1.0;
    let mut worst = Vec::new();
    for partition in SetPartitions::new(n_messages) {
        let n_groups = partition.iter().copied().max().unwrap() + 1;
        let mut pf = vec![0.0f64; n_groups];
        for (m, &g) in partition.iter().enumerate() {
            pf[g] += scenario.message_pmf.get(m);
        }
        let mut pos = 0.0f64;
        let mut neg = 0.0f64;
        for c in 0..n_c {
            let pc_uniform = uniform_joint.col_marginal().get(c);
            let mut hi = 0.0f64; // the dead label contributes deviation 0
            let mut lo = 0.0f64;
            for (g, &pg) in pf.iter().enumerate().take(n_groups) {
                let mass: f64 = (0..n_messages)
                    .filter(|&m| partition[m] == g)
                    .map(|m| joint.p(m, c))
                    .sum();
                let d = mass - pg * pc_uniform;
                hi = hi.max(d);
                lo = lo.min(d);
            }
            pos += hi;
            neg -= lo;
        }
        let dev = pos.max(neg);
        if dev > best_dev {
            best_dev = dev;
            worst = partition;
        }
    }

    let n_bits = scenario.cipher.n_bits();
    let t_bits = scenario.message_pmf.renyi_entropy2();
    let bound = ((n_bits - t_bits) / 2.0).exp2() * rho_uniform;
    let check = BoundCheck::new(best_dev, bound);
    Ok(EntropicCheck {
        max_deviation: best_dev,
        worst_partition: worst,
        n_bits,
        t_bits,
        rho_uniform,
        check,
    })
}

/// MAP success of guessing membership in `subset` from the ciphertext, and
/// the probability mass of the subset's complement label 0. Exposed for the
/// sharpened one-bit bound, which must hold for every subset, not only the
/// optimal one.
pub fn map_success_one_bit(joint: &JointPmf, subset: &[bool]) -> (f64, f64) {
    assert_eq!(subset.len(), joint.n_rows());
    let success: f64 = (0..joint.n_cols())
        .map(|c| {
            let one: f64 = (0..joint.n_rows())
                .filter(|&m| subset[m])
                .map(|m| joint.p(m, c))
                .sum();
            let zero: f64 = joint.col_marginal().get(c) - one;
            one.max(zero)
        })
        .sum();
    let p_zero: f64 = (0..joint.n_rows())
        .filter(|&m| !subset[m])
        .map(|m| joint.row_marginal().get(m))
        .sum();
    (success, p_zero)
}
