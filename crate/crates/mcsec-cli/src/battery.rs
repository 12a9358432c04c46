//! The `verify` battery: the library's headline guarantees, re-checked
//! end to end. `small` keeps instances tiny for a quick smoke run; `full`
//! uses the documented instance counts. Every correlation report computed
//! anywhere in the battery feeds the flag tally of the final invariant
//! check, and every cipher built feeds the key-length converse check.

use crate::render::sig10;
use mcsec::adversary::{check_advantage_bound, optimal_advantage, AdversaryMode};
use mcsec::bounds::{converse_min_key, default_grid, fig2_curves, BoundQuery};
use mcsec::constructions::{
    build_expander_cipher, build_stream_cipher, cascade, expander_lambda2_rho, montecarlo_stream,
    random_permutation_cipher, random_stream_cipher, trial_seed, walsh_rho, ExpanderSpec,
    ReferenceCipher,
};
use mcsec::{correlation_report, Cipher, CorrelationReport, MessageDistributionScenario, Pmf};

pub struct Check {
    pub index: usize,
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

/// Flag tally across every report the battery computes.
#[derive(Default)]
struct Stats {
    reports: usize,
    violations: usize,
}

impl Stats {
    fn fold(&mut self, r: &CorrelationReport) {
        self.reports += 1;
        let ok = (0.0..=1.0 + 1e-9).contains(&r.rho_m)
            && r.chi_sq >= -1e-12
            && r.sandwich_ok
            && r.mi_bound_ok
            && r.mi_bits <= r.mi_upper_bound_bits + 1e-9;
        if !ok {
            self.violations += 1;
        }
    }
}

/// What the converse check needs from a built cipher.
struct ZooEntry {
    label: String,
    n_bits: f64,
    s_bits: f64,
    rho_m: f64,
}

struct Battery {
    full: bool,
    seed: u64,
    stats: Stats,
    zoo: Vec<ZooEntry>,
}

type CheckResult = Result<String, String>;

pub fn run(full: bool, seed: u64) -> Vec<Check> {
    let mut b = Battery {
        full,
        seed,
        stats: Stats::default(),
        zoo: Vec::new(),
    };
    // Checks 6 and 9 summarize what the others built, so they run last.
    let staged: Vec<(usize, &'static str, CheckResult)> = vec![
        (1, "golden_values", b.golden_values()),
        (2, "counterexample_mi", b.counterexample_mi()),
        (3, "headline_numbers", b.headline_numbers()),
        (4, "dual_route_equivalence", b.dual_routes()),
        (5, "advantage_bounds", b.advantage_bounds()),
        (7, "cascade_submultiplicativity", b.cascades()),
        (8, "montecarlo_pass_rate", b.montecarlo()),
        (10, "fig2_curves", b.fig2()),
        (6, "key_length_converse", b.converse()),
        (9, "report_flags", b.report_flags()),
    ];
    let mut checks: Vec<Check> = staged
        .into_iter()
        .map(|(index, name, r)| match r {
            Ok(detail) => Check {
                index,
                name,
                ok: true,
                detail,
            },
            Err(detail) => Check {
                index,
                name,
                ok: false,
                detail,
            },
        })
        .collect();
    checks.sort_by_key(|c| c.index);
    checks
}

/// Deterministic pseudo-random stream for battery instance generation,
/// derived from the splitmix chain the library uses for trial seeds.
struct Mix(u64);

impl Mix {
    fn new(seed: u64, lane: u64) -> Self {
        Mix(trial_seed(seed, lane))
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = trial_seed(self.0, 0x9e37);
        self.0
    }

    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform-ish integer in [lo, hi]; modulo bias is irrelevant here.
    fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    fn pmf(&mut self, len: usize) -> Pmf {
        let skew = self.range(0, 1) == 1;
        let raw: Vec<f64> = (0..len)
            .map(|_| {
                let u = self.unit() + 1e-3;
                if skew {
                    u * u * u
                } else {
                    u
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        Pmf::new(raw.into_iter().map(|p| p / total).collect()).expect("normalized pmf")
    }
}

impl Battery {
    /// Uniform-message correlation report; folds the flag tally and files
    /// the cipher for the converse check.
    fn report_of(&mut self, cipher: &Cipher) -> Result<CorrelationReport, String> {
        let joint = cipher
            .induced_joint(&Pmf::uniform(cipher.n_messages()))
            .map_err(|e| e.to_string())?;
        let r = correlation_report(&joint);
        self.stats.fold(&r);
        self.zoo.push(ZooEntry {
            label: cipher.label().to_string(),
            n_bits: cipher.n_bits(),
            s_bits: cipher.s_bits(),
            rho_m: r.rho_m,
        });
        Ok(r)
    }

    fn reference_report(
        &mut self,
        reference: ReferenceCipher,
    ) -> Result<CorrelationReport, String> {
        let cipher = reference.build().map_err(|e| e.to_string())?;
        self.report_of(&cipher)
    }

    fn golden_values(&mut self) -> CheckResult {
        let r2 = self.reference_report(ReferenceCipher::C2)?;
        let r1 = self.reference_report(ReferenceCipher::C1)?;
        let target = std::f64::consts::SQRT_2 / 2.0;
        if (r2.rho_m - target).abs() > 1e-9 {
            return Err(format!("rho(c2) = {}, want sqrt(2)/2", sig10(r2.rho_m)));
        }
        if (r1.rho_m - 1.0).abs() > 1e-9 {
            return Err(format!("rho(c1) = {}, want 1", sig10(r1.rho_m)));
        }
        if (r2.mi_bits - 1.0).abs() > 1e-9 {
            return Err(format!("mi(c2) = {}, want 1 bit", sig10(r2.mi_bits)));
        }
        Ok(format!(
            "rho(c2) = {}, rho(c1) = {}, mi(c2) = {}",
            sig10(r2.rho_m),
            sig10(r1.rho_m),
            sig10(r2.mi_bits)
        ))
    }

    fn counterexample_mi(&mut self) -> CheckResult {
        let max_n = if self.full { 10 } else { 3 };
        for n in 2..=max_n {
            let r = self.reference_report(ReferenceCipher::Counterexample { n })?;
            let expected = 2f64.powi(-(n as i32)) * (n as f64 + 2.0 - 2f64.powi(-(n as i32 - 1)));
            if (r.mi_bits - expected).abs() > 1e-8 {
                return Err(format!(
                    "n = {n}: mi = {}, closed form gives {}",
                    sig10(r.mi_bits),
                    sig10(expected)
                ));
            }
            if (r.rho_m - 1.0).abs() > 1e-9 {
                return Err(format!("n = {n}: rho = {}, want 1", sig10(r.rho_m)));
            }
        }
        Ok(format!(
            "n = 2..{max_n}: mutual information matches the closed form, rho = 1 throughout"
        ))
    }

    fn headline_numbers(&mut self) -> CheckResult {
        let within =
            |value_log2: f64, target: f64| (value_log2 - target.log2()).abs() <= 1.02f64.log2();
        let find = |rows: &[mcsec::bounds::BoundResult], name: &str| {
            rows.iter()
                .find(|r| r.name == name)
                .map(|r| (r.value_log2, r.value_decimal.clone()))
                .ok_or_else(|| format!("bound query reported no {name}"))
        };
        let base = BoundQuery {
            n_bits: Some(8e9),
            s_bits: Some(512.0),
            ..Default::default()
        }
        .evaluate()
        .map_err(|e| e.to_string())?;
        let (rho_log2, rho_decimal) = find(&base, "stream_rho")?;
        if !within(rho_log2, 1.54e-72) {
            return Err(format!(
                "stream rho = {rho_decimal}, want 1.54e-72 within 2%"
            ));
        }
        let leaked = BoundQuery {
            n_bits: Some(8e9),
            s_bits: Some(512.0),
            leaked_bits: Some(100.0),
            ..Default::default()
        }
        .evaluate()
        .map_err(|e| e.to_string())?;
        let (adv_log2, adv_decimal) = find(&leaked, "leaked_bits_advantage_bound")?;
        if !within(adv_log2, 1.74e-57) {
            return Err(format!(
                "leaked-bits advantage bound = {adv_decimal}, want 1.74e-57 within 2%"
            ));
        }
        Ok(format!(
            "8e9-bit message, 512-bit key: rho = {rho_decimal}; 100 leaked bits: advantage <= {adv_decimal}"
        ))
    }

    fn dual_routes(&mut self) -> CheckResult {
        let (streams, expanders, n_cap, s_cap, d_cap) = if self.full {
            (50u64, 20u64, 8, 6, 16)
        } else {
            (10, 5, 3, 3, 4)
        };
        let mut worst: f64 = 0.0;
        let mut mix = Mix::new(self.seed, 4);
        for _ in 0..streams {
            let n = mix.range(1, n_cap) as u32;
            let s = mix.range(0, s_cap) as u32;
            let spec = random_stream_cipher(n, s, mix.next_u64()).map_err(|e| e.to_string())?;
            let closed = walsh_rho(&spec).map_err(|e| e.to_string())?;
            let cipher = build_stream_cipher(&spec).map_err(|e| e.to_string())?;
            let r = self.report_of(&cipher)?;
            worst = worst.max((closed - r.rho_m).abs());
        }
        for _ in 0..expanders {
            let n = mix.range(1, n_cap) as u32;
            let d = mix.range(1, d_cap);
            let spec = ExpanderSpec::random(n, d, mix.next_u64()).map_err(|e| e.to_string())?;
            let closed = expander_lambda2_rho(&spec).map_err(|e| e.to_string())?;
            let cipher = build_expander_cipher(&spec).map_err(|e| e.to_string())?;
            let r = self.report_of(&cipher)?;
            worst = worst.max((closed - r.rho_m).abs());
        }
        if worst > 1e-9 {
            return Err(format!(
                "closed-form and spectral routes disagree by {} (> 1e-9)",
                sig10(worst)
            ));
        }
        Ok(format!(
            "{streams} stream + {expanders} permutation-family ciphers, max |closed - spectral| = {}",
            sig10(worst)
        ))
    }

    fn advantage_bounds(&mut self) -> CheckResult {
        let trials = if self.full { 200 } else { 50 };
        let mut mix = Mix::new(self.seed, 5);
        for trial in 0..trials {
            let n_messages = mix.range(2, 8);
            let n_keys = mix.range(1, 8);
            let cipher = random_permutation_cipher(n_messages, n_keys, mix.next_u64())
                .map_err(|e| e.to_string())?;
            let pmf = mix.pmf(n_messages);
            let joint = cipher.induced_joint(&pmf).map_err(|e| e.to_string())?;
            self.stats.fold(&correlation_report(&joint));
            let scenario =
                MessageDistributionScenario::new(cipher, pmf).map_err(|e| e.to_string())?;
            for mode in [AdversaryMode::General, AdversaryMode::OneBit] {
                let chk = check_advantage_bound(&scenario, mode).map_err(|e| e.to_string())?;
                if !chk.check.satisfied {
                    return Err(format!(
                        "trial {trial} ({mode:?}): advantage {} exceeds bound {}",
                        sig10(chk.check.value),
                        sig10(chk.check.bound)
                    ));
                }
            }
        }
        let c2 = ReferenceCipher::C2.build().map_err(|e| e.to_string())?;
        let res = optimal_advantage(
            &MessageDistributionScenario::uniform(c2),
            AdversaryMode::OneBit,
        )
        .map_err(|e| e.to_string())?;
        if (res.best_guess_probability - 0.75).abs() > 1e-12 {
            return Err(format!(
                "one-bit MAP success against c2 = {}, want exactly 3/4",
                sig10(res.best_guess_probability)
            ));
        }
        Ok(format!(
            "{trials} random (cipher, pmf) instances within the advantage bound; c2 one-bit optimum = 3/4"
        ))
    }

    fn cascades(&mut self) -> CheckResult {
        let (pairs, n_cap) = if self.full { (100, 8) } else { (20, 4) };
        let mut mix = Mix::new(self.seed, 7);
        let mut worst_excess: f64 = f64::NEG_INFINITY;
        for pair in 0..pairs {
            let n_messages = mix.range(2, n_cap);
            let ka = mix.range(1, 4);
            let kb = mix.range(1, 4);
            let a = random_permutation_cipher(n_messages, ka, mix.next_u64())
                .map_err(|e| e.to_string())?;
            let b = random_permutation_cipher(n_messages, kb, mix.next_u64())
                .map_err(|e| e.to_string())?;
            let composed = cascade(&a, &b).map_err(|e| e.to_string())?;
            let rho_a = self.report_of(&a)?.rho_m;
            let rho_b = self.report_of(&b)?.rho_m;
            let rho = self.report_of(&composed)?.rho_m;
            worst_excess = worst_excess.max(rho - rho_a * rho_b);
            if rho > rho_a * rho_b + 1e-9 {
                return Err(format!(
                    "pair {pair}: rho(cascade) = {} exceeds product {}",
                    sig10(rho),
                    sig10(rho_a * rho_b)
                ));
            }
        }
        Ok(format!(
            "{pairs} cascades submultiplicative, worst rho - product = {}",
            sig10(worst_excess)
        ))
    }

    fn montecarlo(&mut self) -> CheckResult {
        let trials = if self.full { 500 } else { 100 };
        let (_, summary) =
            montecarlo_stream(16, 9, 0.5, trials, self.seed).map_err(|e| e.to_string())?;
        let fraction = summary
            .pass_fraction
            .ok_or_else(|| "no trials ran".to_string())?;
        if fraction < 0.87 {
            return Err(format!(
                "pass fraction {} below 0.87 ({}/{trials})",
                sig10(fraction),
                summary.passes
            ));
        }
        Ok(format!(
            "n=16 s=9 rho=0.5: {}/{} random keystreams within target (fraction {})",
            summary.passes,
            trials,
            sig10(fraction)
        ))
    }

    fn converse(&mut self) -> CheckResult {
        if self.zoo.is_empty() {
            return Err("no ciphers were built".to_string());
        }
        let mut worst_slack = f64::INFINITY;
        for entry in &self.zoo {
            let needed = converse_min_key(entry.n_bits, entry.rho_m.log2()).value_log2;
            let slack = entry.s_bits - needed;
            worst_slack = worst_slack.min(slack);
            if slack < -1e-6 {
                return Err(format!(
                    "{}: {} key bits, converse needs {}",
                    entry.label,
                    sig10(entry.s_bits),
                    sig10(needed)
                ));
            }
        }
        Ok(format!(
            "{} built ciphers meet the key-length converse (worst slack {} bits)",
            self.zoo.len(),
            sig10(worst_slack)
        ))
    }

    fn report_flags(&mut self) -> CheckResult {
        if self.stats.reports == 0 {
            return Err("no correlation reports were computed".to_string());
        }
        if self.stats.violations > 0 {
            return Err(format!(
                "{} of {} reports violated the sandwich or mutual-information flags",
                self.stats.violations, self.stats.reports
            ));
        }
        Ok(format!(
            "{} correlation reports, sandwich and mutual-information bounds hold on all",
            self.stats.reports
        ))
    }

    fn fig2(&mut self) -> CheckResult {
        let n_bits = 1e4;
        let rows = fig2_curves(n_bits, &default_grid());
        for row in &rows {
            if row.converse_bits > row.expander_bits + 1e-9 {
                return Err(format!(
                    "log2(rho) = {}: converse {} exceeds expander {}",
                    sig10(row.rho_log2),
                    sig10(row.converse_bits),
                    sig10(row.expander_bits)
                ));
            }
        }
        let at = rows
            .iter()
            .find(|r| r.rho_log2 == -10.0)
            .ok_or_else(|| "default grid misses log2(rho) = -10".to_string())?;
        let stream_hand = 20.0 + n_bits.log2() + 2.0;
        for (name, got, want) in [
            ("converse", at.converse_bits, 20.0),
            ("expander", at.expander_bits, 22.0),
            ("stream", at.stream_bits, stream_hand),
        ] {
            if (got - want).abs() > 0.01 {
                return Err(format!(
                    "{name} at rho = 2^-10: {} bits, hand computation gives {}",
                    sig10(got),
                    sig10(want)
                ));
            }
        }
        Ok(format!(
            "{} grid points ordered converse <= expander; values at rho = 2^-10 match hand arithmetic",
            rows.len()
        ))
    }
}
