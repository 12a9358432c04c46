//! `mcsec`: analyze ciphers, build them, search the eavesdropper's best
//! guess, and evaluate the key-length arithmetic, from one binary.
//!
//! Exit codes: 0 on success, 2 on usage or validation errors, 3 when the
//! `verify` battery finds a failing check. All randomized subcommands are
//! deterministic functions of `--seed`; repeated invocations with the same
//! argv produce byte-identical output.

mod battery;
mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mcsec::adversary::{
    check_advantage_bound, entropic_security_check, optimal_advantage, parse_side_info,
    side_info_advantage, tightest_tau, AdversaryMode, SideInfoScenario,
};
use mcsec::bounds::{
    default_grid, fig2_curves, parse_grid, render_decimal, BoundQuery, BoundResult, MiCriterion,
};
use mcsec::constructions::{
    build_expander_cipher, build_stream_cipher, cascade, montecarlo_stream, random_stream_cipher,
    ExpanderSpec, KeystreamSpec, ReferenceCipher, StreamSweepSummary, StreamTrial,
};
use mcsec::{correlation_report, Cipher, Error, MessageDistributionScenario, Pmf, Result};
use render::{emit, json_payload, sig10, KvBlock};

#[derive(Parser)]
#[command(
    name = "mcsec",
    version,
    about = "Maximal-correlation secrecy toolkit for finite ciphers",
    propagate_version = true
)]
struct Cli {
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Seed for every randomized subcommand
    #[arg(long, global = true, default_value_t = 0, value_name = "U64")]
    seed: u64,

    /// Write the primary output to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation report for a cipher under a message distribution
    Analyze(AnalyzeArgs),
    /// Build a cipher and emit its JSON file
    Construct(ConstructArgs),
    /// Compose two ciphers with independent keys
    Cascade(CascadeArgs),
    /// Exhaustive eavesdropper advantage, with optional bound checks
    Advantage(AdvantageArgs),
    /// Key-length and advantage formulas, or the comparison curves CSV
    Bounds(BoundsArgs),
    /// Monte Carlo sweep over random stream ciphers
    Montecarlo(MontecarloArgs),
    /// Run the invariant battery; exit 3 if any check fails
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true)))]
struct AnalyzeArgs {
    /// Reference cipher: c1, c2, msb(n,s), counterexample(n), otp(n)
    #[arg(long = "ref", value_name = "NAME", group = "source")]
    reference: Option<String>,

    /// Cipher file (JSON)
    #[arg(long, value_name = "FILE", group = "source")]
    cipher: Option<PathBuf>,

    /// Message pmf file, one probability per line; default uniform
    #[arg(long, value_name = "FILE")]
    pmf: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(subcommand)]
    kind: ConstructKind,
}

#[derive(Subcommand)]
enum ConstructKind {
    /// A named reference cipher
    Ref {
        /// c1, c2, msb(n,s), counterexample(n), otp(n)
        name: String,
    },
    /// XOR stream cipher from explicit or seeded random keystreams
    Stream {
        /// Message bit length
        #[arg(long)]
        n: u32,

        /// Key bit length (the cipher holds 2^s keystream words)
        #[arg(long)]
        s: u32,

        /// Explicit keystream words, comma-separated hex; default: sampled
        /// from --seed
        #[arg(long, value_name = "HEX,..")]
        streams: Option<String>,
    },
    /// Permutation-family cipher: d permutations and their inverses
    Expander {
        /// Message bit length (2^n vertices)
        #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
        n: Option<u32>,

        /// Number of generating permutations (the cipher gets 2d keys)
        #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
        d: Option<usize>,

        /// Build from a saved permutation-family spec instead of sampling
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,

        /// Also write the sampled spec (the permutation list) here
        #[arg(long, value_name = "FILE")]
        spec_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CascadeArgs {
    /// First stage: reference name or cipher file
    #[arg(long, value_name = "REF|FILE")]
    first: String,

    /// Second stage: reference name or cipher file
    #[arg(long, value_name = "REF|FILE")]
    second: String,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true)))]
struct AdvantageArgs {
    /// Reference cipher: c1, c2, msb(n,s), counterexample(n), otp(n)
    #[arg(long = "ref", value_name = "NAME", group = "source")]
    reference: Option<String>,

    /// Cipher file (JSON)
    #[arg(long, value_name = "FILE", group = "source")]
    cipher: Option<PathBuf>,

    /// Message pmf file, one probability per line; default uniform
    #[arg(long, value_name = "FILE")]
    pmf: Option<PathBuf>,

    /// Restrict the guessed function to one bit
    #[arg(long)]
    one_bit: bool,

    /// Side-information file: lines of "message_index label"
    #[arg(long, value_name = "FILE")]
    side_info: Option<PathBuf>,

    /// Entropy floor tau for the side-information bound; default: the
    /// tightest tau the pair satisfies
    #[arg(long, value_name = "BITS", requires = "side_info")]
    tau: Option<f64>,

    /// Also check the advantage against its bounds
    #[arg(long)]
    check_bounds: bool,
}

#[derive(Args)]
struct BoundsArgs {
    /// Message length in bits (accepts scientific notation, e.g. 8e9)
    #[arg(long)]
    n: Option<f64>,

    /// Key length in bits
    #[arg(long)]
    s: Option<f64>,

    /// Maximal correlation, in (0, 1]
    #[arg(long)]
    rho: Option<f64>,

    /// Failure probability for the stream-cipher formula, in (0, 1]
    #[arg(long)]
    epsilon: Option<f64>,

    /// Collision entropy of the message distribution, bits
    #[arg(long)]
    t: Option<f64>,

    /// Side-information entropy floor, bits
    #[arg(long)]
    tau: Option<f64>,

    /// Message bits handed to the eavesdropper
    #[arg(long)]
    leaked: Option<f64>,

    /// Constant for the existence-only random-graph formulas
    #[arg(long)]
    alpha: Option<f64>,

    /// Secrecy criterion: strong, weak, or leakage:RATE
    #[arg(long, value_name = "NAME")]
    criterion: Option<String>,

    /// Emit the key-length comparison curves as CSV
    #[arg(long)]
    fig2: bool,

    /// log2(rho) grid for --fig2, as lo:hi:steps
    #[arg(
        long,
        requires = "fig2",
        value_name = "LO:HI:STEPS",
        allow_hyphen_values = true
    )]
    grid: Option<String>,
}

#[derive(Args)]
struct MontecarloArgs {
    /// Message bit length (at most 28)
    #[arg(long)]
    n: u32,

    /// Key bit length
    #[arg(long)]
    s: u32,

    /// Target correlation each trial is tested against
    #[arg(long)]
    rho: f64,

    /// Number of random keystream draws
    #[arg(long)]
    trials: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Battery size
    #[arg(long, value_enum, default_value_t = BatterySize::Small)]
    battery: BatterySize,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum BatterySize {
    /// Seconds: tiny instances of every check
    Small,
    /// The documented instance counts
    Full,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Analyze(args) => {
            let payload = analyze_cmd(args, cli.json)?;
            emit(out, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Construct(args) => {
            let payload = construct_cmd(args, cli.seed)?;
            emit(out, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Cascade(args) => {
            let first = load_ref_or_file(&args.first)?;
            let second = load_ref_or_file(&args.second)?;
            let composed = cascade(&first, &second)?;
            emit(out, &composed.to_json_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Advantage(args) => {
            let payload = advantage_cmd(args, cli.json)?;
            emit(out, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds(args) => {
            let payload = bounds_cmd(args, cli.json)?;
            emit(out, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Montecarlo(args) => montecarlo_cmd(args, cli.json, cli.seed, out),
        Command::Verify(args) => verify_cmd(args, cli.json, cli.seed, out),
    }
}

/// Resolve the --ref/--cipher pair; clap guarantees exactly one is set.
fn load_cipher(reference: &Option<String>, cipher: &Option<PathBuf>) -> Result<Cipher> {
    match (reference, cipher) {
        (Some(name), None) => ReferenceCipher::parse(name)?.build(),
        (None, Some(path)) => Cipher::read_json_file(path),
        _ => unreachable!("argument group enforces exactly one source"),
    }
}

/// A cascade stage: an existing file wins, otherwise a reference name.
fn load_ref_or_file(token: &str) -> Result<Cipher> {
    let path = Path::new(token);
    if path.exists() {
        return Cipher::read_json_file(path);
    }
    match ReferenceCipher::parse(token) {
        Ok(reference) => reference.build(),
        Err(_) => Err(Error::InvalidCipher(format!(
            "{token:?} is neither an existing cipher file nor a reference name \
             (c1, c2, msb(n,s), counterexample(n), otp(n))"
        ))),
    }
}

fn load_pmf(path: &Option<PathBuf>, n_messages: usize) -> Result<Pmf> {
    match path {
        Some(p) => Pmf::parse_text(&fs::read_to_string(p)?),
        None => Ok(Pmf::uniform(n_messages)),
    }
}

fn cipher_rows(block: &mut KvBlock, cipher: &Cipher) {
    block.push("label", cipher.label());
    block.push("n_messages", cipher.n_messages().to_string());
    block.push("n_keys", cipher.n_keys().to_string());
    block.push("n_ciphertexts", cipher.n_ciphertexts().to_string());
    block.push_f64("message_bits", cipher.n_bits());
    block.push_f64("key_bits", cipher.s_bits());
}

fn cipher_json(cipher: &Cipher) -> serde_json::Value {
    json!({
        "label": cipher.label(),
        "n_messages": cipher.n_messages(),
        "n_keys": cipher.n_keys(),
        "n_ciphertexts": cipher.n_ciphertexts(),
        "message_bits": cipher.n_bits(),
        "key_bits": cipher.s_bits(),
    })
}

fn analyze_cmd(args: &AnalyzeArgs, as_json: bool) -> Result<String> {
    let cipher = load_cipher(&args.reference, &args.cipher)?;
    let pmf = load_pmf(&args.pmf, cipher.n_messages())?;
    let scenario = MessageDistributionScenario::new(cipher, pmf)?;
    let report = correlation_report(&scenario.induced_joint()?);
    let h2 = scenario.message_pmf.renyi_entropy2();

    if as_json {
        return Ok(json_payload(&json!({
            "cipher": cipher_json(&scenario.cipher),
            "message_h2_bits": h2,
            "report": serde_json::to_value(&report).expect("report serializes"),
        })));
    }
    let mut block = KvBlock::new();
    cipher_rows(&mut block, &scenario.cipher);
    block.push_f64("message_h2_bits", h2);
    block.push_f64("rho_m", report.rho_m);
    block.push_f64("chi_sq", report.chi_sq);
    block.push_f64("mi_bits", report.mi_bits);
    block.push_f64("mi_upper_bound_bits", report.mi_upper_bound_bits);
    block.push(
        "b_matrix_rank_bound",
        report.b_matrix_rank_bound.to_string(),
    );
    block.push("sandwich_ok", report.sandwich_ok.to_string());
    block.push("mi_bound_ok", report.mi_bound_ok.to_string());
    Ok(block.render())
}

fn construct_cmd(args: &ConstructArgs, seed: u64) -> Result<String> {
    let cipher = match &args.kind {
        ConstructKind::Ref { name } => ReferenceCipher::parse(name)?.build()?,
        ConstructKind::Stream { n, s, streams } => {
            let spec = match streams {
                Some(csv) => {
                    let words = csv
                        .split(',')
                        .map(|w| {
                            u64::from_str_radix(w.trim(), 16).map_err(|_| {
                                Error::InvalidCipher(format!("bad hex keystream word {w:?}"))
                            })
                        })
                        .collect::<Result<Vec<u64>>>()?;
                    KeystreamSpec::new(*n, *s, words, None)?
                }
                None => random_stream_cipher(*n, *s, seed)?,
            };
            build_stream_cipher(&spec)?
        }
        ConstructKind::Expander {
            n,
            d,
            spec,
            spec_out,
        } => {
            let spec = match spec {
                Some(path) => ExpanderSpec::from_json_str(&fs::read_to_string(path)?)?,
                None => {
                    let (n, d) = (n.expect("required by clap"), d.expect("required by clap"));
                    ExpanderSpec::random(n, d, seed)?
                }
            };
            if let Some(path) = spec_out {
                let mut text = spec.to_json_string();
                if !text.ends_with('\n') {
                    text.push('\n');
                }
                fs::write(path, text)?;
            }
            build_expander_cipher(&spec)?
        }
    };
    Ok(cipher.to_json_string())
}

fn mode_of(one_bit: bool) -> AdversaryMode {
    if one_bit {
        AdversaryMode::OneBit
    } else {
        AdversaryMode::General
    }
}

fn mode_name(mode: AdversaryMode) -> &'static str {
    match mode {
        AdversaryMode::General => "general",
        AdversaryMode::OneBit => "one-bit",
    }
}

fn partition_string(groups: &[usize]) -> String {
    groups
        .iter()
        .map(|g| g.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn advantage_cmd(args: &AdvantageArgs, as_json: bool) -> Result<String> {
    let cipher = load_cipher(&args.reference, &args.cipher)?;
    let pmf = load_pmf(&args.pmf, cipher.n_messages())?;
    let scenario = MessageDistributionScenario::new(cipher, pmf)?;
    let mode = mode_of(args.one_bit);

    if let Some(side_path) = &args.side_info {
        let (h, n_labels) = parse_side_info(
            &fs::read_to_string(side_path)?,
            scenario.cipher.n_messages(),
        )?;
        let tau = match args.tau {
            Some(t) => t,
            None => tightest_tau(&scenario, &h)?,
        };
        let side = SideInfoScenario::new(scenario, h, tau)?;
        let chk = side_info_advantage(&side, mode)?;

        if as_json {
            return Ok(json_payload(&json!({
                "cipher": cipher_json(&side.scenario.cipher),
                "mode": mode_name(mode),
                "advantage": serde_json::to_value(&chk.advantage).expect("serializes"),
                "side_info": {
                    "n_labels": n_labels,
                    "tau_bits": chk.tau_bits,
                    "n_bits": chk.n_bits,
                    "rho_uniform": chk.rho_uniform,
                    "check": serde_json::to_value(&chk.check).expect("serializes"),
                },
            })));
        }
        let mut block = KvBlock::new();
        cipher_rows(&mut block, &side.scenario.cipher);
        block.push("mode", mode_name(mode));
        block.push("side_info_labels", n_labels.to_string());
        block.push_f64("tau_bits", chk.tau_bits);
        block.push(
            "best_partition",
            partition_string(&chk.advantage.best_partition),
        );
        block.push_f64(
            "best_guess_probability",
            chk.advantage.best_guess_probability,
        );
        block.push_f64("baseline_probability", chk.advantage.baseline_probability);
        block.push_f64("advantage", chk.advantage.advantage);
        block.push_f64("rho_uniform", chk.rho_uniform);
        block.push_f64("side_info_bound", chk.check.bound);
        block.push_f64("bound_slack", chk.check.slack);
        block.push("bound_satisfied", chk.check.satisfied.to_string());
        return Ok(block.render());
    }

    let result = optimal_advantage(&scenario, mode)?;
    let checks = if args.check_bounds {
        Some((
            check_advantage_bound(&scenario, mode)?,
            entropic_security_check(&scenario)?,
        ))
    } else {
        None
    };

    if as_json {
        let mut body = json!({
            "cipher": cipher_json(&scenario.cipher),
            "mode": mode_name(mode),
            "advantage": serde_json::to_value(&result).expect("serializes"),
        });
        if let Some((general, entropic)) = &checks {
            body["advantage_bound"] = serde_json::to_value(general).expect("serializes");
            body["entropic"] = serde_json::to_value(entropic).expect("serializes");
        }
        return Ok(json_payload(&body));
    }
    let mut block = KvBlock::new();
    cipher_rows(&mut block, &scenario.cipher);
    block.push("mode", mode_name(mode));
    block.push("best_partition", partition_string(&result.best_partition));
    block.push_f64("best_guess_probability", result.best_guess_probability);
    block.push_f64("baseline_probability", result.baseline_probability);
    block.push_f64("advantage", result.advantage);
    if let Some((general, entropic)) = &checks {
        block.push_f64("rho_uniform", general.rho_uniform);
        block.push_f64("t_bits", general.t_bits);
        block.push_f64("advantage_bound", general.check.bound);
        block.push_f64("bound_slack", general.check.slack);
        block.push("bound_satisfied", general.check.satisfied.to_string());
        block.push_f64("entropic_max_deviation", entropic.max_deviation);
        block.push_f64("entropic_bound", entropic.check.bound);
        block.push("entropic_satisfied", entropic.check.satisfied.to_string());
    }
    Ok(block.render())
}

fn parse_criterion(name: &str) -> Result<MiCriterion> {
    match name {
        "strong" => Ok(MiCriterion::Strong),
        "weak" => Ok(MiCriterion::Weak),
        other => match other.strip_prefix("leakage:") {
            Some(rate) => {
                let rate: f64 = rate
                    .parse()
                    .map_err(|_| Error::InvalidQuery(format!("bad leakage rate {rate:?}")))?;
                Ok(MiCriterion::Leakage(rate))
            }
            None => Err(Error::InvalidQuery(format!(
                "criterion must be strong, weak, or leakage:RATE (got {other:?})"
            ))),
        },
    }
}

/// Names whose value IS a bit count; everything else is a log2-scale
/// probability-like quantity rendered with its decimal form.
fn is_bit_quantity(name: &str) -> bool {
    matches!(
        name,
        "converse_min_key_bits"
            | "expander_key_bits"
            | "stream_key_bits"
            | "rand_graph_key_bits"
            | "rand_graph_key_bits_n_free"
            | "entropic_key_bits"
            | "entropic_lower_bound_bits"
            | "entropic_public_coin_lower_bits"
    )
}

fn render_bound_rows(rows: &[BoundResult]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        let value = if is_bit_quantity(&r.name) {
            format!("{} bits", sig10(r.value_log2))
        } else {
            format!("{} (log2 {})", r.value_decimal, sig10(r.value_log2))
        };
        let mut line = format!("{:<width$}  {value}", r.name);
        if let Some(sat) = r.satisfied {
            line.push_str(if sat {
                "  [key length sufficient]"
            } else {
                "  [KEY LENGTH INSUFFICIENT]"
            });
        }
        if let Some(note) = &r.note {
            line.push_str(&format!("  ({note})"));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn bounds_cmd(args: &BoundsArgs, as_json: bool) -> Result<String> {
    if args.fig2 {
        let n_bits = args
            .n
            .ok_or_else(|| Error::InvalidQuery("--fig2 needs the message length --n".into()))?;
        if !(n_bits > 0.0 && n_bits <= 1e12) {
            return Err(Error::InvalidQuery(format!(
                "message length must be in (0, 10^12] bits, got {n_bits}"
            )));
        }
        let grid = match &args.grid {
            Some(spec) => parse_grid(spec)?,
            None => default_grid(),
        };
        let rows = fig2_curves(n_bits, &grid);
        if as_json {
            return Ok(json_payload(&json!({
                "n_bits": n_bits,
                "rows": serde_json::to_value(&rows).expect("rows serialize"),
            })));
        }
        let mut out = String::from("rho_log2,converse_bits,expander_bits,stream_bits\n");
        for row in &rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                sig10(row.rho_log2),
                sig10(row.converse_bits),
                sig10(row.expander_bits),
                sig10(row.stream_bits)
            ));
        }
        return Ok(out);
    }

    for (flag, value) in [("--rho", args.rho), ("--epsilon", args.epsilon)] {
        if let Some(v) = value {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidQuery(format!(
                    "{flag} must lie in (0, 1], got {v}"
                )));
            }
        }
    }
    let query = BoundQuery {
        n_bits: args.n,
        s_bits: args.s,
        rho_log2: args.rho.map(f64::log2),
        t_bits: args.t,
        tau_bits: args.tau,
        epsilon_log2: args.epsilon.map(f64::log2),
        leaked_bits: args.leaked,
        alpha: args.alpha,
        criterion: args.criterion.as_deref().map(parse_criterion).transpose()?,
    };
    let rows = query.evaluate()?;
    if as_json {
        return Ok(json_payload(&json!({
            "results": serde_json::to_value(&rows).expect("rows serialize"),
        })));
    }
    Ok(render_bound_rows(&rows))
}

fn trials_csv(summary: &StreamSweepSummary, rows: &[StreamTrial]) -> String {
    let mut out = String::from("seed,n,s,rho,pass\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.seed,
            summary.n,
            summary.s,
            sig10(row.rho),
            if row.pass { "pass" } else { "fail" }
        ));
    }
    out
}

fn summary_block(summary: &StreamSweepSummary) -> String {
    let mut block = KvBlock::new();
    block.push("n", summary.n.to_string());
    block.push("s", summary.s.to_string());
    block.push_f64("rho_target", summary.rho_target);
    block.push("trials", summary.trials.to_string());
    block.push("passes", summary.passes.to_string());
    match summary.pass_fraction {
        Some(f) => block.push_f64("pass_fraction", f),
        None => block.push("pass_fraction", "n/a"),
    }
    match summary.epsilon_implied_log2 {
        Some(e) => {
            block.push_f64("epsilon_implied_log2", e);
            block.push("epsilon_implied", render_decimal(e));
        }
        None => block.push("epsilon_implied", "n/a"),
    }
    block.render()
}

fn montecarlo_cmd(
    args: &MontecarloArgs,
    as_json: bool,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let (rows, summary) = montecarlo_stream(args.n, args.s, args.rho, args.trials, seed)?;
    if as_json {
        let payload = json_payload(&json!({
            "summary": serde_json::to_value(&summary).expect("serializes"),
            "trials": serde_json::to_value(&rows).expect("serializes"),
        }));
        emit(out, &payload)?;
        return Ok(ExitCode::SUCCESS);
    }
    let csv = trials_csv(&summary, &rows);
    let text = summary_block(&summary);
    match out {
        // --out captures the machine-readable rows; the summary stays on
        // stdout for the operator.
        Some(path) => {
            fs::write(path, csv)?;
            render::write_stdout(&text)?;
        }
        None => render::write_stdout(&format!("{text}\n{csv}"))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(args: &VerifyArgs, as_json: bool, seed: u64, out: Option<&Path>) -> Result<ExitCode> {
    let full = args.battery == BatterySize::Full;
    let size = if full { "full" } else { "small" };
    let checks = battery::run(full, seed);
    let passed = checks.iter().filter(|c| c.ok).count();
    let all_ok = passed == checks.len();

    let payload = if as_json {
        json_payload(&json!({
            "battery": size,
            "ok": all_ok,
            "passed": passed,
            "total": checks.len(),
            "checks": checks
                .iter()
                .map(|c| json!({
                    "index": c.index,
                    "name": c.name,
                    "ok": c.ok,
                    "detail": c.detail,
                }))
                .collect::<Vec<_>>(),
        }))
    } else {
        let name_width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut text = String::new();
        for c in &checks {
            let status = if c.ok { "ok  " } else { "FAIL" };
            text.push_str(&format!(
                "{status}  {:>2} {:<name_width$}  {}\n",
                c.index, c.name, c.detail
            ));
        }
        if all_ok {
            text.push_str(&format!("battery {size}: {passed}/{} ok\n", checks.len()));
        } else {
            text.push_str(&format!(
                "battery {size}: {passed}/{} ok, {} FAILED\n",
                checks.len(),
                checks.len() - passed
            ));
        }
        text
    };
    emit(out, &payload)?;
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}
