//! The `neurodiff` command line.
//!
//! Exit codes: 0 success, 1 verification or evaluation failure (and runtime
//! errors), 2 usage error. Reports go to stdout as JSON (`gen`, `verify`,
//! `eval`) or CSV (`stats`).

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::ciphers::{Block, CipherId};
use crate::datafmt::open_dataset;
use crate::diffstats::{mc_transition_prob, rank_output_diffs, sbox_ddt, Sbox};
use crate::evaluator::{accuracy_ci, evaluate, DEFAULT_THRESHOLD};
use crate::manifest::{sidecar_path, RunManifest};
use crate::rng::{Domain, StreamRng};
use crate::sampling::{
    generate_dataset_file, generate_group, un_arrange, Case, GenSpec, GroupSize, KeyMode,
};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "neurodiff",
    version,
    about = "Differential-neural distinguisher workbench"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a labeled dataset.
    Gen(GenArgs),
    /// Re-derive groups from the header and compare bit-exactly.
    Verify(VerifyArgs),
    /// Classical differential statistics.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Score a prediction file against a dataset.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CipherArg {
    Des,
    Chaskey,
    Present,
}

impl From<CipherArg> for CipherId {
    fn from(c: CipherArg) -> Self {
        match c {
            CipherArg::Des => CipherId::Des,
            CipherArg::Chaskey => CipherId::Chaskey,
            CipherArg::Present => CipherId::Present,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KeyModeArg {
    PerGroup,
    PerPair,
}

impl From<KeyModeArg> for KeyMode {
    fn from(k: KeyModeArg) -> Self {
        match k {
            KeyModeArg::PerGroup => KeyMode::PerGroup,
            KeyModeArg::PerPair => KeyMode::PerPair,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub cipher: CipherArg,
    #[arg(long)]
    pub rounds: u32,
    /// Group size m.
    #[arg(long, default_value_t = 1)]
    pub m: u16,
    /// Number of groups; alternatively give --case and --pairs.
    #[arg(long, conflicts_with_all = ["case", "pairs"])]
    pub groups: Option<u64>,
    /// 1: N/m groups from a budget of N pairs; 2: N groups of m pairs.
    #[arg(long, requires = "pairs", value_parser = clap::value_parser!(u8).range(1..=2))]
    pub case: Option<u8>,
    /// Pair budget N for --case.
    #[arg(long, requires = "case")]
    pub pairs: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Input difference as hex words, most significant first; defaults per cipher.
    #[arg(long)]
    pub delta: Option<String>,
    /// Basic-unit width ω.
    #[arg(long)]
    pub omega: Option<u16>,
    #[arg(long, value_enum, default_value_t = KeyModeArg::PerGroup)]
    pub key_mode: KeyModeArg,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Number of randomly chosen groups to re-derive.
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    /// Re-derive every group.
    #[arg(long)]
    pub all: bool,
    /// Seed for choosing the audited subset.
    #[arg(long, default_value_t = 0)]
    pub audit_seed: u64,
    /// Check that every positive pair of a zero-round dataset has difference Δ.
    #[arg(long)]
    pub soundness: bool,
    /// Key mode used at generation; read from the manifest when omitted.
    #[arg(long, value_enum)]
    pub key_mode: Option<KeyModeArg>,
}

#[derive(Subcommand, Debug)]
pub enum StatsCommand {
    /// S-box difference distribution table as CSV.
    Ddt {
        #[arg(long, value_enum)]
        cipher: CipherArg,
        /// DES S-box number 1..8; all eight when omitted.
        #[arg(long)]
        sbox: Option<usize>,
    },
    /// Monte Carlo estimate of one differential transition.
    Mcprob {
        #[command(flatten)]
        common: McArgs,
        #[arg(long)]
        dout: String,
    },
    /// Most frequent output differences.
    Rank {
        #[command(flatten)]
        common: McArgs,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long, value_enum)]
    pub cipher: CipherArg,
    #[arg(long)]
    pub rounds: u32,
    #[arg(long)]
    pub din: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

enum Outcome {
    Success,
    Failure,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::Failure) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Usage(_) | Error::Shape(_) | Error::RoundRange { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Stats(s) => cmd_stats(s, out),
        Command::Eval(a) => cmd_eval(a, out),
    }
}

fn emit(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(value).expect("json")
    )?;
    Ok(())
}

fn difference(cipher: CipherId, arg: Option<&str>) -> Result<Block> {
    match arg {
        Some(s) => cipher.parse_block(s),
        None => Ok(cipher.default_delta()),
    }
}

pub fn gen_spec(a: &GenArgs) -> Result<GenSpec> {
    let cipher = CipherId::from(a.cipher);
    let m = GroupSize::new(a.m)?;
    let groups = match (a.groups, a.case, a.pairs) {
        (Some(g), _, _) => g,
        (None, Some(1), Some(n)) => Case::One.group_count(n, m)?,
        (None, Some(_), Some(n)) => Case::Two.group_count(n, m)?,
        _ => return Err(Error::Usage("give --groups or --case with --pairs".into())),
    };
    let mut spec = GenSpec::new(cipher, a.rounds, m, groups, a.seed)?
        .with_delta(difference(cipher, a.delta.as_deref())?)?
        .with_key_mode(a.key_mode.into());
    if let Some(omega) = a.omega {
        spec = spec.with_omega(omega)?;
    }
    Ok(spec)
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<Outcome> {
    let spec = gen_spec(&a)?;
    let started = Instant::now();
    let summary = generate_dataset_file(&spec, &a.out, a.threads)?;
    let secs = started.elapsed().as_secs_f64();

    let mut manifest = RunManifest::new("gen");
    manifest.spec = Some(spec.clone());
    manifest.params = json!({ "threads": a.threads });
    manifest.wall_clock_secs = secs;
    manifest.output = Some(a.out.display().to_string());
    manifest.write(&sidecar_path(&a.out))?;

    emit(
        out,
        &json!({
            "output": a.out.display().to_string(),
            "spec": spec,
            "groups": summary.groups,
            "positives": summary.positives,
            "positive_fraction": summary.positive_fraction(),
            "seconds": secs,
            "groups_per_second": summary.groups as f64 / secs.max(1e-9),
        }),
    )?;
    Ok(Outcome::Success)
}

fn key_mode_for(data: &Path, flag: Option<KeyModeArg>) -> Result<KeyMode> {
    if let Some(k) = flag {
        return Ok(k.into());
    }
    let sidecar = sidecar_path(data);
    if sidecar.exists() {
        if let Some(spec) = RunManifest::read(&sidecar)?.spec {
            return Ok(spec.key_mode);
        }
    }
    Ok(KeyMode::default())
}

/// Indices audited by `verify`: everything, or a sorted random subset.
fn audit_indices(count: u64, samples: u64, all: bool, seed: u64) -> Vec<u64> {
    if all || samples >= count {
        return (0..count).collect();
    }
    let mut rng = StreamRng::new(seed, Domain::Audit, 0);
    let mut chosen = BTreeSet::new();
    while (chosen.len() as u64) < samples {
        chosen.insert(rng.below(count));
    }
    chosen.into_iter().collect()
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<Outcome> {
    let mut reader = open_dataset(&a.data)?;
    let header = reader.header().clone();
    let spec = GenSpec::from_header(&header, key_mode_for(&a.data, a.key_mode)?)?;

    let indices = audit_indices(header.group_count, a.samples, a.all, a.audit_seed);
    let mut first_mismatch = None;
    for &i in &indices {
        if reader.read_group(i)? != generate_group(&spec, i)? {
            first_mismatch = Some(i);
            break;
        }
    }

    let soundness = if a.soundness || header.rounds == 0 {
        if header.rounds != 0 {
            return Err(Error::Usage(
                "soundness mode needs a zero-round dataset".into(),
            ));
        }
        let delta = header.delta;
        let (mut pairs, mut sound, mut first_bad) = (0u64, 0u64, None);
        for (i, group) in reader.enumerate() {
            let group = group?;
            if group.label != 1 {
                continue;
            }
            for (c0, c1) in un_arrange(&group.tensor) {
                pairs += 1;
                if c0.xor(c1)? == delta {
                    sound += 1;
                } else if first_bad.is_none() {
                    first_bad = Some(i as u64);
                }
            }
        }
        Some(json!({
            "positive_pairs": pairs,
            "sound_pairs": sound,
            "fraction": if pairs == 0 { 1.0 } else { sound as f64 / pairs as f64 },
            "first_unsound_group": first_bad,
        }))
    } else {
        None
    };
    let unsound = soundness
        .as_ref()
        .is_some_and(|s| s["first_unsound_group"] != serde_json::Value::Null);
    let pass = first_mismatch.is_none() && !unsound;
    emit(
        out,
        &json!({
            "status": if pass { "pass" } else { "fail" },
            "groups": header.group_count,
            "checked": indices.len(),
            "first_mismatch": first_mismatch,
            "soundness": soundness,
        }),
    )?;
    Ok(if pass {
        Outcome::Success
    } else {
        Outcome::Failure
    })
}

fn cmd_stats(cmd: StatsCommand, out: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        StatsCommand::Ddt { cipher, sbox } => match (CipherId::from(cipher), sbox) {
            (CipherId::Present, None) => write!(out, "{}", sbox_ddt(&Sbox::present()).to_csv())?,
            (CipherId::Des, Some(n)) if (1..=8).contains(&n) => {
                write!(out, "{}", sbox_ddt(&Sbox::des(n - 1)?).to_csv())?
            }
            (CipherId::Des, None) => {
                for n in 0..8 {
                    writeln!(out, "# S{}", n + 1)?;
                    write!(out, "{}", sbox_ddt(&Sbox::des(n)?).to_csv())?;
                }
            }
            (CipherId::Des, Some(n)) => {
                return Err(Error::Usage(format!("DES S-box {n} not in 1..8")))
            }
            (CipherId::Present, Some(_)) => {
                return Err(Error::Usage("PRESENT has a single S-box".into()))
            }
            (CipherId::Chaskey, _) => {
                return Err(Error::Usage(
                    "Chaskey is an ARX design without S-boxes".into(),
                ))
            }
        },
        StatsCommand::Mcprob { common, dout } => {
            let cipher = CipherId::from(common.cipher);
            let din = difference(cipher, common.din.as_deref())?;
            let dout = cipher.parse_block(&dout)?;
            let est = mc_transition_prob(
                cipher,
                din,
                dout,
                common.rounds,
                common.trials,
                common.seed,
                common.threads,
            )?;
            writeln!(out, "cipher,rounds,din,dout,trials,hits,p_hat,std_err")?;
            writeln!(
                out,
                "{cipher},{},\"{}\",\"{}\",{},{},{:.9e},{:.9e}",
                common.rounds,
                cipher.format_block(din),
                cipher.format_block(dout),
                est.trials,
                est.hits,
                est.p_hat,
                est.std_err
            )?;
        }
        StatsCommand::Rank { common, top_k } => {
            let cipher = CipherId::from(common.cipher);
            let din = difference(cipher, common.din.as_deref())?;
            let ranked = rank_output_diffs(
                cipher,
                din,
                common.rounds,
                common.trials,
                common.seed,
                top_k,
                common.threads,
            )?;
            writeln!(out, "rank,dout,count,p_hat")?;
            for (i, (d, n)) in ranked.iter().enumerate() {
                writeln!(
                    out,
                    "{},\"{}\",{},{:.9e}",
                    i + 1,
                    cipher.format_block(*d),
                    n,
                    *n as f64 / common.trials as f64
                )?;
            }
        }
    }
    Ok(Outcome::Success)
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<Outcome> {
    let report = evaluate(&a.data, &a.pred, a.threshold)?;
    let (lo, hi) = accuracy_ci(&report);
    let mut value = serde_json::to_value(report).expect("report serializes");
    value["ci95_low"] = json!(lo);
    value["ci95_high"] = json!(hi);
    emit(out, &value)?;
    Ok(Outcome::Success)
}
