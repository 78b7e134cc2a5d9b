//! Command-line front end: learn piecewise functions and automata from
//! file-defined targets, run automata, export them and benchmark the
//! learner.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sblearn::gen::{random_sfa, random_target, sweep_target};
use sblearn::learner::{learn, LearnerReport};
use sblearn::sfa::make_sfa_teacher;
use sblearn::sfa_learner::{learn_sfa, SfaLearnerReport};
use sblearn::teacher::{full_break_link_set, make_simulated_teacher, Recorded, Strategy, Transcript, TranscriptEntry};
use sblearn::{Combine, Label, Piecewise, Rational, SymbolicAutomaton};

#[derive(Parser)]
#[command(name = "sblearn", version, about = "Exact learning of piecewise functions and symbolic automata over the rationals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a piecewise function from a simulated teacher and check the result.
    LearnPwf {
        /// Target representation JSON; omit with --random.
        target: Option<PathBuf>,
        /// Generate the target from --seed instead of reading a file.
        #[arg(long, conflicts_with = "target")]
        random: bool,
        /// Counterexample strategy: simplest, boundary, deep:N or random:SEED.
        #[arg(long, default_value = "simplest")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include every oracle call in the output.
        #[arg(long)]
        verbose: bool,
    },
    /// Learn an automaton from a simulated teacher and check the result.
    LearnSfa {
        /// Target automaton JSON; omit with --random.
        target: Option<PathBuf>,
        /// Generate a target with 2 to 6 states from --seed.
        #[arg(long, conflicts_with = "target")]
        random: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include every word membership query in the output.
        #[arg(long)]
        verbose: bool,
    },
    /// Run an automaton on a word of whitespace-separated rationals.
    Run { sfa: PathBuf, word: String },
    /// Print an automaton in Graphviz format.
    ExportDot {
        sfa: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn random targets over a grid of piece counts and endpoint sizes.
    Bench {
        /// Piece counts as LO..HI; powers of two in the range plus HI.
        #[arg(long, default_value = "2..64")]
        pieces: String,
        /// Endpoint bit sizes as LO..HI; powers of two in the range plus HI.
        #[arg(long, default_value = "4..32")]
        bits: String,
        /// Targets per grid cell.
        #[arg(long, default_value_t = 3)]
        reps: u64,
        #[arg(long, default_value = "simplest")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output format: csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Record wall time; makes the output differ between runs.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Why a command failed: bad input (exit 2) or a failed self-check (exit 1).
enum Failure {
    Input(anyhow::Error),
    Check(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::LearnPwf {
            target,
            random,
            strategy,
            seed,
            out,
            verbose,
        } => cmd_learn_pwf(target.as_deref(), random, strategy, seed, out.as_deref(), verbose),
        Command::LearnSfa {
            target,
            random,
            seed,
            out,
            verbose,
        } => cmd_learn_sfa(target.as_deref(), random, seed, out.as_deref(), verbose),
        Command::Run { sfa, word } => cmd_run(&sfa, &word),
        Command::ExportDot { sfa, out } => cmd_export_dot(&sfa, out.as_deref()),
        Command::Bench {
            pieces,
            bits,
            reps,
            strategy,
            seed,
            format,
            timing,
            out,
        } => cmd_bench(&pieces, &bits, reps, strategy, seed, &format, timing, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

#[derive(Serialize)]
struct PwfOutput<'a> {
    target: &'a Piecewise<Label>,
    strategy: String,
    verified: bool,
    report: &'a LearnerReport<Label>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transcript: Option<Vec<TranscriptEntry>>,
}

fn cmd_learn_pwf(target: Option<&Path>, random: bool, strategy: Strategy, seed: u64, out: Option<&Path>, verbose: bool) -> CmdResult {
    let target: Piecewise<Label> = match (target, random) {
        (Some(path), _) => read_json(path)?,
        (None, true) => random_target(&mut ChaCha8Rng::seed_from_u64(seed)),
        (None, false) => return Err(anyhow::anyhow!("give a target file or --random").into()),
    };
    let target = target.canonicalize();
    let (mq, eq) = make_simulated_teacher(&target, strategy);
    let log = Transcript::default();
    let mut mq = Recorded::new(mq, "mq", log.clone());
    let mut eq = Recorded::new(eq, "eq", log.clone());
    let report = learn(&mut mq, &mut eq).map_err(|e| Failure::Check(format!("learner failed: {e}")))?;
    let verified = report.result == target;
    let transcript = verbose.then(|| log.borrow().clone());
    emit_json(
        out,
        &PwfOutput {
            target: &target,
            strategy: strategy.to_string(),
            verified,
            report: &report,
            transcript,
        },
    )?;
    if !verified {
        return Err(Failure::Check(format!("learned {:?}, target {:?}", report.result, target)));
    }
    Ok(())
}

#[derive(Serialize)]
struct SfaOutput<'a> {
    target: &'a SymbolicAutomaton,
    verified: bool,
    report: &'a SfaLearnerReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    transcript: Option<Vec<TranscriptEntry>>,
}

fn cmd_learn_sfa(target: Option<&Path>, random: bool, seed: u64, out: Option<&Path>, verbose: bool) -> CmdResult {
    let target: SymbolicAutomaton = match (target, random) {
        (Some(path), _) => read_json(path)?,
        (None, true) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rand::Rng::gen_range(&mut rng, 2..=6);
            random_sfa(&mut rng, n, 4, 16)
        }
        (None, false) => return Err(anyhow::anyhow!("give a target file or --random").into()),
    };
    let (mq, mut eq) = make_sfa_teacher(&target);
    let log = Transcript::default();
    let mut mq = Recorded::new(mq, "word-mq", log.clone());
    let report = learn_sfa(&mut mq, &mut eq).map_err(|e| Failure::Check(format!("learner failed: {e}")))?;
    // certified by emptiness of the difference, not by the teacher's answer
    let verified = report.result.product(&target, Combine::Difference).is_empty();
    let transcript = verbose.then(|| log.borrow().clone());
    emit_json(
        out,
        &SfaOutput {
            target: &target,
            verified,
            report: &report,
            transcript,
        },
    )?;
    if !verified {
        return Err(Failure::Check("learned automaton has a different language".into()));
    }
    Ok(())
}

fn parse_word(text: &str) -> anyhow::Result<Vec<Rational>> {
    text.split_whitespace()
        .map(|t| {
            let q: Rational = t.parse().with_context(|| format!("bad letter {t:?}"))?;
            if !q.is_finite() {
                bail!("letter {t:?} is not finite");
            }
            Ok(q)
        })
        .collect()
}

fn cmd_run(sfa: &Path, word: &str) -> CmdResult {
    let a: SymbolicAutomaton = read_json(sfa)?;
    let w = parse_word(word)?;
    let (accepted, trace) = a.run(&w);
    println!("{}", if accepted { "accept" } else { "reject" });
    let names: Vec<&str> = trace.iter().map(|&s| a.names()[s].as_str()).collect();
    println!("{}", names.join(" -> "));
    Ok(())
}

fn cmd_export_dot(sfa: &Path, out: Option<&Path>) -> CmdResult {
    let a: SymbolicAutomaton = read_json(sfa)?;
    emit(out, &a.to_dot())?;
    Ok(())
}

/// `LO..HI` as the powers of two inside the range, plus both ends.
fn parse_grid(text: &str) -> anyhow::Result<Vec<u64>> {
    let (lo, hi) = text
        .split_once("..")
        .with_context(|| format!("expected LO..HI, got {text:?}"))?;
    let lo: u64 = lo.trim().parse().with_context(|| format!("bad range start in {text:?}"))?;
    let hi: u64 = hi.trim().parse().with_context(|| format!("bad range end in {text:?}"))?;
    if lo == 0 || lo > hi {
        bail!("range {text:?} must satisfy 1 <= LO <= HI");
    }
    let mut v = vec![lo];
    let mut p = lo.next_power_of_two();
    while p < hi {
        if p > lo {
            v.push(p);
        }
        p *= 2;
    }
    if hi > lo {
        v.push(hi);
    }
    Ok(v)
}

#[derive(Debug, Clone, Serialize)]
struct BenchmarkRecord {
    pieces: u64,
    bits: u64,
    seed: u64,
    strategy: String,
    size: u64,
    break_links: u64,
    mq_count: u64,
    eq_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<f64>,
}

#[derive(Serialize)]
struct FitSummary {
    targets: usize,
    mq_per_size_max: f64,
    mq_per_size_median: f64,
    /// Least-squares slope of mq_count against size.
    mq_size_slope: f64,
    eq_within_break_links: bool,
}

fn summarize(records: &[BenchmarkRecord]) -> FitSummary {
    let mut ratios: Vec<f64> = records.iter().map(|r| r.mq_count as f64 / r.size as f64).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let n = ratios.len();
    let median = if n == 0 {
        0.0
    } else if n % 2 == 1 {
        ratios[n / 2]
    } else {
        (ratios[n / 2 - 1] + ratios[n / 2]) / 2.0
    };
    let (sx, sy) = records
        .iter()
        .fold((0.0, 0.0), |(a, b), r| (a + r.size as f64, b + r.mq_count as f64));
    let (mx, my) = (sx / n.max(1) as f64, sy / n.max(1) as f64);
    let (cov, var) = records.iter().fold((0.0, 0.0), |(c, v), r| {
        let dx = r.size as f64 - mx;
        (c + dx * (r.mq_count as f64 - my), v + dx * dx)
    });
    FitSummary {
        targets: n,
        mq_per_size_max: ratios.last().copied().unwrap_or(0.0),
        mq_per_size_median: median,
        mq_size_slope: if var > 0.0 { cov / var } else { 0.0 },
        eq_within_break_links: records.iter().all(|r| r.eq_count <= r.break_links + 1),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(pieces: &str, bits: &str, reps: u64, strategy: Strategy, seed: u64, format: &str, timing: bool, out: Option<&Path>) -> CmdResult {
    if format != "csv" && format != "json" {
        return Err(anyhow::anyhow!("unknown format {format:?} (expected csv or json)").into());
    }
    let bit_grid = parse_grid(bits)?;
    let grid: Vec<(u64, u64)> = parse_grid(pieces)?
        .into_iter()
        .flat_map(|p| bit_grid.iter().flat_map(move |&b| (0..reps).map(move |_| (p, b))))
        .collect();
    let mut records: Vec<BenchmarkRecord> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(p, b))| {
            let session_seed = seed.wrapping_add(i as u64);
            let target = sweep_target(&mut ChaCha8Rng::seed_from_u64(session_seed), p as usize, b);
            let (mut mq, mut eq) = make_simulated_teacher(&target, strategy);
            let start = Instant::now();
            let report = learn(&mut mq, &mut eq).map_err(|e| format!("pieces={p} bits={b} seed={session_seed}: {e}"))?;
            let wall_ms = timing.then(|| start.elapsed().as_secs_f64() * 1000.0);
            if report.result != target {
                return Err(format!("pieces={p} bits={b} seed={session_seed}: wrong result"));
            }
            Ok(BenchmarkRecord {
                pieces: p,
                bits: b,
                seed: session_seed,
                strategy: strategy.to_string(),
                size: target.size(),
                break_links: full_break_link_set(&target).len() as u64,
                mq_count: report.mq_count,
                eq_count: report.eq_count,
                wall_ms,
            })
        })
        .collect::<Result<_, String>>()
        .map_err(Failure::Check)?;
    records.sort_by_key(|r| (r.pieces, r.bits, r.seed));
    let summary = summarize(&records);
    if format == "json" {
        #[derive(Serialize)]
        struct Bench<'a> {
            records: &'a [BenchmarkRecord],
            summary: &'a FitSummary,
        }
        emit_json(out, &Bench { records: &records, summary: &summary })?;
    } else {
        let mut text = String::from("pieces,bits,seed,strategy,size,break_links,mq_count,eq_count");
        text.push_str(if timing { ",wall_ms\n" } else { "\n" });
        for r in &records {
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{}",
                r.pieces, r.bits, r.seed, r.strategy, r.size, r.break_links, r.mq_count, r.eq_count
            ));
            if let Some(ms) = r.wall_ms {
                text.push_str(&format!(",{ms:.3}"));
            }
            text.push('\n');
        }
        emit(out, &text)?;
        eprintln!(
            "{} targets: mq/size max {:.3}, median {:.3}, slope {:.3}; eq within break links + 1: {}",
            summary.targets, summary.mq_per_size_max, summary.mq_per_size_median, summary.mq_size_slope, summary.eq_within_break_links
        );
    }
    if !summary.eq_within_break_links {
        return Err(Failure::Check("an equivalence query count exceeded break links + 1".into()));
    }
    Ok(())
}
