//! `subshift`: decide, construct and compile subshifts of finite type from JSON files.

mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use subshift::calculus::materialize;
use subshift::domino::{decide_domino, emptiness_certificate, Certificate, DEFAULT_BUDGET};
use subshift::ends::{estimate_ends, find_axial, periodic_point_pipeline};
use subshift::io::{self, FunctionFile, GroupFile, PatternFile};
use subshift::qip::{compile_pullback_sft, compile_qipair_sft, QipParams};
use subshift::sft::{render_svg, wang_to_sft};
use subshift::transfer::domino_transfer;
use subshift::{
    compile_derivative_sft, derivative, integrate, Error, Group, PatternSet, Verdict, Witness,
};

use manifest::RunManifest;

const EXIT_NONEMPTY: u8 = 0;
const EXIT_EMPTY: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_SOFTWARE: u8 = 70;

#[derive(Parser)]
#[command(
    name = "subshift",
    version,
    about = "Subshifts of finite type on finitely generated groups"
)]
struct Cli {
    /// Recorded in the run manifest; every command is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Node budget for backtracking searches.
    #[arg(long = "budget-nodes", global = true, default_value_t = DEFAULT_BUDGET)]
    budget_nodes: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GroupArg {
    #[arg(long)]
    group: PathBuf,
}

#[derive(Args)]
struct PairArgs {
    /// The group `G` the compiled SFT lives on.
    #[arg(long)]
    source: PathBuf,
    /// The group `H`.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 1)]
    n: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Decide emptiness; exit 0 nonempty, 1 empty, 2 unknown.
    Domino {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        patterns: PathBuf,
        /// Write the witness as SVG (ℤ² only).
        #[arg(long = "emit-svg")]
        emit_svg: Option<PathBuf>,
    },
    /// Count unbounded components outside B(n) within B(radius).
    Ends {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        radius: usize,
    },
    /// Search for an n-axial element.
    Axial {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        radius: usize,
    },
    /// Build and verify a periodic point on a multi-ended group.
    PeriodicPoint {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        patterns: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Compile the derivative SFT of n-Lipschitz maps G → H.
    CompileDerivative {
        #[command(flatten)]
        pair: PairArgs,
        /// Also list explicit forbidden patterns.
        #[arg(long = "materialize-patterns")]
        materialize_patterns: bool,
    },
    /// Compile the QI-pair SFT; with --radius, also run an emptiness certificate.
    CompileQipair {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Compile the pullback of an H-SFT to G; with --radius, also certify.
    CompilePullback {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        patterns: PathBuf,
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Decide an SFT on H through a quasi-isometric G.
    Transfer {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        patterns: PathBuf,
        /// Largest QI-pair constant to try.
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Evaluate ∫ df along `word` starting at `at`.
    Integrate {
        #[arg(long)]
        function: PathBuf,
        #[arg(long, default_value = "")]
        at: String,
        #[arg(long, default_value = "")]
        word: String,
    },
    /// Convert Wang tiles to a pattern file on ℤ².
    Wang {
        #[arg(long)]
        tiles: PathBuf,
    },
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_)
            | Error::UnknownSymbol(_)
            | Error::InvalidGroup(_)
            | Error::InvalidPatternSet(_)
            | Error::MixedGroups => EXIT_USAGE,
            _ => EXIT_SOFTWARE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(Value, u8), Failure>;

fn read(path: &Path, m: &mut RunManifest) -> Result<String, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
    })?;
    m.input(path, &bytes);
    String::from_utf8(bytes).map_err(|_| Failure {
        code: EXIT_USAGE,
        message: format!("{}: not UTF-8", path.display()),
    })
}

fn load_group(path: &Path, m: &mut RunManifest) -> Result<Group, Failure> {
    let text = read(path, m)?;
    let f: GroupFile = io::parse_json(&text, &path.display().to_string())?;
    Ok(f.build()?)
}

fn load_patterns(path: &Path, group: &Group, m: &mut RunManifest) -> Result<PatternSet, Failure> {
    let text = read(path, m)?;
    let f: PatternFile = io::parse_json(&text, &path.display().to_string())?;
    Ok(f.build(group)?)
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Nonempty(_) => EXIT_NONEMPTY,
        Verdict::EmptyAt(_) => EXIT_EMPTY,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

fn echo_params(m: &mut RunManifest, p: &QipParams) {
    m.param("n", p.n);
    m.param("M", p.m);
    m.param("N", p.big_n);
    m.param("check_radius", p.check_radius);
}

fn compiled_json(ps: &PatternSet) -> Value {
    let a = ps.alphabet();
    json!({
        "radius": ps.defining_radius(),
        "alphabet_size": a.size().to_string(),
        "components": a.components.iter().map(|c| json!({"name": c.name, "size": c.size})).collect::<Vec<_>>(),
        "rules": ps.rules().iter().map(|r| json!({"name": r.name(), "support": r.support().len()})).collect::<Vec<_>>(),
    })
}

fn certify(
    ps: &PatternSet,
    radius: Option<usize>,
    budget: u64,
    m: &mut RunManifest,
) -> Result<Value, Failure> {
    let Some(r) = radius else {
        return Ok(Value::Null);
    };
    m.param("radius", r);
    match emptiness_certificate(ps, r, budget) {
        Ok((Certificate::EmptyAt(r), st)) => {
            m.nodes = Some(st.nodes);
            m.verdict = Some("empty".into());
            Ok(json!({"certificate": "empty", "radius": r}))
        }
        Ok((Certificate::Admissible(p), st)) => {
            m.nodes = Some(st.nodes);
            m.verdict = Some("admissible".into());
            Ok(json!({"certificate": "admissible", "radius": r, "cells": p.len()}))
        }
        Err(Error::SizeLimit(_)) => {
            m.verdict = Some("unknown".into());
            Ok(json!({"certificate": "unknown", "radius": r}))
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: &Cli, m: &mut RunManifest) -> Outcome {
    let budget = cli.budget_nodes;
    m.param("budget_nodes", budget);
    m.param("seed", cli.seed);
    match &cli.command {
        Command::Domino {
            group,
            patterns,
            emit_svg,
        } => {
            let g = load_group(&group.group, m)?;
            let ps = load_patterns(patterns, &g, m)?;
            let out = decide_domino(&ps, budget);
            m.verdict = Some(out.verdict.name().into());
            m.nodes = Some(out.nodes);
            if let (Some(path), Verdict::Nonempty(w)) = (emit_svg, &out.verdict) {
                let patch = match w {
                    Witness::Periodic(pc) => &pc.domain_data,
                    Witness::Patch(p) => p,
                };
                let svg = render_svg(patch, ps.alphabet())?;
                fs::write(path, svg).map_err(|e| Failure {
                    code: EXIT_SOFTWARE,
                    message: format!("{}: {e}", path.display()),
                })?;
            }
            Ok((
                io::outcome_json(&out, ps.alphabet()),
                verdict_code(&out.verdict),
            ))
        }
        Command::Ends { group, n, radius } => {
            let g = load_group(&group.group, m)?;
            m.param("n", n);
            m.param("radius", radius);
            let e = estimate_ends(&g, *n, *radius)?;
            let mut v = serde_json::to_value(&e).unwrap_or(Value::Null);
            v["count"] = json!(e.component_count);
            Ok((v, 0))
        }
        Command::Axial { group, n, radius } => {
            let g = load_group(&group.group, m)?;
            m.param("n", n);
            m.param("radius", radius);
            let ax = find_axial(&g, *n, *radius)?;
            Ok((
                json!({"g": g.show(&ax.g), "n": ax.n, "checked_range": ax.checked_range}),
                0,
            ))
        }
        Command::PeriodicPoint { group, patterns, n } => {
            let g = load_group(&group.group, m)?;
            let ps = load_patterns(patterns, &g, m)?;
            m.param("n", n);
            let (found, spent) = periodic_point_pipeline(&ps, *n, budget)?;
            m.nodes = Some(spent);
            let Some((ax, c)) = found else {
                m.verdict = Some("unknown".into());
                return Ok((json!({"verdict": "unknown", "nodes": spent}), EXIT_UNKNOWN));
            };
            m.verdict = Some("nonempty".into());
            Ok((
                json!({
                    "verdict": "nonempty",
                    "axial": g.show(&ax.g),
                    "period": g.show(&c.domain.period(&g)),
                    "power": c.power,
                    "m1": c.m1,
                    "m2": c.m2,
                    "domain_size": c.domain.members.len(),
                    "config": io::periodic_json(&c.config, ps.alphabet()),
                }),
                EXIT_NONEMPTY,
            ))
        }
        Command::CompileDerivative {
            pair,
            materialize_patterns,
        } => {
            let g = load_group(&pair.source, m)?;
            let h = load_group(&pair.target, m)?;
            m.param("n", pair.n);
            let ps = compile_derivative_sft(&g, &h, pair.n)?;
            let mut v = compiled_json(&ps);
            if *materialize_patterns {
                let explicit = materialize(&ps, 1 << 16)?;
                v["patterns"] =
                    serde_json::to_value(PatternFile::describe(&explicit)?).unwrap_or(Value::Null);
            }
            Ok((v, 0))
        }
        Command::CompileQipair { pair, radius } => {
            let g = load_group(&pair.source, m)?;
            let h = load_group(&pair.target, m)?;
            echo_params(m, &QipParams::new(&g, &h, pair.n));
            let ps = compile_qipair_sft(&g, &h, pair.n)?;
            let mut v = compiled_json(&ps);
            v["params"] = json!(QipParams::new(&g, &h, pair.n));
            v["certificate"] = certify(&ps, *radius, budget, m)?;
            Ok((v, 0))
        }
        Command::CompilePullback {
            pair,
            patterns,
            radius,
        } => {
            let g = load_group(&pair.source, m)?;
            let h = load_group(&pair.target, m)?;
            let ps_h = load_patterns(patterns, &h, m)?;
            echo_params(m, &QipParams::new(&g, &h, pair.n));
            let ps = compile_pullback_sft(&g, &h, pair.n, &ps_h)?;
            let mut v = compiled_json(&ps);
            v["params"] = json!(QipParams::new(&g, &h, pair.n));
            v["certificate"] = certify(&ps, *radius, budget, m)?;
            Ok((v, 0))
        }
        Command::Transfer {
            source,
            target,
            patterns,
            n,
        } => {
            let g = load_group(source, m)?;
            let h = load_group(target, m)?;
            let ps_h = load_patterns(patterns, &h, m)?;
            m.param("max_n", n);
            let t = domino_transfer(&g, &h, &ps_h, budget, *n, &decide_domino)?;
            if let Some(s) = t.stages.iter().rev().find(|s| s.pullback.is_some()) {
                echo_params(m, &s.params);
            }
            m.verdict = Some(t.outcome.verdict.name().into());
            m.nodes = Some(t.outcome.nodes);
            let mut v = io::outcome_json(&t.outcome, ps_h.alphabet());
            v["stages"] = json!(t.stages);
            Ok((v, verdict_code(&t.outcome.verdict)))
        }
        Command::Integrate { function, at, word } => {
            let text = read(function, m)?;
            let f: FunctionFile = io::parse_json(&text, &function.display().to_string())?;
            let fp = f.build()?;
            let g0 = fp.source.element(at)?;
            let w = fp.source.parse_word(word)?;
            m.param("at", at);
            m.param("word", word);
            let df = derivative(&fp)?;
            let value = integrate(&df, &g0, &w)?;
            Ok((json!({"value": fp.target.show(&value)}), 0))
        }
        Command::Wang { tiles } => {
            let text = read(tiles, m)?;
            let ts = io::parse_wang(&text)?;
            let ps = wang_to_sft(&ts)?;
            let v = json!({
                "group": GroupFile::describe(ps.group()),
                "patterns": PatternFile::describe(&ps)?,
            });
            Ok((v, 0))
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    manifest: &'a RunManifest,
    result: Value,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Domino { .. } => "domino",
        Command::Ends { .. } => "ends",
        Command::Axial { .. } => "axial",
        Command::PeriodicPoint { .. } => "periodic-point",
        Command::CompileDerivative { .. } => "compile-derivative",
        Command::CompileQipair { .. } => "compile-qipair",
        Command::CompilePullback { .. } => "compile-pullback",
        Command::Transfer { .. } => "transfer",
        Command::Integrate { .. } => "integrate",
        Command::Wang { .. } => "wang",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let mut m = RunManifest::new(command_name(&cli.command));
    match run(&cli, &mut m) {
        Ok((result, code)) => {
            m.finish();
            let report = Report {
                manifest: &m,
                result,
            };
            let text = serde_json::to_string_pretty(&report).expect("json");
            // A closed pipe downstream is not a failure of the run.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
