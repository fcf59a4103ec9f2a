use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abwscl_core::corpus;
use abwscl_core::dsl::{LoadError, Program};
use abwscl_core::engine::{run, Engine, Scheduler, Termination};
use abwscl_core::export::{export_bpel, export_cdl, export_wsdl, ExportError, ExportOptions, Exported, DEFAULT_BASE_URI};
use abwscl_core::interaction::{composable, BoundaryKind, CheckError, Side, Verdict};
use abwscl_core::scenario::{creates, default_depth, side_pair};
use abwscl_core::term::ActorKind;
use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_STEP_LIMIT: u8 = 3;
const EXIT_INCOMPATIBLE: u8 = 4;
const EXIT_OVERLAP: u8 = 5;
const EXIT_KIND: u8 = 6;

#[derive(Parser)]
#[command(name = "abwscl", version, about = "Simulate, check and export AB-WSCL web service compositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a composition until it is quiescent and print the trace.
    Run {
        /// Corpus files; the bundled buying-books corpus when omitted.
        files: Vec<PathBuf>,
        /// WSC to instantiate.
        #[arg(long, default_value = corpus::ENTRY)]
        entry: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
        /// Trace file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether two sides compose across a boundary.
    Check {
        side_a: String,
        side_b: String,
        #[arg(value_parser = parse_boundary)]
        boundary: BoundaryKind,
        files: Vec<PathBuf>,
        /// Visible steps to explore; 2 x the methods of both sides when omitted.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        depth: Option<u64>,
        /// Also write the verdict record as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a WSDL, WS-BPEL or WS-CDL skeleton.
    Export {
        target: Target,
        name: String,
        files: Vec<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value = DEFAULT_BASE_URI)]
        base_uri: String,
    },
    /// Parse and validate corpus files.
    Validate { files: Vec<PathBuf> },
    /// List the bundled corpus, or write it to a directory.
    Corpus {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Wsdl,
    Bpel,
    Cdl,
}

fn parse_boundary(s: &str) -> Result<BoundaryKind, String> {
    BoundaryKind::parse(s).ok_or_else(|| format!("expected one of wso-ws, ws-wso, ws-ws, wso-wso, got `{s}`"))
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::new(EXIT_INVALID, format!("{e:#}"))
    }
}

fn load(files: &[PathBuf]) -> Result<Program, Failure> {
    if files.is_empty() {
        return Ok(corpus::program());
    }
    let mut sources = Vec::new();
    for f in files {
        let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        sources.push((f.display().to_string(), text));
    }
    Program::from_sources(sources.iter().map(|(n, s)| (n.as_str(), s.as_str()))).map_err(|e| match e {
        LoadError::Invalid(diags) => {
            Failure::new(EXIT_INVALID, diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))
        }
        other => Failure::new(EXIT_INVALID, other.to_string()),
    })
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_run(files: &[PathBuf], entry: &str, seed: u64, max_steps: u64, out: Option<&Path>) -> Result<u8, Failure> {
    let program = load(files)?;
    if program.get(entry).is_none_or(|d| d.kind != ActorKind::WSC) {
        return Err(Failure::new(EXIT_UNKNOWN, format!("no WSC named `{entry}`")));
    }
    let initial = corpus::initial_configuration(&program, entry)
        .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?
        .expect("entry checked above");
    let engine = Engine::new(program);
    let trace = run(&engine, &initial, Scheduler::fair(seed), max_steps as usize);
    write_or_print(out, &trace.to_text())?;
    Ok(match trace.termination {
        Termination::Quiescent => EXIT_OK,
        Termination::StepLimitReached => EXIT_STEP_LIMIT,
    })
}

fn check_failure(e: CheckError) -> Failure {
    match e {
        CheckError::UnknownBehavior(_) => Failure::new(EXIT_UNKNOWN, e.to_string()),
        other => Failure::new(EXIT_KIND, other.to_string()),
    }
}

fn cmd_check(
    files: &[PathBuf],
    a: &str,
    b: &str,
    boundary: BoundaryKind,
    depth: Option<u64>,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let program = load(files)?;
    let depth = match depth {
        Some(d) => d as usize,
        None => default_depth(&program, a, b).map_err(check_failure)?,
    };
    let (pa, pm) = side_pair(&program, a, b, boundary).map_err(check_failure)?;
    let report = composable(&Engine::new(program), &pa, &pm, depth).map_err(check_failure)?;

    let (verdict, witness, code) = match &report.verdict {
        Verdict::Composable => ("Composable", None, EXIT_OK),
        Verdict::MemberOverlap(_) => ("MemberOverlap", None, EXIT_OVERLAP),
        Verdict::Incompatible(side, w) => ("Incompatible", Some((*side, w)), EXIT_INCOMPATIBLE),
    };
    println!("{verdict}: {a} / {b} at {boundary}, depth {depth}, {} sequences explored", report.explored);
    if let Verdict::MemberOverlap(addrs) = &report.verdict {
        let list: Vec<String> = addrs.iter().map(ToString::to_string).collect();
        println!("shared members: {}", list.join(", "));
    }
    if let Some((side, w)) = witness {
        let who = match side {
            Side::A => a,
            Side::M => b,
        };
        println!("witness ({who} side, no dual on the other): {w}");
    }
    if report.truncated {
        println!("note: exploration hit the state budget; the verdict is partial");
    }
    if let Some(path) = out {
        let record = json!({
            "verdict": verdict,
            "side_a": a,
            "side_b": b,
            "boundary": boundary.name(),
            "depth": depth,
            "witness": witness.map(|(_, w)| w.steps.iter().map(ToString::to_string).collect::<Vec<_>>()),
            "witness_side": witness.map(|(s, _)| if s == Side::A { a } else { b }),
            "sequences_explored": report.explored,
            "truncated": report.truncated,
        });
        let text = serde_json::to_string_pretty(&record).context("encoding verdict")? + "\n";
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(code)
}

fn export_failure(e: ExportError) -> Failure {
    Failure::new(EXIT_KIND, e.to_string())
}

fn cmd_export(files: &[PathBuf], target: Target, name: &str, out: &Path, base_uri: &str) -> Result<u8, Failure> {
    let program = load(files)?;
    let def = program.get(name).ok_or_else(|| Failure::new(EXIT_UNKNOWN, format!("unknown behavior `{name}`")))?;
    let opts = ExportOptions { base_uri: base_uri.to_string() };
    let (exported, file): (Exported, String) = match target {
        Target::Wsdl => (export_wsdl(&program, def, &opts).map_err(export_failure)?, format!("{name}.wsdl")),
        Target::Bpel => (export_bpel(&program, def, &opts).map_err(export_failure)?, format!("{name}.bpel.xml")),
        Target::Cdl => {
            if def.kind != ActorKind::WSC {
                return Err(export_failure(ExportError::NotAWSC(name.to_string())));
            }
            let partners: Vec<_> = creates(def).filter_map(|b| program.get(b)).filter(|d| d.kind == ActorKind::WS).collect();
            let [ws1, ws2] = partners.as_slice() else {
                return Err(Failure::new(EXIT_KIND, format!("{name} does not create exactly two WSs")));
            };
            (export_cdl(&program, def, ws1, ws2, &opts).map_err(export_failure)?, format!("{name}.cdl.xml"))
        }
    };
    for d in &exported.diagnostics {
        eprintln!("warning: {d}");
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(file);
    fs::write(&path, exported.to_xml()).with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}

fn cmd_validate(files: &[PathBuf]) -> Result<u8, Failure> {
    let program = load(files)?;
    println!("ok: {} definitions", program.defs().len());
    Ok(EXIT_OK)
}

fn cmd_corpus(out: Option<&Path>) -> Result<u8, Failure> {
    match out {
        None => {
            for (name, _) in corpus::FILES {
                println!("{name}");
            }
        }
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, text) in corpus::FILES {
                let path = dir.join(name);
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                println!("{}", path.display());
            }
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { files, entry, seed, max_steps, out } => cmd_run(files, entry, *seed, *max_steps, out.as_deref()),
        Command::Check { side_a, side_b, boundary, files, depth, out } => {
            cmd_check(files, side_a, side_b, *boundary, *depth, out.as_deref())
        }
        Command::Export { target, name, files, out, base_uri } => cmd_export(files, *target, name, out, base_uri),
        Command::Validate { files } => cmd_validate(files),
        Command::Corpus { out } => cmd_corpus(out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
