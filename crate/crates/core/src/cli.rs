//! Command-line front end.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::compare::compare;
use crate::isa::{self, container};
use crate::oracle::cross_check;
use crate::report::{build_report, textual_report, ReportDocument};
use crate::service::{self, Session};
use crate::solver::Solver;
use crate::symexec::{execute_complete, template, Harness, RunResult, Side};
use crate::term::pretty;

#[derive(Parser, Debug)]
#[command(name = "duet", version, about = "Compare two versions of a small program symbolically")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SideArg {
    Pre,
    Post,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Assemble a source file into a CZB1 container (or disassemble one).
    Asm { input: PathBuf, output: PathBuf },
    /// Explore one program of a harness and print its terminal states as JSON.
    Run {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "pre")]
        side: SideArg,
    },
    /// Explore both programs, pair and diff their terminals, print a summary.
    Compare {
        config: PathBuf,
        /// Where to write the report document.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Serve a report over HTTP.
    Serve {
        report: PathBuf,
        #[arg(long, default_value_t = service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Serve the document only, without solver endpoints.
        #[arg(long)]
        static_only: bool,
    },
    /// Print a commented harness skeleton.
    Template,
    /// Cross-check a comparison against exhaustive concrete replay.
    Oracle { config: PathBuf },
}

fn load(config: &Path) -> Result<Harness> {
    Harness::load(config).with_context(|| format!("loading {}", config.display()))
}

fn solver_for(h: &Harness) -> Solver {
    Solver::new(h.config.solver_budget_bits)
}

/// JSON view of one exploration.
pub fn run_summary(r: &RunResult) -> serde_json::Value {
    let terminals: Vec<_> = r
        .terminals
        .iter()
        .map(|s| {
            json!({
                "node": s.node_id,
                "terminal": s.terminal,
                "constraints": s.constraints.iter().map(pretty).collect::<Vec<_>>(),
                "registers": s.regs.iter().map(pretty).collect::<Vec<_>>(),
                "effects": s.effects.iter().map(|(ch, log)| {
                    (ch.to_string(), json!(log.iter().map(|e| pretty(&e.payload)).collect::<Vec<_>>()))
                }).collect::<serde_json::Map<_, _>>(),
                "block_history": s.block_history,
                "witness": s.witness,
            })
        })
        .collect();
    json!({
        "side": r.side,
        "blocks": r.blocks,
        "cyclomatic": r.cyclomatic,
        "nodes": r.tree.len(),
        "discarded": r.discarded,
        "terminals": terminals,
    })
}

fn asm(input: &Path, output: &Path) -> Result<()> {
    let bytes = std::fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    if bytes.starts_with(container::MAGIC) {
        let p = container::decode(&bytes)?;
        std::fs::write(output, isa::disassemble(&p))?;
    } else {
        let text = String::from_utf8(bytes).context("source is not UTF-8")?;
        let p = isa::assemble(&text)?;
        std::fs::write(output, container::encode(&p))?;
    }
    Ok(())
}

/// Runs a parsed command line, returning the process exit status.
pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Asm { input, output } => asm(&input, &output)?,
        Command::Run { config, side } => {
            let h = load(&config)?;
            let side = match side {
                SideArg::Pre => Side::Pre,
                SideArg::Post => Side::Post,
            };
            let r = execute_complete(&h, side, &solver_for(&h))?;
            println!("{}", serde_json::to_string_pretty(&run_summary(&r))?);
        }
        Command::Compare { config, output } => {
            let h = load(&config)?;
            let cr = compare(&h, &solver_for(&h))?;
            let doc = build_report(&cr, &h);
            print!("{}", textual_report(&doc));
            if let Some(out) = output {
                std::fs::write(&out, doc.to_json()).with_context(|| format!("writing {}", out.display()))?;
            }
            if cr.counterexamples.as_ref().is_some_and(|c| !c.is_empty()) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Serve {
            report,
            port,
            host,
            static_only,
        } => {
            let text = std::fs::read_to_string(&report).with_context(|| format!("reading {}", report.display()))?;
            let doc = ReportDocument::from_json(&text).map_err(anyhow::Error::msg)?;
            let session = Session::new(doc, static_only).map_err(anyhow::Error::msg)?;
            let addr: SocketAddr = format!("{host}:{port}").parse().context("bad host or port")?;
            tokio::runtime::Runtime::new()?.block_on(service::serve(session, addr))?;
        }
        Command::Template => print!("{}", template()),
        Command::Oracle { config } => {
            let h = load(&config)?;
            let cr = compare(&h, &solver_for(&h))?;
            let check = cross_check(&h, &cr).map_err(anyhow::Error::msg)?;
            println!(
                "checked {} inputs; unreached: pre {}, post {}",
                check.inputs, check.uncovered[0], check.uncovered[1]
            );
            for m in &check.mismatches {
                println!("mismatch: {m}");
            }
            if !check.ok() {
                bail!("{} mismatches", check.mismatches.len());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
