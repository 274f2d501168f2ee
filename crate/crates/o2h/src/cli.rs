//! Batch driver: parse → analyze → outline → plan → emit, plus the verify,
//! dump, report, and enumerate entry points.
//!
//! Exit codes: 0 on success, 1 when diagnostics were reported (nothing is
//! written), 2 on an internal invariant violation.

use crate::diag::{Diagnostic, ErrorCode};
use crate::parser::parse_source;
use crate::report::report_json;
use crate::sim::{self, Bindings, RunOptions};
use crate::validate::validate_subset;
use crate::{analysis, translate_source, validate, verify_source};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Translate,
    Verify,
    DumpAst,
    DumpTimeline,
    Report,
    Enumerate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Json,
}

/// One resolved invocation of the driver.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub input_path: PathBuf,
    pub output_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub inputs_path: Option<PathBuf>,
    pub zero_init: bool,
    pub dump_ast: bool,
    pub dump_timeline: bool,
    pub max_plans: u64,
    pub report_format: ReportFormat,
}

#[derive(Parser, Debug)]
#[command(
    name = "o2h",
    about = "Translate OpenMP-marked C-subset programs to HMPP directives and verify the result"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Translate a source file and write the HMPP version.
    Translate {
        input: PathBuf,
        /// Output path for the translated program.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Also write the plan report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the parsed AST as JSON before translating.
        #[arg(long)]
        dump_ast: bool,
        /// Print the access timelines as JSON before translating.
        #[arg(long)]
        dump_timeline: bool,
    },
    /// Translate in memory, then check the transformed program against the
    /// sequential semantics of the original.
    Verify {
        input: PathBuf,
        /// JSON bindings for externally read scalars and array fills.
        #[arg(long)]
        inputs: PathBuf,
        /// Initialize declared arrays to zero.
        #[arg(long)]
        zero_init: bool,
    },
    /// Print the parsed AST as JSON.
    DumpAst { input: PathBuf },
    /// Print per-variable access timelines as JSON.
    DumpTimeline { input: PathBuf },
    /// Print the transfer-plan report as JSON.
    Report {
        input: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Exhaustively search small plan spaces for the minimum transfer volume.
    Enumerate {
        input: PathBuf,
        /// JSON bindings for externally read scalars and array fills.
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// Initialize declared arrays to zero.
        #[arg(long)]
        zero_init: bool,
        /// Abort when the plan space exceeds this many candidates.
        #[arg(long, default_value_t = 1_000_000)]
        max_plans: u64,
    },
}

impl RunConfig {
    fn from_cli(cli: Cli) -> RunConfig {
        let mut config = RunConfig {
            mode: Mode::Translate,
            input_path: PathBuf::new(),
            output_path: None,
            report_path: None,
            inputs_path: None,
            zero_init: false,
            dump_ast: false,
            dump_timeline: false,
            max_plans: 1_000_000,
            report_format: ReportFormat::Json,
        };
        match cli.command {
            Command::Translate {
                input,
                output,
                report,
                dump_ast,
                dump_timeline,
            } => {
                config.mode = Mode::Translate;
                config.input_path = input;
                config.output_path = Some(output);
                config.report_path = report;
                config.dump_ast = dump_ast;
                config.dump_timeline = dump_timeline;
            }
            Command::Verify {
                input,
                inputs,
                zero_init,
            } => {
                config.mode = Mode::Verify;
                config.input_path = input;
                config.inputs_path = Some(inputs);
                config.zero_init = zero_init;
            }
            Command::DumpAst { input } => {
                config.mode = Mode::DumpAst;
                config.input_path = input;
            }
            Command::DumpTimeline { input } => {
                config.mode = Mode::DumpTimeline;
                config.input_path = input;
            }
            Command::Report { input, report } => {
                config.mode = Mode::Report;
                config.input_path = input;
                config.report_path = report;
            }
            Command::Enumerate {
                input,
                inputs,
                zero_init,
                max_plans,
            } => {
                config.mode = Mode::Enumerate;
                config.input_path = input;
                config.inputs_path = inputs;
                config.zero_init = zero_init;
                config.max_plans = max_plans;
            }
        }
        config
    }
}

fn exit_code_for(diags: &[Diagnostic]) -> i32 {
    if diags
        .iter()
        .any(|d| matches!(d.code, ErrorCode::AnchorLost | ErrorCode::Internal))
    {
        2
    } else {
        1
    }
}

fn report_diags(diags: &[Diagnostic]) -> i32 {
    for d in diags {
        eprintln!("{d}");
    }
    exit_code_for(diags)
}

fn read_input(path: &Path) -> Result<(String, String), Diagnostic> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Diagnostic::new(
            crate::SourceSpan::new(path.display().to_string(), 1, 1),
            ErrorCode::Parse,
            format!("cannot read `{}`: {e}", path.display()),
        )
    })?;
    Ok((text, path.display().to_string()))
}

fn load_options(config: &RunConfig) -> Result<RunOptions, Diagnostic> {
    let bindings = match &config.inputs_path {
        Some(path) => {
            let (text, name) = read_input(path)?;
            Bindings::parse(&text, &name)?
        }
        None => Bindings::default(),
    };
    Ok(RunOptions {
        zero_init: config.zero_init,
        bindings,
        ..Default::default()
    })
}

/// Run one driver invocation; never panics on malformed input.
pub fn run(config: RunConfig) -> i32 {
    match run_inner(&config) {
        Ok(code) => code,
        Err(diags) => report_diags(&diags),
    }
}

fn run_inner(config: &RunConfig) -> Result<i32, Vec<Diagnostic>> {
    let (source, file) = read_input(&config.input_path).map_err(|d| vec![d])?;
    match config.mode {
        Mode::Translate => {
            let translation = translate_source(&source, &file)?;
            if config.dump_ast {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&translation.unit).expect("ast serializes")
                );
            }
            if config.dump_timeline {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&translation.timelines)
                        .expect("timelines serialize")
                );
            }
            let output_path = config.output_path.as_ref().expect("translate requires -o");
            write_file(output_path, &translation.output)?;
            if let Some(report_path) = &config.report_path {
                write_file(report_path, &report_json(&translation.plan))?;
            }
            Ok(0)
        }
        Mode::Verify => {
            let opts = load_options(config).map_err(|d| vec![d])?;
            let outcome = verify_source(&source, &file, &opts)?;
            if outcome.equivalent {
                println!(
                    "EQUIVALENT, uploads={} downloads={} stale={}",
                    outcome.stats.uploads,
                    outcome.stats.downloads,
                    outcome.stats.stale_reads.len()
                );
                Ok(0)
            } else {
                eprintln!(
                    "NOT EQUIVALENT, uploads={} downloads={} stale={}",
                    outcome.stats.uploads,
                    outcome.stats.downloads,
                    outcome.stats.stale_reads.len()
                );
                for m in &outcome.mismatches {
                    eprintln!("  {m}");
                }
                for s in &outcome.stats.stale_reads {
                    eprintln!("  stale {:?} of `{}` at {}", s.direction, s.var, s.site);
                }
                Ok(1)
            }
        }
        Mode::DumpAst => {
            let unit = parse_source(&source, &file).map_err(|d| vec![d])?;
            println!(
                "{}",
                serde_json::to_string_pretty(&unit).expect("ast serializes")
            );
            Ok(0)
        }
        Mode::DumpTimeline => {
            let unit = parse_source(&source, &file).map_err(|d| vec![d])?;
            let diags = validate_subset(&unit);
            if !diags.is_empty() {
                return Err(diags);
            }
            let blocks = validate::find_gpu_blocks(&unit);
            let timelines = analysis::build_access_timeline(&unit, &blocks);
            println!(
                "{}",
                serde_json::to_string_pretty(&timelines).expect("timelines serialize")
            );
            Ok(0)
        }
        Mode::Report => {
            let translation = translate_source(&source, &file)?;
            let text = report_json(&translation.plan);
            match &config.report_path {
                Some(path) => write_file(path, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Mode::Enumerate => {
            let opts = load_options(config).map_err(|d| vec![d])?;
            let unit = parse_source(&source, &file).map_err(|d| vec![d])?;
            let diags = validate_subset(&unit);
            if !diags.is_empty() {
                return Err(diags);
            }
            let outcome = sim::enumerate_legal_plans(&unit, &opts, config.max_plans)
                .map_err(|e| vec![e.into_diagnostic()])?;
            let translation = translate_source(&source, &file)?;
            let reparsed =
                parse_source(&translation.output, "<emitted>").map_err(|d| vec![d])?;
            let planned = sim::count_transfers(&reparsed, &opts)
                .map_err(|e| vec![e.into_diagnostic()])?;
            let planned_volume = planned.total_bytes();
            let summary = serde_json::json!({
                "plans_considered": outcome.plans_considered,
                "legal_plans": outcome.legal_plans,
                "min_volume_bytes": outcome.min_volume,
                "planned_volume_bytes": planned_volume,
                "optimal": outcome.min_volume == Some(planned_volume),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serializes")
            );
            Ok(0)
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), Vec<Diagnostic>> {
    std::fs::write(path, content).map_err(|e| {
        vec![Diagnostic::new(
            crate::SourceSpan::new(path.display().to_string(), 1, 1),
            ErrorCode::Parse,
            format!("cannot write `{}`: {e}", path.display()),
        )]
    })
}

/// Entry point for the `o2h` binary.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    run(RunConfig::from_cli(cli))
}
