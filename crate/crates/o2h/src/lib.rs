//! o2h translates OpenMP-annotated programs in a small C subset into
//! HMPP-directive programs: marked loops are outlined into device codelets,
//! and a transfer plan decides where `advancedload`/`delegatestore`
//! directives go so that host/device data movement is minimized.
//!
//! The crate also ships the machinery used to check its own output without
//! a GPU: a sequential reference interpreter, a dual-memory interpreter that
//! tracks host and device copies (validity, staleness, transfer volume), and
//! a brute-force plan enumerator for minimality checks on small programs.
//!
//! The usual entry points are [`translate_source`] for the whole pipeline and
//! [`verify_source`] for the equivalence check; see `examples/` for one
//! runnable program per capability and `src/main.rs` for the `o2h` CLI.

pub mod analysis;
pub mod ast;
pub mod cli;
pub mod diag;
pub mod emit;
pub mod lexer;
pub mod outline;
pub mod parser;
pub mod plan;
pub mod pragma;
pub mod report;
pub mod sim;
pub mod span;
pub mod validate;

pub use diag::{Diagnostic, ErrorCode};
pub use span::SourceSpan;

use ast::TranslationUnit;
use outline::CodeletSpec;
use plan::TransferPlan;

/// Everything produced by one run of the translation pipeline.
#[derive(Clone, Debug)]
pub struct Translation {
    /// The parsed input program.
    pub unit: TranslationUnit,
    pub blocks: Vec<validate::GpuBlock>,
    pub timelines: analysis::Timelines,
    pub codelets: Vec<CodeletSpec>,
    pub plan: TransferPlan,
    /// The transformed program as an AST (codelets, callsites, directives).
    pub transformed: TranslationUnit,
    /// The transformed program rendered as source text.
    pub output: String,
}

/// Run parse → validate → analyze → outline → plan → emit on one source file.
pub fn translate_source(source: &str, file: &str) -> Result<Translation, Vec<Diagnostic>> {
    let unit = parser::parse_source(source, file).map_err(|d| vec![d])?;
    let diags = validate::validate_subset(&unit);
    if !diags.is_empty() {
        return Err(diags);
    }
    let blocks = validate::find_gpu_blocks(&unit);
    let timelines = analysis::build_access_timeline(&unit, &blocks);
    let (codelets, rewritten) = outline::outline_all(&unit, &blocks, &timelines);
    let plan = plan::build_plan(&unit, &codelets, &timelines);
    let transformed = emit::apply_plan(&rewritten, &codelets, &plan)
        .map_err(|d| vec![d])?;
    let output = emit::pretty_print(&transformed, &emit::EmitConfig::default());
    Ok(Translation {
        unit,
        blocks,
        timelines,
        codelets,
        plan,
        transformed,
        output,
    })
}

/// Outcome of comparing the dual-memory run of the emitted program against
/// the sequential run of the original.
#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub equivalent: bool,
    pub mismatches: Vec<String>,
    pub stats: sim::TransferStats,
}

/// Translate, re-parse the emitted text, and run both interpreters.
pub fn verify_source(
    source: &str,
    file: &str,
    opts: &sim::RunOptions,
) -> Result<VerifyOutcome, Vec<Diagnostic>> {
    let translation = translate_source(source, file)?;
    let sequential = sim::interpret_sequential(&translation.unit, opts).map_err(|e| vec![e.into_diagnostic()])?;
    let reparsed = parser::parse_source(&translation.output, "<emitted>").map_err(|d| vec![d])?;
    let dual = sim::interpret_dual(&reparsed, opts).map_err(|e| vec![e.into_diagnostic()])?;
    let mismatches = sim::compare_outcomes(&sequential, &dual);
    let equivalent = mismatches.is_empty() && dual.stats.stale_reads.is_empty();
    Ok(VerifyOutcome {
        equivalent,
        mismatches,
        stats: dual.stats,
    })
}
