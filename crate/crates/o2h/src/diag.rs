use crate::span::SourceSpan;
use serde::Serialize;
use std::fmt;

/// Stable error codes printed with every diagnostic. The full table is
/// documented in the README; tests assert on these, so the spelling is frozen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ErrorCode {
    Lex,
    Parse,
    Unsupported,
    NonCanonLoop,
    BadPragma,
    DynExtent,
    DimLimit,
    IndexWrite,
    NestedTarget,
    Undeclared,
    Redeclared,
    Type,
    NoMain,
    EmptyBlock,
    /// Internal invariant violation: a planned directive no longer resolves.
    AnchorLost,
    // Runtime codes reported by the interpreters.
    UninitRead,
    Oob,
    DivZero,
    SyncMissing,
    Explosion,
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Lex => "E_LEX",
            ErrorCode::Parse => "E_PARSE",
            ErrorCode::Unsupported => "E_UNSUPPORTED",
            ErrorCode::NonCanonLoop => "E_NONCANON_LOOP",
            ErrorCode::BadPragma => "E_BAD_PRAGMA",
            ErrorCode::DynExtent => "E_DYN_EXTENT",
            ErrorCode::DimLimit => "E_DIM_LIMIT",
            ErrorCode::IndexWrite => "E_INDEX_WRITE",
            ErrorCode::NestedTarget => "E_NESTED_TARGET",
            ErrorCode::Undeclared => "E_UNDECLARED",
            ErrorCode::Redeclared => "E_REDECLARED",
            ErrorCode::Type => "E_TYPE",
            ErrorCode::NoMain => "E_NO_MAIN",
            ErrorCode::EmptyBlock => "E_EMPTY_BLOCK",
            ErrorCode::AnchorLost => "E_ANCHOR_LOST",
            ErrorCode::UninitRead => "E_UNINIT_READ",
            ErrorCode::Oob => "E_OOB",
            ErrorCode::DivZero => "E_DIV0",
            ErrorCode::SyncMissing => "E_SYNC_MISSING",
            ErrorCode::Explosion => "E_EXPLOSION",
            ErrorCode::Internal => "E_INTERNAL",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One frontend finding, printed as `file:line:col: CODE message`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub code: ErrorCode,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: SourceSpan, code: ErrorCode, message: impl Into<String>) -> Self {
        Diagnostic {
            span,
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} {}", self.span, self.code, self.message)
    }
}

impl std::error::Error for Diagnostic {}
