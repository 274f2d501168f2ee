use serde::Serialize;
use std::fmt;

/// A 1-based (line, column) position in a named source file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan {
            file: file.into(),
            line,
            column,
        }
    }

    /// Placeholder span for nodes synthesized by a transformation.
    pub fn generated() -> Self {
        SourceSpan {
            file: "<generated>".to_string(),
            line: 1,
            column: 1,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}
