use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A located message produced by the tokenizer, parser, static checks or
/// simplifier. `line` and `column` are 1-based; a column of 0 means the
/// whole line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: u32,
    pub column: u32,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &str, line: u32, column: u32, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            line,
            column,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn lex(line: u32, column: u32, message: impl Into<String>) -> Self {
        Self::error(codes::LEX, line, column, message)
    }

    pub fn parse(line: u32, column: u32, message: impl Into<String>) -> Self {
        Self::error(codes::PARSE, line, column, message)
    }

    pub fn static_error(line: u32, message: impl Into<String>) -> Self {
        Self::error(codes::STATIC, line, 0, message)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if self.column > 0 {
            write!(
                f,
                "{}:{}: {sev}[{}]: {}",
                self.line, self.column, self.code, self.message
            )
        } else {
            write!(f, "{}: {sev}[{}]: {}", self.line, self.code, self.message)
        }
    }
}

/// Diagnostic codes.
pub mod codes {
    pub const LEX: &str = "LexError";
    pub const PARSE: &str = "ParseError";
    pub const STATIC: &str = "StaticError";
    pub const UNSUPPORTED: &str = "Unsupported";
    pub const INTERNAL: &str = "InternalError";
}

/// Sorts diagnostics by position, keeping the original order for ties.
pub(crate) fn sort(diags: &mut [Diagnostic]) {
    diags.sort_by_key(|d| (d.line, d.column));
}
