//! SQL parsing, simplification, rendering and execution-equivalence checks.

pub mod ast;
mod equivalence;
pub mod lexer;
mod parser;
mod passes;
mod render;

pub use equivalence::{check_equivalence, compare_results, EquivalenceError, Side, Verdict};
pub use parser::parse_sql;
pub use passes::simplify;
pub use render::{ident, render, render_expr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("SQL parse error at byte {position}: {message}")]
pub struct SqlParseError {
    /// Byte offset in the source text.
    pub position: usize,
    pub message: String,
}

impl SqlParseError {
    pub fn new(position: usize, message: impl Into<String>) -> SqlParseError {
        SqlParseError { position, message: message.into() }
    }
}

/// Parse, simplify and render in one step.
pub fn simplify_sql(sql: &str) -> Result<String, SqlParseError> {
    Ok(render(&simplify(&parse_sql(sql)?)))
}
