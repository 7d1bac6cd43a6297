//! Lexing, parsing and name resolution for the bit-oriented input language.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod resolve;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

pub use ast::Program;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub use resolve::{resolve, resolve_with, DeclId, DeclInfo, DeclKind, Resolved, ScopeTree, Ty};

/// A 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub pos: Pos,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, pos: Pos) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            pos,
        }
    }

    pub fn warning(message: impl Into<String>, pos: Pos) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message: message.into(),
            pos,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {}: {}", self.pos, sev, self.message)
    }
}

/// Program text plus where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub text: String,
    pub origin: String,
}

impl SourceProgram {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SourceProgram {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn in_memory(text: impl Into<String>) -> Self {
        Self::new(text, "<memory>")
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::new(text, path.display().to_string()))
    }
}

/// Runs the whole frontend: tokenize, parse and resolve.
pub fn compile(src: &SourceProgram) -> Result<Resolved, Vec<Diagnostic>> {
    compile_with(src, &BTreeMap::new())
}

/// Like [`compile`], with overrides for global `int` constants.
pub fn compile_with(
    src: &SourceProgram,
    overrides: &BTreeMap<String, i64>,
) -> Result<Resolved, Vec<Diagnostic>> {
    if src.text.trim().is_empty() {
        return Err(vec![Diagnostic::error("empty program", Pos::new(1, 1))]);
    }
    let tokens = tokenize(src)?;
    let program = parse(&tokens)?;
    resolve_with(program, overrides)
}

/// Error raised while executing a resolved program, with the chain of loop
/// iterations and calls that led to it (innermost last).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeError {
    pub message: String,
    pub pos: Pos,
    pub trace: Vec<String>,
}

impl RuntimeError {
    pub fn new(message: impl Into<String>, pos: Pos) -> Self {
        RuntimeError {
            message: message.into(),
            pos,
            trace: Vec::new(),
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.message.clone(), self.pos)
    }
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: error: {}", self.pos, self.message)?;
        for t in self.trace.iter().rev() {
            write!(f, "\n    {t}")?;
        }
        Ok(())
    }
}

impl std::error::Error for RuntimeError {}
