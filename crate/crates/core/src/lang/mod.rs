//! Surface language: lexing, templates, parsing, printing and settings files.

pub mod ast;
pub mod lexer;
mod parser;
pub mod pretty;
pub mod settings;
pub mod template;
pub mod validate;

pub use ast::*;
pub use parser::{is_keyword, parse_constraint, parse_theory};
pub use validate::{has_errors, validate_problem, Diagnostic, Severity};
pub use settings::{load_settings, parse_settings, Mode, Settings, SettingsError, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}
