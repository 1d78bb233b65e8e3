//! Lexing, parsing and type checking of the C subset.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod typecheck;
pub mod types;

use thiserror::Error;

pub use ast::{Expr, ExprKind, Function, Program, Stmt, StmtKind};
pub use types::{CType, SourceLoc, TypeKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendError {
    #[error("{loc}: lex error: {message}")]
    Lex { loc: SourceLoc, message: String },
    #[error("{loc}: parse error: expected {expected}, found {found}")]
    Parse {
        loc: SourceLoc,
        expected: String,
        found: String,
    },
    #[error("{loc}: unsupported feature: {name}")]
    UnsupportedFeature { loc: SourceLoc, name: String },
    #[error("{loc}: undeclared variable `{name}`")]
    UndeclaredVariable { loc: SourceLoc, name: String },
    #[error("{loc}: redeclaration of `{name}`")]
    Redeclaration { loc: SourceLoc, name: String },
    #[error("{loc}: type error: {message}")]
    TypeError { loc: SourceLoc, message: String },
    #[error("{loc}: undefined label `{name}`")]
    UndefinedLabel { loc: SourceLoc, name: String },
}

impl FrontendError {
    pub fn loc(&self) -> &SourceLoc {
        match self {
            FrontendError::Lex { loc, .. }
            | FrontendError::Parse { loc, .. }
            | FrontendError::UnsupportedFeature { loc, .. }
            | FrontendError::UndeclaredVariable { loc, .. }
            | FrontendError::Redeclaration { loc, .. }
            | FrontendError::TypeError { loc, .. }
            | FrontendError::UndefinedLabel { loc, .. } => loc,
        }
    }
}

/// Tokenizes, parses and type checks a whole translation unit.
pub fn compile(source: &str, file: &str) -> Result<Program, FrontendError> {
    let tokens = lexer::tokenize(source, file)?;
    let program = parser::parse(&tokens)?;
    let functions = program
        .functions
        .into_iter()
        .map(typecheck::typecheck)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Program { functions })
}

/// Tokenizes and parses without type checking.
pub fn parse_source(source: &str, file: &str) -> Result<Program, FrontendError> {
    parser::parse(&lexer::tokenize(source, file)?)
}
