//! The AB-WSCL surface language: lexer, parser, pretty-printer, validator,
//! expression evaluator and actor instantiation.

pub mod ast;
pub mod eval;
mod exec;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use ast::{Action, BehaviorDefinition, Expr, MethodDefinition, Param, Span, TypeName, VarDecl};
pub use eval::{eval, eval_guard, EvalError};
pub use exec::{default_value, instantiate, run_locals, InstantiateError};
pub use parser::{parse_expr, parse_program};
pub use pretty::pretty_program;
pub use validate::{validate, Diagnostic, DiagnosticKind};

use crate::term::ActorKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SyntaxError {
    pub span: Span,
    pub expected: String,
    pub found: Option<String>,
}

impl SyntaxError {
    pub fn new(span: Span, expected: impl Into<String>) -> Self {
        SyntaxError { span, expected: expected.into(), found: None }
    }

    pub fn found(mut self, found: impl Into<String>) -> Self {
        self.found = Some(found.into());
        self
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected {}", self.span, self.expected)?;
        if let Some(found) = &self.found {
            write!(f, ", found {found}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("{file}:{error}")]
    Syntax { file: String, error: SyntaxError },
    #[error("{} validation error(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Diagnostic>),
}

/// A validated set of behavior definitions, shared by engine and exporters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    defs: Arc<Vec<BehaviorDefinition>>,
    index: Arc<BTreeMap<String, usize>>,
}

impl Program {
    /// Builds a program without validating it.
    pub fn new(defs: Vec<BehaviorDefinition>) -> Self {
        let index = defs.iter().enumerate().map(|(i, d)| (d.name.clone(), i)).collect();
        Program { defs: Arc::new(defs), index: Arc::new(index) }
    }

    /// Parses and validates a single source text.
    pub fn parse(src: &str) -> Result<Self, LoadError> {
        Self::from_sources([("<input>", src)])
    }

    /// Parses every `(file name, text)` pair and validates the union.
    pub fn from_sources<'a>(sources: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, LoadError> {
        let mut defs = Vec::new();
        for (file, src) in sources {
            let parsed = parse_program(src).map_err(|error| LoadError::Syntax { file: file.to_string(), error })?;
            defs.extend(parsed);
        }
        let diags = validate(&defs);
        if !diags.is_empty() {
            return Err(LoadError::Invalid(diags));
        }
        Ok(Program::new(defs))
    }

    pub fn get(&self, name: &str) -> Option<&BehaviorDefinition> {
        self.index.get(name).map(|&i| &self.defs[i])
    }

    pub fn defs(&self) -> &[BehaviorDefinition] {
        &self.defs
    }

    pub fn of_kind(&self, kind: ActorKind) -> impl Iterator<Item = &BehaviorDefinition> {
        self.defs.iter().filter(move |d| d.kind == kind)
    }
}
