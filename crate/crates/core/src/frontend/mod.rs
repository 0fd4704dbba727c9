//! MiniOO front end: lexing, parsing, model extraction, and the persistent
//! facts format.
//!
//! MiniOO is a deliberately small single-inheritance language that still
//! exercises every relation the metrics need: inheritance, method calls,
//! attribute accesses and decision points. Other languages can feed the
//! analyzer through the facts format instead (see [`facts`]).

pub mod ast;
pub mod builder;
pub mod facts;
pub mod lexer;
pub mod parser;

use std::path::Path;

pub use builder::build_model;
pub use facts::{facts_from_json, facts_json, load_facts, save_facts, FactsError};
pub use lexer::{tokenize, LexError, Pos, Token, TokenKind};
pub use parser::ParseError;

use crate::model::DesignModel;
use ast::Program;

/// A set of MiniOO source files to analyze as one program.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceProgram {
    pub files: Vec<SourceFile>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
}

impl SourceProgram {
    pub fn single(path: impl Into<String>, text: impl Into<String>) -> Self {
        SourceProgram { files: vec![SourceFile { path: path.into(), text: text.into() }] }
    }

    pub fn read_files<P: AsRef<Path>>(paths: &[P]) -> Result<Self, FrontendError> {
        let mut files = Vec::new();
        for path in paths {
            let path = path.as_ref();
            let text = std::fs::read_to_string(path).map_err(|source| FrontendError::Io {
                file: path.display().to_string(),
                source,
            })?;
            files.push(SourceFile { path: path.display().to_string(), text });
        }
        Ok(SourceProgram { files })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FrontendError {
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: duplicate source path")]
    DuplicatePath { file: String },
    #[error("{file}: {source}")]
    Lex {
        file: String,
        #[source]
        source: LexError,
    },
    #[error("{file}: {source}")]
    Parse {
        file: String,
        #[source]
        source: ParseError,
    },
    /// Name-resolution and well-formedness failures while building the model.
    #[error("{file}:{pos}: {message}")]
    Model { file: String, message: String, pos: Pos },
}

/// Tokenize and parse every file of a program into one syntax tree.
/// Parsing is per file and deterministic: the same bytes always produce the
/// same tree.
pub fn parse_program(sources: &SourceProgram) -> Result<Program, FrontendError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut classes = Vec::new();
    for file in &sources.files {
        if !seen.insert(&file.path) {
            return Err(FrontendError::DuplicatePath { file: file.path.clone() });
        }
        let tokens = tokenize(&file.text)
            .map_err(|source| FrontendError::Lex { file: file.path.clone(), source })?;
        let parsed = parser::parse_file(&file.path, &tokens)
            .map_err(|source| FrontendError::Parse { file: file.path.clone(), source })?;
        classes.extend(parsed);
    }
    Ok(Program { classes })
}

/// Full pipeline: parse MiniOO sources and extract the design model.
pub fn model_from_sources(sources: &SourceProgram) -> Result<DesignModel, FrontendError> {
    build_model(&parse_program(sources)?)
}
