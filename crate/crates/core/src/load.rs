//! Reading theory files into a compiled problem.

use std::path::{Path, PathBuf};

use crate::lang::{parse_theory, ParseError};
use crate::semantics::{Problem, ProblemError};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub fn load_problem<P: AsRef<Path>>(paths: &[P]) -> Result<Problem, LoadError> {
    let mut theories = Vec::new();
    for p in paths {
        let path = p.as_ref().to_path_buf();
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(source) => return Err(LoadError::Io { path, source }),
        };
        match parse_theory(&text) {
            Ok(t) => theories.push(t),
            Err(source) => return Err(LoadError::Parse { path, source }),
        }
    }
    Ok(Problem::compile(&theories)?)
}
