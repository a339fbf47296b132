use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::{Error, Result};

/// An ordered set of distinct symbol labels.
///
/// The construction order is canonical: it fixes lexicographic tuple order and
/// every tie-break downstream.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet(Arc<[String]>);

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if symbols.len() > 1 << 16 {
            return Err(Error::AlphabetTooLarge(symbols.len()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(Error::InvalidSymbol(s.clone()));
            }
            if symbols[..i].contains(s) {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self(symbols.into()))
    }

    /// Symbols `"0"`, `"1"`, ..., `"k-1"`.
    pub fn indexed(k: usize) -> Self {
        Self::new((0..k.max(1)).map(|i| i.to_string())).expect("indexed alphabet is valid")
    }

    pub fn binary() -> Self {
        Self::indexed(2)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.0.iter().position(|s| s == symbol)
    }
}
