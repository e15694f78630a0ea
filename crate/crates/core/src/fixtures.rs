//! Paradigm files bundled with the library.

use crate::format::{parse_str, ParadigmFile, ParseError};

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        /// Name and source text of every bundled file.
        pub const FIXTURES: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../fixtures/", $name, ".para")))),*
        ];
    };
}

bundled!(
    "english_weak_verb",
    "german_present",
    "german_full",
    "latin_adjectives",
    "russian_class1",
    "nuer_classes",
    "latin_deponent",
    "german_plurals",
    "german_plurals_learned",
    "spanish_present",
);

pub fn names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|f| f.0)
}

/// Source text by exact name, or by a prefix that matches one name only.
pub fn source(name: &str) -> Option<(&'static str, &'static str)> {
    if let Some(f) = FIXTURES.iter().find(|f| f.0 == name) {
        return Some(*f);
    }
    let mut hits = FIXTURES.iter().filter(|f| f.0.starts_with(name));
    match (hits.next(), hits.next()) {
        (Some(f), None) => Some(*f),
        _ => None,
    }
}

/// Parses a bundled file. Panics on an unknown name.
pub fn load(name: &str) -> Result<ParadigmFile, ParseError> {
    let (_, text) = source(name).unwrap_or_else(|| panic!("no bundled fixture `{name}`"));
    parse_str(text)
}
