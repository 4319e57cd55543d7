use std::collections::HashSet;
use std::sync::OnceLock;

use crate::corpus::PaperRecord;

const STOPWORDS_FILE: &str = include_str!("../../data/stopwords_en.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS_FILE.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect())
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Lowercases, splits on non-alphabetic characters, and drops stopwords and
/// single-letter tokens.
pub fn tokenize_text(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= 2 && !is_stopword(t))
        .collect()
}

/// Title tokens followed by abstract tokens.
pub fn tokenize(record: &PaperRecord) -> Vec<String> {
    let mut tokens = tokenize_text(&record.title);
    tokens.extend(tokenize_text(&record.abstract_text));
    tokens
}
