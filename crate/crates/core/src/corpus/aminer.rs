//! AMiner v1 line-prefix format and its JSON-Lines mirror.
//!
//! ```text
//! #index 5
//! #* A Title
//! #@ A. One;B. Two
//! #o Univ X;-
//! #t 2006
//! #c VLDB
//! #% 3
//! #! Some abstract
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::record::{PaperId, PaperRecord};
use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticKind {
    /// `#t` missing, unparsable, or not positive; record skipped.
    MalformedYear,
    /// `#index` missing or unparsable; record skipped.
    MalformedIndex,
    /// Same id seen earlier in the stream; record skipped.
    DuplicateId,
    /// Repeated `#%` id; duplicates removed, record kept.
    DuplicateReference,
    /// Record cites itself; reference removed, record kept.
    SelfReference,
    /// `#%` line with an unparsable id; line ignored.
    MalformedReference,
    /// Line with an unknown prefix; ignored.
    UnknownLine,
    /// JSON-Lines row that failed to decode; record skipped.
    MalformedJson,
}

impl DiagnosticKind {
    pub fn skips_record(&self) -> bool {
        matches!(
            self,
            DiagnosticKind::MalformedYear
                | DiagnosticKind::MalformedIndex
                | DiagnosticKind::DuplicateId
                | DiagnosticKind::MalformedJson
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line number in the input stream.
    pub line: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseOutput {
    pub records: Vec<PaperRecord>,
    pub diagnostics: Vec<Diagnostic>,
    pub skipped: usize,
}

#[derive(Default)]
struct Block {
    start_line: usize,
    index: Option<(usize, String)>,
    year: Option<(usize, String)>,
    title: String,
    authors: Vec<String>,
    affiliations: Vec<Option<String>>,
    venue: String,
    abstract_text: String,
    references: Vec<(usize, String)>,
    touched: bool,
}

fn split_names(s: &str) -> Vec<String> {
    s.split(';').map(str::trim).filter(|a| !a.is_empty()).map(String::from).collect()
}

fn split_affiliations(s: &str) -> Vec<Option<String>> {
    s.split(';').map(str::trim).map(|a| if a.is_empty() || a == "-" { None } else { Some(a.to_string()) }).collect()
}

struct Parser {
    out: ParseOutput,
    seen: std::collections::HashSet<PaperId>,
}

impl Parser {
    fn diag(&mut self, line: usize, kind: DiagnosticKind, message: String) {
        self.out.diagnostics.push(Diagnostic { line, kind, message });
    }

    fn finish(&mut self, block: Block) {
        if !block.touched {
            return;
        }
        let Some((index_line, index_text)) = block.index else {
            self.diag(block.start_line, DiagnosticKind::MalformedIndex, "record has no #index line".into());
            self.out.skipped += 1;
            return;
        };
        let id: PaperId = match index_text.parse() {
            Ok(id) => id,
            Err(_) => {
                self.diag(index_line, DiagnosticKind::MalformedIndex, format!("unparsable #index {index_text:?}"));
                self.out.skipped += 1;
                return;
            }
        };
        let year = match &block.year {
            Some((_, text)) => text.trim().parse::<i32>().ok().filter(|y| *y > 0),
            None => None,
        };
        let Some(year) = year else {
            let (line, msg) = match block.year {
                Some((line, text)) => (line, format!("record {id}: malformed year {text:?}")),
                None => (block.start_line, format!("record {id}: missing #t year")),
            };
            self.diag(line, DiagnosticKind::MalformedYear, msg);
            self.out.skipped += 1;
            return;
        };
        if !self.seen.insert(id) {
            self.diag(index_line, DiagnosticKind::DuplicateId, format!("record {id} already seen"));
            self.out.skipped += 1;
            return;
        }

        let mut record = PaperRecord::new(id, year);
        record.title = block.title;
        record.authors = block.authors;
        record.affiliations = block.affiliations;
        record.venue = block.venue;
        record.abstract_text = block.abstract_text;
        let mut seen_refs = std::collections::HashSet::new();
        for (line, text) in block.references {
            match text.parse::<PaperId>() {
                Ok(r) if r == id => {
                    self.diag(line, DiagnosticKind::SelfReference, format!("record {id} cites itself"));
                }
                Ok(r) => {
                    if seen_refs.insert(r) {
                        record.references.push(r);
                    } else {
                        self.diag(
                            line,
                            DiagnosticKind::DuplicateReference,
                            format!("record {id}: duplicate reference {r}"),
                        );
                    }
                }
                Err(_) => {
                    self.diag(
                        line,
                        DiagnosticKind::MalformedReference,
                        format!("record {id}: unparsable reference {text:?}"),
                    );
                }
            }
        }
        self.out.records.push(record);
    }
}

/// Parses AMiner v1 text. Stream read failures abort; per-record problems
/// are collected into [`ParseOutput::diagnostics`].
pub fn parse_aminer(reader: impl BufRead) -> Result<ParseOutput, CorpusError> {
    let mut parser = Parser { out: ParseOutput::default(), seen: Default::default() };
    let mut block = Block::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            parser.finish(std::mem::take(&mut block));
            continue;
        }
        // A second #index inside one block starts a new record.
        if line.starts_with("#index") && block.index.is_some() {
            parser.finish(std::mem::take(&mut block));
        }
        if !block.touched {
            block.touched = true;
            block.start_line = line_no;
        }
        if let Some(rest) = line.strip_prefix("#index") {
            block.index = Some((line_no, rest.trim().to_string()));
        } else if let Some(rest) = line.strip_prefix("#*") {
            block.title = rest.trim().to_string();
        } else if let Some(rest) = line.strip_prefix("#@") {
            block.authors = split_names(rest);
        } else if let Some(rest) = line.strip_prefix("#o") {
            block.affiliations = split_affiliations(rest);
        } else if let Some(rest) = line.strip_prefix("#t") {
            block.year = Some((line_no, rest.trim().to_string()));
        } else if let Some(rest) = line.strip_prefix("#c") {
            block.venue = rest.trim().to_string();
        } else if let Some(rest) = line.strip_prefix("#%") {
            block.references.push((line_no, rest.trim().to_string()));
        } else if let Some(rest) = line.strip_prefix("#!") {
            block.abstract_text = rest.trim().to_string();
        } else {
            parser.diag(line_no, DiagnosticKind::UnknownLine, format!("ignored line {line:?}"));
        }
    }
    parser.finish(block);
    Ok(parser.out)
}

/// Parses the JSON-Lines mirror: one [`PaperRecord`] object per line.
pub fn parse_jsonl(reader: impl BufRead) -> Result<ParseOutput, CorpusError> {
    let mut out = ParseOutput::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut record: PaperRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                out.diagnostics.push(Diagnostic {
                    line: line_no,
                    kind: DiagnosticKind::MalformedJson,
                    message: e.to_string(),
                });
                out.skipped += 1;
                continue;
            }
        };
        if record.year <= 0 {
            out.diagnostics.push(Diagnostic {
                line: line_no,
                kind: DiagnosticKind::MalformedYear,
                message: format!("record {}: non-positive year {}", record.id, record.year),
            });
            out.skipped += 1;
            continue;
        }
        if !seen.insert(record.id) {
            out.diagnostics.push(Diagnostic {
                line: line_no,
                kind: DiagnosticKind::DuplicateId,
                message: format!("record {} already seen", record.id),
            });
            out.skipped += 1;
            continue;
        }
        let (dups, selfs) = record.normalize_references();
        if dups > 0 {
            out.diagnostics.push(Diagnostic {
                line: line_no,
                kind: DiagnosticKind::DuplicateReference,
                message: format!("record {}: {dups} duplicate reference(s)", record.id),
            });
        }
        if selfs > 0 {
            out.diagnostics.push(Diagnostic {
                line: line_no,
                kind: DiagnosticKind::SelfReference,
                message: format!("record {} cites itself", record.id),
            });
        }
        out.records.push(record);
    }
    Ok(out)
}

/// Opens a corpus file, transparently handling gzip and choosing between
/// AMiner text and JSON-Lines by the first non-blank byte.
pub fn read_corpus_file(path: impl AsRef<Path>) -> Result<ParseOutput, CorpusError> {
    let mut raw = Vec::new();
    File::open(path.as_ref())?.read_to_end(&mut raw)?;
    let bytes = if raw.starts_with(&[0x1f, 0x8b]) {
        let mut decoded = Vec::new();
        flate2::read::MultiGzDecoder::new(raw.as_slice()).read_to_end(&mut decoded)?;
        decoded
    } else {
        raw
    };
    parse_bytes(&bytes)
}

pub fn parse_bytes(bytes: &[u8]) -> Result<ParseOutput, CorpusError> {
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
    if first == Some(&b'{') {
        parse_jsonl(BufReader::new(bytes))
    } else {
        parse_aminer(BufReader::new(bytes))
    }
}

/// Writes records back out in AMiner v1 form, one blank-line separated
/// block each.
pub fn write_aminer(records: &[PaperRecord], mut out: impl Write) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "#index {}", r.id)?;
        writeln!(out, "#* {}", r.title)?;
        writeln!(out, "#@ {}", r.authors.join(";"))?;
        if !r.affiliations.is_empty() {
            let affs: Vec<&str> = r.affiliations.iter().map(|a| a.as_deref().unwrap_or("-")).collect();
            writeln!(out, "#o {}", affs.join(";"))?;
        }
        writeln!(out, "#t {}", r.year)?;
        writeln!(out, "#c {}", r.venue)?;
        for reference in &r.references {
            writeln!(out, "#% {reference}")?;
        }
        if !r.abstract_text.is_empty() {
            writeln!(out, "#! {}", r.abstract_text)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_jsonl(records: &[PaperRecord], mut out: impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ParseOutput {
        parse_aminer(s.as_bytes()).unwrap()
    }

    #[test]
    fn documented_block_maps_fields() {
        let out = parse("#index 5\n#* A Title\n#@ A. One;B. Two\n#t 2006\n#c VLDB\n#% 3\n#! Some abstract\n");
        assert!(out.diagnostics.is_empty());
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.id, PaperId(5));
        assert_eq!(r.title, "A Title");
        assert_eq!(r.authors, vec!["A. One", "B. Two"]);
        assert_eq!(r.year, 2006);
        assert_eq!(r.venue, "VLDB");
        assert_eq!(r.references, vec![PaperId(3)]);
        assert_eq!(r.abstract_text, "Some abstract");
    }

    #[test]
    fn empty_stream() {
        let out = parse("");
        assert!(out.records.is_empty());
        assert!(out.diagnostics.is_empty());
        assert_eq!(out.skipped, 0);
    }

    #[test]
    fn duplicate_reference_is_deduplicated_with_one_diagnostic() {
        let out = parse("#index 9\n#@ X\n#t 2001\n#c V\n#% 3\n#% 3\n");
        assert_eq!(out.records[0].references, vec![PaperId(3)]);
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.diagnostics[0].kind, DiagnosticKind::DuplicateReference);
        assert_eq!(out.diagnostics[0].line, 6);
    }

    #[test]
    fn malformed_year_skips_record_with_line_number() {
        let out = parse("#index 1\n#t 2000\n\n#index 2\n#* t\n#t 20x1\n\n#index 3\n#t 1999\n");
        assert_eq!(out.records.iter().map(|r| r.id.0).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(out.skipped, 1);
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.diagnostics[0].kind, DiagnosticKind::MalformedYear);
        assert_eq!(out.diagnostics[0].line, 6);
    }

    #[test]
    fn missing_fields_default_to_empty() {
        let out = parse("#index 4\n#t 1990\n");
        let r = &out.records[0];
        assert!(r.title.is_empty() && r.authors.is_empty() && r.venue.is_empty() && r.references.is_empty());
    }

    #[test]
    fn self_reference_and_bad_reference_are_reported() {
        let out = parse("#index 4\n#t 1990\n#% 4\n#% abc\n#% 2\n");
        assert_eq!(out.records[0].references, vec![PaperId(2)]);
        let kinds: Vec<_> = out.diagnostics.iter().map(|d| d.kind.clone()).collect();
        assert_eq!(kinds, vec![DiagnosticKind::SelfReference, DiagnosticKind::MalformedReference]);
    }

    #[test]
    fn back_to_back_records_without_blank_line() {
        let out = parse("#index 1\n#t 2000\n#index 2\n#t 2001\n");
        assert_eq!(out.records.len(), 2);
    }

    #[test]
    fn duplicate_ids_are_skipped() {
        let out = parse("#index 1\n#t 2000\n\n#index 1\n#t 2001\n");
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.skipped, 1);
        assert_eq!(out.diagnostics[0].kind, DiagnosticKind::DuplicateId);
    }

    #[test]
    fn affiliations_with_missing_marker() {
        let out = parse("#index 1\n#@ A;B\n#o Univ X;-\n#t 2000\n");
        assert_eq!(out.records[0].affiliations, vec![Some("Univ X".to_string()), None]);
    }

    #[test]
    fn jsonl_mirror_and_autodetect() {
        let line = r#"{"id":5,"title":"T","abstract":"","authors":["A"],"venue":"V","year":2006,"references":[3,3]}"#;
        let out = parse_bytes(format!("{line}\nnot json\n").as_bytes()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].references, vec![PaperId(3)]);
        assert_eq!(out.skipped, 1);
        assert!(out.diagnostics.iter().any(|d| d.kind == DiagnosticKind::MalformedJson && d.line == 2));
    }

    #[test]
    fn gzip_input() {
        use flate2::write::GzEncoder;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::default());
        enc.write_all(b"#index 1\n#t 2000\n#c V\n").unwrap();
        enc.finish().unwrap();
        let out = read_corpus_file(&path).unwrap();
        assert_eq!(out.records.len(), 1);
    }
}
