//! The offset-map sidecar kept next to each encoded source document.
//!
//! ```text
//! # pbs-map v1
//! # id<TAB>report
//! # source<TAB>report.txt
//! # sha256<TAB><hex digest of the source bytes>
//! # alphabet<TAB>12
//! # stripped<TAB>40,41,42
//! 0<TAB>0<TAB>3
//! 1<TAB>4<TAB>7
//! ```

use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{MapEntry, PbsDocument};

const MAGIC_LINE: &str = "# pbs-map v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SidecarError {
    #[error("missing '{MAGIC_LINE}' header line")]
    MissingMagic,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetMap {
    pub id: String,
    pub source_name: String,
    pub source_sha256: String,
    pub alphabet_size: usize,
    pub stripped_lines: Vec<usize>,
    pub entries: Vec<MapEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OffsetMap {
    pub fn for_document(
        doc: &PbsDocument,
        source_name: &str,
        source: &[u8],
        alphabet_size: usize,
        stripped_lines: Vec<usize>,
    ) -> Self {
        Self {
            id: doc.id.clone(),
            source_name: source_name.to_string(),
            source_sha256: sha256_hex(source),
            alphabet_size,
            stripped_lines,
            entries: doc.map.clone(),
        }
    }

    pub fn matches_source(&self, source: &[u8]) -> bool {
        self.source_sha256 == sha256_hex(source)
    }

    pub fn to_tsv(&self) -> String {
        let flat = |s: &str| s.replace(['\t', '\r', '\n'], " ");
        let mut out = String::with_capacity(self.entries.len() * 16 + 200);
        out.push_str(MAGIC_LINE);
        out.push('\n');
        let _ = writeln!(out, "# id\t{}", flat(&self.id));
        let _ = writeln!(out, "# source\t{}", flat(&self.source_name));
        let _ = writeln!(out, "# sha256\t{}", self.source_sha256);
        let _ = writeln!(out, "# alphabet\t{}", self.alphabet_size);
        let stripped: Vec<String> = self.stripped_lines.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(out, "# stripped\t{}", stripped.join(","));
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}", e.word_index, e.byte_start, e.byte_end);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SidecarError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim_end() == MAGIC_LINE => {}
            _ => return Err(SidecarError::MissingMagic),
        }
        let bad = |line: usize, message: &str| SidecarError::Malformed {
            line: line + 1,
            message: message.to_string(),
        };
        let mut map = OffsetMap {
            id: String::new(),
            source_name: String::new(),
            source_sha256: String::new(),
            alphabet_size: 0,
            stripped_lines: Vec::new(),
            entries: Vec::new(),
        };
        for (i, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix("# ") {
                let (key, value) = header.split_once('\t').unwrap_or((header, ""));
                match key {
                    "id" => map.id = value.to_string(),
                    "source" => map.source_name = value.to_string(),
                    "sha256" => map.source_sha256 = value.to_string(),
                    "alphabet" => {
                        map.alphabet_size = value.parse().map_err(|_| bad(i, "bad alphabet size"))?
                    }
                    "stripped" => {
                        map.stripped_lines = value
                            .split(',')
                            .filter(|s| !s.is_empty())
                            .map(|s| s.parse::<usize>())
                            .collect::<Result<_, _>>()
                            .map_err(|_| bad(i, "bad stripped line list"))?
                    }
                    _ => {}
                }
                continue;
            }
            let mut cols = line.split('\t').map(|c| c.parse::<usize>());
            let (Some(Ok(word_index)), Some(Ok(byte_start)), Some(Ok(byte_end)), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(bad(i, "expected wordIndex<TAB>byteStart<TAB>byteEnd"));
            };
            if word_index != map.entries.len() {
                return Err(bad(i, "word indices must be consecutive from 0"));
            }
            if byte_start >= byte_end {
                return Err(bad(i, "empty byte range"));
            }
            if let Some(prev) = map.entries.last() {
                if byte_start < prev.byte_end {
                    return Err(bad(i, "byte ranges overlap or are out of order"));
                }
            }
            map.entries.push(MapEntry {
                word_index,
                byte_start,
                byte_end,
            });
        }
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode_document, Alphabet};

    #[test]
    fn round_trip() {
        let text = "The cat sat on the mat";
        let doc = encode_document("note", text, &Alphabet::default());
        let map = OffsetMap::for_document(&doc, "note.txt", text.as_bytes(), 12, vec![4, 7]);
        let tsv = map.to_tsv();
        assert!(tsv.contains("\n0\t0\t3\n1\t4\t7\n"));
        assert_eq!(OffsetMap::parse(&tsv).unwrap(), map);
        assert!(map.matches_source(text.as_bytes()));
        assert!(!map.matches_source(b"The cat sat on the hat"));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(OffsetMap::parse(""), Err(SidecarError::MissingMagic));
        assert!(matches!(
            OffsetMap::parse("# pbs-map v1\n1\t0\t3\n"),
            Err(SidecarError::Malformed { line: 2, .. })
        ));
        assert!(OffsetMap::parse("# pbs-map v1\n0\t0\t3\n1\t2\t4\n").is_err());
        assert!(OffsetMap::parse("# pbs-map v1\n0\t0\n").is_err());
    }
}
