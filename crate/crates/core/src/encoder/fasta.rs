use thiserror::Error;

use super::{Alphabet, PbsDocument};

pub const FASTA_LINE_WIDTH: usize = 80;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FastaError {
    #[error("empty FASTA input")]
    Empty,
    #[error("sequence data before the first '>' header (line {line})")]
    MissingHeader { line: usize },
    #[error("FASTA input is not valid UTF-8")]
    NotUtf8,
    #[error("illegal character {found:?} in record {record:?} at sequence position {position}")]
    IllegalCharacter {
        record: String,
        position: usize,
        found: char,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastaRecord {
    pub description: String,
    pub sequence: Vec<u8>,
}

impl FastaRecord {
    /// Checks every sequence character against `alphabet`.
    pub fn validate(&self, alphabet: &Alphabet) -> Result<(), FastaError> {
        match alphabet.first_illegal(&self.sequence) {
            None => Ok(()),
            Some(position) => Err(FastaError::IllegalCharacter {
                record: self.description.clone(),
                position,
                found: self.sequence[position] as char,
            }),
        }
    }
}

/// Renders `doc` as a single FASTA record wrapped at [`FASTA_LINE_WIDTH`].
///
/// The description must not contain line breaks; any that do appear are
/// replaced by spaces so the header stays on one line.
pub fn write_fasta(doc: &PbsDocument, description: &str) -> String {
    let description = description.replace(['\r', '\n'], " ");
    let mut out = String::with_capacity(description.len() + 2 + doc.pbs.len() * 81 / 80 + 1);
    out.push('>');
    out.push_str(&description);
    out.push('\n');
    for line in doc.pbs.chunks(FASTA_LINE_WIDTH) {
        out.push_str(std::str::from_utf8(line).expect("sequence is ASCII"));
        out.push('\n');
    }
    out
}

/// Parses one or more FASTA records. Blank lines are ignored and CRLF line
/// endings are accepted; sequence characters are not validated here.
pub fn parse_fasta(input: &[u8]) -> Result<Vec<FastaRecord>, FastaError> {
    let text = std::str::from_utf8(input).map_err(|_| FastaError::NotUtf8)?;
    let mut records: Vec<FastaRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if let Some(desc) = line.strip_prefix('>') {
            records.push(FastaRecord {
                description: desc.trim().to_string(),
                sequence: Vec::new(),
            });
        } else if !line.trim().is_empty() {
            match records.last_mut() {
                Some(r) => r.sequence.extend(line.trim().bytes()),
                None => return Err(FastaError::MissingHeader { line: i + 1 }),
            }
        }
    }
    if records.is_empty() {
        return Err(FastaError::Empty);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(pbs: &str) -> PbsDocument {
        PbsDocument {
            id: "d1".into(),
            pbs: pbs.as_bytes().to_vec(),
            map: Vec::new(),
        }
    }

    #[test]
    fn formats() {
        assert_eq!(write_fasta(&doc("CAG"), "d1"), ">d1\nCAG\n");
        assert_eq!(write_fasta(&doc(""), "d1"), ">d1\n");
        let long = "A".repeat(200);
        let out = write_fasta(&doc(&long), "d1");
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], ">d1");
        assert_eq!(
            lines[1..].iter().map(|l| l.len()).collect::<Vec<_>>(),
            [80, 80, 40]
        );
    }

    #[test]
    fn newline_in_description_is_flattened() {
        assert_eq!(write_fasta(&doc("A"), "a\nb"), ">a b\nA\n");
    }

    #[test]
    fn parses_round_trip() {
        let long = "ACDEGHIKLNQR".repeat(20);
        let text = write_fasta(&doc(&long), "q1");
        let recs = parse_fasta(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].description, "q1");
        assert_eq!(recs[0].sequence, long.as_bytes());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_fasta(b""), Err(FastaError::Empty));
        assert_eq!(parse_fasta(b"\n\n"), Err(FastaError::Empty));
        assert_eq!(
            parse_fasta(b"ACD\n>x\n"),
            Err(FastaError::MissingHeader { line: 1 })
        );
        assert_eq!(parse_fasta(b">x\n\xff\n"), Err(FastaError::NotUtf8));
    }

    #[test]
    fn crlf_and_multiple_records() {
        let recs = parse_fasta(b">a\r\nAC\r\nDE\r\n>b\r\n\r\nQ\r\n").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].sequence, b"ACDE");
        assert_eq!(recs[1].sequence, b"Q");
    }

    #[test]
    fn validation_finds_illegal_character() {
        let rec = &parse_fasta(b">q\nBBBB\n").unwrap()[0];
        let err = rec.validate(&Alphabet::default()).unwrap_err();
        assert_eq!(
            err,
            FastaError::IllegalCharacter {
                record: "q".into(),
                position: 0,
                found: 'B'
            }
        );
        assert!(rec.validate(&Alphabet::new(26).unwrap()).is_ok());
    }
}
