//! Word tokenization and the degenerate word → character encoding.
//!
//! Every word of the source text becomes exactly one character of a small
//! alphabet: the sum of the word's code points modulo the alphabet size picks
//! the character. The mapping is many-to-one, so the encoded sequence cannot
//! be turned back into the source text. The byte span of every word is kept
//! in an offset map that never leaves the machine that produced it.

mod fasta;
mod sidecar;

pub use fasta::{parse_fasta, write_fasta, FastaError, FastaRecord, FASTA_LINE_WIDTH};
pub use sidecar::{sha256_hex, OffsetMap, SidecarError};

use thiserror::Error;

/// Code points below this value are constituents of western words.
pub const EASTERN_THRESHOLD: u32 = 1000;

/// Alphabet size used unless configured otherwise.
pub const DEFAULT_ALPHABET_SIZE: usize = 12;

/// Largest supported alphabet.
pub const MAX_ALPHABET_SIZE: usize = 26;

/// Characters in the order they are handed out for alphabets of up to 16.
const BASE_ORDER: &[u8; 16] = b"ACDEGHIKLNQRSTVW";
/// Extra characters for alphabets larger than 16, in the order they are added.
const EXTENDED_ORDER: &[u8; 10] = b"FMPYBJOUXZ";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    InvalidUtf8 { offset: usize },
    #[error("alphabet size must be in 1..={max}, got {0}", max = MAX_ALPHABET_SIZE)]
    AlphabetSize(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    WesternWord,
    EasternChar,
}

/// One word of the source text; `byte_start..byte_end` indexes the UTF-8 source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub word_index: usize,
    pub byte_start: usize,
    pub byte_end: usize,
    pub kind: TokenKind,
}

impl Token {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.byte_start..self.byte_end]
    }
}

/// The ordered set of characters a sequence may use.
///
/// Alphabets are always a prefix of a fixed character order, so two parties
/// agreeing on the size agree on the characters. For sizes up to 16 that order
/// is `ACDEGHIKLNQRSTVW`; larger alphabets add `FMPYBJOUXZ` and are re-sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    chars: Vec<u8>,
    codes: [u8; 256],
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self, EncodeError> {
        if size == 0 || size > MAX_ALPHABET_SIZE {
            return Err(EncodeError::AlphabetSize(size));
        }
        let mut chars: Vec<u8> = BASE_ORDER
            .iter()
            .chain(EXTENDED_ORDER.iter())
            .take(size)
            .copied()
            .collect();
        chars.sort_unstable();
        let mut codes = [0u8; 256];
        for (i, &c) in chars.iter().enumerate() {
            codes[c as usize] = i as u8 + 1;
        }
        Ok(Self { chars, codes })
    }

    pub fn size(&self) -> usize {
        self.chars.len()
    }

    pub fn chars(&self) -> &[u8] {
        &self.chars
    }

    /// Character for a remainder in `0..size`.
    pub fn char_at(&self, remainder: usize) -> u8 {
        self.chars[remainder]
    }

    /// Dense rank of `c` starting at 1 (0 is reserved for the sentinel), or
    /// `None` if `c` is not part of the alphabet.
    #[inline]
    pub fn code_of(&self, c: u8) -> Option<u8> {
        match self.codes[c as usize] {
            0 => None,
            code => Some(code),
        }
    }

    pub fn contains(&self, c: u8) -> bool {
        self.codes[c as usize] != 0
    }

    /// Position of the first byte not in the alphabet.
    pub fn first_illegal(&self, seq: &[u8]) -> Option<usize> {
        seq.iter().position(|&c| !self.contains(c))
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::new(DEFAULT_ALPHABET_SIZE).expect("default alphabet size is valid")
    }
}

#[inline]
fn is_delimiter(c: char) -> bool {
    match c {
        ' ' | '\t' | '\r' | '\n' | '+' | '&' => true,
        // Whitespace above the threshold (e.g. U+3000) cannot carry word content.
        c => (c as u32) >= EASTERN_THRESHOLD && c.is_whitespace(),
    }
}

/// Splits `text` into western words and single eastern characters.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;

    let push = |tokens: &mut Vec<Token>, start: usize, end: usize, kind| {
        let word_index = tokens.len();
        tokens.push(Token {
            word_index,
            byte_start: start,
            byte_end: end,
            kind,
        });
    };

    for (pos, c) in text.char_indices() {
        if is_delimiter(c) {
            if let Some(start) = word_start.take() {
                push(&mut tokens, start, pos, TokenKind::WesternWord);
            }
        } else if (c as u32) >= EASTERN_THRESHOLD {
            if let Some(start) = word_start.take() {
                push(&mut tokens, start, pos, TokenKind::WesternWord);
            }
            push(&mut tokens, pos, pos + c.len_utf8(), TokenKind::EasternChar);
        } else if word_start.is_none() {
            word_start = Some(pos);
        }
    }
    if let Some(start) = word_start {
        push(&mut tokens, start, text.len(), TokenKind::WesternWord);
    }
    tokens
}

/// Like [`tokenize`], for raw bytes that still need UTF-8 validation.
pub fn tokenize_bytes(bytes: &[u8]) -> Result<Vec<Token>, EncodeError> {
    Ok(tokenize(validate_utf8(bytes)?))
}

pub fn validate_utf8(bytes: &[u8]) -> Result<&str, EncodeError> {
    std::str::from_utf8(bytes).map_err(|e| EncodeError::InvalidUtf8 {
        offset: e.valid_up_to(),
    })
}

/// Encodes one word: code-point sum modulo the alphabet size.
#[inline]
pub fn encode_word(word: &str, alphabet: &Alphabet) -> u8 {
    let sum: u64 = word.chars().map(|c| c as u64).sum();
    alphabet.char_at((sum % alphabet.size() as u64) as usize)
}

/// One row of the offset map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapEntry {
    pub word_index: usize,
    pub byte_start: usize,
    pub byte_end: usize,
}

/// An encoded document plus the word → byte-range map of its source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbsDocument {
    pub id: String,
    pub pbs: Vec<u8>,
    pub map: Vec<MapEntry>,
}

impl PbsDocument {
    pub fn len(&self) -> usize {
        self.pbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pbs.is_empty()
    }

    pub fn pbs_str(&self) -> &str {
        // Alphabet characters are ASCII.
        std::str::from_utf8(&self.pbs).expect("sequence is ASCII")
    }
}

pub fn encode_document(id: impl Into<String>, text: &str, alphabet: &Alphabet) -> PbsDocument {
    encode_tokens(id.into(), text, tokenize(text).into_iter(), alphabet)
}

pub fn encode_bytes(
    id: impl Into<String>,
    bytes: &[u8],
    alphabet: &Alphabet,
) -> Result<PbsDocument, EncodeError> {
    Ok(encode_document(id, validate_utf8(bytes)?, alphabet))
}

/// Encodes `text` leaving out every word on the given (LF-separated) lines.
/// Byte offsets in the map still refer to the full text.
pub fn encode_document_skipping_lines(
    id: impl Into<String>,
    text: &str,
    alphabet: &Alphabet,
    skipped_lines: &[usize],
) -> PbsDocument {
    if skipped_lines.is_empty() {
        return encode_document(id, text, alphabet);
    }
    let spans = line_spans(text);
    let mut skip = vec![false; spans.len()];
    for &l in skipped_lines {
        if l < skip.len() {
            skip[l] = true;
        }
    }
    let mut line = 0;
    let kept = tokenize(text).into_iter().filter(|t| {
        while spans[line].1 < t.byte_start {
            line += 1;
        }
        !skip[line]
    });
    encode_tokens(id.into(), text, kept, alphabet)
}

/// Byte span `[start, end)` of every LF-separated line, excluding the LF.
pub fn line_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, b) in text.bytes().enumerate() {
        if b == b'\n' {
            spans.push((start, i));
            start = i + 1;
        }
    }
    spans.push((start, text.len()));
    spans
}

fn encode_tokens(
    id: String,
    text: &str,
    tokens: impl Iterator<Item = Token>,
    alphabet: &Alphabet,
) -> PbsDocument {
    let mut pbs = Vec::new();
    let mut map = Vec::new();
    for (word_index, t) in tokens.enumerate() {
        pbs.push(encode_word(t.text(text), alphabet));
        map.push(MapEntry {
            word_index,
            byte_start: t.byte_start,
            byte_end: t.byte_end,
        });
    }
    PbsDocument { id, pbs, map }
}
