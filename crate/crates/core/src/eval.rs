//! Collision and compression measurements for the word encoding.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::hash::Hash;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus_db::{CorpusDb, DbError, SourceDocument};
use crate::encoder::{encode_document, tokenize, Alphabet, EncodeError};

pub const DEFAULT_KS: [usize; 5] = [8, 10, 12, 14, 16];
pub const DEFAULT_AS: [usize; 4] = [8, 12, 14, 16];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("corpus has no document with at least {k} words")]
    TooShort { k: usize },
    #[error(transparent)]
    Alphabet(#[from] EncodeError),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not valid UTF-8")]
    NotUtf8 { path: PathBuf },
    #[error(transparent)]
    Db(#[from] DbError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpReport {
    pub k: usize,
    pub a: usize,
    pub unique_strings: u64,
    pub colliding_strings: u64,
    pub fp_rate: f64,
}

/// Share of unique strings whose encoding is shared with another string.
pub fn rate(colliding: u64, unique: u64) -> f64 {
    if unique == 0 {
        0.0
    } else {
        colliding as f64 / unique as f64
    }
}

/// Corpus with every distinct word replaced by a small integer.
struct Interned {
    docs: Vec<Vec<u32>>,
    /// Code-point sum of each distinct word.
    sums: Vec<u64>,
}

impl Interned {
    fn new(texts: &[&str]) -> Self {
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let mut sums = Vec::new();
        let docs = texts
            .iter()
            .map(|text| {
                tokenize(text)
                    .iter()
                    .map(|t| {
                        let w = t.text(text);
                        *ids.entry(w).or_insert_with(|| {
                            sums.push(w.chars().map(|c| c as u64).sum());
                            (sums.len() - 1) as u32
                        })
                    })
                    .collect()
            })
            .collect();
        Self { docs, sums }
    }

    /// Distinct k-word tuples; windows never cross documents.
    fn unique_windows(&self, k: usize) -> Vec<&[u32]> {
        let mut seen: HashSet<&[u32]> = HashSet::new();
        for doc in &self.docs {
            for w in doc.windows(k) {
                seen.insert(w);
            }
        }
        let mut out: Vec<&[u32]> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }
}

fn colliding<K: Hash + Eq>(keys: impl Iterator<Item = K>) -> u64 {
    let mut buckets: HashMap<K, u64> = HashMap::new();
    for key in keys {
        *buckets.entry(key).or_default() += 1;
    }
    buckets.values().filter(|&&n| n >= 2).sum()
}

fn report_for(interned: &Interned, windows: &[&[u32]], k: usize, a: usize) -> FpReport {
    let a64 = a as u64;
    let code = |id: &u32| interned.sums[*id as usize] % a64;
    // Pack codes into a u128 while they fit; fall back to byte strings.
    let bits = 64 - (a64.max(2) - 1).leading_zeros() as usize;
    let colliding_strings = if bits * k <= 128 {
        colliding(windows.iter().map(|w| {
            w.iter().fold(0u128, |acc, id| (acc << bits) | code(id) as u128)
        }))
    } else {
        colliding(windows.iter().map(|w| w.iter().map(|id| code(id) as u8).collect::<Vec<u8>>()))
    };
    let unique_strings = windows.len() as u64;
    FpReport {
        k,
        a,
        unique_strings,
        colliding_strings,
        fp_rate: rate(colliding_strings, unique_strings),
    }
}

fn check_params(interned: &Interned, k: usize, a: usize) -> Result<(), EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    if a == 0 {
        return Err(EncodeError::AlphabetSize(0).into());
    }
    if !interned.docs.iter().any(|d| d.len() >= k) {
        return Err(EvalError::TooShort { k });
    }
    Ok(())
}

/// Exact false-positive rate of k-word windows under an `a`-letter encoding.
pub fn fp_rate(texts: &[&str], k: usize, a: usize) -> Result<FpReport, EvalError> {
    let interned = Interned::new(texts);
    check_params(&interned, k, a)?;
    let windows = interned.unique_windows(k);
    Ok(report_for(&interned, &windows, k, a))
}

/// One report per (k, a), ordered by k then a.
pub fn sweep(texts: &[&str], ks: &[usize], alphabet_sizes: &[usize]) -> Result<Vec<FpReport>, EvalError> {
    let interned = Interned::new(texts);
    for &k in ks {
        for &a in alphabet_sizes {
            check_params(&interned, k, a)?;
        }
    }
    let reports = ks
        .par_iter()
        .flat_map_iter(|&k| {
            let windows = interned.unique_windows(k);
            alphabet_sizes
                .iter()
                .map(|&a| report_for(&interned, &windows, k, a))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(reports)
}

pub fn sweep_tsv(reports: &[FpReport]) -> String {
    let mut out = String::from("k\ta\tunique\tcolliding\tfp_rate\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}",
            r.k, r.a, r.unique_strings, r.colliding_strings, r.fp_rate
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionReport {
    pub name: String,
    pub raw_bytes: u64,
    pub pbs_chars: u64,
    pub db_bytes: u64,
}

impl CompressionReport {
    pub fn raw_per_pbs(&self) -> f64 {
        self.raw_bytes as f64 / self.pbs_chars as f64
    }

    pub fn raw_per_db(&self) -> f64 {
        self.raw_bytes as f64 / self.db_bytes as f64
    }

    pub fn db_per_pbs(&self) -> f64 {
        self.db_bytes as f64 / self.pbs_chars as f64
    }
}

/// Raw size against encoded size and against a serialized database built
/// from the same texts.
pub fn compression_ratio(
    name: &str,
    texts: &[&str],
    alphabet: &Alphabet,
) -> Result<CompressionReport, EvalError> {
    if texts.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let raw_bytes: u64 = texts.iter().map(|t| t.len() as u64).sum();
    let pbs_chars: u64 = texts
        .iter()
        .map(|t| encode_document("", t, alphabet).len() as u64)
        .sum();
    let docs = texts
        .iter()
        .enumerate()
        .map(|(i, t)| SourceDocument {
            title: format!("{name}#{i}"),
            text: t.as_bytes().to_vec(),
            ..Default::default()
        })
        .collect();
    let db_bytes = CorpusDb::ingest(docs, alphabet)?.to_bytes().len() as u64;
    Ok(CompressionReport {
        name: name.to_string(),
        raw_bytes,
        pbs_chars,
        db_bytes,
    })
}

pub fn compression_tsv(reports: &[CompressionReport]) -> String {
    let mut out = String::from("corpus\traw_bytes\tpbs_chars\tdb_bytes\traw_per_pbs\traw_per_db\tdb_per_pbs\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.3}\t{:.3}\t{:.3}",
            r.name,
            r.raw_bytes,
            r.pbs_chars,
            r.db_bytes,
            r.raw_per_pbs(),
            r.raw_per_db(),
            r.db_per_pbs()
        );
    }
    out
}

/// Every regular file directly under `dir`, sorted by name, as UTF-8 text.
pub fn read_corpus_dir(dir: &Path) -> Result<Vec<(String, String)>, EvalError> {
    let io = |source| EvalError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    paths
        .into_iter()
        .map(|path| {
            let bytes = std::fs::read(&path).map_err(|source| EvalError::Io {
                path: path.clone(),
                source,
            })?;
            let text = String::from_utf8(bytes).map_err(|_| EvalError::NotUtf8 { path: path.clone() })?;
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, text))
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::encoder::encode_word;
    use crate::synth::EnglishGenerator;

    /// Straightforward oracle: word tuples as owned strings, encodings as
    /// strings, one hash map from encoding to the set of tuples.
    pub(crate) fn brute_force(texts: &[&str], k: usize, a: usize) -> (u64, u64) {
        let alphabet = Alphabet::new(a).unwrap();
        let mut unique: HashSet<Vec<String>> = HashSet::new();
        for text in texts {
            let words: Vec<String> = tokenize(text).iter().map(|t| t.text(text).to_string()).collect();
            for w in words.windows(k) {
                unique.insert(w.to_vec());
            }
        }
        let mut buckets: HashMap<String, HashSet<Vec<String>>> = HashMap::new();
        for tuple in &unique {
            let pbs: String = tuple.iter().map(|w| encode_word(w, &alphabet) as char).collect();
            buckets.entry(pbs).or_default().insert(tuple.clone());
        }
        let colliding = buckets.values().filter(|s| s.len() >= 2).map(|s| s.len() as u64).sum();
        (unique.len() as u64, colliding)
    }

    #[test]
    fn ratio_formula() {
        assert_eq!(format!("{:.4}", rate(70_352_323, 9_266_370_827)), "0.0076");
    }

    #[test]
    fn distinct_words_once() {
        let r = fp_rate(&["alpha beta gamma delta"], 4, 12).unwrap();
        assert_eq!((r.unique_strings, r.colliding_strings, r.fp_rate), (1, 0, 0.0));
    }

    #[test]
    fn engineered_collision() {
        // "cat" and "tac" have equal code-point sums.
        let r = fp_rate(&["cat x", "tac x"], 2, 12).unwrap();
        assert_eq!((r.unique_strings, r.colliding_strings), (2, 2));
        assert_eq!(r.fp_rate, 1.0);
        assert_eq!(brute_force(&["cat x", "tac x"], 2, 12), (2, 2));
    }

    #[test]
    fn single_letter_alphabet() {
        let r = fp_rate(&["one two three four five"], 2, 1).unwrap();
        assert_eq!(r.fp_rate, 1.0);
    }

    #[test]
    fn repeats_and_boundaries() {
        // The repeated window counts once; windows do not span documents.
        let r = fp_rate(&["a b a b", "c d"], 2, 26).unwrap();
        assert_eq!(r.unique_strings, 3); // ab, ba, cd; "b c" is not a window
        let r2 = fp_rate(&["a b a b c d"], 2, 26).unwrap();
        assert_eq!(r2.unique_strings, 4);
    }

    #[test]
    fn usage_errors() {
        assert!(matches!(fp_rate(&["a b"], 3, 12), Err(EvalError::TooShort { k: 3 })));
        assert!(matches!(fp_rate(&["a b"], 0, 12), Err(EvalError::ZeroK)));
        assert!(matches!(fp_rate(&["a b"], 1, 0), Err(EvalError::Alphabet(_))));
    }

    #[test]
    fn oracle_equality_small() {
        let mut g = EnglishGenerator::new(31);
        let docs: Vec<String> = (0..5).map(|_| g.prose(3_000, 80)).collect();
        let texts: Vec<&str> = docs.iter().map(|s| s.as_str()).collect();
        let reports = sweep(&texts, &[2, 3, 4, 8], &[2, 8, 12, 26]).unwrap();
        for r in &reports {
            let (u, c) = brute_force(&texts, r.k, r.a);
            assert_eq!((r.unique_strings, r.colliding_strings), (u, c), "k={} a={}", r.k, r.a);
        }
        // Wide keys take the byte-string path.
        let wide = fp_rate(&texts, 30, 26).unwrap();
        assert_eq!((wide.unique_strings, wide.colliding_strings), brute_force(&texts, 30, 26));
    }

    #[test]
    fn sweep_tsv_layout() {
        let reports = sweep(&["a b c d e f"], &[2, 3], &[8, 12]).unwrap();
        let tsv = sweep_tsv(&reports);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], "k\ta\tunique\tcolliding\tfp_rate");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("2\t8\t5\t"));
    }

    #[test]
    fn single_word_compression() {
        let r = compression_ratio("cat", &["cat"], &Alphabet::default()).unwrap();
        assert_eq!((r.raw_bytes, r.pbs_chars), (3, 1));
        assert_eq!(r.raw_per_pbs(), 3.0);
    }

    #[test]
    fn deterministic() {
        let text = EnglishGenerator::new(4).prose(2_000, 80);
        assert_eq!(sweep(&[&text], &[8, 12], &[8, 12]).unwrap(), sweep(&[&text], &[8, 12], &[8, 12]).unwrap());
    }
}
