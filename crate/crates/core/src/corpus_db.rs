//! Reference corpus: encoded documents concatenated into one FM-index plus a
//! registry mapping global word positions back to documents.
//!
//! On disk the database is the FM-index block followed by a registry section:
//!
//! ```text
//! "PBRG" | u32 entry count
//! per entry: u32-length-prefixed UTF-8 title, url, plaintext path | u64 word offset | u64 word count
//! u64 CRC-64/XZ of the registry section
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::encoder::{encode_document, tokenize, validate_utf8, Alphabet, EncodeError};
use crate::fm_index::io::{Reader, CRC64};
use crate::fm_index::{FmIndex, IndexError, LoadError};

const REGISTRY_MAGIC: &[u8; 4] = b"PBRG";

#[derive(Debug, Error)]
pub enum DbError {
    #[error("corpus contains no documents")]
    EmptyCorpus,
    #[error("{} document(s) failed to encode: {}", .0.len(), describe_failures(.0))]
    DocumentEncoding(Vec<DocFailure>),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("word position {position} out of range (corpus has {total} words)")]
    OutOfRange { position: usize, total: usize },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("database format error: {0}")]
    Format(String),
    #[error("registry validation failed: {0}")]
    Validation(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug)]
pub struct DocFailure {
    pub index: usize,
    pub title: String,
    pub error: EncodeError,
}

fn describe_failures(f: &[DocFailure]) -> String {
    f.iter()
        .map(|d| format!("#{} {:?}: {}", d.index, d.title, d.error))
        .collect::<Vec<_>>()
        .join("; ")
}

/// A document handed to [`CorpusDb::ingest`].
#[derive(Debug, Clone, Default)]
pub struct SourceDocument {
    pub title: String,
    pub url: String,
    pub text: Vec<u8>,
    /// Where the server keeps the plaintext for snippet display, if anywhere.
    pub plaintext_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocRegistryEntry {
    pub doc_id: usize,
    pub title: String,
    pub url: String,
    pub word_offset: usize,
    pub word_count: usize,
    pub plaintext_path: Option<String>,
}

impl DocRegistryEntry {
    pub fn word_end(&self) -> usize {
        self.word_offset + self.word_count
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusDb {
    index: FmIndex,
    registry: Vec<DocRegistryEntry>,
}

impl CorpusDb {
    pub fn ingest(documents: Vec<SourceDocument>, alphabet: &Alphabet) -> Result<Self, DbError> {
        if documents.is_empty() {
            return Err(DbError::EmptyCorpus);
        }
        let mut failures = Vec::new();
        let mut text = Vec::new();
        let mut registry = Vec::with_capacity(documents.len());
        for (i, doc) in documents.into_iter().enumerate() {
            let plain = match validate_utf8(&doc.text) {
                Ok(t) => t,
                Err(error) => {
                    failures.push(DocFailure {
                        index: i,
                        title: doc.title,
                        error,
                    });
                    continue;
                }
            };
            let encoded = encode_document(doc.title.clone(), plain, alphabet);
            registry.push(DocRegistryEntry {
                doc_id: i,
                title: doc.title,
                url: doc.url,
                word_offset: text.len(),
                word_count: encoded.pbs.len(),
                plaintext_path: doc.plaintext_path,
            });
            text.extend_from_slice(&encoded.pbs);
        }
        if !failures.is_empty() {
            return Err(DbError::DocumentEncoding(failures));
        }
        let index = FmIndex::build(&text, alphabet)?;
        Ok(Self { index, registry })
    }

    /// Builds a database straight from already-encoded sequences, titled by id.
    pub fn from_sequences<'a>(
        docs: impl IntoIterator<Item = (&'a str, &'a [u8])>,
        alphabet: &Alphabet,
    ) -> Result<Self, DbError> {
        let mut text = Vec::new();
        let mut registry = Vec::new();
        for (i, (id, pbs)) in docs.into_iter().enumerate() {
            registry.push(DocRegistryEntry {
                doc_id: i,
                title: id.to_string(),
                url: String::new(),
                word_offset: text.len(),
                word_count: pbs.len(),
                plaintext_path: None,
            });
            text.extend_from_slice(pbs);
        }
        if registry.is_empty() {
            return Err(DbError::EmptyCorpus);
        }
        let index = FmIndex::build(&text, alphabet)?;
        Ok(Self { index, registry })
    }

    pub fn index(&self) -> &FmIndex {
        &self.index
    }

    pub fn registry(&self) -> &[DocRegistryEntry] {
        &self.registry
    }

    pub fn entry(&self, doc_id: usize) -> Option<&DocRegistryEntry> {
        self.registry.get(doc_id)
    }

    pub fn document_count(&self) -> usize {
        self.registry.len()
    }

    pub fn total_words(&self) -> usize {
        self.index.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.index.alphabet()
    }

    /// Document containing global word `position` and the position within it.
    pub fn resolve(&self, position: usize) -> Result<(usize, usize), DbError> {
        if position >= self.index.len() {
            return Err(DbError::OutOfRange {
                position,
                total: self.index.len(),
            });
        }
        let i = self.registry.partition_point(|e| e.word_end() <= position);
        let e = &self.registry[i];
        Ok((e.doc_id, position - e.word_offset))
    }

    /// Plaintext of words `start..end` of a reference document, read from its
    /// retained plaintext file. `None` if no plaintext is retained or the file
    /// no longer lines up with the registry.
    pub fn reference_text(&self, doc_id: usize, start: usize, end: usize) -> Option<String> {
        let entry = self.registry.get(doc_id)?;
        let bytes = fs::read(entry.plaintext_path.as_ref()?).ok()?;
        let text = validate_utf8(&bytes).ok()?;
        let tokens = tokenize(text);
        if tokens.len() != entry.word_count || start >= end || end > tokens.len() {
            return None;
        }
        Some(text[tokens[start].byte_start..tokens[end - 1].byte_end].to_string())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.index.serialize();
        let start = out.len();
        out.extend_from_slice(REGISTRY_MAGIC);
        out.extend_from_slice(&(self.registry.len() as u32).to_le_bytes());
        let put_str = |out: &mut Vec<u8>, s: &str| {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        };
        for e in &self.registry {
            put_str(&mut out, &e.title);
            put_str(&mut out, &e.url);
            put_str(&mut out, e.plaintext_path.as_deref().unwrap_or(""));
            out.extend_from_slice(&(e.word_offset as u64).to_le_bytes());
            out.extend_from_slice(&(e.word_count as u64).to_le_bytes());
        }
        let crc = CRC64.checksum(&out[start..]);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DbError> {
        let mut r = Reader::new(bytes);
        let index = FmIndex::read_from(&mut r)?;
        if r.remaining() == 0 {
            return Err(DbError::Format("missing registry section".into()));
        }
        let start = r.position();
        r.check_magic(REGISTRY_MAGIC)?;
        let count = r.u32()? as usize;
        let mut registry = Vec::with_capacity(count.min(1 << 20));
        let read_str = |r: &mut Reader<'_>| -> Result<String, DbError> {
            let len = r.u32()? as usize;
            String::from_utf8(r.take(len)?.to_vec())
                .map_err(|_| DbError::Format("registry string is not UTF-8".into()))
        };
        for doc_id in 0..count {
            let title = read_str(&mut r)?;
            let url = read_str(&mut r)?;
            let path = read_str(&mut r)?;
            let word_offset = r.usize()?;
            let word_count = r.usize()?;
            registry.push(DocRegistryEntry {
                doc_id,
                title,
                url,
                word_offset,
                word_count,
                plaintext_path: (!path.is_empty()).then_some(path),
            });
        }
        r.verify_crc(start)?;
        if r.remaining() != 0 {
            return Err(DbError::Format(format!(
                "{} trailing bytes after registry",
                r.remaining()
            )));
        }
        validate_registry(&registry, index.len())?;
        Ok(Self { index, registry })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DbError> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|source| DbError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DbError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| DbError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

fn validate_registry(registry: &[DocRegistryEntry], n: usize) -> Result<(), DbError> {
    if registry.is_empty() {
        return Err(DbError::Validation("registry is empty".into()));
    }
    let mut expected = 0;
    for e in registry {
        if e.word_offset != expected {
            return Err(DbError::Validation(format!(
                "document {} starts at word {} but the previous one ends at {}",
                e.doc_id, e.word_offset, expected
            )));
        }
        expected = e
            .word_offset
            .checked_add(e.word_count)
            .ok_or_else(|| DbError::Validation("word count overflow".into()))?;
    }
    if expected != n {
        return Err(DbError::Validation(format!(
            "registry covers {expected} words, index holds {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest {0} lists no documents")]
    Empty(PathBuf),
    #[error("manifest line {line}: expected path<TAB>title<TAB>url")]
    Malformed { line: usize },
    #[error("manifest line {line}: cannot read {path}: {source}")]
    Document {
        line: usize,
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub title: String,
    pub url: String,
}

/// Reads a `path<TAB>title<TAB>url` manifest. Relative paths are resolved
/// against the manifest's directory; blank lines and `#` comments are skipped.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, ManifestError> {
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 || cols.len() > 3 || cols[0].is_empty() {
            return Err(ManifestError::Malformed { line: i + 1 });
        }
        rows.push(ManifestRow {
            path: base.join(cols[0]),
            title: cols[1].to_string(),
            url: cols.get(2).unwrap_or(&"").to_string(),
        });
    }
    if rows.is_empty() {
        return Err(ManifestError::Empty(path.to_path_buf()));
    }
    Ok(rows)
}

/// Loads every document a manifest lists, keeping absolute plaintext paths.
pub fn load_manifest_documents(path: &Path) -> Result<Vec<SourceDocument>, ManifestError> {
    let rows = read_manifest(path)?;
    let mut docs = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        let text = fs::read(&row.path).map_err(|source| ManifestError::Document {
            line: i + 1,
            path: row.path.clone(),
            source,
        })?;
        let abs = fs::canonicalize(&row.path).unwrap_or(row.path);
        docs.push(SourceDocument {
            title: row.title,
            url: row.url,
            text,
            plaintext_path: Some(abs.to_string_lossy().into_owned()),
        });
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(title: &str, text: &str) -> SourceDocument {
        SourceDocument {
            title: title.into(),
            url: format!("https://example.org/{title}"),
            text: text.as_bytes().to_vec(),
            plaintext_path: None,
        }
    }

    fn words(n: usize, seed: &str) -> String {
        (0..n).map(|i| format!("{seed}{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn offsets_follow_input_order() {
        let db = CorpusDb::ingest(
            vec![doc("a", &words(10, "a")), doc("b", &words(5, "b"))],
            &Alphabet::default(),
        )
        .unwrap();
        let offsets: Vec<_> = db.registry().iter().map(|e| e.word_offset).collect();
        assert_eq!(offsets, [0, 10]);
        assert_eq!(db.total_words(), 15);
        assert_eq!(db.resolve(0).unwrap(), (0, 0));
        assert_eq!(db.resolve(9).unwrap(), (0, 9));
        assert_eq!(db.resolve(10).unwrap(), (1, 0));
        assert_eq!(db.resolve(14).unwrap(), (1, 4));
        assert!(matches!(
            db.resolve(15),
            Err(DbError::OutOfRange {
                position: 15,
                total: 15
            })
        ));
    }

    #[test]
    fn empty_documents_keep_offsets_contiguous() {
        let db = CorpusDb::ingest(
            vec![doc("a", &words(3, "a")), doc("e", ""), doc("b", &words(2, "b"))],
            &Alphabet::default(),
        )
        .unwrap();
        let spans: Vec<_> = db
            .registry()
            .iter()
            .map(|e| (e.word_offset, e.word_count))
            .collect();
        assert_eq!(spans, [(0, 3), (3, 0), (3, 2)]);
        assert_eq!(db.resolve(3).unwrap(), (2, 0));
    }

    #[test]
    fn resolve_agrees_with_linear_scan() {
        let sizes = [0, 4, 0, 0, 7, 1, 0, 9];
        let docs: Vec<_> = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| doc(&format!("d{i}"), &words(n, "w")))
            .collect();
        let db = CorpusDb::ingest(docs, &Alphabet::default()).unwrap();
        let mut owner = Vec::new();
        for (d, &n) in sizes.iter().enumerate() {
            for local in 0..n {
                owner.push((d, local));
            }
        }
        for (pos, &expect) in owner.iter().enumerate() {
            assert_eq!(db.resolve(pos).unwrap(), expect);
        }
    }

    #[test]
    fn empty_corpus_and_bad_utf8() {
        assert!(matches!(
            CorpusDb::ingest(vec![], &Alphabet::default()),
            Err(DbError::EmptyCorpus)
        ));
        let mut bad = doc("bad", "");
        bad.text = b"ok \xfe".to_vec();
        match CorpusDb::ingest(vec![doc("a", "x y"), bad], &Alphabet::default()) {
            Err(DbError::DocumentEncoding(f)) => {
                assert_eq!(f.len(), 1);
                assert_eq!(f[0].index, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn walkthrough_reference_as_single_document() {
        let db = CorpusDb::from_sequences([("fig", b"EDNGQDRGDQDRN".as_slice())], &Alphabet::default())
            .unwrap();
        let r = db.index().backward_search(b"DNGQDRGD");
        let hits = db.index().locate(r);
        assert_eq!(hits, [1]);
        assert_eq!(db.resolve(1).unwrap(), (0, 1));
    }

    #[test]
    fn bytes_round_trip() {
        let db = CorpusDb::ingest(
            vec![doc("a", &words(30, "a")), doc("b", &words(20, "b")), doc("c", "")],
            &Alphabet::default(),
        )
        .unwrap();
        let back = CorpusDb::from_bytes(&db.to_bytes()).unwrap();
        assert_eq!(back, db);
    }

    #[test]
    fn index_only_file_is_a_format_error() {
        let db = CorpusDb::ingest(vec![doc("a", "x y z")], &Alphabet::default()).unwrap();
        let bytes = db.index().serialize();
        assert!(matches!(CorpusDb::from_bytes(&bytes), Err(DbError::Format(_))));
    }

    #[test]
    fn overlapping_registry_is_rejected() {
        let mut db = CorpusDb::ingest(
            vec![doc("a", &words(4, "a")), doc("b", &words(4, "b"))],
            &Alphabet::default(),
        )
        .unwrap();
        db.registry[1].word_offset = 2;
        db.registry[1].word_count = 6;
        assert!(matches!(
            CorpusDb::from_bytes(&db.to_bytes()),
            Err(DbError::Validation(_))
        ));
        db.registry[1].word_offset = 4;
        db.registry[1].word_count = 5;
        assert!(matches!(
            CorpusDb::from_bytes(&db.to_bytes()),
            Err(DbError::Validation(_))
        ));
    }

    #[test]
    fn corrupt_registry_checksum() {
        let db = CorpusDb::ingest(vec![doc("a", "x y z")], &Alphabet::default()).unwrap();
        let mut bytes = db.to_bytes();
        let i = bytes.len() - 12;
        bytes[i] ^= 0xff;
        assert!(matches!(
            CorpusDb::from_bytes(&bytes),
            Err(DbError::Load(LoadError::ChecksumMismatch { .. }))
        ));
    }

    #[test]
    fn manifest_parsing() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.txt"), "alpha beta").unwrap();
        let m = dir.path().join("manifest.tsv");
        fs::write(&m, "# comment\na.txt\tAlpha\thttps://a\n").unwrap();
        let docs = load_manifest_documents(&m).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].title, "Alpha");
        assert!(docs[0].plaintext_path.as_ref().unwrap().ends_with("a.txt"));

        fs::write(&m, "\n# only comments\n").unwrap();
        assert!(matches!(read_manifest(&m), Err(ManifestError::Empty(_))));
        fs::write(&m, "just-a-path\n").unwrap();
        assert!(matches!(
            read_manifest(&m),
            Err(ManifestError::Malformed { line: 1 })
        ));
        fs::write(&m, "missing.txt\tM\t\n").unwrap();
        assert!(matches!(
            load_manifest_documents(&m),
            Err(ManifestError::Document { .. })
        ));
    }

    #[test]
    fn reference_text_slices_retained_plaintext() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.txt");
        fs::write(&p, "one two  three four").unwrap();
        let mut d = doc("r", "one two  three four");
        d.plaintext_path = Some(p.to_string_lossy().into_owned());
        let db = CorpusDb::ingest(vec![d], &Alphabet::default()).unwrap();
        assert_eq!(db.reference_text(0, 1, 3).as_deref(), Some("two  three"));
        assert_eq!(db.reference_text(0, 3, 5), None);
        fs::write(&p, "changed").unwrap();
        assert_eq!(db.reference_text(0, 1, 3), None);
    }
}
