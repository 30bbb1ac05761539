#![allow(dead_code)]

use pbs_core::corpus_db::{CorpusDb, SourceDocument};
use pbs_core::encoder::{encode_document, tokenize, write_fasta, Alphabet};
use pbs_core::synth::EnglishGenerator;

/// `n` English-like documents of roughly `words` words each.
pub fn english_docs(seed: u64, n: usize, words: usize) -> Vec<String> {
    let mut g = EnglishGenerator::new(seed);
    (0..n).map(|_| g.prose(words, 80)).collect()
}

pub fn build_db(texts: &[String]) -> CorpusDb {
    let docs = texts
        .iter()
        .enumerate()
        .map(|(i, t)| SourceDocument {
            title: format!("doc{i}"),
            url: format!("https://example.org/{i}"),
            text: t.as_bytes().to_vec(),
            plaintext_path: None,
        })
        .collect();
    CorpusDb::ingest(docs, &Alphabet::default()).unwrap()
}

pub fn words(text: &str) -> Vec<&str> {
    tokenize(text).into_iter().map(|t| t.text(text)).collect()
}

/// Fresh prose around `len` words copied from `source` starting at word `at`.
pub fn planted_query(seed: u64, source: &str, at: usize, len: usize, flank: usize) -> String {
    let mut g = EnglishGenerator::new(seed);
    let w = words(source);
    format!("{}\n{}\n{}", g.prose(flank, 80), w[at..at + len].join(" "), g.prose(flank, 80))
}

pub fn fasta_of(id: &str, text: &str) -> String {
    write_fasta(&encode_document(id, text, &Alphabet::default()), id)
}
