//! Result metadata exchanged between service and client.
//!
//! Everything is expressed in word indices. The query's plaintext never
//! appears; `refSnippet` carries reference-side text only, and only when the
//! server retains the reference plaintext.

use serde::{Deserialize, Serialize};

use crate::corpus_db::CorpusDb;
use crate::detector::PlagiarismReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchMetadata {
    pub query_start: usize,
    pub query_end: usize,
    pub ref_doc_id: usize,
    pub ref_title: String,
    pub ref_url: String,
    pub ref_start: usize,
    pub ref_end: usize,
    pub matched_words: usize,
    pub mismatch_gaps: Vec<usize>,
    /// Query word index where each entry of `mismatch_gaps` begins.
    pub gap_starts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_snippet: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultMetadata {
    pub query_id: String,
    pub query_word_count: usize,
    pub longest_ccw: usize,
    pub coverage_percent: f64,
    pub matches: Vec<MatchMetadata>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMetadata {
    pub results: Vec<ResultMetadata>,
}

impl ResultMetadata {
    /// Attaches titles and URLs from `db`'s registry. Snippets are added
    /// when `snippets` is set and the reference plaintext is available.
    pub fn from_report(report: &PlagiarismReport, db: &CorpusDb, snippets: bool) -> Self {
        Self::build(report, |doc| {
            db.entry(doc)
                .map(|e| (e.title.clone(), e.url.clone()))
                .unwrap_or_default()
        }, |doc, s, e| if snippets { db.reference_text(doc, s, e) } else { None })
    }

    /// For pairwise runs: the reference is another uploaded document, named
    /// by `names[ref_doc]`, with no URL and no snippet.
    pub fn from_pairwise(report: &PlagiarismReport, names: &[String]) -> Self {
        Self::build(
            report,
            |doc| (names.get(doc).cloned().unwrap_or_default(), String::new()),
            |_, _, _| None,
        )
    }

    fn build(
        report: &PlagiarismReport,
        describe: impl Fn(usize) -> (String, String),
        snippet: impl Fn(usize, usize, usize) -> Option<String>,
    ) -> Self {
        let mut matches: Vec<MatchMetadata> = report
            .matches
            .iter()
            .map(|m| {
                let (ref_title, ref_url) = describe(m.ref_doc);
                MatchMetadata {
                    query_start: m.query_start,
                    query_end: m.query_end,
                    ref_doc_id: m.ref_doc,
                    ref_title,
                    ref_url,
                    ref_start: m.ref_start,
                    ref_end: m.ref_end,
                    matched_words: m.matched_words,
                    mismatch_gaps: m.mismatch_gaps.clone(),
                    gap_starts: m.gap_starts.clone(),
                    ref_snippet: snippet(m.ref_doc, m.ref_start, m.ref_end),
                }
            })
            .collect();
        matches.sort_by_key(|m| (m.query_start, m.ref_doc_id, m.ref_start, m.query_end));
        Self {
            query_id: report.doc_id.clone(),
            query_word_count: report.query_word_count,
            longest_ccw: report.longest_ccw,
            coverage_percent: report.coverage_percent,
            matches,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
