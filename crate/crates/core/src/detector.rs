//! Seed-and-merge duplicate detection.
//!
//! A query sequence is cut into overlapping k-mers (stride 1). Each k-mer is
//! searched exactly against the corpus index; every occurrence that lies
//! inside a single reference document becomes a seed hit. Hits on the same
//! document and diagonal (`ref_start - query_start`) are chained when they
//! overlap, abut, or leave at most `max_gap` uncovered words between them.
//! Chains shorter than `min_report` words are dropped.

use thiserror::Error;

use crate::corpus_db::{CorpusDb, DbError};
use crate::encoder::Alphabet;

pub const DEFAULT_SEED_K: usize = 8;
pub const DEFAULT_MAX_GAP: usize = 3;
pub const DEFAULT_MIN_REPORT: usize = 12;

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("pairwise comparison needs at least 2 documents, got {0}")]
    TooFewDocuments(usize),
    #[error("seed length must be at least 1")]
    ZeroSeed,
    #[error(transparent)]
    Db(#[from] DbError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorConfig {
    pub seed_k: usize,
    pub max_gap: usize,
    pub min_report: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            seed_k: DEFAULT_SEED_K,
            max_gap: DEFAULT_MAX_GAP,
            min_report: DEFAULT_MIN_REPORT,
        }
    }
}

/// One exact k-mer occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SeedHit {
    pub query_start: usize,
    /// Global word position in the corpus text.
    pub ref_start: usize,
    pub ref_doc: usize,
    /// Word position within `ref_doc`.
    pub ref_doc_start: usize,
    pub length: usize,
}

impl SeedHit {
    pub fn diagonal(&self) -> isize {
        self.ref_doc_start as isize - self.query_start as isize
    }
}

/// One merged duplicate region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchRecord {
    pub query_start: usize,
    pub query_end: usize,
    pub ref_doc: usize,
    pub ref_start: usize,
    pub ref_end: usize,
    pub matched_words: usize,
    /// Lengths of the uncovered stretches inside the record, in query order.
    pub mismatch_gaps: Vec<usize>,
    /// Query word index where each gap begins.
    pub gap_starts: Vec<usize>,
    /// Longest stretch of consecutive matched words.
    pub longest_run: usize,
}

impl MatchRecord {
    pub fn span(&self) -> usize {
        self.query_end - self.query_start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlagiarismReport {
    pub doc_id: String,
    pub query_word_count: usize,
    pub matches: Vec<MatchRecord>,
    pub longest_ccw: usize,
    pub coverage_percent: f64,
}

/// Overlapping windows of length `k` at stride 1.
pub fn split_kmers(pbs: &[u8], k: usize) -> Vec<(usize, &[u8])> {
    if k == 0 || pbs.len() < k {
        return Vec::new();
    }
    pbs.windows(k).enumerate().collect()
}

/// Every exact occurrence of every k-mer of `pbs` that does not cross a
/// document boundary.
pub fn seed_search(db: &CorpusDb, pbs: &[u8], k: usize) -> Vec<SeedHit> {
    seed_search_excluding(db, pbs, k, None)
}

/// Like [`seed_search`], dropping hits that are the query itself: hits in
/// document `self_doc` at the query's own position.
pub fn seed_search_excluding(
    db: &CorpusDb,
    pbs: &[u8],
    k: usize,
    self_doc: Option<usize>,
) -> Vec<SeedHit> {
    let index = db.index();
    let registry = db.registry();
    let kmers = split_kmers(pbs, k);
    let patterns: Vec<&[u8]> = kmers.iter().map(|&(_, kmer)| kmer).collect();
    let ranges = index.backward_search_many(&patterns);

    // An occurrence of k-mer s+1 at p+1 whose preceding text character is
    // pbs[s] is an occurrence of k-mer s at p, one LF step away. Only rows
    // not reached that way need a full locate.
    let mut rows: Vec<Vec<(usize, Origin)>> = vec![Vec::new(); kmers.len()];
    let mut roots = Vec::new();
    for s in (0..kmers.len()).rev() {
        let range = ranges[s];
        if range.is_empty() {
            continue;
        }
        let mut derived: Vec<(usize, usize)> = Vec::new();
        if let (Some(next), Some(code)) = (rows.get(s + 1), index.alphabet().code_of(pbs[s])) {
            for (j, &(row, _)) in next.iter().enumerate() {
                if index.bwt_code(row) == code {
                    derived.push((index.lf(row), j));
                }
            }
        }
        derived.sort_unstable();
        rows[s] = (range.lo..range.hi)
            .map(|row| match derived.binary_search_by_key(&row, |d| d.0) {
                Ok(at) => (row, Origin::Next(derived[at].1)),
                Err(_) => {
                    roots.push(row);
                    (row, Origin::Root(roots.len() - 1))
                }
            })
            .collect();
    }
    let root_positions = index.locate_rows(&roots);

    let mut hits = Vec::new();
    let mut next_positions: Vec<usize> = Vec::new();
    for s in (0..kmers.len()).rev() {
        let positions: Vec<usize> = rows[s]
            .iter()
            .map(|&(_, origin)| match origin {
                Origin::Root(t) => root_positions[t],
                Origin::Next(j) => next_positions[j] - 1,
            })
            .collect();
        let query_start = kmers[s].0;
        for &ref_start in &positions {
            let d = registry.partition_point(|e| e.word_end() <= ref_start);
            let entry = &registry[d];
            if ref_start + k > entry.word_end() {
                continue;
            }
            let ref_doc_start = ref_start - entry.word_offset;
            if self_doc == Some(entry.doc_id) && ref_doc_start == query_start {
                continue;
            }
            hits.push(SeedHit {
                query_start,
                ref_start,
                ref_doc: entry.doc_id,
                ref_doc_start,
                length: k,
            });
        }
        next_positions = positions;
    }
    hits.reverse();
    hits
}

#[derive(Debug, Clone, Copy)]
enum Origin {
    /// Index into the rows located directly.
    Root(usize),
    /// Index into the following k-mer's rows.
    Next(usize),
}

/// Chains co-diagonal hits into records and drops records shorter than
/// `min_report` words.
pub fn merge_hits(hits: &[SeedHit], max_gap: usize, min_report: usize) -> Vec<MatchRecord> {
    let mut sorted: Vec<&SeedHit> = hits.iter().collect();
    sorted.sort_by_key(|h| (h.ref_doc, h.diagonal(), h.query_start, h.length));

    let mut records = Vec::new();
    let mut current: Option<Chain> = None;
    for h in sorted {
        let h_end = h.query_start + h.length;
        if let Some(c) = current.as_mut() {
            if c.ref_doc == h.ref_doc
                && c.diagonal == h.diagonal()
                && h.query_start <= c.end + max_gap
            {
                if h.query_start > c.end {
                    c.gaps.push((c.end, h.query_start - c.end));
                }
                c.end = c.end.max(h_end);
                continue;
            }
        }
        if let Some(c) = current.take() {
            c.finish(min_report, &mut records);
        }
        current = Some(Chain {
            ref_doc: h.ref_doc,
            diagonal: h.diagonal(),
            start: h.query_start,
            end: h_end,
            gaps: Vec::new(),
        });
    }
    if let Some(c) = current {
        c.finish(min_report, &mut records);
    }
    records.sort_by_key(|r| (r.query_start, r.ref_doc, r.ref_start));
    records
}

struct Chain {
    ref_doc: usize,
    diagonal: isize,
    start: usize,
    end: usize,
    gaps: Vec<(usize, usize)>,
}

impl Chain {
    fn finish(self, min_report: usize, out: &mut Vec<MatchRecord>) {
        let span = self.end - self.start;
        if span < min_report {
            return;
        }
        let mut longest_run = 0;
        let mut run_start = self.start;
        for &(g_start, g_len) in &self.gaps {
            longest_run = longest_run.max(g_start - run_start);
            run_start = g_start + g_len;
        }
        longest_run = longest_run.max(self.end - run_start);
        let gap_total: usize = self.gaps.iter().map(|g| g.1).sum();
        let ref_start = (self.start as isize + self.diagonal) as usize;
        out.push(MatchRecord {
            query_start: self.start,
            query_end: self.end,
            ref_doc: self.ref_doc,
            ref_start,
            ref_end: ref_start + span,
            matched_words: span - gap_total,
            mismatch_gaps: self.gaps.iter().map(|g| g.1).collect(),
            gap_starts: self.gaps.iter().map(|g| g.0).collect(),
            longest_run,
        });
    }
}

/// Longest matched run and copy coverage over a set of records.
pub fn score(
    doc_id: impl Into<String>,
    records: Vec<MatchRecord>,
    query_word_count: usize,
) -> PlagiarismReport {
    let longest_ccw = records.iter().map(|r| r.longest_run).max().unwrap_or(0);
    let mut spans: Vec<(usize, usize)> = records
        .iter()
        .map(|r| (r.query_start, r.query_end.min(query_word_count)))
        .collect();
    spans.sort_unstable();
    let mut covered = 0;
    let mut reach = 0;
    for (s, e) in spans {
        let s = s.max(reach);
        if e > s {
            covered += e - s;
            reach = e;
        }
    }
    let coverage_percent = if query_word_count == 0 {
        0.0
    } else {
        100.0 * covered as f64 / query_word_count as f64
    };
    PlagiarismReport {
        doc_id: doc_id.into(),
        query_word_count,
        matches: records,
        longest_ccw,
        coverage_percent,
    }
}

/// Full detection of one query against a corpus.
pub fn detect(
    db: &CorpusDb,
    doc_id: impl Into<String>,
    pbs: &[u8],
    cfg: &DetectorConfig,
) -> Result<PlagiarismReport, DetectError> {
    if cfg.seed_k == 0 {
        return Err(DetectError::ZeroSeed);
    }
    let hits = seed_search(db, pbs, cfg.seed_k);
    let records = merge_hits(&hits, cfg.max_gap, cfg.min_report);
    Ok(score(doc_id, records, pbs.len()))
}

/// Compares every document against all the others through one temporary
/// index. Reports come back in input order; `ref_doc` in each match is the
/// input position of the other document.
pub fn pairwise(
    docs: &[(String, Vec<u8>)],
    alphabet: &Alphabet,
    cfg: &DetectorConfig,
) -> Result<Vec<PlagiarismReport>, DetectError> {
    if docs.len() < 2 {
        return Err(DetectError::TooFewDocuments(docs.len()));
    }
    if cfg.seed_k == 0 {
        return Err(DetectError::ZeroSeed);
    }
    let db = CorpusDb::from_sequences(docs.iter().map(|(id, s)| (id.as_str(), s.as_slice())), alphabet)?;
    let reports = docs
        .iter()
        .enumerate()
        .map(|(i, (id, pbs))| {
            let hits = seed_search_excluding(&db, pbs, cfg.seed_k, Some(i));
            let records = merge_hits(&hits, cfg.max_gap, cfg.min_report);
            score(id.clone(), records, pbs.len())
        })
        .collect();
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn a12() -> Alphabet {
        Alphabet::default()
    }

    fn random_pbs(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        let chars = a12().chars().to_vec();
        (0..n).map(|_| chars[rng.random_range(0..chars.len())]).collect()
    }

    fn hit(query_start: usize, ref_doc_start: usize, length: usize) -> SeedHit {
        SeedHit {
            query_start,
            ref_start: ref_doc_start,
            ref_doc: 0,
            ref_doc_start,
            length,
        }
    }

    #[test]
    fn kmer_windows() {
        let s = [b'A'; 12];
        let k: Vec<usize> = split_kmers(&s, 8).iter().map(|k| k.0).collect();
        assert_eq!(k, [0, 1, 2, 3, 4]);
        assert_eq!(split_kmers(&s[..8], 8).len(), 1);
        assert!(split_kmers(&s[..7], 8).is_empty());
        assert!(split_kmers(&s, 0).is_empty());
    }

    #[test]
    fn seed_on_walkthrough_reference() {
        let db = CorpusDb::from_sequences([("r", b"EDNGQDRGDQDRN".as_slice())], &a12()).unwrap();
        let hits = seed_search(&db, b"DNGQDRGD", 8);
        assert_eq!(hits.len(), 1);
        assert_eq!((hits[0].query_start, hits[0].ref_start), (0, 1));
        assert!(seed_search(&db, b"AAAAAAAA", 8).is_empty());
    }

    #[test]
    fn query_equal_to_reference_hits_every_offset_on_diagonal_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let text = random_pbs(&mut rng, 60);
        let db = CorpusDb::from_sequences([("r", text.as_slice())], &a12()).unwrap();
        let hits = seed_search(&db, &text, 8);
        let on_diag: Vec<usize> = hits
            .iter()
            .filter(|h| h.diagonal() == 0)
            .map(|h| h.query_start)
            .collect();
        assert_eq!(on_diag, (0..=52).collect::<Vec<_>>());
        // Off-diagonal hits are genuine repeats.
        for h in hits.iter().filter(|h| h.diagonal() != 0) {
            assert_eq!(
                &text[h.query_start..h.query_start + 8],
                &text[h.ref_start..h.ref_start + 8]
            );
        }
    }

    #[test]
    fn overlapping_seeds_merge() {
        let hits = [
            SeedHit {
                query_start: 0,
                ref_start: 10,
                ref_doc: 0,
                ref_doc_start: 10,
                length: 8,
            },
            SeedHit {
                query_start: 4,
                ref_start: 14,
                ref_doc: 0,
                ref_doc_start: 14,
                length: 8,
            },
        ];
        let recs = merge_hits(&hits, 3, 12);
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!((r.query_start, r.query_end, r.ref_start, r.ref_end), (0, 12, 10, 22));
        assert!(r.mismatch_gaps.is_empty());
        assert_eq!(r.matched_words, 12);
        assert_eq!(r.longest_run, 12);
    }

    #[test]
    fn three_word_gap_merges_four_does_not() {
        let recs = merge_hits(&[hit(0, 0, 8), hit(11, 11, 8)], 3, 12);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].span(), 19);
        assert_eq!(recs[0].mismatch_gaps, [3]);
        assert_eq!(recs[0].gap_starts, [8]);
        assert_eq!(recs[0].matched_words, 16);
        assert_eq!(recs[0].longest_run, 8);

        assert!(merge_hits(&[hit(0, 0, 8), hit(12, 12, 8)], 3, 12).is_empty());
        assert_eq!(merge_hits(&[hit(0, 0, 8), hit(12, 12, 8)], 3, 8).len(), 2);
    }

    #[test]
    fn different_diagonals_and_documents_stay_apart() {
        let mut other_doc = hit(4, 4, 8);
        other_doc.ref_doc = 1;
        let recs = merge_hits(&[hit(0, 0, 8), hit(4, 5, 8), other_doc], 3, 8);
        assert_eq!(recs.len(), 3);
        assert!(merge_hits(&[hit(0, 0, 8), hit(4, 5, 8)], 3, 12).is_empty());
    }

    #[test]
    fn coverage_and_ccw() {
        let rec = |qs: usize, qe: usize| MatchRecord {
            query_start: qs,
            query_end: qe,
            ref_doc: 0,
            ref_start: qs,
            ref_end: qe,
            matched_words: qe - qs,
            mismatch_gaps: vec![],
            gap_starts: vec![],
            longest_run: qe - qs,
        };
        let r = score("q", vec![rec(0, 12), rec(50, 62)], 100);
        assert_eq!(r.coverage_percent, 24.0);
        assert_eq!(r.longest_ccw, 12);

        let full = score("q", vec![rec(0, 40)], 40);
        assert_eq!(full.coverage_percent, 100.0);
        assert_eq!(full.longest_ccw, 40);

        // One page of a 100-page article.
        let page = 300;
        let one_page = score("q", vec![rec(7 * page, 8 * page)], 100 * page);
        assert_eq!(one_page.coverage_percent, 1.0);

        // Overlapping records are counted once.
        let overlap = score("q", vec![rec(0, 20), rec(10, 30)], 100);
        assert_eq!(overlap.coverage_percent, 30.0);

        let none = score("q", vec![], 0);
        assert_eq!((none.coverage_percent, none.longest_ccw), (0.0, 0));
    }

    #[test]
    fn pairwise_identical_documents() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_pbs(&mut rng, 50);
        let docs = vec![("a".to_string(), a.clone()), ("b".to_string(), a)];
        let reports = pairwise(&docs, &a12(), &DetectorConfig::default()).unwrap();
        for (i, r) in reports.iter().enumerate() {
            assert_eq!(r.coverage_percent, 100.0);
            assert_eq!(r.longest_ccw, 50);
            assert!(r.matches.iter().all(|m| m.ref_doc != i));
        }
    }

    #[test]
    fn pairwise_excludes_self_position_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_pbs(&mut rng, 80);
        let b = random_pbs(&mut rng, 80);
        let db = CorpusDb::from_sequences([("a", a.as_slice()), ("b", b.as_slice())], &a12()).unwrap();
        let hits = seed_search_excluding(&db, &a, 8, Some(0));
        let recs = merge_hits(&hits, 3, 12);
        assert!(recs.is_empty());
        assert!(matches!(
            pairwise(&[("a".into(), a)], &a12(), &DetectorConfig::default()),
            Err(DetectError::TooFewDocuments(1))
        ));
    }

    #[test]
    fn pairwise_shared_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let shared = random_pbs(&mut rng, 12);
        let mut a = random_pbs(&mut rng, 40);
        let mut b = random_pbs(&mut rng, 40);
        let c = random_pbs(&mut rng, 60);
        a.splice(10..10, shared.iter().copied());
        b.splice(25..25, shared.iter().copied());
        let docs = vec![("A".to_string(), a), ("B".to_string(), b), ("C".to_string(), c)];
        let reports = pairwise(&docs, &a12(), &DetectorConfig::default()).unwrap();
        assert_eq!(reports[0].matches.len(), 1);
        assert_eq!(reports[0].matches[0].ref_doc, 1);
        assert_eq!(
            (reports[0].matches[0].query_start, reports[0].matches[0].ref_start),
            (10, 25)
        );
        assert_eq!(reports[1].matches.len(), 1);
        assert_eq!(reports[1].matches[0].ref_doc, 0);
        assert!(reports[2].matches.is_empty());
    }

    #[test]
    fn boundary_straddling_duplicate_is_not_one_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d0 = random_pbs(&mut rng, 30);
        let d1 = random_pbs(&mut rng, 30);
        let db = CorpusDb::from_sequences([("d0", d0.as_slice()), ("d1", d1.as_slice())], &a12()).unwrap();
        // 8 words from the end of d0 followed by 8 from the start of d1.
        let mut query = d0[22..].to_vec();
        query.extend_from_slice(&d1[..8]);
        let report = detect(&db, "q", &query, &DetectorConfig::default()).unwrap();
        assert!(report.matches.is_empty());
        let hits = seed_search(&db, &query, 8);
        for h in &hits {
            let entry = &db.registry()[h.ref_doc];
            assert!(h.ref_start + h.length <= entry.word_end());
        }
    }

    fn all_pairs_kgram_occurrences(query: &[u8], docs: &[Vec<u8>], k: usize) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (d, doc) in docs.iter().enumerate() {
            for q in 0..query.len().saturating_sub(k - 1) {
                for r in 0..doc.len().saturating_sub(k - 1) {
                    if query[q..q + k] == doc[r..r + k] {
                        out.push((q, d, r));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn seed_completeness_against_all_pairs_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        // Small alphabet so chance k-gram repeats actually occur.
        let a3 = Alphabet::new(3).unwrap();
        for _ in 0..20 {
            let docs: Vec<Vec<u8>> = (0..3)
                .map(|_| {
                    let n = rng.random_range(0..120);
                    (0..n).map(|_| a3.chars()[rng.random_range(0..3)]).collect()
                })
                .collect();
            let qn = rng.random_range(0..80);
            let query: Vec<u8> = (0..qn).map(|_| a3.chars()[rng.random_range(0..3)]).collect();
            let named: Vec<(String, &[u8])> =
                docs.iter().enumerate().map(|(i, d)| (format!("d{i}"), d.as_slice())).collect();
            let db = CorpusDb::from_sequences(named.iter().map(|(n, d)| (n.as_str(), *d)), &a3).unwrap();
            let k = 5;
            let mut got: Vec<_> = seed_search(&db, &query, k)
                .iter()
                .map(|h| (h.query_start, h.ref_doc, h.ref_doc_start))
                .collect();
            got.sort_unstable();
            assert_eq!(got, all_pairs_kgram_occurrences(&query, &docs, k));

            // Merge soundness: covered words equal, gap edges differ.
            for rec in merge_hits(&seed_search(&db, &query, k), 3, 8) {
                let doc = &docs[rec.ref_doc];
                let off = rec.ref_start as isize - rec.query_start as isize;
                let in_gap = |q: usize| {
                    rec.gap_starts
                        .iter()
                        .zip(&rec.mismatch_gaps)
                        .any(|(&s, &l)| q >= s && q < s + l)
                };
                for (q, &c) in query.iter().enumerate().take(rec.query_end).skip(rec.query_start) {
                    if !in_gap(q) {
                        assert_eq!(c, doc[(q as isize + off) as usize]);
                    }
                }
                for (&s, &l) in rec.gap_starts.iter().zip(&rec.mismatch_gaps) {
                    assert!(l <= 3);
                    let r = |q: usize| (q as isize + off) as usize;
                    assert_ne!(query[s], doc[r(s)]);
                    assert_ne!(query[s + l - 1], doc[r(s + l - 1)]);
                }
                assert_eq!(rec.matched_words + rec.mismatch_gaps.iter().sum::<usize>(), rec.span());
                assert_eq!(rec.ref_end - rec.ref_start, rec.span());
            }
        }
    }

    #[test]
    fn seed_search_on_copied_runs_across_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a2 = Alphabet::new(2).unwrap();
        for _ in 0..30 {
            let docs: Vec<Vec<u8>> = (0..4)
                .map(|_| {
                    let n = rng.random_range(1..200);
                    (0..n).map(|_| a2.chars()[rng.random_range(0..2)]).collect()
                })
                .collect();
            // Stitch the query from document tails and heads so copied runs
            // end exactly where a document does.
            let mut query = Vec::new();
            for _ in 0..3 {
                let d = &docs[rng.random_range(0..docs.len())];
                let from = rng.random_range(0..d.len());
                query.extend_from_slice(&d[from..]);
                let e = &docs[rng.random_range(0..docs.len())];
                query.extend_from_slice(&e[..rng.random_range(0..=e.len())]);
            }
            let named: Vec<(String, &[u8])> =
                docs.iter().enumerate().map(|(i, d)| (format!("d{i}"), d.as_slice())).collect();
            let db = CorpusDb::from_sequences(named.iter().map(|(n, d)| (n.as_str(), *d)), &a2).unwrap();
            for k in [1, 4, 9] {
                let mut got: Vec<_> = seed_search(&db, &query, k)
                    .iter()
                    .map(|h| (h.query_start, h.ref_doc, h.ref_doc_start))
                    .collect();
                got.sort_unstable();
                assert_eq!(got, all_pairs_kgram_occurrences(&query, &docs, k), "k={k}");
            }
        }
    }

    #[test]
    fn threshold_on_planted_duplicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..30 {
            let reference = random_pbs(&mut rng, 400);
            let db = CorpusDb::from_sequences([("ref", reference.as_slice())], &a12()).unwrap();
            for (len, expect) in [(11usize, 0usize), (12, 1)] {
                let at = rng.random_range(1..reference.len() - len - 1);
                let mut query = random_pbs(&mut rng, 30);
                // Flanks must differ from the reference neighbours, or a
                // chance match would lengthen the planted run.
                let other = |c: u8| a12().chars().iter().copied().find(|&x| x != c).unwrap();
                if query[14] == reference[at - 1] {
                    query[14] = other(reference[at - 1]);
                }
                if query[15] == reference[at + len] {
                    query[15] = other(reference[at + len]);
                }
                query.splice(15..15, reference[at..at + len].iter().copied());
                let r = detect(&db, "q", &query, &DetectorConfig::default()).unwrap();
                let planted = r
                    .matches
                    .iter()
                    .filter(|m| m.query_start <= 15 && m.query_end >= 15 + len)
                    .count();
                assert_eq!(planted, expect);
                assert!(r.matches.iter().all(|m| m.span() >= 12));
            }
        }
    }
}
