//! Deterministic synthetic corpora.
//!
//! No real corpus ships with the crate, so tests, benchmarks and the
//! evaluation commands draw on seeded generators: English-like prose with a
//! Zipf vocabulary and recycled near-duplicate sentences, Chinese-like prose
//! over CJK ideographs, and scholarly documents with labeled reference lines.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Zipf sampler over ranks `0..n`.
#[derive(Debug, Clone)]
pub struct Zipf {
    cdf: Vec<f64>,
}

impl Zipf {
    pub fn new(n: usize, exponent: f64) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (1..=n)
            .map(|r| {
                acc += 1.0 / (r as f64).powf(exponent);
                acc
            })
            .collect();
        for v in &mut cdf {
            *v /= acc;
        }
        Self { cdf }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1)
    }
}

const CONSONANTS: &[u8] = b"bcdfghklmnprstvwz";
const VOWELS: &[u8] = b"aeiou";

// Relative frequency of English word lengths 1..=13 in running text.
const LENGTH_WEIGHTS: [f64; 13] = [
    3.0, 17.0, 20.0, 16.0, 11.0, 9.0, 8.0, 6.0, 4.0, 3.0, 1.5, 1.0, 0.5,
];

fn pseudo_word(rng: &mut impl Rng, len: usize) -> String {
    let mut w = String::with_capacity(len);
    let mut vowel = rng.random_bool(0.3);
    while w.len() < len {
        let set = if vowel { VOWELS } else { CONSONANTS };
        w.push(*set.choose(rng).unwrap() as char);
        vowel = !vowel;
    }
    w
}

/// Distinct pseudo-English words in random order.
pub fn english_vocabulary(rng: &mut impl Rng, size: usize) -> Vec<String> {
    let total: f64 = LENGTH_WEIGHTS.iter().sum();
    let mut seen = std::collections::HashSet::new();
    let mut words = Vec::with_capacity(size);
    while words.len() < size {
        let mut u = rng.random::<f64>() * total;
        let mut len = 1;
        for (i, w) in LENGTH_WEIGHTS.iter().enumerate() {
            if u < *w {
                len = i + 1;
                break;
            }
            u -= w;
        }
        let word = pseudo_word(rng, len);
        if seen.insert(word.clone()) {
            words.push(word);
        }
    }
    // Length weights are running-text frequencies, so lengths stay
    // independent of frequency rank.
    words
}

/// Streaming English-like prose generator.
pub struct EnglishGenerator {
    rng: ChaCha8Rng,
    vocab: Vec<String>,
    zipf: Zipf,
    recent: Vec<Vec<usize>>,
}

impl EnglishGenerator {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = english_vocabulary(&mut rng, 20_000);
        let zipf = Zipf::new(vocab.len(), 1.05);
        Self {
            rng,
            vocab,
            zipf,
            recent: Vec::new(),
        }
    }

    fn sentence_words(&mut self) -> Vec<usize> {
        // Some sentences recycle an earlier one with a single substitution,
        // the way boilerplate phrasing recurs in real text.
        if !self.recent.is_empty() && self.rng.random_bool(0.08) {
            let mut s = self.recent.choose(&mut self.rng).unwrap().clone();
            let i = self.rng.random_range(0..s.len());
            s[i] = self.zipf.sample(&mut self.rng);
            return s;
        }
        let len = self.rng.random_range(6..28);
        let s: Vec<usize> = (0..len).map(|_| self.zipf.sample(&mut self.rng)).collect();
        if self.recent.len() < 500 {
            self.recent.push(s.clone());
        } else {
            let i = self.rng.random_range(0..self.recent.len());
            self.recent[i] = s.clone();
        }
        s
    }

    /// One sentence with capitalization and punctuation.
    pub fn sentence(&mut self) -> String {
        let ids = self.sentence_words();
        let mut out = String::new();
        for (i, &id) in ids.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let w = &self.vocab[id];
            if i == 0 {
                let mut c = w.chars();
                out.extend(c.next().unwrap().to_uppercase());
                out.push_str(c.as_str());
            } else {
                out.push_str(w);
            }
            if i + 1 < ids.len() && self.rng.random_bool(0.05) {
                out.push(',');
            }
        }
        out.push('.');
        out
    }

    /// Prose wrapped at about `width` columns, roughly `words` words long.
    pub fn prose(&mut self, words: usize, width: usize) -> String {
        let mut out = String::new();
        let mut line_len = 0;
        let mut count = 0;
        let mut in_paragraph = 0;
        while count < words {
            let s = self.sentence();
            for w in s.split(' ') {
                if line_len > 0 && line_len + 1 + w.len() > width {
                    out.push('\n');
                    line_len = 0;
                } else if line_len > 0 {
                    out.push(' ');
                    line_len += 1;
                }
                out.push_str(w);
                line_len += w.len();
                count += 1;
            }
            in_paragraph += 1;
            if in_paragraph >= 5 && self.rng.random_bool(0.3) {
                out.push_str("\n\n");
                line_len = 0;
                in_paragraph = 0;
            }
        }
        out.push('\n');
        out
    }

    /// Prose of at least `bytes` bytes.
    pub fn text_of_size(&mut self, bytes: usize) -> String {
        let mut out = String::new();
        while out.len() < bytes {
            out.push_str(&self.prose(2_000, 72));
        }
        out
    }

    /// A bare name-like capitalized word.
    pub fn capitalized(&mut self) -> String {
        let w = self.vocab[self.rng.random_range(200..self.vocab.len())].clone();
        let mut c = w.chars();
        let mut out: String = c.next().unwrap().to_uppercase().collect();
        out.push_str(c.as_str());
        out
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

const CJK_PUNCT: [char; 4] = ['，', '。', '、', '；'];

/// Chinese-like prose: Zipf-distributed ideographs, fullwidth punctuation,
/// occasional ASCII numbers and Latin terms.
pub fn chinese_text(seed: u64, bytes: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chars = Vec::with_capacity(3_500);
    let mut seen = std::collections::HashSet::new();
    while chars.len() < 3_500 {
        let c = char::from_u32(rng.random_range(0x4E00..0x9FA6)).unwrap();
        if seen.insert(c) {
            chars.push(c);
        }
    }
    let zipf = Zipf::new(chars.len(), 0.95);
    let latin = ["DNA", "CPU", "GDP", "NASA", "Linux", "iPhone", "COVID-19"];
    let mut out = String::new();
    while out.len() < bytes {
        let sentences = rng.random_range(2..7);
        for _ in 0..sentences {
            let len = rng.random_range(8..45);
            for i in 0..len {
                if rng.random_bool(0.02) {
                    if rng.random_bool(0.6) {
                        out.push_str(&rng.random_range(1..2030).to_string());
                    } else {
                        out.push_str(latin.choose(&mut rng).unwrap());
                    }
                } else {
                    out.push(chars[zipf.sample(&mut rng)]);
                }
                if i + 1 < len && rng.random_bool(0.08) {
                    out.push(CJK_PUNCT[rng.random_range(0..CJK_PUNCT.len())]);
                }
            }
            out.push('。');
        }
        out.push('\n');
    }
    out
}

/// A document whose lines are labeled reference (`true`) or body.
#[derive(Debug, Clone)]
pub struct LabeledDocument {
    pub lines: Vec<String>,
    pub labels: Vec<bool>,
}

impl LabeledDocument {
    pub fn text(&self) -> String {
        self.lines.join("\n")
    }
}

fn initial(rng: &mut impl Rng) -> char {
    (b'A' + rng.random_range(0..26u8)) as char
}

fn citation(g: &mut EnglishGenerator, index: usize) -> String {
    let style = g.rng().random_range(0..5);
    let n_authors = g.rng().random_range(1..5);
    let mut surnames: Vec<String> = (0..n_authors).map(|_| g.capitalized()).collect();
    let year = g.rng().random_range(1950..2024);
    let vol = g.rng().random_range(1..300);
    let p1 = g.rng().random_range(1..2000);
    let p2 = p1 + g.rng().random_range(1..40);
    let title_words = g.rng().random_range(4..12);
    let title = {
        let s = g.sentence();
        s.split(' ').take(title_words).collect::<Vec<_>>().join(" ")
    };
    let journal = format!("{} {}", g.capitalized(), g.capitalized());
    let rng = g.rng();
    let doi = if rng.random_bool(0.4) {
        format!(" doi:10.{}/{}", rng.random_range(1000..9999), rng.random_range(10_000..99_999))
    } else {
        String::new()
    };
    match style {
        // Numbered, initials first.
        0 => {
            let authors: Vec<String> = surnames
                .iter()
                .map(|s| format!("{}. {}", initial(rng), s))
                .collect();
            format!(
                "{index}. {}, {}. {} {vol}, {p1}-{p2} ({year}).{doi}",
                authors.join(", "),
                title,
                journal
            )
        }
        // Author-year with ampersand.
        1 => {
            let last = surnames.pop().unwrap();
            let mut authors: Vec<String> = surnames
                .iter()
                .map(|s| format!("{}, {}.", s, initial(rng)))
                .collect();
            authors.push(format!("& {}, {}.", last, initial(rng)));
            format!(
                "{} ({year}). {}. {}, {vol}({}), {p1}-{p2}.{doi}",
                authors.join(", "),
                title,
                journal,
                rng.random_range(1..12)
            )
        }
        // Bracketed index, compact initials.
        2 => {
            let authors: Vec<String> = surnames
                .iter()
                .map(|s| format!("{} {}{}", s, initial(rng), initial(rng)))
                .collect();
            format!(
                "[{index}] {}. {}. {}. {year};{vol}:{p1}-{p2}.",
                authors.join(", "),
                title,
                journal
            )
        }
        // et al.
        3 => format!(
            "{} {}., et al. {}. {} {vol}: {p1}-{p2} ({year}).",
            surnames[0],
            initial(rng),
            title,
            journal
        ),
        // Double initials.
        _ => {
            let authors: Vec<String> = surnames
                .iter()
                .map(|s| format!("{} {}.{}.", s, initial(rng), initial(rng)))
                .collect();
            format!(
                "{} {year}. {}. *{}* {vol}, {p1}-{p2}.",
                authors.join("; "),
                title,
                journal
            )
        }
    }
}

fn push_prose(g: &mut EnglishGenerator, doc: &mut LabeledDocument, words: usize) {
    let width = g.rng().random_range(60..100);
    for line in g.prose(words, width).lines() {
        doc.lines.push(line.to_string());
        doc.labels.push(false);
    }
}

fn push_references(g: &mut EnglishGenerator, doc: &mut LabeledDocument) {
    if g.rng().random_bool(0.7) {
        doc.lines.push("References".into());
        doc.labels.push(true);
    }
    let n = g.rng().random_range(5..25);
    for i in 1..=n {
        let c = citation(g, i);
        doc.lines.push(c);
        doc.labels.push(true);
    }
}

/// `n` documents; every other one carries a reference block, a third of
/// those placed mid-document with more body text after it.
pub fn labeled_reference_corpus(seed: u64, n: usize) -> Vec<LabeledDocument> {
    let mut g = EnglishGenerator::new(seed);
    (0..n)
        .map(|i| {
            let mut doc = LabeledDocument {
                lines: Vec::new(),
                labels: Vec::new(),
            };
            let body = g.rng().random_range(150..600);
            push_prose(&mut g, &mut doc, body);
            if i % 2 == 1 {
                push_references(&mut g, &mut doc);
                if i % 3 == 0 {
                    let tail = g.rng().random_range(80..300);
                    push_prose(&mut g, &mut doc, tail);
                }
            }
            doc
        })
        .collect()
}

/// A citation line in one of the generator's styles.
pub fn citation_lines(seed: u64, n: usize) -> Vec<String> {
    let mut g = EnglishGenerator::new(seed);
    (1..=n).map(|i| citation(&mut g, i)).collect()
}
