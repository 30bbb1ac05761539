//! Line-level bibliography detection.
//!
//! Each line is scored by the density of 19 citation-style patterns
//! (matches per character), smoothed over a 3-line window, and passed
//! through a logistic model. Lines at or above the threshold are treated as
//! reference entries and left out of the encoding.

use std::fmt::Write as _;

use fancy_regex::Regex;
use thiserror::Error;

pub const DEFAULT_MODEL_TSV: &str = include_str!("../models/reference.tsv");
pub const PATTERN_COUNT: usize = 19;
pub const WINDOW: usize = 3;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Seed of the synthetic labeled corpus the shipped intercept is fitted on.
pub const CALIBRATION_SEED: u64 = 2024;
pub const CALIBRATION_DOCS: usize = 60;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("model line {line}: pattern {name:?} does not compile: {source}")]
    Regex {
        line: usize,
        name: String,
        #[source]
        source: Box<fancy_regex::Error>,
    },
    #[error("model has {0} patterns, expected {PATTERN_COUNT}")]
    PatternCount(usize),
    #[error("model has no INTERCEPT record")]
    MissingIntercept,
}

#[derive(Debug, Clone)]
pub struct RefPattern {
    pub name: String,
    pub source: String,
    pub weight: f64,
    regex: Regex,
}

#[derive(Debug, Clone)]
pub struct RefModel {
    patterns: Vec<RefPattern>,
    intercept: f64,
    threshold: f64,
}

impl Default for RefModel {
    fn default() -> Self {
        Self::parse(DEFAULT_MODEL_TSV).expect("bundled model parses")
    }
}

impl RefModel {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut patterns = Vec::new();
        let mut intercept = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            let [name, source, weight] = fields[..] else {
                return Err(ModelError::Malformed {
                    line,
                    message: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            };
            let weight: f64 = weight.trim().parse().map_err(|_| ModelError::Malformed {
                line,
                message: format!("weight {weight:?} is not a number"),
            })?;
            if name == "INTERCEPT" {
                intercept = Some(weight);
                continue;
            }
            let regex = Regex::new(source).map_err(|e| ModelError::Regex {
                line,
                name: name.to_string(),
                source: Box::new(e),
            })?;
            patterns.push(RefPattern {
                name: name.to_string(),
                source: source.to_string(),
                weight,
                regex,
            });
        }
        if patterns.len() != PATTERN_COUNT {
            return Err(ModelError::PatternCount(patterns.len()));
        }
        Ok(Self {
            patterns,
            intercept: intercept.ok_or(ModelError::MissingIntercept)?,
            threshold: DEFAULT_THRESHOLD,
        })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# Reference-line model: name<TAB>regex<TAB>weight, then INTERCEPT<TAB>-<TAB>c.\n");
        for p in &self.patterns {
            let _ = writeln!(out, "{}\t{}\t{}", p.name, p.source, p.weight);
        }
        let _ = writeln!(out, "INTERCEPT\t-\t{}", self.intercept);
        out
    }

    pub fn patterns(&self) -> &[RefPattern] {
        &self.patterns
    }

    pub fn weights(&self) -> Vec<f64> {
        self.patterns.iter().map(|p| p.weight).collect()
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_intercept(mut self, c: f64) -> Self {
        self.intercept = c;
        self
    }

    pub fn with_threshold(mut self, t: f64) -> Self {
        self.threshold = t;
        self
    }
}

/// Non-overlapping match count of each pattern divided by the line's
/// character count.
pub fn pattern_density(line: &str, model: &RefModel) -> Vec<f64> {
    let chars = line.chars().count();
    if chars == 0 {
        return vec![0.0; model.patterns.len()];
    }
    model
        .patterns
        .iter()
        .map(|p| p.regex.find_iter(line).filter(|m| m.is_ok()).count() as f64 / chars as f64)
        .collect()
}

pub fn density_matrix(lines: &[&str], model: &RefModel) -> Vec<Vec<f64>> {
    lines.iter().map(|l| pattern_density(l, model)).collect()
}

/// Centered moving average, truncated at the document edges.
pub fn smooth(d: &[Vec<f64>], window: usize) -> Vec<Vec<f64>> {
    let half = window / 2;
    let n = d.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let count = (hi - lo + 1) as f64;
            let cols = d[i].len();
            (0..cols)
                .map(|j| d[lo..=hi].iter().map(|r| r[j]).sum::<f64>() / count)
                .collect()
        })
        .collect()
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `row · W`, without the intercept.
pub fn linear_score(row: &[f64], model: &RefModel) -> f64 {
    row.iter().zip(&model.patterns).map(|(x, p)| x * p.weight).sum()
}

/// Probability that a smoothed density row belongs to a reference line.
pub fn classify_line(row: &[f64], model: &RefModel) -> f64 {
    sigmoid(linear_score(row, model) + model.intercept)
}

/// Lines split on LF with any trailing CR removed.
pub fn split_lines(text: &str) -> Vec<&str> {
    text.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect()
}

fn smoothed_scores(text: &str, model: &RefModel) -> Vec<f64> {
    let lines = split_lines(text);
    smooth(&density_matrix(&lines, model), WINDOW)
        .iter()
        .map(|row| linear_score(row, model))
        .collect()
}

pub fn line_probabilities(text: &str, model: &RefModel) -> Vec<f64> {
    smoothed_scores(text, model)
        .into_iter()
        .map(|s| sigmoid(s + model.intercept))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stripped {
    pub body: String,
    /// 0-based indices of removed lines.
    pub ref_lines: Vec<usize>,
}

pub fn strip_references(text: &str, model: &RefModel) -> Stripped {
    let probs = line_probabilities(text, model);
    let mut body = Vec::new();
    let mut ref_lines = Vec::new();
    for (i, (line, p)) in text.split('\n').zip(probs).enumerate() {
        if p >= model.threshold {
            ref_lines.push(i);
        } else {
            body.push(line);
        }
    }
    Stripped {
        body: body.join("\n"),
        ref_lines,
    }
}

/// Area under the ROC curve; ties count one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return f64::NAN;
    }
    // Rank-sum with average ranks over ties.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        rank_sum += avg_rank * pairs[i..j].iter().filter(|p| p.1).count() as f64;
        i = j;
    }
    (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg)
}

/// Per-line linear scores and labels over a labeled corpus.
pub fn score_corpus<'a>(
    docs: impl IntoIterator<Item = (&'a str, &'a [bool])>,
    model: &RefModel,
) -> (Vec<f64>, Vec<bool>) {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (text, l) in docs {
        let s = smoothed_scores(text, model);
        assert_eq!(s.len(), l.len(), "one label per line");
        scores.extend(s);
        labels.extend_from_slice(l);
    }
    (scores, labels)
}

/// Intercept maximizing line accuracy at the model threshold. Among equally
/// accurate choices the one closest to zero wins.
pub fn calibrate_intercept(scores: &[f64], labels: &[bool], threshold: f64) -> f64 {
    let logit = (threshold / (1.0 - threshold)).ln();
    let mut sorted: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Cut between sorted[i-1] and sorted[i]: everything from i up is called
    // a reference.
    let total_pos = labels.iter().filter(|&&l| l).count();
    let mut best = (0usize, f64::INFINITY, 0.0);
    let mut neg_below = 0;
    let mut pos_below = 0;
    for i in 0..=sorted.len() {
        if i == 0 || i == sorted.len() || sorted[i].0 != sorted[i - 1].0 {
            let correct = neg_below + (total_pos - pos_below);
            let cut = match i {
                0 => sorted.first().map_or(0.0, |s| s.0 - 1.0),
                i if i == sorted.len() => sorted[i - 1].0 + 1.0,
                i => (sorted[i - 1].0 + sorted[i].0) / 2.0,
            };
            let c = logit - cut;
            if correct > best.0 || (correct == best.0 && c.abs() < best.1.abs()) {
                best = (correct, c, cut);
            }
        }
        if i < sorted.len() {
            if sorted[i].1 {
                pos_below += 1;
            } else {
                neg_below += 1;
            }
        }
    }
    best.1
}
