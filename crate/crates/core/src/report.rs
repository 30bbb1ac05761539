//! Self-contained HTML report joining server metadata with the local text.
//!
//! Matches arrive as word ranges; the local offset map turns them into byte
//! ranges of the original file. Nothing here touches the network.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::encoder::OffsetMap;
use crate::metadata::ResultMetadata;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("source file changed since encoding (map has sha256 {expected}, file is {found})")]
    SourceChanged { expected: String, found: String },
    #[error("metadata does not fit the offset map: {0}")]
    MapMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanKind {
    Matched,
    Gap,
}

/// Byte range of the source covered by part of one match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Highlight {
    pub match_index: usize,
    pub byte_start: usize,
    pub byte_end: usize,
    pub kind: SpanKind,
}

fn check(meta: &ResultMetadata, map: &OffsetMap) -> Result<(), ReportError> {
    let words = map.entries.len();
    if meta.query_word_count != words {
        return Err(ReportError::MapMismatch(format!(
            "metadata counts {} query words, map has {words}",
            meta.query_word_count
        )));
    }
    for (i, m) in meta.matches.iter().enumerate() {
        if m.query_start >= m.query_end || m.query_end > words {
            return Err(ReportError::MapMismatch(format!(
                "match {i} covers words {}..{} of {words}",
                m.query_start, m.query_end
            )));
        }
        if m.gap_starts.len() != m.mismatch_gaps.len() {
            return Err(ReportError::MapMismatch(format!("match {i} has unpaired gap fields")));
        }
        for (&s, &l) in m.gap_starts.iter().zip(&m.mismatch_gaps) {
            if l == 0 || s <= m.query_start || s + l >= m.query_end {
                return Err(ReportError::MapMismatch(format!("match {i} has a gap outside its span")));
            }
        }
    }
    Ok(())
}

/// Word runs of each match split into matched and gap pieces, mapped to
/// source byte ranges.
pub fn highlights(meta: &ResultMetadata, map: &OffsetMap) -> Result<Vec<Highlight>, ReportError> {
    check(meta, map)?;
    let bytes = |ws: usize, we: usize| (map.entries[ws].byte_start, map.entries[we - 1].byte_end);
    let mut out = Vec::new();
    for (i, m) in meta.matches.iter().enumerate() {
        let mut gaps: Vec<(usize, usize)> = m.gap_starts.iter().copied().zip(m.mismatch_gaps.iter().copied()).collect();
        gaps.sort_unstable();
        let mut w = m.query_start;
        let mut push = |ws: usize, we: usize, kind| {
            if we > ws {
                let (byte_start, byte_end) = bytes(ws, we);
                out.push(Highlight {
                    match_index: i,
                    byte_start,
                    byte_end,
                    kind,
                });
            }
        };
        for (gs, gl) in gaps {
            push(w, gs, SpanKind::Matched);
            push(gs, gs + gl, SpanKind::Gap);
            w = gs + gl;
        }
        push(w, m.query_end, SpanKind::Matched);
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

const STYLE: &str = r#"
body { font-family: system-ui, sans-serif; margin: 0; color: #222; }
header { padding: 1em 1.5em; background: #f3f4f6; border-bottom: 1px solid #ddd; }
header h1 { margin: 0 0 .3em; font-size: 1.3em; }
.stats span { margin-right: 2em; }
main { display: flex; gap: 1.5em; padding: 1em 1.5em; }
#query { flex: 3; white-space: pre-wrap; line-height: 1.5; font-family: Georgia, serif; }
#sources { flex: 2; }
mark.hit { background: #fde68a; }
mark.gap { background: #fecaca; text-decoration: underline wavy #b91c1c; }
.active, mark.active { outline: 2px solid #2563eb; background: #bfdbfe; }
.match { border: 1px solid #ddd; border-radius: 4px; padding: .5em .8em; margin-bottom: .8em; }
.match h3 { margin: 0 0 .3em; font-size: 1em; }
.snippet { font-family: Georgia, serif; color: #444; margin-top: .4em; }
.legend mark { padding: 0 .3em; }
"#;

const SCRIPT: &str = r#"
document.querySelectorAll('[data-m]').forEach(function (el) {
  var ids = el.getAttribute('data-m').split(' ');
  function toggle(on) {
    ids.forEach(function (id) {
      document.querySelectorAll('[data-m~="' + id + '"]').forEach(function (t) {
        t.classList.toggle('active', on);
      });
    });
  }
  el.addEventListener('mouseenter', function () { toggle(true); });
  el.addEventListener('mouseleave', function () { toggle(false); });
});
"#;

/// Renders the full report page.
pub fn render_html(
    meta: &ResultMetadata,
    source: &[u8],
    source_name: &str,
    map: &OffsetMap,
) -> Result<String, ReportError> {
    if !map.matches_source(source) {
        return Err(ReportError::SourceChanged {
            expected: map.source_sha256.clone(),
            found: crate::encoder::sha256_hex(source),
        });
    }
    let text = std::str::from_utf8(source)
        .map_err(|_| ReportError::MapMismatch("source is not UTF-8".into()))?;
    let spans = highlights(meta, map)?;
    if let Some(h) = spans.iter().find(|h| h.byte_end > text.len()) {
        return Err(ReportError::MapMismatch(format!(
            "map offset {} is past the end of the source",
            h.byte_end
        )));
    }

    // Split the text at every highlight edge and label each piece.
    let mut cuts: BTreeSet<usize> = BTreeSet::from([0, text.len()]);
    for h in &spans {
        cuts.insert(h.byte_start);
        cuts.insert(h.byte_end);
    }
    let cuts: Vec<usize> = cuts.into_iter().collect();
    let mut body = String::new();
    for pair in cuts.windows(2) {
        let (s, e) = (pair[0], pair[1]);
        let piece = escape(&text[s..e]);
        let covering: Vec<&Highlight> = spans
            .iter()
            .filter(|h| h.byte_start <= s && h.byte_end >= e)
            .collect();
        if covering.is_empty() {
            body.push_str(&piece);
            continue;
        }
        let class = if covering.iter().any(|h| h.kind == SpanKind::Matched) {
            "hit"
        } else {
            "gap"
        };
        let ids: BTreeSet<usize> = covering.iter().map(|h| h.match_index).collect();
        let ids: Vec<String> = ids.iter().map(|i| format!("m{i}")).collect();
        let _ = write!(body, r#"<mark class="{class}" data-m="{}">{piece}</mark>"#, ids.join(" "));
    }

    let mut sources = String::new();
    if meta.matches.is_empty() {
        sources.push_str("<p>No duplicated passages were reported.</p>");
    }
    for (i, m) in meta.matches.iter().enumerate() {
        let title = if m.ref_title.is_empty() {
            format!("Document {}", m.ref_doc_id)
        } else {
            m.ref_title.clone()
        };
        let heading = if m.ref_url.is_empty() {
            escape(&title)
        } else {
            format!(r#"<a href="{}">{}</a>"#, escape(&m.ref_url), escape(&title))
        };
        let gaps: usize = m.mismatch_gaps.iter().sum();
        let _ = write!(
            sources,
            r#"<div class="match" data-m="m{i}"><h3>{heading}</h3>
<div>Your words {}–{} · source words {}–{} · {} identical words, {} in mismatch gaps</div>"#,
            m.query_start + 1,
            m.query_end,
            m.ref_start + 1,
            m.ref_end,
            m.matched_words,
            gaps,
        );
        if let Some(snippet) = &m.ref_snippet {
            let _ = write!(sources, r#"<div class="snippet">{}</div>"#, escape(snippet));
        }
        sources.push_str("</div>\n");
    }

    let title = format!("Duplicate report: {}", source_name);
    Ok(format!(
        r#"<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{title}</title>
<style>{STYLE}</style>
</head>
<body>
<header>
<h1>{title}</h1>
<div class="stats"><span>Longest continuous copied words: <b id="ccw">{ccw}</b></span><span>Copy coverage: <b id="coverage">{cov:.1}%</b></span><span>Matches: <b>{n}</b></span><span>Words: {words}</span></div>
<div class="legend"><mark class="hit">identical</mark> <mark class="gap">mismatch gap</mark></div>
</header>
<main>
<section id="query">{body}</section>
<aside id="sources">{sources}</aside>
</main>
<script>{SCRIPT}</script>
</body>
</html>
"#,
        title = escape(&title),
        ccw = meta.longest_ccw,
        cov = meta.coverage_percent,
        n = meta.matches.len(),
        words = meta.query_word_count,
    ))
}
