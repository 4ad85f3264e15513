//! OCR completeness, hallucination rate and unigram BLEU over token bags,
//! per-condition aggregation, and the step-by-step prompt template.
//!
//! Hallucination is measured token-wise against the reference transcription:
//! a hypothesis token counts as hallucinated when no unused reference token
//! matches it. There is no image-side grounding.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::math;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("corpus BLEU needs at least one row")]
    EmptyCorpus,
    #[error("prediction id {0:?} is not in the manifest")]
    UnknownId(String),
    #[error("record {0:?} has no target text")]
    MissingTargetText(String),
    #[error("prediction id {0:?} appears more than once")]
    DuplicatePredictionId(String),
    #[error("query is empty")]
    EmptyQuery,
}

/// Ordered tokens plus their multiset counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenBag {
    tokens: Vec<String>,
    counts: BTreeMap<String, usize>,
}

impl TokenBag {
    /// Build a bag from already-normalized tokens. Empty tokens are dropped.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut bag = TokenBag::default();
        for t in tokens {
            let t = t.into();
            if !t.is_empty() {
                *bag.counts.entry(t.clone()).or_insert(0) += 1;
                bag.tokens.push(t);
            }
        }
        bag
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn count(&self, token: &str) -> usize {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<String, usize> {
        &self.counts
    }

    /// Σ_w min(self.count(w), other.count(w)).
    pub fn clipped_matches(&self, other: &TokenBag) -> usize {
        self.counts.iter().map(|(w, &n)| n.min(other.count(w))).sum()
    }
}

/// Scripts written without spaces; each codepoint is its own token.
fn is_single_char_script(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x309F        // Hiragana
        | 0x30A0..=0x30FF      // Katakana
        | 0x31F0..=0x31FF
        | 0xFF66..=0xFF9D      // half-width Katakana
        | 0x3400..=0x4DBF      // CJK ext. A
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x3134F
        | 0xAC00..=0xD7A3      // Hangul syllables
    )
}

/// NFC, lowercase, then split. Letters and digits are token-internal, as are
/// `.`, `,` and `:` between two digits. CJK, kana and Hangul syllables come out
/// one codepoint per token. The language hint is accepted for API symmetry
/// and currently does not change the rules.
pub fn tokenize(text: &str, _lang_hint: Option<&str>) -> TokenBag {
    let lowered: String = text.nfc().flat_map(char::to_lowercase).collect();
    let chars: Vec<char> = lowered.nfc().collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if is_single_char_script(c) {
            if !cur.is_empty() {
                tokens.push(core::mem::take(&mut cur));
            }
            tokens.push(c.to_string());
            continue;
        }
        let internal = if c.is_alphanumeric() {
            true
        } else if matches!(c, '.' | ',' | ':') {
            let left = i > 0 && chars[i - 1].is_numeric();
            let right = chars.get(i + 1).is_some_and(|n| n.is_numeric());
            left && right
        } else {
            false
        };
        if internal {
            cur.push(c);
        } else if !cur.is_empty() {
            tokens.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    TokenBag::from_tokens(tokens)
}

/// Percentage of reference tokens recovered. An empty reference scores 100.
pub fn ocr_completeness(hyp: &TokenBag, reference: &TokenBag) -> f64 {
    if reference.is_empty() {
        return 100.0;
    }
    100.0 * hyp.clipped_matches(reference) as f64 / reference.len() as f64
}

/// Percentage of hypothesis tokens without a matching reference token. An
/// empty hypothesis scores 0.
pub fn hallucination_rate(hyp: &TokenBag, reference: &TokenBag) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    let m = hyp.clipped_matches(reference);
    100.0 * (hyp.len() - m) as f64 / hyp.len() as f64
}

fn bleu_from_counts(matches: usize, hyp_len: usize, ref_len: usize) -> f64 {
    if hyp_len == 0 {
        return 0.0;
    }
    let p1 = matches as f64 / hyp_len as f64;
    let bp = if hyp_len >= ref_len { 1.0 } else { math::exp(1.0 - ref_len as f64 / hyp_len as f64) };
    bp * p1
}

/// Brevity-penalized clipped unigram precision, in `[0, 1]`.
pub fn bleu1(hyp: &TokenBag, reference: &TokenBag) -> f64 {
    bleu_from_counts(hyp.clipped_matches(reference), hyp.len(), reference.len())
}

/// Corpus-level BLEU-1: matches and lengths are summed over rows before the
/// precision and brevity penalty are taken.
pub fn corpus_bleu1<'a, I>(rows: I) -> Result<f64, MetricsError>
where
    I: IntoIterator<Item = (&'a TokenBag, &'a TokenBag)>,
{
    let (mut m, mut h, mut r, mut n) = (0usize, 0usize, 0usize, 0usize);
    for (hyp, reference) in rows {
        m += hyp.clipped_matches(reference);
        h += hyp.len();
        r += reference.len();
        n += 1;
    }
    if n == 0 {
        return Err(MetricsError::EmptyCorpus);
    }
    Ok(bleu_from_counts(m, h, r))
}

/// One scored reference text.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub id: String,
    /// `None` when the manifest has no text for the requested mode.
    pub text: Option<String>,
    pub language: Option<String>,
    pub condition_tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreRow {
    pub id: String,
    pub completeness: f64,
    pub hallucination: f64,
    pub bleu1: f64,
    pub condition_tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupSummary {
    /// A condition tag, or `overall`.
    pub condition: String,
    pub count: usize,
    pub completeness: f64,
    pub hallucination: f64,
    /// Corpus BLEU-1 scaled to `[0, 100]`.
    pub bleu1: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub rows: Vec<ScoreRow>,
    pub groups: Vec<GroupSummary>,
    pub overall: GroupSummary,
}

/// Display order of known condition tags; unknown tags follow alphabetically.
pub const CONDITION_ORDER: [&str; 9] = [
    "clean",
    "blur",
    "rotation",
    "perspective",
    "occlusion",
    "compression",
    "low_resolution",
    "low_contrast",
    "clutter",
];

fn condition_rank(tag: &str) -> (usize, &str) {
    match CONDITION_ORDER.iter().position(|t| *t == tag) {
        Some(i) => (i, ""),
        None => (CONDITION_ORDER.len(), tag),
    }
}

struct Scored {
    row: ScoreRow,
    hyp: TokenBag,
    reference: TokenBag,
}

fn summarize(condition: &str, items: &[&Scored]) -> GroupSummary {
    let n = items.len();
    let mean = |f: &dyn Fn(&ScoreRow) -> f64| items.iter().map(|s| f(&s.row)).sum::<f64>() / n as f64;
    let bleu = corpus_bleu1(items.iter().map(|s| (&s.hyp, &s.reference))).unwrap_or(0.0);
    GroupSummary {
        condition: String::from(condition),
        count: n,
        completeness: if n == 0 { 0.0 } else { mean(&|r| r.completeness) },
        hallucination: if n == 0 { 0.0 } else { mean(&|r| r.hallucination) },
        bleu1: 100.0 * bleu,
    }
}

/// Score every reference. References without a prediction are scored against
/// an empty hypothesis. Rows come out sorted by id and aggregates are
/// accumulated in that order.
pub fn evaluate(references: &[Reference], predictions: &[Prediction]) -> Result<EvalReport, MetricsError> {
    let mut by_id: BTreeMap<&str, &Reference> = BTreeMap::new();
    for r in references {
        by_id.insert(r.id.as_str(), r);
    }
    let mut preds: BTreeMap<&str, &str> = BTreeMap::new();
    for p in predictions {
        if !by_id.contains_key(p.id.as_str()) {
            return Err(MetricsError::UnknownId(p.id.clone()));
        }
        if preds.insert(p.id.as_str(), p.text.as_str()).is_some() {
            return Err(MetricsError::DuplicatePredictionId(p.id.clone()));
        }
    }
    let mut scored = Vec::with_capacity(by_id.len());
    for (id, r) in &by_id {
        let text = r.text.as_deref().ok_or_else(|| MetricsError::MissingTargetText(String::from(*id)))?;
        let lang = r.language.as_deref();
        let reference = tokenize(text, lang);
        let hyp = tokenize(preds.get(id).copied().unwrap_or(""), lang);
        let row = ScoreRow {
            id: String::from(*id),
            completeness: ocr_completeness(&hyp, &reference),
            hallucination: hallucination_rate(&hyp, &reference),
            bleu1: bleu1(&hyp, &reference),
            condition_tags: r.condition_tags.clone(),
        };
        scored.push(Scored { row, hyp, reference });
    }

    let mut tags: Vec<&str> = Vec::new();
    for s in &scored {
        for t in &s.row.condition_tags {
            if !tags.contains(&t.as_str()) {
                tags.push(t.as_str());
            }
        }
    }
    tags.sort_by(|a, b| condition_rank(a).cmp(&condition_rank(b)));
    let groups = tags
        .iter()
        .map(|t| {
            let members: Vec<&Scored> = scored.iter().filter(|s| s.row.condition_tags.iter().any(|x| x == t)).collect();
            summarize(t, &members)
        })
        .collect();
    let all: Vec<&Scored> = scored.iter().collect();
    let overall = summarize("overall", &all);
    Ok(EvalReport { rows: scored.into_iter().map(|s| s.row).collect(), groups, overall })
}

/// `low_resolution` -> `Low resolution`.
pub fn condition_label(tag: &str) -> String {
    let mut out = String::with_capacity(tag.len());
    for (i, c) in tag.chars().enumerate() {
        if i == 0 {
            out.extend(c.to_uppercase());
        } else if c == '_' {
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out
}

impl EvalReport {
    /// Aligned plain-text table, one row per condition followed by the
    /// overall row.
    pub fn to_table(&self) -> String {
        let header = ["Condition", "Samples", "Completeness (%)", "Hallucination (%)", "BLEU-1"];
        let mut rows: Vec<[String; 5]> = Vec::new();
        for g in self.groups.iter().chain(core::iter::once(&self.overall)) {
            rows.push([
                condition_label(&g.condition),
                g.count.to_string(),
                format!("{:.2}", g.completeness),
                format!("{:.2}", g.hallucination),
                format!("{:.2}", g.bleu1),
            ]);
        }
        let mut widths = header.map(|h| h.chars().count());
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r.iter()) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[&str]| {
            for (i, cell) in cells.iter().enumerate() {
                if i == 0 {
                    let _ = write!(out, "{:<w$}", cell, w = widths[0]);
                } else {
                    let _ = write!(out, "  {:>w$}", cell, w = widths[i]);
                }
            }
            out.push('\n');
        };
        line(&mut out, &header);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        let rule: Vec<&str> = rule.iter().map(String::as_str).collect();
        line(&mut out, &rule);
        for r in &rows {
            let cells: Vec<&str> = r.iter().map(String::as_str).collect();
            line(&mut out, &cells);
        }
        out
    }
}

pub const COT_BULLETS: [&str; 5] = [
    "Examine the entire image to first understand the overall scene and global context.",
    "If the question involves small, distant, or off-center objects or text, systematically search different image regions, including the foreground, background, left, and right areas, while focusing on potentially relevant details.",
    "If the text appears blurry, low-contrast, partially occluded, or rotated, reason as if mentally focusing on, enhancing, or re-orienting the relevant region to improve readability.",
    "When appropriate, briefly explain the visual evidence or reasoning process used to derive the answer.",
    "Finally, provide a clear and precise answer grounded in the observed image evidence.",
];

/// The five instruction bullets, a blank line, then `Question: <query>`.
pub fn build_cot_prompt(query: &str) -> Result<String, MetricsError> {
    if query.trim().is_empty() {
        return Err(MetricsError::EmptyQuery);
    }
    let mut out = String::new();
    for b in COT_BULLETS {
        out.push_str("- ");
        out.push_str(b);
        out.push('\n');
    }
    out.push_str("\nQuestion: ");
    out.push_str(query);
    Ok(out)
}
