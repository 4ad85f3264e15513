//! Source-text sampling from slot templates and lexicon-based pairing with a
//! target language.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("invalid language code {0:?}")]
    InvalidLanguage(String),
    #[error("no templates for language {0}")]
    EmptyTemplateSet(String),
    #[error("no vocabulary for category {category:?} in language {language}")]
    MissingLexiconForLanguage { category: String, language: String },
    #[error("template {template}: {reason}")]
    InvalidTemplate { template: String, reason: String },
    #[error("invalid lexicon entry: {0}")]
    InvalidLexiconEntry(String),
    #[error("invalid text sample: {0}")]
    InvalidSample(&'static str),
    #[error("language mixing needs at least two samples in distinct languages")]
    InsufficientInputs,
}

/// Lowercase language tag of 2 to 8 characters from `[a-z-]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(try_from = "String", into = "String"))]
pub struct LangCode(String);

impl LangCode {
    pub fn new(code: &str) -> Result<Self, CorpusError> {
        let ok = (2..=8).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_lowercase() || b == b'-');
        if ok {
            Ok(LangCode(code.to_string()))
        } else {
            Err(CorpusError::InvalidLanguage(code.to_string()))
        }
    }

    /// The tag carried by interleaved multi-language samples.
    pub fn mixed() -> Self {
        LangCode("mixed".to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for LangCode {
    type Error = CorpusError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        LangCode::new(&s)
    }
}

impl From<LangCode> for String {
    fn from(l: LangCode) -> String {
        l.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub key: String,
    pub translations: BTreeMap<LangCode, String>,
}

impl LexiconEntry {
    pub fn new(key: &str, translations: BTreeMap<LangCode, String>) -> Result<Self, CorpusError> {
        if key.trim().is_empty() {
            return Err(CorpusError::InvalidLexiconEntry("empty key".to_string()));
        }
        Ok(LexiconEntry { key: key.to_string(), translations })
    }
}

/// Lookup structure over lexicon keys split on whitespace.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    by_tokens: BTreeMap<Vec<String>, BTreeMap<LangCode, String>>,
    longest_key: usize,
}

impl Lexicon {
    /// Later entries with the same key add to (and override) earlier ones.
    pub fn new(entries: impl IntoIterator<Item = LexiconEntry>) -> Self {
        let mut lex = Lexicon::default();
        for e in entries {
            let toks: Vec<String> = e.key.split_whitespace().map(str::to_lowercase).collect();
            lex.longest_key = lex.longest_key.max(toks.len());
            lex.by_tokens.entry(toks).or_default().extend(e.translations);
        }
        lex
    }

    pub fn is_empty(&self) -> bool {
        self.by_tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.by_tokens.len()
    }

    fn lookup(&self, tokens: &[&str], lang: &LangCode) -> Option<&str> {
        let key: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
        self.by_tokens.get(&key)?.get(lang).map(String::as_str)
    }
}

/// One generated text: lines in reading order plus provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextSample {
    pub lines: Vec<String>,
    pub language: LangCode,
    pub template_id: String,
    /// `(line_index, formatted value)` of every generated price or quantity.
    pub numeric_fields: Vec<(u32, String)>,
    /// Source language of each line; differs from `language` only for mixes.
    pub line_languages: Vec<LangCode>,
}

impl TextSample {
    pub fn new(lines: Vec<String>, language: LangCode, template_id: &str) -> Result<Self, CorpusError> {
        let line_languages = alloc::vec![language.clone(); lines.len()];
        let s = TextSample {
            lines,
            language,
            template_id: template_id.to_string(),
            numeric_fields: Vec::new(),
            line_languages,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.lines.is_empty() {
            return Err(CorpusError::InvalidSample("no lines"));
        }
        if self.lines.iter().any(|l| l.trim().is_empty()) {
            return Err(CorpusError::InvalidSample("blank line"));
        }
        if self.line_languages.len() != self.lines.len() {
            return Err(CorpusError::InvalidSample("line language count mismatch"));
        }
        Ok(())
    }

    pub fn full_text(&self) -> String {
        self.lines.join("\n")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelTextPair {
    pub src: TextSample,
    pub tgt: TextSample,
    /// Whether each source line was fully backed by lexicon matches.
    pub line_translated: Vec<bool>,
    pub coverage: f64,
}

/// How a `{slot}` in a template line is filled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotKind {
    /// Uniform pick from the vocabulary of `category` in the template language.
    Word { category: String },
    /// Uniform integer number of cents in `min_cents..=max_cents`, formatted `D.CC`.
    Price { min_cents: u64, max_cents: u64 },
    /// Uniform integer in `min..=max`.
    Integer { min: i64, max: i64 },
    /// Sum of the named price slots, formatted `D.CC`.
    Total { of: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub language: LangCode,
    pub lines: Vec<String>,
    pub slots: BTreeMap<String, SlotKind>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Literal(String),
    Slot(String),
}

fn parse_pattern(template: &str, line: &str) -> Result<Vec<Piece>, CorpusError> {
    let bad = |reason: &str| CorpusError::InvalidTemplate { template: template.to_string(), reason: reason.to_string() };
    let mut pieces = Vec::new();
    let mut lit = String::new();
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                lit.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                lit.push('}');
            }
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(ch) if ch.is_alphanumeric() || ch == '_' => name.push(ch),
                        _ => return Err(bad("unterminated or malformed slot")),
                    }
                }
                if name.is_empty() {
                    return Err(bad("empty slot name"));
                }
                if !lit.is_empty() {
                    pieces.push(Piece::Literal(core::mem::take(&mut lit)));
                }
                pieces.push(Piece::Slot(name));
            }
            '}' => return Err(bad("unmatched '}'")),
            _ => lit.push(c),
        }
    }
    if !lit.is_empty() {
        pieces.push(Piece::Literal(lit));
    }
    Ok(pieces)
}

/// Templates plus the per-language vocabularies their word slots draw from.
#[derive(Debug, Clone, Default)]
pub struct TemplateSet {
    templates: Vec<(Template, Vec<Vec<Piece>>)>,
    vocab: BTreeMap<(String, LangCode), Vec<String>>,
}

impl TemplateSet {
    pub fn new(
        templates: Vec<Template>,
        vocabulary: impl IntoIterator<Item = (String, LangCode, Vec<String>)>,
    ) -> Result<Self, CorpusError> {
        let mut set = TemplateSet::default();
        for (category, lang, words) in vocabulary {
            let words: Vec<String> = words.into_iter().filter(|w| !w.trim().is_empty()).collect();
            set.vocab.entry((category, lang)).or_default().extend(words);
        }
        for t in templates {
            let bad = |reason: String| CorpusError::InvalidTemplate { template: t.id.clone(), reason };
            if t.lines.is_empty() {
                return Err(bad("no lines".to_string()));
            }
            let mut parsed = Vec::with_capacity(t.lines.len());
            for line in &t.lines {
                let pieces = parse_pattern(&t.id, line)?;
                for p in &pieces {
                    if let Piece::Slot(name) = p {
                        if !t.slots.contains_key(name) {
                            return Err(bad(format!("undeclared slot {{{name}}}")));
                        }
                    }
                }
                parsed.push(pieces);
            }
            for (name, kind) in &t.slots {
                match kind {
                    SlotKind::Price { min_cents, max_cents } if min_cents > max_cents => {
                        return Err(bad(format!("slot {name}: empty price range")));
                    }
                    SlotKind::Integer { min, max } if min > max => {
                        return Err(bad(format!("slot {name}: empty integer range")));
                    }
                    SlotKind::Total { of } => {
                        for part in of {
                            if !matches!(t.slots.get(part), Some(SlotKind::Price { .. })) {
                                return Err(bad(format!("total {name} references non-price slot {part}")));
                            }
                        }
                    }
                    _ => {}
                }
            }
            set.templates.push((t, parsed));
        }
        Ok(set)
    }

    pub fn templates(&self) -> impl Iterator<Item = &Template> {
        self.templates.iter().map(|(t, _)| t)
    }

    pub fn languages(&self) -> Vec<LangCode> {
        let mut langs: Vec<LangCode> = self.templates().map(|t| t.language.clone()).collect();
        langs.sort();
        langs.dedup();
        langs
    }

    pub fn vocabulary(&self, category: &str, lang: &LangCode) -> Option<&[String]> {
        self.vocab.get(&(category.to_string(), lang.clone())).map(Vec::as_slice)
    }
}

pub fn format_cents(cents: u64) -> String {
    format!("{}.{:02}", cents / 100, cents % 100)
}

/// Draw one sample: a uniformly chosen template for `lang` with its slots
/// filled. Totals are summed in integer cents.
pub fn sample_source_text(templates: &TemplateSet, lang: &LangCode, rng: &mut Rng) -> Result<TextSample, CorpusError> {
    let candidates: Vec<&(Template, Vec<Vec<Piece>>)> =
        templates.templates.iter().filter(|(t, _)| &t.language == lang).collect();
    let (template, patterns) = *rng
        .choose(&candidates)
        .ok_or_else(|| CorpusError::EmptyTemplateSet(lang.to_string()))?;

    // Non-total slots first, in name order, then totals.
    let mut values: BTreeMap<&str, String> = BTreeMap::new();
    let mut cents: BTreeMap<&str, u64> = BTreeMap::new();
    let mut numeric: BTreeMap<&str, ()> = BTreeMap::new();
    for (name, kind) in &template.slots {
        match kind {
            SlotKind::Word { category } => {
                let words = templates.vocabulary(category, lang).filter(|w| !w.is_empty()).ok_or_else(|| {
                    CorpusError::MissingLexiconForLanguage { category: category.clone(), language: lang.to_string() }
                })?;
                let w = words[rng.index(words.len())].clone();
                values.insert(name, w);
            }
            SlotKind::Price { min_cents, max_cents } => {
                let c = *min_cents + rng.below(max_cents - min_cents + 1);
                cents.insert(name, c);
                values.insert(name, format_cents(c));
                numeric.insert(name, ());
            }
            SlotKind::Integer { min, max } => {
                values.insert(name, format!("{}", rng.range_i64(*min, *max)));
                numeric.insert(name, ());
            }
            SlotKind::Total { .. } => {}
        }
    }
    for (name, kind) in &template.slots {
        if let SlotKind::Total { of } = kind {
            let sum: u64 = of.iter().map(|p| cents[p.as_str()]).sum();
            values.insert(name, format_cents(sum));
            numeric.insert(name, ());
        }
    }

    let mut lines = Vec::with_capacity(patterns.len());
    let mut numeric_fields = Vec::new();
    for (i, pieces) in patterns.iter().enumerate() {
        let mut line = String::new();
        for p in pieces {
            match p {
                Piece::Literal(s) => line.push_str(s),
                Piece::Slot(name) => {
                    let v = &values[name.as_str()];
                    if numeric.contains_key(name.as_str()) {
                        numeric_fields.push((i as u32, v.clone()));
                    }
                    line.push_str(v);
                }
            }
        }
        lines.push(line.trim().to_string());
    }
    let mut sample = TextSample::new(lines, lang.clone(), &template.id)?;
    sample.numeric_fields = numeric_fields;
    Ok(sample)
}

fn has_digit(s: &str) -> bool {
    s.chars().any(|c| c.is_ascii_digit() || c.is_numeric())
}

fn match_case(source: &[&str], translation: &str) -> String {
    let joined: String = source.concat();
    let has_alpha = joined.chars().any(char::is_alphabetic);
    if has_alpha && !joined.chars().any(char::is_lowercase) && joined.chars().filter(|c| c.is_alphabetic()).count() > 1 {
        return translation.to_uppercase();
    }
    let first_upper = source.first().and_then(|t| t.chars().next()).is_some_and(char::is_uppercase);
    if first_upper {
        let mut chars = translation.chars();
        if let Some(f) = chars.next() {
            let mut out: String = f.to_uppercase().collect();
            out.push_str(chars.as_str());
            return out;
        }
    }
    translation.to_string()
}

/// Translate one line: longest lexicon key first, scanning left to right over
/// whitespace tokens. Tokens with digits never match. Returns the new line and
/// whether every non-numeric token was covered by at least one match.
pub fn translate_line(line: &str, lexicon: &Lexicon, tgt: &LangCode) -> (String, bool) {
    // Token spans in bytes.
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, line.len()));
    }
    let tokens: Vec<&str> = spans.iter().map(|&(a, b)| &line[a..b]).collect();

    let mut out = String::with_capacity(line.len());
    let mut cursor = 0;
    let mut i = 0;
    let mut matches = 0usize;
    let mut uncovered_words = 0usize;
    while i < tokens.len() {
        let max_k = lexicon.longest_key.min(tokens.len() - i);
        let mut hit = None;
        for k in (1..=max_k).rev() {
            let window = &tokens[i..i + k];
            if window.iter().any(|t| has_digit(t)) {
                continue;
            }
            if let Some(tr) = lexicon.lookup(window, tgt) {
                hit = Some((k, tr));
                break;
            }
        }
        match hit {
            Some((k, tr)) => {
                out.push_str(&line[cursor..spans[i].0]);
                out.push_str(&match_case(&tokens[i..i + k], tr));
                cursor = spans[i + k - 1].1;
                matches += 1;
                i += k;
            }
            None => {
                if !has_digit(tokens[i]) && tokens[i].chars().any(char::is_alphabetic) {
                    uncovered_words += 1;
                }
                i += 1;
            }
        }
    }
    out.push_str(&line[cursor..]);
    (out, matches > 0 && uncovered_words == 0)
}

/// Pair a source sample with its lexicon translation into `tgt_lang`.
/// Missing entries lower `coverage`; they never fail.
pub fn pair_translation(src: &TextSample, lexicon: &Lexicon, tgt_lang: &LangCode) -> ParallelTextPair {
    let mut lines = Vec::with_capacity(src.lines.len());
    let mut flags = Vec::with_capacity(src.lines.len());
    for line in &src.lines {
        let (t, ok) = translate_line(line, lexicon, tgt_lang);
        // A translation can only empty a line if the lexicon maps to blanks.
        lines.push(if t.trim().is_empty() { line.clone() } else { t });
        flags.push(ok);
    }
    let coverage = flags.iter().filter(|&&f| f).count() as f64 / flags.len().max(1) as f64;
    let tgt = TextSample {
        line_languages: alloc::vec![tgt_lang.clone(); lines.len()],
        lines,
        language: tgt_lang.clone(),
        template_id: src.template_id.clone(),
        numeric_fields: src.numeric_fields.clone(),
    };
    ParallelTextPair { src: src.clone(), tgt, line_translated: flags, coverage }
}

/// A pair whose target is a copy of the source (no translation requested).
pub fn identity_pair(src: &TextSample) -> ParallelTextPair {
    ParallelTextPair {
        src: src.clone(),
        tgt: src.clone(),
        line_translated: alloc::vec![false; src.lines.len()],
        coverage: 0.0,
    }
}

/// Uniformly random interleaving of the inputs' lines that keeps each input's
/// internal order. Picking the next input with probability proportional to its
/// remaining line count makes every interleaving equally likely.
pub fn mix_languages(samples: &[TextSample], rng: &mut Rng) -> Result<TextSample, CorpusError> {
    if samples.len() < 2 {
        return Err(CorpusError::InsufficientInputs);
    }
    let first = &samples[0].language;
    if samples.iter().all(|s| &s.language == first) {
        return Err(CorpusError::InsufficientInputs);
    }
    let mut cursors = alloc::vec![0usize; samples.len()];
    let total: usize = samples.iter().map(|s| s.lines.len()).sum();
    let mut lines = Vec::with_capacity(total);
    let mut line_languages = Vec::with_capacity(total);
    let mut numeric_fields = Vec::new();
    for emitted in 0..total {
        let remaining = (total - emitted) as u64;
        let mut pick = rng.below(remaining);
        let mut which = 0;
        for (k, s) in samples.iter().enumerate() {
            let left = (s.lines.len() - cursors[k]) as u64;
            if pick < left {
                which = k;
                break;
            }
            pick -= left;
        }
        let s = &samples[which];
        let li = cursors[which];
        lines.push(s.lines[li].clone());
        line_languages.push(s.line_languages[li].clone());
        for (idx, v) in &s.numeric_fields {
            if *idx as usize == li {
                numeric_fields.push((emitted as u32, v.clone()));
            }
        }
        cursors[which] += 1;
    }
    let template_id = samples.iter().map(|s| s.template_id.as_str()).collect::<Vec<_>>().join("+");
    let out = TextSample { lines, language: LangCode::mixed(), template_id, numeric_fields, line_languages };
    out.validate()?;
    Ok(out)
}
