//! Template (TOML) and lexicon (TSV) loaders plus the embedded defaults.
//!
//! Template schema:
//!
//! ```toml
//! [[template]]
//! id = "en-menu"
//! language = "en"
//! lines = ["Menu", "{a} {pa}"]
//! [template.slots]
//! a = { kind = "word", category = "food" }
//! pa = { kind = "price", min_cents = 200, max_cents = 2500 }
//! # also: { kind = "integer", min = 1, max = 9 } and { kind = "total", of = ["pa"] }
//!
//! [vocabulary.food]
//! en = ["bread", "soup"]
//! ```
//!
//! Lexicon rows are `key<TAB>lang=translation[<TAB>lang=translation...]`.
//! Blank lines and lines starting with `#` are skipped.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ocrforge_core::corpus::{LangCode, Lexicon, LexiconEntry, SlotKind, Template, TemplateSet};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_TEMPLATES: &str = include_str!("../assets/templates.toml");
pub const DEFAULT_LEXICON: &str = include_str!("../assets/lexicon.tsv");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    #[serde(default)]
    template: Vec<TemplateDef>,
    #[serde(default)]
    vocabulary: BTreeMap<String, BTreeMap<String, Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateDef {
    id: String,
    language: String,
    lines: Vec<String>,
    #[serde(default)]
    slots: BTreeMap<String, SlotDef>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SlotDef {
    Word { category: String },
    Price { min_cents: u64, max_cents: u64 },
    Integer { min: i64, max: i64 },
    Total { of: Vec<String> },
}

impl From<SlotDef> for SlotKind {
    fn from(s: SlotDef) -> Self {
        match s {
            SlotDef::Word { category } => SlotKind::Word { category },
            SlotDef::Price { min_cents, max_cents } => SlotKind::Price { min_cents, max_cents },
            SlotDef::Integer { min, max } => SlotKind::Integer { min, max },
            SlotDef::Total { of } => SlotKind::Total { of },
        }
    }
}

pub fn parse_templates(text: &str, origin: &str) -> Result<TemplateSet, CliError> {
    let file: TemplateFile = toml::from_str(text).map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
    let lang = |code: &str| LangCode::new(code).map_err(|e| CliError::Data(format!("{origin}: {e}")));
    let mut templates = Vec::with_capacity(file.template.len());
    for t in file.template {
        templates.push(Template {
            id: t.id,
            language: lang(&t.language)?,
            lines: t.lines,
            slots: t.slots.into_iter().map(|(k, v)| (k, v.into())).collect(),
        });
    }
    let mut vocab = Vec::new();
    for (category, by_lang) in file.vocabulary {
        for (code, words) in by_lang {
            vocab.push((category.clone(), lang(&code)?, words));
        }
    }
    TemplateSet::new(templates, vocab).map_err(|e| CliError::Data(format!("{origin}: {e}")))
}

pub fn parse_lexicon(text: &str, origin: &str) -> Result<Lexicon, CliError> {
    let mut entries = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let bad = |reason: String| CliError::Data(format!("{origin}:{}: {reason}", n + 1));
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let key = cols.next().unwrap_or_default().trim();
        let mut translations = BTreeMap::new();
        for col in cols {
            if col.trim().is_empty() {
                continue;
            }
            let (code, tr) = col.split_once('=').ok_or_else(|| bad(format!("column {col:?} is not lang=translation")))?;
            let code = LangCode::new(code.trim()).map_err(|e| bad(e.to_string()))?;
            translations.insert(code, tr.trim().to_string());
        }
        entries.push(LexiconEntry::new(key, translations).map_err(|e| bad(e.to_string()))?);
    }
    Ok(Lexicon::new(entries))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Load templates from `path`, or the embedded set.
pub fn load_templates(path: Option<&Path>) -> Result<TemplateSet, CliError> {
    match path {
        Some(p) => parse_templates(&read_text(p)?, &p.display().to_string()),
        None => parse_templates(DEFAULT_TEMPLATES, "built-in templates"),
    }
}

pub fn load_lexicon(path: Option<&Path>) -> Result<Lexicon, CliError> {
    match path {
        Some(p) => parse_lexicon(&read_text(p)?, &p.display().to_string()),
        None => parse_lexicon(DEFAULT_LEXICON, "built-in lexicon"),
    }
}
