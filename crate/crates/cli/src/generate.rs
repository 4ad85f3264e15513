//! `ocrforge generate`: text sampling, rendering and degradation for a run of
//! sample indices, with one manifest written in index order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ocrforge_core::corpus::{
    identity_pair, mix_languages, pair_translation, sample_source_text, LangCode, Lexicon, TemplateSet,
};
use ocrforge_core::degrade::apply_chain;
use ocrforge_core::font::BuiltinFont;
use ocrforge_core::render::{compose_scene, BackgroundKind, LayoutKind, LayoutStyle, SceneSpec};
use ocrforge_core::{derive_seed, RasterImage, Rng};
use rayon::prelude::*;

use crate::assets::{load_lexicon, load_templates};
use crate::chain::{parse_chain, resolve_chain, ChainStep};
use crate::cli::{require, resolve_threads, BgArg, GenerateArgs, StyleArg};
use crate::error::CliError;
use crate::imageio::{read_image, write_png};
use crate::manifest::{DegradationRecord, ManifestWriter, RegionRecord, SampleRecord};

/// Samples handed to the pool at a time; bounds memory between writes.
const CHUNK: u64 = 256;

/// Fully validated generate settings.
pub struct GenerateConfig {
    pub count: u64,
    pub seed: u64,
    pub langs: Vec<LangCode>,
    pub tgt_lang: Option<LangCode>,
    pub templates: TemplateSet,
    pub lexicon: Lexicon,
    pub style: StyleArg,
    pub bg: BgArg,
    pub import_bg: Vec<PathBuf>,
    pub chain: Vec<ChainStep>,
    pub mix_prob: f64,
    pub width: u32,
    pub height: u32,
    pub out: PathBuf,
    pub threads: usize,
}

fn lang(code: &str) -> Result<LangCode, CliError> {
    LangCode::new(code.trim()).map_err(|e| CliError::Usage(e.to_string()))
}

fn list_backgrounds(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| CliError::io(path, e))? {
        let p = entry.map_err(|e| CliError::io(path, e))?.path();
        let ext = p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "ppm")) {
            files.push(p);
        }
    }
    // directory order is not stable across filesystems
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no .png or .ppm backgrounds", path.display())));
    }
    Ok(files)
}

impl GenerateConfig {
    pub fn from_args(a: GenerateArgs) -> Result<Self, CliError> {
        let out = require(a.out, "--out")?;
        let langs = a
            .langs
            .as_deref()
            .unwrap_or("en")
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(lang)
            .collect::<Result<Vec<_>, _>>()?;
        if langs.is_empty() {
            return Err(CliError::Usage("--langs names no language".into()));
        }
        let templates = load_templates(a.templates.as_deref())?;
        let have = templates.languages();
        for l in &langs {
            if !have.contains(l) {
                return Err(CliError::Usage(format!("no templates for language {l}")));
            }
        }
        let mix_prob = a.mix_prob.unwrap_or(0.0);
        if !(0.0..=1.0).contains(&mix_prob) {
            return Err(CliError::Usage("--mix-prob must be in [0, 1]".into()));
        }
        if mix_prob > 0.0 && langs.len() < 2 {
            return Err(CliError::Usage("--mix-prob needs at least two --langs".into()));
        }
        let bg = a.bg.unwrap_or(BgArg::Random);
        let import_bg = match (&a.import_bg, bg) {
            (Some(p), BgArg::Imported) => list_backgrounds(p)?,
            (None, BgArg::Imported) => return Err(CliError::Usage("--bg imported needs --import-bg".into())),
            (Some(_), _) => return Err(CliError::Usage("--import-bg is only used with --bg imported".into())),
            (None, _) => Vec::new(),
        };
        let (width, height) = (a.width.unwrap_or(512), a.height.unwrap_or(320));
        if width < 32 || height < 32 {
            return Err(CliError::Usage("--width and --height must be at least 32".into()));
        }
        Ok(GenerateConfig {
            count: a.count.unwrap_or(100),
            seed: a.seed.unwrap_or(0),
            langs,
            tgt_lang: a.tgt_lang.as_deref().map(lang).transpose()?,
            templates,
            lexicon: load_lexicon(a.lexicon.as_deref())?,
            style: a.style.unwrap_or(StyleArg::Document),
            bg,
            import_bg,
            chain: parse_chain(a.chain.as_deref().unwrap_or(""))?,
            mix_prob,
            width,
            height,
            out,
            threads: resolve_threads(a.threads)?,
        })
    }
}

pub fn image_name(index: u64) -> String {
    format!("images/{index:06}.png")
}

/// Build sample `index` and write its image. Pure in (config, index).
pub fn make_sample(cfg: &GenerateConfig, index: u64) -> Result<SampleRecord, CliError> {
    let glyphs = BuiltinFont;
    let sample_seed = derive_seed(cfg.seed, index);
    let mut text_rng = Rng::new(derive_seed(sample_seed, 0));
    let mut render_rng = Rng::new(derive_seed(sample_seed, 1));
    let ctx = |e: &dyn std::fmt::Display| CliError::Data(format!("sample {index}: {e}"));

    let first = cfg.langs[text_rng.index(cfg.langs.len())].clone();
    let src = if cfg.mix_prob > 0.0 && text_rng.chance(cfg.mix_prob) {
        let others: Vec<&LangCode> = cfg.langs.iter().filter(|l| **l != first).collect();
        let second = others[text_rng.index(others.len())].clone();
        let a = sample_source_text(&cfg.templates, &first, &mut text_rng).map_err(|e| ctx(&e))?;
        let b = sample_source_text(&cfg.templates, &second, &mut text_rng).map_err(|e| ctx(&e))?;
        mix_languages(&[a, b], &mut text_rng).map_err(|e| ctx(&e))?
    } else {
        sample_source_text(&cfg.templates, &first, &mut text_rng).map_err(|e| ctx(&e))?
    };
    let pair = match &cfg.tgt_lang {
        Some(t) => pair_translation(&src, &cfg.lexicon, t),
        None => identity_pair(&src),
    };

    let kind = match cfg.style {
        StyleArg::Document => LayoutKind::Document,
        StyleArg::Scattered => LayoutKind::Scattered,
        StyleArg::Random => [LayoutKind::Document, LayoutKind::Scattered][render_rng.index(2)],
    };
    let background = match cfg.bg {
        BgArg::Solid => BackgroundKind::Solid,
        BgArg::Gradient => BackgroundKind::Gradient,
        BgArg::NoiseTexture => BackgroundKind::NoiseTexture,
        BgArg::Imported => BackgroundKind::Imported,
        BgArg::Random => BackgroundKind::PROCEDURAL[render_rng.index(3)],
    };
    let imported: Option<RasterImage> = if background == BackgroundKind::Imported {
        let path = &cfg.import_bg[render_rng.index(cfg.import_bg.len())];
        Some(read_image(path)?)
    } else {
        None
    };
    let spec = SceneSpec {
        width: cfg.width,
        height: cfg.height,
        layout: LayoutStyle { kind, ..LayoutStyle::default() },
        background,
        imported: imported.as_ref(),
    };
    let rendered = compose_scene(&pair, &spec, &glyphs, &mut render_rng).map_err(|e| ctx(&e))?;
    let chain = resolve_chain(&cfg.chain, sample_seed)?;
    let degraded = apply_chain(rendered, &chain, &glyphs).map_err(|e| ctx(&e))?;

    let image_path = image_name(index);
    let dest = cfg.out.join(&image_path);
    write_png(&dest, &degraded.sample.image)?;

    let s = &degraded.sample;
    Ok(SampleRecord {
        id: format!("{index:06}"),
        image_path,
        width: s.image.width(),
        height: s.image.height(),
        language_src: s.pair.src.language.to_string(),
        language_tgt: cfg.tgt_lang.as_ref().map(LangCode::to_string),
        regions: s.regions.iter().map(RegionRecord::from_region).collect(),
        full_text_src: s.pair.src.full_text(),
        full_text_tgt: cfg.tgt_lang.as_ref().map(|_| s.pair.tgt.full_text()),
        degradations: degraded.applied.iter().map(DegradationRecord::from_spec).collect(),
        condition_tags: degraded.condition_tags.clone(),
        master_seed: cfg.seed,
        sample_index: index,
    })
}

#[derive(Debug, Default)]
pub struct Summary {
    pub count: usize,
    pub languages: BTreeMap<String, usize>,
    pub tags: BTreeMap<String, usize>,
}

impl Summary {
    fn add(&mut self, r: &SampleRecord) {
        self.count += 1;
        *self.languages.entry(r.language_src.clone()).or_default() += 1;
        for t in &r.condition_tags {
            *self.tags.entry(t.clone()).or_default() += 1;
        }
    }
}

fn remove_images(out: &Path, upto: u64) {
    for i in 0..upto {
        let _ = fs::remove_file(out.join(image_name(i)));
    }
}

pub fn generate(cfg: &GenerateConfig) -> Result<Summary, CliError> {
    let images = cfg.out.join("images");
    fs::create_dir_all(&images).map_err(|e| CliError::io(&images, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let mut writer = ManifestWriter::create(&cfg.out.join("manifest.jsonl"))?;
    let mut summary = Summary::default();
    let mut start = 0;
    while start < cfg.count {
        let end = (start + CHUNK).min(cfg.count);
        let batch: Vec<Result<SampleRecord, CliError>> =
            pool.install(|| (start..end).into_par_iter().map(|i| make_sample(cfg, i)).collect());
        for r in batch {
            let r = match r {
                Ok(r) => r,
                Err(e) => {
                    drop(writer);
                    remove_images(&cfg.out, end);
                    return Err(e);
                }
            };
            writer.write(&r)?;
            summary.add(&r);
        }
        eprintln!("generated {end}/{}", cfg.count);
        start = end;
    }
    writer.finish()?;
    Ok(summary)
}

pub fn run(args: GenerateArgs) -> Result<(), CliError> {
    let cfg = GenerateConfig::from_args(args)?;
    let s = generate(&cfg)?;
    eprintln!("wrote {} samples to {}", s.count, cfg.out.join("manifest.jsonl").display());
    for (l, n) in &s.languages {
        eprintln!("  language {l}: {n}");
    }
    for (t, n) in &s.tags {
        eprintln!("  condition {t}: {n}");
    }
    Ok(())
}
