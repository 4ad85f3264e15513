//! `ocrforge translate`: run the in-image translation pipeline over every
//! record of a manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ocrforge_core::corpus::{translate_line, LangCode, Lexicon};
use ocrforge_core::font::BuiltinFont;
use ocrforge_core::metrics::MetricsError;
use ocrforge_core::render::TextRegion;
use ocrforge_core::{AlphaMask, Point, Quad};
use ocrforge_core::viztrans::{
    acquire_masks, assign_to_hints, changed_outside, translate_image, AcquiredRegion, ColorPolicy, MaskSource,
    RegionOutcome, RenderStyle, TranslationJob, TranslationRegion,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::assets::load_lexicon;
use crate::cli::{require, resolve_threads, MaskSourceArg, TranslateArgs};
use crate::error::CliError;
use crate::imageio::{read_image, read_mask, write_png};
use crate::manifest::{read_manifest, SampleRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslateResult {
    pub id: String,
    pub output_path: Option<String>,
    pub language_tgt: String,
    pub mask_source: &'static str,
    pub regions: Vec<RegionOutcome>,
    /// Detections or mask components not matched to any manifest region.
    pub unassigned: usize,
    pub changed_outside: usize,
    pub preserved: bool,
    pub error: Option<String>,
}

impl TranslateResult {
    pub fn failed(&self) -> bool {
        self.error.is_some() || !self.preserved || self.regions.iter().any(|r| r.error.is_some())
    }
}

fn parse_color(s: &str) -> Result<ColorPolicy, CliError> {
    if s == "auto" {
        return Ok(ColorPolicy::Auto);
    }
    let hex = s.strip_prefix('#').unwrap_or(s);
    let bad = || CliError::Usage(format!("--color {s:?}: expected auto or #rrggbb"));
    if hex.len() != 6 || !hex.is_ascii() {
        return Err(bad());
    }
    let c = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| bad());
    Ok(ColorPolicy::Fixed([c(0)?, c(2)?, c(4)?]))
}

/// Where each record's target text comes from.
enum TargetText {
    Identity,
    Manifest,
    Lexicon(Lexicon, LangCode),
}

struct Plan {
    manifest: PathBuf,
    mask_source: MaskSourceArg,
    masks: Option<PathBuf>,
    target: TargetText,
    style: RenderStyle,
}

/// Target language and per-region target lines of `r`, in region order.
fn target_lines(plan: &Plan, r: &SampleRecord) -> Result<(String, Vec<String>), CliError> {
    match &plan.target {
        TargetText::Identity => Ok((r.language_src.clone(), r.regions.iter().map(|g| g.text.clone()).collect())),
        TargetText::Lexicon(lex, lang) => {
            Ok((lang.to_string(), r.regions.iter().map(|g| translate_line(&g.text, lex, lang).0).collect()))
        }
        TargetText::Manifest => {
            let text = r.full_text_tgt.as_deref().ok_or_else(|| CliError::data(MetricsError::MissingTargetText(r.id.clone())))?;
            let lines: Vec<&str> = text.split('\n').collect();
            if lines.len() != r.regions.len() {
                return Err(CliError::Data(format!(
                    "{}: full_text_tgt has {} lines for {} regions",
                    r.id,
                    lines.len(),
                    r.regions.len()
                )));
            }
            let lang = r.language_tgt.clone().unwrap_or_else(|| "tgt".into());
            Ok((lang, r.regions.iter().map(|g| lines[g.line_index as usize].to_string()).collect()))
        }
    }
}

/// Re-rendered masks are crisp, but blur and resampling spread ink. Grow
/// them by the spread: one pixel for interpolation plus 3 sigma of blur.
/// Clean renders need no growth.
pub fn gt_dilation(r: &SampleRecord) -> u32 {
    if r.degradations.is_empty() {
        return 0;
    }
    let sigma2: f64 = r
        .degradations
        .iter()
        .filter(|d| d.kind == "blur")
        .filter_map(|d| d.params.get("sigma"))
        .map(|s| s * s)
        .sum();
    let resample = r.degradations.iter().any(|d| d.kind == "resample" || d.kind == "block_compress");
    1 + (3.0 * sigma2.sqrt()).ceil() as u32 + u32::from(resample)
}

/// Dilate `mask`, keeping only pixels inside the quad's bounding box grown
/// by 2 px.
pub fn grow_within(mask: &AlphaMask, quad: &Quad, radius: u32) -> AlphaMask {
    let mut m = mask.dilate(radius);
    let b = quad.bounds().inflate(2.0);
    let w = m.width();
    for (i, v) in m.values_mut().iter_mut().enumerate() {
        let (x, y) = ((i as u32 % w) as f64, (i as u32 / w) as f64);
        if !(x >= b.x0 && x + 1.0 <= b.x1 && y >= b.y0 && y + 1.0 <= b.y1) {
            *v = 0;
        }
    }
    m
}

pub fn output_name(image_path: &str, lang: &str) -> String {
    let stem = image_path.strip_suffix(".png").or_else(|| image_path.strip_suffix(".ppm")).unwrap_or(image_path);
    format!("{stem}.{lang}.png")
}

fn translate_record(plan: &Plan, r: &SampleRecord) -> TranslateResult {
    let mask_source = match plan.mask_source {
        MaskSourceArg::Gt => "gt",
        MaskSourceArg::Imported => "imported",
        MaskSourceArg::Detector => "detector",
    };
    let mut res = TranslateResult {
        id: r.id.clone(),
        output_path: None,
        language_tgt: String::new(),
        mask_source,
        regions: Vec::new(),
        unassigned: 0,
        changed_outside: 0,
        preserved: true,
        error: None,
    };
    if let Err(e) = translate_into(plan, r, &mut res) {
        res.error = Some(e.to_string());
    }
    res
}

fn translate_into(plan: &Plan, r: &SampleRecord, res: &mut TranslateResult) -> Result<(), CliError> {
    let glyphs = BuiltinFont;
    let (lang, targets) = target_lines(plan, r)?;
    res.language_tgt = lang.clone();
    let image = read_image(&r.resolve_image(&plan.manifest))?;
    let src_lang = LangCode::new(&r.language_src).map_err(CliError::data)?;
    let hints = r
        .regions
        .iter()
        .map(|g| {
            Ok(TextRegion {
                quad: g.quad().map_err(CliError::data)?,
                text: g.text.clone(),
                line_index: g.line_index,
                occluded_fraction: g.occluded_fraction,
                language: src_lang.clone(),
                clipped: false,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let acquired: Vec<AcquiredRegion> = match plan.mask_source {
        MaskSourceArg::Gt => {
            let radius = gt_dilation(r);
            acquire_masks(&image, MaskSource::GroundTruth, Some(&hints), &glyphs)
                .map_err(CliError::data)?
                .into_iter()
                .map(|a| AcquiredRegion { mask: grow_within(&a.mask, &a.quad, radius), ..a })
                .collect()
        }
        MaskSourceArg::Imported => {
            let dir = plan.masks.as_deref().expect("checked before work starts");
            let mask = read_mask(&dir.join(format!("{}.png", r.id)), (image.width(), image.height()))?;
            let all = acquire_masks(&image, MaskSource::Imported(&mask), Some(&hints), &glyphs).map_err(CliError::data)?;
            res.unassigned = all.iter().filter(|a| a.hint.is_none()).count();
            all.into_iter().filter(|a| a.hint.is_some()).collect()
        }
        MaskSourceArg::Detector => {
            let found = acquire_masks(&image, MaskSource::BaselineDetector, None, &glyphs).map_err(CliError::data)?;
            res.unassigned = found
                .iter()
                .filter(|f| {
                    let b = f.quad.bounds();
                    let c = Point::new((b.x0 + b.x1) / 2.0, (b.y0 + b.y1) / 2.0);
                    !hints.iter().any(|h| h.quad.contains(c))
                })
                .count();
            assign_to_hints(&found, &hints)
        }
    };
    let regions: Vec<TranslationRegion> = acquired
        .into_iter()
        .filter_map(|a| {
            let k = a.hint?;
            Some(TranslationRegion {
                quad: hints[k].quad,
                mask: a.mask,
                src_text: hints[k].text.clone(),
                tgt_text: targets[k].clone(),
            })
        })
        .collect();
    let job = TranslationJob::new(image, regions, &glyphs, plan.style).map_err(CliError::data)?;
    let (out, outcomes) = translate_image(&job);
    res.changed_outside = changed_outside(job.image(), &out, &job.touched_set());
    res.preserved = res.changed_outside == 0;
    res.regions = outcomes;
    let name = output_name(&r.image_path, &lang);
    let dest = plan.manifest.parent().unwrap_or(Path::new(".")).join(&name);
    write_png(&dest, &out)?;
    res.output_path = Some(name);
    Ok(())
}

pub fn run(args: TranslateArgs) -> Result<(), CliError> {
    let manifest_path = require(args.manifest, "--manifest")?;
    let mask_source = args.mask_source.unwrap_or(MaskSourceArg::Gt);
    if mask_source == MaskSourceArg::Imported && args.masks.is_none() {
        return Err(CliError::Usage("--mask-source imported needs --masks".into()));
    }
    let style = RenderStyle { color: parse_color(args.color.as_deref().unwrap_or("auto"))?, ..RenderStyle::default() };
    let threads = resolve_threads(args.threads)?;
    let manifest = read_manifest(&manifest_path)?;
    if manifest.unknown_keys > 0 {
        eprintln!("warning: ignored {} unknown manifest keys", manifest.unknown_keys);
    }

    let target = if args.identity {
        TargetText::Identity
    } else {
        let tgt = args.tgt_lang.as_deref().map(LangCode::new).transpose().map_err(|e| CliError::Usage(e.to_string()))?;
        let usable = |r: &SampleRecord| {
            r.full_text_tgt.is_some() && tgt.as_ref().map_or(true, |t| r.language_tgt.as_deref() == Some(t.as_str()))
        };
        if manifest.records.iter().all(usable) {
            TargetText::Manifest
        } else {
            match (&args.lexicon, tgt.clone()) {
                (Some(p), Some(t)) => TargetText::Lexicon(load_lexicon(Some(p))?, t),
                (Some(_), None) => return Err(CliError::Usage("--lexicon needs --tgt-lang".into())),
                (None, _) => {
                    let r = manifest.records.iter().find(|r| !usable(r)).expect("some record is unusable");
                    return Err(CliError::data(MetricsError::MissingTargetText(r.id.clone())));
                }
            }
        }
    };
    let plan = Plan { manifest: manifest_path.clone(), mask_source, masks: args.masks, target, style };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let results: Vec<TranslateResult> =
        pool.install(|| manifest.records.par_iter().map(|r| translate_record(&plan, r)).collect());

    let out_path = match args.out {
        Some(p) => p,
        None => {
            let lang = results.first().map(|r| r.language_tgt.as_str()).filter(|l| !l.is_empty()).unwrap_or("tgt");
            manifest_path.parent().unwrap_or(Path::new(".")).join(format!("translations.{lang}.jsonl"))
        }
    };
    let file = File::create(&out_path).map_err(|e| CliError::io(&out_path, e))?;
    let mut w = BufWriter::new(file);
    for r in &results {
        let line = serde_json::to_string(r).map_err(|e| CliError::Internal(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| CliError::io(&out_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&out_path, e))?;

    let failed = results.iter().filter(|r| r.failed()).count();
    let preserved = results.iter().filter(|r| r.error.is_none() && r.preserved).count();
    eprintln!(
        "translated {} records, {} failed; background preserved in {}/{}; results in {}",
        results.len(),
        failed,
        preserved,
        results.len(),
        out_path.display()
    );
    for r in results.iter().filter(|r| r.failed()) {
        let why = r.error.clone().or_else(|| r.regions.iter().find_map(|g| g.error.clone())).unwrap_or_else(|| {
            format!("{} pixels changed outside the touched set", r.changed_outside)
        });
        eprintln!("  {}: {why}", r.id);
    }
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} of {} records failed", results.len())));
    }
    Ok(())
}
