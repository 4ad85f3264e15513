//! `ocrforge evaluate`: score a prediction file against manifest text.

use std::fs;
use std::path::{Path, PathBuf};

use ocrforge_core::metrics::{evaluate, EvalReport, Prediction, Reference};

use crate::cli::{require, EvaluateArgs, ModeArg};
use crate::error::CliError;
use crate::manifest::{read_manifest, read_predictions, SampleRecord};

pub fn references(records: &[SampleRecord], mode: ModeArg) -> Vec<Reference> {
    records
        .iter()
        .map(|r| {
            let (text, language) = match mode {
                ModeArg::Ocr => (Some(r.full_text_src.clone()), Some(r.language_src.clone())),
                ModeArg::Translation => (r.full_text_tgt.clone(), r.language_tgt.clone()),
            };
            Reference { id: r.id.clone(), text, language, condition_tags: r.condition_tags.clone() }
        })
        .collect()
}

/// `report` with `.json` and `.txt` in place of any extension it has.
pub fn report_paths(report: &Path) -> (PathBuf, PathBuf) {
    (report.with_extension("json"), report.with_extension("txt"))
}

pub fn evaluate_files(manifest: &Path, pred: &Path, mode: ModeArg) -> Result<EvalReport, CliError> {
    let m = read_manifest(manifest)?;
    if m.unknown_keys > 0 {
        eprintln!("warning: ignored {} unknown manifest keys", m.unknown_keys);
    }
    let preds: Vec<Prediction> =
        read_predictions(pred)?.into_iter().map(|p| Prediction { id: p.id, text: p.text }).collect();
    evaluate(&references(&m.records, mode), &preds).map_err(CliError::data)
}

pub fn run(args: EvaluateArgs) -> Result<(), CliError> {
    let manifest = require(args.manifest, "--manifest")?;
    let pred = require(args.pred, "--pred")?;
    let report_stem = require(args.report, "--report")?;
    let report = evaluate_files(&manifest, &pred, args.mode.unwrap_or(ModeArg::Ocr))?;
    let table = report.to_table();
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    let (json_path, txt_path) = report_paths(&report_stem);
    if let Some(dir) = json_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(&json_path, json + "\n").map_err(|e| CliError::io(&json_path, e))?;
    fs::write(&txt_path, &table).map_err(|e| CliError::io(&txt_path, e))?;
    print!("{table}");
    Ok(())
}
