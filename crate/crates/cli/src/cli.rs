//! Command line definitions. Every generate/translate/evaluate option can
//! also come from a TOML config file section of the same name, with
//! underscores in place of dashes. Flags win over the file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "ocrforge", version, about = "Synthetic OCR and image-translation corpora: generate, degrade, translate, score.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic corpus: images plus manifest.jsonl.
    Generate(GenerateArgs),
    /// Replace the text of every manifest image with its target-language text.
    Translate(TranslateArgs),
    /// Score predictions against a manifest and write JSON and text reports.
    Evaluate(EvaluateArgs),
    /// Summarize a manifest, optionally drawing region quads onto the images.
    Inspect(InspectArgs),
    /// Print the visual chain-of-thought prompt for a query.
    Prompt(PromptArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleArg {
    Document,
    Scattered,
    /// Pick per sample.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BgArg {
    Solid,
    Gradient,
    #[value(name = "noise_texture")]
    NoiseTexture,
    /// Images from --import-bg.
    Imported,
    /// Pick a procedural kind per sample.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskSourceArg {
    /// Masks re-rendered from the manifest text and quads.
    Gt,
    /// Grayscale PNG masks named <id>.png in --masks.
    Imported,
    /// Built-in threshold and connected-component detector.
    Detector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Score against full_text_src.
    Ocr,
    /// Score against full_text_tgt.
    Translation,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateArgs {
    /// Number of samples [default: 100]
    #[arg(long)]
    pub count: Option<u64>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated source languages, chosen uniformly per sample [default: en]
    #[arg(long)]
    pub langs: Option<String>,
    /// Target language; fills full_text_tgt through the lexicon
    #[arg(long)]
    pub tgt_lang: Option<String>,
    /// Template file (TOML) [default: built-in set]
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Parallel lexicon (TSV) [default: built-in lexicon]
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Layout style [default: document]
    #[arg(long, value_enum)]
    pub style: Option<StyleArg>,
    /// Background kind [default: random]
    #[arg(long, value_enum)]
    pub bg: Option<BgArg>,
    /// Background image file or directory of PNG/PPM files, for --bg imported
    #[arg(long)]
    pub import_bg: Option<PathBuf>,
    /// Degradation chain, e.g. "blur:sigma=2;rotate:angle=-15..15"
    #[arg(long)]
    pub chain: Option<String>,
    /// Probability that a sample mixes lines from two source languages [default: 0]
    #[arg(long)]
    pub mix_prob: Option<f64>,
    /// Image width in pixels [default: 512]
    #[arg(long)]
    pub width: Option<u32>,
    /// Image height in pixels [default: 320]
    #[arg(long)]
    pub height: Option<u32>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: OCRFORGE_THREADS, else all cores]
    #[arg(long)]
    pub threads: Option<usize>,
    /// TOML config file; its [generate] table supplies unset options
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslateArgs {
    /// Input manifest
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Where region masks come from [default: gt]
    #[arg(long, value_enum)]
    pub mask_source: Option<MaskSourceArg>,
    /// Directory of <id>.png masks for --mask-source imported
    #[arg(long)]
    pub masks: Option<PathBuf>,
    /// Lexicon (TSV) used when records carry no target text
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Target language [default: each record's language_tgt]
    #[arg(long)]
    pub tgt_lang: Option<String>,
    /// Re-render the source text itself (preservation self-check)
    #[arg(long)]
    #[serde(default)]
    pub identity: bool,
    /// Ink colour: auto or #rrggbb [default: auto]
    #[arg(long)]
    pub color: Option<String>,
    /// Results file (JSON lines) [default: translations.<lang>.jsonl beside the manifest]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: OCRFORGE_THREADS, else all cores]
    #[arg(long)]
    pub threads: Option<usize>,
    /// TOML config file; its [translate] table supplies unset options
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateArgs {
    /// Reference manifest
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Predictions, JSON lines of {"id": ..., "text": ...}
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Which reference text to score against [default: ocr]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Report path stem; writes <stem>.json and <stem>.txt
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// TOML config file; its [evaluate] table supplies unset options
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    /// Manifest to summarize
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for <id>.png debug images with region quads stroked
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PromptArgs {
    /// Question to embed in the prompt
    #[arg(long)]
    pub query: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    generate: Option<GenerateArgs>,
    translate: Option<TranslateArgs>,
    evaluate: Option<EvaluateArgs>,
}

fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

macro_rules! fill {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )*
    };
}

impl GenerateArgs {
    pub fn with_config(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        if let Some(c) = load_config(&path)?.generate {
            fill!(self, c; count, seed, langs, tgt_lang, templates, lexicon, style, bg, import_bg, chain, mix_prob, width, height, out, threads);
        }
        Ok(self)
    }
}

impl TranslateArgs {
    pub fn with_config(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        if let Some(c) = load_config(&path)?.translate {
            fill!(self, c; manifest, mask_source, masks, lexicon, tgt_lang, color, out, threads);
            self.identity |= c.identity;
        }
        Ok(self)
    }
}

impl EvaluateArgs {
    pub fn with_config(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        if let Some(c) = load_config(&path)?.evaluate {
            fill!(self, c; manifest, pred, mode, report);
        }
        Ok(self)
    }
}

/// Flag, then `OCRFORGE_THREADS`, then the number of available cores.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return if n == 0 { Err(CliError::Usage("--threads must be at least 1".into())) } else { Ok(n) };
    }
    if let Ok(v) = std::env::var("OCRFORGE_THREADS") {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("OCRFORGE_THREADS={v:?} is not a positive integer"))),
        };
    }
    Ok(std::thread::available_parallelism().map(usize::from).unwrap_or(1))
}

pub fn require<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required option {flag}")))
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => crate::generate::run(a.with_config()?),
        Command::Translate(a) => crate::translate::run(a.with_config()?),
        Command::Evaluate(a) => crate::evaluate::run(a.with_config()?),
        Command::Inspect(a) => crate::inspect::run(&a),
        Command::Prompt(a) => crate::prompt::run(&a),
    }
}

/// Parse `args` and run. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
