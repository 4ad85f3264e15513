//! JSON-lines dataset manifest.
//!
//! The first line is the schema header `{"schema_version":1}`; every other
//! line is one [`SampleRecord`]. Keys are written in declaration order,
//! floats in shortest round-trip form, and `u64` seeds as decimal strings.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ocrforge_core::degrade::{DegradationKind, DegradationSpec};
use ocrforge_core::render::TextRegion;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: invariant violated for field {field}")]
    InvariantViolation { line: usize, field: &'static str },
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("unsupported schema version {0}")]
    UnsupportedSchema(u64),
}

mod u64_string {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("expected a decimal u64 string, got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    /// TL, TR, BR, BL.
    pub quad: [[f64; 2]; 4],
    pub text: String,
    pub line_index: u32,
    pub occluded_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationRecord {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
    #[serde(with = "u64_string")]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub image_path: String,
    pub width: u32,
    pub height: u32,
    pub language_src: String,
    pub language_tgt: Option<String>,
    pub regions: Vec<RegionRecord>,
    pub full_text_src: String,
    pub full_text_tgt: Option<String>,
    pub degradations: Vec<DegradationRecord>,
    pub condition_tags: Vec<String>,
    #[serde(with = "u64_string")]
    pub master_seed: u64,
    pub sample_index: u64,
}

const KNOWN_KEYS: [&str; 13] = [
    "id",
    "image_path",
    "width",
    "height",
    "language_src",
    "language_tgt",
    "regions",
    "full_text_src",
    "full_text_tgt",
    "degradations",
    "condition_tags",
    "master_seed",
    "sample_index",
];

impl RegionRecord {
    pub fn from_region(r: &TextRegion) -> Self {
        let c = r.quad.corners();
        RegionRecord {
            quad: [[c[0].x, c[0].y], [c[1].x, c[1].y], [c[2].x, c[2].y], [c[3].x, c[3].y]],
            text: r.text.clone(),
            line_index: r.line_index,
            occluded_fraction: r.occluded_fraction,
        }
    }

    pub fn quad(&self) -> Result<ocrforge_core::Quad, ocrforge_core::geometry::GeometryError> {
        let p = |i: usize| ocrforge_core::Point::new(self.quad[i][0], self.quad[i][1]);
        ocrforge_core::Quad::new([p(0), p(1), p(2), p(3)])
    }
}

impl DegradationRecord {
    pub fn from_spec(s: &DegradationSpec) -> Self {
        let mut params = s.params.clone();
        params.entry(s.kind.param_name().to_string()).or_insert_with(|| s.value());
        DegradationRecord { kind: s.kind.as_str().to_string(), params, seed: s.seed }
    }

    pub fn to_spec(&self) -> Result<DegradationSpec, ocrforge_core::degrade::DegradeError> {
        DegradationSpec::new(DegradationKind::parse(&self.kind)?, self.params.clone(), self.seed)
    }
}

impl SampleRecord {
    /// Region texts joined by `\n` in `line_index` order.
    pub fn joined_region_text(&self) -> String {
        let mut regions: Vec<&RegionRecord> = self.regions.iter().collect();
        regions.sort_by_key(|r| r.line_index);
        regions.iter().map(|r| r.text.as_str()).collect::<Vec<_>>().join("\n")
    }

    /// Per-record invariants; returns the offending field.
    pub fn check(&self) -> Result<(), &'static str> {
        if self.id.is_empty() {
            return Err("id");
        }
        if self.width == 0 || self.height == 0 {
            return Err("width");
        }
        if self.regions.iter().any(|r| r.quad.iter().flatten().any(|v| !v.is_finite())) {
            return Err("regions");
        }
        if self.regions.iter().any(|r| !(0.0..=1.0).contains(&r.occluded_fraction)) {
            return Err("regions");
        }
        if self.full_text_src != self.joined_region_text() {
            return Err("full_text_src");
        }
        Ok(())
    }

    /// Image path resolved against the manifest's directory.
    pub fn resolve_image(&self, manifest: &Path) -> PathBuf {
        manifest.parent().unwrap_or(Path::new(".")).join(&self.image_path)
    }
}

/// Serialize one record as a single JSON line (no trailing newline).
pub fn record_line(r: &SampleRecord) -> String {
    serde_json::to_string(r).expect("records always serialize")
}

fn header_line() -> String {
    format!("{{\"schema_version\":{SCHEMA_VERSION}}}")
}

/// Streams records into `<path>.partial` and renames it into place on
/// [`ManifestWriter::finish`]. Dropping an unfinished writer removes the
/// partial file, so a failed run never leaves a manifest behind.
pub struct ManifestWriter {
    path: PathBuf,
    tmp: PathBuf,
    out: Option<BufWriter<File>>,
    ids: HashSet<String>,
    count: usize,
}

impl ManifestWriter {
    pub fn create(path: &Path) -> Result<Self, ManifestError> {
        let tmp = path.with_extension("jsonl.partial");
        let io = |source| ManifestError::Io { path: tmp.clone(), source };
        let mut out = BufWriter::new(File::create(&tmp).map_err(io)?);
        writeln!(out, "{}", header_line()).map_err(io)?;
        Ok(ManifestWriter { path: path.to_path_buf(), tmp, out: Some(out), ids: HashSet::new(), count: 0 })
    }

    pub fn write(&mut self, r: &SampleRecord) -> Result<(), ManifestError> {
        if !self.ids.insert(r.id.clone()) {
            return Err(ManifestError::DuplicateId(r.id.clone()));
        }
        let out = self.out.as_mut().expect("writer is open until finish");
        writeln!(out, "{}", record_line(r)).map_err(|source| ManifestError::Io { path: self.tmp.clone(), source })?;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(mut self) -> Result<usize, ManifestError> {
        let io = |path: &Path, source| ManifestError::Io { path: path.to_path_buf(), source };
        let out = self.out.take().expect("finish is called once");
        let file = out.into_inner().map_err(|e| io(&self.tmp, e.into_error()))?;
        file.sync_all().map_err(|e| io(&self.tmp, e))?;
        fs::rename(&self.tmp, &self.path).map_err(|e| io(&self.path, e))?;
        Ok(self.count)
    }
}

impl Drop for ManifestWriter {
    fn drop(&mut self) {
        if self.out.take().is_some() {
            let _ = fs::remove_file(&self.tmp);
        }
    }
}

/// Write a whole manifest at once.
pub fn write_manifest<'a>(records: impl IntoIterator<Item = &'a SampleRecord>, path: &Path) -> Result<usize, ManifestError> {
    let mut w = ManifestWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub records: Vec<SampleRecord>,
    /// Total count of unrecognized keys across all records.
    pub unknown_keys: usize,
}

/// Parse manifest text. Line numbers in errors are 1-based and count the
/// header.
pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let mut m = Manifest::default();
    let mut ids = HashSet::new();
    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| ManifestError::MalformedLine { line: line_no, reason };
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let obj = value.as_object().ok_or_else(|| malformed("not a JSON object".into()))?;
        if let Some(v) = obj.get("schema_version") {
            if obj.len() == 1 {
                let v = v.as_u64().ok_or_else(|| malformed("schema_version is not an integer".into()))?;
                if v != SCHEMA_VERSION {
                    return Err(ManifestError::UnsupportedSchema(v));
                }
                continue;
            }
        }
        m.unknown_keys += obj.keys().filter(|k| !KNOWN_KEYS.contains(&k.as_str())).count();
        let rec: SampleRecord = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
        rec.check().map_err(|field| ManifestError::InvariantViolation { line: line_no, field })?;
        if !ids.insert(rec.id.clone()) {
            return Err(ManifestError::InvariantViolation { line: line_no, field: "id" });
        }
        m.records.push(rec);
    }
    Ok(m)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, ManifestError> {
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.to_path_buf(), source })?;
    parse_manifest(&text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub text: String,
}

/// Read a predictions file: one `{"id": .., "text": ..}` object per line.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, ManifestError> {
    let file = File::open(path).map_err(|source| ManifestError::Io { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| ManifestError::Io { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let p: PredictionRecord = serde_json::from_str(&line)
            .map_err(|e| ManifestError::MalformedLine { line: i + 1, reason: e.to_string() })?;
        out.push(p);
    }
    Ok(out)
}
