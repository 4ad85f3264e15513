//! `ocrforge inspect`: per-record summaries and quad overlays.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use ocrforge_core::{Point, RasterImage, Rgb};

use crate::cli::InspectArgs;
use crate::error::CliError;
use crate::imageio::{read_image, write_png};
use crate::manifest::{read_manifest, SampleRecord};

pub const OVERLAY_COLOR: Rgb = [255, 0, 0];

/// One line per record: id, languages, tags, region count.
pub fn describe(r: &SampleRecord) -> String {
    format!(
        "{}  {} -> {}  tags={}  regions={}",
        r.id,
        r.language_src,
        r.language_tgt.as_deref().unwrap_or("-"),
        r.condition_tags.join(","),
        r.regions.len()
    )
}

/// Set the pixel under `p`, if it is on the canvas.
fn plot(img: &mut RasterImage, p: Point, c: Rgb) {
    let (x, y) = (p.x.floor(), p.y.floor());
    if x >= 0.0 && y >= 0.0 && x < f64::from(img.width()) && y < f64::from(img.height()) {
        img.put(x as u32, y as u32, c);
    }
}

/// Stroke a closed polygon one pixel wide by dense sampling along each edge.
pub fn stroke_polygon(img: &mut RasterImage, corners: &[Point], c: Rgb) {
    for (i, &a) in corners.iter().enumerate() {
        let b = corners[(i + 1) % corners.len()];
        let steps = (a.distance(b) * 2.0).ceil().max(1.0) as usize;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            plot(img, Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t), c);
        }
    }
}

pub fn overlay(r: &SampleRecord, manifest: &Path, out_dir: &Path) -> Result<(), CliError> {
    let mut img = read_image(&r.resolve_image(manifest))?;
    for g in &r.regions {
        let corners: Vec<Point> = g.quad.iter().map(|p| Point::new(p[0], p[1])).collect();
        stroke_polygon(&mut img, &corners, OVERLAY_COLOR);
    }
    write_png(&out_dir.join(format!("{}.png", r.id)), &img)?;
    Ok(())
}

pub fn run(args: &InspectArgs) -> Result<(), CliError> {
    let m = read_manifest(&args.manifest)?;
    let mut out = io::stdout().lock();
    let mut say = |line: String| match writeln!(out, "{line}") {
        // a closed pipe (`| head`) just ends the listing
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(|e| CliError::io("<stdout>", e)),
    };
    say(format!("{} records", m.records.len()))?;
    if m.unknown_keys > 0 {
        eprintln!("warning: ignored {} unknown manifest keys", m.unknown_keys);
    }
    if let Some(dir) = &args.overlay {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    for r in &m.records {
        say(describe(r))?;
        if let Some(dir) = &args.overlay {
            overlay(r, &args.manifest, dir)?;
        }
    }
    Ok(())
}
