use std::fs;
use std::path::Path;
use std::process::Command;

use ocrforge::manifest::read_manifest;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Out {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Out {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ocrforge"));
    cmd.args(args).env_remove("OCRFORGE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let o = cmd.output().unwrap();
    Out {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(out: &Path, extra: &[&str]) {
    let mut args = vec!["generate", "--out", s(out), "--threads", "2"];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(o.code, 0, "{}", o.stderr);
}

#[test]
fn count_zero_is_an_empty_manifest() {
    let d = tempfile::tempdir().unwrap();
    generate(d.path(), &["--count", "0"]);
    let text = fs::read_to_string(d.path().join("manifest.jsonl")).unwrap();
    assert_eq!(text, "{\"schema_version\":1}\n");
    let o = run(&["inspect", "--manifest", s(&d.path().join("manifest.jsonl"))]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "0 records\n");
}

#[test]
fn one_sample_twice_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    generate(a.path(), &["--count", "1", "--seed", "7"]);
    generate(b.path(), &["--count", "1", "--seed", "7"]);
    for f in ["manifest.jsonl", "images/000000.png"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn blur_chain_tags_every_record() {
    let d = tempfile::tempdir().unwrap();
    generate(d.path(), &["--count", "100", "--chain", "blur:sigma=2"]);
    let m = read_manifest(&d.path().join("manifest.jsonl")).unwrap();
    assert_eq!(m.records.len(), 100);
    assert!(m.records.iter().all(|r| r.condition_tags == ["blur"]));
}

#[test]
fn failed_generate_leaves_nothing_behind() {
    let d = tempfile::tempdir().unwrap();
    let bgs = d.path().join("bgs");
    fs::create_dir(&bgs).unwrap();
    fs::write(bgs.join("broken.png"), b"\x89PNG\r\n\x1a\nnot really").unwrap();
    let out = d.path().join("out");
    let o = run(&["generate", "--out", s(&out), "--count", "3", "--bg", "imported", "--import-bg", s(&bgs)]);
    assert_eq!(o.code, 2, "{}", o.stderr);
    assert!(!out.join("manifest.jsonl").exists());
    assert!(!out.join("manifest.jsonl.partial").exists());
    assert_eq!(fs::read_dir(out.join("images")).unwrap().count(), 0);
}

#[test]
fn imported_backgrounds_are_used() {
    let d = tempfile::tempdir().unwrap();
    let bgs = d.path().join("bgs");
    fs::create_dir(&bgs).unwrap();
    let mut ppm = b"P6\n40 40\n255\n".to_vec();
    ppm.extend(std::iter::repeat([10u8, 200, 30]).take(1600).flatten());
    fs::write(bgs.join("green.ppm"), ppm).unwrap();
    let out = d.path().join("out");
    generate(&out, &["--count", "2", "--bg", "imported", "--import-bg", s(&bgs), "--width", "200", "--height", "120"]);
    let img = ocrforge::imageio::read_image(&out.join("images/000000.png")).unwrap();
    assert_eq!(img.get(199, 119), [10, 200, 30]);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["generate", "--count", "1"]).code, 1, "missing --out");
    assert_eq!(run(&["generate", "--bogus"]).code, 1);
    assert_eq!(run(&["generate", "--out", "x", "--chain", "blur:sigma=99"]).code, 1);
    assert_eq!(run(&["generate", "--out", "x", "--langs", "xx"]).code, 1);
    assert_eq!(run(&["prompt", "--query", " "]).code, 1);
    assert_eq!(run_env(&["generate", "--out", "x"], &[("OCRFORGE_THREADS", "zero")]).code, 1);
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["--version"]).code, 0);
}

#[test]
fn config_file_fills_unset_options() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    fs::write(&cfg, "[generate]\ncount = 2\nseed = 11\nchain = \"rotate:angle=5\"\nwidth = 256\n").unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    generate(&a, &["--config", s(&cfg)]);
    generate(&b, &["--count", "2", "--seed", "11", "--chain", "rotate:angle=5", "--width", "256"]);
    assert_eq!(fs::read(a.join("manifest.jsonl")).unwrap(), fs::read(b.join("manifest.jsonl")).unwrap());
    fs::write(&cfg, "[generate]\ncolour = 1\n").unwrap();
    assert_eq!(run(&["generate", "--config", s(&cfg), "--out", s(&a)]).code, 1);
}

#[test]
fn translate_without_target_text_fails_before_reading_images() {
    let d = tempfile::tempdir().unwrap();
    generate(d.path(), &["--count", "3"]);
    fs::remove_dir_all(d.path().join("images")).unwrap();
    let o = run(&["translate", "--manifest", s(&d.path().join("manifest.jsonl"))]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("no target text"), "{}", o.stderr);
}

#[test]
fn lexicon_translation_over_ten_records() {
    let d = tempfile::tempdir().unwrap();
    generate(d.path(), &["--count", "10", "--seed", "3"]);
    let manifest = d.path().join("manifest.jsonl");
    let lex = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/lexicon.tsv");
    let o = run(&["translate", "--manifest", s(&manifest), "--lexicon", lex, "--tgt-lang", "fr"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let results = fs::read_to_string(d.path().join("translations.fr.jsonl")).unwrap();
    let rows: Vec<serde_json::Value> = results.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 10);
    for (i, row) in rows.iter().enumerate() {
        assert!(d.path().join(format!("images/{i:06}.fr.png")).exists());
        assert_eq!(row["preserved"], true);
        for g in row["regions"].as_array().unwrap() {
            assert!(g["scale"].as_u64().unwrap() >= 1);
        }
    }
}

#[test]
fn identity_translation_reports_preservation() {
    let d = tempfile::tempdir().unwrap();
    generate(d.path(), &["--count", "5", "--chain", "rotate:angle=-20..20"]);
    let results = d.path().join("id.jsonl");
    let o = run(&["translate", "--manifest", s(&d.path().join("manifest.jsonl")), "--identity", "--out", s(&results)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stderr.contains("background preserved in 5/5"), "{}", o.stderr);
}

#[test]
fn evaluate_echo_unknown_id_and_bad_lines() {
    let d = tempfile::tempdir().unwrap();
    generate(d.path(), &["--count", "4", "--tgt-lang", "de"]);
    let manifest = d.path().join("manifest.jsonl");
    let m = read_manifest(&manifest).unwrap();
    let pred = d.path().join("pred.jsonl");
    let echo: String = m
        .records
        .iter()
        .map(|r| serde_json::json!({"id": r.id, "text": r.full_text_src}).to_string() + "\n")
        .collect();
    fs::write(&pred, &echo).unwrap();
    let report = d.path().join("rep/ocr");
    let o = run(&["evaluate", "--manifest", s(&manifest), "--pred", s(&pred), "--mode", "ocr", "--report", s(&report)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("Overall          4            100.00               0.00  100.00"), "{}", o.stdout);
    assert_eq!(fs::read_to_string(d.path().join("rep/ocr.txt")).unwrap(), o.stdout);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("rep/ocr.json")).unwrap()).unwrap();
    assert_eq!(json["overall"]["completeness"], 100.0);

    fs::write(&pred, echo.clone() + "{\"id\":\"999999\",\"text\":\"x\"}\n").unwrap();
    let o = run(&["evaluate", "--manifest", s(&manifest), "--pred", s(&pred), "--report", s(&report)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("999999"), "{}", o.stderr);

    fs::write(&pred, "{\"id\":\"000000\",\"text\":\"x\"}\n{\"id\": 3\n").unwrap();
    let o = run(&["evaluate", "--manifest", s(&manifest), "--pred", s(&pred), "--report", s(&report)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("line 2"), "{}", o.stderr);
}

#[test]
fn inspect_prints_record_summary() {
    let d = tempfile::tempdir().unwrap();
    generate(d.path(), &["--count", "1", "--tgt-lang", "es", "--chain", "blur"]);
    let o = run(&["inspect", "--manifest", s(&d.path().join("manifest.jsonl"))]);
    assert_eq!(o.code, 0);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines[0], "1 records");
    assert!(lines[1].starts_with("000000  en -> es  tags=blur"), "{}", lines[1]);
}

fn dist_to_segment(p: (f64, f64), a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a[0]) * dx + (p.1 - a[1]) * dy) / len2).clamp(0.0, 1.0) };
    let (x, y) = (a[0] + t * dx, a[1] + t * dy);
    ((p.0 - x).powi(2) + (p.1 - y).powi(2)).sqrt()
}

#[test]
fn overlay_strokes_match_quads() {
    let d = tempfile::tempdir().unwrap();
    generate(d.path(), &["--count", "3", "--chain", "perspective:jitter=0.1", "--bg", "solid"]);
    let manifest = d.path().join("manifest.jsonl");
    let ov = d.path().join("ov");
    assert_eq!(run(&["inspect", "--manifest", s(&manifest), "--overlay", s(&ov)]).code, 0);
    for r in read_manifest(&manifest).unwrap().records {
        let before = ocrforge::imageio::read_image(&d.path().join(&r.image_path)).unwrap();
        let after = ocrforge::imageio::read_image(&ov.join(format!("{}.png", r.id))).unwrap();
        let edges: Vec<([f64; 2], [f64; 2])> =
            r.regions.iter().flat_map(|g| (0..4).map(move |k| (g.quad[k], g.quad[(k + 1) % 4]))).collect();
        let mut changed = 0;
        for y in 0..before.height() {
            for x in 0..before.width() {
                if before.get(x, y) != after.get(x, y) {
                    changed += 1;
                    assert_eq!(after.get(x, y), [255, 0, 0]);
                    let c = (f64::from(x) + 0.5, f64::from(y) + 0.5);
                    let near = edges.iter().map(|(a, b)| dist_to_segment(c, *a, *b)).fold(f64::INFINITY, f64::min);
                    assert!(near <= 1.0, "pixel ({x},{y}) is {near} px from every edge");
                }
            }
        }
        assert!(changed > 0 || r.regions.is_empty());
        // every corner on the canvas is stroked
        for g in &r.regions {
            for p in g.quad {
                if p[0] >= 0.0 && p[1] >= 0.0 && p[0] < f64::from(after.width()) && p[1] < f64::from(after.height()) {
                    assert_eq!(after.get(p[0] as u32, p[1] as u32), [255, 0, 0]);
                }
            }
        }
    }
}

#[test]
fn prompt_is_stable() {
    let a = run(&["prompt", "--query", "How much is the coffee?"]);
    let b = run(&["prompt", "--query", "How much is the coffee?"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.ends_with("Question: How much is the coffee?\n"));
}
