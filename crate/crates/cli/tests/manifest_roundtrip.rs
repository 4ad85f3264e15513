use std::collections::BTreeMap;
use std::fs;

use ocrforge::manifest::{
    parse_manifest, read_manifest, write_manifest, DegradationRecord, ManifestError, RegionRecord, SampleRecord,
};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![-1e4..1e4f64, Just(0.0), Just(-0.0), Just(1e-300), Just(0.1 + 0.2)]
}

fn record() -> impl Strategy<Value = SampleRecord> {
    let region = (proptest::array::uniform4(proptest::array::uniform2(coord())), "[a-zé0-9 .]{1,12}", 0.0..=1.0f64);
    let deg = ("[a-z_]{1,8}", -100.0..100.0f64, any::<u64>());
    (
        0u64..1_000_000,
        proptest::collection::vec(region, 0..5),
        proptest::option::of("[a-z]{2}"),
        proptest::collection::vec(deg, 0..3),
        proptest::collection::vec("[a-z]{1,6}", 0..3),
        any::<u64>(),
    )
        .prop_map(|(index, regions, tgt, degs, tags, master)| {
            let regions: Vec<RegionRecord> = regions
                .into_iter()
                .enumerate()
                .map(|(k, (quad, text, occ))| RegionRecord { quad, text, line_index: k as u32, occluded_fraction: occ })
                .collect();
            let full = regions.iter().map(|r| r.text.clone()).collect::<Vec<_>>().join("\n");
            SampleRecord {
                id: format!("{index:06}"),
                image_path: format!("images/{index:06}.png"),
                width: 64,
                height: 48,
                language_src: "en".into(),
                full_text_tgt: tgt.as_ref().map(|_| full.to_uppercase()),
                language_tgt: tgt,
                regions,
                full_text_src: full,
                degradations: degs
                    .into_iter()
                    .map(|(kind, v, seed)| DegradationRecord { kind, params: BTreeMap::from([("p".to_string(), v)]), seed })
                    .collect(),
                condition_tags: tags,
                master_seed: master,
                sample_index: index,
            }
        })
}

fn unique(mut v: Vec<SampleRecord>) -> Vec<SampleRecord> {
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v.dedup_by(|a, b| a.id == b.id);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_read_is_identity(records in proptest::collection::vec(record(), 0..8)) {
        let records = unique(records);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        write_manifest(&records, &p).unwrap();
        let back = read_manifest(&p).unwrap();
        prop_assert_eq!(back.unknown_keys, 0);
        prop_assert_eq!(back.records, records.clone());

        let q = dir.path().join("n.jsonl");
        write_manifest(&records, &q).unwrap();
        prop_assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap());
    }
}

#[test]
fn truncating_the_last_line_names_it() {
    let mut rng = proptest::test_runner::TestRunner::deterministic();
    let records = unique((0..4).map(|_| record().new_tree(&mut rng).unwrap().current()).collect());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.jsonl");
    write_manifest(&records, &p).unwrap();
    let bytes = fs::read(&p).unwrap();
    let cut = &bytes[..bytes.len() - 10];
    let last_line = String::from_utf8_lossy(cut).lines().count();
    match parse_manifest(&String::from_utf8_lossy(cut)) {
        Err(ManifestError::MalformedLine { line, .. }) => assert_eq!(line, last_line),
        other => panic!("expected MalformedLine, got {other:?}"),
    }
}
