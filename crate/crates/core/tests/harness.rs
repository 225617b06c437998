use std::fs;

use oncograph_core::harness::{
    emit_profile_tables, output::seed_entries, run_baseline, run_baseline_with, ArtifactDir,
    BaselineConfig, Execution, ProfileTables,
};
use oncograph_core::{GraphSnapshot, NodeId, RngSeed};

fn small_baseline(seed: u64) -> BaselineConfig {
    let mut b = BaselineConfig::new("P0", 60, 120, 20);
    b.steps = 12;
    b.master_seed = RngSeed(seed);
    b
}

#[test]
fn sequential_and_parallel_agree() {
    let config = small_baseline(5);
    let seq = run_baseline_with(&config, Execution::Sequential).unwrap();
    let par = run_baseline_with(&config, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn same_master_seed_same_records() {
    let a = run_baseline(&small_baseline(8)).unwrap();
    let b = run_baseline(&small_baseline(8)).unwrap();
    assert_eq!(
        serde_json::to_vec(&a).unwrap(),
        serde_json::to_vec(&b).unwrap()
    );
    let c = run_baseline(&small_baseline(9)).unwrap();
    assert_ne!(a[0].final_snapshot, c[0].final_snapshot);
}

#[test]
fn tables_round_trip_through_csv() {
    let mut records = run_baseline(&small_baseline(1)).unwrap();
    let mut other = small_baseline(2);
    other.name = "P9".into();
    records.extend(run_baseline(&other).unwrap());
    let tables = emit_profile_tables(&records).unwrap();
    assert_eq!(tables.tables.len(), 2);
    assert!(tables.tables.iter().all(|t| t.columns.len() == 3));
    assert_eq!(tables.tables[0].columns[2].pattern, "GP3");

    let parsed = ProfileTables::from_csv(tables.to_csv().as_bytes()).unwrap();
    for (table, parsed) in tables.tables.iter().zip(&parsed.tables) {
        assert_eq!(table.patient, parsed.patient);
        for (col, back) in table.columns.iter().zip(&parsed.columns) {
            assert_eq!(col.derived_cell_ids, back.derived_cell_ids);
            assert_eq!(
                col.essential_genomic_profile,
                back.essential_genomic_profile
            );
        }
    }
    for (record, col) in records[..3].iter().zip(&parsed.tables[0].columns) {
        let profile = record.profile.as_ref().unwrap();
        assert_eq!(
            profile.essential_genomic_profile,
            col.essential_genomic_profile
        );
        assert_eq!(profile.derived_cell_ids, col.derived_cell_ids);
    }

    let md = tables.to_markdown();
    assert!(md.contains("| Initial tumor(P0) | GP1 | GP2 | GP3 |"));
    assert!(md.contains("| tumor-derived cell ID |"));
    assert!(md.contains("| Essential Genomic Profile |"));
}

#[test]
fn tie_sets_render_with_semicolons() {
    let mut records = run_baseline(&small_baseline(3)).unwrap();
    let profile = records[0].profile.as_mut().unwrap();
    profile.derived_cell_ids = vec![NodeId(17), NodeId(10)];
    profile.essential_genomic_profile = 0.00219;
    let csv = emit_profile_tables(&records).unwrap().to_csv();
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("P0,GP1,17;10,2.19E-03,"));
}

#[test]
fn artifacts_and_manifest_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let mut manifests = Vec::new();
    for name in ["a", "b"] {
        let records = run_baseline(&small_baseline(4)).unwrap();
        let mut dir = ArtifactDir::create(tmp.path().join(name)).unwrap();
        dir.write_records(&records).unwrap();
        dir.finish(
            "simulate",
            serde_json::to_value(small_baseline(4)).unwrap(),
            seed_entries(&records),
        )
        .unwrap();
        manifests.push(fs::read(tmp.path().join(name).join("manifest.json")).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
    let expected = [
        "metrics_P0_1.csv",
        "metrics_P0_3.csv",
        "snapshot_P0_2.json",
        "profile_tables.csv",
        "profile_tables.md",
    ];
    for file in expected {
        assert!(tmp.path().join("a").join(file).exists(), "{file}");
    }
    let text = fs::read_to_string(tmp.path().join("a/snapshot_P0_1.json")).unwrap();
    let snap = GraphSnapshot::from_json(&text).unwrap();
    assert_eq!(snap.node_count, 120);
    assert_eq!(snap.to_json(), text);
}
