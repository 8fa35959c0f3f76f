use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use forge_core::canonical::canonical_code;
use forge_core::format::write_drawing;
use forge_core::pipeline::{
    journal_path, merge_outputs, read_drawing_file, run_stage, run_stage_file, stats_path, verify_file, verify_text,
    Mode, Shard, StageConfig, StageStats,
};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn k8_config() -> StageConfig {
    StageConfig::new(8, 20)
}

#[test]
fn golden_files_verify() {
    for (name, n, x, count) in [("d7_9.txt", 7, 9, 5), ("d8_18.txt", 8, 18, 3)] {
        let report = verify_file(&data(name)).unwrap();
        assert!(report.ok(), "{}", report.to_text());
        assert_eq!(report.records.len(), count);
        assert!(report.records.iter().all(|r| r.n == n && r.crossings == x));
    }
}

#[test]
fn golden_k8_matches_a_fresh_run() {
    let (k7, bad) = read_drawing_file(&data("d7_9.txt")).unwrap();
    assert!(bad.is_empty());
    let res = run_stage(&k7, &StageConfig::new(8, 18)).unwrap();
    let (golden, _) = read_drawing_file(&data("d8_18.txt")).unwrap();
    let mut a: Vec<_> = res.drawings.iter().map(|(c, _)| c.clone()).collect();
    let mut b: Vec<_> = golden.iter().map(canonical_code).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn verify_flags_damage() {
    let text = fs::read_to_string(data("d8_18.txt")).unwrap();
    // Claim one crossing too many in the first record.
    let damaged = text.replacen("D n=8 x=18", "D n=8 x=19", 1);
    assert!(!verify_text(&damaged).ok());
    // Point a dart at the wrong twin.
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let i = lines.iter().position(|l| l.starts_with("H 0 ")).unwrap();
    lines[i] = lines[i].replacen("twin=1", "twin=3", 1);
    assert!(!verify_text(&lines.join("\n")).ok());
}

#[test]
fn sharded_runs_merge_to_the_unsharded_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("d7_9.txt");
    let whole = dir.path().join("whole.txt");
    run_stage_file(&input, &whole, &k8_config()).unwrap();
    let mut parts = Vec::new();
    for i in 0..3 {
        let out = dir.path().join(format!("part{i}.txt"));
        let cfg = StageConfig {
            shard: Shard { index: i, count: 3 },
            ..k8_config()
        };
        run_stage_file(&input, &out, &cfg).unwrap();
        parts.push(out);
    }
    let merged = dir.path().join("merged.txt");
    let st = merge_outputs(&parts, &merged, true).unwrap();
    assert_eq!(st.inputs, 5);
    assert_eq!(st.outputs, 109);
    assert_eq!(fs::read(&whole).unwrap(), fs::read(&merged).unwrap());
    let whole_stats = StageStats::parse(&fs::read_to_string(stats_path(&whole)).unwrap()).unwrap();
    assert_eq!(whole_stats.histogram, st.histogram);
    assert_eq!(whole_stats.raw, st.raw);
}

#[test]
fn output_ignores_worker_count_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("d7_9.txt");
    let mut bytes = Vec::new();
    for (k, workers) in [None, Some(1), Some(3), Some(3)].into_iter().enumerate() {
        let out = dir.path().join(format!("run{k}.txt"));
        run_stage_file(&input, &out, &StageConfig { workers, ..k8_config() }).unwrap();
        bytes.push(fs::read(&out).unwrap());
    }
    assert!(bytes.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn interrupted_run_resumes_from_its_journal() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("d7_9.txt");
    let clean = dir.path().join("clean.txt");
    let clean_res = run_stage_file(&input, &clean, &k8_config()).unwrap();

    // A journal holding input 0 complete and input 1 cut off mid-record.
    let (k7, _) = read_drawing_file(&input).unwrap();
    let first = run_stage(&k7[..1], &k8_config()).unwrap();
    let second = run_stage(&k7[1..2], &k8_config()).unwrap();
    let mut journal = String::new();
    for (_, d) in &first.drawings {
        journal.push_str(&write_drawing(d));
    }
    journal.push_str(&format!("# done 0 raw={} discarded=0 fallback=0 secs=0.5\n", first.stats.raw));
    let partial = write_drawing(&second.drawings[0].1);
    journal.push_str(&partial[..partial.len() / 2]);

    let resumed = dir.path().join("resumed.txt");
    fs::write(journal_path(&resumed), journal).unwrap();
    let res = run_stage_file(&input, &resumed, &k8_config()).unwrap();
    assert_eq!(fs::read(&clean).unwrap(), fs::read(&resumed).unwrap());
    assert_eq!(res.stats.raw, clean_res.stats.raw);
    assert!(!journal_path(&resumed).exists());
}

#[test]
fn alg2_outputs_are_among_alg1_outputs() {
    let (k7, _) = read_drawing_file(&data("d7_9.txt")).unwrap();
    let alg1 = run_stage(&k7, &k8_config()).unwrap();
    let alg2 = run_stage(
        &k7,
        &StageConfig {
            mode: Mode::Alg2,
            ..k8_config()
        },
    )
    .unwrap();
    assert!(alg2.errors.is_empty());
    let a: BTreeSet<_> = alg1.drawings.iter().map(|(c, _)| c.clone()).collect();
    let b: BTreeSet<_> = alg2.drawings.iter().map(|(c, _)| c.clone()).collect();
    assert!(b.is_subset(&a));
}
