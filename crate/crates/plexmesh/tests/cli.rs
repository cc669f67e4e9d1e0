//! End-to-end tests of the command-line interface: output shapes, exit
//! codes, and byte-level determinism of repeated invocations.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::{Command, Output};

fn plexmesh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plexmesh"))
        .args(args)
        .output()
        .expect("failed to launch the CLI binary")
}

fn stdout_json(args: &[&str]) -> serde_json::Value {
    let out = plexmesh(args);
    assert!(out.status.success(), "{args:?} failed: {out:?}");
    serde_json::from_slice(&out.stdout).expect("stdout is not valid JSON")
}

#[test]
fn info_reports_reference_tet_counts() {
    let info = stdout_json(&["info", "--gen", "tet:reference"]);
    assert_eq!(info["dim"], 3);
    assert_eq!(info["chart"], 15);
    assert_eq!(info["cells"], 1);
    assert_eq!(info["facets"], 4);
    assert_eq!(info["edges"], 6);
    assert_eq!(info["vertices"], 4);
    // V - E + F - C for a solid simplex.
    assert_eq!(info["euler_characteristic"], 1);
}

#[test]
fn info_reports_square_counts() {
    let info = stdout_json(&["info", "--gen", "square:3x3"]);
    assert_eq!(info["dim"], 2);
    assert_eq!(info["cells"], 18);
    assert_eq!(info["vertices"], 16);
    assert_eq!(info["edges"], 33);
    assert_eq!(info["chart"], 67);
    // V - E + C for a triangulated disk.
    assert_eq!(info["euler_characteristic"], 1);
}

#[test]
fn info_reads_mesh_files() {
    let fixture = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/square_tagged.msh"
    );
    let info = stdout_json(&["info", "--mesh", fixture]);
    assert_eq!(info["cells"], 8);
    assert_eq!(info["vertices"], 9);
    assert_eq!(info["edges"], 16);
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let arg_sets: [&[&str]; 5] = [
        &["info", "--gen", "square:4x4"],
        &["partition", "--gen", "square:4x4", "--parts", "3"],
        &["reorder", "--gen", "square:4x4", "--parts", "2", "--order", "rcm"],
        &["classes", "--gen", "square:4x4", "--parts", "2"],
        &["reorder", "--gen", "square:4x4", "--parts", "2", "--order", "shuffle"],
    ];
    for args in arg_sets {
        let first = plexmesh(args);
        let second = plexmesh(args);
        assert!(first.status.success(), "{args:?}: {first:?}");
        assert_eq!(first.stdout, second.stdout, "{args:?} is not deterministic");
    }

    // Sparsity: both the metrics on stdout and the portrait bytes repeat.
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.pbm");
    let out_b = dir.path().join("b.pbm");
    let base = ["sparsity", "--gen", "square:4x4", "--degree", "2", "--order", "rcm", "--out"];
    let mut args_a: Vec<&str> = base.to_vec();
    let path_a = out_a.to_str().unwrap();
    args_a.push(path_a);
    let mut args_b: Vec<&str> = base.to_vec();
    let path_b = out_b.to_str().unwrap();
    args_b.push(path_b);
    let first = plexmesh(&args_a);
    let second = plexmesh(&args_b);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );

    // Bench output is deterministic apart from the timing block.
    let bench = ["bench", "--gen", "square:4x4", "--degree", "1", "--repeats", "3"];
    let mut first: serde_json::Value = stdout_json(&bench);
    let mut second: serde_json::Value = stdout_json(&bench);
    first.as_object_mut().unwrap().remove("timings");
    second.as_object_mut().unwrap().remove("timings");
    assert_eq!(first, second, "bench output varies beyond timings");
}

#[test]
fn usage_errors_exit_with_code_2() {
    let bad: [&[&str]; 7] = [
        &["partition", "--gen", "square:4x4", "--parts", "0"],
        &["info"],
        &["info", "--gen", "square:axb"],
        &["info", "--gen", "cube:3"],
        &["info", "--gen", "square:0x2"],
        &["bench", "--gen", "square:2x2", "--order", "banana"],
        &["sparsity", "--gen", "square:2x2", "--degree", "4", "--out", "/tmp/unused.pbm"],
    ];
    for args in bad {
        let out = plexmesh(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {out:?}");
        assert!(!out.stderr.is_empty(), "{args:?} printed no diagnostic");
        assert!(out.stdout.is_empty(), "{args:?} wrote to stdout on error");
    }
}

#[test]
fn data_errors_exit_with_code_1() {
    let out = plexmesh(&["info", "--mesh", "/nonexistent/mesh.msh"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(!out.stderr.is_empty());

    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n").unwrap();
    let out = plexmesh(&["info", "--mesh", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("format"), "unexpected diagnostic: {stderr}");
}

#[test]
fn partition_csv_covers_every_cell() {
    let out = plexmesh(&["partition", "--gen", "square:4x4", "--parts", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("cell_id,rank"));
    let mut seen_ranks = BTreeSet::new();
    let mut cells = Vec::new();
    for line in lines {
        let (cell, rank) = line.split_once(',').unwrap();
        cells.push(cell.parse::<usize>().unwrap());
        let rank: usize = rank.parse().unwrap();
        assert!(rank < 3);
        seen_ranks.insert(rank);
    }
    assert_eq!(cells, (0..32).collect::<Vec<_>>());
    assert_eq!(seen_ranks.len(), 3);
}

#[test]
fn reorder_emits_one_bijective_block_per_rank() {
    let out = plexmesh(&["reorder", "--gen", "square:2x2", "--parts", "2", "--order", "rcm"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let blocks: Vec<&str> = text
        .split("# rank ")
        .filter(|b| !b.trim().is_empty())
        .collect();
    assert_eq!(blocks.len(), 2);
    for (rank, block) in blocks.iter().enumerate() {
        let mut lines = block.lines();
        assert_eq!(lines.next().unwrap().trim(), rank.to_string());
        let chart_line = block
            .lines()
            .find(|l| l.starts_with("# chart "))
            .expect("missing chart marker");
        let chart: usize = chart_line.trim_start_matches("# chart ").parse().unwrap();
        let rows: Vec<&str> = block
            .lines()
            .skip_while(|l| *l != "old_id,new_id")
            .skip(1)
            .collect();
        assert_eq!(rows.len(), chart);
        let mut new_ids = BTreeSet::new();
        for row in rows {
            let (old, new) = row.split_once(',').unwrap();
            let old: usize = old.parse().unwrap();
            let new: usize = new.parse().unwrap();
            assert!(old < chart);
            assert!(new_ids.insert(new), "duplicate position {new}");
        }
        assert_eq!(new_ids.len(), chart);
        assert_eq!(*new_ids.iter().next_back().unwrap(), chart - 1);
    }
}

#[test]
fn bench_checksums_are_ordering_invariant() {
    let report = stdout_json(&[
        "bench", "--gen", "square:4x4", "--degree", "2", "--repeats", "3",
        "--order", "native,rcm,shuffle",
    ]);
    assert_eq!(
        report["variants"],
        serde_json::json!(["native", "rcm", "shuffle"])
    );
    let checks = report["checksums"].as_object().unwrap();
    for prefix in ["cell", "facet"] {
        let reference = checks[&format!("{prefix}_native")].as_f64().unwrap();
        for variant in ["rcm", "shuffle"] {
            let value = checks[&format!("{prefix}_{variant}")].as_f64().unwrap();
            assert_eq!(value, reference, "{prefix} checksum drifts under {variant}");
        }
    }
    let timings = report["timings"].as_object().unwrap();
    assert_eq!(timings.len(), checks.len());
    for key in checks.keys() {
        assert!(timings[key].as_f64().unwrap() > 0.0, "timing {key} missing");
    }
}
