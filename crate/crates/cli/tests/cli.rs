use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use launch_order::fixtures;
use launch_order::{simulate_launch_order, GpuSpec, KernelProfile};
use launch_order_cli::commands::{
    run_schedule, run_simulate, HISTOGRAM_CSV, ORDER_FILE, RANKED_CSV,
};
use launch_order_cli::input::{to_document, GpuField};
use launch_order_cli::{load_inputs, CliError, RunConfig};
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_launch-order"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_doc(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, json).unwrap();
    p
}

fn write_kernels(dir: &TempDir, name: &str, ks: &[KernelProfile]) -> PathBuf {
    let doc = to_document(ks, GpuField::Preset("gtx580".into()));
    write_doc(dir, name, &serde_json::to_string(&doc).unwrap())
}

#[test]
fn fixture_files_match_library_fixtures() {
    for (name, ks) in fixtures::all() {
        let (loaded, spec) = load_inputs(&fixture(name), None).unwrap();
        assert_eq!(loaded, ks, "{name}");
        assert_eq!(spec, GpuSpec::gtx580());
    }
}

#[test]
fn counters_are_ingested() {
    let (ks, _) = load_inputs(&fixture("counters-example"), None).unwrap();
    assert_eq!(ks[0].mem_events, 320000);
    assert_eq!(ks[0].resolved_ratio().unwrap(), 2.0);
    assert_eq!(ks[1].resolved_ratio().unwrap(), 16.0);
    assert_eq!(ks[3].resolved_ratio().unwrap(), 9.5);
}

#[test]
fn gpu_override_and_spec_file() {
    let dir = TempDir::new().unwrap();
    let custom = GpuSpec {
        n_sm: 8,
        ..GpuSpec::gtx580()
    };
    let gpu = write_doc(&dir, "gpu.json", &serde_json::to_string(&custom).unwrap());
    let (_, spec) = load_inputs(&fixture("epbs-6"), Some(gpu.to_str().unwrap())).unwrap();
    assert_eq!(spec, custom);
    let (_, spec) = load_inputs(&fixture("epbs-6"), Some("gtx580")).unwrap();
    assert_eq!(spec, GpuSpec::gtx580());
    let err = load_inputs(&fixture("epbs-6"), Some("no-such-gpu")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn malformed_document_reports_position() {
    let dir = TempDir::new().unwrap();
    let p = write_doc(
        &dir,
        "bad.json",
        "{\n  \"gpu\": \"gtx580\",\n  \"kernels\": [ { \"name\": 3 } ]\n}\n",
    );
    match load_inputs(&p, None) {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    let o = run(&["schedule", "--kernels", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn missing_ratio_exits_2() {
    let dir = TempDir::new().unwrap();
    let p = write_doc(
        &dir,
        "k.json",
        r#"{"gpu":"gtx580","kernels":[{"name":"k","grid_blocks":16,"threads_per_block":128,"inst_count":10}]}"#,
    );
    assert!(matches!(
        load_inputs(&p, None),
        Err(CliError::MissingRatio { .. })
    ));
    let o = run(&["schedule", "--kernels", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_kernel_schedules_into_one_round() {
    let dir = TempDir::new().unwrap();
    let p = write_kernels(
        &dir,
        "one.json",
        &[fixtures::kernel("solo", 16, 128, 20, 0, 3.11)],
    );
    let o = run(&["schedule", "--kernels", p.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("round 1: solo"));
    assert!(!out.contains("round 2"));
}

#[test]
fn infeasible_kernel_exits_3() {
    let dir = TempDir::new().unwrap();
    let p = write_kernels(
        &dir,
        "big.json",
        &[fixtures::kernel("big", 16, 128, 20, 65536, 3.11)],
    );
    for cmd in ["schedule", "simulate", "explore"] {
        let o = run(&[cmd, "--kernels", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(3), "{cmd}");
    }
}

#[test]
fn too_many_kernels_exits_4() {
    let dir = TempDir::new().unwrap();
    let ks: Vec<_> = (0..11)
        .map(|i| fixtures::kernel(&format!("k{i}"), 16, 128, 20, 0, 3.11))
        .collect();
    let p = write_kernels(&dir, "many.json", &ks);
    let o = run(&[
        "explore",
        "--kernels",
        p.to_str().unwrap(),
        "--max-perms",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["explore", "--kernels", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    // scheduling has no size cap
    let o = run(&["schedule", "--kernels", p.to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn identical_kernels_rank_at_100() {
    let dir = TempDir::new().unwrap();
    let ks: Vec<_> = (0..3)
        .map(|i| fixtures::kernel(&format!("k{i}"), 48, 256, 20, 8192, 3.11))
        .collect();
    let p = write_kernels(&dir, "same.json", &ks);
    let o = run(&["explore", "--kernels", p.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("permutations: 6\n"), "{out}");
    assert!(out.contains("percentile rank: 100.0000%"), "{out}");
    assert!(out.contains("speedup over worst: 1.0000"), "{out}");
}

#[test]
fn schedule_order_round_trips_through_simulate() {
    let dir = TempDir::new().unwrap();
    for (name, _) in fixtures::all() {
        let mut cfg = RunConfig::new(fixture(name));
        cfg.out = Some(dir.path().join(name));
        let (order, footprints, spec) = run_schedule(&cfg).unwrap();
        let in_process = simulate_launch_order(&order, &footprints, &spec).unwrap();

        cfg.order = Some(dir.path().join(name).join(ORDER_FILE));
        let (from_file, _, _) = run_simulate(&cfg).unwrap();
        assert_eq!(from_file, in_process, "{name}");
    }

    // and through the binary
    let out = dir.path().join("bin");
    let k = fixture("epbs-6");
    assert!(run(&[
        "schedule",
        "--kernels",
        k.to_str().unwrap(),
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let order = out.join(ORDER_FILE);
    let a = run(&[
        "simulate",
        "--kernels",
        k.to_str().unwrap(),
        "--order",
        order.to_str().unwrap(),
    ]);
    assert!(a.status.success());
    let total = stdout(&a).lines().last().unwrap().to_owned();
    let mut cfg = RunConfig::new(&k);
    cfg.order = Some(order);
    let (r, _, _) = run_simulate(&cfg).unwrap();
    assert_eq!(total, format!("total_time: {:.4}", r.total_time));
}

#[test]
fn rank_accepts_an_order_file() {
    let dir = TempDir::new().unwrap();
    let order = dir.path().join("order.json");
    fs::write(
        &order,
        r#"{"rounds":[],"order":["ep1","ep2","ep3","bs1","bs2","bs3"]}"#,
    )
    .unwrap();
    let k = fixture("epbs-6");
    let o = run(&[
        "rank",
        "--kernels",
        k.to_str().unwrap(),
        "--order",
        order.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("order: ep1 ep2 ep3 bs1 bs2 bs3\n"));

    fs::write(&order, r#"{"rounds":[],"order":["ep1","ep2"]}"#).unwrap();
    let o = run(&[
        "rank",
        "--kernels",
        k.to_str().unwrap(),
        "--order",
        order.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn explore_writes_csvs() {
    let dir = TempDir::new().unwrap();
    let k = fixture("epbs-6");
    let o = run(&[
        "explore",
        "--kernels",
        k.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--bins",
        "5",
    ]);
    assert!(o.status.success());
    let ranked = fs::read_to_string(dir.path().join(RANKED_CSV)).unwrap();
    let lines: Vec<_> = ranked.lines().collect();
    assert_eq!(lines[0], "rank,permutation,time");
    assert_eq!(lines.len(), 1 + 720);
    assert!(lines[1].starts_with("1,"));
    let hist = fs::read_to_string(dir.path().join(HISTOGRAM_CSV)).unwrap();
    let rows: Vec<_> = hist.lines().collect();
    assert_eq!(rows[0], "bin_lo,bin_hi,count");
    assert_eq!(rows.len(), 6);
    let total: usize = rows[1..]
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 720);

    let o = run(&["explore", "--kernels", k.to_str().unwrap(), "--bins", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
