//! End-to-end smoke tests for the `prta` binary: generate task sets, analyze
//! them, run a small experiment matrix, simulate, and compare — all through
//! the real CLI surface with files on disk.

use std::path::Path;
use std::process::{Command, Output};

use prta_cli::table::parse_csv;
use prta_core::taskset::load_taskset;

fn prta(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prta"))
        .args(args)
        .current_dir(cwd)
        .env("PRTA_THREADS", "2")
        .output()
        .expect("binary spawns")
}

fn expect_success(out: &Output, what: &str) -> String {
    assert!(
        out.status.success(),
        "{what} failed with {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn full_round_trip_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // generate a 2-set grid and load one file back through the library
    let stdout = expect_success(
        &prta(
            &[
                "generate",
                "--n",
                "4",
                "--utilization",
                "0.70",
                "--sets",
                "2",
                "--seed",
                "3",
                "--gamma-us",
                "100",
                "--out",
                "ts",
            ],
            root,
        ),
        "generate",
    );
    let listed: Vec<&str> = stdout.lines().collect();
    assert_eq!(listed.len(), 2, "one path per generated set: {stdout}");
    let first = root.join("ts/n004-u0.7000-s000.json");
    assert!(first.exists(), "missing {}", first.display());
    let ts = load_taskset(&first).expect("generated file loads");
    assert_eq!(ts.tasks.len(), 4);

    // analyze the file with every estimator
    let stdout = expect_success(
        &prta(
            &[
                "analyze",
                "ts/n004-u0.7000-s000.json",
                "--methods",
                "SC,AC_ORIG,AC_IMP,MC,BE",
                "--mc-samples",
                "5000",
            ],
            root,
        ),
        "analyze",
    );
    let reports: serde_json::Value = serde_json::from_str(&stdout).expect("json report");
    let reports = reports.as_array().expect("array of method reports");
    assert_eq!(reports.len(), 5);
    for report in reports {
        let wcdfp = report["wcdfp"].as_f64().expect("wcdfp is a number");
        assert!((0.0..=1.0).contains(&wcdfp), "wcdfp {wcdfp} out of range");
    }

    // analyze with `--target all` fans out over every task
    let stdout = expect_success(
        &prta(
            &["analyze", "ts/n004-u0.7000-s000.json", "--target", "all"],
            root,
        ),
        "analyze --target all",
    );
    let reports: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 4);

    // a small experiment matrix: csv plus the three default plots
    expect_success(
        &prta(
            &[
                "experiment",
                "--n",
                "4",
                "--utilization",
                "0.70",
                "--sets",
                "2",
                "--seed",
                "3",
                "--gamma-us",
                "100",
                "--methods",
                "SC,AC_ORIG,AC_IMP,MC,BE",
                "--mc-samples",
                "2000",
                "--out",
                "res",
            ],
            root,
        ),
        "experiment",
    );
    let table = parse_csv(&root.join("res/results.csv")).expect("csv parses back");
    assert_eq!(table.rows.len(), 2 * 5, "2 sets x 5 methods");
    for name in [
        "ratio-ac_imp-vs-ac_orig.svg",
        "ratio-ac_imp-vs-sc.svg",
        "value-be-vs-ac_imp.svg",
    ] {
        let path = root.join("res").join(name);
        assert!(path.exists(), "missing plot {}", path.display());
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<svg"), "not an svg: {}", path.display());
    }

    // simulate against the bound and dump the first scenario's trace
    let stdout = expect_success(
        &prta(
            &[
                "simulate",
                "ts/n004-u0.7000-s000.json",
                "--scenarios",
                "200",
                "--seed",
                "7",
                "--dump-trace",
                "trace.jsonl",
            ],
            root,
        ),
        "simulate",
    );
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["scenarios"], 200);
    assert_eq!(report["bounded"], true, "empirical rate above the bound");
    let trace = std::fs::read_to_string(root.join("trace.jsonl")).unwrap();
    assert!(!trace.trim().is_empty());
    for line in trace.lines() {
        let job: serde_json::Value = serde_json::from_str(line).expect("jsonl line");
        assert!(job["release"].is_u64());
    }

    // compare two methods from the written csv
    let stdout = expect_success(
        &prta(
            &[
                "compare",
                "res/results.csv",
                "--baseline",
                "AC_ORIG",
                "--contender",
                "AC_IMP",
                "--out",
                "cmp",
            ],
            root,
        ),
        "compare",
    );
    let summary: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let points = summary["points"].as_array().unwrap().len();
    let flagged = summary["flagged"].as_array().unwrap().len();
    assert_eq!(points + flagged, 2, "every set lands in points or flagged");
    assert!(root.join("cmp/ratio-ac_imp-vs-ac_orig.svg").exists());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let out = prta(&["analyze", "no-such-file.json"], root);
    assert!(!out.status.success());

    let out = prta(&["analyze", "also-missing.json", "--methods", "FFT"], root);
    assert!(!out.status.success(), "unknown method must be rejected");

    let out = prta(&["compare", "missing.csv", "--baseline", "SC"], root);
    assert!(
        !out.status.success(),
        "compare requires both methods and a readable csv"
    );
}

#[test]
fn generated_files_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    expect_success(
        &prta(
            &[
                "generate",
                "--n",
                "6",
                "--sets",
                "1",
                "--seed",
                "11",
                "--gamma-us",
                "50",
                "--out",
                "ts",
            ],
            root,
        ),
        "generate",
    );
    let path = root.join("ts/n006-u0.6500-s000.json");
    let ts = load_taskset(&path).unwrap();
    let copy = root.join("copy.json");
    prta_core::taskset::save_taskset(&ts, &copy).unwrap();
    let reloaded = load_taskset(&copy).unwrap();
    assert_eq!(ts, reloaded);
    // probabilities are written with enough digits to restore every bit
    for (a, b) in ts.tasks.iter().zip(&reloaded.tasks) {
        assert_eq!(a.exec_pmf.probs(), b.exec_pmf.probs());
    }
}

#[test]
fn compare_flags_missing_method_rows() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    expect_success(
        &prta(
            &[
                "experiment",
                "--n",
                "4",
                "--utilization",
                "0.70",
                "--sets",
                "1",
                "--seed",
                "3",
                "--gamma-us",
                "100",
                "--methods",
                "AC_IMP,BE",
                "--out",
                "res",
            ],
            root,
        ),
        "experiment",
    );
    // SC was never run, so ratios against it must fail loudly
    let out = prta(
        &[
            "compare",
            "res/results.csv",
            "--baseline",
            "SC",
            "--contender",
            "AC_IMP",
        ],
        root,
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("SC"),
        "error should name the missing method: {stderr}"
    );
}
