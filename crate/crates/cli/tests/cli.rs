use std::path::Path;
use std::process::{Command, Output};

fn hrverify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrverify"))
        .args(args)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn constants_examples() {
    let out = hrverify(&["constants", "5", "0", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for exact in ["9/4", "4/9", "25/16"] {
        assert!(text.contains(exact), "{text}");
    }
    assert_eq!(
        hrverify(&["constants", "3", "0", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        hrverify(&["constants", "2", "0", "0"]).status.code(),
        Some(3)
    );
    assert_eq!(
        hrverify(&["constants", "x", "0", "0"]).status.code(),
        Some(64)
    );
}

#[test]
fn verify_artifacts_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = hrverify(&[
            "verify-rellich",
            "--dim",
            "5",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stdout).contains("final gap"));
    }
    for name in ["verify-rellich.csv", "verify-rellich.json"] {
        assert_eq!(
            read(a.path(), name),
            read(b.path(), name),
            "{name} differs between runs"
        );
    }
    let csv = String::from_utf8(read(a.path(), "verify-rellich.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("n,r_min,r_max,estimate,target,gap,residual,seconds")
    );
    assert_eq!(csv.lines().count(), 5);

    let record: serde_json::Value =
        serde_json::from_slice(&read(a.path(), "verify-rellich.json")).unwrap();
    for key in [
        "run_id",
        "timestamp",
        "ledger",
        "estimates",
        "gaps",
        "diagnostics",
    ] {
        assert!(record.get(key).is_some(), "missing {key}");
    }
    assert_eq!(record["ledger"]["a2"], "25/16");
}

#[test]
fn config_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "schema_version = 1\nunknown = true\n").unwrap();
    let out = hrverify(&["verify-hardy", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown"));
}

#[test]
fn solver_failure_names_the_step() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cap.toml");
    std::fs::write(
        &path,
        "schema_version = 1\n[solver]\nmax_iterations = 1\n[grid]\nschedule = [{ r_min = 1e-3, r_max = 1e3, n = 257 }]\n",
    )
    .unwrap();
    let out = hrverify(&["verify-hardy", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refinement step 0"));
}

#[test]
fn identities_with_small_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.toml");
    std::fs::write(&path, "schema_version = 1\nseed = 3\n[identities]\nsamples = 20\ndims = [3]\nexponents = [0, 2]\n").unwrap();
    let out = hrverify(&[
        "identities",
        "--config",
        path.to_str().unwrap(),
        "--jobs",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("4 families x 20 samples, seed 3"));
    assert!(
        text.lines().filter(|l| l.ends_with("PASS")).count() >= 5,
        "{text}"
    );
    assert!(dir.path().join("identities.csv").exists());
}

#[test]
fn sweep_records_one_line_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.toml");
    std::fs::write(
        &path,
        "schema_version = 1\n[sweep]\ndims = [3, 5]\nexponents = [\"0\", \"1/2\", \"4\"]\n",
    )
    .unwrap();
    let outputs: Vec<_> = ["1", "3"]
        .iter()
        .map(|jobs| {
            let out_dir = dir.path().join(format!("jobs{jobs}"));
            let out = hrverify(&[
                "sweep",
                "--config",
                path.to_str().unwrap(),
                "--jobs",
                jobs,
                "--out",
                out_dir.to_str().unwrap(),
            ]);
            assert_eq!(out.status.code(), Some(0));
            (
                read(&out_dir, "sweep_summary.csv"),
                read(&out_dir, "sweep_records.jsonl"),
            )
        })
        .collect();
    assert_eq!(outputs[0], outputs[1], "results depend on the thread count");
    let summary = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 9);
    assert_eq!(String::from_utf8_lossy(&outputs[0].1).lines().count(), 18);
}

#[test]
fn agmon_and_grushin_run() {
    let out = hrverify(&["agmon"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("below 1e-6 E from n = 58"));
    let out = hrverify(&["grushin", "--dim", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("rellich"));
}
