//! Exit codes and artifacts of the `incidence-lab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], cfg: Option<(&Path, &str)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_incidence-lab"));
    cmd.args(args).env_remove("LAB_THREADS");
    if let Some((path, text)) = cfg {
        fs::write(path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

const SMALL_DUALITY: &str = "[run]\nseed = 7\n\n[duality-check]\ndeltas = 2^-4..2^-6 ; three scales\nsamples = 500\n";

#[test]
fn passing_run_exits_zero_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = lab(
        &["duality-check", "--out", out.to_str().unwrap()],
        Some((&dir.path().join("lab.ini"), SMALL_DUALITY)),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("summary.json").exists() && out.join("report.txt").exists());
    let csvs: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .collect();
    assert!(!csvs.is_empty());
    let text = fs::read_to_string(csvs[0].path()).unwrap();
    for key in ["# experiment:", "# generator:", "# seed: 7", "# engine_version:"] {
        assert!(text.contains(key), "missing {key} in provenance block");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 7);
}

#[test]
fn same_seed_gives_identical_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let ini = dir.path().join("lab.ini");
    let read_all = |d: &Path| {
        let mut files: Vec<_> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        files.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = lab(
            &["duality-check", "--out", d.to_str().unwrap()],
            Some((&ini, SMALL_DUALITY)),
        );
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(read_all(&a), read_all(&b));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let ini = dir.path().join("bad.ini");
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for text in [
        "[duality-check]\ndeltas =\n",
        "[duality-check]\ndeltas = -0.5\n",
        "[duality-check]\nunknown_key = 1\n",
        "[no-such-experiment]\n",
        "[run]\nengine = quantum\n",
    ] {
        let o = lab(&["duality-check", "--out", out], Some((&ini, text)));
        assert_eq!(o.status.code(), Some(2), "config {text:?} should be rejected");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(lab(&["no-such-experiment"], None).status.code(), Some(2));
    assert_eq!(lab(&["lw-sweep", "--h", "0.01"], None).status.code(), Some(2));
}

#[test]
fn bad_thread_count_exits_two() {
    let o = Command::new(env!("CARGO_BIN_EXE_incidence-lab"))
        .args(["duality-check"])
        .env("LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    // no generator produces 1000-rich points, so the growth check has no data
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = lab(
        &["rich-points", "--out", out.to_str().unwrap()],
        Some((
            &dir.path().join("lab.ini"),
            "[rich-points]\ndeltas = 2^-5\nks = 1000\nfamilies = k_star\n",
        )),
    );
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn sobolev_overrides_select_one_function() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = lab(
        &[
            "sobolev-check",
            "--function",
            "bump",
            "--width",
            "0.4",
            "--h",
            "0.0625",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let gns = fs::read_to_string(out.join("sobolev-check_gns.csv")).unwrap();
    assert!(gns.lines().any(|l| l.starts_with("bump")));
}
