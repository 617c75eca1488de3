use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use surface_ledger::fixture_dir;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surface-ledger"))
        .args(args)
        .output()
        .unwrap()
}

fn fx(p: &str) -> String {
    fixture_dir().join(p).to_string_lossy().into_owned()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn catalog_into(dir: &Path) -> String {
    let out = dir.join("catalog.json");
    let r = cli(&[
        "catalog",
        "--idl-dir",
        &fx("idl"),
        "--standards",
        &fx("standards.csv"),
        "--out",
        &s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    s(&out)
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["--version"]).status.code(), Some(0));
    assert_eq!(cli(&["policy", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cli(&[]).status.code(), Some(1));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cli(&["policy", "preset", "lax"]).status.code(), Some(1));
    let r = cli(&["policy", "preset", "conservative", "--format", "csv"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("not supported"));
}

#[test]
fn missing_input_exits_two() {
    let r = cli(&[
        "benefit",
        "--tests",
        "/nonexistent/tests.csv",
        "--usage",
        &fx("benefit/usage.csv"),
    ]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");
}

#[test]
fn validation_error_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("tests.csv");
    fs::write(
        &bad,
        "site,standard_abbrev,tester,score\na.example,WEBGL,t1,7\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let r = cli(&[
        "benefit",
        "--tests",
        &s(&bad),
        "--usage",
        &fx("benefit/usage.csv"),
        "--out",
        &s(&out),
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn stdout_and_out_file_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let a = cli(&[
        "benefit",
        "--tests",
        &fx("benefit/site_tests.csv"),
        "--usage",
        &fx("benefit/usage.csv"),
    ]);
    let b = cli(&[
        "benefit",
        "--tests",
        &fx("benefit/site_tests.csv"),
        "--usage",
        &fx("benefit/usage.csv"),
        "--out",
        &s(&out),
    ]);
    assert!(a.status.success() && b.status.success());
    assert!(b.stdout.is_empty());
    assert_eq!(a.stdout, fs::read(&out).unwrap());
}

#[test]
fn strict_and_lenient_scoring() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let catalog = catalog_into(d);
    let eloc = s(&d.join("eloc.json"));
    let tally = s(&d.join("tally.json"));
    let breaks = s(&d.join("breaks.json"));
    assert!(cli(&[
        "eloc",
        "--nodes",
        &fx("callgraph/nodes.csv"),
        "--edges",
        &fx("callgraph/edges.csv"),
        "--catalog",
        &catalog,
        "--format",
        "json",
        "--out",
        &eloc
    ])
    .status
    .success());
    assert!(cli(&[
        "cves",
        "--cves",
        &fx("cves/cves.jsonl"),
        "--rules",
        &fx("cves/rules.csv"),
        "--catalog",
        &catalog,
        "--discard",
        &fx("cves/discard.txt"),
        "--format",
        "json",
        "--out",
        &tally
    ])
    .status
    .success());
    assert!(cli(&[
        "benefit",
        "--tests",
        &fx("benefit/site_tests.csv"),
        "--usage",
        &fx("benefit/usage.csv"),
        "--format",
        "json",
        "--out",
        &breaks
    ])
    .status
    .success());

    let attacks = d.join("attacks.csv");
    let mut text = fs::read_to_string(fx("attacks.csv")).unwrap();
    text.push_str("EXTRA,1\n");
    fs::write(&attacks, text).unwrap();
    let base = [
        "score",
        "--catalog",
        &catalog,
        "--eloc",
        &eloc,
        "--tally",
        &tally,
        "--breaks",
        &breaks,
        "--attacks",
    ];

    let mut args = base.to_vec();
    args.extend([attacks.to_str().unwrap(), "--strict"]);
    let r = cli(&args);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("catalog lacks EXTRA"), "{err}");

    let mut args = base.to_vec();
    args.extend([attacks.to_str().unwrap(), "--lenient"]);
    let r = cli(&args);
    assert!(r.status.success());
    let csv = String::from_utf8(r.stdout).unwrap();
    assert!(csv.lines().any(|l| l == ",EXTRA,,,,,,,,,1"), "{csv}");

    let mut args = base.to_vec();
    args.extend([attacks.to_str().unwrap(), "--strict", "--lenient"]);
    assert_eq!(cli(&args).status.code(), Some(1));
}

#[test]
fn policy_check_and_generation() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"name":"x","blocked":["SVG"],"per_origin":{"https://a.example":{"allow":["SVG"],"block":["SVG"]}}}"#).unwrap();
    let r = cli(&["policy", "check", "--policy", &s(&bad)]);
    assert_eq!(r.status.code(), Some(1));
    let newer = dir.path().join("v2.json");
    fs::write(&newer, r#"{"version":2,"name":"x","blocked":[]}"#).unwrap();
    assert_eq!(
        cli(&["policy", "check", "--policy", &s(&newer)])
            .status
            .code(),
        Some(1)
    );

    let catalog = catalog_into(dir.path());
    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{"name":"x","blocked":["NOPE"]}"#).unwrap();
    assert!(cli(&["policy", "check", "--policy", &s(&unknown)])
        .status
        .success());
    assert_eq!(
        cli(&[
            "policy",
            "check",
            "--policy",
            &s(&unknown),
            "--catalog",
            &catalog
        ])
        .status
        .code(),
        Some(1)
    );

    let minimal = dir.path().join("min.json");
    fs::write(&minimal, r#"{"name":"m","blocked":["WEBGL"]}"#).unwrap();
    let r = cli(&[
        "policy",
        "check",
        "--policy",
        &s(&minimal),
        "--catalog",
        &catalog,
    ]);
    assert!(r.status.success());
}

#[test]
fn generated_policy_blocks_costly_unused_standards() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    assert!(cli(&[
        "pipeline",
        "--manifest",
        &fx("pipeline.toml"),
        "--out-dir",
        &s(&out)
    ])
    .status
    .success());
    let ledger = s(&out.join("ledger.json"));
    let r = cli(&[
        "policy",
        "gen",
        "--ledger",
        &ledger,
        "--max-break-rate",
        "0",
        "--min-cves",
        "10",
    ]);
    let p: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    let blocked: Vec<&str> = p["blocked"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    for a in ["WEBGL", "SVG", "WEBA", "H-WW"] {
        assert!(blocked.contains(&a), "{blocked:?}");
    }
    let r = cli(&[
        "policy",
        "gen",
        "--ledger",
        &ledger,
        "--max-break-rate",
        "0",
        "--min-cves",
        "10",
        "--whitelist",
        "WCR,WEBGL",
    ]);
    let p: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert!(!p["blocked"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v == "WEBGL"));
    let r = cli(&[
        "policy",
        "gen",
        "--ledger",
        &ledger,
        "--max-break-rate",
        "0",
    ]);
    assert_eq!(r.status.code(), Some(1));

    let scatter = fs::read_to_string(out.join("scatter_severe.csv")).unwrap();
    let webgl = scatter.lines().find(|l| l.starts_with("WEBGL,")).unwrap();
    let cols: Vec<&str> = webgl.split(',').collect();
    assert_eq!(cols[1], "22");
    assert!(cols[2].parse::<f64>().unwrap() < 0.01);
}

#[test]
fn scatter_of_empty_ledger_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("empty.json");
    fs::write(&ledger, "{\"rows\": []}\n").unwrap();
    let r = cli(&["scatter", "--ledger", &s(&ledger), "--x", "eloc"]);
    assert!(r.status.success());
    assert_eq!(
        String::from_utf8(r.stdout).unwrap(),
        "standard,eloc,weighted_break_rate\n"
    );
}

#[test]
fn preset_command_matches_shipped_files() {
    for name in ["conservative", "aggressive"] {
        let r = cli(&["policy", "preset", name]);
        assert_eq!(
            r.stdout,
            fs::read(fx(&format!("policies/{name}.json"))).unwrap()
        );
    }
}
