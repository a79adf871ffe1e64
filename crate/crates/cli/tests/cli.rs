//! End-to-end runs of the `ntband` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ntband");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn ntband(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes a variant of the default config with some text replaced.
fn variant(dir: &Path, name: &str, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = fs::read_to_string(configs().join("default.toml")).unwrap();
    for (from, to) in edits {
        assert!(text.contains(from), "default config lacks {from:?}");
        text = text.replace(from, to);
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn weights_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w");
    let o = ntband(&["weights", "--config", s(&configs().join("default.toml")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("weights p            = (0.0667, 0.4667)"), "{text}");
    assert!(text.contains("bond weight q        = 0.4667"));
    assert!(text.contains("growth rate g        = 1.1267"));

    let table: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("band_table.json")).unwrap()).unwrap();
    let assets = table["assets"].as_array().unwrap();
    assert_eq!(assets[0]["asset"], 1);
    assert!((assets[0]["alpha_over_k13_pi"].as_f64().unwrap() - 0.1633).abs() < 5e-5);
    assert!((assets[1]["alpha_over_k13_pi"].as_f64().unwrap() - 0.4358).abs() < 5e-5);
    assert_eq!(assets[0]["paper_reported"], 0.167);
    assert_eq!(assets[1]["paper_reported"], 0.71);
    assert!(out.join("band_table.manifest.json").exists());
}

#[test]
fn weights_uncorrelated_and_flat_markets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "u.toml", &[("rho = [[1.0, 0.5], [0.5, 1.0]]", "rho = [[1.0, 0.0], [0.0, 1.0]]")]);
    let o = ntband(&["weights", "--config", s(&cfg), "--out", s(&dir.path().join("u"))]);
    assert!(stdout(&o).contains("weights p            = (0.3000, 0.5000)"));
    let table: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("u/band_table.json")).unwrap()).unwrap();
    // Only the reference market carries published numbers.
    assert!(table["assets"][0]["paper_reported"].is_null());
    let a = &table["assets"][0];
    assert_eq!(a["alpha_over_k13_pi"], a["alpha_uncorrelated"]);

    let cfg = variant(dir.path(), "f.toml", &[("mu = [1.3, 1.5]", "mu = [1.0, 1.0]")]);
    let o = ntband(&["weights", "--config", s(&cfg), "--out", s(&dir.path().join("f"))]);
    let text = stdout(&o);
    assert!(text.contains("weights p            = (0.0000, 0.0000)"), "{text}");
    assert!(text.contains("growth rate g        = 1.0000"));

    let cfg = variant(dir.path(), "k0.toml", &[("k = 0.005", "k = 0.0")]);
    ntband(&["weights", "--config", s(&cfg), "--out", s(&dir.path().join("k0")), "--quiet"]);
    let table: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("k0/band_table.json")).unwrap()).unwrap();
    for a in table["assets"].as_array().unwrap() {
        assert_eq!(a["alpha"], 0.0);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let default = configs().join("default.toml");

    let o = ntband(&["simulate", "--config", s(&default), "--paths", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists(), "invalid config must not create output");

    let cfg = variant(dir.path(), "unknown.toml", &[("[run]", "[run]\nspeed = 3")]);
    assert_eq!(ntband(&["weights", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(2));

    let cfg =
        variant(dir.path(), "singular.toml", &[("rho = [[1.0, 0.5], [0.5, 1.0]]", "rho = [[1.0, 1.0], [1.0, 1.0]]")]);
    assert_eq!(ntband(&["weights", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(3));
    assert!(!out.exists());

    // Output "directory" that is actually a file.
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let o = ntband(&["weights", "--config", s(&default), "--out", s(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(4));

    assert_eq!(ntband(&["simulate", "--config", s(&default), "--config", s(&default)]).status.code(), Some(2));
    assert_eq!(ntband(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn bankrupt_paths_set_exit_code_five() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(
        dir.path(),
        "lever.toml",
        &[
            ("dt = 0.001", "dt = 0.25"),
            ("strategy = \"banded\"", "strategy = \"frictionless\""),
            ("output = \"out/default\"", "output = \"out/default\"\n\n[override]\nweights = [10.0, 10.0]"),
        ],
    );
    let o = ntband(&["simulate", "--config", s(&cfg), "--paths", "200", "--out", s(&dir.path().join("b"))]);
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bankrupt"));
    assert!(dir.path().join("b/summary.csv").exists());
}

#[test]
fn simulate_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("default.toml");
    let mut files = Vec::new();
    for (i, workers) in ["1", "4", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = ntband(&[
            "simulate",
            "--config",
            s(&cfg),
            "--paths",
            "300",
            "--workers",
            workers,
            "--out",
            s(&out),
            "--quiet",
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).is_empty());
        files.push(fs::read(out.join("summary.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);

    let text = String::from_utf8(files[0].clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,mean_log_wealth,sem,n_paths"));
    assert_eq!(lines.count(), 201);
}

#[test]
fn manifest_replays_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    ntband(&[
        "simulate",
        "--config",
        s(&configs().join("naive.toml")),
        "--paths",
        "50",
        "--seed",
        "99",
        "--out",
        s(&first),
        "--quiet",
    ]);
    let manifest = first.join("summary.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["config"]["run"]["seed"], 99);
    assert_eq!(m["config"]["run"]["paths"], 50);
    assert_eq!(m["command"], "simulate");

    let second = dir.path().join("second");
    let o = ntband(&["simulate", "--config", s(&manifest), "--out", s(&second), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(first.join("summary.csv")).unwrap(), fs::read(second.join("summary.csv")).unwrap());
}

#[test]
fn compare_identical_and_mismatched() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("default.toml");
    let out = dir.path().join("cmp");
    let o = ntband(&["compare", "--config", s(&cfg), "--config", s(&cfg), "--paths", "40", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("difference.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,mean_a,mean_b,difference,sem"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3], "0");
        assert_eq!(cols[4], "0");
    }
    assert!(out.join("difference.manifest.json").exists());

    let coarse = variant(dir.path(), "coarse.toml", &[("recording_points = 200", "recording_points = 50")]);
    let o = ntband(&[
        "compare",
        "--config",
        s(&cfg),
        "--config",
        s(&coarse),
        "--paths",
        "40",
        "--out",
        s(&dir.path().join("x")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn compare_correlation_aware_weights_beat_naive_ones() {
    let dir = tempfile::tempdir().unwrap();
    let c = configs();
    let out = dir.path().join("gap");
    let o = ntband(&[
        "compare",
        "--config",
        s(&c.join("frictionless.toml")),
        "--config",
        s(&c.join("frictionless_uncorrelated_weights.toml")),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("difference.csv")).unwrap();
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let (diff, sem) = (last[3], last[4]);
    assert!((diff - (169.0 / 150.0 - 1.095)).abs() <= 3.0 * sem, "{diff} ± {sem}");
}

#[test]
fn trades_ledgers() {
    let dir = tempfile::tempdir().unwrap();
    let c = configs();

    let hold = dir.path().join("hold");
    let o = ntband(&["trades", "--config", s(&c.join("buy_and_hold.toml")), "--out", s(&hold)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(hold.join("trades.csv")).unwrap(), "t,asset,side,amount,cost\n");
    let series = fs::read_to_string(hold.join("series.csv")).unwrap();
    assert!(series.starts_with("t,bond,a1,a2,wealth\n"));
    assert_eq!(series.lines().count(), 1002);

    let free = dir.path().join("free");
    ntband(&["trades", "--config", s(&c.join("frictionless.toml")), "--out", s(&free), "--quiet"]);
    let text = fs::read_to_string(free.join("trades.csv")).unwrap();
    assert!(text.lines().count() > 1);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0")));

    let banded = dir.path().join("banded");
    ntband(&["trades", "--config", s(&c.join("default.toml")), "--out", s(&banded), "--quiet"]);
    let text = fs::read_to_string(banded.join("trades.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert!(!rows.is_empty());
    let mut kinds = std::collections::BTreeSet::new();
    for r in &rows {
        kinds.insert((r[1], r[2]));
        let amount: f64 = r[3].parse().unwrap();
        let cost: f64 = r[4].parse().unwrap();
        assert!(amount > 0.0);
        assert!((cost - 0.005 * amount).abs() <= 1e-11 * amount);
    }
    assert!(kinds.iter().any(|(_, side)| *side == "buy"));
    assert!(kinds.iter().any(|(_, side)| *side == "sell"));
    let times: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
}
