use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use portfolio_dqn::market_data::{build_assets, generate_synthetic, load_fundamentals, load_prices};
use portfolio_dqn::qnet::{load_checkpoint, Checkpoint};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_portfolio-dqn"));
    c.env("PORTFOLIO_DQN_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(path: &Path, text: &str) -> PathBuf {
    fs::write(path, text).unwrap();
    path.to_path_buf()
}

const SYNTH: &str = "nAssets = 6\nnDays = 400\nsignalStrength = 0.3\nnoiseStd = 0.01\nsynthSeed = 5\n";

/// Synthetic data plus a tiny training config in `dir`. With this data and
/// seed every member reaches a positive validation return, so all three
/// checkpoints are written.
fn fixture(dir: &Path) -> PathBuf {
    let synth = write(&dir.join("synth.cfg"), SYNTH);
    let out = run(&["synth", "--config", synth.to_str().unwrap(), "--out", dir.join("data").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dates: Vec<String> = generate_synthetic(1, 400, 0.0, 0.0, 0).unwrap().into_values().next().unwrap().bars
        .iter()
        .map(|b| b.date.to_string())
        .collect();
    write(
        &dir.join("run.cfg"),
        &format!(
            "# tiny run\nprices = data/prices.csv\nfundamentals = data/fundamentals.csv\nuniverse = all\n\
             validationStart = {}\ntestStart = {}\nend = {}\n\
             iterations = 2000\nmemory = 500\nevaluationInterval = 500\ngradientInterval = 20\nbatchSize = 32\n\
             hiddenWidths = 4,4,4\ncostBps = 5\nseed = 1\n",
            dates[280], dates[340], dates[399]
        ),
    )
}

fn train(cfg: &Path, out: &Path) -> Output {
    run(&["train", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn checkpoints(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "qnet"))
        .collect();
    v.sort();
    v
}

#[test]
fn synth_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("s.cfg"), "nAssets = 8\nnDays = 1500\nsignalStrength = 0.3\nsynthSeed = 3\n");
    for name in ["a", "b"] {
        let out = run(&["synth", "--config", cfg.to_str().unwrap(), "--out", dir.path().join(name).to_str().unwrap()]);
        assert!(out.status.success());
    }
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for f in ["prices.csv", "fundamentals.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
    let assets = build_assets(
        load_prices(a.join("prices.csv")).unwrap(),
        load_fundamentals(a.join("fundamentals.csv")).unwrap(),
    )
    .unwrap();
    assert_eq!(assets.len(), 8);
    assert!(assets.values().all(|s| s.bars.len() == 1500));
}

#[test]
fn synth_below_warmup_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("s.cfg"), "nAssets = 2\nnDays = 100\n");
    let out = run(&["synth", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_prices_file_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir.path().join("r.cfg"),
        "prices = nope.csv\nfundamentals = nope2.csv\nvalidationStart = 2019-01-01\ntestStart = 2020-01-01\nend = 2020-12-31\n",
    );
    let out = train(&cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prices"));
}

#[test]
fn unknown_key_and_bad_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("r.cfg"), "bogusKey = 1\n");
    assert_eq!(train(&cfg, dir.path()).status.code(), Some(1));
    assert_eq!(run(&["train"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn train_then_backtest_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let run_a = dir.path().join("run_a");
    let run_b = dir.path().join("run_b");

    let out = train(&cfg, &run_a);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ckpts = checkpoints(&run_a);
    assert_eq!(ckpts.len(), 3, "{}", String::from_utf8_lossy(&out.stderr));
    for (i, p) in ckpts.iter().enumerate() {
        assert_eq!(p.file_name().unwrap().to_str().unwrap(), format!("member{i}_h4.qnet"));
        assert_eq!(load_checkpoint(p).unwrap().net.dims(), &[29, 4, 4, 2]);
    }
    let manifest = fs::read_to_string(run_a.join("manifest.txt")).unwrap();
    for needle in ["QNET1", "featureFingerprint", "seed=1", "seed=2", "seed=3", "iterations = 2000"] {
        assert!(manifest.contains(needle), "manifest lacks {needle}:\n{manifest}");
    }

    // Same config and seed: byte-identical checkpoints.
    assert!(train(&cfg, &run_b).status.success());
    for (a, b) in ckpts.iter().zip(checkpoints(&run_b)) {
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    // The manifest is itself a usable config.
    let run_c = dir.path().join("run_c");
    let replay = write(&dir.path().join("manifest.cfg"), &manifest);
    assert!(train(&replay, &run_c).status.success());
    for (a, c) in ckpts.iter().zip(checkpoints(&run_c)) {
        assert_eq!(fs::read(a).unwrap(), fs::read(c).unwrap());
    }

    let before: Vec<Vec<u8>> = ckpts.iter().map(|p| fs::read(p).unwrap()).collect();
    let report = dir.path().join("report");
    let out = run(&[
        "backtest", "--config", cfg.to_str().unwrap(), "--checkpoints", run_a.to_str().unwrap(), "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let after: Vec<Vec<u8>> = ckpts.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(before, after);

    let mut wealth: Vec<String> = fs::read_dir(&report)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("wealth_"))
        .collect();
    wealth.sort();
    assert_eq!(wealth.len(), 12);
    for strategy in ["agent", "buy_and_hold", "momentum", "reversion"] {
        for bps in ["1", "5", "10"] {
            assert!(wealth.contains(&format!("wealth_{strategy}_{bps}bps.csv")));
        }
    }
    let summary = fs::read_to_string(report.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "costBps,portfolioSize,portfolioType,strategy,cumulativeReturn");
    assert_eq!(lines.len(), 13);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(1) == Some("6") && l.split(',').nth(2) == Some("all")));
    let first_wealth = fs::read_to_string(report.join("wealth_agent_1bps.csv")).unwrap();
    assert!(first_wealth.starts_with("date,netReturn,wealth\n"));

    // A second backtest produces identical reports.
    let report2 = dir.path().join("report2");
    let out = run(&[
        "backtest", "--config", cfg.to_str().unwrap(), "--checkpoints", run_a.to_str().unwrap(), "--out",
        report2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for name in wealth.iter().map(String::as_str).chain(["summary.csv"]) {
        assert_eq!(fs::read(report.join(name)).unwrap(), fs::read(report2.join(name)).unwrap());
    }

    // Missing member.
    fs::remove_file(&ckpts[2]).unwrap();
    let out = run(&[
        "backtest", "--config", cfg.to_str().unwrap(), "--checkpoints", run_a.to_str().unwrap(), "--out",
        dir.path().join("r3").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing checkpoint"));

    // Foreign feature layout.
    let mut foreign: Checkpoint = load_checkpoint(&ckpts[0]).unwrap();
    foreign.fingerprint ^= 1;
    for p in checkpoints(&run_b) {
        foreign.save(&p).unwrap();
    }
    let out = run(&[
        "backtest", "--config", cfg.to_str().unwrap(), "--checkpoints", run_b.to_str().unwrap(), "--out",
        dir.path().join("r4").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fingerprint") && err.contains("ma5"), "{err}");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let out = run(&[
        "train", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("s9").to_str().unwrap(), "--seed", "9",
    ]);
    assert!(out.status.success());
    let manifest = fs::read_to_string(dir.path().join("s9/manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 9") && manifest.contains("seed=11"));
}
