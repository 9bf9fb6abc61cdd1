//! End-to-end tests of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use kgrec::eval::{evaluate, Split};
use kgrec::graph::load_bundle;
use kgrec::trainer::{ablation_config, train, TrainConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kgrec"))
}

fn synth_into(dir: &Path) {
    let st = bin()
        .args(["synth", "--out"])
        .arg(dir)
        .args([
            "--users", "80", "--items", "160", "--entities", "260", "--relations", "4", "--seed",
            "5",
        ])
        .status()
        .unwrap();
    assert!(st.success());
}

#[test]
fn synth_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth_into(a.path());
    synth_into(b.path());
    for name in ["train.tsv", "valid.tsv", "test.tsv", "kg.tsv", "alignment.tsv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name} differs between identical synth runs"
        );
    }
}

#[test]
fn train_then_eval_matches_in_process_wo_cl_run() {
    let data = tempfile::tempdir().unwrap();
    synth_into(data.path());
    let out = tempfile::tempdir().unwrap();
    let cfg_file = data.path().join("run.cfg");
    fs::write(
        &cfg_file,
        "dim = 8\nbatch_size = 128\nlayers = 2\nepochs_max = 4\nseed = 21\n",
    )
    .unwrap();

    let st = bin()
        .args(["train", "--data"])
        .arg(data.path())
        .arg("--out")
        .arg(out.path())
        .arg("--config")
        .arg(&cfg_file)
        .args(["--lambda1", "0"])
        .status()
        .unwrap();
    assert!(st.success());
    for f in ["checkpoint.bin", "history.csv", "metrics.csv", "manifest.txt"] {
        assert!(out.path().join(f).exists(), "{f} missing");
    }

    let eval_out = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["eval", "--checkpoint"])
        .arg(out.path().join("checkpoint.bin"))
        .arg("--data")
        .arg(data.path())
        .arg("--out")
        .arg(eval_out.path())
        .args(["--split", "test"])
        .status()
        .unwrap();
    assert!(st.success());
    let metrics = fs::read_to_string(eval_out.path().join("metrics.csv")).unwrap();
    let row = metrics.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[0], "test");

    // the same dataset and seeds trained in-process with CL disabled
    let bundle = load_bundle(data.path(), true).unwrap();
    let base = TrainConfig {
        dim: 8,
        batch_size: 128,
        layers: 2,
        epochs_max: 4,
        seed: 21,
        ..TrainConfig::default()
    };
    let cfg = ablation_config(&base, "wo_cl").unwrap();
    let (params, _, _) = train::<f32>(&cfg, &bundle).unwrap();
    let want = evaluate(&params, &bundle, &cfg.forward_config(), Split::Test, cfg.eval_k).unwrap();
    assert_eq!(cols[2], format!("{:.6}", want.recall), "recall differs");
    assert_eq!(cols[3], format!("{:.6}", want.ndcg), "ndcg differs");
}

#[test]
fn bad_config_exits_2() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let cfg_file = data.path().join("bad.cfg");
    fs::write(&cfg_file, "no_such_key = 1\n").unwrap();
    let st = bin()
        .args(["train", "--data"])
        .arg(data.path())
        .arg("--out")
        .arg(out.path())
        .arg("--config")
        .arg(&cfg_file)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));

    let st = bin()
        .args(["train", "--data"])
        .arg(data.path())
        .arg("--out")
        .arg(out.path())
        .args(["--float-width", "16"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn ablate_writes_table() {
    let data = tempfile::tempdir().unwrap();
    synth_into(data.path());
    let out = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["ablate", "--data"])
        .arg(data.path())
        .arg("--out")
        .arg(out.path())
        .args([
            "--dim", "8", "--batch-size", "128", "--layers", "2", "--epochs-max", "2",
        ])
        .status()
        .unwrap();
    assert!(st.success());
    let csv = fs::read_to_string(out.path().join("ablation.csv")).unwrap();
    assert!(csv.starts_with("variant,"));
    assert_eq!(csv.lines().count(), 7, "header + six variants");
}

#[test]
fn check_subcommand_passes() {
    let output = bin().arg("check").output().unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "check failed:\n{stdout}");
    assert!(stdout.contains("[PASS]"));
    assert!(!stdout.contains("[FAIL]"));
}
