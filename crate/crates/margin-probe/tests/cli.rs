//! End-to-end runs of the `margin-probe` binary against a synthetic
//! MNIST-shaped dataset: exit codes, artifact determinism, and renderer
//! selection.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn write_idx_images(path: &Path, count: usize, pixel: impl Fn(usize, usize) -> u8) {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&0x0000_0803u32.to_be_bytes());
    bytes.extend_from_slice(&(count as u32).to_be_bytes());
    bytes.extend_from_slice(&28u32.to_be_bytes());
    bytes.extend_from_slice(&28u32.to_be_bytes());
    for i in 0..count {
        for p in 0..784 {
            bytes.push(pixel(i, p));
        }
    }
    fs::write(path, bytes).unwrap();
}

fn write_idx_labels(path: &Path, labels: &[u8]) {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&0x0000_0801u32.to_be_bytes());
    bytes.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    bytes.extend_from_slice(labels);
    fs::write(path, bytes).unwrap();
}

/// Two blocky "digit" classes with per-sample jitter.
fn synthetic_mnist(dir: &Path, train_n: usize, test_n: usize) {
    let pixel = |i: usize, p: usize| -> u8 {
        let (r, c) = (p / 28, p % 28);
        let lit = if i % 2 == 0 { r < 14 && c < 14 } else { r >= 14 && c >= 14 };
        let jitter = ((i * 131 + p * 17) % 23) as u8;
        if lit { 180 + jitter / 2 } else { jitter }
    };
    let labels = |n: usize| -> Vec<u8> { (0..n).map(|i| (i % 2) as u8).collect() };
    write_idx_images(&dir.join("train-images-idx3-ubyte"), train_n, pixel);
    write_idx_labels(&dir.join("train-labels-idx1-ubyte"), &labels(train_n));
    write_idx_images(&dir.join("t10k-images-idx3-ubyte"), test_n, pixel);
    write_idx_labels(&dir.join("t10k-labels-idx1-ubyte"), &labels(test_n));
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_margin-probe"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("MARGIN_PROBE_DATA").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

struct Fixture {
    _root: tempfile::TempDir,
    data: PathBuf,
    out: PathBuf,
}

fn fixture() -> Fixture {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("mnist");
    let out = root.path().join("out");
    fs::create_dir_all(&data).unwrap();
    synthetic_mnist(&data, 48, 16);
    Fixture { _root: root, data, out }
}

fn full_pipeline_args(fx: &Fixture) -> Vec<Vec<String>> {
    let data = fx.data.display().to_string();
    let out = fx.out.display().to_string();
    let base = ["--data-dir", &data, "--output-dir", &out];
    let mut cmds = Vec::new();
    cmds.push(
        ["train"].iter().chain(&base).chain(&["--epochs", "2", "--batch-size", "8"])
            .map(|s| s.to_string()).collect(),
    );
    cmds.push(
        ["attack"].iter().chain(&base).chain(&["--epsilons", "0.05,0.2", "--deltas", "0.05,0.2"])
            .map(|s| s.to_string()).collect(),
    );
    cmds.push(["svm"].iter().chain(&base).chain(&["--c-values", "2,0.5"]).map(|s| s.to_string()).collect());
    cmds.push(["pas"].iter().chain(&base).chain(&["--c-values", "2,0.5"]).map(|s| s.to_string()).collect());
    cmds.push(
        ["report"]
            .iter()
            .chain(&base)
            .chain(&["--c-values", "2,0.5", "--epsilons", "0.05,0.2", "--deltas", "0.05,0.2"])
            .map(|s| s.to_string())
            .collect(),
    );
    cmds
}

fn run_full_pipeline(fx: &Fixture) {
    for args in full_pipeline_args(fx) {
        let out = bin().args(&args).env_remove("MARGIN_PROBE_DATA").output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "command {:?} failed:\nstdout: {}\nstderr: {}",
            args,
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn tiny_pipeline_runs_end_to_end_and_is_deterministic() {
    let fx = fixture();
    run_full_pipeline(&fx);

    let coverage = fx.out.join("report/coverage.csv");
    assert!(coverage.is_file());
    let first: Vec<(PathBuf, Vec<u8>)> = collect_artifacts(&fx.out);
    assert!(first.iter().any(|(p, _)| p.ends_with("model.pasm")));

    // Rerun everything into the same directory: byte-identical artifacts.
    run_full_pipeline(&fx);
    for (path, bytes) in &first {
        let again = fs::read(path).unwrap();
        assert_eq!(&again, bytes, "artifact changed between reruns: {}", path.display());
    }
}

fn collect_artifacts(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(cursor) = stack.pop() {
        for entry in fs::read_dir(&cursor).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = fs::read(&path).unwrap();
                out.push((path, bytes));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn train_prints_accuracy_line_even_with_zero_epochs() {
    let fx = fixture();
    let out = run(&[
        "train",
        "--data-dir",
        &fx.data.display().to_string(),
        "--output-dir",
        &fx.out.display().to_string(),
        "--epochs",
        "0",
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("test_accuracy=0."), "{stdout}");
}

#[test]
fn missing_labels_file_exits_2() {
    let fx = fixture();
    fs::remove_file(fx.data.join("train-labels-idx1-ubyte")).unwrap();
    let out = run(&[
        "train",
        "--data-dir",
        &fx.data.display().to_string(),
        "--output-dir",
        &fx.out.display().to_string(),
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("train-labels"));
}

#[test]
fn attack_without_checkpoint_exits_2() {
    let fx = fixture();
    let out = run(&[
        "attack",
        "--data-dir",
        &fx.data.display().to_string(),
        "--output-dir",
        &fx.out.display().to_string(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("checkpoint"));
}

#[test]
fn empty_budget_list_exits_2() {
    let fx = fixture();
    let out = run(&[
        "attack",
        "--data-dir",
        &fx.data.display().to_string(),
        "--output-dir",
        &fx.out.display().to_string(),
        "--epsilons",
        ",",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn report_with_missing_attack_csv_exits_2_naming_the_gap() {
    let fx = fixture();
    run_full_pipeline(&fx);
    fs::remove_file(fx.out.join("attacks/ifgsm_eps_0.05.csv")).unwrap();
    let out = run(&[
        "report",
        "--output-dir",
        &fx.out.display().to_string(),
        "--c-values",
        "2,0.5",
        "--epsilons",
        "0.05,0.2",
        "--deltas",
        "0.05,0.2",
    ]);
    assert_eq!(code(&out), 2);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("ifgsm_eps_0.05"),
        "stderr should name the missing file: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn tampered_pas_file_exits_4() {
    let fx = fixture();
    run_full_pipeline(&fx);
    // An index outside the correctly classified universe.
    fs::write(fx.out.join("pas/pas_C_2.csv"), "test_index\n9999\n").unwrap();
    let out = run(&[
        "report",
        "--output-dir",
        &fx.out.display().to_string(),
        "--c-values",
        "2,0.5",
        "--epsilons",
        "0.05,0.2",
        "--deltas",
        "0.05,0.2",
    ]);
    assert_eq!(code(&out), 4, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn report_format_flag_selects_renderer() {
    let fx = fixture();
    run_full_pipeline(&fx);
    let common = [
        "report",
        "--output-dir",
        &fx.out.display().to_string(),
        "--c-values",
        "2,0.5",
        "--epsilons",
        "0.05,0.2",
        "--deltas",
        "0.05,0.2",
    ];
    let table = run(&common.iter().chain(&["--format", "table"]).copied().collect::<Vec<_>>());
    assert!(String::from_utf8_lossy(&table.stdout).contains("SVM C parameter"));
    let csv = run(&common.iter().chain(&["--format", "csv"]).copied().collect::<Vec<_>>());
    assert!(String::from_utf8_lossy(&csv.stdout).starts_with("attack,budget,c,"));
}

#[test]
fn help_and_unknown_commands() {
    let help = run(&["help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("margin-probe <command>"));
    let unknown = run(&["frobnicate"]);
    assert_eq!(code(&unknown), 2);
}

#[test]
fn config_file_drives_the_pipeline() {
    let fx = fixture();
    let config = fx.data.parent().unwrap().join("run.conf");
    fs::write(
        &config,
        format!(
            "data_dir = {}\noutput_dir = {}\nseed = 5\n\n[train]\nepochs = 1\nbatch_size = 8\n",
            fx.data.display(),
            fx.out.display()
        ),
    )
    .unwrap();
    let out = run(&["train", "--config", &config.display().to_string()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(fx.out.join("model.pasm").is_file());
}
