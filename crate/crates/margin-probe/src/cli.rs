//! Pipeline driver: config file + flag parsing and the six stages the
//! `margin-probe` binary dispatches to (`train`, `eval`, `attack`, `svm`,
//! `pas`, `report`). Each stage is an ordinary function over [`RunConfig`] so
//! tests and examples can run them in-process.
//!
//! Exit codes: 0 ok, 2 input/config error, 3 numeric/training failure,
//! 4 consistency violation between pipeline artifacts.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use crate::attacks::{self, AttackConfig, AttackKind, BudgetSet, SweepResult};
use crate::data::{self, Dataset, Split};
use crate::error::{Error, Result};
use crate::network::{load_checkpoint, save_checkpoint, NetworkModel};
use crate::pas::{self, CSummary, CoverageRow, FeatureBank};
use crate::svm::{self, SvmConfig};
use crate::trainer::{self, EvalResult, TrainConfig};

pub const DATA_DIR_ENV: &str = "MARGIN_PROBE_DATA";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub data_dir: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub workers: Option<usize>,
    pub format: ReportFormat,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// iFGSM l-infinity budgets, ascending.
    pub epsilons: Vec<f64>,
    /// DeepFool delta thresholds, ascending.
    pub deltas: Vec<f64>,
    pub steps: usize,
    pub overshoot: f64,
    pub max_iter: usize,
    /// SVM C grid, kept in the order given (the paper tables go hard to soft).
    pub c_values: Vec<f64>,
    pub svm_tol: f64,
    pub svm_max_passes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: None,
            checkpoint: None,
            output_dir: PathBuf::from("out"),
            seed: 42,
            workers: None,
            format: ReportFormat::Table,
            epochs: 15,
            batch_size: 64,
            learning_rate: 0.01,
            momentum: 0.9,
            epsilons: vec![0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1],
            deltas: vec![0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1],
            steps: 10,
            overshoot: 0.02,
            max_iter: 50,
            c_values: vec![5.0, 2.0, 1.0, 0.5],
            svm_tol: 1e-3,
            svm_max_passes: 20_000,
        }
    }
}

impl RunConfig {
    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint.clone().unwrap_or_else(|| self.output_dir.join("model.pasm"))
    }

    pub fn resolve_data_dir(&self) -> Result<PathBuf> {
        let dir = match &self.data_dir {
            Some(d) => d.clone(),
            None => match std::env::var_os(DATA_DIR_ENV) {
                Some(v) => PathBuf::from(v),
                None => {
                    return Err(Error::Config(format!(
                        "no data directory: set data_dir or the {DATA_DIR_ENV} environment variable"
                    )))
                }
            },
        };
        if !dir.is_dir() {
            return Err(Error::Config(format!("data directory {} does not exist", dir.display())));
        }
        Ok(dir)
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    fn svm_config(&self, c: f64) -> SvmConfig {
        SvmConfig {
            c,
            tol: self.svm_tol,
            max_passes: self.svm_max_passes,
            sv_alpha_threshold: None,
        }
    }

    fn validate_grids(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.deltas.is_empty() {
            return Err(Error::Config("attack budget lists must not be empty".into()));
        }
        if self.c_values.is_empty() {
            return Err(Error::Config("svm C list must not be empty".into()));
        }
        Ok(())
    }
}

// --- config file ------------------------------------------------------------

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| Error::Config(format!("{key}: '{value}' is not a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| Error::Config(format!("{key}: '{value}' is not an integer")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in value.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        out.push(parse_f64(key, item)?);
    }
    Ok(out)
}

fn ascending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// Applies one `key = value` setting, scoped by the current `[section]`.
fn apply_setting(cfg: &mut RunConfig, section: &str, key: &str, value: &str) -> Result<()> {
    match (section, key) {
        ("", "data_dir") => cfg.data_dir = Some(PathBuf::from(value)),
        ("", "checkpoint") => cfg.checkpoint = Some(PathBuf::from(value)),
        ("", "output_dir") => cfg.output_dir = PathBuf::from(value),
        ("", "seed") => cfg.seed = parse_usize(key, value)? as u64,
        ("", "workers") => cfg.workers = Some(parse_usize(key, value)?),
        ("", "format") => cfg.format = parse_format(value)?,
        ("train", "epochs") => cfg.epochs = parse_usize(key, value)?,
        ("train", "batch_size") => cfg.batch_size = parse_usize(key, value)?,
        ("train", "learning_rate") => cfg.learning_rate = parse_f64(key, value)?,
        ("train", "momentum") => cfg.momentum = parse_f64(key, value)?,
        ("attack", "epsilons") => cfg.epsilons = ascending(parse_list(key, value)?),
        ("attack", "deltas") => cfg.deltas = ascending(parse_list(key, value)?),
        ("attack", "steps") => cfg.steps = parse_usize(key, value)?,
        ("attack", "overshoot") => cfg.overshoot = parse_f64(key, value)?,
        ("attack", "max_iter") => cfg.max_iter = parse_usize(key, value)?,
        ("svm", "c_values") => cfg.c_values = parse_list(key, value)?,
        ("svm", "tol") => cfg.svm_tol = parse_f64(key, value)?,
        ("svm", "max_passes") => cfg.svm_max_passes = parse_usize(key, value)?,
        _ => {
            return Err(Error::Config(format!(
                "unknown config key '{key}' in section '[{section}]'"
            )))
        }
    }
    Ok(())
}

/// Parses the line-oriented `key = value` config format with `[train]`,
/// `[attack]`, and `[svm]` sections; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected 'key = value'", lineno + 1)));
        };
        apply_setting(&mut cfg, &section, key.trim(), value.trim())?;
    }
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn parse_format(value: &str) -> Result<ReportFormat> {
    match value {
        "table" => Ok(ReportFormat::Table),
        "csv" => Ok(ReportFormat::Csv),
        other => Err(Error::Config(format!("format must be 'csv' or 'table', got '{other}'"))),
    }
}

// --- shared stage helpers ----------------------------------------------------

fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build {n}-worker pool: {e}")))?;
            pool.install(f)
        }
        None => f(),
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Config(format!("{what} not found: {}", path.display())));
    }
    Ok(())
}

fn expect_header(
    lines: &mut impl Iterator<Item = std::io::Result<String>>,
    expected: &str,
    what: &str,
) -> Result<()> {
    match lines.next() {
        Some(line) => {
            if line? == expected {
                Ok(())
            } else {
                Err(Error::Format(format!("{what} is missing its header line")))
            }
        }
        None => Err(Error::Format(format!("{what} is empty"))),
    }
}

fn load_model(cfg: &RunConfig) -> Result<NetworkModel<f32>> {
    let path = cfg.checkpoint_path();
    require_file(&path, "checkpoint")?;
    load_checkpoint(&path)
}

fn load_test_split(cfg: &RunConfig) -> Result<Dataset> {
    data::load_split(cfg.resolve_data_dir()?, Split::Test)
}

fn correct_indices(model: &NetworkModel<f32>, test: &Dataset) -> Result<EvalResult> {
    trainer::evaluate(model, test)
}

fn attacks_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("attacks")
}

fn svm_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("svm")
}

fn pas_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("pas")
}

fn report_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("report")
}

fn attack_csv_path(cfg: &RunConfig, kind: AttackKind, budget: f64) -> PathBuf {
    let tag = match kind {
        AttackKind::Ifgsm => "eps",
        AttackKind::Deepfool => "delta",
    };
    attacks_dir(cfg).join(format!("{}_{tag}_{budget}.csv", kind.name()))
}

fn svm_csv_path(cfg: &RunConfig, c: f64) -> PathBuf {
    svm_dir(cfg).join(format!("svm_C_{c}.csv"))
}

fn pas_csv_path(cfg: &RunConfig, c: f64) -> PathBuf {
    pas_dir(cfg).join(format!("pas_C_{c}.csv"))
}

// --- train ------------------------------------------------------------------

#[derive(Debug)]
pub struct TrainOutput {
    pub accuracy: f64,
    pub checkpoint: PathBuf,
    pub log_path: PathBuf,
}

pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutput> {
    let data_dir = cfg.resolve_data_dir()?;
    let train_set = data::load_split(&data_dir, Split::Train)?;
    let test_set = data::load_split(&data_dir, Split::Test)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let log_path = cfg.output_dir.join("train_log.txt");
    let checkpoint = cfg.checkpoint_path();
    if let Some(parent) = checkpoint.parent() {
        fs::create_dir_all(parent)?;
    }

    let (model, accuracy) = with_workers(cfg.workers, || {
        let mut log = std::io::BufWriter::new(fs::File::create(&log_path)?);
        let model = trainer::train(&train_set, &cfg.train_config(), &mut log)?;
        log.flush()?;
        let eval = trainer::evaluate(&model, &test_set)?;
        Ok((model, eval.accuracy))
    })?;
    save_checkpoint(&model, &checkpoint)?;
    println!("test_accuracy={accuracy:.4}");
    Ok(TrainOutput { accuracy, checkpoint, log_path })
}

// --- eval -------------------------------------------------------------------

pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalResult> {
    let model = load_model(cfg)?;
    let test_set = load_test_split(cfg)?;
    let eval = with_workers(cfg.workers, || correct_indices(&model, &test_set))?;
    println!("test_accuracy={:.4}", eval.accuracy);
    println!("correct={}", eval.correct_indices.len());
    Ok(eval)
}

// --- attack -----------------------------------------------------------------

#[derive(Debug)]
pub struct AttackOutput {
    pub ifgsm: SweepResult,
    pub deepfool: SweepResult,
    pub csv_paths: Vec<PathBuf>,
}

pub fn cmd_attack(cfg: &RunConfig) -> Result<AttackOutput> {
    cfg.validate_grids()?;
    let model = load_model(cfg)?;
    let test_set = load_test_split(cfg)?;
    fs::create_dir_all(attacks_dir(cfg))?;

    let (ifgsm, deepfool) = with_workers(cfg.workers, || {
        let eval = correct_indices(&model, &test_set)?;
        let ifgsm_template = AttackConfig {
            steps: cfg.steps,
            ..AttackConfig::ifgsm(0.0)
        };
        let ifgsm = attacks::run_sweep(
            &model,
            &test_set,
            &eval.correct_indices,
            &cfg.epsilons,
            &ifgsm_template,
        )?;
        let deepfool_template = AttackConfig {
            overshoot: cfg.overshoot,
            max_iter: cfg.max_iter,
            ..AttackConfig::deepfool(f64::INFINITY)
        };
        let deepfool = attacks::run_sweep(
            &model,
            &test_set,
            &eval.correct_indices,
            &cfg.deltas,
            &deepfool_template,
        )?;
        Ok((ifgsm, deepfool))
    })?;

    let mut csv_paths = Vec::new();
    for sweep in [&ifgsm, &deepfool] {
        for budget_set in &sweep.per_budget {
            let path = attack_csv_path(cfg, sweep.kind, budget_set.budget);
            attacks::write_outcomes_csv(&path, sweep.records_for(budget_set.budget))?;
            println!(
                "{} budget={} adversarial={}",
                sweep.kind.name(),
                budget_set.budget,
                budget_set.indices.len()
            );
            csv_paths.push(path);
        }
    }
    Ok(AttackOutput { ifgsm, deepfool, csv_paths })
}

// --- svm --------------------------------------------------------------------

#[derive(Debug)]
pub struct SvmOutput {
    pub bank_path: PathBuf,
    pub summary_path: PathBuf,
    pub model_paths: Vec<PathBuf>,
    pub summaries: Vec<CSummary>,
}

fn write_feature_bank_csv(bank: &FeatureBank, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "test_index,label")?;
    for (&idx, &label) in bank.indices.iter().zip(&bank.labels) {
        writeln!(w, "{idx},{label}")?;
    }
    w.flush()?;
    Ok(())
}

fn read_feature_bank_csv(path: &Path) -> Result<Vec<(usize, u8)>> {
    require_file(path, "feature bank")?;
    let mut lines = std::io::BufReader::new(fs::File::open(path)?).lines();
    expect_header(&mut lines, "test_index,label", "feature bank")?;
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let Some((idx, label)) = line.split_once(',') else {
            return Err(Error::Format(format!("bad feature bank row: {line}")));
        };
        let idx = idx.parse().map_err(|_| Error::Format(format!("bad index: {line}")))?;
        let label = label.parse().map_err(|_| Error::Format(format!("bad label: {line}")))?;
        rows.push((idx, label));
    }
    Ok(rows)
}

pub fn cmd_svm(cfg: &RunConfig) -> Result<SvmOutput> {
    cfg.validate_grids()?;
    let model = load_model(cfg)?;
    let test_set = load_test_split(cfg)?;
    fs::create_dir_all(svm_dir(cfg))?;

    let (bank, results) = with_workers(cfg.workers, || {
        let bank = pas::extract_features(&model, &test_set)?;
        let mut results = Vec::new();
        for &c in &cfg.c_values {
            let selection = pas::select_pas(&bank, &cfg.svm_config(c))?;
            results.push((c, selection));
        }
        Ok((bank, results))
    })?;

    let bank_path = svm_dir(cfg).join("feature_bank.csv");
    write_feature_bank_csv(&bank, &bank_path)?;

    let mut model_paths = Vec::new();
    let mut summaries = Vec::new();
    let summary_path = svm_dir(cfg).join("summary.csv");
    let mut summary = std::io::BufWriter::new(fs::File::create(&summary_path)?);
    writeln!(summary, "c,train_accuracy,n_sv,n_samples,feature_dim,tol")?;
    for (c, selection) in &results {
        let path = svm_csv_path(cfg, *c);
        svm::write_svm_csv(&selection.svm, &path)?;
        writeln!(
            summary,
            "{c},{},{},{},{},{}",
            selection.train_accuracy,
            selection.support.indices.len(),
            bank.n(),
            bank.dim,
            cfg.svm_tol
        )?;
        println!(
            "svm C={c} train_accuracy={:.4} sv={}",
            selection.train_accuracy,
            selection.support.indices.len()
        );
        summaries.push(CSummary {
            c: *c,
            train_accuracy: selection.train_accuracy,
            n_sv: selection.support.indices.len(),
        });
        model_paths.push(path);
    }
    summary.flush()?;
    Ok(SvmOutput { bank_path, summary_path, model_paths, summaries })
}

// --- pas ---------------------------------------------------------------------

#[derive(Debug)]
pub struct PasOutput {
    pub pas_paths: Vec<PathBuf>,
    /// Per C value: the PAS as sorted test-set indices.
    pub pas_indices: Vec<(f64, Vec<usize>)>,
}

pub fn cmd_pas(cfg: &RunConfig) -> Result<PasOutput> {
    cfg.validate_grids()?;
    let bank_rows = read_feature_bank_csv(&svm_dir(cfg).join("feature_bank.csv"))?;
    fs::create_dir_all(pas_dir(cfg))?;
    let mut pas_paths = Vec::new();
    let mut pas_indices = Vec::new();
    for &c in &cfg.c_values {
        let dump = svm_csv_path(cfg, c);
        require_file(&dump, "svm dump")?;
        let (_, rows) = svm::read_svm_csv(&dump)?;
        let threshold = cfg.svm_config(c).threshold();
        let mut member = vec![false; bank_rows.len()];
        for (_, row, alpha) in rows {
            if row >= bank_rows.len() {
                return Err(Error::Consistency(format!(
                    "svm dump row {row} exceeds the feature bank ({} rows)",
                    bank_rows.len()
                )));
            }
            if alpha > threshold {
                member[row] = true;
            }
        }
        let indices: Vec<usize> = member
            .iter()
            .enumerate()
            .filter_map(|(row, &m)| m.then(|| bank_rows[row].0))
            .collect();
        let path = pas_csv_path(cfg, c);
        let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(w, "test_index")?;
        for idx in &indices {
            writeln!(w, "{idx}")?;
        }
        w.flush()?;
        println!("pas C={c} selected={} of {}", indices.len(), bank_rows.len());
        pas_paths.push(path);
        pas_indices.push((c, indices));
    }
    Ok(PasOutput { pas_paths, pas_indices })
}

fn read_pas_csv(path: &Path) -> Result<Vec<usize>> {
    require_file(path, "pas file")?;
    let mut lines = std::io::BufReader::new(fs::File::open(path)?).lines();
    expect_header(&mut lines, "test_index", "pas file")?;
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        out.push(line.parse().map_err(|_| Error::Format(format!("bad pas row: {line}")))?);
    }
    Ok(out)
}

// --- report -------------------------------------------------------------------

#[derive(Debug)]
pub struct ReportOutput {
    pub csv_path: PathBuf,
    pub table_path: PathBuf,
    pub rows: Vec<CoverageRow>,
}

fn read_attack_sets(cfg: &RunConfig, kind: AttackKind, budgets: &[f64]) -> Result<Vec<BudgetSet>> {
    let mut sets = Vec::new();
    for &budget in budgets {
        let path = attack_csv_path(cfg, kind, budget);
        require_file(&path, "attack csv")?;
        let mut lines = std::io::BufReader::new(fs::File::open(&path)?).lines();
        expect_header(
            &mut lines,
            "index,attack,budget,success,linf,iterations,final_label",
            "attack csv",
        )?;
        let mut indices = BTreeSet::new();
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(Error::Format(format!("bad attack csv row: {line}")));
            }
            if cols[1] != kind.name() {
                return Err(Error::Consistency(format!(
                    "attack csv {} contains rows for '{}'",
                    path.display(),
                    cols[1]
                )));
            }
            if cols[3] == "true" {
                let idx =
                    cols[0].parse().map_err(|_| Error::Format(format!("bad index: {line}")))?;
                indices.insert(idx);
            }
        }
        sets.push(BudgetSet { budget, indices });
    }
    Ok(sets)
}

fn read_svm_summaries(cfg: &RunConfig) -> Result<Vec<CSummary>> {
    let path = svm_dir(cfg).join("summary.csv");
    require_file(&path, "svm summary")?;
    let mut lines = std::io::BufReader::new(fs::File::open(&path)?).lines();
    expect_header(&mut lines, "c,train_accuracy,n_sv,n_samples,feature_dim,tol", "svm summary")?;
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::Format(format!("bad svm summary row: {line}")));
        }
        out.push(CSummary {
            c: parse_f64("c", cols[0])?,
            train_accuracy: parse_f64("train_accuracy", cols[1])?,
            n_sv: parse_usize("n_sv", cols[2])?,
        });
    }
    Ok(out)
}

pub fn cmd_report(cfg: &RunConfig) -> Result<ReportOutput> {
    cfg.validate_grids()?;
    let bank_rows = read_feature_bank_csv(&svm_dir(cfg).join("feature_bank.csv"))?;
    let search_space: Vec<usize> = bank_rows.iter().map(|&(idx, _)| idx).collect();
    let summaries = read_svm_summaries(cfg)?;
    let ifgsm_sets = read_attack_sets(cfg, AttackKind::Ifgsm, &cfg.epsilons)?;
    let deepfool_sets = read_attack_sets(cfg, AttackKind::Deepfool, &cfg.deltas)?;

    let mut rows = Vec::new();
    for &c in &cfg.c_values {
        let pas_indices = read_pas_csv(&pas_csv_path(cfg, c))?;
        for (kind, sets) in
            [(AttackKind::Ifgsm, &ifgsm_sets), (AttackKind::Deepfool, &deepfool_sets)]
        {
            rows.extend(pas::coverage(&pas_indices, sets, kind, c, &search_space)?);
        }
    }

    fs::create_dir_all(report_dir(cfg))?;
    let csv_path = report_dir(cfg).join("coverage.csv");
    pas::write_coverage_csv(&rows, &csv_path)?;
    let table = pas::render_table(&summaries, &rows, search_space.len());
    let table_path = report_dir(cfg).join("coverage.txt");
    fs::write(&table_path, &table)?;

    match cfg.format {
        ReportFormat::Table => print!("{table}"),
        ReportFormat::Csv => print!("{}", fs::read_to_string(&csv_path)?),
    }
    Ok(ReportOutput { csv_path, table_path, rows })
}

// --- argv parsing and dispatch ------------------------------------------------

const USAGE: &str = "\
margin-probe <command> [--config FILE] [flags]

commands:
  train    train the network and write a checkpoint
  eval     report test accuracy of a checkpoint
  attack   run the iFGSM and DeepFool budget sweeps
  svm      extract features and train the one-vs-rest SVMs
  pas      derive potential adversarial samples from the SVM dumps
  report   assemble the coverage table from the stage artifacts

flags (override config file values):
  --data-dir DIR       MNIST directory (or set MARGIN_PROBE_DATA)
  --checkpoint FILE    checkpoint path (default OUTPUT/model.pasm)
  --output-dir DIR     artifact directory (default ./out)
  --seed N             RNG seed for init and shuffling
  --workers N          bound the worker thread count
  --epochs N --batch-size N --learning-rate X --momentum X
  --epsilons a,b,..    iFGSM budgets    --deltas a,b,..  DeepFool budgets
  --steps N --overshoot X --max-iter N
  --c-values a,b,..    SVM C grid       --tol X          SVM tolerance
  --format csv|table   report renderer
";

fn apply_flag(cfg: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "--data-dir" => cfg.data_dir = Some(PathBuf::from(value)),
        "--checkpoint" => cfg.checkpoint = Some(PathBuf::from(value)),
        "--output-dir" => cfg.output_dir = PathBuf::from(value),
        "--seed" => cfg.seed = parse_usize(key, value)? as u64,
        "--workers" => cfg.workers = Some(parse_usize(key, value)?),
        "--epochs" => cfg.epochs = parse_usize(key, value)?,
        "--batch-size" => cfg.batch_size = parse_usize(key, value)?,
        "--learning-rate" => cfg.learning_rate = parse_f64(key, value)?,
        "--momentum" => cfg.momentum = parse_f64(key, value)?,
        "--epsilons" => cfg.epsilons = ascending(parse_list(key, value)?),
        "--deltas" => cfg.deltas = ascending(parse_list(key, value)?),
        "--steps" => cfg.steps = parse_usize(key, value)?,
        "--overshoot" => cfg.overshoot = parse_f64(key, value)?,
        "--max-iter" => cfg.max_iter = parse_usize(key, value)?,
        "--c-values" => cfg.c_values = parse_list(key, value)?,
        "--tol" => cfg.svm_tol = parse_f64(key, value)?,
        "--max-passes" => cfg.svm_max_passes = parse_usize(key, value)?,
        "--format" => cfg.format = parse_format(value)?,
        other => return Err(Error::Config(format!("unknown flag '{other}'"))),
    }
    Ok(())
}

fn parse_args(args: &[String]) -> Result<(String, RunConfig)> {
    let mut command = None;
    let mut flags: Vec<(String, String)> = Vec::new();
    let mut config_path = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        if let Some(key) = arg.strip_prefix("--").map(|_| arg.as_str()) {
            let value = it
                .next()
                .ok_or_else(|| Error::Config(format!("flag '{key}' expects a value")))?;
            if key == "--config" {
                config_path = Some(value.clone());
            } else {
                flags.push((key.to_string(), value.clone()));
            }
        } else if command.is_none() {
            command = Some(arg.clone());
        } else {
            return Err(Error::Config(format!("unexpected argument '{arg}'")));
        }
    }
    let command = command.ok_or_else(|| Error::Config(format!("no command given\n{USAGE}")))?;
    let mut cfg = match config_path {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    for (key, value) in &flags {
        apply_flag(&mut cfg, key, value)?;
    }
    Ok((command, cfg))
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Format(_)
        | Error::Length { .. }
        | Error::Value(_)
        | Error::Io(_)
        | Error::Shape { .. } => 2,
        Error::Numeric(_)
        | Error::Convergence { .. }
        | Error::Degenerate(_)
        | Error::Index { .. } => 3,
        Error::Consistency(_) => 4,
    }
}

/// Entry point used by the binary: parses argv (without the program name),
/// dispatches, and returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    if args.iter().any(|a| a == "help" || a == "--help" || a == "-h") {
        print!("{USAGE}");
        return 0;
    }
    let (command, cfg) = match parse_args(args) {
        Ok(parsed) => parsed,
        Err(err) => {
            eprintln!("{err}");
            return 2;
        }
    };
    let result: Result<()> = match command.as_str() {
        "train" => cmd_train(&cfg).map(|_| ()),
        "eval" => cmd_eval(&cfg).map(|_| ()),
        "attack" => cmd_attack(&cfg).map(|_| ()),
        "svm" => cmd_svm(&cfg).map(|_| ()),
        "pas" => cmd_pas(&cfg).map(|_| ()),
        "report" => cmd_report(&cfg).map(|_| ()),
        other => {
            eprintln!("unknown command '{other}'\n{USAGE}");
            return 2;
        }
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{command}: {err}");
            exit_code(&err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_round_trip() {
        let text = "\
# pipeline settings
data_dir = /tmp/mnist
output_dir = /tmp/out
seed = 7

[train]
epochs = 3
batch_size = 32

[attack]
epsilons = 0.1, 0.001, 0.01
steps = 5

[svm]
c_values = 2, 0.5
tol = 0.0001
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.data_dir.as_deref(), Some(Path::new("/tmp/mnist")));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.epochs, 3);
        assert_eq!(cfg.batch_size, 32);
        assert_eq!(cfg.epsilons, vec![0.001, 0.01, 0.1], "budgets sorted ascending");
        assert_eq!(cfg.steps, 5);
        assert_eq!(cfg.c_values, vec![2.0, 0.5], "C grid keeps file order");
        assert_eq!(cfg.svm_tol, 1e-4);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config("[train]\nlearning = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn flags_override_config() {
        let args: Vec<String> =
            ["train", "--seed", "9", "--epochs", "0", "--epsilons", "0.5,0.25"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        let (command, cfg) = parse_args(&args).unwrap();
        assert_eq!(command, "train");
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.epochs, 0);
        assert_eq!(cfg.epsilons, vec![0.25, 0.5]);
    }

    #[test]
    fn missing_flag_value_is_rejected() {
        let args: Vec<String> = ["train", "--seed"].iter().map(|s| s.to_string()).collect();
        assert!(parse_args(&args).is_err());
    }

    #[test]
    fn missing_data_dir_is_a_config_error() {
        let cfg = RunConfig { data_dir: Some(PathBuf::from("/nonexistent-xyz")), ..RunConfig::default() };
        let err = cfg.resolve_data_dir().unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn exit_codes_follow_the_contract()  {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Numeric("x".into())), 3);
        assert_eq!(exit_code(&Error::Consistency("x".into())), 4);
    }
}
