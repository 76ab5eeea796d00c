//! Potential Adversarial Sample selection and coverage bookkeeping.
//!
//! The pipeline is: extract last-conv-block features of the correctly
//! classified test samples, train the one-vs-rest SVM on them (yes, on the
//! test set's own features: the method deliberately probes where the test
//! data sits relative to the learned boundaries), take the union support
//! vector set as the PAS, then intersect the PAS with each attack's
//! per-budget adversarial index sets.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::attacks::{AttackKind, BudgetSet};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{NetworkModel, FEATURE_DIM};
use crate::svm::{
    support_set, train_ovr, training_accuracy, FeatureMatrix, SupportSet, SvmConfig, SvmModel,
};

/// Features of exactly the correctly classified test samples, row order
/// matching ascending test index.
#[derive(Clone, Debug)]
pub struct FeatureBank {
    pub indices: Vec<usize>,
    pub labels: Vec<u8>,
    /// Row-major `[indices.len(), dim]`.
    pub features: Vec<f32>,
    pub dim: usize,
}

impl FeatureBank {
    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn matrix(&self) -> Result<FeatureMatrix> {
        FeatureMatrix::from_rows_f32(&self.features, self.n(), self.dim)
    }
}

/// Forward-passes the whole test split and keeps the 256-dim feature vector
/// of every sample the model classifies correctly.
pub fn extract_features(model: &NetworkModel<f32>, test: &Dataset) -> Result<FeatureBank> {
    let rows: Result<Vec<Option<(usize, u8, Vec<f32>)>>> = (0..test.len())
        .into_par_iter()
        .map(|i| {
            let rec = model.forward(&test.image(i)?)?;
            if rec.predicted() == test.label(i) {
                Ok(Some((i, test.labels[i], rec.features.into_data())))
            } else {
                Ok(None)
            }
        })
        .collect();
    let mut bank = FeatureBank {
        indices: Vec::new(),
        labels: Vec::new(),
        features: Vec::new(),
        dim: FEATURE_DIM,
    };
    for row in rows?.into_iter().flatten() {
        bank.indices.push(row.0);
        bank.labels.push(row.1);
        bank.features.extend(row.2);
    }
    Ok(bank)
}

/// The PAS for one SVM configuration: the trained model, its support set in
/// bank-row space, and the same set mapped back to test-set indices.
#[derive(Clone, Debug)]
pub struct PasSelection {
    pub svm: SvmModel,
    pub support: SupportSet,
    /// Support rows mapped through `bank.indices`; sorted ascending.
    pub test_indices: Vec<usize>,
    pub train_accuracy: f64,
}

/// Trains the one-vs-rest SVM on the bank and maps its support vectors back
/// to test-set indices.
pub fn select_pas(bank: &FeatureBank, cfg: &SvmConfig) -> Result<PasSelection> {
    if bank.n() == 0 {
        return Err(Error::Degenerate("feature bank is empty".into()));
    }
    let matrix = bank.matrix()?;
    let svm = train_ovr(&matrix, &bank.labels, cfg)?;
    let train_accuracy = training_accuracy(&svm, &matrix, &bank.labels)?;
    let support = support_set(&svm, cfg);
    let test_indices: Vec<usize> = support.indices.iter().map(|&row| bank.indices[row]).collect();
    Ok(PasSelection { svm, support, test_indices, train_accuracy })
}

/// One row of the coverage table.
#[derive(Clone, Debug)]
pub struct CoverageRow {
    pub attack: AttackKind,
    pub budget: f64,
    pub c: f64,
    pub n_sv: usize,
    pub n_adv: usize,
    pub n_common: usize,
    /// `n_sv / search_space`.
    pub sv_fraction: f64,
    /// `n_common / n_adv`; undefined when no adversarial samples exist.
    pub coverage_fraction: Option<f64>,
    /// `coverage_fraction / sv_fraction`.
    pub enrichment: Option<f64>,
}

fn intersection_sorted(a: &[usize], b: &BTreeSet<usize>) -> usize {
    // Merge-style count: `a` is sorted, BTreeSet iterates sorted.
    let mut count = 0;
    let mut ai = a.iter().peekable();
    for &bv in b {
        while let Some(&&av) = ai.peek() {
            if av < bv {
                ai.next();
            } else {
                break;
            }
        }
        if let Some(&&av) = ai.peek() {
            if av == bv {
                count += 1;
                ai.next();
            }
        }
    }
    count
}

/// Intersects the PAS with each budget's adversarial set.
///
/// `search_space` is the sorted list of correctly classified test indices;
/// both the PAS and every adversarial set must be subsets of it, otherwise a
/// pipeline stage disagreed about the sample universe.
pub fn coverage(
    pas_test_indices: &[usize],
    sweeps: &[BudgetSet],
    attack: AttackKind,
    c: f64,
    search_space: &[usize],
) -> Result<Vec<CoverageRow>> {
    let universe: BTreeSet<usize> = search_space.iter().copied().collect();
    if let Some(&bad) = pas_test_indices.iter().find(|i| !universe.contains(i)) {
        return Err(Error::Consistency(format!(
            "PAS index {bad} is not a correctly classified test index"
        )));
    }
    let sv_fraction = pas_test_indices.len() as f64 / search_space.len() as f64;
    let mut rows = Vec::with_capacity(sweeps.len());
    for set in sweeps {
        if let Some(&bad) = set.indices.iter().find(|i| !universe.contains(i)) {
            return Err(Error::Consistency(format!(
                "adversarial index {bad} (budget {}) is outside the search space",
                set.budget
            )));
        }
        let n_common = intersection_sorted(pas_test_indices, &set.indices);
        // Cross-check the merge count with the obvious quadratic scan.
        let naive = pas_test_indices.iter().filter(|i| set.indices.contains(i)).count();
        assert_eq!(n_common, naive, "intersection counts disagree");
        let n_adv = set.indices.len();
        let coverage_fraction = (n_adv > 0).then(|| n_common as f64 / n_adv as f64);
        let enrichment = coverage_fraction.map(|cf| cf / sv_fraction);
        rows.push(CoverageRow {
            attack,
            budget: set.budget,
            c,
            n_sv: pas_test_indices.len(),
            n_adv,
            n_common,
            sv_fraction,
            coverage_fraction,
            enrichment,
        });
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

/// Writes coverage rows as CSV with the column set of [`CoverageRow`].
pub fn write_coverage_csv(rows: &[CoverageRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "attack,budget,c,n_sv,n_adv,n_common,sv_fraction,coverage_fraction,enrichment")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.6},{},{}",
            r.attack.name(),
            r.budget,
            r.c,
            r.n_sv,
            r.n_adv,
            r.n_common,
            r.sv_fraction,
            opt(r.coverage_fraction),
            opt(r.enrichment)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Per-C summary shown in the table header block.
#[derive(Clone, Debug)]
pub struct CSummary {
    pub c: f64,
    pub train_accuracy: f64,
    pub n_sv: usize,
}

/// Renders the coverage data as an aligned text table: one header block with
/// the per-C SVM summaries, then one block per attack with budgets as rows
/// and one "samples in common" column per C.
pub fn render_table(
    summaries: &[CSummary],
    rows: &[CoverageRow],
    search_space: usize,
) -> String {
    let mut out = String::new();
    let col = 10usize;
    let label_w = 42usize;

    let header = |label: &str, cells: &[String]| -> String {
        let mut line = format!("{label:<label_w$}");
        for cell in cells {
            line.push_str(&format!(" | {cell:>col$}"));
        }
        line.push('\n');
        line
    };

    out.push_str(&format!("search space: {search_space} correctly classified test samples\n\n"));
    let c_cells: Vec<String> = summaries.iter().map(|s| format!("{}", s.c)).collect();
    out.push_str(&header("SVM C parameter", &c_cells));
    let acc_cells: Vec<String> =
        summaries.iter().map(|s| format!("{:.2}", s.train_accuracy * 100.0)).collect();
    out.push_str(&header("SVM training accuracy (%)", &acc_cells));
    let sv_cells: Vec<String> = summaries.iter().map(|s| s.n_sv.to_string()).collect();
    out.push_str(&header("Total number of SV", &sv_cells));

    for attack in [AttackKind::Ifgsm, AttackKind::Deepfool] {
        let attack_rows: Vec<&CoverageRow> = rows.iter().filter(|r| r.attack == attack).collect();
        if attack_rows.is_empty() {
            continue;
        }
        let mut budgets: Vec<f64> = attack_rows.iter().map(|r| r.budget).collect();
        budgets.sort_by(|a, b| a.partial_cmp(b).unwrap());
        budgets.dedup();
        out.push('\n');
        out.push_str(&format!("{}\n", attack.name()));
        let budget_label = match attack {
            AttackKind::Ifgsm => "epsilon",
            AttackKind::Deepfool => "delta",
        };
        out.push_str(&header(
            &format!("{budget_label:<10} adversarial found"),
            &c_cells.iter().map(|c| format!("C={c}")).collect::<Vec<_>>(),
        ));
        for &budget in &budgets {
            let mut found = None;
            let mut commons = Vec::new();
            for s in summaries {
                let row = attack_rows
                    .iter()
                    .find(|r| r.budget == budget && r.c == s.c)
                    .copied();
                if let Some(row) = row {
                    found.get_or_insert(row.n_adv);
                    commons.push(row.n_common.to_string());
                } else {
                    commons.push("-".to_string());
                }
            }
            let label = format!("{budget:<10} {:>17}", found.map_or(0, |f| f));
            out.push_str(&header(&label, &commons));
        }
    }
    out
}
