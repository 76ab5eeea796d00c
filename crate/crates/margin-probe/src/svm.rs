//! One-vs-rest soft-margin linear SVM trained by dual coordinate descent.
//!
//! The binary subproblem is the classical L1-hinge dual
//!
//! ```text
//! max  sum(alpha) - 1/2 || sum_i alpha_i y_i x̂_i ||^2
//! s.t. 0 <= alpha_i <= C
//! ```
//!
//! over bias-augmented features `x̂ = (x, 1)`. Appending the constant 1
//! removes the usual equality constraint `sum alpha_i y_i = 0`, so plain
//! coordinate updates apply; the bias picks up a little regularization,
//! which is negligible at these scales. The sweep order is fixed (0..n), so
//! training is deterministic. Support vectors are the samples whose alpha
//! exceeds a small threshold in any of the binary problems.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SvmConfig {
    /// Soft/hard-margin dial: larger C penalizes margin violations harder.
    pub c: f64,
    /// Maximum projected-gradient KKT violation accepted at convergence.
    pub tol: f64,
    pub max_passes: usize,
    /// Alphas above this count as support vectors; defaults to `1e-6 * C`.
    pub sv_alpha_threshold: Option<f64>,
}

impl SvmConfig {
    pub fn new(c: f64) -> Self {
        SvmConfig { c, tol: 1e-3, max_passes: 20_000, sv_alpha_threshold: None }
    }

    pub fn threshold(&self) -> f64 {
        self.sv_alpha_threshold.unwrap_or(1e-6 * self.c)
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "svm needs C > 0 and tol > 0, got {} and {}",
                self.c, self.tol
            )));
        }
        Ok(())
    }
}

/// Row-major bias-augmented feature matrix in f64: each row is `(x, 1)`.
#[derive(Clone, Debug)]
pub struct FeatureMatrix {
    n: usize,
    /// Raw feature dimension, excluding the bias column.
    dim: usize,
    rows: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows_f32(features: &[f32], n: usize, dim: usize) -> Result<Self> {
        if features.len() != n * dim {
            return Err(Error::Shape {
                op: "feature_matrix",
                detail: format!("{} values cannot form {n} rows of {dim}", features.len()),
            });
        }
        let mut rows = Vec::with_capacity(n * (dim + 1));
        for r in 0..n {
            rows.extend(features[r * dim..(r + 1) * dim].iter().map(|&v| v as f64));
            rows.push(1.0);
        }
        Ok(FeatureMatrix { n, dim, rows })
    }

    pub fn from_rows_f64(features: &[f64], n: usize, dim: usize) -> Result<Self> {
        if features.len() != n * dim {
            return Err(Error::Shape {
                op: "feature_matrix",
                detail: format!("{} values cannot form {n} rows of {dim}", features.len()),
            });
        }
        let mut rows = Vec::with_capacity(n * (dim + 1));
        for r in 0..n {
            rows.extend_from_slice(&features[r * dim..(r + 1) * dim]);
            rows.push(1.0);
        }
        Ok(FeatureMatrix { n, dim, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Bias-augmented row, length `dim + 1`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * (self.dim + 1)..(i + 1) * (self.dim + 1)]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Solution of one binary subproblem.
#[derive(Clone, Debug)]
pub struct BinarySvm {
    pub alphas: Vec<f64>,
    /// Bias-augmented primal weights, length `dim + 1`.
    pub weights: Vec<f64>,
    /// Dual objective at convergence.
    pub objective: f64,
    pub passes: usize,
}

impl BinarySvm {
    pub fn decision(&self, augmented_row: &[f64]) -> f64 {
        dot(&self.weights, augmented_row)
    }
}

/// Trains one binary L1-hinge SVM with labels in {-1, +1} by dual coordinate
/// descent. Converges when a full update pass and a subsequent read-only pass
/// both stay within `tol` of the KKT conditions.
pub fn train_binary(x: &FeatureMatrix, y: &[f64], cfg: &SvmConfig) -> Result<BinarySvm> {
    cfg.validate()?;
    let n = x.n();
    if y.len() != n {
        return Err(Error::Shape {
            op: "train_binary",
            detail: format!("{n} rows but {} labels", y.len()),
        });
    }
    if n < 2 {
        return Err(Error::Degenerate(format!("need at least 2 samples, got {n}")));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Value("binary labels must be +1 or -1".into()));
    }
    if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return Err(Error::Degenerate("both classes must be present".into()));
    }

    let c = cfg.c;
    let q_diag: Vec<f64> = (0..n).map(|i| dot(x.row(i), x.row(i))).collect();
    let mut alphas = vec![0.0f64; n];
    let mut w = vec![0.0f64; x.dim() + 1];
    let mut passes = 0;
    let mut residual = f64::INFINITY;
    // The sweep order is reshuffled every pass from a fixed seed: plain
    // 0..n order can stall on correlated neighbours, while the seeded
    // permutation sequence keeps training fully deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0501);

    while passes < cfg.max_passes {
        // Update pass.
        order.shuffle(&mut rng);
        let mut max_viol = 0.0f64;
        for &i in &order {
            let xi = x.row(i);
            let g = y[i] * dot(&w, xi) - 1.0;
            let a = alphas[i];
            let pg = if a <= 0.0 {
                g.min(0.0)
            } else if a >= c {
                g.max(0.0)
            } else {
                g
            };
            max_viol = max_viol.max(pg.abs());
            if pg != 0.0 {
                let a_new = (a - g / q_diag[i]).clamp(0.0, c);
                if a_new != a {
                    let shift = (a_new - a) * y[i];
                    for (wv, &xv) in w.iter_mut().zip(xi) {
                        *wv += shift * xv;
                    }
                    alphas[i] = a_new;
                }
            }
        }
        passes += 1;
        residual = max_viol;
        if max_viol > cfg.tol {
            continue;
        }
        // Read-only verification against the final w, so the reported
        // solution itself satisfies the KKT tolerance.
        let verify = kkt_residual(x, y, &alphas, &w, c);
        residual = verify;
        if verify <= cfg.tol {
            let objective = alphas.iter().sum::<f64>() - 0.5 * dot(&w, &w);
            return Ok(BinarySvm { alphas, weights: w, objective, passes });
        }
    }
    Err(Error::Convergence { passes, residual })
}

/// Maximum projected-gradient violation of the boxed dual at `(alphas, w)`.
pub fn kkt_residual(x: &FeatureMatrix, y: &[f64], alphas: &[f64], w: &[f64], c: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..x.n() {
        let g = y[i] * dot(w, x.row(i)) - 1.0;
        let a = alphas[i];
        let pg = if a <= 0.0 {
            g.min(0.0)
        } else if a >= c {
            g.max(0.0)
        } else {
            g
        };
        worst = worst.max(pg.abs());
    }
    worst
}

/// One-vs-rest model: one binary solution per class present in the labels.
#[derive(Clone, Debug)]
pub struct SvmModel {
    /// Distinct class ids, ascending; `binaries[i]` separates `classes[i]`
    /// from the rest.
    pub classes: Vec<u8>,
    pub binaries: Vec<BinarySvm>,
    pub c: f64,
    pub tol: f64,
    pub feature_dim: usize,
    pub n_samples: usize,
}

/// Trains class-vs-rest subproblems for every class present. The binary
/// problems are independent and train in parallel; results are ordered by
/// class id, so the model is deterministic.
pub fn train_ovr(x: &FeatureMatrix, labels: &[u8], cfg: &SvmConfig) -> Result<SvmModel> {
    cfg.validate()?;
    if labels.len() != x.n() {
        return Err(Error::Shape {
            op: "train_ovr",
            detail: format!("{} rows but {} labels", x.n(), labels.len()),
        });
    }
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Degenerate("one-vs-rest needs at least 2 distinct labels".into()));
    }
    let binaries: Result<Vec<BinarySvm>> = classes
        .par_iter()
        .map(|&class| {
            let y: Vec<f64> =
                labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            train_binary(x, &y, cfg).map_err(|e| match e {
                Error::Convergence { passes, residual } => Error::Numeric(format!(
                    "class {class}: no convergence after {passes} passes (residual {residual:.3e})"
                )),
                other => other,
            })
        })
        .collect();
    Ok(SvmModel {
        classes,
        binaries: binaries?,
        c: cfg.c,
        tol: cfg.tol,
        feature_dim: x.dim(),
        n_samples: x.n(),
    })
}

/// Argmax of the per-class decision values; ties resolve to the lowest class.
pub fn predict(model: &SvmModel, feature: &[f64]) -> Result<u8> {
    if feature.len() != model.feature_dim {
        return Err(Error::Shape {
            op: "svm_predict",
            detail: format!(
                "feature has {} components, model expects {}",
                feature.len(),
                model.feature_dim
            ),
        });
    }
    let mut augmented = feature.to_vec();
    augmented.push(1.0);
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (slot, binary) in model.binaries.iter().enumerate() {
        let v = binary.decision(&augmented);
        if v > best_val {
            best_val = v;
            best = slot;
        }
    }
    Ok(model.classes[best])
}

/// Fraction of rows whose predicted class matches the label.
pub fn training_accuracy(model: &SvmModel, x: &FeatureMatrix, labels: &[u8]) -> Result<f64> {
    let hits: Result<Vec<bool>> = (0..x.n())
        .into_par_iter()
        .map(|i| {
            let row = x.row(i);
            let mut best = 0usize;
            let mut best_val = f64::NEG_INFINITY;
            for (slot, binary) in model.binaries.iter().enumerate() {
                let v = binary.decision(row);
                if v > best_val {
                    best_val = v;
                    best = slot;
                }
            }
            Ok(model.classes[best] == labels[i])
        })
        .collect();
    let hits = hits?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / x.n() as f64)
}

/// Union support set: rows whose alpha exceeds the threshold in any class.
#[derive(Clone, Debug)]
pub struct SupportSet {
    /// Sorted ascending, no duplicates.
    pub indices: Vec<usize>,
    /// Per class id: the rows supporting that class's boundary.
    pub per_class: Vec<(u8, Vec<usize>)>,
}

pub fn support_set(model: &SvmModel, cfg: &SvmConfig) -> SupportSet {
    let threshold = cfg.threshold();
    let mut union = vec![false; model.n_samples];
    let mut per_class = Vec::with_capacity(model.binaries.len());
    for (&class, binary) in model.classes.iter().zip(&model.binaries) {
        let mut members = Vec::new();
        for (i, &a) in binary.alphas.iter().enumerate() {
            if a > threshold {
                union[i] = true;
                members.push(i);
            }
        }
        per_class.push((class, members));
    }
    let indices = union.iter().enumerate().filter_map(|(i, &sv)| sv.then_some(i)).collect();
    SupportSet { indices, per_class }
}

// --- model dump -------------------------------------------------------------
//
// One file per trained model: a `#`-prefixed JSON-like header followed by
// `class,index,alpha` rows for every nonzero alpha.

pub fn write_svm_csv(model: &SvmModel, path: impl AsRef<Path>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "# {{\"C\": {}, \"tol\": {}, \"feature_dim\": {}, \"n_samples\": {}}}",
        model.c, model.tol, model.feature_dim, model.n_samples
    )?;
    writeln!(w, "class,index,alpha")?;
    for (&class, binary) in model.classes.iter().zip(&model.binaries) {
        for (i, &a) in binary.alphas.iter().enumerate() {
            if a != 0.0 {
                writeln!(w, "{class},{i},{a}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows of a dumped model: `(class, row index, alpha)` in file order.
pub fn read_svm_csv(path: impl AsRef<Path>) -> Result<(String, Vec<(u8, usize, f64)>)> {
    let file = std::fs::File::open(path.as_ref())?;
    let mut lines = std::io::BufReader::new(file).lines();
    let header = match lines.next() {
        Some(line) => {
            let line = line?;
            if !line.starts_with('#') {
                return Err(Error::Format("svm dump is missing its header line".into()));
            }
            line
        }
        None => return Err(Error::Format("svm dump is empty".into())),
    };
    match lines.next() {
        Some(cols) => {
            if cols? != "class,index,alpha" {
                return Err(Error::Format("svm dump is missing the column line".into()));
            }
        }
        None => return Err(Error::Format("svm dump is missing the column line".into())),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let (Some(c), Some(i), Some(a)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Format(format!("bad svm dump row: {line}")));
        };
        let class: u8 = c.parse().map_err(|_| Error::Format(format!("bad class: {line}")))?;
        let index: usize = i.parse().map_err(|_| Error::Format(format!("bad index: {line}")))?;
        let alpha: f64 = a.parse().map_err(|_| Error::Format(format!("bad alpha: {line}")))?;
        rows.push((class, index, alpha));
    }
    Ok((header, rows))
}
