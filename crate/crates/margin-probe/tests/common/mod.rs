//! Helpers shared by the integration suites: the brute-force QP oracle the
//! SVM solver is checked against, random problem generators, and MNIST
//! data-directory discovery.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Projected-gradient ascent on the boxed L1-hinge dual
/// `max sum(alpha) - 1/2 alpha' Q alpha, 0 <= alpha <= C` with
/// `Q_ij = y_i y_j x_i . x_j` over bias-augmented rows. Deliberately naive
/// and independent of the coordinate-descent implementation under test.
pub fn qp_oracle(rows: &[Vec<f64>], y: &[f64], c: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = rows.len();
    let mut q = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(&a, &b)| a * b).sum();
            q[i * n + j] = y[i] * y[j] * dot;
        }
    }
    // Gershgorin bound on the largest eigenvalue gives a safe step size.
    let lip = (0..n)
        .map(|i| (0..n).map(|j| q[i * n + j].abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let step = 1.0 / lip;
    let mut alpha = vec![0.0f64; n];
    for _ in 0..iters {
        for i in 0..n {
            let qa: f64 = (0..n).map(|j| q[i * n + j] * alpha[j]).sum();
            alpha[i] = (alpha[i] + step * (1.0 - qa)).clamp(0.0, c);
        }
    }
    let mut obj = alpha.iter().sum::<f64>();
    for i in 0..n {
        for j in 0..n {
            obj -= 0.5 * alpha[i] * q[i * n + j] * alpha[j];
        }
    }
    (alpha, obj)
}

/// Random binary problem with `n` samples in `d` dimensions whose classes are
/// shifted apart by `separation` (0 gives heavy overlap, 1+ is mostly
/// separable).
pub fn random_binary_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    separation: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut feats = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        for _ in 0..d {
            feats.push(rng.gen_range(-1.0..1.0) + separation * label);
        }
        y.push(label);
    }
    (feats, y)
}

/// Bias-augmented copies of raw rows, matching what the solver trains on.
pub fn augment(feats: &[f64], n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut row = feats[i * d..(i + 1) * d].to_vec();
            row.push(1.0);
            row
        })
        .collect()
}

/// Locates the MNIST directory: `$MARGIN_PROBE_DATA`, then `data/mnist`
/// walking up from the crate.
pub fn mnist_dir() -> Option<PathBuf> {
    if let Some(dir) = std::env::var_os("MARGIN_PROBE_DATA") {
        let dir = PathBuf::from(dir);
        if dir.is_dir() {
            return Some(dir);
        }
    }
    let mut cursor = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    loop {
        let candidate = cursor.join("data/mnist");
        if candidate.join("train-images-idx3-ubyte").is_file()
            || candidate.join("train-images-idx3-ubyte.gz").is_file()
        {
            return Some(candidate);
        }
        if !cursor.pop() {
            return None;
        }
    }
}

pub fn require_mnist() -> PathBuf {
    mnist_dir().expect(
        "MNIST data not found: place the four canonical IDX files in data/mnist \
         or point MARGIN_PROBE_DATA at them",
    )
}
