//! The dual coordinate-descent SVM against a brute-force projected-gradient
//! QP solver on small random instances, plus the classic two-point problem
//! whose solution is known in closed form.
//!
//!     cargo run --release --example svm_toy

use margin_probe::svm::{train_binary, FeatureMatrix, SvmConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Projected gradient ascent on the boxed dual, independent of the
/// coordinate-descent path: alpha <- clip(alpha + step (1 - Q alpha)).
fn qp_oracle(rows: &[&[f64]], y: &[f64], c: f64, iters: usize) -> f64 {
    let n = rows.len();
    let mut q = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = rows[i].iter().zip(rows[j]).map(|(&a, &b)| a * b).sum();
            q[i * n + j] = y[i] * y[j] * dot;
        }
    }
    let lip = (0..n)
        .map(|i| (0..n).map(|j| q[i * n + j].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let step = 1.0 / lip.max(1e-12);
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
    obj
}

fn main() {
    // Two points, one dimension: the max-margin separator is w = (1, 0)
    // with both points as support vectors and alphas (1/2, 1/2).
    let x = FeatureMatrix::from_rows_f64(&[-1.0, 1.0], 2, 1).unwrap();
    let cfg = SvmConfig { tol: 1e-6, ..SvmConfig::new(10.0) };
    let sol = train_binary(&x, &[-1.0, 1.0], &cfg).unwrap();
    println!(
        "two-point toy: alphas = [{:.4}, {:.4}], w = [{:.4}, {:.4}], objective = {:.4}",
        sol.alphas[0], sol.alphas[1], sol.weights[0], sol.weights[1], sol.objective
    );
    assert!((sol.alphas[0] - 0.5).abs() < 1e-5 && (sol.weights[0] - 1.0).abs() < 1e-5);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let n = rng.gen_range(4..=20);
        let d = rng.gen_range(1..=4);
        let c = [0.5, 1.0, 5.0][case % 3];
        let mut feats = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = if i % 2 == 0 { 1.0 } else { -1.0 };
            for _ in 0..d {
                feats.push(rng.gen_range(-1.0..1.0) + 0.4 * label);
            }
            y.push(label);
        }
        let x = FeatureMatrix::from_rows_f64(&feats, n, d).unwrap();
        let sol = train_binary(&x, &y, &SvmConfig { tol: 1e-8, ..SvmConfig::new(c) }).unwrap();
        let aug_rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
        let refs: Vec<&[f64]> = aug_rows.iter().map(|r| r.as_slice()).collect();
        let oracle = qp_oracle(&refs, &y, c, 200_000);
        let rel = (sol.objective - oracle).abs() / oracle.abs().max(1.0);
        worst = worst.max(rel);
        println!(
            "case {case:>2}: n={n:>2} d={d} C={c:<3} dual={:.6} oracle={:.6} rel={rel:.2e}",
            sol.objective, oracle
        );
    }
    println!("worst relative objective gap: {worst:.2e}");
    assert!(worst < 1e-4, "solver disagrees with the QP oracle");
    println!("svm toy checks passed");
}
