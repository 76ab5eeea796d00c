//! The dual coordinate-descent solver against the brute-force QP oracle and
//! the dual-feasibility/KKT contracts, over many random small instances.

mod common;

use margin_probe::svm::{kkt_residual, train_binary, FeatureMatrix, SvmConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solver_cfg(c: f64) -> SvmConfig {
    SvmConfig { tol: 1e-8, ..SvmConfig::new(c) }
}

#[test]
fn dual_objective_matches_qp_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut checked = 0;
    while checked < 60 {
        let n = rng.gen_range(4..=30);
        let d = rng.gen_range(1..=5);
        let c = [0.3, 1.0, 4.0, 10.0][checked % 4];
        let separation = [0.0, 0.4, 1.2][checked % 3];
        let (feats, y) = common::random_binary_instance(&mut rng, n, d, separation);
        let x = FeatureMatrix::from_rows_f64(&feats, n, d).unwrap();
        let sol = train_binary(&x, &y, &solver_cfg(c)).unwrap();
        let (_, oracle_obj) = common::qp_oracle(&common::augment(&feats, n, d), &y, c, 150_000);
        let rel = (sol.objective - oracle_obj).abs() / oracle_obj.abs().max(1.0);
        assert!(
            rel <= 1e-4,
            "instance {checked} (n={n}, d={d}, C={c}): solver {} vs oracle {oracle_obj} (rel {rel})",
            sol.objective
        );
        checked += 1;
    }
}

#[test]
fn oracle_alphas_agree_on_the_two_point_problem() {
    let (alphas, obj) = common::qp_oracle(
        &vec![vec![-1.0, 1.0], vec![1.0, 1.0]],
        &[-1.0, 1.0],
        10.0,
        200_000,
    );
    assert!((alphas[0] - 0.5).abs() < 1e-6, "{alphas:?}");
    assert!((alphas[1] - 0.5).abs() < 1e-6);
    assert!((obj - 0.5).abs() < 1e-8);
    let x = FeatureMatrix::from_rows_f64(&[-1.0, 1.0], 2, 1).unwrap();
    let sol = train_binary(&x, &[-1.0, 1.0], &solver_cfg(10.0)).unwrap();
    assert!((sol.objective - obj).abs() < 1e-6);
}

#[test]
fn solutions_satisfy_feasibility_reconstruction_and_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for case in 0..50 {
        let n = rng.gen_range(4..=30);
        let d = rng.gen_range(1..=5);
        let c = [0.5, 2.0, 8.0][case % 3];
        let (feats, y) = common::random_binary_instance(&mut rng, n, d, 0.3);
        let x = FeatureMatrix::from_rows_f64(&feats, n, d).unwrap();
        let cfg = solver_cfg(c);
        let sol = train_binary(&x, &y, &cfg).unwrap();

        // Dual feasibility is exact: updates clamp into [0, C].
        for &a in &sol.alphas {
            assert!((0.0..=c).contains(&a), "case {case}: alpha {a} outside [0, {c}]");
        }

        // w reconstructs from the alphas.
        let mut w = vec![0.0f64; d + 1];
        for i in 0..n {
            for (wv, &xv) in w.iter_mut().zip(x.row(i)) {
                *wv += sol.alphas[i] * y[i] * xv;
            }
        }
        for (recon, solver) in w.iter().zip(&sol.weights) {
            assert!(
                (recon - solver).abs() <= 1e-5 * solver.abs().max(1.0),
                "case {case}: w reconstruction {recon} vs {solver}"
            );
        }

        // KKT complementarity within the solver tolerance.
        let residual = kkt_residual(&x, &y, &sol.alphas, &sol.weights, c);
        assert!(residual <= cfg.tol, "case {case}: KKT residual {residual}");

        // Margin violators are bound support vectors.
        for i in 0..n {
            let margin = y[i] * sol.decision(x.row(i));
            if margin < 0.0 {
                assert!(
                    (sol.alphas[i] - c).abs() <= cfg.tol,
                    "case {case}: violator {i} has alpha {} != C", sol.alphas[i]
                );
            }
        }
    }
}
