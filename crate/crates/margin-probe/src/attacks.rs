//! White-box attacks: iterative FGSM under an l-infinity budget and
//! multiclass DeepFool, plus a sweep harness that produces per-budget
//! adversarial index sets over the correctly classified test samples.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::WhiteBoxModel;
use crate::tensor::{argmax, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackKind {
    Ifgsm,
    Deepfool,
}

impl AttackKind {
    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::Ifgsm => "ifgsm",
            AttackKind::Deepfool => "deepfool",
        }
    }
}

/// Parameters for one attack run. `epsilon`/`steps` drive iFGSM (step size
/// `alpha = epsilon / steps`); `overshoot`, `delta_budget`, and `max_iter`
/// drive DeepFool.
#[derive(Clone, Debug)]
pub struct AttackConfig {
    pub kind: AttackKind,
    pub epsilon: f64,
    pub steps: usize,
    pub overshoot: f64,
    pub delta_budget: f64,
    pub max_iter: usize,
}

impl AttackConfig {
    pub fn ifgsm(epsilon: f64) -> Self {
        AttackConfig {
            kind: AttackKind::Ifgsm,
            epsilon,
            steps: 10,
            overshoot: 0.02,
            delta_budget: f64::INFINITY,
            max_iter: 50,
        }
    }

    pub fn deepfool(delta_budget: f64) -> Self {
        AttackConfig {
            kind: AttackKind::Deepfool,
            epsilon: 0.0,
            steps: 10,
            overshoot: 0.02,
            delta_budget,
            max_iter: 50,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            AttackKind::Ifgsm => {
                if !(self.epsilon >= 0.0) || self.steps == 0 {
                    return Err(Error::Config(format!(
                        "ifgsm needs epsilon >= 0 and steps >= 1, got {} and {}",
                        self.epsilon, self.steps
                    )));
                }
            }
            AttackKind::Deepfool => {
                if !(self.overshoot >= 0.0) || self.max_iter == 0 || !(self.delta_budget >= 0.0) {
                    return Err(Error::Config(format!(
                        "deepfool needs overshoot >= 0, max_iter >= 1, delta budget >= 0, got {}, {}, {}",
                        self.overshoot, self.max_iter, self.delta_budget
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-sample attack result.
#[derive(Clone, Debug)]
pub struct AttackOutcome {
    pub sample_index: usize,
    pub success: bool,
    pub x_adv: Tensor<f32>,
    pub perturbation_linf: f64,
    pub iterations_used: usize,
    pub final_label: usize,
}

fn sign(v: f32) -> f32 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn linf_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |acc, (&x, &y)| acc.max(((x - y) as f64).abs()))
}

/// One FGSM step: `clip_[0,1](x + step_size * sign(grad_x loss))`, with
/// `sign(0) = 0`.
pub fn fgsm_step<M: WhiteBoxModel + ?Sized>(
    model: &M,
    x: &Tensor<f32>,
    y_true: usize,
    step_size: f32,
) -> Result<Tensor<f32>> {
    let grad = model.input_gradient(x, y_true)?;
    let data = x
        .data()
        .iter()
        .zip(grad.data())
        .map(|(&px, &g)| (px + step_size * sign(g)).clamp(0.0, 1.0))
        .collect();
    Tensor::from_vec(x.shape().to_vec(), data)
}

/// Iterative FGSM: `steps` sign steps of size `epsilon / steps`, each
/// followed by projection onto `[x - eps, x + eps] ∩ [0, 1]` per pixel.
/// Exits early at the first iterate whose label flips.
pub fn ifgsm<M: WhiteBoxModel + ?Sized>(
    model: &M,
    x: &Tensor<f32>,
    y_true: usize,
    cfg: &AttackConfig,
) -> Result<AttackOutcome> {
    cfg.validate()?;
    let eps = cfg.epsilon as f32;
    let alpha = eps / cfg.steps as f32;
    let lo: Vec<f32> = x.data().iter().map(|&v| (v - eps).max(0.0)).collect();
    let hi: Vec<f32> = x.data().iter().map(|&v| (v + eps).min(1.0)).collect();

    let mut current = x.clone();
    let mut success = false;
    let mut final_label = y_true;
    let mut iterations_used = 0;
    for t in 1..=cfg.steps {
        // One forward pass serves both the previous iterate's flip check and
        // this step's gradient.
        let (grad, logits) = model.input_gradient_with_logits(&current, y_true)?;
        if t > 1 {
            let label = argmax(logits.data());
            if label != y_true {
                success = true;
                final_label = label;
                iterations_used = t - 1;
                break;
            }
        }
        let data = current
            .data()
            .iter()
            .zip(grad.data())
            .zip(lo.iter().zip(&hi))
            .map(|((&px, &g), (&l, &h))| (px + alpha * sign(g)).clamp(0.0, 1.0).clamp(l, h))
            .collect();
        current = Tensor::from_vec(x.shape().to_vec(), data)?;
        iterations_used = t;
    }
    if !success {
        let label = model.predict(&current)?;
        final_label = label;
        success = label != y_true;
    }

    let linf = linf_distance(current.data(), x.data());
    if linf > cfg.epsilon + 1e-6 {
        return Err(Error::Numeric(format!(
            "ifgsm left its budget: linf {linf} > epsilon {}",
            cfg.epsilon
        )));
    }
    if current.data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::Numeric("ifgsm produced a pixel outside [0, 1]".into()));
    }
    Ok(AttackOutcome {
        sample_index: 0,
        success,
        x_adv: current,
        perturbation_linf: linf,
        iterations_used,
        final_label,
    })
}

/// Multiclass DeepFool. Iterates the standard linearization: at the current
/// iterate with class `c`, picks the class `k` minimizing
/// `|f_k - f_c| / ||grad f_k - grad f_c||_2` and moves by the projection onto
/// that locally linearized boundary, until the accumulated move flips the
/// label or `max_iter` is hit. The net perturbation is the accumulated move
/// scaled by `1 + overshoot`; success additionally requires its l-infinity
/// norm to stay within `delta_budget`.
///
/// Unlike iFGSM, the returned `x_adv = x + delta` is not clipped to the pixel
/// box: the attack measures distance to the decision boundary, and on MNIST
/// most pixels sit saturated at 0 or 1, so clipping would erase the bulk of
/// the perturbation and undo virtually every flip.
pub fn deepfool<M: WhiteBoxModel + ?Sized>(
    model: &M,
    x: &Tensor<f32>,
    cfg: &AttackConfig,
) -> Result<AttackOutcome> {
    cfg.validate()?;
    let classes = model.num_classes();
    let px = x.len();
    let original = argmax(model.logits(x)?.data());
    let factor = 1.0 + cfg.overshoot;

    // The running iterate carries the overshoot, exactly like the reference
    // algorithm: piecewise-linear models land the plain projection on the
    // boundary without crossing it, and the overshoot is what pushes through.
    let mut r_total = vec![0.0f64; px];
    let mut current = x.clone();
    let mut iterations_used = 0;

    for _ in 1..=cfg.max_iter {
        let logits = model.logits(&current)?;
        if argmax(logits.data()) != original {
            break;
        }
        let jacobian = model.class_logit_gradients(&current)?;
        let grad_c = &jacobian.data()[original * px..(original + 1) * px];
        let f_c = logits.data()[original] as f64;

        let mut best: Option<(f64, usize, f64)> = None; // (ratio, class, norm_sq)
        for k in 0..classes {
            if k == original {
                continue;
            }
            let grad_k = &jacobian.data()[k * px..(k + 1) * px];
            let mut norm_sq = 0.0f64;
            for (&gk, &gc) in grad_k.iter().zip(grad_c) {
                let d = (gk - gc) as f64;
                norm_sq += d * d;
            }
            if norm_sq < 1e-30 {
                continue;
            }
            let gap = (logits.data()[k] as f64 - f_c).abs();
            let ratio = gap / norm_sq.sqrt();
            if best.map_or(true, |(r, _, _)| ratio < r) {
                best = Some((ratio, k, norm_sq));
            }
        }
        let Some((_, k_star, norm_sq)) = best else {
            break; // every boundary direction vanished (e.g. all-zero model)
        };
        let grad_k = &jacobian.data()[k_star * px..(k_star + 1) * px];
        let gap = (logits.data()[k_star] as f64 - f_c).abs();
        let coef = gap / norm_sq;
        for ((r, &gk), &gc) in r_total.iter_mut().zip(grad_k).zip(grad_c) {
            *r += coef * (gk - gc) as f64;
        }
        iterations_used += 1;
        let stepped: Vec<f32> = x
            .data()
            .iter()
            .zip(&r_total)
            .map(|(&xv, &r)| (xv as f64 + factor * r) as f32)
            .collect();
        current = Tensor::from_vec(x.shape().to_vec(), stepped)?;
    }

    let mut linf = 0.0f64;
    let adv: Vec<f32> = x
        .data()
        .iter()
        .zip(&r_total)
        .map(|(&xv, &r)| {
            let d = r * factor;
            linf = linf.max(d.abs());
            (xv as f64 + d) as f32
        })
        .collect();
    let x_adv = Tensor::from_vec(x.shape().to_vec(), adv)?;
    let final_label = model.predict(&x_adv)?;
    let flipped = final_label != original;
    Ok(AttackOutcome {
        sample_index: 0,
        success: flipped && linf <= cfg.delta_budget,
        x_adv,
        perturbation_linf: linf,
        iterations_used,
        final_label,
    })
}

/// Adversarial index set at one budget.
#[derive(Clone, Debug)]
pub struct BudgetSet {
    pub budget: f64,
    pub indices: BTreeSet<usize>,
}

/// One CSV row of a sweep: everything about an outcome except the image.
#[derive(Clone, Debug)]
pub struct OutcomeRecord {
    pub index: usize,
    pub attack: AttackKind,
    pub budget: f64,
    pub success: bool,
    pub linf: f64,
    pub iterations: usize,
    pub final_label: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub kind: AttackKind,
    pub per_budget: Vec<BudgetSet>,
    pub records: Vec<OutcomeRecord>,
}

impl SweepResult {
    pub fn records_for(&self, budget: f64) -> impl Iterator<Item = &OutcomeRecord> {
        self.records.iter().filter(move |r| r.budget == budget)
    }
}

/// Runs one attack over `indices` (the correctly classified test indices)
/// for every budget. iFGSM runs once per (budget, sample); DeepFool runs once
/// per sample with no cap and the budgets filter its fixed perturbation
/// magnitude, so its per-budget sets are nested by construction.
pub fn run_sweep<M: WhiteBoxModel + ?Sized>(
    model: &M,
    dataset: &Dataset,
    indices: &[usize],
    budgets: &[f64],
    template: &AttackConfig,
) -> Result<SweepResult> {
    if budgets.is_empty() {
        return Err(Error::Config("budget list is empty".into()));
    }
    let mut per_budget = Vec::with_capacity(budgets.len());
    let mut records = Vec::new();
    match template.kind {
        AttackKind::Ifgsm => {
            for &budget in budgets {
                let cfg = AttackConfig { epsilon: budget, ..template.clone() };
                let outcomes: Result<Vec<AttackOutcome>> = indices
                    .par_iter()
                    .map(|&idx| {
                        let x = dataset.image(idx)?;
                        let mut out = ifgsm(model, &x, dataset.label(idx), &cfg)?;
                        out.sample_index = idx;
                        Ok(out)
                    })
                    .collect();
                let outcomes = outcomes?;
                let set: BTreeSet<usize> =
                    outcomes.iter().filter(|o| o.success).map(|o| o.sample_index).collect();
                records.extend(outcomes.iter().map(|o| OutcomeRecord {
                    index: o.sample_index,
                    attack: AttackKind::Ifgsm,
                    budget,
                    success: o.success,
                    linf: o.perturbation_linf,
                    iterations: o.iterations_used,
                    final_label: o.final_label,
                }));
                per_budget.push(BudgetSet { budget, indices: set });
            }
        }
        AttackKind::Deepfool => {
            let cfg = AttackConfig { delta_budget: f64::INFINITY, ..template.clone() };
            let outcomes: Result<Vec<(usize, AttackOutcome, bool)>> = indices
                .par_iter()
                .map(|&idx| {
                    let x = dataset.image(idx)?;
                    let out = deepfool(model, &x, &cfg)?;
                    let flipped = out.final_label != dataset.label(idx);
                    Ok((idx, out, flipped))
                })
                .collect();
            let outcomes = outcomes?;
            for &budget in budgets {
                let set: BTreeSet<usize> = outcomes
                    .iter()
                    .filter(|(_, o, flipped)| *flipped && o.perturbation_linf <= budget)
                    .map(|(idx, _, _)| *idx)
                    .collect();
                records.extend(outcomes.iter().map(|(idx, o, flipped)| OutcomeRecord {
                    index: *idx,
                    attack: AttackKind::Deepfool,
                    budget,
                    success: *flipped && o.perturbation_linf <= budget,
                    linf: o.perturbation_linf,
                    iterations: o.iterations_used,
                    final_label: o.final_label,
                }));
                per_budget.push(BudgetSet { budget, indices: set });
            }
        }
    }
    Ok(SweepResult { kind: template.kind, per_budget, records })
}

/// Writes one budget's outcome rows as CSV:
/// `index,attack,budget,success,linf,iterations,final_label`.
pub fn write_outcomes_csv<'a>(
    path: impl AsRef<Path>,
    records: impl Iterator<Item = &'a OutcomeRecord>,
) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "index,attack,budget,success,linf,iterations,final_label")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.index,
            r.attack.name(),
            r.budget,
            r.success,
            r.linf,
            r.iterations,
            r.final_label
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-class affine model: logits = [0, w.x + b]. The decision boundary
    /// is the hyperplane w.x + b = 0.
    struct AffineBinary {
        w: Vec<f32>,
        b: f32,
    }

    impl WhiteBoxModel for AffineBinary {
        fn num_classes(&self) -> usize {
            2
        }
        fn input_shape(&self) -> Vec<usize> {
            vec![self.w.len()]
        }
        fn logits(&self, x: &Tensor<f32>) -> Result<Tensor<f32>> {
            let f: f32 = self.w.iter().zip(x.data()).map(|(&w, &v)| w * v).sum::<f32>() + self.b;
            Tensor::from_vec(vec![2], vec![0.0, f])
        }
        fn input_gradient(&self, x: &Tensor<f32>, y_true: usize) -> Result<Tensor<f32>> {
            // loss = -log softmax(logits)[y]; d loss / d f = p1 - [y == 1]
            let logits = self.logits(x)?;
            let probs = crate::tensor::softmax(&logits);
            let coeff = probs.data()[1] - if y_true == 1 { 1.0 } else { 0.0 };
            Tensor::from_vec(vec![self.w.len()], self.w.iter().map(|&w| coeff * w).collect())
        }
        fn class_logit_gradients(&self, _x: &Tensor<f32>) -> Result<Tensor<f32>> {
            let mut data = vec![0.0f32; 2 * self.w.len()];
            data[self.w.len()..].copy_from_slice(&self.w);
            Tensor::from_vec(vec![2, self.w.len()], data)
        }
    }

    /// Model whose gradient is identically zero.
    struct ZeroModel {
        dims: usize,
    }

    impl WhiteBoxModel for ZeroModel {
        fn num_classes(&self) -> usize {
            2
        }
        fn input_shape(&self) -> Vec<usize> {
            vec![self.dims]
        }
        fn logits(&self, _x: &Tensor<f32>) -> Result<Tensor<f32>> {
            Ok(Tensor::zeros(vec![2]))
        }
        fn input_gradient(&self, _x: &Tensor<f32>, _y: usize) -> Result<Tensor<f32>> {
            Ok(Tensor::zeros(vec![self.dims]))
        }
        fn class_logit_gradients(&self, _x: &Tensor<f32>) -> Result<Tensor<f32>> {
            Ok(Tensor::zeros(vec![2, self.dims]))
        }
    }

    fn x2(a: f32, b: f32) -> Tensor<f32> {
        Tensor::from_vec(vec![2], vec![a, b]).unwrap()
    }

    #[test]
    fn fgsm_zero_gradient_leaves_input_unchanged() {
        let model = ZeroModel { dims: 3 };
        let x = Tensor::from_vec(vec![3], vec![0.2, 0.5, 0.9]).unwrap();
        let out = fgsm_step(&model, &x, 0, 0.25).unwrap();
        assert_eq!(out.data(), x.data());
    }

    #[test]
    fn fgsm_zero_step_leaves_input_unchanged() {
        let model = AffineBinary { w: vec![1.0, -2.0], b: 0.1 };
        let x = x2(0.3, 0.6);
        let out = fgsm_step(&model, &x, 0, 0.0).unwrap();
        assert_eq!(out.data(), x.data());
    }

    #[test]
    fn fgsm_moves_along_sign_and_clips() {
        // Class 0 true, logit f = x[0]; pushing loss up means increasing f,
        // so the step moves x[0] by +step (clipped at 1).
        let model = AffineBinary { w: vec![1.0], b: -0.2 };
        let x = Tensor::from_vec(vec![1], vec![0.9]).unwrap();
        let out = fgsm_step(&model, &x, 0, 0.08).unwrap();
        assert!((out.data()[0] - 0.98).abs() < 1e-6);
        let clipped = fgsm_step(&model, &x, 0, 0.5).unwrap();
        assert_eq!(clipped.data()[0], 1.0);
    }

    #[test]
    fn ifgsm_single_step_equals_fgsm_bitwise() {
        let model = AffineBinary { w: vec![0.8, -1.4], b: 0.05 };
        let x = x2(0.4, 0.7);
        let eps = 0.03;
        let cfg = AttackConfig { steps: 1, ..AttackConfig::ifgsm(eps) };
        let via_ifgsm = ifgsm(&model, &x, 0, &cfg).unwrap();
        let via_fgsm = fgsm_step(&model, &x, 0, eps as f32).unwrap();
        assert_eq!(via_ifgsm.x_adv.data(), via_fgsm.data());
    }

    #[test]
    fn ifgsm_zero_epsilon_never_succeeds() {
        let model = AffineBinary { w: vec![1.0, 1.0], b: -0.8 };
        let x = x2(0.1, 0.2); // f < 0 so class 0
        let out = ifgsm(&model, &x, 0, &AttackConfig::ifgsm(0.0)).unwrap();
        assert!(!out.success);
        assert_eq!(out.x_adv.data(), x.data());
        assert_eq!(out.perturbation_linf, 0.0);
    }

    #[test]
    fn ifgsm_flips_linear_model_iff_budget_covers_margin() {
        // f(x) = x0 + x1 - 0.5 at x = (0.2, 0.2): f = -0.1, class 0.
        // Every pixel moves by +eps total, so f(x_adv) = f(x) + 2 eps;
        // the flip needs eps > 0.05.
        let model = AffineBinary { w: vec![1.0, 1.0], b: -0.5 };
        let x = x2(0.2, 0.2);
        let below = ifgsm(&model, &x, 0, &AttackConfig::ifgsm(0.049)).unwrap();
        assert!(!below.success, "eps below margin must not flip");
        let above = ifgsm(&model, &x, 0, &AttackConfig::ifgsm(0.051)).unwrap();
        assert!(above.success, "eps above margin must flip");
        assert_eq!(above.final_label, 1);
        assert!(above.perturbation_linf <= 0.051 + 1e-6);
    }

    #[test]
    fn ifgsm_respects_budget_on_early_exit() {
        let model = AffineBinary { w: vec![2.0, -1.0], b: -0.15 };
        let x = x2(0.1, 0.05);
        let out = ifgsm(&model, &x, 0, &AttackConfig::ifgsm(0.2)).unwrap();
        assert!(out.success);
        assert!(out.iterations_used < 10, "expected early exit");
        assert!(out.perturbation_linf <= 0.2 + 1e-6);
        assert!(out.x_adv.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn deepfool_affine_matches_perpendicular_projection() {
        let w = vec![0.6f32, -0.8];
        let model = AffineBinary { w: w.clone(), b: -0.1 };
        let x = x2(0.1, 0.3);
        // f(x) = 0.06 - 0.24 - 0.1 = -0.28, class 0. Closed-form projection:
        // r = -(f / ||w||^2) w.
        let f = 0.6 * 0.1 - 0.8 * 0.3 - 0.1;
        let norm_sq = (0.6f64 * 0.6 + 0.8 * 0.8) as f32;
        let expected: Vec<f64> =
            w.iter().map(|&wi| (-(f / norm_sq) * wi) as f64).collect();
        let out = deepfool(&model, &x, &AttackConfig::deepfool(f64::INFINITY)).unwrap();
        assert!(out.success);
        assert_eq!(out.final_label, 1);
        // Recover the applied perturbation and strip the overshoot.
        for (i, &e) in expected.iter().enumerate() {
            let applied = (out.x_adv.data()[i] - x.data()[i]) as f64 / 1.02;
            assert!(
                (applied - e).abs() <= 1e-5 * e.abs().max(1.0),
                "component {i}: {applied} vs {e}"
            );
        }
    }

    #[test]
    fn deepfool_zero_overshoot_lands_on_boundary() {
        // Exact binary fractions keep f(x + r) = 0 representable: f = x0 - 0.5.
        let model = AffineBinary { w: vec![1.0, 0.0], b: -0.5 };
        let x = x2(0.25, 0.7);
        let mut cfg = AttackConfig::deepfool(f64::INFINITY);
        cfg.overshoot = 0.0;
        cfg.max_iter = 8;
        let out = deepfool(&model, &x, &cfg).unwrap();
        let f_adv = out.x_adv.data()[0] - 0.5;
        assert_eq!(f_adv, 0.0, "expected exact boundary landing");
        assert!(!out.success, "ties resolve to class 0, so no strict flip");
        assert_eq!(out.iterations_used, cfg.max_iter);
    }

    #[test]
    fn deepfool_zero_model_gives_up() {
        let model = ZeroModel { dims: 4 };
        let x = Tensor::from_vec(vec![4], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let out = deepfool(&model, &x, &AttackConfig::deepfool(1.0)).unwrap();
        assert!(!out.success);
        assert_eq!(out.perturbation_linf, 0.0);
    }

    #[test]
    fn deepfool_success_requires_budget() {
        let model = AffineBinary { w: vec![1.0, 0.0], b: -0.5 };
        let x = x2(0.25, 0.7); // needs |delta| ~ 0.255 on pixel 0
        let tight = deepfool(&model, &x, &AttackConfig::deepfool(0.1)).unwrap();
        assert!(!tight.success);
        let loose = deepfool(&model, &x, &AttackConfig::deepfool(0.3)).unwrap();
        assert!(loose.success);
        assert_eq!(tight.perturbation_linf, loose.perturbation_linf);
    }

    #[test]
    fn sweep_with_empty_indices_is_empty() {
        let model = AffineBinary { w: vec![1.0, 1.0], b: -0.5 };
        let data = crate::data::normalize(
            &crate::data::RawImages { count: 1, rows: 28, cols: 28, pixels: vec![0; 784] },
            vec![0],
            crate::data::Split::Test,
        )
        .unwrap();
        let sweep =
            run_sweep(&model, &data, &[], &[0.01, 0.1], &AttackConfig::ifgsm(0.0)).unwrap();
        assert!(sweep.per_budget.iter().all(|b| b.indices.is_empty()));
        assert!(sweep.records.is_empty());
    }

    #[test]
    fn empty_budget_list_is_a_config_error() {
        let model = AffineBinary { w: vec![1.0, 1.0], b: -0.5 };
        let data = crate::data::normalize(
            &crate::data::RawImages { count: 1, rows: 28, cols: 28, pixels: vec![0; 784] },
            vec![0],
            crate::data::Split::Test,
        )
        .unwrap();
        let err = run_sweep(&model, &data, &[0], &[], &AttackConfig::ifgsm(0.0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
