//! DeepFool on a hand-built affine binary classifier, where the minimal
//! perturbation has a closed form: the perpendicular projection onto the
//! decision hyperplane, r = -(f(x) / ||w||^2) w.
//!
//!     cargo run --release --example deepfool_affine

use margin_probe::attacks::{deepfool, AttackConfig};
use margin_probe::network::WhiteBoxModel;
use margin_probe::tensor::Tensor;
use margin_probe::Result;

/// logits = [0, w.x + b]; the boundary is w.x + b = 0.
struct Affine {
    w: Vec<f32>,
    b: f32,
}

impl WhiteBoxModel for Affine {
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
        let probs = margin_probe::tensor::softmax(&self.logits(x)?);
        let coeff = probs.data()[1] - if y_true == 1 { 1.0 } else { 0.0 };
        Tensor::from_vec(vec![self.w.len()], self.w.iter().map(|&w| coeff * w).collect())
    }
    fn class_logit_gradients(&self, _x: &Tensor<f32>) -> Result<Tensor<f32>> {
        let mut data = vec![0.0f32; 2 * self.w.len()];
        data[self.w.len()..].copy_from_slice(&self.w);
        Tensor::from_vec(vec![2, self.w.len()], data)
    }
}

fn main() {
    let model = Affine { w: vec![0.6, -0.8], b: -0.1 };
    let x = Tensor::from_vec(vec![2], vec![0.1, 0.3]).unwrap();
    let f = 0.6 * 0.1 - 0.8 * 0.3 - 0.1f64;
    let norm_sq = 0.6f64 * 0.6 + 0.8 * 0.8;
    println!("f(x) = {f:.4}, closed-form projection r = -(f/||w||^2) w:");
    let expected: Vec<f64> = [0.6, -0.8].iter().map(|&wi| -(f / norm_sq) * wi).collect();
    println!("  r_expected = [{:.6}, {:.6}]", expected[0], expected[1]);

    let out = deepfool(&model, &x, &AttackConfig::deepfool(f64::INFINITY)).unwrap();
    let applied: Vec<f64> = out
        .x_adv
        .data()
        .iter()
        .zip(x.data())
        .map(|(&a, &o)| (a - o) as f64 / 1.02) // strip the overshoot
        .collect();
    println!("  r_deepfool = [{:.6}, {:.6}]", applied[0], applied[1]);
    println!(
        "  iterations = {}, |delta|_inf = {:.6}, flipped to class {}",
        out.iterations_used, out.perturbation_linf, out.final_label
    );
    for (a, e) in applied.iter().zip(&expected) {
        assert!((a - e).abs() <= 1e-5 * e.abs().max(1.0), "projection mismatch");
    }

    // Zero overshoot lands exactly on the boundary and flips nothing.
    let mut flat = AttackConfig::deepfool(f64::INFINITY);
    flat.overshoot = 0.0;
    flat.max_iter = 8;
    let boundary_model = Affine { w: vec![1.0, 0.0], b: -0.5 };
    let xb = Tensor::from_vec(vec![2], vec![0.25, 0.7]).unwrap();
    let out = deepfool(&boundary_model, &xb, &flat).unwrap();
    println!(
        "zeta = 0: f(x_adv) = {:+.1e}, success = {} (boundary landing motivates zeta > 0)",
        out.x_adv.data()[0] - 0.5,
        out.success
    );
    assert!(!out.success);
    println!("affine oracle checks passed");
}
