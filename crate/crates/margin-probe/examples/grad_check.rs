//! Finite-difference validation of every differentiable primitive and of the
//! full network input gradient, in f64.
//!
//!     cargo run --release --example grad_check

use margin_probe::gradcheck::{check_scalar, check_vjp, DEFAULT_STEP};
use margin_probe::network::NetworkModel;
use margin_probe::tensor::{
    conv2d, conv2d_backward, dense, dense_backward, softmax_xent, Tensor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, worst: f64, tol: f64) {
    let verdict = if worst <= tol { "ok" } else { "FAIL" };
    println!("{name:<28} max rel err {worst:.3e}  (tol {tol:.1e})  {verdict}");
    assert!(worst <= tol, "{name} exceeded tolerance");
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_dense = 0.0f64;
    let mut worst_conv = 0.0f64;
    let mut worst_xent = 0.0f64;

    for _ in 0..25 {
        let (m, n) = (rng.gen_range(1..8), rng.gen_range(1..8));
        let point: Vec<f64> = (0..n + m * n + m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cot: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let forward = |coords: &[f64]| {
            let x = Tensor::from_vec(vec![n], coords[..n].to_vec())?;
            let w = Tensor::from_vec(vec![m, n], coords[n..n + m * n].to_vec())?;
            let b = Tensor::from_vec(vec![m], coords[n + m * n..].to_vec())?;
            Ok(dense(&x, &w, &b)?.into_data())
        };
        let x = Tensor::from_vec(vec![n], point[..n].to_vec()).unwrap();
        let w = Tensor::from_vec(vec![m, n], point[n..n + m * n].to_vec()).unwrap();
        let b = Tensor::from_vec(vec![m], point[n + m * n..].to_vec()).unwrap();
        let g = Tensor::from_vec(vec![m], cot.clone()).unwrap();
        let back = dense_backward(&x, &w, &b, &g).unwrap();
        let mut vjp = back.grad_input.into_data();
        vjp.extend(back.grad_params[0].data());
        vjp.extend(back.grad_params[1].data());
        worst_dense = worst_dense.max(check_vjp(forward, &point, &cot, &vjp, DEFAULT_STEP).unwrap());
    }
    report("dense", worst_dense, 1e-6);

    for _ in 0..25 {
        let (c, h, w_dim) = (rng.gen_range(1..4), rng.gen_range(3..7), rng.gen_range(3..7));
        let kh = rng.gen_range(1..=h.min(3));
        let kw = rng.gen_range(1..=w_dim.min(3));
        let k = rng.gen_range(1..4);
        let (oh, ow) = (h - kh + 1, w_dim - kw + 1);
        let n_in = c * h * w_dim;
        let n_ker = k * c * kh * kw;
        let point: Vec<f64> = (0..n_in + n_ker + k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cot: Vec<f64> = (0..k * oh * ow).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let forward = |coords: &[f64]| {
            let x = Tensor::from_vec(vec![c, h, w_dim], coords[..n_in].to_vec())?;
            let ker = Tensor::from_vec(vec![k, c, kh, kw], coords[n_in..n_in + n_ker].to_vec())?;
            let b = Tensor::from_vec(vec![k], coords[n_in + n_ker..].to_vec())?;
            Ok(conv2d(&x, &ker, &b)?.into_data())
        };
        let x = Tensor::from_vec(vec![c, h, w_dim], point[..n_in].to_vec()).unwrap();
        let ker = Tensor::from_vec(vec![k, c, kh, kw], point[n_in..n_in + n_ker].to_vec()).unwrap();
        let b = Tensor::from_vec(vec![k], point[n_in + n_ker..].to_vec()).unwrap();
        let g = Tensor::from_vec(vec![k, oh, ow], cot.clone()).unwrap();
        let back = conv2d_backward(&x, &ker, &b, &g).unwrap();
        let mut vjp = back.grad_input.into_data();
        vjp.extend(back.grad_params[0].data());
        vjp.extend(back.grad_params[1].data());
        worst_conv = worst_conv.max(check_vjp(forward, &point, &cot, &vjp, DEFAULT_STEP).unwrap());
    }
    report("conv2d", worst_conv, 1e-5);

    for _ in 0..25 {
        let k = rng.gen_range(2..12);
        let label = rng.gen_range(0..k);
        let logits: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let f = |coords: &[f64]| {
            let t = Tensor::from_vec(vec![coords.len()], coords.to_vec())?;
            Ok(softmax_xent(&t, label)?.0)
        };
        let t = Tensor::from_vec(vec![k], logits.clone()).unwrap();
        let (_, grad) = softmax_xent(&t, label).unwrap();
        worst_xent = worst_xent.max(check_scalar(f, &logits, grad.data(), DEFAULT_STEP).unwrap());
    }
    report("softmax_xent", worst_xent, 1e-6);

    // Full network: loss gradient w.r.t. the input, random model and image.
    let mut worst_net = 0.0f64;
    for case in 0..5 {
        let mut model = NetworkModel::<f64>::zeros();
        for t in model.params.tensors_mut() {
            for v in t.data_mut() {
                *v = rng.gen_range(-0.2..0.2);
            }
        }
        let x_data: Vec<f64> = (0..784).map(|_| rng.gen_range(0.0..1.0)).collect();
        let x = Tensor::from_vec(vec![1, 28, 28], x_data.clone()).unwrap();
        let y = case % 10;
        let analytic = model.input_gradient(&x, y).unwrap();
        let mut probe = x.clone();
        for i in (case * 7..784).step_by(37) {
            let orig = probe.data()[i];
            probe.data_mut()[i] = orig + DEFAULT_STEP;
            let (hi, _) = softmax_xent(&model.forward(&probe).unwrap().logits, y).unwrap();
            probe.data_mut()[i] = orig - DEFAULT_STEP;
            let (lo, _) = softmax_xent(&model.forward(&probe).unwrap().logits, y).unwrap();
            probe.data_mut()[i] = orig;
            let numeric = (hi - lo) / (2.0 * DEFAULT_STEP);
            worst_net = worst_net
                .max(margin_probe::gradcheck::relative_error(analytic.data()[i], numeric));
        }
    }
    report("network input gradient", worst_net, 1e-4);
    println!("all gradient checks passed");
}
