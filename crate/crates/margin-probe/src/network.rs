//! The LeNet-class classifier: two valid 5x5 convolution blocks with ReLU and
//! 2x2 max pooling, then three fully connected layers. Exposes logits, the
//! loss gradient w.r.t. the input (for iFGSM), per-class logit gradients
//! (for DeepFool), and the flattened post-pool output of the second
//! convolution block as the 256-dim feature vector consumed by the SVM.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{
    argmax, conv2d, conv2d_backward, conv2d_backward_input, dense, dense_backward,
    dense_backward_input, maxpool2, maxpool2_backward, relu, relu_backward, softmax_xent,
    ArgmaxMap, Scalar, Tensor,
};

pub const INPUT_SHAPE: [usize; 3] = [1, 28, 28];
pub const NUM_CLASSES: usize = 10;
/// 16 maps of 4x4 after the second pool.
pub const FEATURE_DIM: usize = 256;
pub const ARCH_ID: &str = "lenet5-relu-valid-v1";

const CONV1_MAPS: usize = 6;
const CONV2_MAPS: usize = 16;
const KERNEL: usize = 5;
const FC1_DIM: usize = 120;
const FC2_DIM: usize = 84;

/// All trainable tensors, in a fixed order shared by checkpoints, gradient
/// accumulation, and the SGD update.
#[derive(Clone, Debug, PartialEq)]
pub struct Params<T = f32> {
    pub conv1_kernels: Tensor<T>,
    pub conv1_bias: Tensor<T>,
    pub conv2_kernels: Tensor<T>,
    pub conv2_bias: Tensor<T>,
    pub fc1_weight: Tensor<T>,
    pub fc1_bias: Tensor<T>,
    pub fc2_weight: Tensor<T>,
    pub fc2_bias: Tensor<T>,
    pub fc3_weight: Tensor<T>,
    pub fc3_bias: Tensor<T>,
}

impl<T: Scalar> Params<T> {
    pub fn zeros() -> Self {
        Params {
            conv1_kernels: Tensor::zeros(vec![CONV1_MAPS, 1, KERNEL, KERNEL]),
            conv1_bias: Tensor::zeros(vec![CONV1_MAPS]),
            conv2_kernels: Tensor::zeros(vec![CONV2_MAPS, CONV1_MAPS, KERNEL, KERNEL]),
            conv2_bias: Tensor::zeros(vec![CONV2_MAPS]),
            fc1_weight: Tensor::zeros(vec![FC1_DIM, FEATURE_DIM]),
            fc1_bias: Tensor::zeros(vec![FC1_DIM]),
            fc2_weight: Tensor::zeros(vec![FC2_DIM, FC1_DIM]),
            fc2_bias: Tensor::zeros(vec![FC2_DIM]),
            fc3_weight: Tensor::zeros(vec![NUM_CLASSES, FC2_DIM]),
            fc3_bias: Tensor::zeros(vec![NUM_CLASSES]),
        }
    }

    pub fn named(&self) -> [(&'static str, &Tensor<T>); 10] {
        [
            ("conv1.kernels", &self.conv1_kernels),
            ("conv1.bias", &self.conv1_bias),
            ("conv2.kernels", &self.conv2_kernels),
            ("conv2.bias", &self.conv2_bias),
            ("fc1.weight", &self.fc1_weight),
            ("fc1.bias", &self.fc1_bias),
            ("fc2.weight", &self.fc2_weight),
            ("fc2.bias", &self.fc2_bias),
            ("fc3.weight", &self.fc3_weight),
            ("fc3.bias", &self.fc3_bias),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor<T>; 10] {
        [
            &mut self.conv1_kernels,
            &mut self.conv1_bias,
            &mut self.conv2_kernels,
            &mut self.conv2_bias,
            &mut self.fc1_weight,
            &mut self.fc1_bias,
            &mut self.fc2_weight,
            &mut self.fc2_bias,
            &mut self.fc3_weight,
            &mut self.fc3_bias,
        ]
    }

    pub fn tensors(&self) -> [&Tensor<T>; 10] {
        [
            &self.conv1_kernels,
            &self.conv1_bias,
            &self.conv2_kernels,
            &self.conv2_bias,
            &self.fc1_weight,
            &self.fc1_bias,
            &self.fc2_weight,
            &self.fc2_bias,
            &self.fc3_weight,
            &self.fc3_bias,
        ]
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &Params<T>, scale: T) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, &s) in dst.data_mut().iter_mut().zip(src.data()) {
                *d = *d + scale * s;
            }
        }
    }

    pub fn scale(&mut self, factor: T) {
        for t in self.tensors_mut() {
            for v in t.data_mut() {
                *v = *v * factor;
            }
        }
    }

    pub fn cast<U: Scalar>(&self) -> Params<U> {
        Params {
            conv1_kernels: self.conv1_kernels.cast(),
            conv1_bias: self.conv1_bias.cast(),
            conv2_kernels: self.conv2_kernels.cast(),
            conv2_bias: self.conv2_bias.cast(),
            fc1_weight: self.fc1_weight.cast(),
            fc1_bias: self.fc1_bias.cast(),
            fc2_weight: self.fc2_weight.cast(),
            fc2_bias: self.fc2_bias.cast(),
            fc3_weight: self.fc3_weight.cast(),
            fc3_bias: self.fc3_bias.cast(),
        }
    }
}

/// LeNet-class model: immutable after training; forward and gradient calls
/// are read-only and safe to run from many workers at once.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkModel<T = f32> {
    pub params: Params<T>,
    pub arch_id: String,
}

/// Everything one forward pass produces, including the activation caches the
/// backward pass consumes.
#[derive(Clone, Debug)]
pub struct ForwardRecord<T = f32> {
    pub logits: Tensor<T>,
    /// Flattened post-ReLU, post-pool output of the second conv block.
    pub features: Tensor<T>,
    input: Tensor<T>,
    conv1_out: Tensor<T>,
    pool1_arg: ArgmaxMap,
    pool1_out: Tensor<T>,
    conv2_out: Tensor<T>,
    pool2_arg: ArgmaxMap,
    fc1_out: Tensor<T>,
    relu_fc1: Tensor<T>,
    fc2_out: Tensor<T>,
    relu_fc2: Tensor<T>,
}

impl<T: Scalar> ForwardRecord<T> {
    pub fn predicted(&self) -> usize {
        argmax(self.logits.data())
    }
}

impl<T: Scalar> NetworkModel<T> {
    pub fn zeros() -> Self {
        NetworkModel { params: Params::zeros(), arch_id: ARCH_ID.to_string() }
    }

    pub fn cast<U: Scalar>(&self) -> NetworkModel<U> {
        NetworkModel { params: self.params.cast(), arch_id: self.arch_id.clone() }
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<ForwardRecord<T>> {
        if x.shape() != INPUT_SHAPE {
            return Err(Error::Shape {
                op: "forward",
                detail: format!("input shape {:?}, expected {INPUT_SHAPE:?}", x.shape()),
            });
        }
        let p = &self.params;
        let conv1_out = conv2d(x, &p.conv1_kernels, &p.conv1_bias)?;
        let (pool1_out, pool1_arg) = maxpool2(&relu(&conv1_out))?;
        let conv2_out = conv2d(&pool1_out, &p.conv2_kernels, &p.conv2_bias)?;
        let (pool2_out, pool2_arg) = maxpool2(&relu(&conv2_out))?;
        let features = pool2_out.reshaped(vec![FEATURE_DIM])?;
        let fc1_out = dense(&features, &p.fc1_weight, &p.fc1_bias)?;
        let relu_fc1 = relu(&fc1_out);
        let fc2_out = dense(&relu_fc1, &p.fc2_weight, &p.fc2_bias)?;
        let relu_fc2 = relu(&fc2_out);
        let logits = dense(&relu_fc2, &p.fc3_weight, &p.fc3_bias)?;
        Ok(ForwardRecord {
            logits,
            features,
            input: x.clone(),
            conv1_out,
            pool1_arg,
            pool1_out,
            conv2_out,
            pool2_arg,
            fc1_out,
            relu_fc1,
            fc2_out,
            relu_fc2,
        })
    }

    /// Backpropagates an arbitrary cotangent on the logits down to the input,
    /// optionally collecting parameter gradients along the way. When only the
    /// input gradient is wanted the parameter-gradient arithmetic is skipped
    /// entirely, which roughly halves the cost of attack-time backward passes.
    fn backprop(
        &self,
        rec: &ForwardRecord<T>,
        grad_logits: &Tensor<T>,
        want_params: bool,
    ) -> Result<(Tensor<T>, Option<Params<T>>)> {
        let p = &self.params;
        let pool2_shape = [CONV2_MAPS, 8, 8];
        let pool1_shape = [CONV1_MAPS, 24, 24];

        if !want_params {
            let g = dense_backward_input(&p.fc3_weight, grad_logits)?;
            let g = relu_backward(&rec.fc2_out, &g)?.grad_input;
            let g = dense_backward_input(&p.fc2_weight, &g)?;
            let g = relu_backward(&rec.fc1_out, &g)?.grad_input;
            let g = dense_backward_input(&p.fc1_weight, &g)?;
            let g = g.reshaped(vec![CONV2_MAPS, 4, 4])?;
            let g = maxpool2_backward(&pool2_shape, &rec.pool2_arg, &g)?.grad_input;
            let g = relu_backward(&rec.conv2_out, &g)?.grad_input;
            let g = conv2d_backward_input(rec.pool1_out.shape(), &p.conv2_kernels, &g)?;
            let g = maxpool2_backward(&pool1_shape, &rec.pool1_arg, &g)?.grad_input;
            let g = relu_backward(&rec.conv1_out, &g)?.grad_input;
            let g = conv2d_backward_input(rec.input.shape(), &p.conv1_kernels, &g)?;
            return Ok((g, None));
        }

        let mut fc3 = dense_backward(&rec.relu_fc2, &p.fc3_weight, &p.fc3_bias, grad_logits)?;
        let g = relu_backward(&rec.fc2_out, &fc3.grad_input)?.grad_input;
        let mut fc2 = dense_backward(&rec.relu_fc1, &p.fc2_weight, &p.fc2_bias, &g)?;
        let g = relu_backward(&rec.fc1_out, &fc2.grad_input)?.grad_input;
        let mut fc1 = dense_backward(&rec.features, &p.fc1_weight, &p.fc1_bias, &g)?;

        let g = fc1.grad_input.clone().reshaped(vec![CONV2_MAPS, 4, 4])?;
        let g = maxpool2_backward(&pool2_shape, &rec.pool2_arg, &g)?.grad_input;
        let g = relu_backward(&rec.conv2_out, &g)?.grad_input;
        let mut conv2 = conv2d_backward(&rec.pool1_out, &p.conv2_kernels, &p.conv2_bias, &g)?;

        let g = maxpool2_backward(&pool1_shape, &rec.pool1_arg, &conv2.grad_input)?.grad_input;
        let g = relu_backward(&rec.conv1_out, &g)?.grad_input;
        let mut conv1 = conv2d_backward(&rec.input, &p.conv1_kernels, &p.conv1_bias, &g)?;

        let take = |pg: &mut crate::tensor::PrimitiveGrad<T>| {
            let bias = pg.grad_params.pop().expect("bias grad");
            let weight = pg.grad_params.pop().expect("weight grad");
            (weight, bias)
        };
        let (fc3_weight, fc3_bias) = take(&mut fc3);
        let (fc2_weight, fc2_bias) = take(&mut fc2);
        let (fc1_weight, fc1_bias) = take(&mut fc1);
        let (conv2_kernels, conv2_bias) = take(&mut conv2);
        let (conv1_kernels, conv1_bias) = take(&mut conv1);
        let grads = Params {
            conv1_kernels,
            conv1_bias,
            conv2_kernels,
            conv2_bias,
            fc1_weight,
            fc1_bias,
            fc2_weight,
            fc2_bias,
            fc3_weight,
            fc3_bias,
        };
        Ok((conv1.grad_input, Some(grads)))
    }

    /// Gradient of the cross-entropy loss w.r.t. the input image.
    pub fn input_gradient(&self, x: &Tensor<T>, y_true: usize) -> Result<Tensor<T>> {
        let rec = self.forward(x)?;
        let (_, grad_logits) = softmax_xent(&rec.logits, y_true)?;
        let (grad_input, _) = self.backprop(&rec, &grad_logits, false)?;
        Ok(grad_input)
    }

    /// Loss value, parameter gradients, and predicted class for one sample.
    pub fn loss_gradients(&self, x: &Tensor<T>, y_true: usize) -> Result<(T, Params<T>, usize)> {
        let rec = self.forward(x)?;
        let (loss, grad_logits) = softmax_xent(&rec.logits, y_true)?;
        let (_, grads) = self.backprop(&rec, &grad_logits, true)?;
        Ok((loss, grads.expect("param grads requested"), rec.predicted()))
    }

    /// Per-class logit gradients w.r.t. the input, stacked as
    /// `[NUM_CLASSES, 1, 28, 28]`: one backward pass per class, seeded with
    /// the class's one-hot cotangent.
    pub fn class_logit_gradients(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let rec = self.forward(x)?;
        let per = INPUT_SHAPE.iter().product::<usize>();
        let mut stacked = vec![T::zero(); NUM_CLASSES * per];
        for k in 0..NUM_CLASSES {
            let mut seed = Tensor::zeros(vec![NUM_CLASSES]);
            seed.data_mut()[k] = T::one();
            let (grad, _) = self.backprop(&rec, &seed, false)?;
            stacked[k * per..(k + 1) * per].copy_from_slice(grad.data());
        }
        Tensor::from_vec(vec![NUM_CLASSES, INPUT_SHAPE[0], INPUT_SHAPE[1], INPUT_SHAPE[2]], stacked)
    }
}

/// Model surface the attacks need: logits plus input-space gradients. Toy
/// models in tests implement this too, so attack math can be checked against
/// closed forms.
pub trait WhiteBoxModel: Sync {
    fn num_classes(&self) -> usize;
    fn input_shape(&self) -> Vec<usize>;
    fn logits(&self, x: &Tensor<f32>) -> Result<Tensor<f32>>;
    fn input_gradient(&self, x: &Tensor<f32>, y_true: usize) -> Result<Tensor<f32>>;
    /// Stacked per-class gradients, first axis = class.
    fn class_logit_gradients(&self, x: &Tensor<f32>) -> Result<Tensor<f32>>;

    fn predict(&self, x: &Tensor<f32>) -> Result<usize> {
        Ok(argmax(self.logits(x)?.data()))
    }

    /// Input gradient and the logits of `x`, ideally from one forward pass.
    fn input_gradient_with_logits(
        &self,
        x: &Tensor<f32>,
        y_true: usize,
    ) -> Result<(Tensor<f32>, Tensor<f32>)> {
        Ok((self.input_gradient(x, y_true)?, self.logits(x)?))
    }
}

impl WhiteBoxModel for NetworkModel<f32> {
    fn num_classes(&self) -> usize {
        NUM_CLASSES
    }
    fn input_shape(&self) -> Vec<usize> {
        INPUT_SHAPE.to_vec()
    }
    fn logits(&self, x: &Tensor<f32>) -> Result<Tensor<f32>> {
        Ok(self.forward(x)?.logits)
    }
    fn input_gradient(&self, x: &Tensor<f32>, y_true: usize) -> Result<Tensor<f32>> {
        NetworkModel::input_gradient(self, x, y_true)
    }
    fn class_logit_gradients(&self, x: &Tensor<f32>) -> Result<Tensor<f32>> {
        NetworkModel::class_logit_gradients(self, x)
    }
    fn input_gradient_with_logits(
        &self,
        x: &Tensor<f32>,
        y_true: usize,
    ) -> Result<(Tensor<f32>, Tensor<f32>)> {
        let rec = self.forward(x)?;
        let (_, grad_logits) = softmax_xent(&rec.logits, y_true)?;
        let (grad_input, _) = self.backprop(&rec, &grad_logits, false)?;
        Ok((grad_input, rec.logits))
    }
}

// --- checkpoint format -----------------------------------------------------
//
// magic "PASM", format version u32, then one record per tensor:
//   name length u32, name bytes, rank u32, extents u32 each, payload f32.
// All integers and floats little-endian. Readers reject unknown versions,
// unknown tensor names, and shape mismatches.

const CHECKPOINT_MAGIC: &[u8; 4] = b"PASM";
const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint(model: &NetworkModel<f32>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    for (name, tensor) in model.params.named() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(tensor.shape().len() as u32).to_le_bytes())?;
        for &e in tensor.shape() {
            w.write_all(&(e as u32).to_le_bytes())?;
        }
        for &v in tensor.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<NetworkModel<f32>> {
    let mut r = BufReader::new(File::open(path.as_ref())?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format(format!(
            "checkpoint magic {magic:?} is not {CHECKPOINT_MAGIC:?}"
        )));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!(
            "checkpoint version {version} not supported (expected {CHECKPOINT_VERSION})"
        )));
    }

    let mut model = NetworkModel::<f32>::zeros();
    let expected: Vec<(String, Vec<usize>)> = model
        .params
        .named()
        .iter()
        .map(|(n, t)| (n.to_string(), t.shape().to_vec()))
        .collect();
    let mut seen = vec![false; expected.len()];

    loop {
        let name_len = match read_u32(&mut r) {
            Ok(v) => v as usize,
            Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e),
        };
        let mut name_buf = vec![0u8; name_len];
        r.read_exact(&mut name_buf)?;
        let name = String::from_utf8(name_buf)
            .map_err(|_| Error::Format("tensor name is not utf-8".into()))?;
        let rank = read_u32(&mut r)? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(read_u32(&mut r)? as usize);
        }
        let len: usize = shape.iter().product();
        let mut payload = vec![0u8; len * 4];
        r.read_exact(&mut payload)?;
        let data: Vec<f32> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();

        let slot = expected
            .iter()
            .position(|(n, _)| *n == name)
            .ok_or_else(|| Error::Format(format!("unknown tensor record '{name}'")))?;
        if expected[slot].1 != shape {
            return Err(Error::Shape {
                op: "checkpoint",
                detail: format!(
                    "tensor '{name}' has shape {shape:?}, expected {:?}",
                    expected[slot].1
                ),
            });
        }
        if seen[slot] {
            return Err(Error::Format(format!("duplicate tensor record '{name}'")));
        }
        seen[slot] = true;
        *model.params.tensors_mut()[slot] = Tensor::from_vec(shape, data)?;
    }

    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Format(format!(
            "checkpoint is missing tensor '{}'",
            expected[missing].0
        )));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_input(seed: u64) -> Tensor<f32> {
        let mut state = seed.max(1);
        let data: Vec<f32> = (0..28 * 28)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                ((state >> 40) as f32) / (1u64 << 24) as f32
            })
            .collect();
        Tensor::from_vec(vec![1, 28, 28], data).unwrap()
    }

    fn perturbed_model(seed: u64) -> NetworkModel<f32> {
        let mut model = NetworkModel::<f32>::zeros();
        let mut state = seed.max(1);
        for t in model.params.tensors_mut() {
            for v in t.data_mut() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                *v = ((state >> 40) as f32 / (1u64 << 24) as f32 - 0.5) * 0.2;
            }
        }
        model
    }

    #[test]
    fn zero_model_produces_tied_logits_and_zero_gradients() {
        let model = NetworkModel::<f32>::zeros();
        let x = sample_input(3);
        let rec = model.forward(&x).unwrap();
        assert!(rec.logits.data().iter().all(|&v| v == 0.0));
        let g = model.input_gradient(&x, 3).unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
        let rows = model.class_logit_gradients(&x).unwrap();
        assert!(rows.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_rejects_wrong_shape() {
        let model = NetworkModel::<f32>::zeros();
        let x = Tensor::zeros(vec![1, 27, 28]);
        assert!(model.forward(&x).is_err());
    }

    #[test]
    fn forward_is_bitwise_deterministic() {
        let model = perturbed_model(11);
        let x = sample_input(7);
        let a = model.forward(&x).unwrap();
        let b = model.forward(&x).unwrap();
        assert_eq!(a.logits.data(), b.logits.data());
        assert_eq!(a.features.data(), b.features.data());
        let ga = model.class_logit_gradients(&x).unwrap();
        let gb = model.class_logit_gradients(&x).unwrap();
        assert_eq!(ga.data(), gb.data());
    }

    #[test]
    fn features_ignore_dense_layer_parameters() {
        let mut model = perturbed_model(21);
        let x = sample_input(9);
        let before = model.forward(&x).unwrap().features;
        for v in model.params.fc1_weight.data_mut() {
            *v += 1.0;
        }
        for v in model.params.fc3_bias.data_mut() {
            *v -= 2.0;
        }
        let after = model.forward(&x).unwrap().features;
        assert_eq!(before.data(), after.data());
        assert_eq!(before.shape(), &[FEATURE_DIM]);
    }

    #[test]
    fn chain_rule_ties_class_gradients_to_loss_gradient() {
        let model = perturbed_model(5).cast::<f64>();
        let x = sample_input(13).cast::<f64>();
        let y = 2usize;
        let rec = model.forward(&x).unwrap();
        let probs = crate::tensor::softmax(&rec.logits);
        let rows = model.class_logit_gradients(&x).unwrap();
        let per = 28 * 28;
        let direct = model.input_gradient(&x, y).unwrap();
        for (i, &d) in direct.data().iter().enumerate() {
            let mut composed = 0.0;
            for k in 0..NUM_CLASSES {
                let coeff = probs.data()[k] - if k == y { 1.0 } else { 0.0 };
                composed += coeff * rows.data()[k * per + i];
            }
            let scale = d.abs().max(composed.abs()).max(1e-12);
            assert!(
                (d - composed).abs() / scale.max(1.0) < 1e-4,
                "pixel {i}: direct {d} vs composed {composed}"
            );
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let model = perturbed_model(31).cast::<f64>();
        let x = sample_input(17).cast::<f64>();
        let y = 4usize;
        let analytic = model.input_gradient(&x, y).unwrap();
        // Spot-check a pixel subset; full-coverage sweeps live in the
        // gradient_checks integration suite.
        let mut probe = x.clone();
        let h = 1e-5;
        for i in (0..28 * 28).step_by(37) {
            let orig = probe.data()[i];
            probe.data_mut()[i] = orig + h;
            let (hi, _) = softmax_xent(&model.forward(&probe).unwrap().logits, y).unwrap();
            probe.data_mut()[i] = orig - h;
            let (lo, _) = softmax_xent(&model.forward(&probe).unwrap().logits, y).unwrap();
            probe.data_mut()[i] = orig;
            let numeric = (hi - lo) / (2.0 * h);
            let err = crate::gradcheck::relative_error(analytic.data()[i], numeric);
            assert!(err < 1e-6, "pixel {i}: analytic {} numeric {numeric}", analytic.data()[i]);
        }
    }

    #[test]
    fn checkpoint_round_trips_bitwise() {
        let model = perturbed_model(41);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.pasm");
        save_checkpoint(&model, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(model, loaded);
        // Same model saved twice is byte-identical.
        let path2 = dir.path().join("model2.pasm");
        save_checkpoint(&model, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn checkpoint_rejects_bad_magic_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pasm");
        std::fs::write(&path, b"MSAPxxxx").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Format(_))));

        let mut bytes = Vec::new();
        bytes.extend_from_slice(CHECKPOINT_MAGIC);
        bytes.extend_from_slice(&99u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("version 99"), "{err}");
    }

    #[test]
    fn checkpoint_rejects_truncation() {
        let model = NetworkModel::<f32>::zeros();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.pasm");
        save_checkpoint(&model, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
