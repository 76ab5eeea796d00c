//! Dense n-dimensional float tensors and the differentiable primitives the
//! network is built from: valid convolution, 2x2 max pooling, fully connected
//! layers, ReLU, and softmax cross-entropy.
//!
//! Every primitive is a pure function with an analytic backward pass for both
//! its input and its parameters. Training and attacks run in `f32`; the same
//! code instantiated at `f64` backs the finite-difference checks in
//! [`crate::gradcheck`].

use crate::error::{Error, Result};

/// Element types tensors can hold. Implemented for `f32` and `f64` only.
pub trait Scalar:
    num_traits::Float + std::fmt::Debug + std::fmt::Display + Default + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn into_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn into_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn into_f64(self) -> f64 {
        self
    }
}

/// Dense row-major tensor. `product(shape) == data.len()` always holds and
/// every extent is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T = f32> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    /// Builds a tensor, validating that the shape matches the data length.
    pub fn from_vec(shape: impl Into<Vec<usize>>, data: Vec<T>) -> Result<Self> {
        let shape = shape.into();
        if let Some(axis) = shape.iter().position(|&e| e == 0) {
            return Err(Error::Shape {
                op: "tensor",
                detail: format!("axis {axis} has zero extent in shape {shape:?}"),
            });
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Shape {
                op: "tensor",
                detail: format!(
                    "shape {:?} implies {} elements, data holds {}",
                    shape,
                    expected,
                    data.len()
                ),
            });
        }
        Ok(Tensor { shape, data })
    }

    /// Like [`Tensor::from_vec`], but additionally rejects NaN/Inf values.
    pub fn checked(shape: impl Into<Vec<usize>>, data: Vec<T>) -> Result<Self> {
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Value(format!(
                "non-finite value {} at flat index {pos}",
                data[pos]
            )));
        }
        Self::from_vec(shape, data)
    }

    pub fn zeros(shape: impl Into<Vec<usize>>) -> Self {
        let shape = shape.into();
        let len = shape.iter().product();
        Tensor { shape, data: vec![T::zero(); len] }
    }

    pub fn full(shape: impl Into<Vec<usize>>, value: T) -> Self {
        let shape = shape.into();
        let len = shape.iter().product();
        Tensor { shape, data: vec![value; len] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Reinterprets the buffer under a new shape of equal volume.
    pub fn reshaped(mut self, shape: impl Into<Vec<usize>>) -> Result<Self> {
        let shape = shape.into();
        let expected: usize = shape.iter().product();
        if expected != self.data.len() || shape.contains(&0) {
            return Err(Error::Shape {
                op: "reshape",
                detail: format!("cannot view {} elements as {:?}", self.data.len(), shape),
            });
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| U::from_f64(v.into_f64())).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Gradient bundle returned by the backward pass of a primitive.
///
/// `grad_input` matches the forward input shape; `grad_params` holds one
/// tensor per parameter in declaration order (empty for parameter-free
/// primitives such as pooling and ReLU).
#[derive(Clone, Debug)]
pub struct PrimitiveGrad<T = f32> {
    pub grad_input: Tensor<T>,
    pub grad_params: Vec<Tensor<T>>,
}

fn expect_rank<T: Scalar>(op: &'static str, t: &Tensor<T>, rank: usize) -> Result<()> {
    if t.shape.len() != rank {
        return Err(Error::Shape {
            op,
            detail: format!("expected rank {rank}, got shape {:?}", t.shape),
        });
    }
    Ok(())
}

fn conv_dims<T: Scalar>(
    input: &Tensor<T>,
    kernels: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<(usize, usize, usize, usize, usize, usize, usize, usize)> {
    expect_rank("conv2d", input, 3)?;
    expect_rank("conv2d", kernels, 4)?;
    expect_rank("conv2d", bias, 1)?;
    let (c, h, w) = (input.shape[0], input.shape[1], input.shape[2]);
    let (k, kc, kh, kw) = (kernels.shape[0], kernels.shape[1], kernels.shape[2], kernels.shape[3]);
    if kc != c {
        return Err(Error::Shape {
            op: "conv2d",
            detail: format!("kernel channel axis is {kc}, input has {c} channels"),
        });
    }
    if bias.shape[0] != k {
        return Err(Error::Shape {
            op: "conv2d",
            detail: format!("bias axis is {}, kernels produce {k} maps", bias.shape[0]),
        });
    }
    if kh > h || kw > w {
        return Err(Error::Shape {
            op: "conv2d",
            detail: format!("kernel {kh}x{kw} exceeds input {h}x{w} on a spatial axis"),
        });
    }
    Ok((c, h, w, k, kh, kw, h - kh + 1, w - kw + 1))
}

/// Valid (no padding, stride 1) 2-D cross-correlation.
///
/// `out[k,i,j] = bias[k] + sum_{c,a,b} input[c,i+a,j+b] * kernels[k,c,a,b]`
pub fn conv2d<T: Scalar>(
    input: &Tensor<T>,
    kernels: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let (c_in, h, w, k_out, kh, kw, oh, ow) = conv_dims(input, kernels, bias)?;
    let mut out = vec![T::zero(); k_out * oh * ow];
    for k in 0..k_out {
        let plane = &mut out[k * oh * ow..(k + 1) * oh * ow];
        let b = bias.data[k];
        for v in plane.iter_mut() {
            *v = b;
        }
        for c in 0..c_in {
            let in_plane = &input.data[c * h * w..(c + 1) * h * w];
            let ker = &kernels.data[(k * c_in + c) * kh * kw..(k * c_in + c + 1) * kh * kw];
            for i in 0..oh {
                let out_row = &mut plane[i * ow..(i + 1) * ow];
                for a in 0..kh {
                    let in_row = &in_plane[(i + a) * w..(i + a) * w + w];
                    for b_off in 0..kw {
                        let kv = ker[a * kw + b_off];
                        let seg = &in_row[b_off..b_off + ow];
                        for (o, &x) in out_row.iter_mut().zip(seg) {
                            *o = *o + kv * x;
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(vec![k_out, oh, ow], out)
}

/// Backward pass of [`conv2d`]. `grad_params` is `[grad_kernels, grad_bias]`.
pub fn conv2d_backward<T: Scalar>(
    input: &Tensor<T>,
    kernels: &Tensor<T>,
    bias: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<PrimitiveGrad<T>> {
    let (c_in, h, w, k_out, kh, kw, oh, ow) = conv_dims(input, kernels, bias)?;
    if grad_out.shape() != [k_out, oh, ow] {
        return Err(Error::Shape {
            op: "conv2d_backward",
            detail: format!(
                "upstream gradient {:?} does not match output [{k_out}, {oh}, {ow}]",
                grad_out.shape()
            ),
        });
    }
    let mut grad_input = vec![T::zero(); c_in * h * w];
    let mut grad_kernels = vec![T::zero(); kernels.len()];
    let mut grad_bias = vec![T::zero(); k_out];

    for k in 0..k_out {
        let g_plane = &grad_out.data[k * oh * ow..(k + 1) * oh * ow];
        grad_bias[k] = g_plane.iter().fold(T::zero(), |acc, &g| acc + g);
        for c in 0..c_in {
            let in_plane = &input.data[c * h * w..(c + 1) * h * w];
            let gi_plane = &mut grad_input[c * h * w..(c + 1) * h * w];
            let base = (k * c_in + c) * kh * kw;
            let ker = &kernels.data[base..base + kh * kw];
            let gker = &mut grad_kernels[base..base + kh * kw];
            for i in 0..oh {
                let g_row = &g_plane[i * ow..(i + 1) * ow];
                for a in 0..kh {
                    let in_row = &in_plane[(i + a) * w..(i + a) * w + w];
                    let gi_row = &mut gi_plane[(i + a) * w..(i + a) * w + w];
                    for b_off in 0..kw {
                        let kv = ker[a * kw + b_off];
                        let mut acc = T::zero();
                        let gi_seg = &mut gi_row[b_off..b_off + ow];
                        let in_seg = &in_row[b_off..b_off + ow];
                        for ((gi, &x), &g) in gi_seg.iter_mut().zip(in_seg).zip(g_row) {
                            *gi = *gi + kv * g;
                            acc = acc + x * g;
                        }
                        gker[a * kw + b_off] = gker[a * kw + b_off] + acc;
                    }
                }
            }
        }
    }
    Ok(PrimitiveGrad {
        grad_input: Tensor::from_vec(vec![c_in, h, w], grad_input)?,
        grad_params: vec![
            Tensor::from_vec(kernels.shape.clone(), grad_kernels)?,
            Tensor::from_vec(vec![k_out], grad_bias)?,
        ],
    })
}

/// Input gradient of [`conv2d`] alone, for callers that do not need
/// parameter gradients (attack-time backpropagation).
pub fn conv2d_backward_input<T: Scalar>(
    input_shape: &[usize],
    kernels: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<Tensor<T>> {
    expect_rank("conv2d_backward_input", kernels, 4)?;
    if input_shape.len() != 3 {
        return Err(Error::Shape {
            op: "conv2d_backward_input",
            detail: format!("input shape {input_shape:?} is not rank 3"),
        });
    }
    let (c_in, h, w) = (input_shape[0], input_shape[1], input_shape[2]);
    let (k_out, kc, kh, kw) =
        (kernels.shape[0], kernels.shape[1], kernels.shape[2], kernels.shape[3]);
    if kc != c_in {
        return Err(Error::Shape {
            op: "conv2d_backward_input",
            detail: format!("kernel channel axis is {kc}, input has {c_in} channels"),
        });
    }
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    if grad_out.shape() != [k_out, oh, ow] {
        return Err(Error::Shape {
            op: "conv2d_backward_input",
            detail: format!(
                "upstream gradient {:?} does not match output [{k_out}, {oh}, {ow}]",
                grad_out.shape()
            ),
        });
    }
    let mut grad_input = vec![T::zero(); c_in * h * w];
    for k in 0..k_out {
        let g_plane = &grad_out.data[k * oh * ow..(k + 1) * oh * ow];
        for c in 0..c_in {
            let gi_plane = &mut grad_input[c * h * w..(c + 1) * h * w];
            let base = (k * c_in + c) * kh * kw;
            let ker = &kernels.data[base..base + kh * kw];
            for i in 0..oh {
                let g_row = &g_plane[i * ow..(i + 1) * ow];
                for a in 0..kh {
                    let gi_row = &mut gi_plane[(i + a) * w..(i + a) * w + w];
                    for b_off in 0..kw {
                        let kv = ker[a * kw + b_off];
                        let gi_seg = &mut gi_row[b_off..b_off + ow];
                        for (gi, &g) in gi_seg.iter_mut().zip(g_row) {
                            *gi = *gi + kv * g;
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(vec![c_in, h, w], grad_input)
}

/// Winner positions of a 2x2 max pool, flat indices into the pooling input.
pub type ArgmaxMap = Vec<u32>;

/// Non-overlapping 2x2 max pooling. Requires even spatial extents.
///
/// Ties resolve to the first maximal cell in row-major window order, so the
/// backward routing is deterministic.
pub fn maxpool2<T: Scalar>(input: &Tensor<T>) -> Result<(Tensor<T>, ArgmaxMap)> {
    expect_rank("maxpool2", input, 3)?;
    let (c, h, w) = (input.shape[0], input.shape[1], input.shape[2]);
    if h % 2 != 0 {
        return Err(Error::Shape {
            op: "maxpool2",
            detail: format!("height axis {h} is odd"),
        });
    }
    if w % 2 != 0 {
        return Err(Error::Shape {
            op: "maxpool2",
            detail: format!("width axis {w} is odd"),
        });
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut argmax = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let plane = &input.data[ch * h * w..(ch + 1) * h * w];
        for i in 0..oh {
            for j in 0..ow {
                let mut best_idx = (2 * i) * w + 2 * j;
                let mut best = plane[best_idx];
                for (di, dj) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = (2 * i + di) * w + 2 * j + dj;
                    if plane[idx] > best {
                        best = plane[idx];
                        best_idx = idx;
                    }
                }
                out.push(best);
                argmax.push((ch * h * w + best_idx) as u32);
            }
        }
    }
    Ok((Tensor::from_vec(vec![c, oh, ow], out)?, argmax))
}

/// Routes the upstream gradient entirely to each window's argmax cell.
pub fn maxpool2_backward<T: Scalar>(
    input_shape: &[usize],
    argmax: &ArgmaxMap,
    grad_out: &Tensor<T>,
) -> Result<PrimitiveGrad<T>> {
    if grad_out.len() != argmax.len() {
        return Err(Error::Shape {
            op: "maxpool2_backward",
            detail: format!(
                "gradient has {} cells, argmax map has {}",
                grad_out.len(),
                argmax.len()
            ),
        });
    }
    let mut grad_input = Tensor::zeros(input_shape.to_vec());
    let gi = grad_input.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        gi[idx as usize] = gi[idx as usize] + g;
    }
    Ok(PrimitiveGrad { grad_input, grad_params: vec![] })
}

fn dense_dims<T: Scalar>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<(usize, usize)> {
    expect_rank("dense", input, 1)?;
    expect_rank("dense", weight, 2)?;
    expect_rank("dense", bias, 1)?;
    let (m, n) = (weight.shape[0], weight.shape[1]);
    if input.shape[0] != n {
        return Err(Error::Shape {
            op: "dense",
            detail: format!("input axis is {}, weight expects {n} columns", input.shape[0]),
        });
    }
    if bias.shape[0] != m {
        return Err(Error::Shape {
            op: "dense",
            detail: format!("bias axis is {}, weight has {m} rows", bias.shape[0]),
        });
    }
    Ok((m, n))
}

/// Fully connected layer: `out = W * input + b` with `W` of shape `[m, n]`.
pub fn dense<T: Scalar>(input: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let (m, n) = dense_dims(input, weight, bias)?;
    let x = input.data();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let row = &weight.data[i * n..(i + 1) * n];
        let mut acc = bias.data[i];
        for (&wv, &xv) in row.iter().zip(x) {
            acc = acc + wv * xv;
        }
        out.push(acc);
    }
    Tensor::from_vec(vec![m], out)
}

/// Backward pass of [`dense`]. `grad_params` is `[grad_weight, grad_bias]`.
pub fn dense_backward<T: Scalar>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<PrimitiveGrad<T>> {
    let (m, n) = dense_dims(input, weight, bias)?;
    if grad_out.shape() != [m] {
        return Err(Error::Shape {
            op: "dense_backward",
            detail: format!("upstream gradient {:?} does not match output [{m}]", grad_out.shape()),
        });
    }
    let x = input.data();
    let mut grad_input = vec![T::zero(); n];
    let mut grad_weight = vec![T::zero(); m * n];
    for i in 0..m {
        let g = grad_out.data[i];
        let row = &weight.data[i * n..(i + 1) * n];
        let grow = &mut grad_weight[i * n..(i + 1) * n];
        for ((gi, gw), (&wv, &xv)) in
            grad_input.iter_mut().zip(grow.iter_mut()).zip(row.iter().zip(x))
        {
            *gi = *gi + g * wv;
            *gw = g * xv;
        }
    }
    Ok(PrimitiveGrad {
        grad_input: Tensor::from_vec(vec![n], grad_input)?,
        grad_params: vec![
            Tensor::from_vec(vec![m, n], grad_weight)?,
            Tensor::from_vec(vec![m], grad_out.data.clone())?,
        ],
    })
}

/// Input gradient of [`dense`] alone: `W^T * grad_out`.
pub fn dense_backward_input<T: Scalar>(weight: &Tensor<T>, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
    expect_rank("dense_backward_input", weight, 2)?;
    let (m, n) = (weight.shape[0], weight.shape[1]);
    if grad_out.shape() != [m] {
        return Err(Error::Shape {
            op: "dense_backward_input",
            detail: format!("upstream gradient {:?} does not match output [{m}]", grad_out.shape()),
        });
    }
    let mut grad_input = vec![T::zero(); n];
    for i in 0..m {
        let g = grad_out.data[i];
        let row = &weight.data[i * n..(i + 1) * n];
        for (gi, &wv) in grad_input.iter_mut().zip(row) {
            *gi = *gi + g * wv;
        }
    }
    Tensor::from_vec(vec![n], grad_input)
}

/// Elementwise `max(x, 0)`.
pub fn relu<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    Tensor {
        shape: input.shape.clone(),
        data: input.data.iter().map(|&v| if v > T::zero() { v } else { T::zero() }).collect(),
    }
}

/// Backward pass of [`relu`]; uses the subgradient 0 at the kink.
pub fn relu_backward<T: Scalar>(forward_input: &Tensor<T>, grad_out: &Tensor<T>) -> Result<PrimitiveGrad<T>> {
    if forward_input.shape() != grad_out.shape() {
        return Err(Error::Shape {
            op: "relu_backward",
            detail: format!(
                "gradient shape {:?} does not match input {:?}",
                grad_out.shape(),
                forward_input.shape()
            ),
        });
    }
    let data = forward_input
        .data
        .iter()
        .zip(&grad_out.data)
        .map(|(&x, &g)| if x > T::zero() { g } else { T::zero() })
        .collect();
    Ok(PrimitiveGrad {
        grad_input: Tensor { shape: forward_input.shape.clone(), data },
        grad_params: vec![],
    })
}

/// Numerically stable softmax probabilities.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Tensor<T> {
    let max = logits.data.iter().fold(T::neg_infinity(), |a, &b| if b > a { b } else { a });
    let exps: Vec<T> = logits.data.iter().map(|&v| (v - max).exp()).collect();
    let sum = exps.iter().fold(T::zero(), |a, &b| a + b);
    Tensor {
        shape: logits.shape.clone(),
        data: exps.into_iter().map(|e| e / sum).collect(),
    }
}

/// Cross-entropy loss of softmax(logits) against a class index, together with
/// the gradient w.r.t. the logits: `softmax(logits) - onehot(label)`.
pub fn softmax_xent<T: Scalar>(logits: &Tensor<T>, label: usize) -> Result<(T, Tensor<T>)> {
    expect_rank("softmax_xent", logits, 1)?;
    let k = logits.shape[0];
    if label >= k {
        return Err(Error::Index { index: label, bound: k });
    }
    let max = logits.data.iter().fold(T::neg_infinity(), |a, &b| if b > a { b } else { a });
    let sum = logits.data.iter().fold(T::zero(), |a, &b| a + (b - max).exp());
    let loss = sum.ln() + max - logits.data[label];
    let mut grad = softmax(logits);
    grad.data[label] = grad.data[label] - T::one();
    Ok((loss, grad))
}

/// Index of the largest component; ties resolve to the lowest index.
pub fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
