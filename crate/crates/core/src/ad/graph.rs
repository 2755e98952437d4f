//! Define-by-run computation graph with reverse-mode differentiation.
//!
//! Every operation evaluates eagerly, records its inputs, and keeps its
//! result, so a later [`Graph::backward`] call can sweep the tape in
//! reverse and accumulate adjoints by addition. The primitive set is
//! exactly what a convolutional autoencoder needs: dense layers, strided
//! convolutions and their transposes, ELU (plus its derivative as a
//! first-class primitive so tangent rules remain differentiable),
//! elementwise arithmetic, padding, cropping, reshaping, and a full
//! reduction. All arithmetic is sequential with a fixed order, so equal
//! inputs produce bit-identical values, gradients, and downstream updates.

use crate::ad::tensor::Tensor;
use crate::error::{Error, Result};

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Input,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Sum(NodeId),
    Reshape(NodeId),
    Pad2d(NodeId),
    Crop2d(NodeId),
    Elu(NodeId),
    EluDeriv(NodeId),
    Dense { x: NodeId, w: NodeId, b: Option<NodeId> },
    Conv2d { x: NodeId, k: NodeId, stride: usize, pad: usize },
    ConvT2d { x: NodeId, k: NodeId, stride: usize, pad: usize },
}

struct Node {
    op: Op,
    value: Tensor,
}

/// A tape of eagerly evaluated tensor operations.
#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
    adjoints: Vec<Option<Tensor>>,
}

fn mismatch(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Error {
    Error::ShapeMismatch {
        op,
        lhs: lhs.to_vec(),
        rhs: rhs.to_vec(),
    }
}

/// ELU with unit saturation scale.
fn elu_scalar(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

/// ELU derivative; the value at exactly zero is the right limit, 1.
fn elu_deriv_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// Second derivative of ELU; zero on the linear side, including at the kink.
fn elu_second_scalar(x: f64) -> f64 {
    if x < 0.0 {
        x.exp()
    } else {
        0.0
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The recorded value of a node.
    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    /// The accumulated adjoint of a node after [`Graph::backward`]; `None`
    /// if the node does not influence the root (or backward has not run).
    pub fn grad(&self, id: NodeId) -> Option<&Tensor> {
        self.adjoints.get(id.0).and_then(|a| a.as_ref())
    }

    // No finiteness check here: overflow during a diverging reduced-state
    // propagation must flow to the boundary checks that report it as a
    // divergence error, not panic mid-graph.
    fn push(&mut self, op: Op, value: Tensor) -> NodeId {
        self.nodes.push(Node { op, value });
        NodeId(self.nodes.len() - 1)
    }

    /// Records a leaf holding externally supplied data (inputs, parameters).
    pub fn input(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Input, value)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(mismatch("add", va.shape(), vb.shape()));
        }
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x + y)
            .collect();
        let out = Tensor::new(va.shape().to_vec(), data)?;
        Ok(self.push(Op::Add(a, b), out))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(mismatch("sub", va.shape(), vb.shape()));
        }
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x - y)
            .collect();
        let out = Tensor::new(va.shape().to_vec(), data)?;
        Ok(self.push(Op::Sub(a, b), out))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(mismatch("mul", va.shape(), vb.shape()));
        }
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x * y)
            .collect();
        let out = Tensor::new(va.shape().to_vec(), data)?;
        Ok(self.push(Op::Mul(a, b), out))
    }

    /// Multiplication by a compile-time constant (not differentiated in).
    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let va = self.value(a);
        let data = va.data().iter().map(|x| c * x).collect();
        let out = Tensor::new(va.shape().to_vec(), data).expect("same shape");
        self.push(Op::Scale(a, c), out)
    }

    /// Full reduction to a one-element tensor.
    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let total: f64 = self.value(a).data().iter().sum();
        self.push(Op::Sum(a), Tensor::scalar(total))
    }

    pub fn reshape(&mut self, a: NodeId, shape: Vec<usize>) -> Result<NodeId> {
        let out = self.value(a).reshaped(shape)?;
        Ok(self.push(Op::Reshape(a), out))
    }

    /// Zero-pads the trailing two axes of a `[c, h, w]` tensor at the high
    /// side up to `[c, out_h, out_w]`.
    pub fn pad2d(&mut self, a: NodeId, out_h: usize, out_w: usize) -> Result<NodeId> {
        let va = self.value(a);
        let s = va.shape();
        if s.len() != 3 || out_h < s[1] || out_w < s[2] {
            return Err(mismatch("pad2d", s, &[s.first().copied().unwrap_or(0), out_h, out_w]));
        }
        let (c, h, w) = (s[0], s[1], s[2]);
        let mut out = Tensor::zeros(vec![c, out_h, out_w]);
        for ci in 0..c {
            for y in 0..h {
                let src = (ci * h + y) * w;
                let dst = (ci * out_h + y) * out_w;
                out.data_mut()[dst..dst + w].copy_from_slice(&va.data()[src..src + w]);
            }
        }
        Ok(self.push(Op::Pad2d(a), out))
    }

    /// Keeps the low corner of the trailing two axes: `[c, h, w]` down to
    /// `[c, out_h, out_w]`. Exact inverse of [`Graph::pad2d`].
    pub fn crop2d(&mut self, a: NodeId, out_h: usize, out_w: usize) -> Result<NodeId> {
        let va = self.value(a);
        let s = va.shape();
        if s.len() != 3 || out_h > s[1] || out_w > s[2] {
            return Err(mismatch("crop2d", s, &[s.first().copied().unwrap_or(0), out_h, out_w]));
        }
        let (h, w) = (s[1], s[2]);
        let c = s[0];
        let mut out = Tensor::zeros(vec![c, out_h, out_w]);
        for ci in 0..c {
            for y in 0..out_h {
                let src = (ci * h + y) * w;
                let dst = (ci * out_h + y) * out_w;
                out.data_mut()[dst..dst + out_w].copy_from_slice(&va.data()[src..src + out_w]);
            }
        }
        Ok(self.push(Op::Crop2d(a), out))
    }

    pub fn elu(&mut self, a: NodeId) -> NodeId {
        let va = self.value(a);
        let data = va.data().iter().map(|&x| elu_scalar(x)).collect();
        let out = Tensor::new(va.shape().to_vec(), data).expect("same shape");
        self.push(Op::Elu(a), out)
    }

    /// The derivative of ELU as a primitive of its own, so tangent rules
    /// composed from it stay differentiable in a further backward pass.
    pub fn elu_deriv(&mut self, a: NodeId) -> NodeId {
        let va = self.value(a);
        let data = va.data().iter().map(|&x| elu_deriv_scalar(x)).collect();
        let out = Tensor::new(va.shape().to_vec(), data).expect("same shape");
        self.push(Op::EluDeriv(a), out)
    }

    /// Affine map: `w · x (+ b)` with `x: [n_in]`, `w: [n_out, n_in]`.
    pub fn dense(&mut self, x: NodeId, w: NodeId, b: Option<NodeId>) -> Result<NodeId> {
        let (vx, vw) = (self.value(x), self.value(w));
        if vx.shape().len() != 1 || vw.shape().len() != 2 || vw.shape()[1] != vx.shape()[0] {
            return Err(mismatch("dense", vx.shape(), vw.shape()));
        }
        let (n_out, n_in) = (vw.shape()[0], vw.shape()[1]);
        if let Some(bid) = b {
            let vb = self.value(bid);
            if vb.shape() != [n_out] {
                return Err(mismatch("dense bias", vb.shape(), &[n_out]));
            }
        }
        let mut data = vec![0.0; n_out];
        for (o, slot) in data.iter_mut().enumerate() {
            let row = &vw.data()[o * n_in..(o + 1) * n_in];
            let mut acc = 0.0;
            for (wv, xv) in row.iter().zip(vx.data()) {
                acc += wv * xv;
            }
            *slot = acc;
        }
        if let Some(bid) = b {
            for (slot, bv) in data.iter_mut().zip(self.value(bid).data()) {
                *slot += bv;
            }
        }
        let out = Tensor::new(vec![n_out], data)?;
        Ok(self.push(Op::Dense { x, w, b }, out))
    }

    /// Cross-correlation: `x: [c_in, h, w]`, `k: [c_out, c_in, kh, kw]`,
    /// output `[c_out, oh, ow]` with `oh = (h + 2·pad − kh)/stride + 1`.
    pub fn conv2d(&mut self, x: NodeId, k: NodeId, stride: usize, pad: usize) -> Result<NodeId> {
        let (vx, vk) = (self.value(x), self.value(k));
        let (sx, sk) = (vx.shape(), vk.shape());
        if stride == 0 {
            return Err(Error::InvalidConfig {
                key: "conv2d.stride".into(),
                reason: "stride must be at least 1".into(),
            });
        }
        if sx.len() != 3 || sk.len() != 4 || sk[1] != sx[0] {
            return Err(mismatch("conv2d", sx, sk));
        }
        let (c_in, h, w) = (sx[0], sx[1], sx[2]);
        let (c_out, kh, kw) = (sk[0], sk[2], sk[3]);
        if h + 2 * pad < kh || w + 2 * pad < kw {
            return Err(mismatch("conv2d", sx, sk));
        }
        let oh = (h + 2 * pad - kh) / stride + 1;
        let ow = (w + 2 * pad - kw) / stride + 1;
        let mut out = Tensor::zeros(vec![c_out, oh, ow]);
        conv2d_forward(
            vx.data(),
            vk.data(),
            out.data_mut(),
            [c_in, h, w, c_out, kh, kw, oh, ow],
            stride,
            pad,
        );
        Ok(self.push(Op::Conv2d { x, k, stride, pad }, out))
    }

    /// Transposed (fractionally strided) correlation: `x: [c_in, h, w]`,
    /// `k: [c_in, c_out, kh, kw]`, output `[c_out, oh, ow]` with
    /// `oh = (h − 1)·stride − 2·pad + kh`. Exact adjoint of [`Graph::conv2d`]
    /// with the same kernel memory viewed under swapped channel roles.
    pub fn conv2d_transpose(
        &mut self,
        x: NodeId,
        k: NodeId,
        stride: usize,
        pad: usize,
    ) -> Result<NodeId> {
        let (vx, vk) = (self.value(x), self.value(k));
        let (sx, sk) = (vx.shape(), vk.shape());
        if stride == 0 {
            return Err(Error::InvalidConfig {
                key: "conv2d_transpose.stride".into(),
                reason: "stride must be at least 1".into(),
            });
        }
        if sx.len() != 3 || sk.len() != 4 || sk[0] != sx[0] {
            return Err(mismatch("conv2d_transpose", sx, sk));
        }
        let (c_in, h, w) = (sx[0], sx[1], sx[2]);
        let (c_out, kh, kw) = (sk[1], sk[2], sk[3]);
        let oh_plus = (h - 1) * stride + kh;
        let ow_plus = (w - 1) * stride + kw;
        if oh_plus < 2 * pad + 1 || ow_plus < 2 * pad + 1 {
            return Err(mismatch("conv2d_transpose", sx, sk));
        }
        let oh = oh_plus - 2 * pad;
        let ow = ow_plus - 2 * pad;
        let mut out = Tensor::zeros(vec![c_out, oh, ow]);
        convt2d_forward(
            vx.data(),
            vk.data(),
            out.data_mut(),
            [c_in, h, w, c_out, kh, kw, oh, ow],
            stride,
            pad,
        );
        Ok(self.push(Op::ConvT2d { x, k, stride, pad }, out))
    }

    /// `⟨a, b⟩` as a one-element tensor (composed from mul and sum).
    pub fn dot(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let p = self.mul(a, b)?;
        Ok(self.sum(p))
    }

    /// `‖a‖²` as a one-element tensor.
    pub fn squared_norm(&mut self, a: NodeId) -> NodeId {
        let p = self.mul(a, a).expect("same node, same shape");
        self.sum(p)
    }

    /// Reverse sweep from a one-element root. Adjoints accumulate by
    /// addition and are then readable through [`Graph::grad`].
    pub fn backward(&mut self, root: NodeId) -> Result<()> {
        let root_value = self.value(root);
        if root_value.numel() != 1 {
            return Err(Error::NonScalarRoot {
                shape: root_value.shape().to_vec(),
            });
        }
        self.adjoints = vec![None; self.nodes.len()];
        self.adjoints[root.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=root.0).rev() {
            let Some(adj) = self.adjoints[idx].clone() else {
                continue;
            };
            let op = self.nodes[idx].op.clone();
            match op {
                Op::Input => {}
                Op::Add(a, b) => {
                    self.accumulate(a, adj.clone());
                    self.accumulate(b, adj.clone());
                }
                Op::Sub(a, b) => {
                    self.accumulate(a, adj.clone());
                    let neg = scale_tensor(&adj, -1.0);
                    self.accumulate(b, neg);
                }
                Op::Mul(a, b) => {
                    let ga = hadamard(&adj, self.value(b));
                    let gb = hadamard(&adj, self.value(a));
                    self.accumulate(a, ga);
                    self.accumulate(b, gb);
                }
                Op::Scale(a, c) => {
                    self.accumulate(a, scale_tensor(&adj, c));
                }
                Op::Sum(a) => {
                    let shape = self.value(a).shape().to_vec();
                    let g = adj.data()[0];
                    let mut t = Tensor::zeros(shape);
                    t.data_mut().fill(g);
                    self.accumulate(a, t);
                }
                Op::Reshape(a) => {
                    let back = adj.reshaped(self.value(a).shape().to_vec())?;
                    self.accumulate(a, back);
                }
                Op::Pad2d(a) => {
                    let s = self.value(a).shape().to_vec();
                    self.accumulate(a, crop_tensor(&adj, s[1], s[2]));
                }
                Op::Crop2d(a) => {
                    let s = self.value(a).shape().to_vec();
                    self.accumulate(a, pad_tensor(&adj, s[1], s[2]));
                }
                Op::Elu(a) => {
                    let va = self.value(a);
                    let data = adj
                        .data()
                        .iter()
                        .zip(va.data())
                        .map(|(g, &x)| g * elu_deriv_scalar(x))
                        .collect();
                    let t = Tensor::new(va.shape().to_vec(), data)?;
                    self.accumulate(a, t);
                }
                Op::EluDeriv(a) => {
                    let va = self.value(a);
                    let data = adj
                        .data()
                        .iter()
                        .zip(va.data())
                        .map(|(g, &x)| g * elu_second_scalar(x))
                        .collect();
                    let t = Tensor::new(va.shape().to_vec(), data)?;
                    self.accumulate(a, t);
                }
                Op::Dense { x, w, b } => {
                    let vx = self.value(x).clone();
                    let vw = self.value(w).clone();
                    let (n_out, n_in) = (vw.shape()[0], vw.shape()[1]);
                    let mut gx = Tensor::zeros(vec![n_in]);
                    for o in 0..n_out {
                        let g = adj.data()[o];
                        let row = &vw.data()[o * n_in..(o + 1) * n_in];
                        for (slot, wv) in gx.data_mut().iter_mut().zip(row) {
                            *slot += g * wv;
                        }
                    }
                    let mut gw = Tensor::zeros(vec![n_out, n_in]);
                    for o in 0..n_out {
                        let g = adj.data()[o];
                        let row = &mut gw.data_mut()[o * n_in..(o + 1) * n_in];
                        for (slot, xv) in row.iter_mut().zip(vx.data()) {
                            *slot += g * xv;
                        }
                    }
                    self.accumulate(x, gx);
                    self.accumulate(w, gw);
                    if let Some(bid) = b {
                        self.accumulate(bid, adj.clone());
                    }
                }
                Op::Conv2d { x, k, stride, pad } => {
                    let vx = self.value(x).clone();
                    let vk = self.value(k).clone();
                    let (sx, sk, so) = (
                        vx.shape().to_vec(),
                        vk.shape().to_vec(),
                        adj.shape().to_vec(),
                    );
                    let dims = [sx[0], sx[1], sx[2], sk[0], sk[2], sk[3], so[1], so[2]];
                    let mut gx = Tensor::zeros(sx);
                    let mut gk = Tensor::zeros(sk);
                    conv2d_backward(
                        vx.data(),
                        vk.data(),
                        adj.data(),
                        gx.data_mut(),
                        gk.data_mut(),
                        dims,
                        stride,
                        pad,
                    );
                    self.accumulate(x, gx);
                    self.accumulate(k, gk);
                }
                Op::ConvT2d { x, k, stride, pad } => {
                    let vx = self.value(x).clone();
                    let vk = self.value(k).clone();
                    let (sx, sk, so) = (
                        vx.shape().to_vec(),
                        vk.shape().to_vec(),
                        adj.shape().to_vec(),
                    );
                    let dims = [sx[0], sx[1], sx[2], sk[1], sk[2], sk[3], so[1], so[2]];
                    let mut gx = Tensor::zeros(sx);
                    let mut gk = Tensor::zeros(sk);
                    convt2d_backward(
                        vx.data(),
                        vk.data(),
                        adj.data(),
                        gx.data_mut(),
                        gk.data_mut(),
                        dims,
                        stride,
                        pad,
                    );
                    self.accumulate(x, gx);
                    self.accumulate(k, gk);
                }
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, id: NodeId, delta: Tensor) {
        match &mut self.adjoints[id.0] {
            Some(existing) => {
                for (slot, d) in existing.data_mut().iter_mut().zip(delta.data()) {
                    *slot += d;
                }
            }
            slot @ None => *slot = Some(delta),
        }
    }
}

fn scale_tensor(t: &Tensor, c: f64) -> Tensor {
    let data = t.data().iter().map(|x| c * x).collect();
    Tensor::new(t.shape().to_vec(), data).expect("same shape")
}

fn hadamard(a: &Tensor, b: &Tensor) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    Tensor::new(a.shape().to_vec(), data).expect("same shape")
}

fn crop_tensor(t: &Tensor, out_h: usize, out_w: usize) -> Tensor {
    let (c, h, w) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    debug_assert!(out_h <= h && out_w <= w);
    let mut out = Tensor::zeros(vec![c, out_h, out_w]);
    for ci in 0..c {
        for y in 0..out_h {
            let src = (ci * h + y) * w;
            let dst = (ci * out_h + y) * out_w;
            out.data_mut()[dst..dst + out_w].copy_from_slice(&t.data()[src..src + out_w]);
        }
    }
    out
}

fn pad_tensor(t: &Tensor, out_h: usize, out_w: usize) -> Tensor {
    let (c, h, w) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    debug_assert!(out_h >= h && out_w >= w);
    let mut out = Tensor::zeros(vec![c, out_h, out_w]);
    for ci in 0..c {
        for y in 0..h {
            let src = (ci * h + y) * w;
            let dst = (ci * out_h + y) * out_w;
            out.data_mut()[dst..dst + w].copy_from_slice(&t.data()[src..src + w]);
        }
    }
    out
}

/// Dims layout shared by the convolution kernels:
/// `[c_in, h, w, c_out, kh, kw, oh, ow]`.
type ConvDims = [usize; 8];

fn conv2d_forward(x: &[f64], k: &[f64], out: &mut [f64], dims: ConvDims, stride: usize, pad: usize) {
    let [c_in, h, w, c_out, kh, kw, oh, ow] = dims;
    for co in 0..c_out {
        for ci in 0..c_in {
            let kbase = (co * c_in + ci) * kh * kw;
            let xbase = ci * h * w;
            for oy in 0..oh {
                let iy0 = (oy * stride) as isize - pad as isize;
                for ox in 0..ow {
                    let ix0 = (ox * stride) as isize - pad as isize;
                    let mut acc = 0.0;
                    for ky in 0..kh {
                        let iy = iy0 + ky as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let row = xbase + iy as usize * w;
                        let krow = kbase + ky * kw;
                        for kx in 0..kw {
                            let ix = ix0 + kx as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            acc += x[row + ix as usize] * k[krow + kx];
                        }
                    }
                    out[(co * oh + oy) * ow + ox] += acc;
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn conv2d_backward(
    x: &[f64],
    k: &[f64],
    adj: &[f64],
    gx: &mut [f64],
    gk: &mut [f64],
    dims: ConvDims,
    stride: usize,
    pad: usize,
) {
    let [c_in, h, w, c_out, kh, kw, oh, ow] = dims;
    for co in 0..c_out {
        for ci in 0..c_in {
            let kbase = (co * c_in + ci) * kh * kw;
            let xbase = ci * h * w;
            for oy in 0..oh {
                let iy0 = (oy * stride) as isize - pad as isize;
                for ox in 0..ow {
                    let ix0 = (ox * stride) as isize - pad as isize;
                    let g = adj[(co * oh + oy) * ow + ox];
                    for ky in 0..kh {
                        let iy = iy0 + ky as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let row = xbase + iy as usize * w;
                        let krow = kbase + ky * kw;
                        for kx in 0..kw {
                            let ix = ix0 + kx as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            gx[row + ix as usize] += g * k[krow + kx];
                            gk[krow + kx] += g * x[row + ix as usize];
                        }
                    }
                }
            }
        }
    }
}

fn convt2d_forward(
    x: &[f64],
    k: &[f64],
    out: &mut [f64],
    dims: ConvDims,
    stride: usize,
    pad: usize,
) {
    let [c_in, h, w, c_out, kh, kw, oh, ow] = dims;
    for ci in 0..c_in {
        for co in 0..c_out {
            let kbase = (ci * c_out + co) * kh * kw;
            let obase = co * oh * ow;
            for iy in 0..h {
                let oy0 = (iy * stride) as isize - pad as isize;
                for ix in 0..w {
                    let ox0 = (ix * stride) as isize - pad as isize;
                    let v = x[(ci * h + iy) * w + ix];
                    for ky in 0..kh {
                        let oy = oy0 + ky as isize;
                        if oy < 0 || oy >= oh as isize {
                            continue;
                        }
                        let orow = obase + oy as usize * ow;
                        let krow = kbase + ky * kw;
                        for kx in 0..kw {
                            let ox = ox0 + kx as isize;
                            if ox < 0 || ox >= ow as isize {
                                continue;
                            }
                            out[orow + ox as usize] += v * k[krow + kx];
                        }
                    }
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn convt2d_backward(
    x: &[f64],
    k: &[f64],
    adj: &[f64],
    gx: &mut [f64],
    gk: &mut [f64],
    dims: ConvDims,
    stride: usize,
    pad: usize,
) {
    let [c_in, h, w, c_out, kh, kw, oh, ow] = dims;
    for ci in 0..c_in {
        for co in 0..c_out {
            let kbase = (ci * c_out + co) * kh * kw;
            let obase = co * oh * ow;
            for iy in 0..h {
                let oy0 = (iy * stride) as isize - pad as isize;
                for ix in 0..w {
                    let ox0 = (ix * stride) as isize - pad as isize;
                    let xi = (ci * h + iy) * w + ix;
                    let v = x[xi];
                    let mut acc = 0.0;
                    for ky in 0..kh {
                        let oy = oy0 + ky as isize;
                        if oy < 0 || oy >= oh as isize {
                            continue;
                        }
                        let orow = obase + oy as usize * ow;
                        let krow = kbase + ky * kw;
                        for kx in 0..kw {
                            let ox = ox0 + kx as isize;
                            if ox < 0 || ox >= ow as isize {
                                continue;
                            }
                            let g = adj[orow + ox as usize];
                            acc += g * k[krow + kx];
                            gk[krow + kx] += g * v;
                        }
                    }
                    gx[xi] += acc;
                }
            }
        }
    }
}
