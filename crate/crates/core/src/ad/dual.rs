//! Forward-mode tangent propagation built from graph primitives.
//!
//! A [`Dual`] pairs a primal node with a same-shaped tangent node. Each
//! rule below records the tangent computation with ordinary graph
//! operations (the ELU rule uses the ELU-derivative primitive), so a
//! Jacobian-vector product assembled this way is itself a graph value:
//! backward passes differentiate straight through it, which is exactly
//! what a loss containing a directional derivative needs.

use crate::ad::graph::{Graph, NodeId};
use crate::ad::tensor::Tensor;
use crate::error::{Error, Result};

/// A primal/tangent pair of same-shaped graph nodes.
#[derive(Debug, Clone, Copy)]
pub struct Dual {
    pub primal: NodeId,
    pub tangent: NodeId,
}

impl Dual {
    /// Wraps two existing nodes, checking that the shapes agree.
    pub fn from_nodes(g: &Graph, primal: NodeId, tangent: NodeId) -> Result<Self> {
        let (sp, st) = (g.value(primal).shape(), g.value(tangent).shape());
        if sp != st {
            return Err(Error::ShapeMismatch {
                op: "dual",
                lhs: sp.to_vec(),
                rhs: st.to_vec(),
            });
        }
        Ok(Self { primal, tangent })
    }

    /// Records fresh input nodes for a value and its perturbation direction.
    pub fn new(g: &mut Graph, value: Tensor, direction: Tensor) -> Result<Self> {
        if value.shape() != direction.shape() {
            return Err(Error::ShapeMismatch {
                op: "dual",
                lhs: value.shape().to_vec(),
                rhs: direction.shape().to_vec(),
            });
        }
        let primal = g.input(value);
        let tangent = g.input(direction);
        Ok(Self { primal, tangent })
    }
}

impl Graph {
    pub fn dual_add(&mut self, a: Dual, b: Dual) -> Result<Dual> {
        let primal = self.add(a.primal, b.primal)?;
        let tangent = self.add(a.tangent, b.tangent)?;
        Ok(Dual { primal, tangent })
    }

    pub fn dual_sub(&mut self, a: Dual, b: Dual) -> Result<Dual> {
        let primal = self.sub(a.primal, b.primal)?;
        let tangent = self.sub(a.tangent, b.tangent)?;
        Ok(Dual { primal, tangent })
    }

    /// Product rule for the elementwise product.
    pub fn dual_mul(&mut self, a: Dual, b: Dual) -> Result<Dual> {
        let primal = self.mul(a.primal, b.primal)?;
        let left = self.mul(a.tangent, b.primal)?;
        let right = self.mul(a.primal, b.tangent)?;
        let tangent = self.add(left, right)?;
        Ok(Dual { primal, tangent })
    }

    pub fn dual_scale(&mut self, a: Dual, c: f64) -> Dual {
        Dual {
            primal: self.scale(a.primal, c),
            tangent: self.scale(a.tangent, c),
        }
    }

    pub fn dual_sum(&mut self, a: Dual) -> Dual {
        Dual {
            primal: self.sum(a.primal),
            tangent: self.sum(a.tangent),
        }
    }

    pub fn dual_reshape(&mut self, a: Dual, shape: Vec<usize>) -> Result<Dual> {
        let primal = self.reshape(a.primal, shape.clone())?;
        let tangent = self.reshape(a.tangent, shape)?;
        Ok(Dual { primal, tangent })
    }

    pub fn dual_pad2d(&mut self, a: Dual, out_h: usize, out_w: usize) -> Result<Dual> {
        let primal = self.pad2d(a.primal, out_h, out_w)?;
        let tangent = self.pad2d(a.tangent, out_h, out_w)?;
        Ok(Dual { primal, tangent })
    }

    pub fn dual_crop2d(&mut self, a: Dual, out_h: usize, out_w: usize) -> Result<Dual> {
        let primal = self.crop2d(a.primal, out_h, out_w)?;
        let tangent = self.crop2d(a.tangent, out_h, out_w)?;
        Ok(Dual { primal, tangent })
    }

    /// Chain rule through ELU: the tangent is scaled by the ELU derivative
    /// of the primal, recorded with the derivative primitive.
    pub fn dual_elu(&mut self, a: Dual) -> Result<Dual> {
        let primal = self.elu(a.primal);
        let slope = self.elu_deriv(a.primal);
        let tangent = self.mul(slope, a.tangent)?;
        Ok(Dual { primal, tangent })
    }

    /// Dense layer with parameters held constant along the tangent: the
    /// perturbation direction lives in the input, so the tangent is the
    /// same affine map without its bias.
    pub fn dual_dense(&mut self, x: Dual, w: NodeId, b: Option<NodeId>) -> Result<Dual> {
        let primal = self.dense(x.primal, w, b)?;
        let tangent = self.dense(x.tangent, w, None)?;
        Ok(Dual { primal, tangent })
    }

    /// Convolution with a constant kernel: linear, so the tangent is the
    /// same convolution of the tangent input.
    pub fn dual_conv2d(&mut self, x: Dual, k: NodeId, stride: usize, pad: usize) -> Result<Dual> {
        let primal = self.conv2d(x.primal, k, stride, pad)?;
        let tangent = self.conv2d(x.tangent, k, stride, pad)?;
        Ok(Dual { primal, tangent })
    }

    pub fn dual_conv2d_transpose(
        &mut self,
        x: Dual,
        k: NodeId,
        stride: usize,
        pad: usize,
    ) -> Result<Dual> {
        let primal = self.conv2d_transpose(x.primal, k, stride, pad)?;
        let tangent = self.conv2d_transpose(x.tangent, k, stride, pad)?;
        Ok(Dual { primal, tangent })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::rng::SplitMix64;

    fn random_tensor(shape: Vec<usize>, rng: &mut SplitMix64) -> Tensor {
        let numel = shape.iter().product();
        let data = (0..numel).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Tensor::new(shape, data).unwrap()
    }

    fn random_tensor_off_kink(shape: Vec<usize>, rng: &mut SplitMix64) -> Tensor {
        let numel = shape.iter().product();
        let data = (0..numel)
            .map(|_| {
                let v = rng.uniform(0.05, 1.0);
                if rng.next_f64() < 0.5 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        Tensor::new(shape, data).unwrap()
    }

    /// Small conv-elu-dense network used across the tests: parameters are
    /// plain tensors, inputs flow as duals.
    struct ToyNet {
        k: Tensor,
        w: Tensor,
        b: Tensor,
    }

    impl ToyNet {
        fn new(rng: &mut SplitMix64) -> Self {
            Self {
                k: random_tensor(vec![2, 1, 3, 3], rng),
                w: random_tensor(vec![3, 2 * 4 * 4], rng),
                b: random_tensor(vec![3], rng),
            }
        }

        fn forward(&self, g: &mut Graph, x: NodeId) -> NodeId {
            let k = g.input(self.k.clone());
            let w = g.input(self.w.clone());
            let b = g.input(self.b.clone());
            let c = g.conv2d(x, k, 1, 1).unwrap();
            let e = g.elu(c);
            let flat = g.reshape(e, vec![2 * 4 * 4]).unwrap();
            g.dense(flat, w, Some(b)).unwrap()
        }

        fn forward_dual(&self, g: &mut Graph, x: Dual) -> Dual {
            let k = g.input(self.k.clone());
            let w = g.input(self.w.clone());
            let b = g.input(self.b.clone());
            let c = g.dual_conv2d(x, k, 1, 1).unwrap();
            let e = g.dual_elu(c).unwrap();
            let flat = g.dual_reshape(e, vec![2 * 4 * 4]).unwrap();
            g.dual_dense(flat, w, Some(b)).unwrap()
        }

        fn eval(&self, x: &Tensor) -> Vec<f64> {
            let mut g = Graph::new();
            let xi = g.input(x.clone());
            let y = self.forward(&mut g, xi);
            g.value(y).data().to_vec()
        }

        fn jvp(&self, x: &Tensor, v: &Tensor) -> Vec<f64> {
            let mut g = Graph::new();
            let d = Dual::new(&mut g, x.clone(), v.clone()).unwrap();
            let out = self.forward_dual(&mut g, d);
            g.value(out.tangent).data().to_vec()
        }
    }

    #[test]
    fn jvp_of_a_linear_map_is_the_map_applied_to_the_direction() {
        let mut rng = SplitMix64::new(3);
        let w = random_tensor(vec![4, 6], &mut rng);
        let x = random_tensor(vec![6], &mut rng);
        let v = random_tensor(vec![6], &mut rng);

        let mut g = Graph::new();
        let wi = g.input(w.clone());
        let d = Dual::new(&mut g, x, v.clone()).unwrap();
        let out = g.dual_dense(d, wi, None).unwrap();

        let mut g2 = Graph::new();
        let wi2 = g2.input(w);
        let vi = g2.input(v);
        let fv = g2.dense(vi, wi2, None).unwrap();
        assert_eq!(g.value(out.tangent).data(), g2.value(fv).data());
    }

    #[test]
    fn tangent_at_the_elu_kink_uses_the_right_limit() {
        let mut g = Graph::new();
        let d = Dual::new(
            &mut g,
            Tensor::new(vec![2], vec![0.0, 0.0]).unwrap(),
            Tensor::new(vec![2], vec![0.7, -0.3]).unwrap(),
        )
        .unwrap();
        let out = g.dual_elu(d).unwrap();
        assert_eq!(g.value(out.tangent).data(), &[0.7, -0.3][..]);
    }

    #[test]
    fn jvp_agrees_with_the_transposed_backward_pass() {
        let mut rng = SplitMix64::new(17);
        let net = ToyNet::new(&mut rng);
        let x = random_tensor_off_kink(vec![1, 4, 4], &mut rng);
        let v = random_tensor(vec![1, 4, 4], &mut rng);
        let u = random_tensor(vec![3], &mut rng);

        let jvp = net.jvp(&x, &v);
        let lhs: f64 = u.data().iter().zip(&jvp).map(|(a, b)| a * b).sum();

        // vjp via backward on ⟨u, f(x)⟩.
        let mut g = Graph::new();
        let xi = g.input(x.clone());
        let y = net.forward(&mut g, xi);
        let ui = g.input(u);
        let root = g.dot(y, ui).unwrap();
        g.backward(root).unwrap();
        let vjp = g.grad(xi).unwrap();
        let rhs: f64 = vjp.data().iter().zip(v.data()).map(|(a, b)| a * b).sum();

        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn jvp_is_linear_in_the_direction() {
        let mut rng = SplitMix64::new(29);
        let net = ToyNet::new(&mut rng);
        let x = random_tensor_off_kink(vec![1, 4, 4], &mut rng);
        let v = random_tensor(vec![1, 4, 4], &mut rng);
        let w = random_tensor(vec![1, 4, 4], &mut rng);
        let (alpha, beta) = (0.65, -1.4);

        let mut combo = v.clone();
        for (slot, wv) in combo.data_mut().iter_mut().zip(w.data()) {
            *slot = alpha * *slot + beta * wv;
        }
        let direct = net.jvp(&x, &combo);
        let jv = net.jvp(&x, &v);
        let jw = net.jvp(&x, &w);
        for i in 0..direct.len() {
            let want = alpha * jv[i] + beta * jw[i];
            assert!((direct[i] - want).abs() <= 1e-10 * want.abs().max(1.0));
        }
    }

    #[test]
    fn jvp_matches_the_directional_finite_difference() {
        let mut rng = SplitMix64::new(41);
        let net = ToyNet::new(&mut rng);
        let x = random_tensor_off_kink(vec![1, 4, 4], &mut rng);
        let v = random_tensor(vec![1, 4, 4], &mut rng);
        let h = 1e-5;

        let mut plus = x.clone();
        let mut minus = x.clone();
        for i in 0..x.numel() {
            plus.data_mut()[i] += h * v.data()[i];
            minus.data_mut()[i] -= h * v.data()[i];
        }
        let fp = net.eval(&plus);
        let fm = net.eval(&minus);
        let jvp = net.jvp(&x, &v);
        for i in 0..jvp.len() {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            assert!(
                (jvp[i] - fd).abs() <= 1e-5 * fd.abs().max(1.0),
                "entry {i}: {} vs {fd}",
                jvp[i]
            );
        }
    }

    #[test]
    fn gradient_through_a_jvp_matches_finite_differences() {
        // Objective: ‖jvp(f_θ, x, v) − t‖² differentiated with respect to
        // the parameters θ — the exact structure a dynamics-mismatch loss
        // needs, exercising adjoints of the derivative primitives.
        let mut rng = SplitMix64::new(53);
        let x = random_tensor_off_kink(vec![1, 4, 4], &mut rng);
        let v = random_tensor(vec![1, 4, 4], &mut rng);
        let t = random_tensor(vec![3], &mut rng);
        let k0 = random_tensor(vec![2, 1, 3, 3], &mut rng);
        let w0 = random_tensor(vec![3, 2 * 4 * 4], &mut rng);

        let objective = |k: &Tensor, w: &Tensor| -> (f64, Tensor, Tensor) {
            let mut g = Graph::new();
            let ki = g.input(k.clone());
            let wi = g.input(w.clone());
            let ti = g.input(t.clone());
            let d = Dual::new(&mut g, x.clone(), v.clone()).unwrap();
            let c = g.dual_conv2d(d, ki, 1, 1).unwrap();
            let e = g.dual_elu(c).unwrap();
            let flat = g.dual_reshape(e, vec![2 * 4 * 4]).unwrap();
            let out = g.dual_dense(flat, wi, None).unwrap();
            let diff = g.sub(out.tangent, ti).unwrap();
            let root = g.squared_norm(diff);
            g.backward(root).unwrap();
            (
                g.value(root).item().unwrap(),
                g.grad(ki).unwrap().clone(),
                g.grad(wi).unwrap().clone(),
            )
        };

        let (_, gk, gw) = objective(&k0, &w0);
        let h = 1e-5;
        for e in 0..k0.numel() {
            let mut kp = k0.clone();
            kp.data_mut()[e] += h;
            let mut km = k0.clone();
            km.data_mut()[e] -= h;
            let fd = (objective(&kp, &w0).0 - objective(&km, &w0).0) / (2.0 * h);
            let ad = gk.data()[e];
            assert!(
                (ad - fd).abs() <= 1e-4 * fd.abs().max(1.0),
                "kernel entry {e}: {ad} vs {fd}"
            );
        }
        for e in (0..w0.numel()).step_by(7) {
            let mut wp = w0.clone();
            wp.data_mut()[e] += h;
            let mut wm = w0.clone();
            wm.data_mut()[e] -= h;
            let fd = (objective(&k0, &wp).0 - objective(&k0, &wm).0) / (2.0 * h);
            let ad = gw.data()[e];
            assert!(
                (ad - fd).abs() <= 1e-4 * fd.abs().max(1.0),
                "weight entry {e}: {ad} vs {fd}"
            );
        }
    }

    #[test]
    fn mismatched_direction_shape_is_rejected() {
        let mut g = Graph::new();
        let err = Dual::new(
            &mut g,
            Tensor::zeros(vec![2, 3]),
            Tensor::zeros(vec![6]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { op: "dual", .. }));
    }

    #[test]
    fn product_rule_matches_the_directional_finite_difference() {
        let mut rng = SplitMix64::new(71);
        let a = random_tensor(vec![4], &mut rng);
        let b = random_tensor(vec![4], &mut rng);
        let va = random_tensor(vec![4], &mut rng);
        let vb = random_tensor(vec![4], &mut rng);

        let mut g = Graph::new();
        let da = Dual::new(&mut g, a.clone(), va.clone()).unwrap();
        let db = Dual::new(&mut g, b.clone(), vb.clone()).unwrap();
        let prod = g.dual_mul(da, db).unwrap();
        let tangent = g.value(prod.tangent).data().to_vec();

        let h = 1e-6;
        for i in 0..4 {
            let fd = ((a.data()[i] + h * va.data()[i]) * (b.data()[i] + h * vb.data()[i])
                - (a.data()[i] - h * va.data()[i]) * (b.data()[i] - h * vb.data()[i]))
                / (2.0 * h);
            assert!((tangent[i] - fd).abs() <= 1e-8 * fd.abs().max(1.0));
        }
    }
}
