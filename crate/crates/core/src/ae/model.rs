//! Autoencoder model: parameters, forward passes, and checkpoints.
//!
//! Parameters live in a fixed canonical order (encoder convolutions,
//! encoder bottleneck, decoder bottleneck, decoder convolutions), so the
//! optimizer, the checkpoint format, and the graph builders all agree on
//! indices. Convolutions are bias-free; the affine freedom lives in the
//! bottleneck biases and the dataset normalization. Weights initialize
//! uniformly in ±√(6/(fan_in+fan_out)) from a seeded generator; biases
//! start at zero.
//!
//! Fields are normalized to `(x − shift)/scale` before entering the
//! network and denormalized on the way out; tangent vectors carry the
//! `1/scale` (respectively `scale`) chain-rule factor without the shift.

use crate::ad::dual::Dual;
use crate::ad::graph::{Graph, NodeId};
use crate::ad::rng::SplitMix64;
use crate::ad::tensor::Tensor;
use crate::ae::arch::AeArchitecture;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::io::params_io::{load_params, save_params, ParamsFile};
use std::path::Path;

/// One logged training-history record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    pub mse_metric: f64,
    pub pi_metric: f64,
    pub wall_seconds: f64,
}

/// Shape and initialization info for one parameter tensor.
struct ParamSpec {
    name: String,
    shape: Vec<usize>,
    fan_in: usize,
    fan_out: usize,
    bias: bool,
}

fn param_specs(arch: &AeArchitecture) -> Vec<ParamSpec> {
    let mut specs = Vec::new();
    for (i, c) in arch.encoder_convs.iter().enumerate() {
        specs.push(ParamSpec {
            name: format!("enc.conv{i}.k"),
            shape: vec![c.out_ch, c.in_ch, c.kernel, c.kernel],
            fan_in: c.in_ch * c.kernel * c.kernel,
            fan_out: c.out_ch * c.kernel * c.kernel,
            bias: false,
        });
    }
    specs.push(ParamSpec {
        name: "enc.fc.w".into(),
        shape: vec![arch.r, arch.bottleneck_in],
        fan_in: arch.bottleneck_in,
        fan_out: arch.r,
        bias: false,
    });
    specs.push(ParamSpec {
        name: "enc.fc.b".into(),
        shape: vec![arch.r],
        fan_in: 0,
        fan_out: 0,
        bias: true,
    });
    specs.push(ParamSpec {
        name: "dec.fc.w".into(),
        shape: vec![arch.bottleneck_in, arch.r],
        fan_in: arch.r,
        fan_out: arch.bottleneck_in,
        bias: false,
    });
    specs.push(ParamSpec {
        name: "dec.fc.b".into(),
        shape: vec![arch.bottleneck_in],
        fan_in: 0,
        fan_out: 0,
        bias: true,
    });
    for (i, c) in arch.decoder_convs().iter().enumerate() {
        // Transposed-convolution kernels store [in_ch, out_ch, kh, kw].
        specs.push(ParamSpec {
            name: format!("dec.conv{i}.k"),
            shape: vec![c.in_ch, c.out_ch, c.kernel, c.kernel],
            fan_in: c.in_ch * c.kernel * c.kernel,
            fan_out: c.out_ch * c.kernel * c.kernel,
            bias: false,
        });
    }
    specs
}

/// Convolutional autoencoder with dataset normalization statistics.
#[derive(Debug, Clone)]
pub struct AeModel {
    grid: Grid<f64>,
    arch: AeArchitecture,
    names: Vec<String>,
    params: Vec<Tensor>,
    shift: f64,
    scale: f64,
    /// Metrics logged during training; empty before any [`crate::ae::train`] run.
    pub history: Vec<HistoryRow>,
}

impl AeModel {
    /// Standard architecture on the given grid, seeded initialization.
    pub fn new(grid: Grid<f64>, r: usize, seed: u64) -> Result<Self> {
        let arch = AeArchitecture::standard(grid.nx, grid.ny, r)?;
        Self::with_arch(grid, arch, seed)
    }

    /// Any architecture on a matching grid, seeded initialization.
    pub fn with_arch(grid: Grid<f64>, arch: AeArchitecture, seed: u64) -> Result<Self> {
        if arch.nx != grid.nx || arch.ny != grid.ny {
            return Err(Error::GridMismatch {
                left_nx: arch.nx,
                left_ny: arch.ny,
                right_nx: grid.nx,
                right_ny: grid.ny,
            });
        }
        let specs = param_specs(&arch);
        let mut names = Vec::with_capacity(specs.len());
        let mut params = Vec::with_capacity(specs.len());
        for (index, spec) in specs.iter().enumerate() {
            let numel: usize = spec.shape.iter().product();
            let data = if spec.bias {
                vec![0.0; numel]
            } else {
                let limit = (6.0 / (spec.fan_in + spec.fan_out) as f64).sqrt();
                let mut rng = SplitMix64::derive(seed, index as u64);
                (0..numel).map(|_| rng.uniform(-limit, limit)).collect()
            };
            names.push(spec.name.clone());
            params.push(Tensor::new(spec.shape.clone(), data)?);
        }
        Ok(Self {
            grid,
            arch,
            names,
            params,
            shift: 0.0,
            scale: 1.0,
            history: Vec::new(),
        })
    }

    /// A linear model that reproduces its input exactly: no convolutions,
    /// identity bottleneck maps, identity normalization.
    pub fn identity_toy(grid: Grid<f64>) -> Result<Self> {
        let arch = AeArchitecture::linear_toy(grid.nx, grid.ny)?;
        let mut model = Self::with_arch(grid, arch, 0)?;
        let n = model.arch.bottleneck_in;
        let mut eye = Tensor::zeros(vec![n, n]);
        for i in 0..n {
            eye.data_mut()[i * n + i] = 1.0;
        }
        model.set_param("enc.fc.w", eye.clone())?;
        model.set_param("dec.fc.w", eye)?;
        Ok(model)
    }

    pub fn grid(&self) -> &Grid<f64> {
        &self.grid
    }

    pub fn arch(&self) -> &AeArchitecture {
        &self.arch
    }

    pub fn order(&self) -> usize {
        self.arch.r
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Installs dataset normalization statistics.
    pub fn set_normalization(&mut self, shift: f64, scale: f64) -> Result<()> {
        if !shift.is_finite() || !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidConfig {
                key: "ae.normalization".into(),
                reason: format!("shift {shift} / scale {scale} must be finite with scale > 0"),
            });
        }
        self.shift = shift;
        self.scale = scale;
        Ok(())
    }

    /// Parameter tensors in canonical order.
    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn param(&self, name: &str) -> Option<&Tensor> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.params[i])
    }

    /// Replaces a parameter, keeping its shape.
    pub fn set_param(&mut self, name: &str, tensor: Tensor) -> Result<()> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::DegenerateInput {
                what: format!("unknown parameter name {name:?}"),
            })?;
        if tensor.shape() != self.params[i].shape() {
            return Err(Error::ShapeMismatch {
                op: "set_param",
                lhs: self.params[i].shape().to_vec(),
                rhs: tensor.shape().to_vec(),
            });
        }
        self.params[i] = tensor;
        Ok(())
    }

    /// Records every parameter as a graph input, in canonical order.
    pub fn insert_params(&self, g: &mut Graph) -> Vec<NodeId> {
        self.params.iter().map(|p| g.input(p.clone())).collect()
    }

    /// Normalizes a field into the network input tensor `[1, ny, nx]`.
    pub fn field_to_input(&self, x: &Field<f64>) -> Result<Tensor> {
        self.grid.same_as(x.grid())?;
        let data = x
            .values()
            .iter()
            .map(|v| (v - self.shift) / self.scale)
            .collect();
        Tensor::new(vec![1, self.grid.ny, self.grid.nx], data)
    }

    /// Scales a tangent field by the normalization chain rule (no shift).
    pub fn tangent_to_input(&self, fx: &Field<f64>) -> Result<Tensor> {
        self.grid.same_as(fx.grid())?;
        let data = fx.values().iter().map(|v| v / self.scale).collect();
        Tensor::new(vec![1, self.grid.ny, self.grid.nx], data)
    }

    /// Denormalizes a network output tensor `[1, ny, nx]` into a field.
    pub fn output_to_field(&self, t: &Tensor) -> Result<Field<f64>> {
        let data = t
            .data()
            .iter()
            .map(|v| v * self.scale + self.shift)
            .collect();
        Field::from_values(self.grid, data)
    }

    /// Denormalizes a tangent output (scale only, no shift).
    pub fn tangent_output_to_field(&self, t: &Tensor) -> Result<Field<f64>> {
        let data = t.data().iter().map(|v| v * self.scale).collect();
        Field::from_values(self.grid, data)
    }

    /// Encoder stack on normalized input nodes: pad, convolutions with ELU
    /// strictly between them, flatten, bottleneck linear map.
    pub fn encoder_nodes(&self, g: &mut Graph, params: &[NodeId], x: NodeId) -> Result<NodeId> {
        let a = &self.arch;
        let n = a.encoder_convs.len();
        let mut cur = g.pad2d(x, a.pad_ny, a.pad_nx)?;
        for (i, spec) in a.encoder_convs.iter().enumerate() {
            cur = g.conv2d(cur, params[i], spec.stride, spec.pad)?;
            if i + 1 < n {
                cur = g.elu(cur);
            }
        }
        let flat = g.reshape(cur, vec![a.bottleneck_in])?;
        g.dense(flat, params[n], Some(params[n + 1]))
    }

    /// Decoder stack: bottleneck linear map, unflatten, mirrored transposed
    /// convolutions with ELU strictly between them, crop to the raw extent.
    pub fn decoder_nodes(&self, g: &mut Graph, params: &[NodeId], z: NodeId) -> Result<NodeId> {
        let a = &self.arch;
        let n = a.encoder_convs.len();
        let mut cur = g.dense(z, params[n + 2], Some(params[n + 3]))?;
        cur = g.reshape(cur, vec![a.final_channels, a.final_ny, a.final_nx])?;
        let dec = a.decoder_convs();
        for (i, spec) in dec.iter().enumerate() {
            cur = g.conv2d_transpose(cur, params[n + 4 + i], spec.stride, spec.pad)?;
            if i + 1 < dec.len() {
                cur = g.elu(cur);
            }
        }
        g.crop2d(cur, a.ny, a.nx)
    }

    /// Encoder with a tangent riding along (parameters constant).
    pub fn encoder_dual(&self, g: &mut Graph, params: &[NodeId], x: Dual) -> Result<Dual> {
        let a = &self.arch;
        let n = a.encoder_convs.len();
        let mut cur = g.dual_pad2d(x, a.pad_ny, a.pad_nx)?;
        for (i, spec) in a.encoder_convs.iter().enumerate() {
            cur = g.dual_conv2d(cur, params[i], spec.stride, spec.pad)?;
            if i + 1 < n {
                cur = g.dual_elu(cur)?;
            }
        }
        let flat = g.dual_reshape(cur, vec![a.bottleneck_in])?;
        g.dual_dense(flat, params[n], Some(params[n + 1]))
    }

    /// Decoder with a tangent riding along (parameters constant).
    pub fn decoder_dual(&self, g: &mut Graph, params: &[NodeId], z: Dual) -> Result<Dual> {
        let a = &self.arch;
        let n = a.encoder_convs.len();
        let mut cur = g.dual_dense(z, params[n + 2], Some(params[n + 3]))?;
        cur = g.dual_reshape(cur, vec![a.final_channels, a.final_ny, a.final_nx])?;
        let dec = a.decoder_convs();
        for (i, spec) in dec.iter().enumerate() {
            cur = g.dual_conv2d_transpose(cur, params[n + 4 + i], spec.stride, spec.pad)?;
            if i + 1 < dec.len() {
                cur = g.dual_elu(cur)?;
            }
        }
        g.dual_crop2d(cur, a.ny, a.nx)
    }

    /// Maps a field to its reduced representation.
    pub fn encode(&self, x: &Field<f64>) -> Result<Vec<f64>> {
        let input = self.field_to_input(x)?;
        let mut g = Graph::new();
        let params = self.insert_params(&mut g);
        let xi = g.input(input);
        let z = self.encoder_nodes(&mut g, &params, xi)?;
        Ok(g.value(z).data().to_vec())
    }

    /// Reconstructs a field from a reduced vector.
    pub fn decode(&self, z: &[f64]) -> Result<Field<f64>> {
        if z.len() != self.arch.r {
            return Err(Error::Length {
                what: "reduced vector",
                expected: self.arch.r,
                got: z.len(),
            });
        }
        let mut g = Graph::new();
        let params = self.insert_params(&mut g);
        let zi = g.input(Tensor::new(vec![self.arch.r], z.to_vec())?);
        let out = self.decoder_nodes(&mut g, &params, zi)?;
        self.output_to_field(g.value(out))
    }

    /// Writes architecture, normalization, and parameters to one file.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let a = &self.arch;
        let mut notes = vec![format!(
            "arch {} {} {} {} {} {} {}",
            a.nx, a.ny, self.grid.lx, self.grid.ly, a.pad_nx, a.pad_ny, a.r
        )];
        for c in &a.encoder_convs {
            notes.push(format!(
                "conv {} {} {} {} {}",
                c.in_ch, c.out_ch, c.kernel, c.stride, c.pad
            ));
        }
        notes.push(format!("norm {} {}", self.shift, self.scale));
        let tensors = self
            .names
            .iter()
            .cloned()
            .zip(self.params.iter().cloned())
            .collect();
        save_params(path, &ParamsFile { notes, tensors })
    }

    /// Reconstructs a model from [`AeModel::save_checkpoint`] output.
    pub fn load_checkpoint(path: &Path) -> Result<Self> {
        let file = load_params(path)?;
        let bad = |reason: String| Error::FileFormat {
            path: path.display().to_string(),
            reason,
        };
        let arch_line = file
            .note("arch")
            .ok_or_else(|| bad("missing arch record".into()))?;
        let nums: Vec<&str> = arch_line.split_whitespace().collect();
        if nums.len() != 7 {
            return Err(bad(format!("arch record needs 7 fields, got {}", nums.len())));
        }
        let dim = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| bad(format!("bad integer {s:?} in arch record")))
        };
        let ext = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| bad(format!("bad float {s:?} in arch record")))
        };
        let (nx, ny) = (dim(nums[0])?, dim(nums[1])?);
        let (lx, ly) = (ext(nums[2])?, ext(nums[3])?);
        let (pad_nx, pad_ny, r) = (dim(nums[4])?, dim(nums[5])?, dim(nums[6])?);

        let mut convs = Vec::new();
        for line in &file.notes {
            if let Some(rest) = line.strip_prefix("conv ") {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 5 {
                    return Err(bad(format!("conv record needs 5 fields: {line:?}")));
                }
                convs.push(crate::ae::arch::ConvSpec {
                    in_ch: dim(f[0])?,
                    out_ch: dim(f[1])?,
                    kernel: dim(f[2])?,
                    stride: dim(f[3])?,
                    pad: dim(f[4])?,
                });
            }
        }
        let norm_line = file
            .note("norm")
            .ok_or_else(|| bad("missing norm record".into()))?;
        let nf: Vec<&str> = norm_line.split_whitespace().collect();
        if nf.len() != 2 {
            return Err(bad(format!("norm record needs 2 fields, got {}", nf.len())));
        }
        let (shift, scale) = (ext(nf[0])?, ext(nf[1])?);

        let grid = Grid::new(nx, ny, lx, ly)?;
        let arch = AeArchitecture::with_convs(nx, ny, pad_nx, pad_ny, convs, r)?;
        let mut model = Self::with_arch(grid, arch, 0)?;
        for (name, expected) in model
            .names
            .iter()
            .zip(model.params.iter().map(|p| p.shape().to_vec()))
            .map(|(n, s)| (n.clone(), s))
            .collect::<Vec<_>>()
        {
            let tensor = file
                .tensor(&name)
                .ok_or_else(|| bad(format!("missing tensor {name}")))?;
            if tensor.shape() != expected.as_slice() {
                return Err(bad(format!(
                    "tensor {name} has shape {:?}, expected {expected:?}",
                    tensor.shape()
                )));
            }
            model.set_param(&name, tensor.clone())?;
        }
        model.set_normalization(shift, scale)?;
        Ok(model)
    }
}
