//! Small multilayer perceptrons: tanh hidden activations, identity output,
//! orthogonal weight initialization with per-stage gains, zero biases.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::tape::{Tape, Var};
use crate::tensor::{self, Tensor};
use crate::{PolicyError, Result};

/// Network topology plus initialization gains.
///
/// `widths` runs input -> hidden... -> output, so it has at least two
/// entries. Hidden layers use tanh, the output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    /// Orthogonal gain for hidden layers.
    pub hidden_gain: f64,
    /// Orthogonal gain for the output layer. Zero gives an exactly
    /// zero-initialized final layer.
    pub output_gain: f64,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        Self::with_gains(widths, 2.0f64.sqrt(), 0.01)
    }

    pub fn with_gains(widths: Vec<usize>, hidden_gain: f64, output_gain: f64) -> Result<Self> {
        if widths.len() < 2 {
            return Err(PolicyError::InvalidArgument(format!(
                "an MLP needs at least an input and an output width, got {widths:?}"
            )));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(PolicyError::InvalidArgument(format!(
                "all layer widths must be >= 1, got {widths:?}"
            )));
        }
        Ok(Self {
            widths,
            hidden_gain,
            output_gain,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("validated: >= 2 widths")
    }
}

/// One affine layer, stored as `weight (in x out)` and `bias (1 x out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// A feed-forward network instantiated from an [`MlpSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    spec: MlpSpec,
    layers: Vec<Linear>,
}

/// Tape handles for one [`Mlp`]'s parameters, in `parameters()` order.
pub struct MlpVars {
    layers: Vec<(Var, Var)>,
}

impl Mlp {
    /// Initialize with orthogonal weights (hidden gain on all but the last
    /// layer, output gain on the last) and zero biases.
    pub fn init(spec: MlpSpec, rng: &mut impl Rng) -> Self {
        let last = spec.widths.len() - 2;
        let layers = spec
            .widths
            .windows(2)
            .enumerate()
            .map(|(i, pair)| {
                let gain = if i == last {
                    spec.output_gain
                } else {
                    spec.hidden_gain
                };
                Linear {
                    weight: orthogonal(pair[0], pair[1], gain, rng),
                    bias: Tensor::zeros(1, pair[1]),
                }
            })
            .collect();
        Self { spec, layers }
    }

    pub fn from_layers(spec: MlpSpec, layers: Vec<Linear>) -> Result<Self> {
        if layers.len() != spec.widths.len() - 1 {
            return Err(PolicyError::InvalidArgument(format!(
                "expected {} layers, got {}",
                spec.widths.len() - 1,
                layers.len()
            )));
        }
        for (pair, layer) in spec.widths.windows(2).zip(&layers) {
            if layer.weight.shape() != (pair[0], pair[1]) || layer.bias.shape() != (1, pair[1]) {
                return Err(PolicyError::ShapeMismatch {
                    context: "Mlp::from_layers",
                    expected: (pair[0], pair[1]),
                    actual: layer.weight.shape(),
                });
            }
        }
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Linear] {
        &self.layers
    }

    /// Parameters in a fixed order: weight then bias, layer by layer.
    pub fn parameters(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .flat_map(|l| [&l.weight, &l.bias])
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }

    /// Forward pass outside any tape, for rollouts and evaluation. The
    /// arithmetic (kernels and their order) is the same as the taped path.
    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        if input.cols() != self.spec.input_dim() {
            return Err(PolicyError::ShapeMismatch {
                context: "Mlp::forward",
                expected: (input.rows(), self.spec.input_dim()),
                actual: input.shape(),
            });
        }
        let mut h = tensor::matmul(input, &self.layers[0].weight);
        h = tensor::zip_row(&h, &self.layers[0].bias, |a, b| a + b);
        for (i, layer) in self.layers.iter().enumerate().skip(1) {
            h = h.map(f64::tanh);
            let _ = i;
            h = tensor::matmul(&h, &layer.weight);
            h = tensor::zip_row(&h, &layer.bias, |a, b| a + b);
        }
        Ok(h)
    }

    /// Register this network's parameters on a tape.
    pub fn bind(&self, tape: &mut Tape) -> MlpVars {
        MlpVars {
            layers: self
                .layers
                .iter()
                .map(|l| (tape.param(l.weight.clone()), tape.param(l.bias.clone())))
                .collect(),
        }
    }

    /// Taped forward pass through previously bound parameters.
    pub fn forward_taped(&self, tape: &mut Tape, vars: &MlpVars, input: Var) -> Result<Var> {
        if tape.value(input).cols() != self.spec.input_dim() {
            return Err(PolicyError::ShapeMismatch {
                context: "Mlp::forward_taped",
                expected: (tape.value(input).rows(), self.spec.input_dim()),
                actual: tape.value(input).shape(),
            });
        }
        let (w0, b0) = vars.layers[0];
        let mut h = tape.matmul(input, w0)?;
        h = tape.add_row(h, b0)?;
        for &(w, b) in vars.layers.iter().skip(1) {
            h = tape.tanh(h);
            h = tape.matmul(h, w)?;
            h = tape.add_row(h, b)?;
        }
        Ok(h)
    }
}

impl MlpVars {
    /// Tape handles in the same order as [`Mlp::parameters`].
    pub fn vars(&self) -> Vec<Var> {
        self.layers.iter().flat_map(|&(w, b)| [w, b]).collect()
    }
}

/// Orthogonal initialization: modified Gram-Schmidt on a standard-normal
/// draw, orthonormalizing along the shorter dimension, times `gain`.
pub fn orthogonal(rows: usize, cols: usize, gain: f64, rng: &mut impl Rng) -> Tensor {
    if gain == 0.0 {
        return Tensor::zeros(rows, cols);
    }
    let transpose = rows < cols;
    let (n, k) = if transpose { (cols, rows) } else { (rows, cols) };

    // n >= k columns of length n, orthonormalized.
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        loop {
            for q in &columns {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                break;
            }
            // Degenerate draw; resample and re-project.
            v = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        }
        columns.push(v);
    }

    let mut out = Tensor::zeros(rows, cols);
    for (j, col) in columns.iter().enumerate() {
        for (i, &value) in col.iter().enumerate() {
            if transpose {
                out.set(j, i, gain * value);
            } else {
                out.set(i, j, gain * value);
            }
        }
    }
    out
}
