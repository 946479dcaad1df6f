use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::layer::{
    Activation, ActivationKind, BatchNorm, BilinearUpsample, Conv2d, Dense, Layer, ParamSlot,
    LEAKY_RELU_SLOPE,
};
use super::{NnError, Tensor};

/// One entry of a [`NetworkSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Dense { out: usize },
    Relu,
    LeakyRelu,
    Tanh,
    BatchNorm,
    Conv2d { out_channels: usize },
    Upsample,
}

/// Layer list plus initialization settings.
///
/// Weights follow the variance scheme that makes wide ReLU networks converge
/// to the arc-cosine kernel recursion:
///
/// * first dense layer touching the input: variance 2;
/// * hidden dense and every conv layer: `2 / fan_in`;
/// * final weight layer: `1 / fan_in`.
///
/// Biases are drawn from `N(0, gain * bias_std²)` with the same gain (2, or 1
/// on the final weight layer), so that each layer adds exactly `bias_std²` to
/// the limiting kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
    pub bias_std: f64,
}

impl NetworkSpec {
    /// Dense stack `input → hidden… → output` with `hidden_activation` after
    /// every hidden layer and an optional output activation.
    pub fn mlp(
        input_dim: usize,
        hidden: &[usize],
        output_dim: usize,
        hidden_activation: LayerSpec,
        output_activation: Option<LayerSpec>,
    ) -> Self {
        let mut layers = Vec::new();
        for &h in hidden {
            layers.push(LayerSpec::Dense { out: h });
            layers.push(hidden_activation);
        }
        layers.push(LayerSpec::Dense { out: output_dim });
        layers.extend(output_activation);
        Self {
            input_dim,
            layers,
            bias_std: 0.0,
        }
    }

    pub fn with_bias_std(mut self, bias_std: f64) -> Self {
        self.bias_std = bias_std;
        self
    }
}

/// Sequential stack of layers.
#[derive(Debug, Clone)]
pub struct Network {
    layers: Vec<Layer>,
    input_dim: usize,
    output_dim: usize,
    pending_backward: bool,
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, std: f64) -> Vec<f64> {
    if std == 0.0 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            std * z
        })
        .collect()
}

/// Builds a network from `spec`, drawing all weights from a ChaCha8 stream
/// seeded with `seed`.
pub fn init_network(spec: &NetworkSpec, seed: u64) -> Result<Network, NnError> {
    if spec.input_dim == 0 {
        return Err(NnError::InvalidSpec("input dimension is zero".into()));
    }
    if spec.layers.is_empty() {
        return Err(NnError::InvalidSpec("no layers".into()));
    }
    if !(spec.bias_std >= 0.0 && spec.bias_std.is_finite()) {
        return Err(NnError::InvalidSpec(format!(
            "bias standard deviation {} is not a finite non-negative value",
            spec.bias_std
        )));
    }
    let weight_layers: Vec<usize> = spec
        .layers
        .iter()
        .enumerate()
        .filter(|(_, l)| matches!(l, LayerSpec::Dense { .. } | LayerSpec::Conv2d { .. }))
        .map(|(i, _)| i)
        .collect();
    let first_weight = weight_layers.first().copied();
    let last_weight = weight_layers.last().copied();
    let last_conv = spec
        .layers
        .iter()
        .rposition(|l| matches!(l, LayerSpec::Conv2d { .. }));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut width = spec.input_dim;
    let mut layers = Vec::with_capacity(spec.layers.len());
    for (i, ls) in spec.layers.iter().enumerate() {
        let gain: f64 = if Some(i) == last_weight { 1.0 } else { 2.0 };
        let bias_std = spec.bias_std * gain.sqrt();
        let layer = match *ls {
            LayerSpec::Dense { out } => {
                if out == 0 {
                    return Err(NnError::InvalidSpec(format!("layer {i}: zero-sized dense layer")));
                }
                let var = if Some(i) == last_weight {
                    1.0 / width as f64
                } else if Some(i) == first_weight {
                    2.0
                } else {
                    2.0 / width as f64
                };
                let w = gaussian(&mut rng, out * width, var.sqrt());
                let b = gaussian(&mut rng, out, bias_std);
                let l = Layer::Dense(Dense::new(width, out, w, b));
                width = out;
                l
            }
            LayerSpec::Conv2d { out_channels } => {
                if out_channels == 0 {
                    return Err(NnError::InvalidSpec(format!("layer {i}: zero-sized conv layer")));
                }
                let halves = width % 2 == 0 && out_channels == width / 2;
                let final_rgb = Some(i) == last_conv && out_channels == 3;
                if !(halves || final_rgb) {
                    return Err(NnError::InvalidSpec(format!(
                        "layer {i}: conv2d must halve its {width} input channels \
                         (or be the final 3-channel conv), got {out_channels}"
                    )));
                }
                let fan_in = 9 * width;
                let var = if Some(i) == last_weight {
                    1.0 / fan_in as f64
                } else {
                    2.0 / fan_in as f64
                };
                let w = gaussian(&mut rng, out_channels * fan_in, var.sqrt());
                let b = gaussian(&mut rng, out_channels, bias_std);
                let l = Layer::Conv2d(Conv2d::new(width, out_channels, w, b));
                width = out_channels;
                l
            }
            LayerSpec::Relu => Layer::Activation(Activation::new(ActivationKind::Relu)),
            LayerSpec::LeakyRelu => {
                Layer::Activation(Activation::new(ActivationKind::LeakyRelu(LEAKY_RELU_SLOPE)))
            }
            LayerSpec::Tanh => Layer::Activation(Activation::new(ActivationKind::Tanh)),
            LayerSpec::BatchNorm => Layer::BatchNorm(BatchNorm::new(width)),
            LayerSpec::Upsample => Layer::Upsample(BilinearUpsample::new()),
        };
        layers.push(layer);
    }
    Ok(Network {
        layers,
        input_dim: spec.input_dim,
        output_dim: width,
        pending_backward: false,
    })
}

impl Network {
    /// Wraps explicit layers. `input_dim` is the trailing dimension of inputs.
    pub fn from_layers(input_dim: usize, layers: Vec<Layer>) -> Result<Self, NnError> {
        let mut width = input_dim;
        for (i, l) in layers.iter().enumerate() {
            let (fan_in, fan_out) = match l {
                Layer::Dense(d) => (d.fan_in, d.fan_out),
                Layer::Conv2d(c) => (c.in_channels, c.out_channels),
                Layer::BatchNorm(b) => (b.features, b.features),
                Layer::Activation(_) | Layer::Upsample(_) => (width, width),
            };
            if fan_in != width {
                return Err(NnError::InvalidSpec(format!(
                    "layer {i} ({}) expects {fan_in} inputs but receives {width}",
                    l.name()
                )));
            }
            width = fan_out;
        }
        Ok(Self {
            layers,
            input_dim,
            output_dim: width,
            pending_backward: false,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.param_views())
            .map(|(v, _)| v.len())
            .sum()
    }

    fn check_input(&self, batch: &Tensor) -> Result<(), NnError> {
        if batch.features() != self.input_dim {
            return Err(NnError::ShapeMismatch {
                layer: 0,
                expected: format!("trailing dimension {}", self.input_dim),
                got: batch.shape().to_vec(),
            });
        }
        if !batch.all_finite() {
            return Err(NnError::NonFinite { layer: 0 });
        }
        Ok(())
    }

    /// Training forward pass; caches activations for [`Network::backward`].
    pub fn forward(&mut self, batch: &Tensor) -> Result<Tensor, NnError> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            x = layer.forward(x, i)?;
            if !x.all_finite() {
                return Err(NnError::NonFinite { layer: i });
            }
        }
        self.pending_backward = true;
        Ok(x)
    }

    /// Read-only forward pass. Safe to call concurrently on a shared network.
    pub fn predict(&self, batch: &Tensor) -> Result<Tensor, NnError> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            x = layer.predict(&x, i)?;
            if !x.all_finite() {
                return Err(NnError::NonFinite { layer: i });
            }
        }
        Ok(x)
    }

    /// Back-propagates `output_grad` through the cached forward pass. Fills
    /// every parameter gradient and returns the gradient for the input batch.
    pub fn backward(&mut self, output_grad: &Tensor) -> Result<Tensor, NnError> {
        if !self.pending_backward {
            return Err(NnError::NoForward);
        }
        self.pending_backward = false;
        let mut g = output_grad.clone();
        let mut result = Ok(());
        for layer in self.layers.iter_mut().rev() {
            if result.is_err() {
                layer.clear_cache();
                continue;
            }
            match layer.backward(&g) {
                Ok(next) => g = next,
                Err(e) => {
                    result = Err(e);
                }
            }
        }
        result.map(|_| g)
    }

    pub(crate) fn param_slots(&mut self) -> Vec<ParamSlot<'_>> {
        self.layers.iter_mut().flat_map(|l| l.params()).collect()
    }

    /// Mutable parameter buffers in a fixed order (layer order, weight before bias).
    pub fn parameters_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.param_values_mut())
            .collect()
    }

    /// Parameter gradients in the order of [`Network::parameters_mut`].
    pub fn gradients(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| l.param_views())
            .map(|(_, g)| g)
            .collect()
    }

    /// Flattened copy of every parameter.
    pub fn flat_parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.param_views())
            .flat_map(|(v, _)| v.iter().copied())
            .collect()
    }

    /// Pins every batch-norm layer to the statistics it sees on `batch`.
    pub fn freeze_batchnorm(&mut self, batch: &Tensor) -> Result<(), NnError> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            if let Layer::BatchNorm(bn) = layer {
                bn.unfreeze();
                let (m, v) = bn.batch_statistics(&x);
                bn.freeze(m, v);
            }
            x = layer.predict(&x, i)?;
        }
        Ok(())
    }
}
