//! Layer kinds supported by [`Network`](super::Network).
//!
//! Every layer caches what it needs during `forward` and consumes the cache in
//! `backward`. Parameter gradients are overwritten (not accumulated) by each
//! backward pass.

use super::{NnError, Tensor};

/// Slope used by every leaky ReLU.
pub const LEAKY_RELU_SLOPE: f64 = 0.2;

/// Variance floor added inside batch normalization.
pub const BATCHNORM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivationKind {
    Relu,
    LeakyRelu(f64),
    Tanh,
}

impl ActivationKind {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::LeakyRelu(s) => {
                if x > 0.0 {
                    x
                } else {
                    s * x
                }
            }
            ActivationKind::Tanh => x.tanh(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Dense(Dense),
    Activation(Activation),
    BatchNorm(BatchNorm),
    Conv2d(Conv2d),
    Upsample(BilinearUpsample),
}

/// Mutable view of one parameter buffer and its gradient.
pub struct ParamSlot<'a> {
    pub value: &'a mut [f64],
    pub grad: &'a [f64],
}

impl Layer {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Activation(a) => match a.kind {
                ActivationKind::Relu => "relu",
                ActivationKind::LeakyRelu(_) => "leaky_relu",
                ActivationKind::Tanh => "tanh",
            },
            Layer::BatchNorm(_) => "batchnorm",
            Layer::Conv2d(_) => "conv2d",
            Layer::Upsample(_) => "bilinear_upsample",
        }
    }

    pub(crate) fn forward(&mut self, x: Tensor, index: usize) -> Result<Tensor, NnError> {
        match self {
            Layer::Dense(l) => l.forward(x, index),
            Layer::Activation(l) => Ok(l.forward(x)),
            Layer::BatchNorm(l) => l.forward(x, index),
            Layer::Conv2d(l) => l.forward(x, index),
            Layer::Upsample(l) => l.forward(x, index),
        }
    }

    /// Forward pass without touching caches.
    pub(crate) fn predict(&self, x: &Tensor, index: usize) -> Result<Tensor, NnError> {
        match self {
            Layer::Dense(l) => l.apply(x, index),
            Layer::Activation(l) => Ok(l.apply(x)),
            Layer::BatchNorm(l) => l.apply(x, index).map(|(y, _, _)| y),
            Layer::Conv2d(l) => l.apply(x, index).map(|(y, _)| y),
            Layer::Upsample(l) => l.apply(x, index),
        }
    }

    pub(crate) fn backward(&mut self, g: &Tensor) -> Result<Tensor, NnError> {
        match self {
            Layer::Dense(l) => l.backward(g),
            Layer::Activation(l) => l.backward(g),
            Layer::BatchNorm(l) => l.backward(g),
            Layer::Conv2d(l) => l.backward(g),
            Layer::Upsample(l) => l.backward(g),
        }
    }

    pub(crate) fn params(&mut self) -> Vec<ParamSlot<'_>> {
        match self {
            Layer::Dense(l) => vec![
                ParamSlot {
                    value: &mut l.weight,
                    grad: &l.grad_weight,
                },
                ParamSlot {
                    value: &mut l.bias,
                    grad: &l.grad_bias,
                },
            ],
            Layer::Conv2d(l) => vec![
                ParamSlot {
                    value: &mut l.weight,
                    grad: &l.grad_weight,
                },
                ParamSlot {
                    value: &mut l.bias,
                    grad: &l.grad_bias,
                },
            ],
            Layer::BatchNorm(l) => vec![
                ParamSlot {
                    value: &mut l.gamma,
                    grad: &l.grad_gamma,
                },
                ParamSlot {
                    value: &mut l.beta,
                    grad: &l.grad_beta,
                },
            ],
            Layer::Activation(_) | Layer::Upsample(_) => Vec::new(),
        }
    }

    /// Parameter buffers and gradients as immutable pairs.
    pub fn param_views(&self) -> Vec<(&[f64], &[f64])> {
        match self {
            Layer::Dense(l) => vec![(&l.weight, &l.grad_weight), (&l.bias, &l.grad_bias)],
            Layer::Conv2d(l) => vec![(&l.weight, &l.grad_weight), (&l.bias, &l.grad_bias)],
            Layer::BatchNorm(l) => vec![(&l.gamma, &l.grad_gamma), (&l.beta, &l.grad_beta)],
            Layer::Activation(_) | Layer::Upsample(_) => Vec::new(),
        }
    }

    pub(crate) fn param_values_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Layer::Dense(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Conv2d(l) => vec![&mut l.weight, &mut l.bias],
            Layer::BatchNorm(l) => vec![&mut l.gamma, &mut l.beta],
            Layer::Activation(_) | Layer::Upsample(_) => Vec::new(),
        }
    }

    pub(crate) fn clear_cache(&mut self) {
        match self {
            Layer::Dense(l) => l.input = None,
            Layer::Activation(l) => l.input = None,
            Layer::BatchNorm(l) => l.cache = None,
            Layer::Conv2d(l) => l.cache = None,
            Layer::Upsample(l) => l.input_shape = None,
        }
    }
}

/// `C = A·B + beta·C` on strided row-major views.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: every slice covers the strided extent implied by (m, k, n) and
    // its strides; `c` is uniquely borrowed and does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Fully connected layer `y = W x + b` with `W` stored as `(fan_out, fan_in)`.
#[derive(Debug, Clone)]
pub struct Dense {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
    pub grad_weight: Vec<f64>,
    pub grad_bias: Vec<f64>,
    input: Option<Tensor>,
}

impl Dense {
    pub fn new(fan_in: usize, fan_out: usize, weight: Vec<f64>, bias: Vec<f64>) -> Self {
        assert_eq!(weight.len(), fan_in * fan_out);
        assert_eq!(bias.len(), fan_out);
        Self {
            fan_in,
            fan_out,
            grad_weight: vec![0.0; weight.len()],
            grad_bias: vec![0.0; bias.len()],
            weight,
            bias,
            input: None,
        }
    }

    fn apply(&self, x: &Tensor, index: usize) -> Result<Tensor, NnError> {
        if x.features() != self.fan_in {
            return Err(NnError::ShapeMismatch {
                layer: index,
                expected: format!("trailing dimension {}", self.fan_in),
                got: x.shape().to_vec(),
            });
        }
        let rows = x.rows();
        let mut out = Vec::with_capacity(rows * self.fan_out);
        for _ in 0..rows {
            out.extend_from_slice(&self.bias);
        }
        gemm(
            rows,
            self.fan_in,
            self.fan_out,
            x.data(),
            (self.fan_in, 1),
            &self.weight,
            (1, self.fan_in),
            1.0,
            &mut out,
        );
        let mut shape = x.shape().to_vec();
        *shape.last_mut().unwrap() = self.fan_out;
        Ok(Tensor::with_shape(shape, out))
    }

    fn forward(&mut self, x: Tensor, index: usize) -> Result<Tensor, NnError> {
        let y = self.apply(&x, index)?;
        self.input = Some(x);
        Ok(y)
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor, NnError> {
        let x = self.input.take().ok_or(NnError::NoForward)?;
        let rows = x.rows();
        if g.len() != rows * self.fan_out {
            return Err(NnError::GradShape {
                expected: rows * self.fan_out,
                got: g.len(),
            });
        }
        // dW = gᵀ x
        gemm(
            self.fan_out,
            rows,
            self.fan_in,
            g.data(),
            (1, self.fan_out),
            x.data(),
            (self.fan_in, 1),
            0.0,
            &mut self.grad_weight,
        );
        self.grad_bias.iter_mut().for_each(|b| *b = 0.0);
        for r in g.data().chunks_exact(self.fan_out) {
            for (b, v) in self.grad_bias.iter_mut().zip(r) {
                *b += v;
            }
        }
        let mut dx = vec![0.0; rows * self.fan_in];
        gemm(
            rows,
            self.fan_out,
            self.fan_in,
            g.data(),
            (self.fan_out, 1),
            &self.weight,
            (self.fan_in, 1),
            0.0,
            &mut dx,
        );
        Ok(Tensor::with_shape(x.shape().to_vec(), dx))
    }
}

/// Parameter-free elementwise nonlinearity.
#[derive(Debug, Clone)]
pub struct Activation {
    pub kind: ActivationKind,
    input: Option<Tensor>,
}

impl Activation {
    pub fn new(kind: ActivationKind) -> Self {
        Self { kind, input: None }
    }

    fn apply(&self, x: &Tensor) -> Tensor {
        let data = x.data().iter().map(|&v| self.kind.apply(v)).collect();
        Tensor::with_shape(x.shape().to_vec(), data)
    }

    fn forward(&mut self, x: Tensor) -> Tensor {
        let y = self.apply(&x);
        self.input = Some(x);
        y
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor, NnError> {
        let x = self.input.take().ok_or(NnError::NoForward)?;
        if g.len() != x.len() {
            return Err(NnError::GradShape {
                expected: x.len(),
                got: g.len(),
            });
        }
        let data = x
            .data()
            .iter()
            .zip(g.data())
            .map(|(&xi, &gi)| {
                let d = match self.kind {
                    ActivationKind::Relu => {
                        if xi > 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    ActivationKind::LeakyRelu(s) => {
                        if xi > 0.0 {
                            1.0
                        } else {
                            s
                        }
                    }
                    ActivationKind::Tanh => {
                        let t = xi.tanh();
                        1.0 - t * t
                    }
                };
                gi * d
            })
            .collect();
        Ok(Tensor::with_shape(x.shape().to_vec(), data))
    }
}

#[derive(Debug, Clone)]
struct BatchNormCache {
    xhat: Vec<f64>,
    inv_std: Vec<f64>,
    shape: Vec<usize>,
    batch_stats: bool,
}

/// Per-feature normalization over every row of the batch, followed by a
/// learned affine map.
///
/// Statistics come from the current batch unless [`BatchNorm::freeze`] has
/// pinned them.
#[derive(Debug, Clone)]
pub struct BatchNorm {
    pub features: usize,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub grad_gamma: Vec<f64>,
    pub grad_beta: Vec<f64>,
    frozen: Option<(Vec<f64>, Vec<f64>)>,
    cache: Option<BatchNormCache>,
}

impl BatchNorm {
    pub fn new(features: usize) -> Self {
        Self {
            features,
            gamma: vec![1.0; features],
            beta: vec![0.0; features],
            grad_gamma: vec![0.0; features],
            grad_beta: vec![0.0; features],
            frozen: None,
            cache: None,
        }
    }

    pub fn freeze(&mut self, mean: Vec<f64>, var: Vec<f64>) {
        self.frozen = Some((mean, var));
    }

    pub fn unfreeze(&mut self) {
        self.frozen = None;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen.is_some()
    }

    /// Batch mean and (biased) variance per feature.
    pub fn batch_statistics(&self, x: &Tensor) -> (Vec<f64>, Vec<f64>) {
        let f = self.features;
        let n = x.rows() as f64;
        let mut mean = vec![0.0; f];
        for r in x.data().chunks_exact(f) {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; f];
        for r in x.data().chunks_exact(f) {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        var.iter_mut().for_each(|s| *s /= n);
        (mean, var)
    }

    #[allow(clippy::type_complexity)]
    fn apply(&self, x: &Tensor, index: usize) -> Result<(Tensor, Vec<f64>, Vec<f64>), NnError> {
        if x.features() != self.features {
            return Err(NnError::ShapeMismatch {
                layer: index,
                expected: format!("trailing dimension {}", self.features),
                got: x.shape().to_vec(),
            });
        }
        let (mean, var) = match &self.frozen {
            Some((m, v)) => (m.clone(), v.clone()),
            None => self.batch_statistics(x),
        };
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BATCHNORM_EPS).sqrt()).collect();
        let f = self.features;
        let mut xhat = x.data().to_vec();
        let mut y = vec![0.0; x.len()];
        for (hr, yr) in xhat.chunks_exact_mut(f).zip(y.chunks_exact_mut(f)) {
            for ((((h, o), m), s), (g, b)) in hr
                .iter_mut()
                .zip(yr.iter_mut())
                .zip(&mean)
                .zip(&inv_std)
                .zip(self.gamma.iter().zip(&self.beta))
            {
                *h = (*h - m) * s;
                *o = *h * g + b;
            }
        }
        Ok((Tensor::with_shape(x.shape().to_vec(), y), xhat, inv_std))
    }

    fn forward(&mut self, x: Tensor, index: usize) -> Result<Tensor, NnError> {
        let (y, xhat, inv_std) = self.apply(&x, index)?;
        self.cache = Some(BatchNormCache {
            xhat,
            inv_std,
            shape: x.shape().to_vec(),
            batch_stats: self.frozen.is_none(),
        });
        Ok(y)
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor, NnError> {
        let c = self.cache.take().ok_or(NnError::NoForward)?;
        if g.len() != c.xhat.len() {
            return Err(NnError::GradShape {
                expected: c.xhat.len(),
                got: g.len(),
            });
        }
        let f = self.features;
        let n = (c.xhat.len() / f) as f64;
        let mut sum_g = vec![0.0; f];
        let mut sum_gx = vec![0.0; f];
        for (gr, xr) in g.data().chunks_exact(f).zip(c.xhat.chunks_exact(f)) {
            for j in 0..f {
                sum_g[j] += gr[j];
                sum_gx[j] += gr[j] * xr[j];
            }
        }
        self.grad_beta.copy_from_slice(&sum_g);
        self.grad_gamma.copy_from_slice(&sum_gx);
        let mut dx = vec![0.0; c.xhat.len()];
        for ((dr, gr), xr) in dx
            .chunks_exact_mut(f)
            .zip(g.data().chunks_exact(f))
            .zip(c.xhat.chunks_exact(f))
        {
            for j in 0..f {
                let scale = self.gamma[j] * c.inv_std[j];
                dr[j] = if c.batch_stats {
                    scale * (gr[j] - sum_g[j] / n - xr[j] * sum_gx[j] / n)
                } else {
                    scale * gr[j]
                };
            }
        }
        Ok(Tensor::with_shape(c.shape, dx))
    }
}

fn spatial_dims(x: &Tensor, index: usize, channels: Option<usize>) -> Result<[usize; 4], NnError> {
    let s = x.shape();
    let ok = s.len() == 4 && channels.is_none_or(|c| s[3] == c);
    if !ok {
        return Err(NnError::ShapeMismatch {
            layer: index,
            expected: match channels {
                Some(c) => format!("(batch, height, width, {c})"),
                None => "(batch, height, width, channels)".to_string(),
            },
            got: s.to_vec(),
        });
    }
    Ok([s[0], s[1], s[2], s[3]])
}

#[derive(Debug, Clone)]
struct ConvCache {
    cols: Vec<f64>,
    dims: [usize; 4],
}

/// 3×3 convolution, stride 1, zero padding 1, on `(batch, height, width, channels)`.
///
/// Filters are stored as `(out_channels, 3, 3, in_channels)`.
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
    pub grad_weight: Vec<f64>,
    pub grad_bias: Vec<f64>,
    cache: Option<ConvCache>,
}

impl Conv2d {
    pub const KERNEL: usize = 3;

    pub fn new(in_channels: usize, out_channels: usize, weight: Vec<f64>, bias: Vec<f64>) -> Self {
        assert_eq!(weight.len(), out_channels * 9 * in_channels);
        assert_eq!(bias.len(), out_channels);
        Self {
            in_channels,
            out_channels,
            grad_weight: vec![0.0; weight.len()],
            grad_bias: vec![0.0; out_channels],
            weight,
            bias,
            cache: None,
        }
    }

    fn im2col(&self, x: &Tensor, [b, h, w, c]: [usize; 4]) -> Vec<f64> {
        let k = 9 * c;
        let mut cols = vec![0.0; b * h * w * k];
        let data = x.data();
        for bi in 0..b {
            for y in 0..h {
                for xx in 0..w {
                    let row = ((bi * h + y) * w + xx) * k;
                    for ky in 0..3 {
                        let sy = y as isize + ky as isize - 1;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        for kx in 0..3 {
                            let sx = xx as isize + kx as isize - 1;
                            if sx < 0 || sx >= w as isize {
                                continue;
                            }
                            let src = ((bi * h + sy as usize) * w + sx as usize) * c;
                            let dst = row + (ky * 3 + kx) * c;
                            cols[dst..dst + c].copy_from_slice(&data[src..src + c]);
                        }
                    }
                }
            }
        }
        cols
    }

    fn apply(&self, x: &Tensor, index: usize) -> Result<(Tensor, Vec<f64>), NnError> {
        let dims = spatial_dims(x, index, Some(self.in_channels))?;
        let [b, h, w, _] = dims;
        let cols = self.im2col(x, dims);
        let rows = b * h * w;
        let k = 9 * self.in_channels;
        let mut out = Vec::with_capacity(rows * self.out_channels);
        for _ in 0..rows {
            out.extend_from_slice(&self.bias);
        }
        gemm(
            rows,
            k,
            self.out_channels,
            &cols,
            (k, 1),
            &self.weight,
            (1, k),
            1.0,
            &mut out,
        );
        Ok((Tensor::with_shape(vec![b, h, w, self.out_channels], out), cols))
    }

    fn forward(&mut self, x: Tensor, index: usize) -> Result<Tensor, NnError> {
        let (y, cols) = self.apply(&x, index)?;
        let s = x.shape();
        self.cache = Some(ConvCache {
            cols,
            dims: [s[0], s[1], s[2], s[3]],
        });
        Ok(y)
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor, NnError> {
        let ConvCache { cols, dims } = self.cache.take().ok_or(NnError::NoForward)?;
        let [b, h, w, c] = dims;
        let rows = b * h * w;
        let k = 9 * c;
        let o = self.out_channels;
        if g.len() != rows * o {
            return Err(NnError::GradShape {
                expected: rows * o,
                got: g.len(),
            });
        }
        gemm(
            o,
            rows,
            k,
            g.data(),
            (1, o),
            &cols,
            (k, 1),
            0.0,
            &mut self.grad_weight,
        );
        self.grad_bias.iter_mut().for_each(|v| *v = 0.0);
        for r in g.data().chunks_exact(o) {
            for (acc, v) in self.grad_bias.iter_mut().zip(r) {
                *acc += v;
            }
        }
        let mut dcols = vec![0.0; rows * k];
        gemm(
            rows,
            o,
            k,
            g.data(),
            (o, 1),
            &self.weight,
            (k, 1),
            0.0,
            &mut dcols,
        );
        // col2im
        let mut dx = vec![0.0; rows * c];
        for bi in 0..b {
            for y in 0..h {
                for xx in 0..w {
                    let row = ((bi * h + y) * w + xx) * k;
                    for ky in 0..3 {
                        let sy = y as isize + ky as isize - 1;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        for kx in 0..3 {
                            let sx = xx as isize + kx as isize - 1;
                            if sx < 0 || sx >= w as isize {
                                continue;
                            }
                            let dst = ((bi * h + sy as usize) * w + sx as usize) * c;
                            let src = row + (ky * 3 + kx) * c;
                            for (d, s) in dx[dst..dst + c].iter_mut().zip(&dcols[src..src + c]) {
                                *d += s;
                            }
                        }
                    }
                }
            }
        }
        Ok(Tensor::with_shape(vec![b, h, w, c], dx))
    }
}

/// Source taps for one output coordinate of a ×2 bilinear upsample
/// (half-pixel centers, edge clamped).
fn upsample_taps(n: usize) -> Vec<(usize, usize, f64, f64)> {
    (0..2 * n)
        .map(|o| {
            let src = ((o as f64 + 0.5) / 2.0 - 0.5).max(0.0);
            let i0 = (src.floor() as usize).min(n - 1);
            let i1 = (i0 + 1).min(n - 1);
            let w1 = src - i0 as f64;
            (i0, i1, 1.0 - w1, w1)
        })
        .collect()
}

/// ×2 bilinear upsampling on `(batch, height, width, channels)`.
#[derive(Debug, Clone, Default)]
pub struct BilinearUpsample {
    input_shape: Option<[usize; 4]>,
}

impl BilinearUpsample {
    pub fn new() -> Self {
        Self::default()
    }

    fn apply(&self, x: &Tensor, index: usize) -> Result<Tensor, NnError> {
        let [b, h, w, c] = spatial_dims(x, index, None)?;
        let ty = upsample_taps(h);
        let tx = upsample_taps(w);
        let (oh, ow) = (2 * h, 2 * w);
        let data = x.data();
        let mut out = vec![0.0; b * oh * ow * c];
        for bi in 0..b {
            for (oy, &(y0, y1, wy0, wy1)) in ty.iter().enumerate() {
                for (ox, &(x0, x1, wx0, wx1)) in tx.iter().enumerate() {
                    let dst = ((bi * oh + oy) * ow + ox) * c;
                    for (yy, wy) in [(y0, wy0), (y1, wy1)] {
                        for (xs, wx) in [(x0, wx0), (x1, wx1)] {
                            let wgt = wy * wx;
                            if wgt == 0.0 {
                                continue;
                            }
                            let src = ((bi * h + yy) * w + xs) * c;
                            for ch in 0..c {
                                out[dst + ch] += wgt * data[src + ch];
                            }
                        }
                    }
                }
            }
        }
        Ok(Tensor::with_shape(vec![b, oh, ow, c], out))
    }

    fn forward(&mut self, x: Tensor, index: usize) -> Result<Tensor, NnError> {
        let y = self.apply(&x, index)?;
        let s = x.shape();
        self.input_shape = Some([s[0], s[1], s[2], s[3]]);
        Ok(y)
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor, NnError> {
        let [b, h, w, c] = self.input_shape.take().ok_or(NnError::NoForward)?;
        let (oh, ow) = (2 * h, 2 * w);
        if g.len() != b * oh * ow * c {
            return Err(NnError::GradShape {
                expected: b * oh * ow * c,
                got: g.len(),
            });
        }
        let ty = upsample_taps(h);
        let tx = upsample_taps(w);
        let gd = g.data();
        let mut dx = vec![0.0; b * h * w * c];
        for bi in 0..b {
            for (oy, &(y0, y1, wy0, wy1)) in ty.iter().enumerate() {
                for (ox, &(x0, x1, wx0, wx1)) in tx.iter().enumerate() {
                    let src = ((bi * oh + oy) * ow + ox) * c;
                    for (yy, wy) in [(y0, wy0), (y1, wy1)] {
                        for (xs, wx) in [(x0, wx0), (x1, wx1)] {
                            let wgt = wy * wx;
                            if wgt == 0.0 {
                                continue;
                            }
                            let dst = ((bi * h + yy) * w + xs) * c;
                            for ch in 0..c {
                                dx[dst + ch] += wgt * gd[src + ch];
                            }
                        }
                    }
                }
            }
        }
        Ok(Tensor::with_shape(vec![b, h, w, c], dx))
    }
}
