use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GpError;
use crate::nn::{init_network, LayerSpec, NetworkSpec, Tensor};

/// Fully connected random network for Monte-Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McArch {
    /// Hidden layers; a 2-layer network has one.
    pub hidden_layers: usize,
    pub activation: LayerSpec,
    pub input_dim: usize,
    /// Independent output coordinates; each one is an extra sample per draw.
    pub output_dim: usize,
    pub bias_std: f64,
}

impl McArch {
    pub fn relu(hidden_layers: usize, input_dim: usize, output_dim: usize) -> Self {
        Self {
            hidden_layers,
            activation: LayerSpec::Relu,
            input_dim,
            output_dim,
            bias_std: 0.0,
        }
    }

    pub fn network_spec(&self, width: usize) -> NetworkSpec {
        NetworkSpec::mlp(
            self.input_dim,
            &vec![width; self.hidden_layers],
            self.output_dim,
            self.activation,
            None,
        )
        .with_bias_std(self.bias_std)
    }
}

/// Estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|value − reference|` in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.std_error
    }
}

/// Per input pair: covariance of `f(x)` and `f(y)`, mean of `f(x)` and the
/// covariance between the first two output coordinates at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub covariance: Vec<Estimate>,
    pub mean: Vec<Estimate>,
    pub cross_covariance: Vec<Estimate>,
    pub samples: usize,
}

/// Seed of draw `index`, independent of evaluation order.
pub fn draw_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

const BATCHES: usize = 20;

#[derive(Clone, Default)]
struct Moments {
    n: f64,
    sx: f64,
    sy: f64,
    sxy: f64,
}

impl Moments {
    fn add(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxy += x * y;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxy += o.sxy;
    }

    fn covariance(&self) -> f64 {
        self.sxy / self.n - (self.sx / self.n) * (self.sy / self.n)
    }

    fn mean_x(&self) -> f64 {
        self.sx / self.n
    }
}

fn batched(batches: &[Moments], stat: impl Fn(&Moments) -> f64) -> Estimate {
    let mut all = Moments::default();
    batches.iter().for_each(|b| all.merge(b));
    let values: Vec<f64> = batches.iter().map(&stat).collect();
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
    Estimate {
        value: stat(&all),
        std_error: (var / b).sqrt(),
    }
}

/// Empirical covariances of randomly initialized networks over `draws`
/// initializations; standard errors from 20 contiguous batches.
pub fn mc_covariance(
    arch: &McArch,
    width: usize,
    draws: usize,
    pairs: &[(Vec<f64>, Vec<f64>)],
    seed: u64,
) -> Result<McReport, GpError> {
    if width < 64 || draws < 1000 {
        return Err(GpError::InvalidInput(format!(
            "needs width >= 64 and draws >= 1000, got {width} and {draws}"
        )));
    }
    if pairs.is_empty()
        || pairs
            .iter()
            .any(|(x, y)| x.len() != arch.input_dim || y.len() != arch.input_dim)
    {
        return Err(GpError::InvalidInput(format!(
            "pairs must be non-empty with {}-dimensional inputs",
            arch.input_dim
        )));
    }
    let spec = arch.network_spec(width);
    let p = pairs.len();
    let d = arch.output_dim;
    let data: Vec<f64> = pairs
        .iter()
        .flat_map(|(x, y)| x.iter().chain(y).copied())
        .collect();
    let inputs = Tensor::matrix(2 * p, arch.input_dim, data)?;

    let per_batch = draws.div_ceil(BATCHES);
    let mut cov = vec![vec![Moments::default(); BATCHES]; p];
    let mut cross = vec![vec![Moments::default(); BATCHES]; p];
    for draw in 0..draws {
        let b = draw / per_batch;
        let net = init_network(&spec, draw_seed(seed, draw as u64))?;
        let out = net.predict(&inputs)?;
        let out = out.data();
        for k in 0..p {
            let fx = &out[2 * k * d..(2 * k + 1) * d];
            let fy = &out[(2 * k + 1) * d..(2 * k + 2) * d];
            for c in 0..d {
                cov[k][b].add(fx[c], fy[c]);
            }
            if d >= 2 {
                cross[k][b].add(fx[0], fx[1]);
            }
        }
    }
    let used = draws.div_ceil(per_batch);
    Ok(McReport {
        covariance: cov.iter().map(|m| batched(&m[..used], Moments::covariance)).collect(),
        mean: cov.iter().map(|m| batched(&m[..used], Moments::mean_x)).collect(),
        cross_covariance: if d >= 2 {
            cross.iter().map(|m| batched(&m[..used], Moments::covariance)).collect()
        } else {
            Vec::new()
        },
        samples: draws * d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::v_relu;

    #[test]
    fn seeds_depend_on_index() {
        assert_eq!(draw_seed(3, 7), draw_seed(3, 7));
        assert_ne!(draw_seed(3, 7), draw_seed(3, 8));
        assert_ne!(draw_seed(3, 7), draw_seed(4, 7));
    }

    #[test]
    fn small_relu_run_is_consistent() {
        let pairs = vec![(vec![1.0, 0.0], vec![0.6, 0.8]), (vec![0.0, 1.0], vec![0.0, 1.0])];
        let report = mc_covariance(&McArch::relu(1, 2, 2), 256, 2000, &pairs, 1).unwrap();
        assert_eq!(report.samples, 4000);
        for (est, (x, y)) in report.covariance.iter().zip(&pairs) {
            assert!(est.z_score(v_relu(x, y).unwrap()) < 4.0, "{est:?}");
        }
        assert!(report.mean.iter().all(|m| m.z_score(0.0) < 4.0));
        assert!(report.cross_covariance.iter().all(|m| m.z_score(0.0) < 4.0));
    }

    #[test]
    fn rejects_small_configs() {
        let pairs = vec![(vec![1.0], vec![1.0])];
        assert!(mc_covariance(&McArch::relu(1, 1, 1), 32, 2000, &pairs, 0).is_err());
        assert!(mc_covariance(&McArch::relu(1, 1, 1), 64, 10, &pairs, 0).is_err());
        assert!(mc_covariance(&McArch::relu(1, 2, 1), 64, 1000, &pairs, 0).is_err());
    }
}
