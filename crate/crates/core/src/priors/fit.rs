use log::debug;

use super::stretch::stretch_flat;
use super::{Atlas, PriorError};
use crate::geometry::{ChamferTarget, PointCloud, Reduction};
use crate::nn::{adam_step, AdamState, NnError, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Stretch weight λ.
    pub lambda: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            learning_rate: AdamState::DEFAULT_LEARNING_RATE,
            iterations: 5000,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), PriorError> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(PriorError::InvalidConfig(format!(
                "lambda {} must be non-negative",
                self.lambda
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(PriorError::InvalidConfig(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.iterations == 0 {
            return Err(PriorError::InvalidConfig("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-iteration losses, recorded before each parameter update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitHistory {
    pub total: Vec<f64>,
    pub chamfer: Vec<f64>,
    pub stretch: Vec<f64>,
}

fn non_finite(err: NnError, iteration: usize, chart: usize) -> PriorError {
    match err {
        NnError::NonFinite { .. } => PriorError::NonFinite { iteration, chart },
        other => PriorError::Nn(other),
    }
}

/// Runs `cfg.iterations` Adam steps on
/// `chamfer(∪ charts, target) + λ · mean stretch`, in place.
pub fn fit_atlas(
    atlas: &mut Atlas,
    target: &PointCloud,
    cfg: &FitConfig,
) -> Result<FitHistory, PriorError> {
    cfg.validate()?;
    let dim = atlas.output_dim();
    if target.dim() != dim {
        return Err(PriorError::InvalidConfig(format!(
            "target has dimension {}, atlas outputs dimension {dim}",
            target.dim()
        )));
    }
    let target = ChamferTarget::new(target)?;
    let mut optimizers: Vec<AdamState> = atlas
        .charts
        .iter()
        .map(|c| AdamState::new(&c.net, cfg.learning_rate))
        .collect();
    let sizes: Vec<usize> = atlas.charts.iter().map(|c| c.len() * dim).collect();
    let total_points: usize = sizes.iter().sum::<usize>() / dim;
    let k = atlas.len() as f64;
    let mut history = FitHistory::default();
    let mut outputs: Vec<Tensor> = Vec::with_capacity(atlas.len());
    let mut union = Vec::with_capacity(total_points * dim);

    for iteration in 0..cfg.iterations {
        outputs.clear();
        union.clear();
        for (c, chart) in atlas.charts.iter_mut().enumerate() {
            let inputs = chart.inputs().clone();
            let out = chart
                .net
                .forward(&inputs)
                .map_err(|e| non_finite(e, iteration, c))?;
            union.extend_from_slice(out.data());
            outputs.push(out);
        }
        let chamfer = target.evaluate(&union, Reduction::Mean)?;

        let mut stretch_total = 0.0;
        let mut offset = 0;
        for (c, chart) in atlas.charts.iter_mut().enumerate() {
            let out = &outputs[c];
            let mut grad = chamfer.grad[offset..offset + sizes[c]].to_vec();
            offset += sizes[c];
            if cfg.lambda > 0.0 {
                // Averaging per chart equals the mean over all positions for
                // equally sized charts.
                let (s, g) = stretch_flat(out.data(), dim, chart.topology());
                stretch_total += s / k;
                let w = cfg.lambda / k;
                for (a, b) in grad.iter_mut().zip(&g) {
                    *a += w * b;
                }
            }
            let grad = Tensor::new(out.shape().to_vec(), grad)?;
            chart.net.backward(&grad)?;
        }
        let total = chamfer.value + cfg.lambda * stretch_total;
        if !total.is_finite() {
            let chart = outputs
                .iter()
                .position(|o| !o.all_finite())
                .unwrap_or(0);
            return Err(PriorError::NonFinite { iteration, chart });
        }
        history.total.push(total);
        history.chamfer.push(chamfer.value);
        history.stretch.push(stretch_total);
        for (chart, opt) in atlas.charts.iter_mut().zip(optimizers.iter_mut()) {
            adam_step(&mut chart.net, opt);
        }
        if iteration % 100 == 0 || iteration + 1 == cfg.iterations {
            debug!(
                "iteration {iteration}: loss {total:.6e} (chamfer {:.6e}, stretch {stretch_total:.6e})",
                chamfer.value
            );
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::{make_atlas, AtlasSpec, ChartKind};

    fn small_atlas(k: usize, n: usize, d: usize, points: usize) -> Atlas {
        let spec = AtlasSpec::new(k, n, d, ChartKind::Mlp)
            .with_points(points)
            .with_hidden(&[32, 16]);
        make_atlas(&spec, 4).unwrap()
    }

    #[test]
    fn own_output_is_a_fixed_point() {
        let mut atlas = small_atlas(1, 2, 3, 64);
        let target = atlas.sample().unwrap();
        let before = atlas.charts[0].net.flat_parameters();
        let cfg = FitConfig {
            lambda: 0.0,
            iterations: 5,
            ..FitConfig::default()
        };
        let history = fit_atlas(&mut atlas, &target, &cfg).unwrap();
        assert_eq!(history.total[0], 0.0);
        assert_eq!(atlas.charts[0].net.flat_parameters(), before);
    }

    #[test]
    fn loss_decreases_and_is_deterministic() {
        let circle: Vec<f64> = (0..200)
            .flat_map(|i| {
                let t = i as f64 / 200.0 * std::f64::consts::TAU;
                [0.5 * t.cos(), 0.5 * t.sin()]
            })
            .collect();
        let target = PointCloud::new(2, circle).unwrap();
        let cfg = FitConfig {
            lambda: 0.0,
            iterations: 300,
            ..FitConfig::default()
        };
        let mut a = small_atlas(1, 1, 2, 200);
        let h = fit_atlas(&mut a, &target, &cfg).unwrap();
        let first: f64 = h.total[..100].iter().sum();
        let last: f64 = h.total[200..].iter().sum();
        assert!(last < first);
        let mut b = small_atlas(1, 1, 2, 200);
        assert_eq!(fit_atlas(&mut b, &target, &cfg).unwrap(), h);
        assert_eq!(a.charts[0].net.flat_parameters(), b.charts[0].net.flat_parameters());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut atlas = small_atlas(1, 2, 3, 16);
        let target = PointCloud::new(2, vec![0.0; 4]).unwrap();
        assert!(fit_atlas(&mut atlas, &target, &FitConfig::default()).is_err());
        let target = PointCloud::new(3, vec![0.0; 6]).unwrap();
        let cfg = FitConfig {
            lambda: -1.0,
            ..FitConfig::default()
        };
        assert!(matches!(
            fit_atlas(&mut atlas, &target, &cfg),
            Err(PriorError::InvalidConfig(_))
        ));
    }
}
