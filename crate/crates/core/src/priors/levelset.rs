use log::{debug, warn};

use super::{FitConfig, PriorError, DEFAULT_HIDDEN};
use crate::geometry::{
    estimate_normals_lenient, marching_cubes, PointCloud, ScalarGrid, TriangleMesh,
};
use crate::nn::{adam_step, init_network, AdamState, LayerSpec, Network, NetworkSpec, Tensor};

const LOW: f64 = -0.05;
const HIGH: f64 = 1.05;
const CHUNK: usize = 1 << 15;

/// Scalar field `R³ → R` whose zero set is the surface.
#[derive(Debug, Clone)]
pub struct LevelSetModel {
    pub net: Network,
    pub epsilon: f64,
    pub k_normals: usize,
}

impl LevelSetModel {
    pub const DEFAULT_EPSILON: f64 = 2e-3;
    pub const DEFAULT_K_NORMALS: usize = 20;

    /// Field values at `points` (one per row of a `rows × 3` layout).
    pub fn evaluate(&self, points: &[f64]) -> Result<Vec<f64>, PriorError> {
        let mut out = Vec::with_capacity(points.len() / 3);
        for chunk in points.chunks(3 * CHUNK) {
            let t = Tensor::matrix(chunk.len() / 3, 3, chunk.to_vec())?;
            out.extend_from_slice(self.net.predict(&t)?.data());
        }
        Ok(out)
    }
}

/// Training pairs `(p + εn, +1)` and `(p − εn, −1)` for every oriented point.
pub fn levelset_samples(
    cloud: &PointCloud,
    epsilon: f64,
) -> Result<(PointCloud, Vec<f64>), PriorError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PriorError::InvalidConfig(format!(
            "offset {epsilon} must be positive"
        )));
    }
    let normals = cloud.normals().ok_or_else(|| {
        PriorError::InvalidConfig("level-set samples need oriented normals".into())
    })?;
    let dim = cloud.dim();
    let mut coords = Vec::with_capacity(2 * cloud.coords().len());
    let mut labels = Vec::with_capacity(2 * cloud.len());
    for (p, n) in cloud.coords().chunks_exact(dim).zip(normals.chunks_exact(dim)) {
        for sign in [1.0, -1.0] {
            coords.extend(p.iter().zip(n).map(|(a, b)| a + sign * epsilon * b));
            labels.push(sign);
        }
    }
    Ok((PointCloud::new(dim, coords)?, labels))
}

/// Estimates normals, then regresses the ±1 labels by mean-squared error.
/// Batch-norm statistics are frozen on the training set afterwards so the
/// field can be queried pointwise.
pub fn fit_levelset(
    target: &PointCloud,
    epsilon: f64,
    cfg: &FitConfig,
) -> Result<LevelSetModel, PriorError> {
    cfg.validate()?;
    let k = LevelSetModel::DEFAULT_K_NORMALS;
    if target.dim() != 3 {
        return Err(PriorError::Unsupported(format!(
            "level set in dimension {}",
            target.dim()
        )));
    }
    if target.len() <= k {
        return Err(PriorError::InvalidConfig(format!(
            "{} points are too few for {k}-neighbor normals",
            target.len()
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PriorError::InvalidConfig(format!(
            "offset {epsilon} must be positive"
        )));
    }
    let est = estimate_normals_lenient(&target.clone().without_normals(), k)?;
    if est.degenerate.len() * 10 > target.len() {
        return Err(PriorError::DegenerateNormals {
            degenerate: est.degenerate.len(),
            total: target.len(),
        });
    }
    let (samples, labels) = levelset_samples(&est.cloud, epsilon)?;
    let inputs = Tensor::matrix(samples.len(), 3, samples.into_coords())?;

    let mut layers = Vec::new();
    for &h in &DEFAULT_HIDDEN {
        layers.extend([LayerSpec::Dense { out: h }, LayerSpec::Relu, LayerSpec::BatchNorm]);
    }
    layers.push(LayerSpec::Dense { out: 1 });
    let spec = NetworkSpec {
        input_dim: 3,
        layers,
        bias_std: 0.0,
    };
    let mut net = init_network(&spec, cfg.seed)?;
    let mut adam = AdamState::new(&net, cfg.learning_rate);
    let scale = 2.0 / labels.len() as f64;
    for iteration in 0..cfg.iterations {
        let out = net.forward(&inputs).map_err(|e| match e {
            crate::nn::NnError::NonFinite { .. } => PriorError::NonFinite { iteration, chart: 0 },
            other => other.into(),
        })?;
        let residual: Vec<f64> = out.data().iter().zip(&labels).map(|(f, y)| f - y).collect();
        let grad = Tensor::matrix(labels.len(), 1, residual.iter().map(|r| scale * r).collect())?;
        net.backward(&grad)?;
        adam_step(&mut net, &mut adam);
        if iteration % 100 == 0 || iteration + 1 == cfg.iterations {
            let mse = residual.iter().map(|r| r * r).sum::<f64>() / labels.len() as f64;
            debug!("level set iteration {iteration}: mse {mse:.6e}");
        }
    }
    net.freeze_batchnorm(&inputs)?;
    Ok(LevelSetModel {
        net,
        epsilon,
        k_normals: k,
    })
}

/// Zero set of the field on a `resolution³` lattice over `[-0.05, 1.05]³`.
pub fn extract_levelset(
    model: &LevelSetModel,
    resolution: usize,
) -> Result<TriangleMesh, PriorError> {
    if resolution < 2 {
        return Err(PriorError::InvalidConfig(format!(
            "grid resolution {resolution} is below 2"
        )));
    }
    let h = (HIGH - LOW) / (resolution - 1) as f64;
    let mut grid = ScalarGrid::from_fn([resolution; 3], [LOW; 3], h, |_| 0.0)?;
    let positions: Vec<f64> = grid.positions().into_iter().flatten().collect();
    grid.values = model.evaluate(&positions)?;
    let mesh = marching_cubes(&grid, 0.0);
    if mesh.is_empty() {
        warn!("level set has no zero crossing on the {resolution}³ grid");
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Layer;

    #[test]
    fn one_point_gives_two_samples() {
        let cloud = PointCloud::new(3, vec![0.5, 0.5, 0.5])
            .unwrap()
            .with_normals(vec![0.0, 0.0, 1.0])
            .unwrap();
        let (s, y) = levelset_samples(&cloud, 0.01).unwrap();
        assert_eq!(s.coords(), &[0.5, 0.5, 0.51, 0.5, 0.5, 0.49]);
        assert_eq!(y, vec![1.0, -1.0]);
    }

    #[test]
    fn zero_offset_is_rejected() {
        let cloud = PointCloud::new(3, vec![0.0; 3]).unwrap().with_normals(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(levelset_samples(&cloud, 0.0).is_err());
        let target = PointCloud::new(3, (0..90).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        assert!(matches!(
            fit_levelset(&target, 0.0, &FitConfig::default()),
            Err(PriorError::InvalidConfig(_))
        ));
    }

    #[test]
    fn collinear_target_has_degenerate_normals() {
        let target = PointCloud::new(3, (0..60).flat_map(|i| [i as f64 / 60.0, 0.5, 0.5]).collect())
            .unwrap();
        assert!(matches!(
            fit_levelset(&target, 2e-3, &FitConfig::default()),
            Err(PriorError::DegenerateNormals { .. })
        ));
    }

    fn constant_model(value: f64) -> LevelSetModel {
        let spec = NetworkSpec::mlp(3, &[4], 1, LayerSpec::Relu, None);
        let mut net = init_network(&spec, 0).unwrap();
        let last = net.layers_mut().len() - 1;
        if let Layer::Dense(d) = &mut net.layers_mut()[last] {
            d.weight.iter_mut().for_each(|w| *w = 0.0);
            d.bias.iter_mut().for_each(|b| *b = value);
        }
        LevelSetModel {
            net,
            epsilon: 2e-3,
            k_normals: 20,
        }
    }

    #[test]
    fn constant_field_extracts_nothing() {
        let model = constant_model(1.0);
        assert!(extract_levelset(&model, 8).unwrap().is_empty());
        assert!(extract_levelset(&model, 2).unwrap().is_empty());
        assert!(extract_levelset(&model, 1).is_err());
    }
}
