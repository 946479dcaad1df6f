use super::{Atlas, ChartKind, PriorError};
use crate::geometry::{chamfer, grid_to_mesh, sample_mesh, PointCloud, SpatialIndex, TriangleMesh};

/// Meshes every chart on its own `resolution`-per-axis grid and concatenates
/// the pieces without stitching. Curves become polylines with `resolution`
/// vertices per chart; convolutional charts always use their 32×32 output.
pub fn reconstruct(atlas: &Atlas, resolution: usize) -> Result<TriangleMesh, PriorError> {
    if resolution < 2 {
        return Err(PriorError::InvalidConfig(format!(
            "reconstruction resolution {resolution} is below 2"
        )));
    }
    let mut mesh = TriangleMesh::default();
    for chart in &atlas.charts {
        let points = chart.evaluate_grid(resolution)?;
        let piece = if chart.manifold_dim() == 1 {
            let segments = (0..points.len() - 1).map(|i| [i, i + 1]).collect();
            TriangleMesh::polyline(points, segments)?.without_degenerate()
        } else {
            let side = match chart.kind() {
                ChartKind::Conv => chart.grid_side(),
                ChartKind::Mlp => resolution,
            };
            grid_to_mesh(&points, side)?
        };
        mesh.append(&piece);
    }
    Ok(mesh)
}

/// Chamfer distance between `samples` area-weighted samples of `mesh` and
/// `reference`. 3D samples are truncated when the reference is planar.
pub fn evaluation_chamfer(
    mesh: &TriangleMesh,
    reference: &PointCloud,
    samples: usize,
    seed: u64,
) -> Result<f64, PriorError> {
    let mut points = sample_mesh(mesh, samples, seed)?;
    if reference.dim() == 2 {
        points = points.truncate_dim(2)?;
    }
    Ok(chamfer(&points, reference)?.value)
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fraction of each chart's samples lying within δ of another chart's
/// samples, averaged over charts. δ is twice the median distance from a
/// sample to its nearest neighbor in the same chart.
pub fn overlap_metric(atlas: &Atlas) -> Result<f64, PriorError> {
    if atlas.len() < 2 {
        return Err(PriorError::InvalidConfig(
            "overlap needs at least two charts".into(),
        ));
    }
    let clouds = atlas
        .charts
        .iter()
        .map(super::sample_chart)
        .collect::<Result<Vec<_>, _>>()?;
    let mut spacing = Vec::new();
    for cloud in &clouds {
        let index = SpatialIndex::new(cloud);
        for p in cloud.points() {
            let knn = index.k_nearest(p, 2)?;
            spacing.push(knn.last().map_or(0.0, |&(_, d)| d.sqrt()));
        }
    }
    let delta = 2.0 * median(spacing);
    let mut total = 0.0;
    for i in 0..clouds.len() {
        let others: Vec<PointCloud> = clouds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, c)| c.clone())
            .collect();
        let others = PointCloud::concat(&others)?;
        let index = SpatialIndex::new(&others);
        let mut close = 0usize;
        for p in clouds[i].points() {
            let (_, d) = index.nearest(p)?;
            if d.sqrt() <= delta {
                close += 1;
            }
        }
        total += close as f64 / clouds[i].len() as f64;
    }
    Ok(total / clouds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Layer;
    use crate::priors::{make_atlas, AtlasSpec};

    fn atlas(k: usize, n: usize) -> Atlas {
        let spec = AtlasSpec::new(k, n, 3, ChartKind::Mlp)
            .with_points(if n == 1 { 50 } else { 64 })
            .with_hidden(&[16]);
        make_atlas(&spec, 2).unwrap()
    }

    /// Shifts the output of a chart by adding to the pre-tanh bias.
    fn shift(atlas: &mut Atlas, chart: usize, offset: f64) {
        for layer in atlas.charts[chart].net.layers_mut() {
            if let Layer::Dense(d) = layer {
                if d.fan_out == 3 {
                    d.weight.iter_mut().for_each(|w| *w *= 0.01);
                    d.bias.iter_mut().for_each(|b| *b = offset);
                }
            }
        }
    }

    #[test]
    fn face_counts() {
        let one = reconstruct(&atlas(1, 2), 64).unwrap();
        assert_eq!(one.faces.len(), 7938);
        let eight = reconstruct(&atlas(8, 2), 64).unwrap();
        assert_eq!(eight.faces.len(), 63504);
        let curve = reconstruct(&atlas(2, 1), 10).unwrap();
        assert!(curve.faces.is_empty());
        assert_eq!(curve.segments.len(), 18);
    }

    #[test]
    fn constant_chart_reconstructs_empty() {
        let mut a = atlas(1, 2);
        for layer in a.charts[0].net.layers_mut() {
            if let Layer::Dense(d) = layer {
                if d.fan_out == 3 {
                    d.weight.iter_mut().for_each(|w| *w = 0.0);
                }
            }
        }
        assert!(reconstruct(&a, 16).unwrap().faces.is_empty());
    }

    #[test]
    fn overlap_extremes() {
        let mut far = atlas(2, 2);
        shift(&mut far, 0, -3.0);
        shift(&mut far, 1, 3.0);
        assert_eq!(overlap_metric(&far).unwrap(), 0.0);

        let mut same = atlas(2, 2);
        same.charts[1] = same.charts[0].clone();
        assert_eq!(overlap_metric(&same).unwrap(), 1.0);
        assert!(overlap_metric(&atlas(1, 2)).is_err());
    }
}
