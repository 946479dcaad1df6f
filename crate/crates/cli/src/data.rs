use std::path::Path;

use chartfit::geometry::io::{format_number, read_obj, read_xyz};
use chartfit::geometry::{sample_mesh, GeometryError, PointCloud, TriangleMesh};
use chartfit::priors::PriorError;

use crate::Failure;

pub const METRICS_HEADER: &str =
    "shape,config,lambda,charts,iters,seed,chamfer_eval,chamfer_noisy_baseline,overlap,seconds";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub shape: String,
    pub config: String,
    pub lambda: f64,
    pub charts: usize,
    pub iters: usize,
    pub seed: u64,
    pub chamfer_eval: Option<f64>,
    pub chamfer_noisy_baseline: Option<f64>,
    pub overlap: Option<f64>,
    pub seconds: f64,
    /// Reason the cell failed, written in place of the metrics.
    pub error: Option<String>,
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        let tail = match &self.error {
            Some(e) => format!(",,,error: {}", e.replace([',', '\n'], ";")),
            None => format!(
                "{},{},{},{:.3}",
                opt(self.chamfer_eval),
                opt(self.chamfer_noisy_baseline),
                opt(self.overlap),
                self.seconds
            ),
        };
        format!(
            "{},{},{},{},{},{},{tail}",
            self.shape,
            self.config,
            format_number(self.lambda),
            self.charts,
            self.iters,
            self.seed
        )
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

pub fn geometry_failure(e: GeometryError) -> Failure {
    match e {
        GeometryError::Io { .. } | GeometryError::Parse { .. } => Failure::Usage(e.into()),
        other => Failure::Check(other.into()),
    }
}

pub fn prior_failure(e: PriorError) -> Failure {
    match e {
        PriorError::InvalidConfig(_) | PriorError::Unsupported(_) => Failure::Usage(e.into()),
        PriorError::Geometry(g) => geometry_failure(g),
        other => Failure::Check(other.into()),
    }
}

fn is_obj(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj"))
}

/// Point cloud from an `.xyz` file, or `samples` points drawn from an `.obj`
/// mesh. Meshes without faces or segments contribute their vertices.
pub fn load_points(path: &Path, samples: usize, seed: u64) -> Result<(PointCloud, Option<TriangleMesh>), Failure> {
    if !path.exists() {
        return Err(Failure::usage(format!("{}: no such file", path.display())));
    }
    if is_obj(path) {
        let mesh = read_obj(path).map_err(geometry_failure)?;
        if mesh.faces.is_empty() && mesh.segments.is_empty() {
            let cloud = PointCloud::from_points(&mesh.vertices).map_err(geometry_failure)?;
            return Ok((cloud, Some(mesh)));
        }
        let cloud = sample_mesh(&mesh, samples, seed).map_err(geometry_failure)?;
        Ok((cloud, Some(mesh)))
    } else {
        Ok((read_xyz(path).map_err(geometry_failure)?, None))
    }
}

/// Drops a zero third coordinate so planar inputs fit 2D curves.
pub fn planar(cloud: &PointCloud) -> Option<PointCloud> {
    if cloud.dim() == 3 && cloud.points().all(|p| p[2] == 0.0) {
        cloud.truncate_dim(2).ok()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_formats() {
        let mut row = MetricsRow {
            shape: "torus".into(),
            config: "S8R".into(),
            lambda: 1.0,
            charts: 8,
            iters: 10,
            seed: 3,
            chamfer_eval: Some(1e-4),
            chamfer_noisy_baseline: None,
            overlap: Some(0.5),
            seconds: 1.25,
            error: None,
        };
        assert_eq!(
            row.to_csv(),
            "torus,S8R,1.000000000,8,10,3,0.000100000000,,0.500000000,1.250"
        );
        row.error = Some("bad, thing".into());
        assert!(row.to_csv().ends_with(",,,error: bad; thing"));
        assert_eq!(row.to_csv().split(',').count(), 10);
        assert!(metrics_csv(&[row]).starts_with(METRICS_HEADER));
    }
}
