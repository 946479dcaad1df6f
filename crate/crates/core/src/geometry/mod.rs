//! Point clouds, meshes and the geometric operations the fitting code needs.

mod chamfer;
pub mod io;
mod kdtree;
mod marching_cubes;
mod mesh;
mod normals;
mod sampling;
mod shapes;

use thiserror::Error;

pub use chamfer::{chamfer, chamfer_with, ChamferResult, ChamferTarget, Reduction};
pub use kdtree::SpatialIndex;
pub use marching_cubes::{marching_cubes, ScalarGrid};
pub use mesh::{grid_to_mesh, normalize_to_unit_cube, triangle_area, TriangleMesh};
pub use normals::{estimate_normals, estimate_normals_lenient, NormalEstimate};
pub use sampling::{perturb, sample_mesh, sample_mesh_with_faces, subsample};
pub use shapes::{procedural_shape, ShapeKind, ShapeParams};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("coordinate {0} is not finite")]
    NonFinite(usize),
    #[error("normal {index} has length {length}, expected 1")]
    NotUnitNormal { index: usize, length: f64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("neighborhood of point {0} is degenerate")]
    DegenerateNeighborhood(usize),
    #[error("mesh has no face or segment with positive measure")]
    DegenerateMesh,
    #[error("unknown shape `{0}`")]
    UnknownShape(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: std::path::PathBuf,
        line: usize,
        message: String,
    },
}

/// Ordered set of 2D or 3D points, optionally with unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    normals: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self, GeometryError> {
        if dim != 2 && dim != 3 {
            return Err(GeometryError::UnsupportedDimension(dim));
        }
        if coords.len() % dim != 0 {
            return Err(GeometryError::InvalidArgument(format!(
                "{} coordinates do not form {dim}-vectors",
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        Ok(Self {
            dim,
            coords,
            normals: None,
        })
    }

    pub fn from_points<const D: usize>(points: &[[f64; D]]) -> Result<Self, GeometryError> {
        Self::new(D, points.iter().flatten().copied().collect())
    }

    pub fn with_normals(mut self, normals: Vec<f64>) -> Result<Self, GeometryError> {
        if normals.len() != self.coords.len() {
            return Err(GeometryError::InvalidArgument(format!(
                "{} normal coordinates for {} point coordinates",
                normals.len(),
                self.coords.len()
            )));
        }
        for (index, n) in normals.chunks_exact(self.dim).enumerate() {
            let length = n.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (length - 1.0).abs() > 1e-6 || !length.is_finite() {
                return Err(GeometryError::NotUnitNormal { index, length });
            }
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn normal(&self, i: usize) -> Option<&[f64]> {
        self.normals
            .as_ref()
            .map(|n| &n[i * self.dim..(i + 1) * self.dim])
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn normals(&self) -> Option<&[f64]> {
        self.normals.as_deref()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn without_normals(mut self) -> Self {
        self.normals = None;
        self
    }

    /// Keeps the first `dim` coordinates of every point.
    pub fn truncate_dim(&self, dim: usize) -> Result<Self, GeometryError> {
        if dim > self.dim {
            return Err(GeometryError::DimensionMismatch(dim, self.dim));
        }
        let coords = self.points().flat_map(|p| p[..dim].iter().copied()).collect();
        Self::new(dim, coords)
    }

    /// Pads 2D points with `z = 0`.
    pub fn to_3d(&self) -> Self {
        if self.dim == 3 {
            return self.clone();
        }
        let coords = self.points().flat_map(|p| [p[0], p[1], 0.0]).collect();
        Self {
            dim: 3,
            coords,
            normals: None,
        }
    }

    pub fn concat(clouds: &[PointCloud]) -> Result<Self, GeometryError> {
        let dim = clouds.first().ok_or(GeometryError::EmptyCloud)?.dim;
        let mut coords = Vec::new();
        for c in clouds {
            if c.dim != dim {
                return Err(GeometryError::DimensionMismatch(dim, c.dim));
            }
            coords.extend_from_slice(&c.coords);
        }
        Self::new(dim, coords)
    }

    /// Axis-aligned bounding box as `(min, max)` per coordinate.
    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.is_empty() {
            return None;
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for d in 0..self.dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        Some((lo, hi))
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
