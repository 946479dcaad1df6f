use super::{compensated_sum, GeometryError, PointCloud, SpatialIndex};

/// How each directional Chamfer term is reduced over its source set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    #[default]
    Mean,
    Sum,
}

#[derive(Debug, Clone)]
pub struct ChamferResult {
    pub value: f64,
    /// Gradient with respect to the first cloud, laid out like its coordinates.
    pub grad: Vec<f64>,
}

/// Mean-reduced symmetric Chamfer distance and its gradient with respect to `p1`.
pub fn chamfer(p1: &PointCloud, p2: &PointCloud) -> Result<ChamferResult, GeometryError> {
    chamfer_with(p1, p2, Reduction::Mean)
}

pub fn chamfer_with(
    p1: &PointCloud,
    p2: &PointCloud,
    reduction: Reduction,
) -> Result<ChamferResult, GeometryError> {
    if p1.dim() != p2.dim() {
        return Err(GeometryError::DimensionMismatch(p1.dim(), p2.dim()));
    }
    ChamferTarget::new(p2)?.evaluate(p1.coords(), reduction)
}

/// A fixed target cloud with a prebuilt spatial index, for repeated Chamfer
/// evaluations against moving sources.
#[derive(Debug, Clone)]
pub struct ChamferTarget {
    dim: usize,
    coords: Vec<f64>,
    index: SpatialIndex,
}

impl ChamferTarget {
    pub fn new(target: &PointCloud) -> Result<Self, GeometryError> {
        if target.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        Ok(Self {
            dim: target.dim(),
            coords: target.coords().to_vec(),
            index: SpatialIndex::new(target),
        })
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

    /// Chamfer value between `source` (flat coordinates) and the target, with
    /// the gradient with respect to `source`. Nearest-neighbor assignments are
    /// held fixed when differentiating.
    pub fn evaluate(
        &self,
        source: &[f64],
        reduction: Reduction,
    ) -> Result<ChamferResult, GeometryError> {
        let dim = self.dim;
        if source.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        if source.len() % dim != 0 {
            return Err(GeometryError::DimensionMismatch(source.len() % dim, dim));
        }
        let n1 = source.len() / dim;
        let n2 = self.len();
        let (w1, w2) = match reduction {
            Reduction::Mean => (1.0 / n1 as f64, 1.0 / n2 as f64),
            Reduction::Sum => (1.0, 1.0),
        };
        let mut grad = vec![0.0; source.len()];

        let mut forward = Vec::with_capacity(n1);
        for (i, p) in source.chunks_exact(dim).enumerate() {
            let (j, d) = self.index.nearest(p)?;
            forward.push(d);
            let q = &self.coords[j * dim..(j + 1) * dim];
            for k in 0..dim {
                grad[i * dim + k] += 2.0 * w1 * (p[k] - q[k]);
            }
        }

        let source_index = SpatialIndex::from_coords(dim, source);
        let mut backward = Vec::with_capacity(n2);
        for q in self.coords.chunks_exact(dim) {
            let (i, d) = source_index.nearest(q)?;
            backward.push(d);
            let p = &source[i * dim..(i + 1) * dim];
            for k in 0..dim {
                grad[i * dim + k] += 2.0 * w2 * (p[k] - q[k]);
            }
        }

        let value = w1 * compensated_sum(forward) + w2 * compensated_sum(backward);
        Ok(ChamferResult { value, grad })
    }

    /// Squared distance from each source point to its nearest target point.
    pub fn distances_from(&self, source: &[f64]) -> Result<Vec<f64>, GeometryError> {
        source
            .chunks_exact(self.dim)
            .map(|p| self.index.nearest(p).map(|(_, d)| d))
            .collect()
    }
}
