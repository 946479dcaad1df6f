use super::{GridTopology, PriorError};
use crate::geometry::{compensated_sum, PointCloud};

/// Mean over positions of the summed squared distances to grid neighbors,
/// with its gradient per output coordinate.
pub fn stretch_loss(
    output: &PointCloud,
    topology: &GridTopology,
) -> Result<(f64, Vec<f64>), PriorError> {
    if output.len() != topology.len() {
        return Err(PriorError::InvalidConfig(format!(
            "{} outputs for a topology over {} positions",
            output.len(),
            topology.len()
        )));
    }
    Ok(stretch_flat(output.coords(), output.dim(), topology))
}

pub(crate) fn stretch_flat(coords: &[f64], dim: usize, topology: &GridTopology) -> (f64, Vec<f64>) {
    let n = topology.len();
    let scale = 1.0 / n as f64;
    let mut grad = vec![0.0; coords.len()];
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let fi = &coords[i * dim..(i + 1) * dim];
        let mut local = 0.0;
        for &j in topology.neighbors(i) {
            let fj = &coords[j * dim..(j + 1) * dim];
            for d in 0..dim {
                let diff = fi[d] - fj[d];
                local += diff * diff;
                grad[i * dim + d] += 2.0 * scale * diff;
                grad[j * dim + d] -= 2.0 * scale * diff;
            }
        }
        terms.push(local);
    }
    (scale * compensated_sum(terms), grad)
}
