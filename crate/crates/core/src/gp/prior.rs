use super::{arclength_curve, GpError};
use crate::geometry::{grid_to_mesh, TriangleMesh};
use crate::nn::{init_network, LayerSpec, Network, NetworkSpec, Tensor};

/// Random fully connected network drawn from the prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorNetSpec {
    /// Hidden layers.
    pub depth: usize,
    pub width: usize,
    pub bias_std: f64,
    pub activation: LayerSpec,
}

impl PriorNetSpec {
    pub fn relu(depth: usize, width: usize, bias_std: f64) -> Self {
        Self {
            depth,
            width,
            bias_std,
            activation: LayerSpec::Relu,
        }
    }

    fn network(&self, input_dim: usize, output_dim: usize, seed: u64) -> Result<Network, GpError> {
        if self.depth == 0 || self.width == 0 {
            return Err(GpError::InvalidInput(format!(
                "depth {} and width {} must be positive",
                self.depth, self.width
            )));
        }
        let spec = NetworkSpec::mlp(
            input_dim,
            &vec![self.width; self.depth],
            output_dim,
            self.activation,
            None,
        )
        .with_bias_std(self.bias_std);
        Ok(init_network(&spec, seed)?)
    }
}

/// `points` evenly spaced parameters in `[-1, 1]`.
pub fn parameter_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
        .collect()
}

fn check_points(points: usize) -> Result<(), GpError> {
    if points < 2 {
        return Err(GpError::InvalidInput(format!("{points} curve points")));
    }
    Ok(())
}

/// Planar curve `t ↦ f(t) ∈ R²` of one random network over `t ∈ [-1, 1]`.
pub fn network_curve(spec: &PriorNetSpec, points: usize, seed: u64) -> Result<Vec<[f64; 2]>, GpError> {
    check_points(points)?;
    let net = spec.network(1, 2, seed)?;
    let t = parameter_grid(points);
    let out = net.predict(&Tensor::matrix(points, 1, t)?)?;
    Ok(out.data().chunks_exact(2).map(|p| [p[0], p[1]]).collect())
}

/// Scalar random network `f` over `t ∈ [-1, 1]` and the unit-speed curve
/// with tangent angle `f(t)`.
pub fn network_arclength_curve(
    spec: &PriorNetSpec,
    points: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<[f64; 2]>), GpError> {
    check_points(points)?;
    let net = spec.network(1, 1, seed)?;
    let t = parameter_grid(points);
    let f = net.predict(&Tensor::matrix(points, 1, t.clone())?)?.into_data();
    let curve = arclength_curve(&f, &t)?;
    Ok((f, curve))
}

/// Random network `[0, 1]² → R³` meshed on a `side × side` grid.
pub fn network_surface(spec: &PriorNetSpec, side: usize, seed: u64) -> Result<TriangleMesh, GpError> {
    check_points(side)?;
    let net = spec.network(2, 3, seed)?;
    let step = 1.0 / (side - 1) as f64;
    let inputs: Vec<f64> = (0..side)
        .flat_map(|i| (0..side).flat_map(move |j| [i as f64 * step, j as f64 * step]))
        .collect();
    let out = net.predict(&Tensor::matrix(side * side, 2, inputs)?)?;
    let vertices: Vec<[f64; 3]> = out.data().chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
    Ok(grid_to_mesh(&vertices, side)?)
}

/// Scalar network values at `t`.
pub fn network_values(spec: &PriorNetSpec, t: &[f64], seed: u64) -> Result<Vec<f64>, GpError> {
    let net = spec.network(1, 1, seed)?;
    Ok(net.predict(&Tensor::matrix(t.len(), 1, t.to_vec())?)?.into_data())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_reproducibility() {
        let spec = PriorNetSpec::relu(3, 32, 0.01);
        let a = network_curve(&spec, 50, 4).unwrap();
        assert_eq!(a.len(), 50);
        assert_eq!(a, network_curve(&spec, 50, 4).unwrap());
        assert_ne!(a, network_curve(&spec, 50, 5).unwrap());
        let mesh = network_surface(&spec, 8, 1).unwrap();
        assert_eq!(mesh.vertices.len(), 64);
        assert!(network_curve(&PriorNetSpec::relu(0, 32, 0.0), 10, 0).is_err());
    }

    #[test]
    fn arclength_segments_are_uniform() {
        let spec = PriorNetSpec::relu(2, 64, 0.1);
        let (f, curve) = network_arclength_curve(&spec, 201, 3).unwrap();
        assert_eq!(f.len(), 201);
        let h = 2.0 / 200.0;
        for w in curve.windows(2) {
            let len = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            assert!(len <= h + 1e-12 && len > 0.9 * h);
        }
    }
}
