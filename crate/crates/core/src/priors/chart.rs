use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{PriorError, DEFAULT_HIDDEN};
use crate::geometry::PointCloud;
use crate::nn::{init_network, LayerSpec, Network, NetworkSpec, Tensor};

/// Spatial side of the noise tensor fed to convolutional charts.
pub const CONV_INPUT_SIDE: usize = 4;
/// Channels of the noise tensor fed to convolutional charts.
pub const CONV_INPUT_CHANNELS: usize = 512;
/// Spatial side of a convolutional chart's output (three ×2 upsamplings).
pub const CONV_OUTPUT_SIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChartKind {
    Mlp,
    Conv,
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChartKind::Mlp => "mlp",
            ChartKind::Conv => "conv",
        })
    }
}

impl FromStr for ChartKind {
    type Err = PriorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mlp" => Ok(ChartKind::Mlp),
            "conv" => Ok(ChartKind::Conv),
            _ => Err(PriorError::Unsupported(format!("chart kind `{s}`"))),
        }
    }
}

/// Neighbor lists over chart sample positions, stored compactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridTopology {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl GridTopology {
    /// Path graph over `m` positions.
    pub fn line(m: usize) -> Self {
        Self::from_fn(m, |i, out| {
            if i > 0 {
                out.push(i - 1);
            }
            if i + 1 < m {
                out.push(i + 1);
            }
        })
    }

    /// 4-connected `rows × cols` grid in row-major order.
    pub fn grid(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows * cols, |p, out| {
            let (i, j) = (p / cols, p % cols);
            if i > 0 {
                out.push(p - cols);
            }
            if j > 0 {
                out.push(p - 1);
            }
            if j + 1 < cols {
                out.push(p + 1);
            }
            if i + 1 < rows {
                out.push(p + cols);
            }
        })
    }

    fn from_fn(n: usize, mut f: impl FnMut(usize, &mut Vec<usize>)) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(4 * n);
        offsets.push(0);
        for i in 0..n {
            f(i, &mut neighbors);
            offsets.push(neighbors.len());
        }
        Self { offsets, neighbors }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|i| self.neighbors(i).iter().all(|&j| self.neighbors(j).contains(&i)))
    }
}

/// Shape of an atlas to build with [`make_atlas`].
#[derive(Debug, Clone, PartialEq)]
pub struct AtlasSpec {
    pub charts: usize,
    /// Dimension `n` of the parameter domain.
    pub manifold_dim: usize,
    /// Dimension `d` of the embedding space.
    pub output_dim: usize,
    pub kind: ChartKind,
    /// Sample positions per mlp chart; a perfect square when `manifold_dim` is 2.
    /// Convolutional charts always produce 32×32 points.
    pub points_per_chart: usize,
    /// Hidden widths of mlp charts.
    pub hidden: Vec<usize>,
}

impl AtlasSpec {
    /// Defaults to 4096 samples per chart for multi-chart atlases and 16384
    /// for a single chart.
    pub fn new(charts: usize, manifold_dim: usize, output_dim: usize, kind: ChartKind) -> Self {
        let points_per_chart = match kind {
            ChartKind::Conv => CONV_OUTPUT_SIDE * CONV_OUTPUT_SIDE,
            ChartKind::Mlp if charts > 1 => 4096,
            ChartKind::Mlp => 16384,
        };
        Self {
            charts,
            manifold_dim,
            output_dim,
            kind,
            points_per_chart,
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }

    pub fn with_points(mut self, points_per_chart: usize) -> Self {
        self.points_per_chart = points_per_chart;
        self
    }

    pub fn with_hidden(mut self, hidden: &[usize]) -> Self {
        self.hidden = hidden.to_vec();
        self
    }

    fn grid_side(&self) -> Result<usize, PriorError> {
        match (self.kind, self.manifold_dim) {
            (ChartKind::Conv, _) => Ok(CONV_OUTPUT_SIDE),
            (ChartKind::Mlp, 1) => Ok(self.points_per_chart),
            _ => {
                let side = (self.points_per_chart as f64).sqrt().round() as usize;
                if side * side != self.points_per_chart {
                    return Err(PriorError::InvalidConfig(format!(
                        "{} samples do not form a square grid",
                        self.points_per_chart
                    )));
                }
                Ok(side)
            }
        }
    }

    fn validate(&self) -> Result<(), PriorError> {
        if self.charts == 0 {
            return Err(PriorError::InvalidConfig("an atlas needs at least one chart".into()));
        }
        let ok = match self.kind {
            ChartKind::Mlp => {
                matches!(self.manifold_dim, 1 | 2) && matches!(self.output_dim, 2 | 3)
            }
            ChartKind::Conv => self.manifold_dim == 2 && self.output_dim == 3,
        };
        if !ok {
            return Err(PriorError::Unsupported(format!(
                "{} chart from dimension {} to {}",
                self.kind, self.manifold_dim, self.output_dim
            )));
        }
        if self.kind == ChartKind::Mlp && self.points_per_chart < 2 {
            return Err(PriorError::InvalidConfig(
                "a chart needs at least two sample positions".into(),
            ));
        }
        Ok(())
    }

    fn network_spec(&self) -> NetworkSpec {
        match self.kind {
            ChartKind::Mlp => {
                let mut layers = Vec::new();
                for &h in &self.hidden {
                    layers.extend([LayerSpec::Dense { out: h }, LayerSpec::Relu, LayerSpec::BatchNorm]);
                }
                layers.extend([LayerSpec::Dense { out: self.output_dim }, LayerSpec::Tanh]);
                NetworkSpec {
                    input_dim: self.manifold_dim,
                    layers,
                    bias_std: 0.0,
                }
            }
            ChartKind::Conv => {
                let mut layers = Vec::new();
                let mut channels = CONV_INPUT_CHANNELS;
                for _ in 0..2 {
                    channels /= 2;
                    layers.extend([
                        LayerSpec::Upsample,
                        LayerSpec::Conv2d { out_channels: channels },
                        LayerSpec::BatchNorm,
                        LayerSpec::LeakyRelu,
                    ]);
                }
                layers.extend([
                    LayerSpec::Upsample,
                    LayerSpec::Conv2d { out_channels: 3 },
                    LayerSpec::Tanh,
                ]);
                NetworkSpec {
                    input_dim: CONV_INPUT_CHANNELS,
                    layers,
                    bias_std: 0.0,
                }
            }
        }
    }
}

/// One parameterization: a network and its fixed inputs.
#[derive(Debug, Clone)]
pub struct Chart {
    pub net: Network,
    kind: ChartKind,
    manifold_dim: usize,
    output_dim: usize,
    inputs: Tensor,
    topology: GridTopology,
    side: usize,
}

/// Regular samples of `[0, 1]^n`: `side` points for `n = 1`, `side²` points in
/// row-major order for `n = 2`.
fn unit_grid(manifold_dim: usize, side: usize) -> Tensor {
    let step = 1.0 / (side - 1) as f64;
    let data: Vec<f64> = if manifold_dim == 1 {
        (0..side).map(|i| i as f64 * step).collect()
    } else {
        (0..side)
            .flat_map(|i| (0..side).flat_map(move |j| [i as f64 * step, j as f64 * step]))
            .collect()
    };
    let rows = data.len() / manifold_dim;
    Tensor::matrix(rows, manifold_dim, data).expect("grid shape")
}

impl Chart {
    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn manifold_dim(&self) -> usize {
        self.manifold_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn inputs(&self) -> &Tensor {
        &self.inputs
    }

    pub fn topology(&self) -> &GridTopology {
        &self.topology
    }

    /// Samples per side of the chart's own grid.
    pub fn grid_side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.topology.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topology.is_empty()
    }

    /// Outputs on a regular grid with `side` samples per axis, padded to 3D.
    /// Convolutional charts ignore `side` and return their fixed 32×32 output.
    pub(crate) fn evaluate_grid(&self, side: usize) -> Result<Vec<[f64; 3]>, PriorError> {
        let out = match self.kind {
            ChartKind::Conv => self.net.predict(&self.inputs)?,
            ChartKind::Mlp => self.net.predict(&unit_grid(self.manifold_dim, side))?,
        };
        let d = self.output_dim;
        Ok(out
            .data()
            .chunks_exact(d)
            .map(|p| [p[0], p[1], if d == 3 { p[2] } else { 0.0 }])
            .collect())
    }
}

/// Charts sharing one manifold dimension, output dimension and kind.
#[derive(Debug, Clone)]
pub struct Atlas {
    pub charts: Vec<Chart>,
}

impl Atlas {
    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn manifold_dim(&self) -> usize {
        self.charts[0].manifold_dim
    }

    pub fn output_dim(&self) -> usize {
        self.charts[0].output_dim
    }

    pub fn kind(&self) -> ChartKind {
        self.charts[0].kind
    }

    /// Union of every chart's samples, chart by chart.
    pub fn sample(&self) -> Result<PointCloud, PriorError> {
        let clouds = self
            .charts
            .iter()
            .map(sample_chart)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PointCloud::concat(&clouds)?)
    }
}

/// Builds `spec.charts` independently initialized charts. Convolutional
/// charts draw their standard-normal input tensor once, here.
pub fn make_atlas(spec: &AtlasSpec, seed: u64) -> Result<Atlas, PriorError> {
    spec.validate()?;
    let side = spec.grid_side()?;
    let net_spec = spec.network_spec();
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut charts = Vec::with_capacity(spec.charts);
    for _ in 0..spec.charts {
        let net = init_network(&net_spec, seeds.next_u64())?;
        let (inputs, topology) = match spec.kind {
            ChartKind::Mlp if spec.manifold_dim == 1 => {
                (unit_grid(1, side), GridTopology::line(side))
            }
            ChartKind::Mlp => (unit_grid(2, side), GridTopology::grid(side, side)),
            ChartKind::Conv => {
                let mut rng = ChaCha8Rng::seed_from_u64(seeds.next_u64());
                let n = CONV_INPUT_SIDE * CONV_INPUT_SIDE * CONV_INPUT_CHANNELS;
                let noise: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let t = Tensor::new(
                    vec![1, CONV_INPUT_SIDE, CONV_INPUT_SIDE, CONV_INPUT_CHANNELS],
                    noise,
                )?;
                (t, GridTopology::grid(side, side))
            }
        };
        charts.push(Chart {
            net,
            kind: spec.kind,
            manifold_dim: spec.manifold_dim,
            output_dim: spec.output_dim,
            inputs,
            topology,
            side,
        });
    }
    Ok(Atlas { charts })
}

/// Chart outputs at its fixed sample inputs, in topology order.
pub fn sample_chart(chart: &Chart) -> Result<PointCloud, PriorError> {
    let out = chart.net.predict(&chart.inputs)?;
    Ok(PointCloud::new(chart.output_dim, out.into_data())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Layer;

    #[test]
    fn topology_degrees_and_symmetry() {
        let line = GridTopology::line(5);
        assert_eq!(line.neighbors(0), &[1]);
        assert_eq!(line.neighbors(2), &[1, 3]);
        let grid = GridTopology::grid(3, 4);
        assert_eq!(grid.len(), 12);
        assert_eq!(grid.neighbors(0).len(), 2);
        assert_eq!(grid.neighbors(5).len(), 4);
        assert_eq!(grid.neighbors(4).len(), 3);
        assert!(line.is_symmetric() && grid.is_symmetric());
    }

    #[test]
    fn default_sample_counts() {
        let spec = AtlasSpec::new(8, 2, 3, ChartKind::Mlp).with_hidden(&[8]);
        let atlas = make_atlas(&spec, 1).unwrap();
        assert_eq!(atlas.len(), 8);
        assert!(atlas.charts.iter().all(|c| c.len() == 4096 && c.grid_side() == 64));

        let spec = AtlasSpec::new(1, 1, 2, ChartKind::Mlp).with_hidden(&[8]);
        let atlas = make_atlas(&spec, 1).unwrap();
        let inputs = atlas.charts[0].inputs().data();
        assert_eq!(inputs.len(), 16384);
        assert_eq!(inputs[0], 0.0);
        assert_eq!(inputs[16383], 1.0);
        let step = 1.0 / 16383.0;
        assert!(inputs.windows(2).all(|w| (w[1] - w[0] - step).abs() < 1e-15));
    }

    #[test]
    fn conv_chart_outputs_1024_points() {
        let atlas = make_atlas(&AtlasSpec::new(1, 2, 3, ChartKind::Conv), 3).unwrap();
        let cloud = sample_chart(&atlas.charts[0]).unwrap();
        assert_eq!(cloud.len(), 1024);
        assert_eq!(cloud.dim(), 3);
    }

    #[test]
    fn outputs_in_tanh_range() {
        let spec = AtlasSpec::new(2, 2, 3, ChartKind::Mlp).with_points(400).with_hidden(&[32, 16]);
        let atlas = make_atlas(&spec, 5).unwrap();
        let cloud = atlas.sample().unwrap();
        assert_eq!(cloud.len(), 800);
        assert!(cloud.coords().iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn zero_final_layer_maps_to_origin() {
        let spec = AtlasSpec::new(1, 2, 3, ChartKind::Mlp).with_points(100).with_hidden(&[16]);
        let mut atlas = make_atlas(&spec, 5).unwrap();
        for layer in atlas.charts[0].net.layers_mut() {
            if let Layer::Dense(d) = layer {
                if d.fan_out == 3 {
                    d.weight.iter_mut().for_each(|w| *w = 0.0);
                }
            }
        }
        let cloud = sample_chart(&atlas.charts[0]).unwrap();
        assert!(cloud.coords().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_unsupported_combinations() {
        assert!(make_atlas(&AtlasSpec::new(1, 1, 3, ChartKind::Conv), 0).is_err());
        assert!(make_atlas(&AtlasSpec::new(1, 3, 3, ChartKind::Mlp), 0).is_err());
        assert!(make_atlas(&AtlasSpec::new(0, 2, 3, ChartKind::Mlp), 0).is_err());
        let spec = AtlasSpec::new(1, 2, 3, ChartKind::Mlp).with_points(10);
        assert!(matches!(make_atlas(&spec, 0), Err(PriorError::InvalidConfig(_))));
    }

    #[test]
    fn charts_are_independent_but_reproducible() {
        let spec = AtlasSpec::new(2, 2, 3, ChartKind::Mlp).with_points(16).with_hidden(&[8]);
        let a = make_atlas(&spec, 9).unwrap();
        let b = make_atlas(&spec, 9).unwrap();
        assert_eq!(a.charts[0].net.flat_parameters(), b.charts[0].net.flat_parameters());
        assert_ne!(a.charts[0].net.flat_parameters(), a.charts[1].net.flat_parameters());
    }
}
