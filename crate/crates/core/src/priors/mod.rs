//! Fitting neural parameterizations to point clouds.
//!
//! An [`Atlas`] holds `k` charts, each a network from a fixed sample grid in
//! `[0, 1]^n` (or a fixed noise tensor for convolutional charts) to `R^d`.
//! [`fit_atlas`] minimizes the Chamfer distance between the union of chart
//! outputs and a target cloud, plus a stretch penalty on neighboring samples.
//! [`fit_levelset`] instead trains a scalar field whose zero set is the surface.

mod chart;
mod eval;
mod fit;
mod levelset;
mod pipeline;
mod stationarity;
mod stretch;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::nn::NnError;

pub use chart::{make_atlas, sample_chart, Atlas, AtlasSpec, Chart, ChartKind, GridTopology};
pub use eval::{evaluation_chamfer, overlap_metric, reconstruct};
pub use fit::{fit_atlas, FitConfig, FitHistory};
pub use levelset::{extract_levelset, fit_levelset, levelset_samples, LevelSetModel};
pub use pipeline::{
    run_method, Method, PipelineConfig, PriorKind, Reconstruction, BENCHMARK_METHODS,
};
pub use stationarity::{
    conv_stationarity, stationarity_layout, StationarityReport, STATIONARITY_MARGIN,
};
pub use stretch::stretch_loss;

/// Hidden widths of the default chart network.
pub const DEFAULT_HIDDEN: [usize; 3] = [256, 128, 64];

#[derive(Debug, Error)]
pub enum PriorError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported chart: {0}")]
    Unsupported(String),
    #[error("loss is not finite at iteration {iteration} (chart {chart})")]
    NonFinite { iteration: usize, chart: usize },
    #[error("{degenerate} of {total} points have degenerate neighborhoods")]
    DegenerateNormals { degenerate: usize, total: usize },
}
