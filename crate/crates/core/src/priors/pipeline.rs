use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::{
    extract_levelset, fit_atlas, fit_levelset, make_atlas, overlap_metric, reconstruct, Atlas,
    AtlasSpec, ChartKind, FitConfig, FitHistory, LevelSetModel, PriorError,
};
use crate::geometry::{PointCloud, TriangleMesh};
use crate::nn::AdamState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    /// MLP charts from `[0, 1]²`.
    Surface,
    /// MLP charts from `[0, 1]`.
    Contour,
    /// Convolutional charts.
    Conv,
    /// Level set of a scalar field.
    Implicit,
}

/// Prior family, chart count and stretch weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Method {
    pub kind: PriorKind,
    pub charts: usize,
    pub lambda: f64,
}

impl Method {
    pub const fn new(kind: PriorKind, charts: usize, lambda: f64) -> Self {
        Self { kind, charts, lambda }
    }
}

/// The benchmark table, in column order.
pub const BENCHMARK_METHODS: [Method; 10] = [
    Method::new(PriorKind::Surface, 1, 0.0),
    Method::new(PriorKind::Surface, 1, 1.0),
    Method::new(PriorKind::Surface, 8, 0.0),
    Method::new(PriorKind::Surface, 8, 1.0),
    Method::new(PriorKind::Contour, 1, 0.0),
    Method::new(PriorKind::Contour, 1, 1.0),
    Method::new(PriorKind::Contour, 8, 0.0),
    Method::new(PriorKind::Contour, 8, 1.0),
    Method::new(PriorKind::Implicit, 1, 0.0),
    Method::new(PriorKind::Conv, 8, 1.0),
];

impl fmt::Display for Method {
    /// `S8R`, `C1`, `Conv8R`, `Implicit`; other weights print as `S8(λ=0.1)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            PriorKind::Implicit => return f.write_str("Implicit"),
            PriorKind::Surface => "S",
            PriorKind::Contour => "C",
            PriorKind::Conv => "Conv",
        };
        write!(f, "{prefix}{}", self.charts)?;
        if self.lambda == 1.0 {
            f.write_str("R")
        } else if self.lambda != 0.0 {
            write!(f, "(λ={})", self.lambda)
        } else {
            Ok(())
        }
    }
}

impl FromStr for Method {
    type Err = PriorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BENCHMARK_METHODS
            .iter()
            .chain(&[
                Method::new(PriorKind::Conv, 1, 0.0),
                Method::new(PriorKind::Conv, 1, 1.0),
                Method::new(PriorKind::Conv, 8, 0.0),
            ])
            .find(|m| m.to_string() == s)
            .copied()
            .ok_or_else(|| PriorError::Unsupported(format!("method `{s}`")))
    }
}

/// Settings shared by every method.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Overrides the default samples per MLP chart.
    pub points_per_chart: Option<usize>,
    pub hidden: Option<Vec<usize>>,
    pub levelset_resolution: usize,
    pub epsilon: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            iterations: 5000,
            learning_rate: AdamState::DEFAULT_LEARNING_RATE,
            seed: 0,
            points_per_chart: None,
            hidden: None,
            levelset_resolution: 128,
            epsilon: LevelSetModel::DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub method: Method,
    pub mesh: TriangleMesh,
    pub atlas: Option<Atlas>,
    pub levelset: Option<LevelSetModel>,
    pub history: Option<FitHistory>,
    pub seconds: f64,
}

impl Reconstruction {
    /// Overlap between charts; `None` for fewer than two charts.
    pub fn overlap(&self) -> Result<Option<f64>, PriorError> {
        match &self.atlas {
            Some(a) if a.len() >= 2 => Ok(Some(overlap_metric(a)?)),
            _ => Ok(None),
        }
    }
}

/// Fits `method` to `target` and meshes the result. Chart meshes use each
/// chart's own sample grid.
pub fn run_method(
    method: &Method,
    target: &PointCloud,
    cfg: &PipelineConfig,
) -> Result<Reconstruction, PriorError> {
    let fit_cfg = FitConfig {
        lambda: method.lambda,
        learning_rate: cfg.learning_rate,
        iterations: cfg.iterations,
        seed: cfg.seed,
    };
    fit_cfg.validate()?;
    let start = Instant::now();
    if method.kind == PriorKind::Implicit {
        let model = fit_levelset(target, cfg.epsilon, &fit_cfg)?;
        let mesh = extract_levelset(&model, cfg.levelset_resolution)?;
        return Ok(Reconstruction {
            method: *method,
            mesh,
            atlas: None,
            levelset: Some(model),
            history: None,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let (n, kind) = match method.kind {
        PriorKind::Surface => (2, ChartKind::Mlp),
        PriorKind::Contour => (1, ChartKind::Mlp),
        _ => (2, ChartKind::Conv),
    };
    let mut spec = AtlasSpec::new(method.charts, n, target.dim(), kind);
    if kind == ChartKind::Mlp {
        if let Some(p) = cfg.points_per_chart {
            spec = spec.with_points(p);
        }
        if let Some(h) = &cfg.hidden {
            spec = spec.with_hidden(h);
        }
    }
    let mut atlas = make_atlas(&spec, cfg.seed)?;
    let history = fit_atlas(&mut atlas, target, &fit_cfg)?;
    let mesh = reconstruct(&atlas, atlas.charts[0].grid_side())?;
    Ok(Reconstruction {
        method: *method,
        mesh,
        atlas: Some(atlas),
        levelset: None,
        history: Some(history),
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        let names: Vec<String> = BENCHMARK_METHODS.iter().map(|m| m.to_string()).collect();
        assert_eq!(
            names,
            ["S1", "S1R", "S8", "S8R", "C1", "C1R", "C8", "C8R", "Implicit", "Conv8R"]
        );
        for m in &BENCHMARK_METHODS {
            assert_eq!(&m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("S3".parse::<Method>().is_err());
        assert_eq!(Method::new(PriorKind::Surface, 8, 0.1).to_string(), "S8(λ=0.1)");
    }

    #[test]
    fn small_surface_run() {
        let target = PointCloud::new(
            3,
            (0..100).flat_map(|i| [0.1 * (i % 10) as f64, 0.1 * (i / 10) as f64, 0.5]).collect(),
        )
        .unwrap();
        let cfg = PipelineConfig {
            iterations: 5,
            points_per_chart: Some(16),
            hidden: Some(vec![8]),
            ..PipelineConfig::default()
        };
        let r = run_method(&"S8R".parse().unwrap(), &target, &cfg).unwrap();
        assert_eq!(r.atlas.as_ref().unwrap().len(), 8);
        assert!(r.mesh.faces.len() <= 8 * 18);
        assert!(r.overlap().unwrap().is_some());
        let r = run_method(&"C1".parse().unwrap(), &target, &cfg).unwrap();
        assert!(r.mesh.faces.is_empty());
        assert!(r.overlap().unwrap().is_none());
    }
}
