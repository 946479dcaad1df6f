//! Limiting Gaussian-process kernels of wide random networks, Monte-Carlo
//! checks against finite networks, GP sampling and curvature statistics.

mod curvature;
mod kernels;
mod mc;
mod prior;
mod sample;
pub mod stats;
mod verify;

use thiserror::Error;

pub use curvature::{
    arclength_curve, curvature_arclength, curvature_graph, delta_method_check, mean_abs_curvature,
    CurvatureSample, DeltaReport, Parameterization,
};
pub use kernels::{
    cos_psi_curve, j_relu, kernel_depth, kernel_matrix, v_erf, v_relu, KernelSpec, Nonlinearity,
};
pub use mc::{draw_seed, mc_covariance, Estimate, McArch, McReport};
pub use prior::{
    network_arclength_curve, network_curve, network_surface, network_values, parameter_grid,
    PriorNetSpec,
};
pub use sample::{cholesky_with_jitter, gp_sample, GpSample, MAX_JITTER, MIN_JITTER};

pub use verify::{
    check_cos_psi_decay, check_covariance, check_curvature_ks, correlated_pairs,
    tanh_curvature_draws, VerifyEntry,
};

use crate::geometry::io::{format_number, write_atomic};

#[derive(Debug, Error)]
pub enum GpError {
    #[error(transparent)]
    Nn(#[from] crate::nn::NnError),
    #[error("input has zero norm under the kernel")]
    ZeroNorm,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("kernel matrix is not positive semi-definite (jitter up to {jitter:e})")]
    NotPsd { jitter: f64 },
    #[error("angle {0} outside [0, π] after clamping")]
    Angle(f64),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// One `input,depth,value` record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub input: f64,
    pub depth: usize,
    pub value: f64,
}

/// CSV text with header `input,depth,value`.
pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("input,depth,value\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            format_number(r.input),
            r.depth,
            format_number(r.value)
        ));
    }
    out
}

pub fn write_curve_csv(path: &std::path::Path, rows: &[CurveRow]) -> Result<(), GpError> {
    Ok(write_atomic(path, curve_csv(rows).as_bytes())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let csv = curve_csv(&[CurveRow {
            input: 0.5,
            depth: 3,
            value: 1.0 / 3.0,
        }]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("input,depth,value"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1], "3");
        assert!(row[2].starts_with("0.333333333"));
        assert!(lines.next().is_none());
    }
}
