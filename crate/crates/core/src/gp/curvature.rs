use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Estimate, GpError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameterization {
    /// `ẋ = cos f`, `ẏ = sin f`.
    ArcLength,
    /// `y = f(x)`.
    Graph,
}

/// Finite-difference derivatives at the interior grid points `t[1..n-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample {
    pub parameterization: Parameterization,
    pub t: Vec<f64>,
    /// `(ẋ, ẏ)`.
    pub velocity: Vec<[f64; 2]>,
    /// `(ẍ, ÿ)`.
    pub acceleration: Vec<[f64; 2]>,
    /// Signed curvature.
    pub kappa: Vec<f64>,
    /// `ḟ²`, the analytic value of `κ²` under arc-length parameterization.
    pub f_dot_squared: Option<Vec<f64>>,
}

impl CurvatureSample {
    /// `ẍ² + ÿ²` per interior point.
    pub fn kappa_squared(&self) -> Vec<f64> {
        self.acceleration.iter().map(|a| a[0] * a[0] + a[1] * a[1]).collect()
    }
}

fn grid_step(f: &[f64], t: &[f64], min_len: usize) -> Result<f64, GpError> {
    if f.len() != t.len() || t.len() < min_len {
        return Err(GpError::InvalidInput(format!(
            "{} values on {} grid points (need at least {min_len})",
            f.len(),
            t.len()
        )));
    }
    let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    let uniform = t
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0));
    if !(h > 0.0) || !uniform {
        return Err(GpError::InvalidInput("grid must be uniform and increasing".into()));
    }
    Ok(h)
}

/// Curve through the origin with unit-speed tangent `(cos f, sin f)`,
/// integrated by the trapezoidal rule.
pub fn arclength_curve(f: &[f64], t: &[f64]) -> Result<Vec<[f64; 2]>, GpError> {
    let h = grid_step(f, t, 2)?;
    let mut points = Vec::with_capacity(f.len());
    let mut p = [0.0, 0.0];
    points.push(p);
    for w in f.windows(2) {
        p[0] += 0.5 * h * (w[0].cos() + w[1].cos());
        p[1] += 0.5 * h * (w[0].sin() + w[1].sin());
        points.push(p);
    }
    Ok(points)
}

pub fn curvature_arclength(f: &[f64], t: &[f64]) -> Result<CurvatureSample, GpError> {
    let h = grid_step(f, t, 3)?;
    let n = f.len();
    let mut sample = CurvatureSample {
        parameterization: Parameterization::ArcLength,
        t: t[1..n - 1].to_vec(),
        velocity: Vec::with_capacity(n - 2),
        acceleration: Vec::with_capacity(n - 2),
        kappa: Vec::with_capacity(n - 2),
        f_dot_squared: Some(Vec::with_capacity(n - 2)),
    };
    for i in 1..n - 1 {
        let v = [f[i].cos(), f[i].sin()];
        let a = [
            (f[i + 1].cos() - f[i - 1].cos()) / (2.0 * h),
            (f[i + 1].sin() - f[i - 1].sin()) / (2.0 * h),
        ];
        let f_dot = (f[i + 1] - f[i - 1]) / (2.0 * h);
        sample.velocity.push(v);
        sample.acceleration.push(a);
        sample.kappa.push(v[0] * a[1] - v[1] * a[0]);
        if let Some(fd) = sample.f_dot_squared.as_mut() {
            fd.push(f_dot * f_dot);
        }
    }
    Ok(sample)
}

/// `κ = f̈ / (1 + ḟ²)^{3/2}` for the graph `y = f(t)`.
pub fn curvature_graph(f: &[f64], t: &[f64]) -> Result<CurvatureSample, GpError> {
    let h = grid_step(f, t, 3)?;
    let n = f.len();
    let mut sample = CurvatureSample {
        parameterization: Parameterization::Graph,
        t: t[1..n - 1].to_vec(),
        velocity: Vec::with_capacity(n - 2),
        acceleration: Vec::with_capacity(n - 2),
        kappa: Vec::with_capacity(n - 2),
        f_dot_squared: None,
    };
    for i in 1..n - 1 {
        let f_dot = (f[i + 1] - f[i - 1]) / (2.0 * h);
        let f_ddot = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
        sample.velocity.push([1.0, f_dot]);
        sample.acceleration.push([0.0, f_ddot]);
        sample.kappa.push(f_ddot / (1.0 + f_dot * f_dot).powf(1.5));
    }
    Ok(sample)
}

/// Total absolute turning angle of a polyline divided by its length.
/// Zero-length segments are skipped.
pub fn mean_abs_curvature(points: &[[f64; 2]]) -> f64 {
    let segments: Vec<[f64; 2]> = points
        .windows(2)
        .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
        .filter(|s| s[0] != 0.0 || s[1] != 0.0)
        .collect();
    let length: f64 = segments.iter().map(|s| s[0].hypot(s[1])).sum();
    if length == 0.0 {
        return 0.0;
    }
    let turning: f64 = segments
        .windows(2)
        .map(|w| {
            let cross = w[0][0] * w[1][1] - w[0][1] * w[1][0];
            let dot = w[0][0] * w[1][0] + w[0][1] * w[1][1];
            cross.atan2(dot).abs()
        })
        .sum();
    turning / length
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaReport {
    pub mean: Estimate,
    pub variance: f64,
    /// `cos μ`.
    pub predicted_mean: f64,
    /// `σ² sin² μ`.
    pub predicted_variance: f64,
}

/// Samples `ẋ = cos(f + μ)` with `f ~ N(0, σ²)` and compares against the
/// first-order delta-method limit `N(cos μ, σ² sin² μ)`.
pub fn delta_method_check(
    mu: f64,
    sigma: f64,
    draws: usize,
    seed: u64,
) -> Result<DeltaReport, GpError> {
    if mu.cos().abs() < 1e-12 || mu.sin().abs() < 1e-12 {
        return Err(GpError::Precondition(format!(
            "μ = {mu} needs cos μ ≠ 0 and sin μ ≠ 0"
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) || draws < 2 {
        return Err(GpError::InvalidInput(format!(
            "σ = {sigma} and {draws} draws"
        )));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| GpError::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..draws).map(|_| (normal.sample(&mut rng) + mu).cos()).collect();
    let n = draws as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(DeltaReport {
        mean: Estimate {
            value: mean,
            std_error: (variance / n).sqrt(),
        },
        variance,
        predicted_mean: mu.cos(),
        predicted_variance: sigma * sigma * mu.sin().powi(2),
    })
}
