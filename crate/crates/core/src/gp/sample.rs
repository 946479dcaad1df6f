use nalgebra::{Cholesky, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::GpError;

pub const MIN_JITTER: f64 = 1e-12;
pub const MAX_JITTER: f64 = 1e-8;

/// Draws from `N(0, K)` at `inputs`, one independent column per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GpSample {
    pub inputs: Vec<Vec<f64>>,
    /// `values[i][c]`: coordinate `c` at input `i`.
    pub values: Vec<Vec<f64>>,
}

impl GpSample {
    pub fn coordinate(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }
}

/// Lower Cholesky factor of `k`, adding diagonal jitter from 1e-12 doubling up
/// to 1e-8 when needed. Returns the factor and the jitter used.
pub fn cholesky_with_jitter(k: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64), GpError> {
    if !k.is_square() {
        return Err(GpError::InvalidInput(format!(
            "{}×{} kernel matrix",
            k.nrows(),
            k.ncols()
        )));
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(GpError::InvalidInput("kernel matrix is not finite".into()));
    }
    if k.iter().all(|&v| v == 0.0) {
        return Ok((k.clone(), 0.0));
    }
    let mut jitter = 0.0;
    loop {
        let mut shifted = k.clone();
        for i in 0..k.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Ok((c.l(), jitter));
        }
        jitter = if jitter == 0.0 { MIN_JITTER } else { 2.0 * jitter };
        if jitter > MAX_JITTER {
            return Err(GpError::NotPsd { jitter: MAX_JITTER });
        }
    }
}

pub fn gp_sample(
    inputs: Vec<Vec<f64>>,
    kernel: &DMatrix<f64>,
    output_dim: usize,
    seed: u64,
) -> Result<GpSample, GpError> {
    if kernel.nrows() != inputs.len() {
        return Err(GpError::InvalidInput(format!(
            "{} inputs for a {}×{} kernel",
            inputs.len(),
            kernel.nrows(),
            kernel.ncols()
        )));
    }
    let (l, _) = cholesky_with_jitter(kernel)?;
    let n = inputs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DMatrix::from_fn(n, output_dim, |_, _| StandardNormal.sample(&mut rng));
    let f = l * z;
    let values = (0..n).map(|i| f.row(i).iter().copied().collect()).collect();
    Ok(GpSample { inputs, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![i as f64]).collect()
    }

    #[test]
    fn zero_kernel_gives_zero_sample() {
        let s = gp_sample(grid(5), &DMatrix::zeros(5, 5), 2, 1).unwrap();
        assert!(s.values.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_kernel_gives_unit_variance() {
        let s = gp_sample(grid(1000), &DMatrix::identity(1000, 1000), 10, 3).unwrap();
        let x: Vec<f64> = s.values.concat();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // Sample variance has standard deviation √(2/n) ≈ 0.014.
        assert!((var - 1.0).abs() < 0.06, "{var}");
    }

    #[test]
    fn rank_deficient_kernel_needs_jitter() {
        let v = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let k = &v * v.transpose();
        let (l, jitter) = cholesky_with_jitter(&k).unwrap();
        assert!(jitter > 0.0 && jitter <= MAX_JITTER);
        assert!((&l * l.transpose() - k).abs().max() < 1e-6);
    }

    #[test]
    fn indefinite_kernel_fails() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky_with_jitter(&k), Err(GpError::NotPsd { .. })));
    }
}
