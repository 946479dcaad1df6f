use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::GpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    Erf,
    Relu,
}

/// Kernel of a random network: nonlinearity, number of hidden layers and the
/// bias variance σ_b² added at every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub nonlinearity: Nonlinearity,
    pub depth: usize,
    pub bias_variance: f64,
    /// Input covariance Σ of the erf kernel; identity when `None`.
    pub input_covariance: Option<DMatrix<f64>>,
}

impl KernelSpec {
    pub fn relu(depth: usize) -> Self {
        Self {
            nonlinearity: Nonlinearity::Relu,
            depth,
            bias_variance: 0.0,
            input_covariance: None,
        }
    }

    pub fn erf() -> Self {
        Self {
            nonlinearity: Nonlinearity::Erf,
            depth: 1,
            bias_variance: 0.0,
            input_covariance: None,
        }
    }

    /// Sets σ_b² from the standard deviation σ_b.
    pub fn with_bias_std(mut self, bias_std: f64) -> Self {
        self.bias_variance = bias_std * bias_std;
        self
    }

    fn validate(&self) -> Result<(), GpError> {
        if self.depth == 0 {
            return Err(GpError::InvalidInput("depth must be at least 1".into()));
        }
        if !(self.bias_variance >= 0.0 && self.bias_variance.is_finite()) {
            return Err(GpError::InvalidInput(format!(
                "bias variance {} must be non-negative",
                self.bias_variance
            )));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<(), GpError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(GpError::InvalidInput(format!(
            "inputs of dimension {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

fn quad(x: &[f64], sigma: Option<&DMatrix<f64>>, y: &[f64]) -> Result<f64, GpError> {
    match sigma {
        None => Ok(dot(x, y)),
        Some(s) => {
            if s.nrows() != x.len() || s.ncols() != x.len() {
                return Err(GpError::InvalidInput(format!(
                    "{}×{} input covariance for {}-dimensional inputs",
                    s.nrows(),
                    s.ncols(),
                    x.len()
                )));
            }
            let mut acc = 0.0;
            for i in 0..x.len() {
                for j in 0..x.len() {
                    acc += x[i] * s[(i, j)] * y[j];
                }
            }
            Ok(acc)
        }
    }
}

/// `(2/π) asin(xᵀΣy / √((xᵀΣx)(yᵀΣy)))`.
pub fn v_erf(x: &[f64], y: &[f64], sigma: Option<&DMatrix<f64>>) -> Result<f64, GpError> {
    check_dims(x, y)?;
    let xx = quad(x, sigma, x)?;
    let yy = quad(y, sigma, y)?;
    if !(xx > 0.0 && yy > 0.0) {
        return Err(GpError::ZeroNorm);
    }
    let c = (quad(x, sigma, y)? / (xx * yy).sqrt()).clamp(-1.0, 1.0);
    Ok(2.0 / PI * c.asin())
}

/// `J(ψ) = sin ψ + (π − ψ) cos ψ`.
pub fn j_relu(psi: f64) -> f64 {
    psi.sin() + (PI - psi) * psi.cos()
}

fn angle(kxy: f64, kxx: f64, kyy: f64) -> Result<f64, GpError> {
    let psi = (kxy / (kxx * kyy).sqrt()).clamp(-1.0, 1.0).acos();
    if !(0.0..=PI).contains(&psi) {
        return Err(GpError::Angle(psi));
    }
    Ok(psi)
}

/// Arc-cosine kernel `(1/π)‖x‖‖y‖ J(ψ)`.
pub fn v_relu(x: &[f64], y: &[f64]) -> Result<f64, GpError> {
    check_dims(x, y)?;
    let xx = dot(x, x);
    let yy = dot(y, y);
    if !(xx > 0.0 && yy > 0.0) {
        return Err(GpError::ZeroNorm);
    }
    let psi = angle(dot(x, y), xx, yy)?;
    Ok((xx * yy).sqrt() / PI * j_relu(psi))
}

/// `(K(x,x), K(y,y), K(x,y))` after `depth` ReLU layers.
fn relu_levels(x: &[f64], y: &[f64], spec: &KernelSpec) -> Result<(f64, f64, f64), GpError> {
    check_dims(x, y)?;
    let b = spec.bias_variance;
    let (mut kxx, mut kyy, mut kxy) = (dot(x, x) + b, dot(y, y) + b, dot(x, y) + b);
    if !(kxx > 0.0 && kyy > 0.0) {
        return Err(GpError::ZeroNorm);
    }
    for _ in 0..spec.depth {
        let psi = angle(kxy, kxx, kyy)?;
        kxy = (kxx * kyy).sqrt() / PI * j_relu(psi) + b;
        kxx += b;
        kyy += b;
    }
    Ok((kxx, kyy, kxy))
}

/// Limiting covariance of a network with `spec.depth` hidden layers, from
/// `K₀(x,y) = xᵀy + σ_b²` and
/// `K_{ℓ+1} = (1/π)√(K_ℓ(x,x) K_ℓ(y,y)) J(ψ_ℓ) + σ_b²`.
pub fn kernel_depth(x: &[f64], y: &[f64], spec: &KernelSpec) -> Result<f64, GpError> {
    spec.validate()?;
    match spec.nonlinearity {
        Nonlinearity::Relu => Ok(relu_levels(x, y, spec)?.2),
        Nonlinearity::Erf if spec.depth == 1 => {
            Ok(v_erf(x, y, spec.input_covariance.as_ref())? + spec.bias_variance)
        }
        Nonlinearity::Erf => Err(GpError::Precondition(
            "the depth recursion is only available for relu".into(),
        )),
    }
}

/// Normalized covariance `cos ψ_ℓ = K_ℓ(x,y) / √(K_ℓ(x,x) K_ℓ(y,y))` between
/// `x_ref` and every entry of `xs`.
pub fn cos_psi_curve(
    x_ref: &[f64],
    xs: &[Vec<f64>],
    spec: &KernelSpec,
) -> Result<Vec<f64>, GpError> {
    spec.validate()?;
    if spec.nonlinearity != Nonlinearity::Relu {
        return Err(GpError::Precondition(
            "the depth recursion is only available for relu".into(),
        ));
    }
    xs.iter()
        .map(|y| {
            let (kxx, kyy, kxy) = relu_levels(x_ref, y, spec)?;
            Ok((kxy / (kxx * kyy).sqrt()).clamp(-1.0, 1.0))
        })
        .collect()
}

/// Gram matrix of [`kernel_depth`] over `inputs`.
pub fn kernel_matrix(inputs: &[Vec<f64>], spec: &KernelSpec) -> Result<DMatrix<f64>, GpError> {
    let n = inputs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel_depth(&inputs[i], &inputs[j], spec)?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erf_closed_forms() {
        assert!((v_erf(&[1.0, 0.0], &[1.0, 0.0], None).unwrap() - 1.0).abs() < 1e-12);
        assert!(v_erf(&[1.0, 0.0], &[0.0, 2.0], None).unwrap().abs() < 1e-12);
        assert!((v_erf(&[1.0, 0.0], &[1.0, 1.0], None).unwrap() - 0.5).abs() < 1e-12);
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!((v_erf(&[1.0, 0.0], &[1.0, 1.0], Some(&s)).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(v_erf(&[0.0, 0.0], &[1.0, 1.0], None), Err(GpError::ZeroNorm)));
    }

    #[test]
    fn relu_closed_forms() {
        assert!((v_relu(&[0.6, 0.8], &[0.6, 0.8]).unwrap() - 1.0).abs() < 1e-12);
        assert!((v_relu(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!(v_relu(&[1.0, 0.0], &[-1.0, 0.0]).unwrap().abs() < 1e-12);
        assert!(matches!(v_relu(&[0.0], &[1.0]), Err(GpError::ZeroNorm)));
    }

    #[test]
    fn recursion_values() {
        let (x, y) = ([1.0, 0.0], [0.0, 1.0]);
        assert!((kernel_depth(&x, &y, &KernelSpec::relu(1)).unwrap() - 1.0 / PI).abs() < 1e-15);
        let two = kernel_depth(&x, &y, &KernelSpec::relu(2)).unwrap();
        assert!((two - 0.4937).abs() < 1e-4, "{two}");
        for depth in 1..8 {
            let v = kernel_depth(&[0.3, -0.4], &[0.3, -0.4], &KernelSpec::relu(depth)).unwrap();
            assert!((v - 0.25).abs() < 1e-12);
        }
        assert!(kernel_depth(&x, &y, &KernelSpec::relu(0)).is_err());
    }

    #[test]
    fn bias_adds_per_layer_on_the_diagonal() {
        let spec = KernelSpec::relu(3).with_bias_std(0.5);
        let v = kernel_depth(&[1.0], &[1.0], &spec).unwrap();
        assert!((v - (1.0 + 4.0 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_and_bounded() {
        let pts = [[0.3, 0.9], [-1.2, 0.4], [0.05, -0.7], [2.0, 2.0]];
        for depth in 1..5 {
            let spec = KernelSpec::relu(depth).with_bias_std(0.1);
            for a in &pts {
                for b in &pts {
                    let ab = kernel_depth(a, b, &spec).unwrap();
                    let ba = kernel_depth(b, a, &spec).unwrap();
                    assert!((ab - ba).abs() < 1e-12);
                    let aa = kernel_depth(a, a, &spec).unwrap();
                    let bb = kernel_depth(b, b, &spec).unwrap();
                    assert!(ab.abs() <= (aa * bb).sqrt() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn cos_psi_at_reference_is_one() {
        let spec = KernelSpec::relu(4).with_bias_std(0.01);
        let xs = vec![vec![0.0], vec![0.5], vec![-1.0]];
        let c = cos_psi_curve(&[0.0], &xs, &spec).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!(c.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(cos_psi_curve(&[0.0], &xs, &KernelSpec::relu(2)).is_err());
    }
}
