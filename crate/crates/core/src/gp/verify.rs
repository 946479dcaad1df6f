use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stats::{ks_test, scaled_chi2_1_cdf};
use super::{
    cos_psi_curve, curvature_arclength, draw_seed, kernel_depth, mc_covariance, network_values,
    GpError, KernelSpec, McArch, PriorNetSpec,
};
use crate::nn::LayerSpec;

/// One checked quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyEntry {
    pub check: String,
    pub entry: String,
    pub value: f64,
    pub reference: f64,
    pub pass: bool,
}

/// `n` pairs of 2D inputs with norms in `[0.7, 1.3]` and angles at most
/// 0.9 rad apart.
pub fn correlated_pairs(n: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = rng.random_range(0.0..2.0 * PI);
            let b = a + rng.random_range(-0.9..0.9);
            let (r1, r2) = (rng.random_range(0.7..1.3), rng.random_range(0.7..1.3));
            (vec![r1 * a.cos(), r1 * a.sin()], vec![r2 * b.cos(), r2 * b.sin()])
        })
        .collect()
}

/// Compares Monte-Carlo covariances of ReLU networks with `depth` hidden
/// layers against the kernel recursion: each entry must be within 3 standard
/// errors and `rel_tol` relative, and every mean within 3 standard errors of
/// zero.
pub fn check_covariance(
    depth: usize,
    width: usize,
    draws: usize,
    pairs: &[(Vec<f64>, Vec<f64>)],
    rel_tol: f64,
    seed: u64,
) -> Result<Vec<VerifyEntry>, GpError> {
    let arch = McArch::relu(depth, 2, 3);
    let report = mc_covariance(&arch, width, draws, pairs, seed)?;
    let spec = KernelSpec::relu(depth);
    let mut out = Vec::new();
    for (i, ((x, y), est)) in pairs.iter().zip(&report.covariance).enumerate() {
        let k = kernel_depth(x, y, &spec)?;
        let rel = (est.value - k).abs() / k.abs();
        out.push(VerifyEntry {
            check: format!("covariance depth {depth}"),
            entry: format!("pair {i}: z {:.2}, rel {:.4}", est.z_score(k), rel),
            value: est.value,
            reference: k,
            pass: est.z_score(k) <= 3.0 && rel <= rel_tol,
        });
    }
    for (i, m) in report.mean.iter().enumerate() {
        out.push(VerifyEntry {
            check: format!("mean depth {depth}"),
            entry: format!("pair {i}: z {:.2}", m.z_score(0.0)),
            value: m.value,
            reference: 0.0,
            pass: m.z_score(0.0) <= 3.0,
        });
    }
    Ok(out)
}

/// `cos ψ_ℓ(x_ref, y)` must decrease strictly over `ℓ = 1..=max_depth` for
/// every `y`.
pub fn check_cos_psi_decay(
    x_ref: &[f64],
    ys: &[Vec<f64>],
    max_depth: usize,
    bias_std: f64,
) -> Result<Vec<VerifyEntry>, GpError> {
    let mut curves = Vec::new();
    for depth in 1..=max_depth {
        curves.push(cos_psi_curve(x_ref, ys, &KernelSpec::relu(depth).with_bias_std(bias_std))?);
    }
    let mut out = Vec::new();
    for (j, y) in ys.iter().enumerate() {
        for d in 1..max_depth {
            let (a, b) = (curves[d - 1][j], curves[d][j]);
            out.push(VerifyEntry {
                check: "cos psi decreasing".into(),
                entry: format!("y {y:?}: depth {} -> {}", d, d + 1),
                value: b,
                reference: a,
                pass: b < a,
            });
        }
    }
    Ok(out)
}

/// Curvature of arc-length curves whose angle is a one-hidden-layer tanh
/// network: `κ²` at `t0` from finite differences with step `h`, and the
/// central-difference `ḟ(t0)`, one pair per draw.
pub fn tanh_curvature_draws(
    width: usize,
    draws: usize,
    t0: f64,
    h: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>, GpError> {
    let spec = PriorNetSpec {
        depth: 1,
        width,
        bias_std: 1.0,
        activation: LayerSpec::Tanh,
    };
    let t = [t0 - h, t0, t0 + h];
    (0..draws)
        .map(|i| {
            let f = network_values(&spec, &t, draw_seed(seed, i as u64))?;
            let c = curvature_arclength(&f, &t)?;
            Ok((c.kappa_squared()[0], (f[2] - f[0]) / (2.0 * h)))
        })
        .collect()
}

/// KS test of `κ²` against `Var(ḟ) · χ²₁`; passes at p > 0.01.
pub fn check_curvature_ks(width: usize, draws: usize, seed: u64) -> Result<VerifyEntry, GpError> {
    let samples = tanh_curvature_draws(width, draws, 0.3, 1e-3, seed)?;
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let var = samples.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let k2: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let r = ks_test(&k2, |x| scaled_chi2_1_cdf(x, var))?;
    Ok(VerifyEntry {
        check: "curvature chi2 KS".into(),
        entry: format!("D {:.4}", r.statistic),
        value: r.p_value,
        reference: 0.01,
        pass: r.p_value > 0.01,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_correlated() {
        for (x, y) in correlated_pairs(50, 1) {
            let c = (x[0] * y[0] + x[1] * y[1]) / (x[0].hypot(x[1]) * y[0].hypot(y[1]));
            assert!(c > 0.6);
        }
    }

    #[test]
    fn small_checks_run() {
        let e = check_covariance(1, 64, 1000, &correlated_pairs(2, 0), 0.2, 0).unwrap();
        assert_eq!(e.len(), 4);
        let e = check_cos_psi_decay(&[0.0], &[vec![0.5]], 3, 0.01).unwrap();
        assert_eq!(e.len(), 2);
        let k = tanh_curvature_draws(64, 3, 0.3, 1e-3, 0).unwrap();
        assert_eq!(k.len(), 3);
        // κ² ≈ ḟ² to second order in the step.
        assert!(k.iter().all(|(k2, fd)| (k2 - fd * fd).abs() < 1e-4 * (1.0 + fd * fd)));
    }
}
