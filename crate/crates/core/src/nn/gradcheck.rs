//! Central finite-difference verification of analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Network, NnError, Tensor};

/// Step used for the central differences.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Relative error of the input gradient.
    pub input: f64,
    /// Relative error per parameter buffer, in network order.
    pub parameters: Vec<f64>,
}

impl GradCheckReport {
    pub fn max_error(&self) -> f64 {
        self.parameters.iter().copied().fold(self.input, f64::max)
    }
}

/// Gradient norms below this are compared in absolute terms.
pub const ABS_FLOOR: f64 = 1e-5;

/// `‖a − b‖ / max(‖a‖, ‖b‖, ABS_FLOOR)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(ABS_FLOOR)
}

fn projected_loss(net: &Network, input: &Tensor, weights: &[f64]) -> Result<f64, NnError> {
    let y = net.predict(input)?;
    Ok(y.data().iter().zip(weights).map(|(a, b)| a * b).sum())
}

/// Compares backprop gradients of `L = Σ r ⊙ net(input)` (random `r`) against
/// central differences. At most `max_entries` entries per buffer are probed.
pub fn check_gradients(
    net: &Network,
    input: &Tensor,
    seed: u64,
    max_entries: usize,
) -> Result<GradCheckReport, NnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = net.clone();
    let out = work.forward(input)?;
    let r: Vec<f64> = (0..out.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let input_grad = work.backward(&Tensor::new(out.shape().to_vec(), r.clone())?)?;
    let analytic: Vec<Vec<f64>> = work.gradients().iter().map(|g| g.to_vec()).collect();

    let pick = |len: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
        if len <= max_entries {
            (0..len).collect()
        } else {
            (0..max_entries).map(|_| rng.random_range(0..len)).collect()
        }
    };

    let idx = pick(input.len(), &mut rng);
    let mut numeric = Vec::with_capacity(idx.len());
    let mut probe = input.clone();
    for &i in &idx {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + FD_STEP;
        let lp = projected_loss(net, &probe, &r)?;
        probe.data_mut()[i] = orig - FD_STEP;
        let lm = projected_loss(net, &probe, &r)?;
        probe.data_mut()[i] = orig;
        numeric.push((lp - lm) / (2.0 * FD_STEP));
    }
    let selected: Vec<f64> = idx.iter().map(|&i| input_grad.data()[i]).collect();
    let input_err = relative_error(&selected, &numeric);

    let mut parameters = Vec::new();
    let mut probe_net = net.clone();
    let n_buffers = analytic.len();
    for b in 0..n_buffers {
        let len = analytic[b].len();
        let idx = pick(len, &mut rng);
        let mut numeric = Vec::with_capacity(idx.len());
        for &i in &idx {
            let orig = probe_net.parameters_mut()[b][i];
            probe_net.parameters_mut()[b][i] = orig + FD_STEP;
            let lp = projected_loss(&probe_net, input, &r)?;
            probe_net.parameters_mut()[b][i] = orig - FD_STEP;
            let lm = projected_loss(&probe_net, input, &r)?;
            probe_net.parameters_mut()[b][i] = orig;
            numeric.push((lp - lm) / (2.0 * FD_STEP));
        }
        let selected: Vec<f64> = idx.iter().map(|&i| analytic[b][i]).collect();
        parameters.push(relative_error(&selected, &numeric));
    }
    Ok(GradCheckReport {
        input: input_err,
        parameters,
    })
}
