use super::{Network, Sequence};
use crate::error::{Error, Result};

/// Central-difference step.
const STEP: f64 = 1e-5;

/// Gradients smaller than this are compared absolutely: the relative error
/// uses `max(|analytic|, |numeric|, FLOOR)` as denominator, so rounding noise
/// on near-zero gradients does not dominate the report.
const FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub n_params: usize,
}

/// Inference-mode per-step MSE over `data` and its exact parameter gradient.
pub fn loss_and_gradient(net: &Network, data: &[Sequence]) -> Result<(f64, Vec<f64>)> {
    let steps: usize = data.iter().map(Sequence::len).sum();
    if steps == 0 {
        return Err(Error::Dataset("gradient needs at least one target".into()));
    }
    let mut grad = vec![0.0; net.params().len()];
    let mut sse = 0.0;
    for seq in data {
        net.check_sequence(seq)?;
        sse += net.accumulate(seq, 1.0 / steps as f64, 0.0, None, &mut grad);
    }
    Ok((sse / steps as f64, grad))
}

/// Compares the analytic gradient with central finite differences over every
/// parameter.
pub fn gradient_check(net: &Network, data: &[Sequence]) -> Result<GradCheckReport> {
    let (_, analytic) = loss_and_gradient(net, data)?;
    let mut probe = net.clone();
    let mut max_rel: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let orig = probe.params()[k];
        probe.params_mut()[k] = orig + STEP;
        let plus = loss_and_gradient(&probe, data)?.0;
        probe.params_mut()[k] = orig - STEP;
        let minus = loss_and_gradient(&probe, data)?.0;
        probe.params_mut()[k] = orig;
        let numeric = (plus - minus) / (2.0 * STEP);
        let abs = (a - numeric).abs();
        max_abs = max_abs.max(abs);
        max_rel = max_rel.max(abs / a.abs().max(numeric.abs()).max(FLOOR));
    }
    Ok(GradCheckReport {
        max_rel_error: max_rel,
        max_abs_error: max_abs,
        n_params: analytic.len(),
    })
}
