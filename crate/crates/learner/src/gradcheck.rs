use gestalt_core::Label;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheck {
    pub checked: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// `(array, element)` of the worst relative error.
    pub worst: (usize, usize),
    /// Parameters whose `±ε` probe crossed a ReLU or max-pool kink, where a
    /// central difference is not a derivative estimate.
    pub kink_crossings: usize,
    /// Worst relative error over the parameters without a crossing.
    pub max_rel_error_smooth: f64,
}

/// Relative error `|a - n| / max(|a|, |n|, floor)`. The floor keeps
/// parameters with vanishing gradients from dividing rounding noise by ~0.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compare the backward pass against central differences
/// `(L(θ + ε) - L(θ - ε)) / 2ε` for every parameter.
pub fn gradient_check(model: &Model, xs: &[&[f64]], ys: &[Label], eps: f64, floor: f64) -> Result<GradCheck> {
    let (_, grads, _) = model.loss_and_grad(xs, ys)?;
    let mut probe = model.clone();
    let mut out = GradCheck {
        checked: 0,
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst: (0, 0),
        kink_crossings: 0,
        max_rel_error_smooth: 0.0,
    };
    for a in 0..grads.len() {
        for e in 0..grads[a].len() {
            let orig = probe.params()[a][e];
            probe.params_mut()[a][e] = orig + eps;
            let up = probe.loss(xs, ys)?;
            let up_pattern = probe.kink_pattern(xs)?;
            probe.params_mut()[a][e] = orig - eps;
            let down = probe.loss(xs, ys)?;
            let crossed = probe.kink_pattern(xs)? != up_pattern;
            probe.params_mut()[a][e] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let rel = relative_error(grads[a][e], numeric, floor);
            out.checked += 1;
            out.max_abs_error = out.max_abs_error.max((grads[a][e] - numeric).abs());
            if crossed {
                out.kink_crossings += 1;
            } else {
                out.max_rel_error_smooth = out.max_rel_error_smooth.max(rel);
            }
            if rel > out.max_rel_error {
                out.max_rel_error = rel;
                out.worst = (a, e);
            }
        }
    }
    Ok(out)
}
