use serde::{Deserialize, Serialize};

use super::LevelShiftCurve;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KkReport {
    /// `Δ` reconstructed from `Γ` on the compared points.
    pub reconstructed: Vec<f64>,
    pub compared_omega: Vec<f64>,
    pub max_abs_error: f64,
    /// `max_abs_error / max |Δ|` over the compared points.
    pub relative_error: f64,
}

/// Reconstructs `Δ(ω) = −(1/2π) P∫ Γ(ω')/(ω' − ω) dω'` from the sampled
/// rate with alternate-point (Maclaurin) quadrature and compares it with the
/// sampled `Δ` on the interior third of the grid.
///
/// `rate_reference` is subtracted from `Γ` first; pass the free-space `γ`
/// so the constant high-frequency tail does not leak into the window edges.
pub fn kk_check(curve: &LevelShiftCurve, rate_reference: f64) -> Result<KkReport> {
    let n = curve.len();
    if n < 16 {
        return Err(Error::InvalidInput(format!("{n} samples are too few for a dispersion check")));
    }
    let h = (curve.omega[n - 1] - curve.omega[0]) / (n - 1) as f64;
    for w in curve.omega.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs() {
            return Err(Error::InvalidInput("dispersion check needs a uniform grid".into()));
        }
    }
    let rate: Vec<f64> = curve.rate().into_iter().map(|g| g - rate_reference).collect();
    let shift = curve.shift();
    let (lo, hi) = (n / 3, n - n / 3);
    let mut reconstructed = Vec::with_capacity(hi - lo);
    let mut compared_omega = Vec::with_capacity(hi - lo);
    let mut max_err = 0.0f64;
    let mut max_ref = 0.0f64;
    for i in lo..hi {
        let mut acc = 0.0;
        let start = if i % 2 == 0 { 1 } else { 0 };
        for j in (start..n).step_by(2) {
            acc += rate[j] / (curve.omega[j] - curve.omega[i]);
        }
        let delta = -(2.0 * h) * acc / (2.0 * std::f64::consts::PI);
        max_err = max_err.max((delta - shift[i]).abs());
        max_ref = max_ref.max(shift[i].abs());
        reconstructed.push(delta);
        compared_omega.push(curve.omega[i]);
    }
    Ok(KkReport { reconstructed, compared_omega, max_abs_error: max_err, relative_error: max_err / max_ref })
}
