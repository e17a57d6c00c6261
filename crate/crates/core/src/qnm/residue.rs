use std::f64::consts::PI;

use super::Meromorphic;
use crate::{Error, Result, C64};

fn circle<M: Meromorphic + ?Sized>(f: &M, pole: C64, radius: f64, m: usize) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..m {
        // Half-step offset keeps nodes off the symmetry axes through the pole.
        let e = C64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / m as f64);
        acc += f.value(pole + radius * e)? * e;
    }
    Ok(acc * (radius / m as f64))
}

/// Residue of `f` at `pole` by the trapezoid rule on a circle.
///
/// Returns the `2m`-point value and `|r_2m − r_m|` as its error estimate.
/// The circle must enclose no other singularity.
pub fn compute_residue<M: Meromorphic + ?Sized>(f: &M, pole: C64, radius: f64, m: usize) -> Result<(C64, f64)> {
    if !(radius.is_finite() && radius > 0.0) || m < 16 {
        return Err(Error::InvalidInput(format!("residue circle radius {radius} with {m} points")));
    }
    let coarse = circle(f, pole, radius, m)?;
    let fine = circle(f, pole, radius, 2 * m)?;
    Ok((fine, (fine - coarse).norm()))
}
