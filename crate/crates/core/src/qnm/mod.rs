//! Complex poles of meromorphic functions, their residues, and truncated
//! pole expansions.
//!
//! Poles are located by recursive subdivision of a rectangle. On every box
//! the contour moments of `f` and of `1/f` give pole and zero counts (as
//! Hankel ranks), and the winding number of `f` along the boundary must agree
//! with their difference before a box is accepted. Single-pole boxes are
//! polished by Newton's method on `1/f`.

mod contour;
mod expansion;
mod poles;
mod residue;

pub use contour::gauss_legendre;
pub use expansion::{
    build_expansion, convergence_report, evaluate_truncated, ConvergenceReport, Counting, Pole, PoleExpansion,
};
pub use poles::{find_poles, PoleLocation, PoleSearch, ScanRegion};
pub use residue::compute_residue;

use crate::{Result, C64};

/// A function analytic in a region apart from isolated poles.
pub trait Meromorphic: Sync {
    fn value(&self, z: C64) -> Result<C64>;

    /// `(f, 1/f)`. Override when `1/f` can be formed without dividing by a
    /// vanishing quantity.
    fn value_and_reciprocal(&self, z: C64) -> Result<(C64, C64)> {
        let v = self.value(z)?;
        Ok((v, v.inv()))
    }

    /// Branch points whose cuts run vertically downward. A scan region
    /// must not straddle one.
    fn branch_points(&self) -> Vec<C64> {
        Vec::new()
    }
}

impl<F> Meromorphic for F
where
    F: Fn(C64) -> C64 + Sync,
{
    fn value(&self, z: C64) -> Result<C64> {
        Ok(self(z))
    }
}

/// Adapter for fallible closures.
pub struct Fallible<F>(pub F);

impl<F> Meromorphic for Fallible<F>
where
    F: Fn(C64) -> Result<C64> + Sync,
{
    fn value(&self, z: C64) -> Result<C64> {
        (self.0)(z)
    }
}
