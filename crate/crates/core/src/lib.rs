//! Pole expansions and multi-mode certification of emitter level shifts in
//! lossy one-dimensional layered resonators.
//!
//! The crate is organised bottom-up:
//!
//! * [`layered_medium`] solves the scalar Helmholtz problem of a planar stack
//!   (transfer matrices, reflection, Green's function).
//! * [`witness`] turns the Green's function into the complex level shift
//!   `δ̃(ω) = Δ(ω) − iΓ(ω)/2` of a two-level emitter and provides the
//!   single-mode reference formulas.
//! * [`qnm`] locates the complex poles of a meromorphic function, extracts
//!   residues and builds truncated pole expansions.
//! * [`pfm`] is the few-mode Hamiltonian model and its diagonalisation.
//! * [`certify`] combines the above into a multi-mode classification with a
//!   three-way shift decomposition.

pub mod certify;
pub mod error;
pub mod layered_medium;
pub mod pfm;
pub mod qnm;
pub mod serde_complex;
pub mod witness;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type C64 = Complex64;

/// A closed real frequency interval.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidInput(format!("window [{lo}, {hi}] is empty or not finite")));
        }
        Ok(Self { lo, hi })
    }

    pub fn centered(center: f64, width: f64) -> Result<Self> {
        Self::new(center - 0.5 * width, center + 0.5 * width)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// `n` equally spaced points including both ends.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "a grid needs at least two points");
        let h = self.width() / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.hi } else { self.lo + h * i as f64 })
            .collect()
    }
}
