//! Complex level shift `δ̃(ω) = Δ(ω) − iΓ(ω)/2` of a two-level emitter in a
//! layered environment, plus the single-mode reference formulas and a
//! Kramers-Kronig consistency check.

mod curve;
mod kk;
mod levshift;
mod single_mode;
mod spectrum;

pub use curve::{LevelShiftCurve, Provenance};
pub use kk::{kk_check, KkReport};
pub use levshift::{levshift_exact, LevelShift, Normalization};
pub use single_mode::{single_mode_levshift, SingleModeCavity};
pub use spectrum::{nuclear_spectrum, NuclearLine};
