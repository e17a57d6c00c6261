//! Planar layered media: materials, stacks, transfer matrices, reflection and
//! the one-dimensional outgoing Green's function.

mod material;
mod stack;
mod table;
mod wave;

pub use material::{IndexModel, Material};
pub use stack::{EmitterSpec, Layer, LayerStack};
pub use table::{MaterialEntry, MaterialTable, XrayCavity, XrayLayer};
pub use wave::{propagation_matrix, FieldState, GreenParts, Mat2, Side, WaveProblem, OVERFLOW_EXPONENT, WRONSKIAN_FLOOR};
