use crate::C64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    // Field solver.
    #[error("evaluation at zero frequency")]
    ZeroFrequency,
    #[error("cladding wavevector sits on its branch point at omega = {omega}")]
    BranchPoint { omega: C64 },
    #[error("exponential overflow in layer {layer}: |Im k| d = {exponent:.1}")]
    Overflow { layer: usize, exponent: f64 },
    #[error("evaluation at or too close to a pole at omega = {omega}")]
    NearPole { omega: C64 },

    // Feature extraction.
    #[error("ambiguous {what}: {} candidates {candidates:?}", candidates.len())]
    Ambiguity { what: String, candidates: Vec<f64> },

    // Pole search and residues.
    #[error("unresolved region Re [{re_lo}, {re_hi}] x Im [{im_lo}, {im_hi}]: {reason}")]
    UnresolvedRegion { re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64, reason: String },
    #[error("higher-order pole (order {order}) near {location}")]
    HigherOrderPole { location: C64, order: i64 },
    #[error("accuracy target missed: {0}")]
    Accuracy(String),
    #[error("no truncation reaches tolerance {tolerance}; best relative error {best_error:.3e} with {poles} pole groups")]
    RegionTooSmall { tolerance: f64, best_error: f64, poles: usize },

    // Few-mode model.
    #[error("singular resolvent at omega = {omega}")]
    Singular { omega: f64 },
    #[error("near exceptional point: eigenvector condition number {condition:.3e}")]
    NearExceptionalPoint { condition: f64 },
    #[error("residue {index} = {residue} is not real within tolerance")]
    ComplexResidue { index: usize, residue: C64 },

    #[error("material table: {0}")]
    MaterialTable(String),
}
