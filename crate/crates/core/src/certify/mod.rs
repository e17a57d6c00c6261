//! Multi-mode certification: locate the probed reflectance minimum and the
//! main pole, decompose the emitter's zero-crossing shift, and decide whether
//! a single-mode description is adequate.

mod classify;
mod features;
mod scan;

pub use classify::{
    classify, main_pole, shift_decomposition, ClassificationReport, ClassifyInput, Flags, ShiftDecomposition,
    Thresholds,
};
pub use features::{find_omega_min, find_zero_of_delta, locate_minimum, parabolic_vertex};
pub use scan::{
    fabry_perot_shift, rocking_minima, scan_mirror_index, xray_mode_report, FabryPerotSetup, XraySetup,
    XrayModeReport,
};
