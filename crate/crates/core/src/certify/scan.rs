use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify, find_omega_min, parabolic_vertex, ClassificationReport, ClassifyInput, Thresholds};
use crate::layered_medium::{EmitterSpec, LayerStack, MaterialTable, WaveProblem, XrayCavity};
use crate::qnm::{Meromorphic, ScanRegion};
use crate::witness::LevelShift;
use crate::{Error, Result, Window, C64};

/// Fabry-Pérot probe. Lengths are measured in units of `L/π`, so
/// frequencies come out in units of `πc/L` and mode `m` sits near `ω = m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FabryPerotSetup {
    pub n_mirror: f64,
    #[serde(default = "FabryPerotSetup::default_mode")]
    pub mode: usize,
    /// The pole search covers `|Re ω| ≤ region_half_width`.
    #[serde(default = "FabryPerotSetup::default_half_width")]
    pub region_half_width: f64,
    #[serde(default = "FabryPerotSetup::default_depth")]
    pub depth: f64,
    /// Width of the analysis window; one free spectral range by default.
    #[serde(default = "FabryPerotSetup::default_analysis_width")]
    pub analysis_width: f64,
}

impl FabryPerotSetup {
    fn default_mode() -> usize {
        1
    }
    /// Kept off multiples of `100/n`, where half-wave mirrors put poles on `Re ω = const` lines.
    fn default_half_width() -> f64 {
        30.25
    }
    fn default_depth() -> f64 {
        2.5
    }
    fn default_analysis_width() -> f64 {
        1.0
    }

    pub fn new(n_mirror: f64) -> Self {
        Self {
            n_mirror,
            mode: Self::default_mode(),
            region_half_width: Self::default_half_width(),
            depth: Self::default_depth(),
            analysis_width: Self::default_analysis_width(),
        }
    }

    pub fn level_shift(&self) -> Result<LevelShift> {
        fabry_perot_shift(self.n_mirror, self.mode)
    }

    pub fn input(&self) -> Result<ClassifyInput> {
        if self.mode == 0 {
            return Err(Error::InvalidInput("mode index starts at 1".into()));
        }
        let m = self.mode as f64;
        Ok(ClassifyInput {
            search_window: Window::new(m - 0.4, m + 0.6)?,
            analysis_width: self.analysis_width,
            region: ScanRegion::lower_half(-self.region_half_width, self.region_half_width, self.depth)?,
        })
    }

    pub fn classify(&self, th: &Thresholds) -> Result<ClassificationReport> {
        classify(&self.level_shift()?, &self.input()?, th)
    }
}

/// Emitter with `γ = 1` at the centre of a Fabry-Pérot gap of length `π`.
pub fn fabry_perot_shift(n_mirror: f64, mode: usize) -> Result<LevelShift> {
    let length = PI;
    let stack = LayerStack::fabry_perot(length, n_mirror)?;
    let emitter = EmitterSpec { position: 0.01 * length + 0.5 * length, frequency: mode.max(1) as f64, gamma: 1.0 };
    LevelShift::new(WaveProblem::normal_incidence(stack.with_emitter(emitter)?)?, emitter)
}

/// Classifies every mirror index in parallel; rows keep the input order and
/// fail independently.
pub fn scan_mirror_index(setups: &[FabryPerotSetup], th: &Thresholds) -> Vec<Result<ClassificationReport>> {
    setups.par_iter().map(|s| s.classify(th)).collect()
}

/// Grazing-incidence probe of an X-ray cavity. Energies in keV, angles in rad.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XraySetup {
    pub cavity: XrayCavity,
    #[serde(default = "XraySetup::default_theta_range")]
    pub theta_range: [f64; 2],
    #[serde(default = "XraySetup::default_rocking_grid")]
    pub rocking_grid: usize,
    #[serde(default = "XraySetup::default_window")]
    pub window_kev: f64,
    #[serde(default = "XraySetup::default_half_width")]
    pub region_half_width_kev: f64,
    #[serde(default = "XraySetup::default_depth")]
    pub depth_kev: f64,
}

impl XraySetup {
    fn default_theta_range() -> [f64; 2] {
        [1.0e-3, 10.0e-3]
    }
    fn default_rocking_grid() -> usize {
        4001
    }
    fn default_window() -> f64 {
        20e-6
    }
    fn default_half_width() -> f64 {
        150e-6
    }
    fn default_depth() -> f64 {
        60e-6
    }

    pub fn new(cavity: XrayCavity) -> Self {
        Self {
            cavity,
            theta_range: Self::default_theta_range(),
            rocking_grid: Self::default_rocking_grid(),
            window_kev: Self::default_window(),
            region_half_width_kev: Self::default_half_width(),
            depth_kev: Self::default_depth(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XrayModeReport {
    pub mode: usize,
    pub theta: f64,
    pub reflectance: f64,
    pub k_par: f64,
    /// `δ̃(ω_a)` in units of `γ`.
    pub levshift_at_resonance: C64,
    pub classification: ClassificationReport,
}

/// Local minima of the rocking curve `R(θ)` at the transition energy,
/// ordered by angle and refined on ten-times denser local grids.
pub fn rocking_minima(cavity: &XrayCavity, table: &MaterialTable, range: [f64; 2], grid: usize) -> Result<Vec<(f64, f64)>> {
    let w = cavity.transition_kev;
    let r = |theta: f64| -> Result<f64> { cavity.problem(table, theta)?.reflectance(w) };
    let window = Window::new(range[0], range[1])?;
    let th = window.grid(grid);
    let rs = th.par_iter().map(|&t| r(t)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 1..grid - 1 {
        if !(rs[i] < rs[i - 1] && rs[i] <= rs[i + 1]) {
            continue;
        }
        let mut h = window.width() / (grid - 1) as f64;
        let mut x = parabolic_vertex([th[i - 1], th[i], th[i + 1]], [rs[i - 1], rs[i], rs[i + 1]]);
        while h > 1e-9 * window.width() {
            let local = Window::new(x - 2.0 * h, x + 2.0 * h)?;
            let xs = local.grid(41);
            let ys = xs.iter().map(|&t| r(t)).collect::<Result<Vec<_>>>()?;
            x = find_omega_min(&xs, &ys).unwrap_or(x);
            h /= 10.0;
        }
        out.push((x, r(x)?));
    }
    Ok(out)
}

/// Classification of the `mode`-th rocking minimum (counted from 1).
pub fn xray_mode_report(setup: &XraySetup, table: &MaterialTable, mode: usize, th: &Thresholds) -> Result<XrayModeReport> {
    let minima = rocking_minima(&setup.cavity, table, setup.theta_range, setup.rocking_grid)?;
    if mode == 0 || mode > minima.len() {
        return Err(Error::Ambiguity {
            what: format!("rocking minimum {mode}"),
            candidates: minima.iter().map(|m| m.0).collect(),
        });
    }
    let (theta, reflectance) = minima[mode - 1];
    let problem = setup.cavity.problem(table, theta)?;
    let ls = LevelShift::from_problem(problem)?;
    let w0 = setup.cavity.transition_kev;
    let input = ClassifyInput {
        search_window: Window::centered(w0, setup.window_kev)?,
        analysis_width: setup.window_kev,
        region: ScanRegion::lower_half(w0 - setup.region_half_width_kev, w0 + setup.region_half_width_kev, setup.depth_kev)?
            .clear_of_cuts(&ls.branch_points(), w0 - setup.window_kev, w0 + setup.window_kev)?,
    };
    let classification = classify(&ls, &input, th)?;
    Ok(XrayModeReport {
        mode,
        theta,
        reflectance,
        k_par: ls.problem.k_par,
        levshift_at_resonance: ls.eval(w0.into())? / ls.emitter.gamma,
        classification,
    })
}
