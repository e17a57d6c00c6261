use serde::{Deserialize, Serialize};

use super::{find_zero_of_delta, locate_minimum};
use crate::qnm::{build_expansion, convergence_report, Counting, Pole, PoleExpansion, ScanRegion};
use crate::witness::{LevelShift, LevelShiftCurve};
use crate::{Error, Result, Window, C64};

/// Decision thresholds of the classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Relative sup-norm error a truncation must reach.
    #[serde(default = "Thresholds::default_convergence")]
    pub convergence_tol: f64,
    /// Largest `|arg r|` of the main residue regarded as real (radians).
    #[serde(default = "Thresholds::default_phase")]
    pub phase_tol: f64,
    /// Largest `|Re ω̃ − ω_min|`, in units of `κ̃`, regarded as resonant.
    #[serde(default = "Thresholds::default_shift")]
    pub shift_tol: f64,
    #[serde(default = "Thresholds::default_counting")]
    pub counting: Counting,
    /// Real-axis samples over the analysis window.
    #[serde(default = "Thresholds::default_grid")]
    pub grid: usize,
}

impl Thresholds {
    fn default_convergence() -> f64 {
        0.05
    }
    fn default_phase() -> f64 {
        0.05
    }
    fn default_shift() -> f64 {
        0.02
    }
    fn default_counting() -> Counting {
        Counting::MirrorPairs
    }
    fn default_grid() -> usize {
        2001
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.convergence_tol > 0.0 && self.phase_tol >= 0.0 && self.shift_tol >= 0.0) {
            return Err(Error::InvalidInput("thresholds must be non-negative and the convergence tolerance positive".into()));
        }
        if self.grid < 11 {
            return Err(Error::InvalidInput("analysis grid needs at least 11 samples".into()));
        }
        Ok(())
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            convergence_tol: Self::default_convergence(),
            phase_tol: Self::default_phase(),
            shift_tol: Self::default_shift(),
            counting: Self::default_counting(),
            grid: Self::default_grid(),
        }
    }
}

/// Where to look: the probed minimum is searched in `search_window`, the
/// analysis window of width `analysis_width` is then centred on it, and poles
/// are collected from `region`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyInput {
    pub search_window: Window,
    pub analysis_width: f64,
    pub region: ScanRegion,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftDecomposition {
    /// `Re ω̃_main − ω_min`.
    pub off_resonant: f64,
    /// `−(Im r / Re r) κ̃/2`.
    pub complex_residue: f64,
    /// `ω_a⁽⁰⁾ − ω_a⁽⁰⁾_single`.
    pub multi_pole: f64,
    /// `ω_a⁽⁰⁾ − ω_min`.
    pub total: f64,
    /// Zero of the single-pole `Δ`, closed form.
    pub omega0_single: f64,
    /// Same zero found numerically when it lies in the window.
    pub omega0_single_numeric: Option<f64>,
}

impl ShiftDecomposition {
    pub fn closure_error(&self) -> f64 {
        (self.off_resonant + self.complex_residue + self.multi_pole - self.total).abs()
    }

    pub fn scaled(&self, unit: f64) -> [f64; 4] {
        [self.off_resonant / unit, self.complex_residue / unit, self.multi_pole / unit, self.total / unit]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub multi_pole: bool,
    pub complex_residue: bool,
    pub off_resonant: bool,
}

impl Flags {
    pub fn single_mode_sufficient(&self) -> bool {
        !(self.multi_pole || self.complex_residue || self.off_resonant)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub omega_min: f64,
    pub window: Window,
    pub main_pole: Pole,
    pub kappa_tilde: f64,
    pub residue_phase: f64,
    pub n_star: usize,
    pub truncation_errors: Vec<f64>,
    pub omega0: f64,
    pub shifts: ShiftDecomposition,
    /// Shifts divided by `γ` and by `κ̃`: off-resonant, complex-residue,
    /// multi-pole, total.
    pub shifts_in_gamma: [f64; 4],
    pub shifts_in_kappa: [f64; 4],
    pub levshift_at_min: C64,
    pub flags: Flags,
    pub single_mode_sufficient: bool,
    pub constant: C64,
    pub constant_vanishing: bool,
    pub poles: Vec<Pole>,
    pub thresholds: Thresholds,
}

/// Pole whose real part is closest to `omega_min`; ties go to the larger residue.
pub fn main_pole(expansion: &PoleExpansion, omega_min: f64) -> Result<Pole> {
    expansion
        .poles
        .iter()
        .copied()
        .min_by(|a, b| {
            let (da, db) = ((a.omega.re - omega_min).abs(), (b.omega.re - omega_min).abs());
            if (da - db).abs() <= 1e-12 * da.max(db) {
                b.residue.norm().total_cmp(&a.residue.norm())
            } else {
                da.total_cmp(&db)
            }
        })
        .ok_or_else(|| Error::InvalidInput("expansion has no poles".into()))
}

/// Splits `ω_a⁽⁰⁾ − ω_min` into off-resonant, complex-residue and multi-pole parts.
pub fn shift_decomposition(omega_min: f64, main: &Pole, omega0: f64, window: Window) -> Result<ShiftDecomposition> {
    let r = main.residue;
    if r.re == 0.0 {
        return Err(Error::InvalidInput("main residue has no real part".into()));
    }
    let complex_residue = -(r.im / r.re) * 0.5 * main.kappa();
    let omega0_single = main.omega.re + complex_residue;
    let omega0_single_numeric = if window.contains(omega0_single) {
        find_zero_of_delta(|w| Ok(main.term(w).re), window, 201).ok()
    } else {
        None
    };
    Ok(ShiftDecomposition {
        off_resonant: main.omega.re - omega_min,
        complex_residue,
        multi_pole: omega0 - omega0_single,
        total: omega0 - omega_min,
        omega0_single,
        omega0_single_numeric,
    })
}

/// Full multi-mode classification of an emitter in a layered environment.
pub fn classify(ls: &LevelShift, input: &ClassifyInput, th: &Thresholds) -> Result<ClassificationReport> {
    th.validate()?;
    let problem = &ls.problem;
    let omega_min = locate_minimum(|w| problem.reflectance(w), input.search_window, th.grid)?;
    let window = Window::centered(omega_min, input.analysis_width)?;
    let mut expansion = build_expansion(ls, &input.region, window)?;
    expansion.rank(omega_min, th.counting);
    let exact = LevelShiftCurve::sample(|w| ls.eval(w.into()), window, th.grid)?;
    let conv = convergence_report(&expansion, &exact, th.convergence_tol)?;
    let main = main_pole(&expansion, omega_min)?;
    let omega0 = find_zero_of_delta(|w| Ok(ls.eval(w.into())?.re), window, th.grid)?;
    let shifts = shift_decomposition(omega_min, &main, omega0, window)?;
    let kappa = main.kappa();
    let flags = Flags {
        multi_pole: conv.n_star > 1,
        complex_residue: main.residue_phase().abs() > th.phase_tol,
        off_resonant: shifts.off_resonant.abs() > th.shift_tol * kappa,
    };
    Ok(ClassificationReport {
        omega_min,
        window,
        main_pole: main,
        kappa_tilde: kappa,
        residue_phase: main.residue_phase(),
        n_star: conv.n_star,
        truncation_errors: conv.errors,
        omega0,
        shifts_in_gamma: shifts.scaled(ls.emitter.gamma),
        shifts_in_kappa: shifts.scaled(kappa),
        shifts,
        levshift_at_min: ls.eval(omega_min.into())?,
        flags,
        single_mode_sufficient: flags.single_mode_sufficient(),
        constant: expansion.constant,
        constant_vanishing: expansion.constant_vanishing,
        poles: expansion.poles.clone(),
        thresholds: *th,
    })
}
