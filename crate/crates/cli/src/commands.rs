//! Subcommand dispatch. Rows are computed in parallel, then written in order.

use std::f64::consts::PI;
use std::path::Path;

use mmcert::certify::{
    classify, rocking_minima, scan_mirror_index, xray_mode_report, ClassificationReport, ClassifyInput,
    XrayModeReport,
};
use mmcert::layered_medium::{MaterialTable, WaveProblem};
use mmcert::pfm::{diagonalize, levshift_matrix, linear_reflection, PfmParams};
use mmcert::qnm::{Meromorphic, Pole, ScanRegion};
use mmcert::witness::{nuclear_spectrum, LevelShift, LevelShiftCurve};
use mmcert::{Window, C64};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::{csv, num, Outputs};
use crate::scenario::{CustomStackScenario, FabryPerotScenario, Grid, Scenario, SyntheticPfmScenario, XrayScenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Classify,
    Sweep,
    Poles,
    Spectrum,
    PfmCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Classify => "classify",
            Self::Sweep => "sweep",
            Self::Poles => "poles",
            Self::Spectrum => "spectrum",
            Self::PfmCheck => "pfm-check",
        }
    }
}

/// Outcome of a run that did not fail outright.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// Labels of the rows that failed.
    Partial(Vec<String>),
}

pub fn run(cmd: Command, scenario: &Scenario, base: &Path, out: &mut Outputs) -> Result<Status> {
    out.write("scenario.json", "scenario", scenario.to_json().as_bytes())?;
    let status = match scenario {
        Scenario::FabryPerot(s) => fabry_perot(cmd, s, out),
        Scenario::Xray(s) => xray(cmd, s, base, out),
        Scenario::CustomStack(s) => custom_stack(cmd, s, out),
        Scenario::SyntheticPfm(s) => synthetic_pfm(cmd, s, out),
    }?;
    Ok(status)
}

fn not_applicable(cmd: Command, kind: &str) -> CliError {
    CliError::Usage(format!("`{}` does not apply to {kind} scenarios", cmd.name()))
}

#[derive(Serialize)]
struct RowStatus {
    label: String,
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Writes the per-row status list and turns failures into a partial status.
fn finish_rows(out: &mut Outputs, prefix: &str, cmd: Command, rows: Vec<RowStatus>) -> Result<Status> {
    let failed: Vec<String> = rows.iter().filter(|r| !r.ok).map(|r| r.label.clone()).collect();
    for r in rows.iter().filter(|r| !r.ok) {
        eprintln!("row {}: {}", r.label, r.error.as_deref().unwrap_or(""));
    }
    out.write_json(&format!("{prefix}_{}_status.json", cmd.name()), "status", &rows)?;
    if failed.is_empty() {
        Ok(Status::Complete)
    } else if failed.len() == rows.len() {
        Err(CliError::Failed(format!("every row failed: {}", failed.join(", "))))
    } else {
        Ok(Status::Partial(failed))
    }
}

fn row<T>(label: String, result: &std::result::Result<T, impl ToString>) -> RowStatus {
    match result {
        Ok(_) => RowStatus { label, ok: true, error: None },
        Err(e) => RowStatus { label, ok: false, error: Some(e.to_string()) },
    }
}

#[derive(Serialize)]
struct ComplexValue {
    re: f64,
    im: f64,
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct PoleEntry {
    re: f64,
    im: f64,
    res_re: f64,
    res_im: f64,
}

/// Pole table: `{poles: [{re, im, res_re, res_im}], constant: {re, im}, region}`.
#[derive(Serialize)]
struct PoleTable<'a> {
    poles: Vec<PoleEntry>,
    constant: ComplexValue,
    region: Option<&'a ScanRegion>,
}

fn write_poles(out: &mut Outputs, stem: &str, poles: &[(C64, C64)], constant: C64, region: Option<&ScanRegion>) -> Result<()> {
    let table = PoleTable {
        poles: poles.iter().map(|(p, r)| PoleEntry { re: p.re, im: p.im, res_re: r.re, res_im: r.im }).collect(),
        constant: constant.into(),
        region,
    };
    out.write_json(&format!("{stem}_poles.json"), "poles", &table)?;
    let rows = poles.iter().map(|(p, r)| vec![num(p.re), num(p.im), num(r.re), num(r.im)]);
    out.write(&format!("{stem}_poles.csv"), "poles", csv(&["re", "im", "res_re", "res_im"], rows).as_bytes())
}

fn report_poles(report: &ClassificationReport) -> Vec<(C64, C64)> {
    report.poles.iter().map(|p: &Pole| (p.omega, p.residue)).collect()
}

const SWEEP_HEADER: [&str; 15] = [
    "label",
    "ok",
    "omega_min",
    "pole_re",
    "pole_im",
    "kappa_tilde",
    "residue_phase",
    "n_star",
    "off_resonant_kappa",
    "complex_residue_kappa",
    "multi_pole_kappa",
    "total_kappa",
    "single_mode",
    "flags",
    "error",
];

fn sweep_row(label: &str, report: &std::result::Result<ClassificationReport, String>) -> Vec<String> {
    match report {
        Ok(r) => {
            let s = r.shifts_in_kappa;
            let flags = [
                (r.flags.multi_pole, "multi_pole"),
                (r.flags.complex_residue, "complex_residue"),
                (r.flags.off_resonant, "off_resonant"),
            ]
            .iter()
            .filter(|f| f.0)
            .map(|f| f.1)
            .collect::<Vec<_>>()
            .join("|");
            vec![
                label.to_string(),
                "true".into(),
                num(r.omega_min),
                num(r.main_pole.omega.re),
                num(r.main_pole.omega.im),
                num(r.kappa_tilde),
                num(r.residue_phase),
                r.n_star.to_string(),
                num(s[0]),
                num(s[1]),
                num(s[2]),
                num(s[3]),
                r.single_mode_sufficient.to_string(),
                flags,
                String::new(),
            ]
        }
        Err(e) => {
            let mut cells = vec![label.to_string(), "false".into()];
            cells.extend(std::iter::repeat(String::new()).take(SWEEP_HEADER.len() - 3));
            cells.push(format!("\"{}\"", e.replace('"', "'")));
            cells
        }
    }
}

fn levshift_curve(ls: &LevelShift, window: Window, points: usize) -> mmcert::Result<LevelShiftCurve> {
    LevelShiftCurve::sample(|w| ls.eval(w.into()), window, points)
}

fn spectrum_csv(problem: &WaveProblem, ls: &LevelShift, grid: &Grid) -> mmcert::Result<String> {
    let omega = grid.window()?.grid(grid.points);
    let rows = omega
        .par_iter()
        .map(|&w| {
            let r = problem.reflection(w.into())?;
            let d = ls.eval(w.into())?;
            Ok(vec![num(w), num(r.norm_sqr()), num(r.re), num(r.im), num(d.re), num(d.im)])
        })
        .collect::<mmcert::Result<Vec<_>>>()?;
    Ok(csv(&["omega", "reflectance", "r_re", "r_im", "delta_re", "delta_im"], rows))
}

#[derive(Serialize)]
struct FabryPerotReport<'a> {
    label: String,
    n_mirror: f64,
    /// `πc/L` with `c = 1`: multiply frequencies by this for absolute units.
    frequency_unit: f64,
    classification: &'a ClassificationReport,
}

fn fabry_perot(cmd: Command, s: &FabryPerotScenario, out: &mut Outputs) -> Result<Status> {
    let setups = s.setups();
    let labels: Vec<String> = setups.iter().map(|x| format!("n{}", x.n_mirror)).collect();
    let prefix = &s.output_prefix;
    let unit = PI / s.length;
    match cmd {
        Command::Classify | Command::Sweep | Command::Poles => {
            let reports: Vec<_> = scan_mirror_index(&setups, &s.thresholds).into_iter().map(|r| r.map_err(|e| e.to_string())).collect();
            let mut statuses = Vec::new();
            for ((setup, label), report) in setups.iter().zip(&labels).zip(&reports) {
                statuses.push(row(label.clone(), report));
                let Ok(r) = report else { continue };
                let stem = format!("{prefix}_{label}");
                match cmd {
                    Command::Classify => {
                        let doc = FabryPerotReport { label: label.clone(), n_mirror: setup.n_mirror, frequency_unit: unit, classification: r };
                        out.write_json(&format!("{stem}_report.json"), "report", &doc)?;
                        let ls = setup.level_shift()?;
                        let curve = levshift_curve(&ls, r.window, s.thresholds.grid)?;
                        out.write(&format!("{stem}_levshift.csv"), "levshift_curve", curve.to_csv().as_bytes())?;
                        write_poles(out, &stem, &report_poles(r), r.constant, Some(&setup.input()?.region))?;
                    }
                    Command::Poles => write_poles(out, &stem, &report_poles(r), r.constant, Some(&setup.input()?.region))?,
                    _ => {}
                }
            }
            if cmd == Command::Sweep {
                let rows = labels.iter().zip(&reports).map(|(l, r)| sweep_row(l, r));
                out.write(&format!("{prefix}_sweep.csv"), "sweep_table", csv(&SWEEP_HEADER, rows).as_bytes())?;
                let docs: Vec<_> = setups
                    .iter()
                    .zip(&labels)
                    .zip(&reports)
                    .filter_map(|((setup, label), r)| {
                        r.as_ref().ok().map(|c| FabryPerotReport {
                            label: label.clone(),
                            n_mirror: setup.n_mirror,
                            frequency_unit: unit,
                            classification: c,
                        })
                    })
                    .collect();
                out.write_json(&format!("{prefix}_sweep.json"), "sweep_reports", &docs)?;
            }
            finish_rows(out, prefix, cmd, statuses)
        }
        Command::Spectrum => {
            let curves: Vec<_> = setups
                .par_iter()
                .map(|setup| {
                    let ls = setup.level_shift()?;
                    spectrum_csv(&ls.problem, &ls, &s.spectrum)
                })
                .collect();
            let mut statuses = Vec::new();
            for (label, c) in labels.iter().zip(&curves) {
                statuses.push(row(label.clone(), c));
                if let Ok(text) = c {
                    out.write(&format!("{prefix}_{label}_spectrum.csv"), "spectrum", text.as_bytes())?;
                }
            }
            finish_rows(out, prefix, cmd, statuses)
        }
        Command::PfmCheck => Err(not_applicable(cmd, "fabry_perot")),
    }
}

fn xray(cmd: Command, s: &XrayScenario, base: &Path, out: &mut Outputs) -> Result<Status> {
    let table = s.table(base)?;
    let setup = s.setup();
    let prefix = &s.output_prefix;
    let labels: Vec<String> = s.modes.iter().map(|m| format!("m{m}")).collect();
    match cmd {
        Command::Classify | Command::Sweep | Command::Poles => {
            let reports: Vec<std::result::Result<XrayModeReport, String>> = s
                .modes
                .par_iter()
                .map(|&m| xray_mode_report(&setup, &table, m, &s.thresholds).map_err(|e| e.to_string()))
                .collect();
            let mut statuses = Vec::new();
            for (label, report) in labels.iter().zip(&reports) {
                statuses.push(row(label.clone(), report));
                let Ok(r) = report else { continue };
                let stem = format!("{prefix}_{label}");
                let ls = LevelShift::from_problem(setup.cavity.problem(&table, r.theta)?)?;
                let c = &r.classification;
                let region = xray_region(&setup, &ls)?;
                match cmd {
                    Command::Classify => {
                        out.write_json(&format!("{stem}_report.json"), "report", r)?;
                        let curve = levshift_curve(&ls, c.window, s.thresholds.grid)?;
                        out.write(&format!("{stem}_levshift.csv"), "levshift_curve", curve.to_csv().as_bytes())?;
                        write_poles(out, &stem, &report_poles(c), c.constant, Some(&region))?;
                    }
                    Command::Poles => write_poles(out, &stem, &report_poles(c), c.constant, Some(&region))?,
                    _ => {}
                }
            }
            if cmd == Command::Sweep {
                let classifications: Vec<_> = reports.iter().map(|r| r.as_ref().map(|x| x.classification.clone()).map_err(Clone::clone)).collect();
                let rows = labels.iter().zip(&classifications).map(|(l, r)| sweep_row(l, r));
                out.write(&format!("{prefix}_sweep.csv"), "sweep_table", csv(&SWEEP_HEADER, rows).as_bytes())?;
                let docs: Vec<_> = reports.iter().filter_map(|r| r.as_ref().ok()).collect();
                out.write_json(&format!("{prefix}_sweep.json"), "sweep_reports", &docs)?;
            }
            finish_rows(out, prefix, cmd, statuses)
        }
        Command::Spectrum => {
            let window = Window::new(s.theta_range[0], s.theta_range[1])?;
            let w0 = setup.cavity.transition_kev;
            let thetas = window.grid(s.rocking_grid);
            let rocking = thetas
                .par_iter()
                .map(|&t| Ok(vec![num(t), num(setup.cavity.problem(&table, t)?.reflectance(w0)?)]))
                .collect::<mmcert::Result<Vec<_>>>()?;
            out.write(&format!("{prefix}_rocking.csv"), "rocking_curve", csv(&["theta", "reflectance"], rocking).as_bytes())?;
            let minima = rocking_minima(&setup.cavity, &table, s.theta_range, s.rocking_grid)?;
            let mut statuses = Vec::new();
            for (&m, label) in s.modes.iter().zip(&labels) {
                let text = line_spectrum(&setup.cavity, &table, &minima, m, &s.detuning);
                statuses.push(row(label.clone(), &text));
                if let Ok(text) = text {
                    out.write(&format!("{prefix}_{label}_spectrum.csv"), "spectrum", text.as_bytes())?;
                }
            }
            finish_rows(out, prefix, cmd, statuses)
        }
        Command::PfmCheck => Err(not_applicable(cmd, "xray")),
    }
}

fn xray_region(setup: &mmcert::certify::XraySetup, ls: &LevelShift) -> mmcert::Result<ScanRegion> {
    let w0 = setup.cavity.transition_kev;
    ScanRegion::lower_half(w0 - setup.region_half_width_kev, w0 + setup.region_half_width_kev, setup.depth_kev)?
        .clear_of_cuts(&ls.branch_points(), w0 - setup.window_kev, w0 + setup.window_kev)
}

/// Weak-coupling nuclear line at a rocking minimum against detuning in units of `γ`.
fn line_spectrum(
    cavity: &mmcert::layered_medium::XrayCavity,
    table: &MaterialTable,
    minima: &[(f64, f64)],
    mode: usize,
    detuning: &Grid,
) -> std::result::Result<String, String> {
    let &(theta, _) = minima
        .get(mode.wrapping_sub(1))
        .ok_or_else(|| format!("rocking minimum {mode} not found ({} minima)", minima.len()))?;
    let ls = LevelShift::from_problem(cavity.problem(table, theta).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let line = nuclear_spectrum(&ls).map_err(|e| e.to_string())?;
    let gamma = ls.emitter.gamma;
    let nus = detuning.window().map_err(|e| e.to_string())?.grid(detuning.points);
    let rows = nus.iter().map(|&nu| {
        let r = line.reflection_at_detuning(nu, gamma);
        vec![num(nu), num(r.norm_sqr()), num(r.re), num(r.im)]
    });
    Ok(csv(&["detuning_gamma", "reflectance", "r_re", "r_im"], rows))
}

fn custom_stack(cmd: Command, s: &CustomStackScenario, out: &mut Outputs) -> Result<Status> {
    let problem = WaveProblem::new(s.stack.clone(), s.k_par)?;
    let ls = LevelShift::from_problem(problem.clone())?;
    let prefix = &s.output_prefix;
    let label = "stack".to_string();
    let input = ClassifyInput {
        search_window: s.search_window,
        analysis_width: s.analysis_width,
        region: s.region.clear_of_cuts(&ls.branch_points(), s.search_window.lo, s.search_window.hi)?,
    };
    match cmd {
        Command::Classify | Command::Poles | Command::Sweep => {
            let report = classify(&ls, &input, &s.thresholds).map_err(|e| e.to_string());
            let statuses = vec![row(label.clone(), &report)];
            let stem = format!("{prefix}_{label}");
            if let Ok(r) = &report {
                match cmd {
                    Command::Classify => {
                        out.write_json(&format!("{stem}_report.json"), "report", r)?;
                        let curve = levshift_curve(&ls, r.window, s.thresholds.grid)?;
                        out.write(&format!("{stem}_levshift.csv"), "levshift_curve", curve.to_csv().as_bytes())?;
                        write_poles(out, &stem, &report_poles(r), r.constant, Some(&input.region))?;
                    }
                    Command::Poles => write_poles(out, &stem, &report_poles(r), r.constant, Some(&input.region))?,
                    _ => {
                        let rows = [sweep_row(&label, &report)];
                        out.write(&format!("{prefix}_sweep.csv"), "sweep_table", csv(&SWEEP_HEADER, rows).as_bytes())?;
                    }
                }
            }
            finish_rows(out, prefix, cmd, statuses)
        }
        Command::Spectrum => {
            let text = spectrum_csv(&problem, &ls, &s.spectrum_grid())?;
            out.write(&format!("{prefix}_{label}_spectrum.csv"), "spectrum", text.as_bytes())?;
            Ok(Status::Complete)
        }
        Command::PfmCheck => Err(not_applicable(cmd, "custom_stack")),
    }
}

/// Model and test frequencies from the scenario and its seed.
fn pfm_model(s: &SyntheticPfmScenario) -> (PfmParams, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let params = match (&s.params, s.modes) {
        (Some(p), _) => p.clone(),
        (None, Some(n)) => PfmParams::random(&mut rng, n),
        (None, None) => unreachable!("validated scenario"),
    };
    let w = pfm_span(&params);
    let freqs = (0..s.frequencies).map(|_| rng.gen_range(w.lo..w.hi)).collect();
    (params, freqs)
}

/// One unit beyond the outermost mode frequencies.
fn pfm_span(p: &PfmParams) -> Window {
    let diag: Vec<f64> = (0..p.modes()).map(|i| p.omega[i][i]).collect();
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    Window { lo, hi }
}

#[derive(Serialize)]
struct PfmSample {
    omega: f64,
    resolvent: ComplexValue,
    pole_sum: ComplexValue,
    dense_inverse: ComplexValue,
}

#[derive(Serialize)]
struct PfmCheckReport<'a> {
    params: &'a PfmParams,
    seed: u64,
    poles: Vec<ComplexValue>,
    residues: Vec<ComplexValue>,
    condition: f64,
    tolerance: f64,
    /// Largest `|pole sum − resolvent| / max(1, |resolvent|)`.
    pole_sum_error: f64,
    /// Same against an explicit dense inverse.
    dense_inverse_error: f64,
    agree: bool,
    samples: Vec<PfmSample>,
}

fn dense_inverse(p: &PfmParams, omega: f64) -> Result<C64> {
    let h = p.effective_hamiltonian();
    let n = h.nrows();
    let a = DMatrix::<C64>::identity(n, n) * C64::new(omega, 0.0) - h;
    let inv = a.try_inverse().ok_or(mmcert::Error::Singular { omega })?;
    let g = DVector::from_column_slice(&p.g);
    Ok((g.adjoint() * inv * g)[(0, 0)])
}

fn synthetic_pfm(cmd: Command, s: &SyntheticPfmScenario, out: &mut Outputs) -> Result<Status> {
    let (params, freqs) = pfm_model(s);
    let prefix = &s.output_prefix;
    match cmd {
        Command::PfmCheck => {
            let d = diagonalize(&params)?;
            let mut samples = Vec::with_capacity(freqs.len());
            let (mut pole_err, mut dense_err) = (0.0f64, 0.0f64);
            for &w in &freqs {
                let direct = levshift_matrix(&params, w)?;
                let poles = d.levshift(w);
                let dense = dense_inverse(&params, w)?;
                let scale = direct.norm().max(1.0);
                pole_err = pole_err.max((poles - direct).norm() / scale);
                dense_err = dense_err.max((dense - direct).norm() / scale);
                samples.push(PfmSample { omega: w, resolvent: direct.into(), pole_sum: poles.into(), dense_inverse: dense.into() });
            }
            let agree = pole_err < s.tolerance && dense_err < s.tolerance;
            let report = PfmCheckReport {
                params: &params,
                seed: s.seed,
                poles: d.poles.iter().map(|&z| z.into()).collect(),
                residues: d.residues.iter().map(|&z| z.into()).collect(),
                condition: d.condition,
                tolerance: s.tolerance,
                pole_sum_error: pole_err,
                dense_inverse_error: dense_err,
                agree,
                samples,
            };
            out.write_json(&format!("{prefix}_check.json"), "report", &report)?;
            let rows = report.samples.iter().map(|x| {
                vec![
                    num(x.omega),
                    num(x.resolvent.re),
                    num(x.resolvent.im),
                    num(x.pole_sum.re),
                    num(x.pole_sum.im),
                    num(x.dense_inverse.re),
                    num(x.dense_inverse.im),
                ]
            });
            let header = ["omega", "resolvent_re", "resolvent_im", "pole_sum_re", "pole_sum_im", "dense_re", "dense_im"];
            out.write(&format!("{prefix}_check.csv"), "check_samples", csv(&header, rows).as_bytes())?;
            if agree {
                Ok(Status::Complete)
            } else {
                Err(CliError::Failed(format!(
                    "pole and resolvent forms disagree: {pole_err:.3e} / {dense_err:.3e} above {:.1e}",
                    s.tolerance
                )))
            }
        }
        Command::Poles => {
            let d = diagonalize(&params)?;
            let poles: Vec<(C64, C64)> = d.poles.iter().copied().zip(d.residues.iter().copied()).collect();
            write_poles(out, &format!("{prefix}_model"), &poles, C64::new(0.0, 0.0), None)?;
            Ok(Status::Complete)
        }
        Command::Spectrum => {
            let grid = s.spectrum.unwrap_or_else(|| {
                let w = pfm_span(&params);
                Grid { lo: w.lo, hi: w.hi, points: 2001 }
            });
            let omega = grid.window()?.grid(grid.points);
            let mut rows = Vec::with_capacity(omega.len());
            for &w in &omega {
                let d = levshift_matrix(&params, w)?;
                let mut cells = vec![num(w), num(d.re), num(d.im)];
                if params.kappa_r.is_some() {
                    let r = linear_reflection(&params, w)?;
                    cells.extend([num(r.norm_sqr()), num(r.re), num(r.im)]);
                }
                rows.push(cells);
            }
            let mut header = vec!["omega", "delta_re", "delta_im"];
            if params.kappa_r.is_some() {
                header.extend(["reflectance", "r_re", "r_im"]);
            }
            out.write(&format!("{prefix}_model_spectrum.csv"), "spectrum", csv(&header, rows).as_bytes())?;
            Ok(Status::Complete)
        }
        Command::Classify | Command::Sweep => Err(not_applicable(cmd, "synthetic_pfm")),
    }
}
