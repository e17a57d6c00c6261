use serde::{Deserialize, Serialize};

use super::{compute_residue, find_poles, Meromorphic, ScanRegion};
use crate::witness::LevelShiftCurve;
use crate::{Error, Result, Window, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub omega: C64,
    pub residue: C64,
    pub residue_error: f64,
}

impl Pole {
    pub fn term(&self, omega: f64) -> C64 {
        self.residue / (omega - self.omega)
    }

    /// `κ̃ = −2 Im ω̃`.
    pub fn kappa(&self) -> f64 {
        -2.0 * self.omega.im
    }

    pub fn residue_phase(&self) -> f64 {
        self.residue.arg()
    }
}

/// How poles are grouped when counting a truncation order `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Counting {
    /// A pole with `Re ω̃ ≥ 0` is counted together with its mirror `−ω̃*`.
    MirrorPairs,
    /// Every pole counts on its own.
    Individual,
}

/// `f(ω) ≈ Σ r_i/(ω − ω̃_i) + c` over the poles of a search region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleExpansion {
    pub poles: Vec<Pole>,
    pub constant: C64,
    /// `|c|` at most 1% of `max |f|` over the window.
    pub constant_vanishing: bool,
    pub window: Window,
    /// `max |f|` over the window.
    pub scale: f64,
    /// Pole indices grouped and ranked by distance of `Re ω̃` from `center`.
    pub groups: Vec<Vec<usize>>,
    pub center: f64,
    pub counting: Counting,
}

const WINDOW_SAMPLES: usize = 2001;
const RESIDUE_POINTS: usize = 64;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl PoleExpansion {
    pub fn pole_sum(&self, omega: f64) -> C64 {
        self.poles.iter().map(|p| p.term(omega)).sum()
    }

    /// Full expansion including the constant term.
    pub fn eval(&self, omega: f64) -> C64 {
        self.pole_sum(omega) + self.constant
    }

    pub fn rank(&mut self, center: f64, counting: Counting) {
        let tol = 1e-7 * self.window.width().max(1e-300);
        let mut used = vec![false; self.poles.len()];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut order: Vec<usize> = (0..self.poles.len()).collect();
        // Non-negative real parts first so that they lead their pair.
        order.sort_by(|&a, &b| (self.poles[a].omega.re < 0.0).cmp(&(self.poles[b].omega.re < 0.0)).then(a.cmp(&b)));
        for &i in &order {
            if used[i] {
                continue;
            }
            used[i] = true;
            let mut group = vec![i];
            let p = self.poles[i].omega;
            if counting == Counting::MirrorPairs && p.re >= 0.0 {
                let mirror = -p.conj();
                let partner = (0..self.poles.len())
                    .filter(|&j| !used[j] && (self.poles[j].omega - mirror).norm() < tol.max(1e-9 * p.norm()))
                    .min_by(|&a, &b| (self.poles[a].omega - mirror).norm().total_cmp(&(self.poles[b].omega - mirror).norm()));
                if let Some(j) = partner {
                    used[j] = true;
                    group.push(j);
                }
            }
            groups.push(group);
        }
        let key = |g: &Vec<usize>| (self.poles[g[0]].omega.re - center).abs();
        groups.sort_by(|a, b| {
            key(a)
                .total_cmp(&key(b))
                .then(self.poles[b[0]].residue.norm().total_cmp(&self.poles[a[0]].residue.norm()))
        });
        self.groups = groups;
        self.center = center;
        self.counting = counting;
    }
}

/// Finds the poles of `f` in `region`, computes their residues and estimates
/// the constant term over the real `window`.
pub fn build_expansion<M: Meromorphic + ?Sized>(f: &M, region: &ScanRegion, window: Window) -> Result<PoleExpansion> {
    let search = find_poles(f, region)?;
    let locs: Vec<C64> = search.poles.iter().map(|p| p.omega).collect();
    let mut poles = Vec::with_capacity(locs.len());
    for (i, &p) in locs.iter().enumerate() {
        let nearest = locs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| (q - p).norm())
            .fold(f64::INFINITY, f64::min);
        let to_edge = (p.re - region.re_min)
            .min(region.re_max - p.re)
            .min(p.im - region.im_min)
            .min(region.im_max - p.im);
        let radius = (0.3 * nearest).min(0.5 * to_edge.max(0.0)).min(0.1 * region.diagonal());
        let radius = if radius > 0.0 { radius } else { 1e-6 * region.diagonal() };
        let mut m = RESIDUE_POINTS;
        loop {
            let (r, err) = compute_residue(f, p, radius, m)?;
            if err <= 1e-9 * r.norm() + 1e-14 * radius * f.value(p + radius)?.norm() {
                poles.push(Pole { omega: p, residue: r, residue_error: err });
                break;
            }
            if m >= 8192 {
                return Err(Error::Accuracy(format!(
                    "residue at {p} did not converge (estimate {r}, error {err:.2e})"
                )));
            }
            m *= 2;
        }
    }
    let grid = window.grid(WINDOW_SAMPLES);
    let exact: Vec<C64> = grid.iter().map(|&w| f.value(w.into())).collect::<Result<_>>()?;
    let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (lo, hi) = (WINDOW_SAMPLES / 4, WINDOW_SAMPLES - WINDOW_SAMPLES / 4);
    let rest: Vec<C64> = (lo..hi)
        .map(|i| exact[i] - poles.iter().map(|p: &Pole| p.term(grid[i])).sum::<C64>())
        .collect();
    let constant = C64::new(median(rest.iter().map(|v| v.re).collect()), median(rest.iter().map(|v| v.im).collect()));
    let mut expansion = PoleExpansion {
        poles,
        constant,
        constant_vanishing: constant.norm() <= 0.01 * scale,
        window,
        scale,
        groups: vec![],
        center: window.center(),
        counting: Counting::MirrorPairs,
    };
    expansion.rank(window.center(), Counting::MirrorPairs);
    Ok(expansion)
}

/// Sum over the `n` leading pole groups, plus the constant when it is not
/// negligible.
pub fn evaluate_truncated(expansion: &PoleExpansion, n: usize, omega: f64) -> Result<C64> {
    if n > expansion.groups.len() {
        return Err(Error::InvalidInput(format!(
            "truncation order {n} exceeds the {} available pole groups",
            expansion.groups.len()
        )));
    }
    let mut acc: C64 = expansion.groups[..n]
        .iter()
        .flat_map(|g| g.iter())
        .map(|&i| expansion.poles[i].term(omega))
        .sum();
    if !expansion.constant_vanishing {
        acc += expansion.constant;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `errors[n - 1]` is the relative sup-norm error with `n` groups.
    pub errors: Vec<f64>,
    pub n_star: usize,
    pub tolerance: f64,
}

/// Smallest truncation whose sup-norm error against `exact`, relative to
/// `max |exact|`, is below `tolerance`.
pub fn convergence_report(expansion: &PoleExpansion, exact: &LevelShiftCurve, tolerance: f64) -> Result<ConvergenceReport> {
    let mut errors = Vec::with_capacity(expansion.groups.len());
    let mut n_star = None;
    for n in 1..=expansion.groups.len() {
        let approx: Vec<C64> =
            exact.omega.iter().map(|&w| evaluate_truncated(expansion, n, w)).collect::<Result<_>>()?;
        let e = exact.relative_sup_error(&approx);
        errors.push(e);
        if e < tolerance && n_star.is_none() {
            n_star = Some(n);
        }
    }
    match n_star {
        Some(n_star) => Ok(ConvergenceReport { errors, n_star, tolerance }),
        None => Err(Error::RegionTooSmall {
            tolerance,
            best_error: errors.iter().copied().fold(f64::INFINITY, f64::min),
            poles: expansion.groups.len(),
        }),
    }
}
