use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::PfmParams;
use crate::{Error, Result, C64};

/// Eigenvector condition numbers above this are treated as an exceptional point.
pub const CONDITION_LIMIT: f64 = 1e10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagonalization {
    /// Complex eigenfrequencies `ω̃_i`, sorted by real part.
    pub poles: Vec<C64>,
    /// `r_i = ḡ_i g̃_i`.
    pub residues: Vec<C64>,
    /// `g̃ = X⁻¹ g` with `X` the right eigenvectors.
    pub g_tilde: Vec<C64>,
    /// `ḡ = (g† X)ᵀ`.
    pub g_bar: Vec<C64>,
    /// Unit-norm right eigenvectors, one per pole, same order.
    pub eigenvectors: Vec<Vec<C64>>,
    /// 2-norm condition number of the eigenvector matrix.
    pub condition: f64,
}

impl Diagonalization {
    pub fn levshift(&self, omega: f64) -> C64 {
        self.poles.iter().zip(&self.residues).map(|(p, r)| r / (omega - p)).sum()
    }
}

fn condition_number(x: &DMatrix<C64>) -> f64 {
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Right eigenvectors of `H̃` from its complex Schur form `Q T Q*`.
fn eigen(h: &DMatrix<C64>) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let n = h.nrows();
    let schur = h
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or_else(|| Error::Accuracy("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let scale = t.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - t[(k, k)];
            if d.norm() < 1e-15 * scale {
                d = C64::new(1e-15 * scale, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut x = q * y;
    for mut col in x.column_iter_mut() {
        let norm = col.norm();
        col /= C64::new(norm, 0.0);
    }
    Ok(((0..n).map(|i| t[(i, i)]).collect(), x))
}

/// Diagonalises `H̃` and returns the pole expansion of `g† (ω − H̃)⁻¹ g`.
pub fn diagonalize(params: &PfmParams) -> Result<Diagonalization> {
    params.validate()?;
    let (vals, x) = eigen(&params.effective_hamiltonian())?;
    let condition = condition_number(&x);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::NearExceptionalPoint { condition });
    }
    let xinv = x.clone().try_inverse().ok_or(Error::NearExceptionalPoint { condition: f64::INFINITY })?;
    let g = params.coupling();
    let left = x.adjoint() * &g;
    let left: DVector<C64> = left.map(|v| v.conj());
    let right = xinv * &g;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re).then(vals[a].im.total_cmp(&vals[b].im)));
    Ok(Diagonalization {
        poles: order.iter().map(|&i| vals[i]).collect(),
        residues: order.iter().map(|&i| left[i] * right[i]).collect(),
        g_tilde: order.iter().map(|&i| right[i]).collect(),
        g_bar: order.iter().map(|&i| left[i]).collect(),
        eigenvectors: order.iter().map(|&i| x.column(i).iter().copied().collect()).collect(),
        condition,
    })
}

/// Diagonal few-mode model reproducing a pole expansion with real residues:
/// `ω_ii = Re ω̃_i`, `κ_i = −2 Im ω̃_i`, `g_i = √r_i`.
pub fn from_real_poles(poles: &[C64], residues: &[C64], tolerance: f64) -> Result<PfmParams> {
    if poles.len() != residues.len() || poles.is_empty() {
        return Err(Error::InvalidInput("need matching, non-empty pole and residue lists".into()));
    }
    let n = poles.len();
    let mut omega = vec![vec![0.0; n]; n];
    let mut kappa = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for (i, (p, r)) in poles.iter().zip(residues).enumerate() {
        if r.im.abs() > tolerance * r.norm() {
            return Err(Error::ComplexResidue { index: i, residue: *r });
        }
        if r.re <= 0.0 {
            return Err(Error::InvalidInput(format!("residue {i} = {r} has no real square root")));
        }
        if p.im >= 0.0 {
            return Err(Error::InvalidInput(format!("pole {i} = {p} is not in the lower half-plane")));
        }
        omega[i][i] = p.re;
        kappa.push(-2.0 * p.im);
        g.push(C64::new(r.re.sqrt(), 0.0));
    }
    PfmParams::new(omega, kappa, g, None, 0.0)
}
