//! Few-mode model: `N` coupled lossy modes, an emitter, and one probe port.
//!
//! The effective mode matrix is `H̃ = ω − iκ/2` with a real symmetric
//! frequency matrix `ω` and diagonal decay rates `κ`. Diagonalising `H̃`
//! turns the resolvent form of the level shift into a sum over complex poles.

mod diag;

pub use diag::{diagonalize, from_real_poles, Diagonalization, CONDITION_LIMIT};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfmParams {
    /// Real symmetric mode-frequency matrix, row major.
    #[serde(rename = "omega_matrix")]
    pub omega: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
    #[serde(with = "crate::serde_complex::vec")]
    pub g: Vec<C64>,
    /// Port couplings `κ_R,i`; required only for reflection.
    #[serde(default, rename = "kappa_R", skip_serializing_if = "Option::is_none")]
    pub kappa_r: Option<Vec<f64>>,
    #[serde(default)]
    pub omega_a: f64,
}

impl PfmParams {
    pub fn new(omega: Vec<Vec<f64>>, kappa: Vec<f64>, g: Vec<C64>, kappa_r: Option<Vec<f64>>, omega_a: f64) -> Result<Self> {
        let p = Self { omega, kappa, g, kappa_r, omega_a };
        p.validate()?;
        Ok(p)
    }

    pub fn modes(&self) -> usize {
        self.kappa.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.kappa.len();
        let bad = |m: String| Err(Error::InvalidInput(m));
        if n == 0 {
            return bad("at least one mode is required".into());
        }
        if self.omega.len() != n || self.omega.iter().any(|r| r.len() != n) || self.g.len() != n {
            return bad(format!("inconsistent sizes for {n} modes"));
        }
        let scale = self.omega.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for i in 0..n {
            for j in 0..i {
                if (self.omega[i][j] - self.omega[j][i]).abs() > 1e-12 * scale {
                    return bad(format!("frequency matrix is not symmetric at ({i}, {j})"));
                }
            }
            if !(self.kappa[i].is_finite() && self.kappa[i] > 0.0) {
                return bad(format!("decay rate {} of mode {i} must be positive", self.kappa[i]));
            }
        }
        if let Some(kr) = &self.kappa_r {
            if kr.len() != n {
                return bad("port coupling vector has the wrong length".into());
            }
            for (i, (&r, &k)) in kr.iter().zip(&self.kappa).enumerate() {
                if TAU * r * r > k * (1.0 + 1e-12) {
                    return bad(format!("port coupling of mode {i} exceeds its decay rate"));
                }
            }
        }
        Ok(())
    }

    /// `H̃ = ω − iκ/2`, with `ω` symmetrised.
    pub fn effective_hamiltonian(&self) -> DMatrix<C64> {
        let n = self.modes();
        DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { -0.5 * self.kappa[i] } else { 0.0 };
            C64::new(0.5 * (self.omega[i][j] + self.omega[j][i]), d)
        })
    }

    pub fn coupling(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.g)
    }

    /// Random model with `n` modes spread over `[1, 1 + n]`, weak symmetric
    /// mode mixing, and ports that satisfy `2π κ_R² ≤ κ`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let mut omega = vec![vec![0.0; n]; n];
        for i in 0..n {
            omega[i][i] = 1.0 + i as f64 + rng.gen_range(-0.3..0.3);
            for j in 0..i {
                let v = rng.gen_range(-0.2..0.2);
                omega[i][j] = v;
                omega[j][i] = v;
            }
        }
        let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.8)).collect();
        let g = (0..n).map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
        let kappa_r = kappa.iter().map(|k| (k * rng.gen_range(0.1..1.0) / TAU).sqrt()).collect();
        let omega_a = rng.gen_range(1.0..(n as f64 + 1.0));
        Self { omega, kappa, g, kappa_r: Some(kappa_r), omega_a }
    }
}

/// `δ(ω) = g† (ω − H̃)⁻¹ g`, by a linear solve.
pub fn levshift_matrix(params: &PfmParams, omega: f64) -> Result<C64> {
    let n = params.modes();
    let a = DMatrix::<C64>::identity(n, n) * C64::new(omega, 0.0) - params.effective_hamiltonian();
    let g = params.coupling();
    let x = a.lu().solve(&g).ok_or(Error::Singular { omega })?;
    let d = g.dotc(&x);
    if !(d.re.is_finite() && d.im.is_finite()) {
        return Err(Error::Singular { omega });
    }
    Ok(d)
}

/// Reflection with the emitter treated in linear response:
/// `r = 1 − i κ_Rᵀ a`, where modes `a` and emitter amplitude `s` solve
/// `(ω − H̃) a − g s = 2π κ_R` and `(ω − ω_a) s = g† a`.
pub fn linear_reflection(params: &PfmParams, omega: f64) -> Result<C64> {
    let kr = params
        .kappa_r
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("reflection needs port couplings".into()))?;
    let n = params.modes();
    let h = params.effective_hamiltonian();
    // A decoupled emitter drops out; keeping its row would be singular at `ω_a`.
    let size = if params.g.iter().all(|g| g.norm_sqr() == 0.0) { n } else { n + 1 };
    let mut m = DMatrix::<C64>::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = -h[(i, j)];
        }
        m[(i, i)] += omega;
        if size > n {
            m[(i, n)] = -params.g[i];
            m[(n, i)] = -params.g[i].conj();
        }
    }
    if size > n {
        m[(n, n)] = C64::new(omega - params.omega_a, 0.0);
    }
    let mut rhs = DVector::<C64>::zeros(size);
    for i in 0..n {
        rhs[i] = C64::new(TAU * kr[i], 0.0);
    }
    let x = m.lu().solve(&rhs).ok_or(Error::Singular { omega })?;
    let mut r = C64::new(1.0, 0.0);
    for i in 0..n {
        r -= I * kr[i] * x[i];
    }
    Ok(r)
}
