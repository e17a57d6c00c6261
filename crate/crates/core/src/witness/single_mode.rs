use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Lorentzian level shift of one cavity mode: `|g|² / (ω − ω_c + iκ/2)`.
pub fn single_mode_levshift(g: C64, omega_c: f64, kappa: f64, omega: f64) -> C64 {
    g.norm_sqr() / (C64::new(omega - omega_c, 0.5 * kappa))
}

/// One damped mode probed in reflection through a port of strength `κ_R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleModeCavity {
    pub omega_c: f64,
    pub kappa: f64,
    pub kappa_r: f64,
    pub g: C64,
}

impl SingleModeCavity {
    pub fn new(omega_c: f64, kappa: f64, kappa_r: f64, g: C64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidInput(format!("decay rate {kappa} must be positive")));
        }
        if TAU * kappa_r * kappa_r > kappa * (1.0 + 1e-12) {
            return Err(Error::InvalidInput("port coupling exceeds the total decay rate".into()));
        }
        Ok(Self { omega_c, kappa, kappa_r, g })
    }

    fn denom(&self, omega: f64) -> C64 {
        C64::new(omega - self.omega_c, 0.5 * self.kappa)
    }

    /// Empty-cavity reflection `1 − 2πi κ_R² / (ω − ω_c + iκ/2)`.
    pub fn cavity_reflection(&self, omega: f64) -> C64 {
        1.0 - TAU * I * self.kappa_r * self.kappa_r / self.denom(omega)
    }

    pub fn levshift(&self, omega: f64) -> C64 {
        single_mode_levshift(self.g, self.omega_c, self.kappa, omega)
    }

    /// Exact linear reflection with an emitter at `omega_a`.
    pub fn reflection_with_emitter(&self, omega_a: f64, omega: f64) -> C64 {
        let d = self.denom(omega);
        let g2 = self.g.norm_sqr();
        if g2 == 0.0 {
            return self.cavity_reflection(omega);
        }
        let det = d * (omega - omega_a) - g2;
        1.0 - TAU * I * self.kappa_r * self.kappa_r * (omega - omega_a) / det
    }

    /// Weak-coupling form: the cavity background at `ω` plus a Lorentzian at
    /// `ω_a + Δ(ω_a)` of width `Γ(ω_a)` with the intra-cavity port strength
    /// frozen at `ω_a`.
    pub fn weak_coupling_reflection(&self, omega_a: f64, omega: f64) -> C64 {
        let da = self.denom(omega_a);
        let kri2 = self.kappa_r * self.kappa_r * self.g.norm_sqr() / (da * da);
        let shift = self.levshift(omega_a);
        self.cavity_reflection(omega) - TAU * I * kri2 / (omega - omega_a - shift)
    }
}
