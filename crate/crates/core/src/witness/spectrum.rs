use serde::{Deserialize, Serialize};

use super::LevelShift;
use crate::{Result, C64};

/// Weak-coupling resonant line on the stack's reflection background.
///
/// With the environment factors frozen at `ω_a`,
/// `r(ω) = r_cav(ω_a) + A / (ω − ω_a − δ̃(ω_a))`, where
/// `A = N t u_R(x_a)² / W` follows from treating the emitter as a
/// polarizable sheet at `x_a` and `N = −(iγ/2)/G_vac`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuclearLine {
    pub background: C64,
    pub amplitude: C64,
    pub shift: C64,
    pub omega_a: f64,
}

impl NuclearLine {
    pub fn reflection(&self, omega: f64) -> C64 {
        self.background + self.amplitude / (omega - self.omega_a - self.shift)
    }

    /// Reflection at detuning `nu = (ω − ω_a)/γ`.
    pub fn reflection_at_detuning(&self, nu: f64, gamma: f64) -> C64 {
        self.reflection(self.omega_a + nu * gamma)
    }
}

pub fn nuclear_spectrum(ls: &LevelShift) -> Result<NuclearLine> {
    let wa = C64::new(ls.emitter.frequency, 0.0);
    let parts = ls.problem.green_parts(ls.emitter.position, wa)?;
    let t = ls.problem.transmission(wa)?;
    let n = ls.prefactor(wa)?;
    Ok(NuclearLine {
        background: ls.problem.reflection(wa)?,
        amplitude: n * t * parts.right.value * parts.right.value / parts.wronskian,
        shift: n * parts.green(),
        omega_a: ls.emitter.frequency,
    })
}
