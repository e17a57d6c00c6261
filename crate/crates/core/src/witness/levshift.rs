use serde::{Deserialize, Serialize};

use crate::layered_medium::{EmitterSpec, WaveProblem};
use crate::qnm::Meromorphic;
use crate::{Error, Result, C64};

/// Which vacuum Green's function divides the environment response.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `G_vac` at the same `ω`. Free space then gives `−iγ/2` at every
    /// frequency. At normal incidence this makes `δ̃ = γ ω G`, which is
    /// free of a spurious pole at `ω = 0`.
    LocalVacuum,
    /// `G_vac` frozen at the bare transition frequency. Needed off normal
    /// incidence, where `G_vac` has a branch point at `ω = k_par`.
    FrozenVacuum,
}

impl Normalization {
    pub fn default_for(problem: &WaveProblem) -> Self {
        if problem.k_par == 0.0 {
            Self::LocalVacuum
        } else {
            Self::FrozenVacuum
        }
    }
}

/// `δ̃(ω) = −(iγ/2) G(x_a, x_a, ω) / G_vac`, evaluated through the
/// outgoing solutions of the stack.
#[derive(Clone, Debug)]
pub struct LevelShift {
    pub problem: WaveProblem,
    pub emitter: EmitterSpec,
    pub normalization: Normalization,
}

fn vacuum_kz(k_par: f64, omega: C64) -> Result<C64> {
    if k_par == 0.0 {
        return Ok(omega);
    }
    let k2 = (omega - k_par) * (omega + k_par);
    if k2 == C64::new(0.0, 0.0) {
        return Err(Error::BranchPoint { omega });
    }
    let k = k2.sqrt();
    let k_ref = if omega.re.abs() >= k_par {
        C64::new(((omega.re - k_par) * (omega.re + k_par)).sqrt(), 0.0)
    } else {
        C64::new(0.0, ((k_par - omega.re) * (k_par + omega.re)).sqrt())
    };
    Ok(if (k - k_ref).norm() <= (k + k_ref).norm() { k } else { -k })
}

impl LevelShift {
    pub fn new(problem: WaveProblem, emitter: EmitterSpec) -> Result<Self> {
        let normalization = Normalization::default_for(&problem);
        Self::with_normalization(problem, emitter, normalization)
    }

    pub fn with_normalization(problem: WaveProblem, emitter: EmitterSpec, normalization: Normalization) -> Result<Self> {
        let d = problem.stack.total_thickness();
        if !(emitter.position >= 0.0 && emitter.position <= d) {
            return Err(Error::InvalidInput(format!(
                "emitter position {} outside the finite stack [0, {d}]",
                emitter.position
            )));
        }
        if !(emitter.gamma > 0.0 && emitter.frequency > 0.0) {
            return Err(Error::InvalidInput("emitter needs positive gamma and frequency".into()));
        }
        if normalization == Normalization::FrozenVacuum && emitter.frequency <= problem.k_par {
            return Err(Error::InvalidInput("transition frequency below the light line".into()));
        }
        Ok(Self { problem, emitter, normalization })
    }

    /// Builds from a stack that carries its own emitter.
    pub fn from_problem(problem: WaveProblem) -> Result<Self> {
        let emitter = problem
            .stack
            .emitter
            .ok_or_else(|| Error::InvalidInput("stack has no emitter".into()))?;
        Self::new(problem, emitter)
    }

    /// `−(iγ/2) / G_vac = γ k_vac`.
    pub fn prefactor(&self, omega: C64) -> Result<C64> {
        let k = match self.normalization {
            Normalization::LocalVacuum => vacuum_kz(self.problem.k_par, omega)?,
            Normalization::FrozenVacuum => vacuum_kz(self.problem.k_par, self.emitter.frequency.into())?,
        };
        Ok(self.emitter.gamma * k)
    }

    pub fn eval(&self, omega: C64) -> Result<C64> {
        let parts = self.problem.green_parts(self.emitter.position, omega)?;
        Ok(self.prefactor(omega)? * parts.green())
    }

    /// Free-space value `−iγ/2`, the high-frequency limit of `δ̃`.
    pub fn vacuum_value(&self) -> C64 {
        C64::new(0.0, -0.5 * self.emitter.gamma)
    }
}

impl Meromorphic for LevelShift {
    fn value(&self, z: C64) -> Result<C64> {
        self.eval(z)
    }

    /// Forms `1/δ̃ = W / (N u_L u_R)` directly so that it stays finite at poles.
    fn value_and_reciprocal(&self, z: C64) -> Result<(C64, C64)> {
        let x = self.emitter.position;
        let l = self.problem.left_solution(x, z)?;
        let r = self.problem.right_solution(x, z)?;
        let w = l.value * r.slope - l.slope * r.value;
        let num = self.prefactor(z)? * l.value * r.value;
        Ok((num / w, w / num))
    }

    fn branch_points(&self) -> Vec<C64> {
        self.problem.branch_points()
    }
}

/// Exact complex level shift of the emitter at frequency `omega`.
pub fn levshift_exact(problem: &WaveProblem, emitter: &EmitterSpec, omega: C64) -> Result<C64> {
    LevelShift::new(problem.clone(), *emitter)?.eval(omega)
}
