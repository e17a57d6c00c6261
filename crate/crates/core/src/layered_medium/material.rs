use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Frequency dependence of a refractive index.
///
/// The index is stored as `n − 1` so that X-ray decrements of order 1e-6
/// keep full relative precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexModel {
    Constant {
        n_minus_one: C64,
    },
    /// `n(ω) − 1 = background + strength / (resonance − ω − i width/2)`.
    Lorentzian {
        background_minus_one: C64,
        resonance: f64,
        width: f64,
        strength: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub name: String,
    pub model: IndexModel,
}

impl Material {
    pub fn vacuum() -> Self {
        Self::constant("vacuum", C64::new(1.0, 0.0))
    }

    pub fn constant(name: impl Into<String>, n: C64) -> Self {
        Self { name: name.into(), model: IndexModel::Constant { n_minus_one: n - 1.0 } }
    }

    /// X-ray convention `n = 1 − δ + iβ`.
    pub fn from_delta_beta(name: impl Into<String>, delta: f64, beta: f64) -> Self {
        Self { name: name.into(), model: IndexModel::Constant { n_minus_one: C64::new(-delta, beta) } }
    }

    pub fn lorentzian(
        name: impl Into<String>,
        background: C64,
        resonance: f64,
        width: f64,
        strength: f64,
    ) -> Self {
        Self {
            name: name.into(),
            model: IndexModel::Lorentzian { background_minus_one: background - 1.0, resonance, width, strength },
        }
    }

    /// Rejects gain media and malformed parameters.
    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidInput(format!("material '{}': {why}", self.name)));
        match &self.model {
            IndexModel::Constant { n_minus_one } => {
                if !(n_minus_one.re.is_finite() && n_minus_one.im.is_finite()) {
                    return bad("index is not finite");
                }
                if n_minus_one.im < 0.0 {
                    return bad("negative imaginary index (gain)");
                }
            }
            IndexModel::Lorentzian { background_minus_one, resonance, width, strength } => {
                if !(background_minus_one.re.is_finite()
                    && background_minus_one.im.is_finite()
                    && resonance.is_finite()
                    && width.is_finite()
                    && strength.is_finite())
                {
                    return bad("parameters are not finite");
                }
                if background_minus_one.im < 0.0 || *strength < 0.0 {
                    return bad("negative absorption (gain)");
                }
                if *width <= 0.0 {
                    return bad("resonance width must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn n_minus_one(&self, omega: C64) -> C64 {
        match &self.model {
            IndexModel::Constant { n_minus_one } => *n_minus_one,
            IndexModel::Lorentzian { background_minus_one, resonance, width, strength } => {
                *background_minus_one + *strength / (C64::new(*resonance, -0.5 * width) - omega)
            }
        }
    }

    pub fn index(&self, omega: C64) -> C64 {
        1.0 + self.n_minus_one(omega)
    }

    /// `n² − 1`, computed without cancellation.
    pub fn susceptibility(&self, omega: C64) -> C64 {
        let m = self.n_minus_one(omega);
        m * (m + 2.0)
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self.model, IndexModel::Constant { n_minus_one } if n_minus_one == C64::new(0.0, 0.0))
    }
}
