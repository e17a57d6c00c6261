use serde::{Deserialize, Serialize};

use super::Material;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub material: Material,
    pub thickness: f64,
}

impl Layer {
    pub fn new(material: Material, thickness: f64) -> Self {
        Self { material, thickness }
    }
}

/// A two-level emitter embedded in the stack.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSpec {
    /// Depth measured from the left cladding interface.
    pub position: f64,
    /// Bare transition frequency `ω_a`.
    pub frequency: f64,
    /// Free-space decay rate `γ`.
    pub gamma: f64,
}

/// Semi-infinite claddings around a finite list of layers.
///
/// The finite region spans `0 ≤ x ≤ D` with `D` the summed thickness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerStack {
    pub left: Material,
    pub layers: Vec<Layer>,
    pub right: Material,
    #[serde(default)]
    pub emitter: Option<EmitterSpec>,
}

impl LayerStack {
    pub fn new(left: Material, layers: Vec<Layer>, right: Material, emitter: Option<EmitterSpec>) -> Result<Self> {
        let stack = Self { left, layers, right, emitter };
        stack.validate()?;
        Ok(stack)
    }

    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.material.validate()?;
            if !(layer.thickness.is_finite() && layer.thickness > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "layer {i} ('{}') has non-positive thickness {}",
                    layer.material.name, layer.thickness
                )));
            }
        }
        if let Some(e) = &self.emitter {
            let d = self.total_thickness();
            if !(e.position.is_finite() && e.position >= 0.0 && e.position <= d) {
                return Err(Error::InvalidInput(format!(
                    "emitter position {} outside the finite stack [0, {d}]",
                    e.position
                )));
            }
            if !(e.frequency.is_finite() && e.frequency > 0.0) {
                return Err(Error::InvalidInput(format!("emitter frequency {} must be positive", e.frequency)));
            }
            if !(e.gamma.is_finite() && e.gamma > 0.0) {
                return Err(Error::InvalidInput(format!("emitter decay rate {} must be positive", e.gamma)));
            }
        }
        Ok(())
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Interface positions `0 = z_0 < z_1 < … < z_N = D`.
    pub fn interfaces(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.layers.len() + 1);
        let mut acc = 0.0;
        z.push(acc);
        for l in &self.layers {
            acc += l.thickness;
            z.push(acc);
        }
        z
    }

    /// Symmetric Fabry-Pérot resonator: two mirrors of index `n_mirror` and
    /// thickness `L/100` around a vacuum gap `L`, in vacuum. The emitter sits
    /// at the centre of the gap, tuned to the fundamental `ω = π/L`, with `γ = 1`.
    pub fn fabry_perot(length: f64, n_mirror: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!("cavity length {length} must be positive")));
        }
        if !(n_mirror.is_finite() && n_mirror >= 1.0) {
            return Err(Error::InvalidInput(format!("mirror index {n_mirror} must be at least 1")));
        }
        let d = length / 100.0;
        let mirror = Material::constant(format!("mirror n={n_mirror}"), n_mirror.into());
        let layers = vec![
            Layer::new(mirror.clone(), d),
            Layer::new(Material::vacuum(), length),
            Layer::new(mirror, d),
        ];
        let emitter = EmitterSpec { position: d + 0.5 * length, frequency: std::f64::consts::PI / length, gamma: 1.0 };
        Self::new(Material::vacuum(), layers, Material::vacuum(), Some(emitter))
    }

    pub fn with_emitter(mut self, emitter: EmitterSpec) -> Result<Self> {
        self.emitter = Some(emitter);
        self.validate()?;
        Ok(self)
    }
}
