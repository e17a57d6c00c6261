//! Versioned optical-constant tables and the X-ray thin-film cavity builder.
//!
//! X-ray work uses keV for frequencies (with `ħ = c = 1`), which makes the
//! natural length unit `ħc / keV`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EmitterSpec, Layer, LayerStack, Material, WaveProblem};
use crate::{Error, Result};

/// `ħc` in nm·keV.
pub const HBAR_C_NM_KEV: f64 = 0.197_326_980_4;

pub const MATERIAL_TABLE_VERSION: u32 = 1;

const BUNDLED_TABLE: &str = include_str!("../../data/materials_14.4125keV.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialEntry {
    pub delta: f64,
    pub beta: f64,
    #[serde(default)]
    pub density_g_cm3: Option<f64>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialTable {
    pub version: u32,
    pub energy_kev: f64,
    pub source: String,
    pub materials: BTreeMap<String, MaterialEntry>,
}

impl MaterialTable {
    pub fn from_json(text: &str) -> Result<Self> {
        let table: Self = serde_json::from_str(text).map_err(|e| Error::MaterialTable(e.to_string()))?;
        if table.version != MATERIAL_TABLE_VERSION {
            return Err(Error::MaterialTable(format!(
                "unsupported table version {} (expected {MATERIAL_TABLE_VERSION})",
                table.version
            )));
        }
        for (name, m) in &table.materials {
            if !(m.delta.is_finite() && m.beta.is_finite() && m.beta >= 0.0) {
                return Err(Error::MaterialTable(format!("entry '{name}' has invalid constants")));
            }
        }
        Ok(table)
    }

    /// Table shipped with the crate, valid at the 14.4125 keV Mössbauer line.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_TABLE).expect("bundled material table is valid")
    }

    pub fn material(&self, name: &str) -> Result<Material> {
        if name == "vacuum" {
            return Ok(Material::vacuum());
        }
        let e = self
            .materials
            .get(name)
            .ok_or_else(|| Error::MaterialTable(format!("unknown material '{name}'")))?;
        Ok(Material::from_delta_beta(name, e.delta, e.beta))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XrayLayer {
    pub material: String,
    pub thickness_nm: f64,
}

/// Grazing-incidence thin-film cavity with a resonant nuclear layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XrayCavity {
    #[serde(default = "XrayCavity::default_ambient")]
    pub ambient: String,
    pub layers: Vec<XrayLayer>,
    pub substrate: String,
    /// Index into `layers` of the layer holding the resonant nuclei; the
    /// emitter sits at its centre.
    pub resonant_layer: usize,
    #[serde(default = "XrayCavity::default_transition")]
    pub transition_kev: f64,
}

impl XrayCavity {
    fn default_ambient() -> String {
        "vacuum".into()
    }

    fn default_transition() -> f64 {
        14.4125
    }

    /// Two-ensemble cavity: Pt/C/Fe/C/Fe/⁵⁷Fe/Fe/C/Pt on Si, 57 nm in total,
    /// with the ⁵⁷Fe layer 18.5 nm below the surface.
    pub fn two_ensemble() -> Self {
        let l = |m: &str, t: f64| XrayLayer { material: m.into(), thickness_nm: t };
        Self {
            ambient: Self::default_ambient(),
            layers: vec![
                l("Pt", 3.0),
                l("C", 3.5),
                l("Fe", 3.0),
                l("C", 7.5),
                l("Fe", 1.0),
                l("57Fe", 1.0),
                l("Fe", 1.0),
                l("C", 27.0),
                l("Pt", 10.0),
            ],
            substrate: "Si".into(),
            resonant_layer: 5,
            transition_kev: Self::default_transition(),
        }
    }

    /// Single resonant layer centred in a carbon guiding layer between Pt mirrors.
    pub fn single_layer() -> Self {
        let l = |m: &str, t: f64| XrayLayer { material: m.into(), thickness_nm: t };
        Self {
            ambient: Self::default_ambient(),
            layers: vec![l("Pt", 2.0), l("C", 9.5), l("57Fe", 1.0), l("C", 9.5), l("Pt", 15.0)],
            substrate: "Si".into(),
            resonant_layer: 2,
            transition_kev: Self::default_transition(),
        }
    }

    pub fn emitter_depth_nm(&self) -> Result<f64> {
        if self.resonant_layer >= self.layers.len() {
            return Err(Error::InvalidInput(format!(
                "resonant layer index {} out of range ({} layers)",
                self.resonant_layer,
                self.layers.len()
            )));
        }
        let above: f64 = self.layers[..self.resonant_layer].iter().map(|l| l.thickness_nm).sum();
        Ok(above + 0.5 * self.layers[self.resonant_layer].thickness_nm)
    }

    /// Stack in internal units with the emitter at the resonant-layer centre
    /// and `γ = 1`.
    pub fn stack(&self, table: &MaterialTable) -> Result<LayerStack> {
        let layers = self
            .layers
            .iter()
            .map(|l| Ok(Layer::new(table.material(&l.material)?, l.thickness_nm / HBAR_C_NM_KEV)))
            .collect::<Result<Vec<_>>>()?;
        let emitter = EmitterSpec {
            position: self.emitter_depth_nm()? / HBAR_C_NM_KEV,
            frequency: self.transition_kev,
            gamma: 1.0,
        };
        LayerStack::new(table.material(&self.ambient)?, layers, table.material(&self.substrate)?, Some(emitter))
    }

    /// Wave problem at grazing angle `theta` (radians) for the transition energy.
    pub fn problem(&self, table: &MaterialTable, theta: f64) -> Result<WaveProblem> {
        if !(theta.is_finite() && theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidInput(format!("grazing angle {theta} rad out of range")));
        }
        WaveProblem::new(self.stack(table)?, self.transition_kev * theta.cos())
    }
}
