//! Scenario files: strict JSON with a schema version and a `kind` tag.

use std::path::{Path, PathBuf};

use mmcert::certify::{FabryPerotSetup, Thresholds, XraySetup};
use mmcert::layered_medium::{LayerStack, MaterialTable, XrayCavity};
use mmcert::pfm::PfmParams;
use mmcert::qnm::ScanRegion;
use mmcert::Window;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const SCENARIO_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    FabryPerot,
    Xray,
    CustomStack,
    SyntheticPfm,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Scenario {
    FabryPerot(FabryPerotScenario),
    Xray(XrayScenario),
    CustomStack(CustomStackScenario),
    SyntheticPfm(SyntheticPfmScenario),
}

/// Uniform real grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn window(&self) -> mmcert::Result<Window> {
        Window::new(self.lo, self.hi)
    }

    fn validate(&self, pointer: &str) -> Result<()> {
        self.window().map_err(|e| CliError::schema(pointer, e.to_string()))?;
        if self.points < 2 {
            return Err(CliError::schema(format!("{pointer}/points"), "need at least two points"));
        }
        Ok(())
    }
}

/// One mirror index or a list of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MirrorIndices {
    One(f64),
    Many(Vec<f64>),
}

impl MirrorIndices {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::One(n) => vec![*n],
            Self::Many(v) => v.clone(),
        }
    }
}

/// Fabry-Pérot gap between two thin high-index mirrors. Frequencies are in
/// units of `πc/L`, so mode `m` sits near `ω = m`; `L` only sets
/// `frequency_unit = πc/L` in the reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FabryPerotScenario {
    pub version: u64,
    pub kind: Kind,
    #[serde(rename = "L")]
    pub length: f64,
    pub n_mirror: MirrorIndices,
    #[serde(default = "FabryPerotScenario::default_mode")]
    pub mode: usize,
    #[serde(default = "FabryPerotScenario::default_half_width")]
    pub region_half_width: f64,
    #[serde(default = "FabryPerotScenario::default_depth")]
    pub depth: f64,
    #[serde(default = "FabryPerotScenario::default_analysis_width")]
    pub analysis_width: f64,
    #[serde(default = "FabryPerotScenario::default_spectrum")]
    pub spectrum: Grid,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "FabryPerotScenario::default_prefix")]
    pub output_prefix: String,
}

impl FabryPerotScenario {
    fn default_mode() -> usize {
        1
    }
    fn default_half_width() -> f64 {
        FabryPerotSetup::new(1.0).region_half_width
    }
    fn default_depth() -> f64 {
        FabryPerotSetup::new(1.0).depth
    }
    fn default_analysis_width() -> f64 {
        FabryPerotSetup::new(1.0).analysis_width
    }
    fn default_spectrum() -> Grid {
        Grid { lo: 0.5, hi: 4.5, points: 4001 }
    }
    fn default_prefix() -> String {
        "fabry_perot".into()
    }

    pub fn setups(&self) -> Vec<FabryPerotSetup> {
        self.n_mirror
            .values()
            .into_iter()
            .map(|n| FabryPerotSetup {
                n_mirror: n,
                mode: self.mode,
                region_half_width: self.region_half_width,
                depth: self.depth,
                analysis_width: self.analysis_width,
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(CliError::schema("/L", "gap length must be positive"));
        }
        let values = self.n_mirror.values();
        if values.is_empty() {
            return Err(CliError::schema("/n_mirror", "needs at least one mirror index"));
        }
        for (i, n) in values.iter().enumerate() {
            if !(*n >= 1.0 && n.is_finite()) {
                let pointer = match self.n_mirror {
                    MirrorIndices::One(_) => "/n_mirror".to_string(),
                    MirrorIndices::Many(_) => format!("/n_mirror/{i}"),
                };
                return Err(CliError::schema(pointer, format!("mirror index {n} must be at least 1")));
            }
        }
        if self.mode == 0 {
            return Err(CliError::schema("/mode", "mode index starts at 1"));
        }
        self.spectrum.validate("/spectrum")?;
        self.thresholds.validate().map_err(|e| CliError::schema("/thresholds", e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CavityPreset {
    TwoEnsemble,
    SingleLayer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CavityChoice {
    Preset(CavityPreset),
    Custom(XrayCavity),
}

impl CavityChoice {
    pub fn cavity(&self) -> XrayCavity {
        match self {
            Self::Preset(CavityPreset::TwoEnsemble) => XrayCavity::two_ensemble(),
            Self::Preset(CavityPreset::SingleLayer) => XrayCavity::single_layer(),
            Self::Custom(c) => c.clone(),
        }
    }
}

/// Grazing-incidence X-ray cavity. Energies in keV, angles in rad.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XrayScenario {
    pub version: u64,
    pub kind: Kind,
    #[serde(default = "XrayScenario::default_cavity")]
    pub cavity: CavityChoice,
    /// Material table file, relative to the scenario file; the bundled table by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material_table: Option<PathBuf>,
    /// Rocking-curve minima to classify, counted from low angle.
    #[serde(default = "XrayScenario::default_modes")]
    pub modes: Vec<usize>,
    #[serde(default = "XrayScenario::default_theta_range")]
    pub theta_range: [f64; 2],
    #[serde(default = "XrayScenario::default_rocking_grid")]
    pub rocking_grid: usize,
    #[serde(default = "XrayScenario::default_window")]
    pub window_kev: f64,
    #[serde(default = "XrayScenario::default_half_width")]
    pub region_half_width_kev: f64,
    #[serde(default = "XrayScenario::default_depth")]
    pub depth_kev: f64,
    /// Energy spectrum around the transition, in units of `γ` of detuning.
    #[serde(default = "XrayScenario::default_detuning")]
    pub detuning: Grid,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "XrayScenario::default_prefix")]
    pub output_prefix: String,
}

impl XrayScenario {
    fn defaults() -> XraySetup {
        XraySetup::new(XrayCavity::two_ensemble())
    }
    fn default_cavity() -> CavityChoice {
        CavityChoice::Preset(CavityPreset::TwoEnsemble)
    }
    fn default_modes() -> Vec<usize> {
        vec![4, 6]
    }
    fn default_theta_range() -> [f64; 2] {
        Self::defaults().theta_range
    }
    fn default_rocking_grid() -> usize {
        Self::defaults().rocking_grid
    }
    fn default_window() -> f64 {
        Self::defaults().window_kev
    }
    fn default_half_width() -> f64 {
        Self::defaults().region_half_width_kev
    }
    fn default_depth() -> f64 {
        Self::defaults().depth_kev
    }
    fn default_detuning() -> Grid {
        Grid { lo: -40.0, hi: 40.0, points: 2001 }
    }
    fn default_prefix() -> String {
        "xray".into()
    }

    pub fn setup(&self) -> XraySetup {
        XraySetup {
            cavity: self.cavity.cavity(),
            theta_range: self.theta_range,
            rocking_grid: self.rocking_grid,
            window_kev: self.window_kev,
            region_half_width_kev: self.region_half_width_kev,
            depth_kev: self.depth_kev,
        }
    }

    pub fn table(&self, base: &Path) -> Result<MaterialTable> {
        match &self.material_table {
            None => Ok(MaterialTable::bundled()),
            Some(p) => {
                let path = base.join(p);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                MaterialTable::from_json(&text).map_err(|e| CliError::schema("/material_table", format!("{}: {e}", path.display())))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(CliError::schema("/modes", "needs at least one rocking minimum"));
        }
        if let Some(i) = self.modes.iter().position(|&m| m == 0) {
            return Err(CliError::schema(format!("/modes/{i}"), "rocking minima are counted from 1"));
        }
        Window::new(self.theta_range[0], self.theta_range[1]).map_err(|e| CliError::schema("/theta_range", e.to_string()))?;
        if self.rocking_grid < 3 {
            return Err(CliError::schema("/rocking_grid", "need at least three angles"));
        }
        for (name, v) in [
            ("window_kev", self.window_kev),
            ("region_half_width_kev", self.region_half_width_kev),
            ("depth_kev", self.depth_kev),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::schema(format!("/{name}"), "must be positive"));
            }
        }
        self.detuning.validate("/detuning")?;
        self.thresholds.validate().map_err(|e| CliError::schema("/thresholds", e.to_string()))
    }
}

/// Arbitrary planar stack with an embedded emitter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomStackScenario {
    pub version: u64,
    pub kind: Kind,
    pub stack: LayerStack,
    #[serde(default)]
    pub k_par: f64,
    /// Where the reflectance minimum is searched.
    pub search_window: Window,
    pub analysis_width: f64,
    pub region: ScanRegion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Grid>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "CustomStackScenario::default_prefix")]
    pub output_prefix: String,
}

impl CustomStackScenario {
    fn default_prefix() -> String {
        "custom_stack".into()
    }

    pub fn spectrum_grid(&self) -> Grid {
        self.spectrum.unwrap_or(Grid { lo: self.search_window.lo, hi: self.search_window.hi, points: 2001 })
    }

    fn validate(&self) -> Result<()> {
        self.stack.validate().map_err(|e| CliError::schema("/stack", e.to_string()))?;
        if self.stack.emitter.is_none() {
            return Err(CliError::schema("/stack/emitter", "the stack needs an emitter"));
        }
        Window::new(self.search_window.lo, self.search_window.hi)
            .map_err(|e| CliError::schema("/search_window", e.to_string()))?;
        if !(self.analysis_width > 0.0 && self.analysis_width.is_finite()) {
            return Err(CliError::schema("/analysis_width", "must be positive"));
        }
        ScanRegion::new(self.region.re_min, self.region.re_max, self.region.im_min, self.region.im_max)
            .map_err(|e| CliError::schema("/region", e.to_string()))?;
        if let Some(g) = &self.spectrum {
            g.validate("/spectrum")?;
        }
        self.thresholds.validate().map_err(|e| CliError::schema("/thresholds", e.to_string()))
    }
}

/// Few-mode model, either given explicitly or drawn at random from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticPfmScenario {
    pub version: u64,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PfmParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Random real test frequencies for the agreement check.
    #[serde(default = "SyntheticPfmScenario::default_frequencies")]
    pub frequencies: usize,
    #[serde(default = "SyntheticPfmScenario::default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Grid>,
    #[serde(default = "SyntheticPfmScenario::default_prefix")]
    pub output_prefix: String,
}

impl SyntheticPfmScenario {
    fn default_frequencies() -> usize {
        50
    }
    fn default_tolerance() -> f64 {
        1e-11
    }
    fn default_prefix() -> String {
        "synthetic_pfm".into()
    }

    fn validate(&self) -> Result<()> {
        match (&self.params, self.modes) {
            (Some(_), Some(_)) => return Err(CliError::schema("/modes", "give either params or modes, not both")),
            (None, None) => return Err(CliError::schema("", "give either params or modes")),
            (None, Some(0)) => return Err(CliError::schema("/modes", "need at least one mode")),
            _ => {}
        }
        if self.frequencies == 0 {
            return Err(CliError::schema("/frequencies", "need at least one test frequency"));
        }
        if !(self.tolerance > 0.0) {
            return Err(CliError::schema("/tolerance", "must be positive"));
        }
        if let Some(g) = &self.spectrum {
            g.validate("/spectrum")?;
        }
        Ok(())
    }
}

impl Scenario {
    pub fn kind(&self) -> Kind {
        match self {
            Self::FabryPerot(_) => Kind::FabryPerot,
            Self::Xray(_) => Kind::Xray,
            Self::CustomStack(_) => Kind::CustomStack,
            Self::SyntheticPfm(_) => Kind::SyntheticPfm,
        }
    }

    pub fn output_prefix(&self) -> &str {
        match self {
            Self::FabryPerot(s) => &s.output_prefix,
            Self::Xray(s) => &s.output_prefix,
            Self::CustomStack(s) => &s.output_prefix,
            Self::SyntheticPfm(s) => &s.output_prefix,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::FabryPerot(s) => s.validate(),
            Self::Xray(s) => s.validate(),
            Self::CustomStack(s) => s.validate(),
            Self::SyntheticPfm(s) => s.validate(),
        }?;
        let prefix = self.output_prefix();
        if prefix.is_empty() || prefix.contains(['/', '\\']) || prefix.starts_with('.') {
            return Err(CliError::schema("/output_prefix", "must be a plain file name stem"));
        }
        Ok(())
    }

    /// Parses and validates scenario text, filling every default.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::schema("", e.to_string()))?;
        let obj = value.as_object().ok_or_else(|| CliError::schema("", "scenario must be a JSON object"))?;
        match obj.get("version") {
            None => return Err(CliError::schema("/version", "missing schema version")),
            Some(v) => match v.as_u64() {
                Some(SCENARIO_VERSION) => {}
                Some(found) => return Err(CliError::Version { found, expected: SCENARIO_VERSION }),
                None => return Err(CliError::schema("/version", "version must be a non-negative integer")),
            },
        }
        let kind: Kind = match obj.get("kind") {
            None => return Err(CliError::schema("/kind", "missing scenario kind")),
            Some(k) => serde_json::from_value(k.clone()).map_err(|e| CliError::schema("/kind", e.to_string()))?,
        };
        let scenario = match kind {
            Kind::FabryPerot => Self::FabryPerot(strict(value)?),
            Kind::Xray => Self::Xray(strict(value)?),
            Kind::CustomStack => Self::CustomStack(strict(value)?),
            Kind::SyntheticPfm => Self::SyntheticPfm(strict(value)?),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes") + "\n"
    }
}

fn strict<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = json_pointer(e.path());
        CliError::schema(pointer, e.into_inner().to_string())
    })
}

/// RFC 6901 pointer for a deserialization path.
fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}
