use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result, Window, C64};

/// What produced the samples of a curve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Provenance {
    #[default]
    ExactGreen,
    SingleMode,
    /// Truncated pole expansion with this many terms.
    PoleExpansion(usize),
    Pfm,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExactGreen => write!(f, "exact-Green"),
            Self::SingleMode => write!(f, "single-mode"),
            Self::PoleExpansion(n) => write!(f, "pole-expansion-{n}"),
            Self::Pfm => write!(f, "pfm"),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-Green" => Ok(Self::ExactGreen),
            "single-mode" => Ok(Self::SingleMode),
            "pfm" => Ok(Self::Pfm),
            _ => s
                .strip_prefix("pole-expansion-")
                .and_then(|n| n.parse().ok())
                .map(Self::PoleExpansion)
                .ok_or_else(|| Error::InvalidInput(format!("unknown curve provenance {s:?}"))),
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Provenance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `δ̃` sampled on a real frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelShiftCurve {
    pub omega: Vec<f64>,
    pub value: Vec<C64>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl LevelShiftCurve {
    /// Samples `f` on `n` equally spaced points of `window` in parallel.
    pub fn sample<F>(f: F, window: Window, n: usize) -> Result<Self>
    where
        F: Fn(f64) -> Result<C64> + Sync,
    {
        let omega = window.grid(n);
        let value = omega.par_iter().map(|&w| f(w)).collect::<Result<Vec<_>>>()?;
        Ok(Self { omega, value, provenance: Provenance::ExactGreen })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// CSV with header `omega,delta_re,delta_im,provenance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,delta_re,delta_im,provenance\n");
        for (w, v) in self.omega.iter().zip(&self.value) {
            out.push_str(&format!("{w:e},{:e},{:e},{}\n", v.re, v.im, self.provenance));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// `Δ(ω) = Re δ̃`.
    pub fn shift(&self) -> Vec<f64> {
        self.value.iter().map(|v| v.re).collect()
    }

    /// `Γ(ω) = −2 Im δ̃`.
    pub fn rate(&self) -> Vec<f64> {
        self.value.iter().map(|v| -2.0 * v.im).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.value.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sup-norm distance to `other`, relative to `max |self|`.
    pub fn relative_sup_error(&self, other: &[C64]) -> f64 {
        assert_eq!(self.value.len(), other.len(), "curves must share a grid");
        let err = self.value.iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        err / self.max_abs()
    }

    /// Real-valued zero crossings of `Δ`, by linear interpolation.
    pub fn shift_zero_crossings(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 1..self.len() {
            let (a, b) = (self.value[i - 1].re, self.value[i].re);
            if a == 0.0 {
                out.push(self.omega[i - 1]);
            } else if a * b < 0.0 {
                let t = a / (a - b);
                out.push(self.omega[i - 1] + t * (self.omega[i] - self.omega[i - 1]));
            }
        }
        if self.value.last().is_some_and(|v| v.re == 0.0) {
            out.push(*self.omega.last().unwrap());
        }
        out
    }
}
