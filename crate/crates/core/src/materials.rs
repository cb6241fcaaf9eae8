//! Constitutive models and the named material library.
//!
//! Hyperelastic energies use the deviatoric invariants
//! `I1b = J^(-2/3) I1` and `I2b = J^(-4/3) I2`. The uniaxial closed forms
//! assume incompressibility, so the uniaxial path is `(l, l^-1/2, l^-1/2)`
//! and the Cauchy stress is `l * dW/dl` along it.
//!
//! The linear-elastic model is written in Biot strains `e = l - 1`. Along
//! its uniaxial stress path `(l, 1 - nu e, 1 - nu e)` this makes
//! `dW/dl = E (l - 1)`, which is exactly the stress it reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("stretch must be strictly positive (got {0})")]
    NonPositiveStretch(f64),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("material '{0}' is not in the library")]
    Unknown(String),
    #[error("material database: {0}")]
    Database(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HyperelasticModel {
    /// Coefficients in MPa, `d1` in 1/MPa.
    MooneyRivlin {
        c10: f64,
        c01: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d1: Option<f64>,
    },
    Yeoh1 {
        c10: f64,
    },
    LinearElastic {
        e: f64,
        nu: f64,
    },
}

fn check_stretch(l: f64) -> Result<(), MaterialError> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(MaterialError::NonPositiveStretch(l))
    }
}

impl HyperelasticModel {
    pub fn validate(&self) -> Result<(), MaterialError> {
        let bad = |m: String| Err(MaterialError::InvalidCoefficients(m));
        match *self {
            HyperelasticModel::MooneyRivlin { c10, c01, d1 } => {
                if !(c10 + c01 > 0.0) {
                    return bad(format!("C10 + C01 must be positive (got {})", c10 + c01));
                }
                if let Some(d) = d1 {
                    if !(d > 0.0) {
                        return bad(format!("D1 must be positive when given (got {d})"));
                    }
                }
            }
            HyperelasticModel::Yeoh1 { c10 } => {
                if !(c10 > 0.0) {
                    return bad(format!("C10 must be positive (got {c10})"));
                }
            }
            HyperelasticModel::LinearElastic { e, nu } => {
                if !(e > 0.0) {
                    return bad(format!("E must be positive (got {e})"));
                }
                if !(0.0..0.5).contains(&nu) {
                    return bad(format!("nu must be in [0, 0.5) (got {nu})"));
                }
            }
        }
        Ok(())
    }

    /// Strain energy density in MPa for principal stretches.
    pub fn strain_energy(&self, stretches: [f64; 3]) -> Result<f64, MaterialError> {
        for l in stretches {
            check_stretch(l)?;
        }
        // Sorted so that permuted stretches give bit-identical energies.
        let mut sorted = stretches;
        sorted.sort_by(f64::total_cmp);
        let [l1, l2, l3] = sorted;
        if let HyperelasticModel::LinearElastic { e, nu } = *self {
            let (e1, e2, e3) = (l1 - 1.0, l2 - 1.0, l3 - 1.0);
            let lame = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
            let mu = e / (2.0 * (1.0 + nu));
            let tr = e1 + e2 + e3;
            return Ok(0.5 * lame * tr * tr + mu * (e1 * e1 + e2 * e2 + e3 * e3));
        }
        let (s1, s2, s3) = (l1 * l1, l2 * l2, l3 * l3);
        let j = l1 * l2 * l3;
        let i1b = (s1 + s2 + s3) * j.powf(-2.0 / 3.0);
        let i2b = (s1 * s2 + s2 * s3 + s3 * s1) * j.powf(-4.0 / 3.0);
        Ok(match *self {
            HyperelasticModel::MooneyRivlin { c10, c01, d1 } => {
                let vol = d1.map_or(0.0, |d| (j - 1.0).powi(2) / d);
                c10 * (i1b - 3.0) + c01 * (i2b - 3.0) + vol
            }
            HyperelasticModel::Yeoh1 { c10 } => c10 * (i1b - 3.0),
            HyperelasticModel::LinearElastic { .. } => unreachable!(),
        })
    }

    /// Principal stretches along this model's uniaxial stress path.
    pub fn uniaxial_stretches(&self, l: f64) -> [f64; 3] {
        match *self {
            HyperelasticModel::LinearElastic { nu, .. } => {
                let t = 1.0 - nu * (l - 1.0);
                [l, t, t]
            }
            _ => {
                let t = 1.0 / l.sqrt();
                [l, t, t]
            }
        }
    }

    /// Converts `dW/dl` along the uniaxial path into the stress reported by
    /// [`uniaxial_stress`](Self::uniaxial_stress).
    pub fn stress_from_energy_rate(&self, l: f64, dw_dl: f64) -> f64 {
        match self {
            HyperelasticModel::LinearElastic { .. } => dw_dl,
            _ => l * dw_dl,
        }
    }

    /// Uniaxial stress in MPa at stretch `l`.
    pub fn uniaxial_stress(&self, l: f64) -> Result<f64, MaterialError> {
        check_stretch(l)?;
        Ok(self.stress_unchecked(l))
    }

    /// `d(stress)/d(stretch)` in MPa.
    pub fn tangent_modulus(&self, l: f64) -> Result<f64, MaterialError> {
        check_stretch(l)?;
        Ok(self.tangent_unchecked(l))
    }

    /// Small-strain Young's modulus, the tangent at `l = 1`.
    pub fn small_strain_modulus(&self) -> f64 {
        self.tangent_unchecked(1.0)
    }

    pub(crate) fn stress_unchecked(&self, l: f64) -> f64 {
        match *self {
            HyperelasticModel::MooneyRivlin { c10, c01, .. } => 2.0 * (l * l - 1.0 / l) * (c10 + c01 / l),
            HyperelasticModel::Yeoh1 { c10 } => 2.0 * c10 * (l * l - 1.0 / l),
            HyperelasticModel::LinearElastic { e, .. } => e * (l - 1.0),
        }
    }

    pub(crate) fn tangent_unchecked(&self, l: f64) -> f64 {
        match *self {
            HyperelasticModel::MooneyRivlin { c10, c01, .. } => {
                let inv = 1.0 / l;
                2.0 * (2.0 * l + inv * inv) * (c10 + c01 * inv) - 2.0 * (l * l - inv) * c01 * inv * inv
            }
            HyperelasticModel::Yeoh1 { c10 } => 2.0 * c10 * (2.0 * l + 1.0 / (l * l)),
            HyperelasticModel::LinearElastic { e, .. } => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialEntry {
    pub model: HyperelasticModel,
    /// Fibre radius in mm, for fibre materials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibre_radius: Option<f64>,
    /// Use half the fibre radius in section properties.
    #[serde(default)]
    pub halved_radius: bool,
}

impl MaterialEntry {
    fn solid(model: HyperelasticModel) -> Self {
        Self { model, fibre_radius: None, halved_radius: false }
    }

    pub fn effective_fibre_radius(&self) -> Option<f64> {
        self.fibre_radius.map(|r| if self.halved_radius { 0.5 * r } else { r })
    }
}

pub const ECOFLEX_00_50: &str = "ecoflex_00_50";
pub const SMOOTH_SIL_960: &str = "smooth_sil_960";
pub const DRAGON_SKIN_30: &str = "dragon_skin_30";
pub const FIBERGLASS_LAYER: &str = "fiberglass_layer";
pub const KEVLAR: &str = "kevlar";
pub const CLEAR_V4: &str = "clear_v4";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialLibrary {
    pub entries: BTreeMap<String, MaterialEntry>,
}

impl Default for MaterialLibrary {
    fn default() -> Self {
        use HyperelasticModel::*;
        let mut entries = BTreeMap::new();
        entries.insert(ECOFLEX_00_50.into(), MaterialEntry::solid(MooneyRivlin { c10: 0.022, c01: 0.001, d1: None }));
        entries.insert(
            SMOOTH_SIL_960.into(),
            MaterialEntry::solid(MooneyRivlin { c10: 0.7, c01: 0.265, d1: Some(1.25e-9) }),
        );
        entries.insert(DRAGON_SKIN_30.into(), MaterialEntry::solid(MooneyRivlin { c10: 0.12, c01: 0.12, d1: None }));
        entries.insert(FIBERGLASS_LAYER.into(), MaterialEntry::solid(Yeoh1 { c10: 3.95 }));
        entries.insert(
            KEVLAR.into(),
            MaterialEntry {
                model: LinearElastic { e: 40_000.0, nu: 0.35 },
                fibre_radius: Some(0.103),
                halved_radius: false,
            },
        );
        entries.insert(CLEAR_V4.into(), MaterialEntry::solid(LinearElastic { e: 2_800.0, nu: 0.35 }));
        Self { entries }
    }
}

impl MaterialLibrary {
    pub fn entry(&self, name: &str) -> Result<&MaterialEntry, MaterialError> {
        self.entries.get(name).ok_or_else(|| MaterialError::Unknown(name.to_string()))
    }

    pub fn model(&self, name: &str) -> Result<HyperelasticModel, MaterialError> {
        Ok(self.entry(name)?.model)
    }

    /// Effective kevlar radius, honouring the halved-radius flag.
    pub fn fibre_radius(&self) -> Result<f64, MaterialError> {
        self.entry(KEVLAR)?
            .effective_fibre_radius()
            .ok_or_else(|| MaterialError::Database("kevlar entry has no fibre radius".into()))
    }

    pub fn with_halved_fibre(mut self, halved: bool) -> Self {
        if let Some(k) = self.entries.get_mut(KEVLAR) {
            k.halved_radius = halved;
        }
        self
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        for (name, e) in &self.entries {
            e.model.validate().map_err(|err| MaterialError::InvalidCoefficients(format!("{name}: {err}")))?;
            if let Some(r) = e.fibre_radius {
                if !(r > 0.0) {
                    return Err(MaterialError::InvalidCoefficients(format!("{name}: fibre radius {r}")));
                }
            }
        }
        for required in [ECOFLEX_00_50, SMOOTH_SIL_960, DRAGON_SKIN_30, FIBERGLASS_LAYER, KEVLAR, CLEAR_V4] {
            self.entry(required)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("library serialises")
    }

    /// Reads a JSON library. Entries in the file replace or extend the
    /// defaults.
    pub fn load(path: &Path) -> Result<Self, MaterialError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| MaterialError::Database(format!("{}: {e}", path.display())))?;
        let overrides: MaterialLibrary =
            serde_json::from_str(&text).map_err(|e| MaterialError::Database(e.to_string()))?;
        let mut lib = Self::default();
        lib.entries.extend(overrides.entries);
        lib.validate()?;
        Ok(lib)
    }
}
