//! Material files: one TOML document per material.
//!
//! ```toml
//! name = "silica"
//! source = "where the numbers come from"
//!
//! [model]
//! kind = "lorentz"            # vacuum | perfect-metal | plasma | drude | lorentz | table
//! oscillators = [
//!     { strength = 1.71, resonance = 1.88e14 },          # rad/s
//!     { strength = 1.098, resonance = 2.034e16, width = 0.0 },
//! ]
//! # optional free carriers, either directly ...
//! # drude = { plasma = 1.1e15, damping = 7.5e13 }
//! # ... or from density (m^-3), effective mass (m_e) and damping (rad/s)
//! # carriers = { density = 1e26, mass_ratio = 0.26, damping = 7.5e13 }
//! ```
//!
//! `plasma` takes `plasma`; `drude` takes `plasma` and `damping`; `table`
//! takes `xi` (rad/s) and `eps` arrays. Unknown keys are errors.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use casimir_core::materials::{carrier_drude, Drude, Material, MaterialModel, Oscillator, Table};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialFile {
    pub name: String,
    pub source: String,
    pub model: ModelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Vacuum,
    PerfectMetal,
    Plasma {
        plasma: f64,
    },
    Drude {
        plasma: f64,
        damping: f64,
    },
    Lorentz {
        oscillators: Vec<OscillatorSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        drude: Option<DrudeSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        carriers: Option<CarrierSpec>,
    },
    Table {
        xi: Vec<f64>,
        eps: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSpec {
    pub strength: f64,
    pub resonance: f64,
    #[serde(default)]
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrudeSpec {
    pub plasma: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSpec {
    pub density: f64,
    pub mass_ratio: f64,
    pub damping: f64,
}

impl MaterialFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in material file {}", path.display()))
    }

    pub fn to_material(&self) -> Result<Material> {
        let model = match &self.model {
            ModelSpec::Vacuum => MaterialModel::Vacuum,
            ModelSpec::PerfectMetal => MaterialModel::PerfectMetal,
            ModelSpec::Plasma { plasma } => MaterialModel::Plasma { plasma: *plasma },
            ModelSpec::Drude { plasma, damping } => MaterialModel::Drude(Drude { plasma: *plasma, damping: *damping }),
            ModelSpec::Lorentz { oscillators, drude, carriers } => {
                let drude = match (drude, carriers) {
                    (Some(_), Some(_)) => bail!("give either `drude` or `carriers`, not both"),
                    (Some(d), None) => Some(Drude { plasma: d.plasma, damping: d.damping }),
                    (None, Some(c)) => Some(carrier_drude(c.density, c.mass_ratio, c.damping)),
                    (None, None) => None,
                };
                let oscillators = oscillators
                    .iter()
                    .map(|o| Oscillator { strength: o.strength, resonance: o.resonance, width: o.width })
                    .collect();
                MaterialModel::LorentzSum { oscillators, drude }
            }
            ModelSpec::Table { xi, eps } => MaterialModel::Tabulated(Table::new(xi.clone(), eps.clone())?),
        };
        model.validate().with_context(|| format!("material `{}`", self.name))?;
        Ok(Material { name: self.name.clone(), model, source: self.source.clone() })
    }
}

/// Shipped material files, embedded at build time.
pub const BUILTIN_FILES: &[(&str, &str)] = &[
    ("vacuum", include_str!("../materials/vacuum.toml")),
    ("perfect-metal", include_str!("../materials/perfect-metal.toml")),
    ("gold", include_str!("../materials/gold.toml")),
    ("silica", include_str!("../materials/silica.toml")),
    ("ethanol", include_str!("../materials/ethanol.toml")),
    ("doped-silicon", include_str!("../materials/doped-silicon.toml")),
];

/// Materials known to a run, by name.
#[derive(Debug, Clone, Default)]
pub struct MaterialDb {
    entries: BTreeMap<String, (MaterialFile, Material)>,
}

impl MaterialDb {
    pub fn builtin() -> Self {
        let mut db = MaterialDb::default();
        for (name, text) in BUILTIN_FILES {
            let file = MaterialFile::parse(text).unwrap_or_else(|e| panic!("shipped material {name}: {e:#}"));
            db.insert(name, file).unwrap_or_else(|e| panic!("shipped material {name}: {e:#}"));
        }
        db
    }

    /// Registers `file` under `name`, replacing any earlier entry.
    pub fn insert(&mut self, name: &str, file: MaterialFile) -> Result<()> {
        let material = file.to_material()?;
        self.entries.insert(name.to_string(), (file, material));
        Ok(())
    }

    /// Parses a `name=FILE` command-line registration.
    pub fn register_arg(&mut self, arg: &str) -> Result<()> {
        let Some((name, path)) = arg.split_once('=') else {
            bail!("--material expects name=FILE, got `{arg}`");
        };
        if name.is_empty() {
            bail!("--material name is empty in `{arg}`");
        }
        let file = MaterialFile::load(Path::new(path))?;
        self.insert(name, file)
    }

    pub fn get(&self, name: &str) -> Option<&Material> {
        self.entries.get(name).map(|(_, m)| m)
    }

    pub fn file(&self, name: &str) -> Option<&MaterialFile> {
        self.entries.get(name).map(|(f, _)| f)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
