//! Run configuration.
//!
//! A run is a list of sweeps sharing quadrature settings:
//!
//! ```toml
//! [output]
//! dir = "out"
//!
//! [quadrature]            # any QuadratureScheme field, all optional
//! n_xi = 24
//! n_g = 7
//!
//! [[sweep]]
//! name = "aligned"
//! task = "force"          # force | retrieve | derjaguin
//! geometry = { radius = 0.3, period_nm = 100.0, placement = "tangent" }
//! materials = { wire = "gold", substrate = "silica", fluid = "ethanol" }
//! configuration = { d = [0.5, 1.0], y = [0.0, 0.5], theta = [0.0, 90.0], methods = ["exact"] }
//! ```
//!
//! Separations and shifts are in units of the period `a`; `theta` is in
//! degrees (0 aligned, 90 crossed). Omitting `period_nm` selects `a → ∞`,
//! where every material takes its static permittivity.

use std::fmt;

use anyhow::Result;
use casimir_core::ema::{EmaScheme, RetrievalScheme};
use casimir_core::energy::{Orientation, QuadratureScheme};
use casimir_core::pfa::{CurvedBody, PlanarScheme};
use casimir_core::units::Period;
use serde::{Deserialize, Serialize};

use crate::material_file::MaterialDb;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub output: OutputSettings,
    #[serde(default)]
    pub quadrature: QuadratureOverrides,
    #[serde(default)]
    pub ema: EmaSettings,
    #[serde(default)]
    pub retrieval: RetrievalSettings,
    #[serde(default)]
    pub pfa: PfaSettings,
    #[serde(default, rename = "sweep")]
    pub sweeps: Vec<Sweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    /// Output directory; `--out` takes precedence.
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_manifest")]
    pub manifest: String,
}

fn default_dir() -> String {
    "out".into()
}

fn default_manifest() -> String {
    "manifest.json".into()
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings { dir: default_dir(), manifest: default_manifest() }
    }
}

/// Overrides of the exact solver's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_xi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_separation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_g: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl QuadratureOverrides {
    pub fn scheme(&self) -> QuadratureScheme {
        let mut s = QuadratureScheme::default();
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { s.$f = v; })* };
        }
        set!(n_xi, n_k, cluster, n_g, n_max, error_estimate, tolerance);
        if self.xi_scale.is_some() {
            s.xi_scale = self.xi_scale;
        }
        if self.grid_separation.is_some() {
            s.grid_separation = self.grid_separation;
        }
        if self.extrapolate.is_some() {
            s.extrapolate = self.extrapolate;
        }
        s
    }

    /// `self` with every field set in `over` replaced.
    pub fn overlay(&self, over: &QuadratureOverrides) -> QuadratureOverrides {
        macro_rules! pick {
            ($($f:ident),*) => { QuadratureOverrides { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(n_xi, xi_scale, n_k, cluster, grid_separation, n_g, n_max, extrapolate, error_estimate, tolerance)
    }
}

/// How the `ema` method describes each wire slab.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmaModel {
    /// Tables retrieved from the exact slab reflection.
    #[default]
    Retrieved,
    /// `ε_∥ = ∞`, `ε_⊥` the static substrate permittivity.
    Static,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmaSettings {
    #[serde(default)]
    pub model: EmaModel,
    #[serde(default = "EmaSettings::default_n_xi")]
    pub n_xi: usize,
    #[serde(default = "EmaSettings::default_n_k")]
    pub n_k: usize,
    #[serde(default = "EmaSettings::default_n_phi")]
    pub n_phi: usize,
}

impl EmaSettings {
    fn default_n_xi() -> usize {
        EmaScheme::default().n_xi
    }
    fn default_n_k() -> usize {
        EmaScheme::default().n_k
    }
    fn default_n_phi() -> usize {
        EmaScheme::default().n_phi
    }

    pub fn scheme(&self) -> EmaScheme {
        EmaScheme { n_xi: self.n_xi, n_k: self.n_k, n_phi: self.n_phi }
    }
}

impl Default for EmaSettings {
    fn default() -> Self {
        let s = EmaScheme::default();
        EmaSettings { model: EmaModel::default(), n_xi: s.n_xi, n_k: s.n_k, n_phi: s.n_phi }
    }
}

/// Frequency grid and probe of the effective-medium retrieval. Frequencies
/// are in `c/a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSettings {
    #[serde(default = "RetrievalSettings::default_xi_min")]
    pub xi_min: f64,
    #[serde(default = "RetrievalSettings::default_xi_max")]
    pub xi_max: f64,
    #[serde(default = "RetrievalSettings::default_points")]
    pub points: usize,
    #[serde(default = "RetrievalSettings::default_k")]
    pub k: f64,
    #[serde(default = "RetrievalSettings::default_n_g")]
    pub n_g: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Upper end of the `ε_∥ - 1 ∝ ξ⁻²` fit window.
    #[serde(default = "RetrievalSettings::default_fit_below")]
    pub fit_below: f64,
}

impl RetrievalSettings {
    fn default_xi_min() -> f64 {
        1e-4
    }
    fn default_xi_max() -> f64 {
        100.0
    }
    fn default_points() -> usize {
        49
    }
    fn default_k() -> f64 {
        RetrievalScheme::default().k
    }
    fn default_n_g() -> usize {
        RetrievalScheme::default().n_g
    }
    fn default_fit_below() -> f64 {
        0.01
    }

    pub fn scheme(&self) -> RetrievalScheme {
        let mut s = RetrievalScheme { k: self.k, n_g: self.n_g, ..RetrievalScheme::default() };
        if let Some(n) = self.n_max {
            s.n_max = n;
        }
        s
    }
}

impl Default for RetrievalSettings {
    fn default() -> Self {
        RetrievalSettings {
            xi_min: Self::default_xi_min(),
            xi_max: Self::default_xi_max(),
            points: Self::default_points(),
            k: Self::default_k(),
            n_g: Self::default_n_g(),
            n_max: None,
            fit_below: Self::default_fit_below(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfaSettings {
    #[serde(default = "PfaSettings::default_n_xi")]
    pub n_xi: usize,
    #[serde(default = "PfaSettings::default_n_k")]
    pub n_k: usize,
}

impl PfaSettings {
    fn default_n_xi() -> usize {
        PlanarScheme::default().n_xi
    }
    fn default_n_k() -> usize {
        PlanarScheme::default().n_k
    }

    pub fn scheme(&self) -> PlanarScheme {
        PlanarScheme { n_xi: self.n_xi, n_k: self.n_k }
    }
}

impl Default for PfaSettings {
    fn default() -> Self {
        let s = PlanarScheme::default();
        PfaSettings { n_xi: s.n_xi, n_k: s.n_k }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Energy and pressure between two identical slabs.
    #[default]
    Force,
    /// Effective permittivities of one slab.
    Retrieve,
    /// Sphere or cylinder over a slab, from a tabulated exact pressure.
    Derjaguin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub name: String,
    #[serde(default)]
    pub task: Task,
    pub geometry: Geometry,
    pub materials: Materials,
    #[serde(default)]
    pub configuration: Configuration,
    /// Overrides on top of the run-level `[quadrature]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derjaguin: Option<DerjaguinSettings>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Wire tops touch the substrate surface.
    #[default]
    Tangent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Wire radius in `a`. Also the side of the square wires used by `pfa`.
    pub radius: f64,
    /// Period in nm; omitted for `a → ∞`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_nm: Option<f64>,
    #[serde(default)]
    pub placement: Placement,
}

impl Geometry {
    pub fn period(&self) -> Period {
        self.period_nm.map_or(Period::Infinite, Period::from_nm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Materials {
    pub wire: String,
    pub substrate: String,
    pub fluid: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Specular,
    Ema,
    Pfa,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Specular => "specular",
            Method::Ema => "ema",
            Method::Pfa => "pfa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Configuration {
    /// Separations in `a`.
    #[serde(default)]
    pub d: Vec<f64>,
    /// Lateral shifts in `a`, used by aligned points.
    #[serde(default = "Configuration::default_y")]
    pub y: Vec<f64>,
    /// Rotation angles in degrees: 0 or 90.
    #[serde(default = "Configuration::default_theta")]
    pub theta: Vec<f64>,
    #[serde(default = "Configuration::default_methods")]
    pub methods: Vec<Method>,
}

impl Configuration {
    fn default_y() -> Vec<f64> {
        vec![0.0]
    }
    fn default_theta() -> Vec<f64> {
        vec![0.0]
    }
    fn default_methods() -> Vec<Method> {
        vec![Method::Exact]
    }

    /// `(y, orientation)` pairs in output order. Crossed points do not
    /// depend on `y` and appear once, with `y = 0`.
    pub fn placements(&self) -> Vec<(f64, f64, Orientation)> {
        let mut out = Vec::new();
        for &theta in &self.theta {
            match orientation_of(theta) {
                Some(Orientation::Aligned) => out.extend(self.y.iter().map(|&y| (y, theta, Orientation::Aligned))),
                Some(Orientation::Crossed) => out.push((0.0, theta, Orientation::Crossed)),
                None => {}
            }
        }
        out
    }
}

impl Default for Configuration {
    fn default() -> Self {
        Configuration { d: Vec::new(), y: Self::default_y(), theta: Self::default_theta(), methods: Self::default_methods() }
    }
}

pub fn orientation_of(theta_deg: f64) -> Option<Orientation> {
    if theta_deg == 0.0 {
        Some(Orientation::Aligned)
    } else if theta_deg == 90.0 {
        Some(Orientation::Crossed)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BodyShape {
    Sphere,
    Cylinder,
}

/// Curved body over a wire slab. Forces are evaluated at the sweep's `d`
/// values from a pressure table, either computed on `table` or read from a
/// CSV written by an earlier sweep or run. A relative `table_csv` is looked
/// up in the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerjaguinSettings {
    pub body: BodyShape,
    pub radius_um: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_csv: Option<String>,
}

impl DerjaguinSettings {
    pub fn curved_body(&self) -> CurvedBody {
        match self.body {
            BodyShape::Sphere => CurvedBody::Sphere { radius: self.radius_um },
            BodyShape::Cylinder => CurvedBody::Cylinder { radius: self.radius_um, length: self.length_um.unwrap_or(f64::NAN) },
        }
    }
}

/// Logarithmic separation grid in `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableGrid {
    pub d_min: f64,
    pub d_max: f64,
    #[serde(default = "TableGrid::default_per_decade")]
    pub per_decade: usize,
}

impl TableGrid {
    fn default_per_decade() -> usize {
        40
    }

    pub fn separations(&self) -> Vec<f64> {
        let decades = (self.d_max / self.d_min).log10();
        let n = ((decades * self.per_decade as f64).ceil() as usize).max(3) + 1;
        casimir_core::ema::log_grid(self.d_min, self.d_max, n)
    }
}

/// A schema or semantic problem, located by field path.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub problems: Vec<String>,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.problems.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SchemaError {}

impl RunConfig {
    /// Parses TOML; syntax and unknown-key errors carry line and column.
    pub fn parse(text: &str) -> std::result::Result<Self, SchemaError> {
        toml::from_str(text).map_err(|e| SchemaError { problems: vec![e.to_string().trim_end().to_string()] })
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Checks values serde cannot: ranges, names and combinations.
    pub fn validate(&self, db: &MaterialDb) -> std::result::Result<(), SchemaError> {
        let mut p = Vec::new();
        if let Err(e) = self.quadrature.scheme().validate() {
            p.push(format!("quadrature: {e}"));
        }
        if self.ema.n_xi < 2 || self.ema.n_k < 2 || self.ema.n_phi < 1 {
            p.push("ema: node counts must be at least 2 (n_phi at least 1)".into());
        }
        if self.pfa.n_xi < 2 || self.pfa.n_k < 2 {
            p.push("pfa: node counts must be at least 2".into());
        }
        let r = &self.retrieval;
        if !(r.xi_min > 0.0 && r.xi_max > r.xi_min && r.points >= 2) {
            p.push("retrieval: need 0 < xi_min < xi_max and at least 2 points".into());
        }
        if !(r.k > 0.0) || r.n_g % 2 == 0 {
            p.push("retrieval: k must be positive and n_g odd".into());
        }
        if !(r.fit_below > r.xi_min) {
            p.push("retrieval.fit_below: must exceed xi_min".into());
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, s) in self.sweeps.iter().enumerate() {
            let at = format!("sweep[{i}] ({})", s.name);
            if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                p.push(format!("{at}.name: use letters, digits, '-' and '_' only"));
            }
            if !names.insert(s.name.clone()) {
                p.push(format!("{at}.name: duplicate sweep name"));
            }
            if !(s.geometry.radius > 0.0 && s.geometry.radius < 0.5) {
                p.push(format!("{at}.geometry.radius: {} outside (0, 0.5)", s.geometry.radius));
            }
            if let Some(a) = s.geometry.period_nm {
                if !(a > 0.0 && a.is_finite()) {
                    p.push(format!("{at}.geometry.period_nm: must be positive"));
                }
            }
            for (field, name) in [("wire", &s.materials.wire), ("substrate", &s.materials.substrate), ("fluid", &s.materials.fluid)] {
                if db.get(name).is_none() {
                    let known: Vec<&str> = db.names().collect();
                    p.push(format!("{at}.materials.{field}: unknown material `{name}` (known: {})", known.join(", ")));
                }
            }
            if let Some(f) = db.get(&s.materials.fluid) {
                if f.model.static_limit().is_perfect_metal() {
                    p.push(format!("{at}.materials.fluid: the gap cannot be a perfect metal"));
                }
            }
            let c = &s.configuration;
            for (j, &d) in c.d.iter().enumerate() {
                if !(d > 0.0 && d.is_finite()) {
                    p.push(format!("{at}.configuration.d[{j}]: {d} is not a positive separation"));
                }
            }
            for (j, &y) in c.y.iter().enumerate() {
                if !y.is_finite() {
                    p.push(format!("{at}.configuration.y[{j}]: must be finite"));
                }
            }
            for (j, &t) in c.theta.iter().enumerate() {
                if orientation_of(t).is_none() {
                    p.push(format!("{at}.configuration.theta[{j}]: {t} is not 0 or 90"));
                }
            }
            if let Some(q) = &s.quadrature {
                if let Err(e) = self.quadrature.overlay(q).scheme().validate() {
                    p.push(format!("{at}.quadrature: {e}"));
                }
            }
            match (s.task, &s.derjaguin) {
                (Task::Derjaguin, None) => p.push(format!("{at}.derjaguin: required for task = \"derjaguin\"")),
                (Task::Derjaguin, Some(dj)) => {
                    if s.geometry.period_nm.is_none() {
                        p.push(format!("{at}.geometry.period_nm: forces in pN need a finite period"));
                    }
                    if !(dj.radius_um > 0.0) {
                        p.push(format!("{at}.derjaguin.radius_um: must be positive"));
                    }
                    match (dj.body, dj.length_um) {
                        (BodyShape::Cylinder, None) => p.push(format!("{at}.derjaguin.length_um: required for a cylinder")),
                        (BodyShape::Cylinder, Some(l)) if !(l > 0.0) => p.push(format!("{at}.derjaguin.length_um: must be positive")),
                        (BodyShape::Sphere, Some(_)) => p.push(format!("{at}.derjaguin.length_um: only for cylinders")),
                        _ => {}
                    }
                    match (&dj.table, &dj.table_csv) {
                        (Some(_), Some(_)) | (None, None) => {
                            p.push(format!("{at}.derjaguin: give exactly one of `table` and `table_csv`"))
                        }
                        (Some(t), None) if !(t.d_min > 0.0 && t.d_max > t.d_min && t.per_decade >= 1) => {
                            p.push(format!("{at}.derjaguin.table: need 0 < d_min < d_max and per_decade ≥ 1"))
                        }
                        (None, Some(_)) if c.placements().len() != 1 => {
                            p.push(format!("{at}.derjaguin.table_csv: needs exactly one (y, theta) placement"))
                        }
                        _ => {}
                    }
                }
                (_, Some(_)) => p.push(format!("{at}.derjaguin: only for task = \"derjaguin\"")),
                _ => {}
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(SchemaError { problems: p })
        }
    }
}
