//! Conversion between natural units (`ħ = c = 1`, lengths in periods) and SI.
//!
//! All SI constants used anywhere in the workspace are defined here.

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// `ħc` in J·m.
pub const HBAR_C: f64 = HBAR * SPEED_OF_LIGHT;

/// Length scale of a calculation: the array period.
///
/// `Period::Infinite` is the non-dispersive limit, where every material is
/// replaced by its static permittivity and results are scale free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Period {
    Meters(f64),
    Infinite,
}

impl Period {
    pub fn from_nm(nm: f64) -> Self {
        Period::Meters(nm * 1e-9)
    }

    pub fn meters(self) -> Option<f64> {
        match self {
            Period::Meters(a) => Some(a),
            Period::Infinite => None,
        }
    }

    /// Imaginary frequency in rad/s for `xi` given in `c/a`.
    ///
    /// In the infinite-period limit every finite natural frequency maps to
    /// zero.
    pub fn xi_to_si(self, xi: f64) -> f64 {
        match self {
            Period::Meters(a) => xi * SPEED_OF_LIGHT / a,
            Period::Infinite => 0.0,
        }
    }

    /// Inverse of [`Period::xi_to_si`]; `None` for the infinite period.
    pub fn xi_from_si(self, xi_si: f64) -> Option<f64> {
        self.meters().map(|a| xi_si * a / SPEED_OF_LIGHT)
    }

    /// Pressure in pN/µm² (= Pa) for a natural-unit pressure in `ħc/a⁴`.
    pub fn pressure_to_si(self, p: f64) -> Option<f64> {
        self.meters().map(|a| p * HBAR_C / (a * a * a * a))
    }

    /// Energy per area in J/m² for a natural-unit value in `ħc/a³`.
    pub fn energy_to_si(self, e: f64) -> Option<f64> {
        self.meters().map(|a| e * HBAR_C / (a * a * a))
    }

    /// Length in nm for a length in periods.
    pub fn length_to_nm(self, l: f64) -> Option<f64> {
        self.meters().map(|a| l * a * 1e9)
    }

    pub fn length_from_nm(self, nm: f64) -> Option<f64> {
        self.meters().map(|a| nm * 1e-9 / a)
    }
}
