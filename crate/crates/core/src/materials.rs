//! Dielectric response on the imaginary frequency axis.
//!
//! Model parameters are stored in SI (rad/s); evaluation at a natural-unit
//! frequency goes through [`Period`]. Perfect conductors are kept symbolic
//! ([`Eps::PerfectMetal`]) all the way down to the reflection coefficients.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)] // float methods are inherent in core only on recent toolchains
use num_traits::Float;

use crate::quadrature::MonotoneCubic;
use crate::units::Period;
use crate::{Error, Result};

/// Permittivity value at a given imaginary frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eps {
    Finite(f64),
    PerfectMetal,
}

impl Eps {
    pub const VACUUM: Eps = Eps::Finite(1.0);

    pub fn finite(self) -> Option<f64> {
        match self {
            Eps::Finite(e) => Some(e),
            Eps::PerfectMetal => None,
        }
    }

    pub fn is_perfect_metal(self) -> bool {
        matches!(self, Eps::PerfectMetal)
    }

    /// Finite value, panicking on a perfect metal. For media that can never be
    /// ideal conductors (fluids, embedding media).
    pub fn expect_finite(self, what: &str) -> f64 {
        match self {
            Eps::Finite(e) => e,
            Eps::PerfectMetal => panic!("{what} cannot be a perfect metal"),
        }
    }
}

/// Damped Lorentz oscillator term `c / (1 + (ξ/ξ_j)² + γ ξ/ξ_j²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub strength: f64,
    /// Resonance frequency, rad/s.
    pub resonance: f64,
    /// Damping, rad/s.
    pub width: f64,
}

impl Oscillator {
    pub const fn undamped(strength: f64, resonance: f64) -> Self {
        Oscillator { strength, resonance, width: 0.0 }
    }

    fn eval(&self, xi: f64) -> f64 {
        let r = xi / self.resonance;
        self.strength / (1.0 + r * r + self.width * xi / (self.resonance * self.resonance))
    }
}

/// Drude term `ξ_p² / (ξ(ξ + γ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drude {
    pub plasma: f64,
    pub damping: f64,
}

impl Drude {
    fn eval(&self, xi: f64) -> f64 {
        self.plasma * self.plasma / (xi * (xi + self.damping))
    }
}

/// Dispersion model of one material.
#[derive(Debug, Clone, PartialEq)]
pub enum MaterialModel {
    Vacuum,
    PerfectMetal,
    /// `1 + (ξ_p/ξ)²`
    Plasma { plasma: f64 },
    Drude(Drude),
    /// `1 + Σ oscillators (+ optional Drude free-carrier term)`
    LorentzSum { oscillators: Vec<Oscillator>, drude: Option<Drude> },
    /// Samples `(ξ, ε)` with monotone cubic interpolation; constant beyond the
    /// end points.
    Tabulated(Table),
}

/// Tabulated permittivity, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xi: Vec<f64>,
    eps: Vec<f64>,
    interp: MonotoneCubic,
}

impl Table {
    pub fn new(xi: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        if eps.iter().any(|&e| !(e >= 1.0) || !e.is_finite()) {
            return Err(Error::InvalidParameter("tabulated permittivity must be finite and >= 1".into()));
        }
        if eps.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("tabulated permittivity must be non-increasing in xi".into()));
        }
        if xi.first().is_some_and(|&x| x <= 0.0) {
            return Err(Error::InvalidParameter("tabulated frequencies must be positive".into()));
        }
        let interp = MonotoneCubic::new(&xi, &eps)?;
        Ok(Table { xi, eps, interp })
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.xi, &self.eps)
    }

    fn eval(&self, xi: f64) -> f64 {
        let (lo, hi) = self.interp.domain();
        if xi <= lo {
            self.eps[0]
        } else if xi >= hi {
            self.eps[self.eps.len() - 1]
        } else {
            self.interp.eval(xi)
        }
    }
}

impl MaterialModel {
    pub fn kind(&self) -> &'static str {
        match self {
            MaterialModel::Vacuum => "vacuum",
            MaterialModel::PerfectMetal => "perfect-metal",
            MaterialModel::Plasma { .. } => "plasma",
            MaterialModel::Drude(_) => "drude",
            MaterialModel::LorentzSum { .. } => "lorentz-oscillator-sum",
            MaterialModel::Tabulated(_) => "tabulated",
        }
    }

    fn diverges_at_zero(&self) -> bool {
        matches!(
            self,
            MaterialModel::Plasma { .. } | MaterialModel::Drude(_) | MaterialModel::LorentzSum { drude: Some(_), .. }
        )
    }

    /// Checks that all parameters are finite and physically sensible.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(alloc::format!("{}: {what}", self.kind())));
        match self {
            MaterialModel::Plasma { plasma } if !(plasma.is_finite() && *plasma > 0.0) => bad("plasma frequency"),
            MaterialModel::Drude(d) if !(d.plasma > 0.0 && d.damping >= 0.0 && d.plasma.is_finite()) => bad("drude"),
            MaterialModel::LorentzSum { oscillators, drude } => {
                for o in oscillators {
                    if !(o.strength >= 0.0 && o.resonance > 0.0 && o.width >= 0.0 && o.strength.is_finite()) {
                        return bad("oscillator");
                    }
                }
                if let Some(d) = drude {
                    if !(d.plasma > 0.0 && d.damping >= 0.0) {
                        return bad("drude term");
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `ε(iξ)` for `ξ` in rad/s.
    pub fn eval_permittivity(&self, xi: f64) -> Result<f64> {
        if self.diverges_at_zero() && xi <= 0.0 {
            return Err(Error::Domain { model: self.kind(), xi });
        }
        let xi = xi.max(0.0);
        Ok(match self {
            MaterialModel::Vacuum => 1.0,
            MaterialModel::PerfectMetal => return Err(Error::PerfectMetal),
            MaterialModel::Plasma { plasma } => 1.0 + (plasma / xi) * (plasma / xi),
            MaterialModel::Drude(d) => 1.0 + d.eval(xi),
            MaterialModel::LorentzSum { oscillators, drude } => {
                1.0 + oscillators.iter().map(|o| o.eval(xi)).sum::<f64>() + drude.map_or(0.0, |d| d.eval(xi))
            }
            MaterialModel::Tabulated(t) => t.eval(xi),
        })
    }

    /// `ε(i·0⁺)`: infinite for conductors.
    pub fn static_limit(&self) -> Eps {
        match self {
            MaterialModel::Vacuum => Eps::VACUUM,
            MaterialModel::PerfectMetal | MaterialModel::Plasma { .. } | MaterialModel::Drude(_) => Eps::PerfectMetal,
            MaterialModel::LorentzSum { drude: Some(_), .. } => Eps::PerfectMetal,
            MaterialModel::LorentzSum { oscillators, drude: None } => {
                Eps::Finite(1.0 + oscillators.iter().map(|o| o.strength).sum::<f64>())
            }
            MaterialModel::Tabulated(t) => Eps::Finite(t.eps[0]),
        }
    }

    /// Permittivity at natural frequency `xi` (units of `c/a`) for the given
    /// period. The infinite period uses the static limit.
    pub fn eps_at(&self, period: Period, xi: f64) -> Eps {
        match (self, period) {
            (MaterialModel::PerfectMetal, _) => Eps::PerfectMetal,
            (_, Period::Infinite) => self.static_limit(),
            (_, p) => Eps::Finite(
                self.eval_permittivity(p.xi_to_si(xi))
                    .expect("natural frequencies are positive and models validated"),
            ),
        }
    }
}

/// A named material with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub model: MaterialModel,
    pub source: String,
}

/// Gold plasma frequency, rad/s.
pub const GOLD_PLASMA: f64 = 1.36e16;

pub fn vacuum() -> Material {
    Material { name: "vacuum".into(), model: MaterialModel::Vacuum, source: "identity medium".into() }
}

pub fn perfect_metal() -> Material {
    Material { name: "perfect-metal".into(), model: MaterialModel::PerfectMetal, source: "ideal conductor".into() }
}

pub fn gold() -> Material {
    Material {
        name: "gold".into(),
        model: MaterialModel::Plasma { plasma: GOLD_PLASMA },
        source: "plasma model, xi_p = 1.36e16 rad/s".into(),
    }
}

/// Fused silica: two-oscillator (IR + UV) model.
pub fn silica() -> Material {
    Material {
        name: "silica".into(),
        model: MaterialModel::LorentzSum {
            oscillators: alloc::vec![Oscillator::undamped(1.71, 1.88e14), Oscillator::undamped(1.098, 2.034e16)],
            drude: None,
        },
        source: "two-oscillator fit in the style of L. Bergstrom, Adv. Colloid Interface Sci. 70, 125 (1997); \
                 coefficients reconstructed from eps(0) = 3.81 and n = 1.45, not copied from the published table"
            .into(),
    }
}

/// Ethanol: orientational relaxation, IR and UV oscillators.
pub fn ethanol() -> Material {
    Material {
        name: "ethanol".into(),
        model: MaterialModel::LorentzSum {
            oscillators: alloc::vec![
                Oscillator::undamped(20.1, 6.6e10),
                Oscillator::undamped(2.35, 6.6e14),
                Oscillator::undamped(0.852, 1.863e16),
            ],
            drude: None,
        },
        source: "oscillator form of A. Milling, P. Mulvaney, I. Larson, J. Colloid Interface Sci. 180, 460 (1996); \
                 coefficients reconstructed from static 24.3, Debye high-frequency limit 4.2 and UV n = 1.361"
            .into(),
    }
}

/// Silicon doped to 10²⁰ cm⁻³: intrinsic-Si oscillator plus free carriers.
pub fn doped_silicon() -> Material {
    Material {
        name: "doped-silicon".into(),
        model: MaterialModel::LorentzSum {
            oscillators: alloc::vec![Oscillator::undamped(10.87, 6.6e15)],
            drude: Some(carrier_drude(1e26, 0.26, 7.5e13)),
        },
        source: "intrinsic Si eps_inf = 11.87, omega_0 = 6.6e15 rad/s; Drude carriers n = 1e20 cm^-3, m* = 0.26 m_e".into(),
    }
}

/// Drude term from carrier density (m⁻³), effective mass (units of mₑ) and
/// damping (rad/s).
pub fn carrier_drude(density: f64, mass_ratio: f64, damping: f64) -> Drude {
    const E: f64 = 1.602_176_634e-19;
    const EPS0: f64 = 8.854_187_812_8e-12;
    const ME: f64 = 9.109_383_701_5e-31;
    let plasma = (density * E * E / (EPS0 * mass_ratio * ME)).sqrt();
    Drude { plasma, damping }
}

/// Looks up a built-in material by name.
pub fn builtin(name: &str) -> Option<Material> {
    Some(match name {
        "vacuum" => vacuum(),
        "perfect-metal" | "pec" => perfect_metal(),
        "gold" => gold(),
        "silica" => silica(),
        "ethanol" => ethanol(),
        "doped-silicon" | "si-doped" => doped_silicon(),
        _ => return None,
    })
}

pub const BUILTIN_NAMES: &[&str] = &["vacuum", "perfect-metal", "gold", "silica", "ethanol", "doped-silicon"];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vacuum_is_identity() {
        for xi in [1e10, 1e15, 1e18] {
            assert_eq!(vacuum().model.eval_permittivity(xi).unwrap(), 1.0);
        }
        assert_eq!(vacuum().model.static_limit(), Eps::Finite(1.0));
    }

    #[test]
    fn gold_is_two_at_its_plasma_frequency() {
        assert_eq!(gold().model.eval_permittivity(1.36e16).unwrap(), 2.0);
    }

    #[test]
    fn silica_matches_direct_oscillator_sum() {
        // Independent scalar evaluation of the shipped coefficients.
        let xi: f64 = 1e15;
        let direct = 1.0 + 1.71 / (1.0 + (xi / 1.88e14).powi(2)) + 1.098 / (1.0 + (xi / 2.034e16).powi(2));
        let got = silica().model.eval_permittivity(xi).unwrap();
        assert!((got - direct).abs() < 1e-14);
        assert!((got - 2.1537274).abs() < 1e-6, "{got}");
    }

    #[test]
    fn static_limits() {
        assert_eq!(gold().model.static_limit(), Eps::PerfectMetal);
        assert_eq!(doped_silicon().model.static_limit(), Eps::PerfectMetal);
        let s = silica().model.static_limit().finite().unwrap();
        // ξ = 1e-6 c/a at a = 100 nm
        let tiny = Period::from_nm(100.0).xi_to_si(1e-6);
        let near = silica().model.eval_permittivity(tiny).unwrap();
        assert!((s - near).abs() < 1e-9);
        assert!((s - 3.808).abs() < 1e-12);
    }

    #[test]
    fn divergent_models_reject_zero_frequency() {
        assert!(matches!(gold().model.eval_permittivity(0.0), Err(Error::Domain { .. })));
        assert!(matches!(doped_silicon().model.eval_permittivity(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(perfect_metal().model.eval_permittivity(1e15), Err(Error::PerfectMetal)));
        assert!(silica().model.eval_permittivity(0.0).is_ok());
    }

    #[test]
    fn plasma_identity_is_exact() {
        let xp = GOLD_PLASMA;
        for xi in [1e13, 3.3e15, 1e16, 4e16] {
            let e = gold().model.eval_permittivity(xi).unwrap();
            let lhs = (e - 1.0) * xi * xi;
            assert!(((lhs - xp * xp) / (xp * xp)).abs() < 1e-13);
        }
    }

    #[test]
    fn doped_silicon_plasma_frequency_is_near_1e15() {
        let d = carrier_drude(1e26, 0.26, 0.0);
        assert!((d.plasma / 1.106e15 - 1.0).abs() < 1e-2, "{}", d.plasma);
    }

    #[test]
    fn table_reproduces_samples_and_rejects_increasing_data() {
        let t = Table::new(alloc::vec![1e14, 1e15, 1e16], alloc::vec![3.0, 2.0, 1.5]).unwrap();
        let m = MaterialModel::Tabulated(t);
        assert_eq!(m.eval_permittivity(1e15).unwrap(), 2.0);
        assert_eq!(m.eval_permittivity(1e13).unwrap(), 3.0);
        assert!(Table::new(alloc::vec![1.0, 2.0], alloc::vec![1.5, 2.0]).is_err());
        assert!(Table::new(alloc::vec![1.0, 2.0], alloc::vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn eps_at_uses_static_limit_for_infinite_period() {
        assert_eq!(gold().model.eps_at(Period::Infinite, 0.3), Eps::PerfectMetal);
        assert_eq!(ethanol().model.eps_at(Period::Infinite, 0.3), Eps::Finite(1.0 + 20.1 + 2.35 + 0.852));
        assert_eq!(perfect_metal().model.eps_at(Period::from_nm(100.0), 0.3), Eps::PerfectMetal);
    }

    proptest! {
        #[test]
        fn builtins_are_monotone_and_at_least_one(x1 in 10.0f64..18.0, dx in 0.0f64..3.0) {
            let (xi1, xi2) = (10f64.powf(x1), 10f64.powf(x1 + dx));
            for name in ["vacuum", "gold", "silica", "ethanol", "doped-silicon"] {
                let m = builtin(name).unwrap().model;
                let e1 = m.eval_permittivity(xi1).unwrap();
                let e2 = m.eval_permittivity(xi2).unwrap();
                prop_assert!(e1 >= e2 && e2 >= 1.0, "{name}: {e1} {e2}");
            }
        }

        #[test]
        fn tabulated_interpolation_is_monotone(a in 1.0f64..2.0, b in 0.0f64..1.0, c in 0.0f64..5.0, t in 0.0f64..1.0) {
            let tab = Table::new(alloc::vec![1.0, 2.0, 3.0], alloc::vec![1.0 + a + b + c, 1.0 + a + b, 1.0 + a]).unwrap();
            let m = MaterialModel::Tabulated(tab);
            let lo = m.eval_permittivity(1.0 + 2.0 * t).unwrap();
            let hi = m.eval_permittivity(1.0 + 2.0 * (t * 0.5)).unwrap();
            prop_assert!(hi >= lo - 1e-12);
        }
    }
}
