//! Planar interfaces: Fresnel coefficients, layered stacks, and the
//! composition of a bare wire-array reflection with the fluid–substrate
//! interface.
//!
//! Sign convention (used everywhere in the crate): the TE amplitude is the
//! electric field along `ê_TE = ẑ × k̂` projected on the interface, the TM
//! amplitude is the magnetic field along the same vector. At imaginary
//! frequency
//!
//! ```text
//! r_TE = (q_a - q_b) / (q_a + q_b)
//! r_TM = (ε_b q_a - ε_a q_b) / (ε_b q_a + ε_a q_b)
//! ```
//!
//! with `q = √(ε ξ² + k²)`, so a perfect conductor gives `(-1, +1)` and
//! `t = 1 + r` for both polarizations.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{Lu, Matrix, Scalar};
use crate::materials::{Eps, MaterialModel};
use crate::units::Period;
use crate::{Error, Result};

/// Polarization index: `TE = 0`, `TM = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pol {
    Te = 0,
    Tm = 1,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::Te, Pol::Tm];
}

/// `q = √(ε ξ² + k²)`.
#[inline]
pub fn qz(eps: f64, xi: f64, k: f64) -> f64 {
    (eps * xi * xi + k * k).sqrt()
}

/// Fresnel reflection `(r_TE, r_TM)` for a wave in medium `a` hitting medium `b`.
pub fn fresnel_reflection(eps_a: f64, eps_b: Eps, xi: f64, k: f64) -> [f64; 2] {
    match eps_b {
        Eps::PerfectMetal => [-1.0, 1.0],
        Eps::Finite(eb) => {
            if eb == eps_a {
                return [0.0, 0.0];
            }
            let qa = qz(eps_a, xi, k);
            let qb = qz(eb, xi, k);
            [(qa - qb) / (qa + qb), (eb * qa - eps_a * qb) / (eb * qa + eps_a * qb)]
        }
    }
}

/// Reflection and transmission of one polarization across an interface,
/// from either side: `*_ab` for incidence from `a`, `*_ba` from `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub r_ab: f64,
    pub t_ab: f64,
    pub r_ba: f64,
    pub t_ba: f64,
}

impl Interface {
    pub const TRANSPARENT: Interface = Interface { r_ab: 0.0, t_ab: 1.0, r_ba: 0.0, t_ba: 1.0 };

    pub fn new(eps_a: f64, eps_b: Eps, xi: f64, k: f64, pol: Pol) -> Self {
        let r = fresnel_reflection(eps_a, eps_b, xi, k)[pol as usize];
        match eps_b {
            Eps::PerfectMetal => Interface { r_ab: r, t_ab: 0.0, r_ba: 0.0, t_ba: 0.0 },
            Eps::Finite(_) => Interface { r_ab: r, t_ab: 1.0 + r, r_ba: -r, t_ba: 1.0 - r },
        }
    }
}

/// A finite layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub model: MaterialModel,
    /// Thickness in units of the period.
    pub thickness: f64,
}

/// Cover medium, finite layers from the surface downward, terminal half-space.
/// The reference plane is the top surface of the first layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub cover: MaterialModel,
    pub layers: Vec<Layer>,
    pub substrate: MaterialModel,
}

/// A stack with all permittivities evaluated at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct StackEps {
    pub cover: f64,
    pub layers: Vec<(Eps, f64)>,
    pub substrate: Eps,
}

impl LayerStack {
    pub fn half_space(cover: MaterialModel, substrate: MaterialModel) -> Self {
        LayerStack { cover, layers: Vec::new(), substrate }
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.cover, MaterialModel::PerfectMetal) {
            return Err(Error::InvalidParameter("cover medium cannot be a perfect metal".into()));
        }
        if self.layers.iter().any(|l| !(l.thickness > 0.0 && l.thickness.is_finite())) {
            return Err(Error::InvalidParameter("layer thicknesses must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn at(&self, period: Period, xi: f64) -> StackEps {
        StackEps {
            cover: self.cover.eps_at(period, xi).expect_finite("cover medium"),
            layers: self.layers.iter().map(|l| (l.model.eps_at(period, xi), l.thickness)).collect(),
            substrate: self.substrate.eps_at(period, xi),
        }
    }
}

/// Reflection `(r_TE, r_TM)` of the whole stack seen from the cover, referenced
/// to the outer surface.
pub fn multilayer_reflection(stack: &StackEps, xi: f64, k: f64) -> [f64; 2] {
    // media[0] = cover, media[1..=L] = layers, media[L+1] = substrate.
    let mut media: Vec<(Eps, f64)> = Vec::with_capacity(stack.layers.len() + 2);
    media.push((Eps::Finite(stack.cover), 0.0));
    media.extend(stack.layers.iter().copied());
    media.push((stack.substrate, 0.0));
    let last = media.len() - 1;
    let mut out = [0.0; 2];
    for pol in Pol::BOTH {
        let p = pol as usize;
        // r is the reflection seen from inside media[j-1] at its lower face.
        let mut r = f64::NAN;
        for j in (1..=last).rev() {
            let (below, h) = media[j];
            let Eps::Finite(above) = media[j - 1].0 else {
                // Perfect-metal layer: whatever lies beneath is hidden.
                r = f64::NAN;
                continue;
            };
            let rho = fresnel_reflection(above, below, xi, k)[p];
            r = match below {
                Eps::PerfectMetal => rho,
                Eps::Finite(_) if j == last => rho,
                Eps::Finite(e) => {
                    let ph = (-2.0 * qz(e, xi, k) * h).exp();
                    (rho + r * ph) / (1.0 + rho * r * ph)
                }
            };
        }
        out[p] = r;
    }
    out
}

/// Full reflection of a patterned slab seen from the fluid.
///
/// `array_r` is the bare array reflection computed inside the substrate and
/// referenced to the interface plane; `iface[i]` is the fluid (`a`) /
/// substrate (`b`) interface for mode `i`. The result is
/// `r_fs + t_sf (1 - R r_sf)⁻¹ R t_fs` with the interface terms diagonal.
pub fn slab_reflection<T: Scalar>(array_r: &Matrix<T>, iface: &[Interface]) -> Result<Matrix<T>> {
    let n = array_r.rows();
    assert_eq!(n, iface.len());
    let singular = || Error::Singular { context: "array/interface multiple reflections".into() };
    let a = Matrix::from_fn(n, n, |i, j| {
        let delta = if i == j { T::one() } else { T::zero() };
        delta - array_r[(i, j)] * T::from_real(iface[j].r_ba)
    });
    let lu = Lu::factor(a).map_err(|_| singular())?;
    let mut x = array_r.clone();
    x.scale_cols(&iface.iter().map(|f| T::from_real(f.t_ab)).collect::<Vec<_>>());
    lu.solve_in_place(&mut x);
    x.scale_rows(&iface.iter().map(|f| T::from_real(f.t_ba)).collect::<Vec<_>>());
    for (i, f) in iface.iter().enumerate() {
        x[(i, i)] = x[(i, i)] + T::from_real(f.r_ab);
    }
    if !x.is_finite() {
        return Err(singular());
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::Complex64;
    use crate::materials::{ethanol, gold, silica};
    use proptest::prelude::*;

    /// Independent 2×2 transfer-matrix evaluation on `(ψ, ψ'/w)`, `w = 1` (TE)
    /// or `ε` (TM), for finite media only.
    fn transfer_oracle(cover: f64, layers: &[(f64, f64)], sub: f64, xi: f64, k: f64, tm: bool) -> f64 {
        let w = |e: f64| if tm { e } else { 1.0 };
        let mut m = [[1.0, 0.0], [0.0, 1.0]];
        for &(e, h) in layers {
            let q = (e * xi * xi + k * k).sqrt();
            let (c, s) = ((q * h).cosh(), (q * h).sinh());
            let l = [[c, w(e) / q * s], [q / w(e) * s, c]];
            m = [
                [l[0][0] * m[0][0] + l[0][1] * m[1][0], l[0][0] * m[0][1] + l[0][1] * m[1][1]],
                [l[1][0] * m[0][0] + l[1][1] * m[1][0], l[1][0] * m[0][1] + l[1][1] * m[1][1]],
            ];
        }
        let alpha = (sub * xi * xi + k * k).sqrt() / w(sub);
        let beta = (cover * xi * xi + k * k).sqrt() / w(cover);
        let x = m[1][1] + alpha * m[0][1];
        let y = m[1][0] + alpha * m[0][0];
        (x * beta - y) / (y + x * beta)
    }

    #[test]
    fn fresnel_examples() {
        assert_eq!(fresnel_reflection(1.5, Eps::Finite(1.5), 1.0, 2.0), [0.0, 0.0]);
        assert_eq!(fresnel_reflection(1.0, Eps::PerfectMetal, 0.3, 2.0), [-1.0, 1.0]);
        let (qa, qb) = (2f64.sqrt(), 3f64.sqrt());
        let r = fresnel_reflection(1.0, Eps::Finite(2.0), 1.0, 1.0);
        assert!((r[0] - (qa - qb) / (qa + qb)).abs() < 1e-15);
        assert!((r[1] - (2.0 * qa - qb) / (2.0 * qa + qb)).abs() < 1e-15);
    }

    #[test]
    fn ethanol_gold_silica_matches_transfer_matrix() {
        let period = Period::from_nm(100.0);
        let stack = LayerStack {
            cover: ethanol().model,
            layers: alloc::vec![Layer { model: gold().model, thickness: 0.3 }],
            substrate: silica().model,
        };
        for &(xi, k) in &[(0.2, 0.0), (1.0, 3.0), (4.0, 0.5), (0.05, 10.0)] {
            let s = stack.at(period, xi);
            let eg = s.layers[0].0.finite().unwrap();
            let r = multilayer_reflection(&s, xi, k);
            let es = s.substrate.finite().unwrap();
            for (p, tm) in [(0, false), (1, true)] {
                let o = transfer_oracle(s.cover, &[(eg, 0.3)], es, xi, k, tm);
                assert!((r[p] - o).abs() < 1e-12, "{xi} {k} {p}: {} vs {o}", r[p]);
            }
        }
    }

    #[test]
    fn thick_and_invisible_layers() {
        let base = StackEps { cover: 1.8, layers: alloc::vec![], substrate: Eps::Finite(2.2) };
        let r0 = multilayer_reflection(&base, 0.7, 1.3);
        let same = StackEps { layers: alloc::vec![(Eps::Finite(2.2), 0.4)], ..base.clone() };
        let thick = StackEps { cover: 1.8, layers: alloc::vec![(Eps::Finite(2.2), 80.0)], substrate: Eps::Finite(9.0) };
        for p in 0..2 {
            assert!((multilayer_reflection(&same, 0.7, 1.3)[p] - r0[p]).abs() < 1e-14);
            assert!((multilayer_reflection(&thick, 0.7, 1.3)[p] - r0[p]).abs() < 1e-14);
        }
    }

    #[test]
    fn perfect_metal_layer_hides_substrate() {
        let s = StackEps { cover: 1.0, layers: alloc::vec![(Eps::PerfectMetal, 0.1)], substrate: Eps::Finite(4.0) };
        assert_eq!(multilayer_reflection(&s, 0.5, 0.5), [-1.0, 1.0]);
        let s = StackEps {
            cover: 1.0,
            layers: alloc::vec![(Eps::Finite(3.0), 0.2), (Eps::PerfectMetal, 0.1)],
            substrate: Eps::Finite(4.0),
        };
        let o = StackEps { cover: 1.0, layers: alloc::vec![(Eps::Finite(3.0), 0.2)], substrate: Eps::PerfectMetal };
        assert_eq!(multilayer_reflection(&s, 0.5, 0.5), multilayer_reflection(&o, 0.5, 0.5));
    }

    #[test]
    fn slab_reflection_trivial_cases() {
        let z = CMatrix::zeros(4, 4);
        let transparent = [Interface::TRANSPARENT; 4];
        assert_eq!(slab_reflection(&z, &transparent).unwrap().max_abs(), 0.0);
        let iface: Vec<Interface> =
            (0..4).map(|i| Interface::new(1.85, Eps::Finite(2.1), 0.8, i as f64, Pol::BOTH[i % 2])).collect();
        let r = slab_reflection(&z, &iface).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { iface[i].r_ab } else { 0.0 };
                assert_eq!(r[(i, j)].re, want);
            }
        }
    }

    proptest! {
        /// A buried planar reflector, fed through the array/interface
        /// composition, must agree with the layered-media recursion.
        #[test]
        fn slab_composition_matches_multilayer(
            ef in 1.0f64..5.0, es in 1.0f64..5.0, eb in 1.0f64..30.0,
            h in 0.01f64..2.0, xi in 0.01f64..3.0, k in 0.0f64..5.0,
        ) {
            let stack = StackEps { cover: ef, layers: alloc::vec![(Eps::Finite(es), h)], substrate: Eps::Finite(eb) };
            let want = multilayer_reflection(&stack, xi, k);
            let qs = qz(es, xi, k);
            let mut arr = CMatrix::zeros(2, 2);
            let mut iface = alloc::vec![];
            for pol in Pol::BOTH {
                let p = pol as usize;
                arr[(p, p)] = Complex64::new(fresnel_reflection(es, Eps::Finite(eb), xi, k)[p] * (-2.0 * qs * h).exp(), 0.0);
                iface.push(Interface::new(ef, Eps::Finite(es), xi, k, pol));
            }
            let got = slab_reflection(&arr, &iface).unwrap();
            for p in 0..2 {
                prop_assert!((got[(p, p)].re - want[p]).abs() < 1e-12);
                prop_assert!(want[p].abs() <= 1.0);
            }
        }
    }
}
