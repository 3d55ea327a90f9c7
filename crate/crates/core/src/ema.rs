//! Uniaxial effective-medium description of a wire slab.
//!
//! The slab is replaced by a half-space with `ε = diag(ε_⊥, ε_⊥, ε_∥)` in the
//! `(x, y, z)` frame of the wires (`z` along the wires, `x` normal to the
//! surface). Reflection follows the crate's TE/TM amplitude convention (see
//! [`crate::layers`]), so the 2×2 blocks plug straight into the energy
//! functional.
//!
//! Inside the medium the two decaying eigenwaves are the ordinary wave
//! (`E_z = 0`, `κ_o² = k² + ε_⊥ξ²`) and the extraordinary wave (`H_z = 0`,
//! `κ_e² = ε_∥ξ² + k_y² + (ε_∥/ε_⊥) k_z²`). Their tangential fields stay
//! linearly independent for every in-plane direction, including `k ∥ ŷ`
//! and `k ∥ ẑ`, so no limiting procedure is needed there. The
//! extraordinary wave is normalized by `1/κ_e`, which keeps `ε_∥ = ∞` finite.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::energy::{log_det_integrand, Orientation, SlabSpec};
use crate::layers::{fresnel_reflection, qz};
use crate::linalg::RMatrix;
use crate::materials::{Eps, MaterialModel};
use crate::quadrature::{gauss_legendre_on, semi_infinite, CubicSpline, FrequencyGrid};
use crate::units::Period;
use crate::{Error, Result};

/// Reflection of a uniaxial half-space, `r[out][in]` with index 0 = TE,
/// 1 = TM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniaxialReflection {
    pub r: [[f64; 2]; 2],
}

impl UniaxialReflection {
    pub fn te_te(&self) -> f64 {
        self.r[0][0]
    }
    pub fn tm_tm(&self) -> f64 {
        self.r[1][1]
    }
    /// TE out for TM in.
    pub fn te_tm(&self) -> f64 {
        self.r[0][1]
    }
    /// TM out for TE in.
    pub fn tm_te(&self) -> f64 {
        self.r[1][0]
    }

    fn to_matrix(self) -> RMatrix {
        RMatrix::from_fn(2, 2, |i, j| self.r[i][j])
    }
}

/// Uniaxial reflection at in-plane wavevector of length `k` making angle
/// `phi` with the wire axis (`k_z = k cos φ`, `k_y = k sin φ`).
pub fn uniaxial_reflection(eps_par: Eps, eps_perp: Eps, eps_fluid: f64, xi: f64, k: f64, phi: f64) -> Result<UniaxialReflection> {
    uniaxial_reflection_k(eps_par, eps_perp, eps_fluid, xi, k * phi.sin(), k * phi.cos())
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for i in c + 1..4 {
            let f = a[i][c] / a[c][c];
            for j in c..4 {
                a[i][j] -= f * a[c][j];
            }
        }
    }
    det
}

/// Same as [`uniaxial_reflection`] with Cartesian `(k_y, k_z)`.
pub fn uniaxial_reflection_k(eps_par: Eps, eps_perp: Eps, eps_fluid: f64, xi: f64, k_y: f64, k_z: f64) -> Result<UniaxialReflection> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("xi must be positive, got {xi}")));
    }
    let p = (k_y * k_y + k_z * k_z).sqrt();
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter("TE/TM undefined at normal incidence".into()));
    }
    if !(eps_fluid >= 1.0 && eps_fluid.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("fluid permittivity {eps_fluid} below 1")));
    }
    let perp = match eps_perp {
        Eps::PerfectMetal if eps_par.is_perfect_metal() => {
            let f = fresnel_reflection(eps_fluid, Eps::PerfectMetal, xi, p);
            return Ok(UniaxialReflection { r: [[f[0], 0.0], [0.0, f[1]]] });
        }
        Eps::PerfectMetal => return Err(Error::InvalidParameter("infinite ε_⊥ needs infinite ε_∥".into())),
        Eps::Finite(e) => e,
    };
    // 1/ε_∥, zero for an ideal conductor along the wires.
    let u = match eps_par {
        Eps::PerfectMetal => 0.0,
        Eps::Finite(e) => 1.0 / e,
    };
    if !(perp > 0.0) || !(u >= 0.0) {
        return Err(Error::InvalidParameter("permittivities must be positive".into()));
    }
    if eps_par == eps_perp {
        let f = fresnel_reflection(eps_fluid, eps_perp, xi, p);
        return Ok(UniaxialReflection { r: [[f[0], 0.0], [0.0, f[1]]] });
    }

    let q = qz(eps_fluid, xi, p);
    let (cy, cz) = (k_y / p, k_z / p);
    // Tangential (E_y, E_z, ξH_y, ξH_z) of each wave; `s = 1` for the wave
    // travelling toward the medium.
    let te = |s: f64| [-cz, cy, s * q * cy, s * q * cz];
    let tm = |s: f64| [-s * q * cy / (eps_fluid * xi), -s * q * cz / (eps_fluid * xi), -xi * cz, xi * cy];
    let kappa_o = qz(perp, xi, p);
    let ord = [1.0, 0.0, -k_y * k_z / kappa_o, -(k_z * k_z + perp * xi * xi) / kappa_o];
    let w = u.sqrt() / (xi * xi + k_z * k_z / perp + u * k_y * k_y).sqrt();
    let ext = [-k_y * k_z * w / (perp * xi), -(xi * xi + k_z * k_z / perp) * w / xi, -xi, 0.0];

    // Columns: reflected TE, reflected TM, -ordinary, -extraordinary.
    let (te_up, tm_up) = (te(-1.0), tm(-1.0));
    let mut m = [[0.0; 4]; 4];
    for row in 0..4 {
        m[row] = [te_up[row], tm_up[row], -ord[row], -ext[row]];
    }
    let det = det4(&m);
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Singular { context: "uniaxial interface".into() });
    }
    let mut r = [[0.0; 2]; 2];
    for (pin, inc) in [te(1.0), tm(1.0)].into_iter().enumerate() {
        for out in 0..2 {
            // Cramer: replace the unknown's column by the right-hand side.
            let mut mi = m;
            for row in 0..4 {
                mi[row][out] = -inc[row];
            }
            r[out][pin] = det4(&mi) / det;
        }
    }
    Ok(UniaxialReflection { r })
}

/// Effective permittivities from the specular reflection of a slab at
/// in-plane wavevector `k ŷ` (perpendicular to the wires): `r_par` is the TE
/// and `r_perp` the TM amplitude.
///
/// The inversion is exact for a uniaxial half-space at that `k` and reduces
/// to `ε_∥ = ε_f((1-R_∥)/(1+R_∥))²`, `ε_⊥ = ε_f((1+R_⊥)/(1-R_⊥))²` as
/// `k → 0`.
pub fn retrieve_effective_eps(r_par: f64, r_perp: f64, eps_fluid: f64, xi: f64, k: f64) -> Result<(f64, f64)> {
    if !(r_par > -1.0 && r_par < 1.0 && r_perp > -1.0 && r_perp < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "reflection ({r_par}, {r_perp}) at xi = {xi} is outside (-1, 1)"
        )));
    }
    let q = qz(eps_fluid, xi, k);
    let kappa_e = q * (1.0 - r_par) / (1.0 + r_par);
    let par = (kappa_e * kappa_e - k * k) / (xi * xi);
    // r_TM = (ε q - ε_f κ)/(ε q + ε_f κ), κ² = k² + ε ξ².
    let c = eps_fluid * (1.0 + r_perp) / ((1.0 - r_perp) * q);
    let c2 = c * c;
    let perp = 0.5 * (c2 * xi * xi + (c2 * c2 * xi.powi(4) + 4.0 * c2 * k * k).sqrt());
    Ok((par, perp))
}

/// Sampled `ε_∥(iξ)`, `ε_⊥(iξ)` with interpolation.
///
/// Interpolation is a natural cubic spline of `ln(ε - 1)` against `ln ξ`.
/// Below the first sample `ε_⊥` is held and `ε_∥ - 1` grows as `ξ⁻²` when a
/// plasma frequency was fitted (held otherwise); above the last sample both
/// `ε - 1` decay as `ξ⁻²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveEps {
    xi: Vec<f64>,
    par: Vec<f64>,
    perp: Vec<f64>,
    plasma: Option<f64>,
    spline_par: CubicSpline,
    spline_perp: CubicSpline,
}

/// Excess permittivities below this are treated as zero by the log spline.
const EXCESS_FLOOR: f64 = 1e-300;

impl EffectiveEps {
    pub fn new(xi: Vec<f64>, par: Vec<f64>, perp: Vec<f64>) -> Result<Self> {
        if xi.len() < 2 || par.len() != xi.len() || perp.len() != xi.len() {
            return Err(Error::InvalidParameter("effective tables need at least two matching samples".into()));
        }
        if xi[0] <= 0.0 || xi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("effective-table frequencies must be positive and increasing".into()));
        }
        if par.iter().chain(&perp).any(|&e| !e.is_finite() || e < 1.0 - 1e-9) {
            return Err(Error::InvalidParameter("effective permittivities must be finite and at least 1".into()));
        }
        let lx: Vec<f64> = xi.iter().map(|x| x.ln()).collect();
        let ln_excess = |v: &[f64]| -> Vec<f64> { v.iter().map(|e| (e - 1.0).max(EXCESS_FLOOR).ln()).collect() };
        let spline_par = CubicSpline::new(&lx, &ln_excess(&par))?;
        let spline_perp = CubicSpline::new(&lx, &ln_excess(&perp))?;
        Ok(EffectiveEps { xi, par, perp, plasma: None, spline_par, spline_perp })
    }

    /// Fits `ε_∥ = 1 + (ξ_p′/ξ)²` by least squares to samples with
    /// `ξ ≤ xi_max` and stores `ξ_p′`.
    pub fn fit_plasma(&mut self, xi_max: f64) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for (&x, &e) in self.xi.iter().zip(&self.par) {
            if x <= xi_max {
                let w = 1.0 / (x * x);
                num += (e - 1.0) * w;
                den += w * w;
            }
        }
        self.plasma = (den > 0.0 && num > 0.0).then(|| (num / den).sqrt());
        self.plasma
    }

    /// Fitted effective plasma frequency in `c/a`.
    pub fn plasma_frequency(&self) -> Option<f64> {
        self.plasma
    }

    pub fn samples(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.xi, &self.par, &self.perp)
    }

    /// `(ε_∥, ε_⊥)` at `xi`.
    pub fn eval(&self, xi: f64) -> (f64, f64) {
        let (lo, hi) = (self.xi[0], self.xi[self.xi.len() - 1]);
        if xi < lo {
            let n = self.par[0] - 1.0;
            let par = if self.plasma.is_some() { 1.0 + n * (lo / xi).powi(2) } else { self.par[0] };
            (par, self.perp[0])
        } else if xi > hi {
            let last = self.xi.len() - 1;
            let s = (hi / xi).powi(2);
            (1.0 + (self.par[last] - 1.0) * s, 1.0 + (self.perp[last] - 1.0) * s)
        } else {
            let t = xi.ln();
            (1.0 + self.spline_par.eval(t).exp(), 1.0 + self.spline_perp.eval(t).exp())
        }
    }
}

/// A half-space entering an effective-medium force calculation, wires along
/// its local `z`.
#[derive(Debug, Clone, PartialEq)]
pub enum UniaxialSlab {
    /// Retrieved (or imported) tables, in natural units.
    Table(EffectiveEps),
    /// Frequency-independent tensor, e.g. the static limit.
    Constant { par: Eps, perp: Eps },
    /// An isotropic material.
    Isotropic(MaterialModel),
}

impl UniaxialSlab {
    /// `(ε_∥, ε_⊥)` at natural frequency `xi`.
    pub fn at(&self, period: Period, xi: f64) -> (Eps, Eps) {
        match self {
            UniaxialSlab::Table(t) => {
                let (a, b) = t.eval(xi);
                (Eps::Finite(a), Eps::Finite(b))
            }
            UniaxialSlab::Constant { par, perp } => (*par, *perp),
            UniaxialSlab::Isotropic(m) => {
                let e = m.eps_at(period, xi);
                (e, e)
            }
        }
    }
}

/// Retrieval settings for building tables from the exact slab.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalScheme {
    /// In-plane wavevector (along `y`, perpendicular to the wires).
    pub k: f64,
    /// Reciprocal-lattice orders kept in the slab reflection (odd).
    pub n_g: usize,
    pub n_max: usize,
}

impl Default for RetrievalScheme {
    fn default() -> Self {
        RetrievalScheme { k: 1e-4, n_g: 7, n_max: crate::cylwave::DEFAULT_N_MAX }
    }
}

/// Result of a retrieval sweep. Frequencies where the inversion failed are
/// listed in `excluded` and left out of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval {
    pub eps: EffectiveEps,
    pub excluded: Vec<f64>,
}

/// Retrieves effective permittivities of `slab` seen from `fluid` at each of
/// the frequencies `xis` (natural units).
pub fn retrieve_table(
    slab: &SlabSpec,
    fluid: &MaterialModel,
    period: Period,
    xis: &[f64],
    scheme: &RetrievalScheme,
) -> Result<Retrieval> {
    if scheme.n_g % 2 == 0 {
        return Err(Error::InvalidParameter("retrieval N_G must be odd".into()));
    }
    let half = (scheme.n_g / 2) as i32;
    let orders: Vec<i32> = (-half..=half).collect();
    let c = half as usize;
    let n = orders.len();
    let (mut xs, mut par, mut perp, mut excluded) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &xi in xis {
        let ef = fluid.eps_at(period, xi).expect_finite("fluid");
        let r = slab.reflection_at(period, ef, xi, scheme.k, 0.0, &orders, scheme.n_max)?;
        match retrieve_effective_eps(r[(c, c)], r[(n + c, n + c)], ef, xi, scheme.k) {
            Ok((a, b)) if a >= 1.0 - 1e-9 && b >= 1.0 - 1e-9 => {
                xs.push(xi);
                par.push(a.max(1.0));
                perp.push(b.max(1.0));
            }
            _ => excluded.push(xi),
        }
    }
    Ok(Retrieval { eps: EffectiveEps::new(xs, par, perp)?, excluded })
}

/// `n` logarithmically spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Quadrature for effective-medium forces: `ξ` by the rational map, `|k|`
/// on `(0, ∞)`, and the in-plane angle on a quarter turn.
#[derive(Debug, Clone, PartialEq)]
pub struct EmaScheme {
    pub n_xi: usize,
    pub n_k: usize,
    pub n_phi: usize,
}

impl Default for EmaScheme {
    fn default() -> Self {
        EmaScheme { n_xi: 40, n_k: 40, n_phi: 16 }
    }
}

/// Energy per area and pressure between two uniaxial half-spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmaForce {
    pub energy: f64,
    pub pressure: f64,
}

/// Casimir energy and pressure (attraction positive) between two effective
/// half-spaces across `fluid` at separation `d`.
///
/// Slab 2 is described in its own frame; crossed slabs are a quarter turn
/// apart. Both orientations are symmetric under `k_y → -k_y` and
/// `k_z → -k_z`, so the angle runs over `[0, π/2]`.
pub fn ema_pressure(
    slab1: &UniaxialSlab,
    slab2: &UniaxialSlab,
    orientation: Orientation,
    fluid: &MaterialModel,
    period: Period,
    d: f64,
    scheme: &EmaScheme,
) -> Result<EmaForce> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("separation must be positive, got {d}")));
    }
    let fluid_eps = |xi: f64| fluid.eps_at(period, xi).expect_finite("fluid");
    let mut xi0 = 1.0 / d;
    for _ in 0..2 {
        xi0 = 1.0 / (fluid_eps(xi0).sqrt() * d);
    }
    let xi_rule = FrequencyGrid::rational(scheme.n_xi, xi0);
    let k_rule = semi_infinite(scheme.n_k, 0.5 / d);
    let phi_rule = gauss_legendre_on(scheme.n_phi, 0.0, 0.5 * PI);
    let pref = 4.0 / (8.0 * PI * PI * PI);
    let (mut energy, mut pressure) = (0.0, 0.0);
    for (xi, wx) in xi_rule.rule().iter() {
        let ef = fluid_eps(xi);
        let (p1, s1) = slab1.at(period, xi);
        let (p2, s2) = slab2.at(period, xi);
        for (k, wk) in k_rule.iter() {
            let q = qz(ef, xi, k);
            let u = (-q * d).exp();
            for (phi, wp) in phi_rule.iter() {
                let (k_y, k_z) = (k * phi.sin(), k * phi.cos());
                let r1 = uniaxial_reflection_k(p1, s1, ef, xi, k_y, k_z)?;
                let (ly, lz) = match orientation {
                    Orientation::Aligned => (k_y, k_z),
                    Orientation::Crossed => (-k_z, k_y),
                };
                let mut r2 = uniaxial_reflection_k(p2, s2, ef, xi, ly, lz)?;
                // Mirror into the lab frame: TM amplitudes change sign.
                r2.r[0][1] = -r2.r[0][1];
                r2.r[1][0] = -r2.r[1][0];
                let v = log_det_integrand(&r1.to_matrix(), &r2.to_matrix(), &[u, u], &[q, q]).map_err(|_| {
                    Error::NotContractive { xi, ky: k_y, kz: k_z }
                })?;
                let w = pref * wx * wk * k * wp;
                energy += w * v.log_det.re;
                pressure += w * v.d_log_det;
            }
        }
    }
    Ok(EmaForce { energy, pressure })
}

/// First sign change of `f` on `[lo, hi]`, located by scanning `n_scan`
/// logarithmically spaced points and then bisecting to relative width `tol`.
pub fn sign_change(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, n_scan: usize, tol: f64) -> Result<Option<f64>> {
    let grid = log_grid(lo, hi, n_scan.max(2));
    let mut prev = (grid[0], f(grid[0])?);
    for &x in &grid[1..] {
        let fx = f(x)?;
        if (prev.1 > 0.0) != (fx > 0.0) {
            let (mut a, mut fa, mut b) = (prev.0, prev.1, x);
            while (b - a) > tol * a {
                let m = (a * b).sqrt();
                let fm = f(m)?;
                if (fm > 0.0) == (fa > 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            return Ok(Some((a * b).sqrt()));
        }
        prev = (x, fx);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::ideal_plate_pressure;
    use crate::materials::{perfect_metal, vacuum};

    #[test]
    fn fluid_matched_medium_does_not_reflect() {
        let r = uniaxial_reflection(Eps::Finite(2.0), Eps::Finite(2.0), 2.0, 0.7, 1.3, 0.4).unwrap();
        assert_eq!(r.r, [[0.0; 2]; 2]);
        // Same through the general (non-isotropic) path.
        let r = uniaxial_reflection(Eps::Finite(2.0 + 1e-12), Eps::Finite(2.0), 2.0, 0.7, 1.3, 0.4).unwrap();
        assert!(r.r.iter().flatten().all(|x| x.abs() < 1e-11), "{r:?}");
    }

    #[test]
    fn general_path_is_continuous_at_isotropy() {
        for &(xi, k, phi) in &[(0.3, 1.0, 0.2), (2.0, 0.1, 1.1), (0.05, 3.0, 0.8)] {
            let iso = uniaxial_reflection(Eps::Finite(3.0), Eps::Finite(3.0), 1.5, xi, k, phi).unwrap();
            let near = uniaxial_reflection(Eps::Finite(3.0 * (1.0 + 1e-10)), Eps::Finite(3.0), 1.5, xi, k, phi).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((iso.r[i][j] - near.r[i][j]).abs() < 1e-9, "{iso:?} {near:?}");
                }
            }
        }
    }

    #[test]
    fn principal_directions_do_not_mix() {
        for phi in [0.0, 0.5 * PI, PI, 1.5 * PI] {
            let r = uniaxial_reflection(Eps::Finite(9.0), Eps::Finite(2.0), 1.0, 0.4, 0.9, phi).unwrap();
            assert!(r.te_tm().abs() < 1e-14 && r.tm_te().abs() < 1e-14, "{phi} {r:?}");
        }
        // k along y: TE sees ε_∥ and TM sees ε_⊥ as plain Fresnel.
        let r = uniaxial_reflection(Eps::Finite(9.0), Eps::Finite(2.0), 1.0, 0.4, 0.9, 0.5 * PI).unwrap();
        let te = fresnel_reflection(1.0, Eps::Finite(9.0), 0.4, 0.9)[0];
        let tm = fresnel_reflection(1.0, Eps::Finite(2.0), 0.4, 0.9)[1];
        assert!((r.te_te() - te).abs() < 1e-14 && (r.tm_tm() - tm).abs() < 1e-14);
    }

    #[test]
    fn ideal_conductor_along_wires_is_a_limit() {
        let big = uniaxial_reflection(Eps::Finite(1e14), Eps::Finite(3.0), 1.2, 0.5, 0.8, 0.6).unwrap();
        let inf = uniaxial_reflection(Eps::PerfectMetal, Eps::Finite(3.0), 1.2, 0.5, 0.8, 0.6).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((big.r[i][j] - inf.r[i][j]).abs() < 1e-6, "{big:?} {inf:?}");
            }
        }
    }

    #[test]
    fn retrieval_inverts_reflection() {
        for &(par, perp, ef, xi, k) in &[(5.0, 2.0, 1.0, 0.3, 1e-4), (40.0, 3.8, 1.9, 0.01, 0.2), (1.2, 7.0, 1.0, 4.0, 2.0)] {
            let r = uniaxial_reflection_k(Eps::Finite(par), Eps::Finite(perp), ef, xi, k, 0.0).unwrap();
            let (a, b) = retrieve_effective_eps(r.te_te(), r.tm_tm(), ef, xi, k).unwrap();
            assert!((a / par - 1.0).abs() < 1e-10 && (b / perp - 1.0).abs() < 1e-10, "{a} {b}");
        }
        assert!(retrieve_effective_eps(-1.0, 0.0, 1.0, 1.0, 1e-4).is_err());
    }

    #[test]
    fn tables_interpolate_and_extrapolate() {
        let xi = log_grid(0.01, 10.0, 30);
        let par: Vec<f64> = xi.iter().map(|x| 1.0 + (2.0 / x).powi(2)).collect();
        let perp: Vec<f64> = xi.iter().map(|x| 1.0 + 2.0 / (1.0 + x * x)).collect();
        let mut t = EffectiveEps::new(xi, par, perp).unwrap();
        let wp = t.fit_plasma(0.1).unwrap();
        assert!((wp - 2.0).abs() < 1e-12);
        let (a, b) = t.eval(0.37);
        assert!((a / (1.0 + (2.0 / 0.37f64).powi(2)) - 1.0).abs() < 1e-6);
        assert!((b / (1.0 + 2.0 / (1.0 + 0.37 * 0.37)) - 1.0).abs() < 1e-3);
        assert!((t.eval(1e-3).0 / (1.0 + 4e6) - 1.0).abs() < 1e-9);
        assert!(EffectiveEps::new(alloc::vec![1.0, 2.0], alloc::vec![0.5, 1.0], alloc::vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn isotropic_metal_half_spaces_give_ideal_plates() {
        let pm = UniaxialSlab::Isotropic(perfect_metal().model);
        for d in [0.5, 2.0] {
            let f = ema_pressure(&pm, &pm, Orientation::Crossed, &vacuum().model, Period::Infinite, d, &EmaScheme::default()).unwrap();
            let p0 = ideal_plate_pressure(d);
            assert!((f.pressure / p0 - 1.0).abs() < 1e-3, "{}", f.pressure / p0);
            let e0 = -PI * PI / (720.0 * d * d * d);
            assert!((f.energy / e0 - 1.0).abs() < 1e-3, "{}", f.energy / e0);
        }
    }

    #[test]
    fn sign_change_brackets_root() {
        let x = sign_change(|x| Ok(x - 0.7), 0.1, 5.0, 20, 1e-10).unwrap().unwrap();
        assert!((x - 0.7).abs() < 1e-9);
        assert_eq!(sign_change(|x| Ok(x), 0.1, 5.0, 20, 1e-6).unwrap(), None);
    }
}
