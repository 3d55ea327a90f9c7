//! Scattering by a periodic row of parallel cylinders.
//!
//! Slab frame: `x` is the slab normal (pointing out of the slab, into the
//! fluid), the wires run along `z` and repeat along `y` with period 1. Wire
//! centres sit at `x = -r`, so the wire tops touch the plane `x = 0`, which is
//! the reference plane of every reflection matrix built here.
//!
//! Cylindrical fields are described by the axial potentials `E_z`, `H_z`:
//! regular waves `I_n(κρ) e^{inθ}` and outgoing waves `K_n(κρ) e^{inθ}`,
//! `κ = √(k_z² + ε ξ²)`, with `θ` measured from `x` toward `y`. The
//! polarization labelled [`CylPol::N`] carries `E_z`, [`CylPol::M`] carries
//! `H_z`.
//!
//! Large and small Bessel factors are kept apart by working with the balanced
//! operators `T̂ = Σ⁻¹ T Σ⁻¹`, `Σ_n = √(I_n(κr)/K_n(κr))`, and by summing
//! planewave conversion factors in log space.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use crate::layers::{slab_reflection, Interface, Pol};
use crate::linalg::{Lu, RMatrix};
use crate::materials::{Eps, MaterialModel};
use crate::special::{i_log_derivative, k_scaled_into, BesselTable};
use crate::units::Period;
use crate::{Error, Result};

/// Cylindrical polarization: `N` has `E_z`, `M` has `H_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CylPol {
    N = 0,
    M = 1,
}

/// One cylindrical wave. Cylinder-mode index is `2 (n + n_max) + pol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CylindricalMode {
    pub pol: CylPol,
    pub n: i32,
}

impl CylindricalMode {
    pub fn index(self, n_max: usize) -> usize {
        2 * (self.n + n_max as i32) as usize + self.pol as usize
    }
}

/// Default multipole cutoff.
pub const DEFAULT_N_MAX: usize = 10;

/// Pivot ratio above which the multiple-scattering solve is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative accuracy requested from the lattice sums.
pub const LATTICE_TOL: f64 = 1e-10;

/// One row of wires embedded in a medium.
#[derive(Debug, Clone, PartialEq)]
pub struct WireArraySpec {
    /// Radius in units of the period.
    pub radius: f64,
    pub wire: MaterialModel,
    pub medium: MaterialModel,
}

/// Array permittivities at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayEps {
    pub radius: f64,
    pub wire: Eps,
    pub medium: f64,
}

impl WireArraySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius < 0.5) {
            return Err(Error::InvalidParameter(alloc::format!(
                "wire radius {} must lie in (0, a/2)",
                self.radius
            )));
        }
        if matches!(self.medium, MaterialModel::PerfectMetal) {
            return Err(Error::InvalidParameter("wires cannot be embedded in a perfect metal".into()));
        }
        self.wire.validate()?;
        self.medium.validate()
    }

    pub fn at(&self, period: Period, xi: f64) -> ArrayEps {
        ArrayEps {
            radius: self.radius,
            wire: self.wire.eps_at(period, xi),
            medium: self.medium.eps_at(period, xi).expect_finite("embedding medium"),
        }
    }
}

/// `κ = √(k_z² + ε ξ²)`.
#[inline]
pub fn kappa(eps: f64, xi: f64, kz: f64) -> f64 {
    (kz * kz + eps * xi * xi).sqrt()
}

/// Isolated-cylinder T-matrix, block-diagonal in `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderT0 {
    pub n_max: usize,
    pub kappa: f64,
    pub radius: f64,
    /// Balanced 2×2 blocks `t̂_n` (rows/cols `N`, `M`), `n = -n_max..=n_max`.
    pub blocks: Vec<[[f64; 2]; 2]>,
    /// `ln Σ_n = ½ ln(I_n(κr)/K_n(κr))`.
    pub ln_sigma: Vec<f64>,
}

impl CylinderT0 {
    pub fn block(&self, n: i32) -> [[f64; 2]; 2] {
        self.blocks[(n + self.n_max as i32) as usize]
    }

    /// Unbalanced block `T₀ = (I_n/K_n) t̂_n`.
    pub fn element(&self, n: i32) -> [[f64; 2]; 2] {
        let i = (n + self.n_max as i32) as usize;
        let s = (2.0 * self.ln_sigma[i]).exp();
        let b = self.blocks[i];
        [[s * b[0][0], s * b[0][1]], [s * b[1][0], s * b[1][1]]]
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().flatten().all(|&v| v == 0.0))
    }
}

/// T-matrix of one cylinder mapping regular to outgoing `(E_z, H_z)`
/// coefficients.
pub fn cylinder_tmatrix0(arr: &ArrayEps, xi: f64, kz: f64, n_max: usize) -> CylinderT0 {
    assert!(xi > 0.0, "cylinder T-matrix needs xi > 0");
    let r = arr.radius;
    let eps = arr.medium;
    let kap = kappa(eps, xi, kz);
    let x = kap * r;
    let tab = BesselTable::new(n_max, x);
    let ln_sigma: Vec<f64> = (-(n_max as i32)..=n_max as i32)
        .map(|n| {
            let a = n.unsigned_abs() as usize;
            0.5 * (tab.i[a].ln() - tab.k[a].ln()) + x
        })
        .collect();
    let mut blocks = vec![[[0.0; 2]; 2]; 2 * n_max + 1];
    match arr.wire {
        Eps::Finite(e1) if e1 == eps => {}
        Eps::PerfectMetal => {
            for (i, n) in (-(n_max as i32)..=n_max as i32).enumerate() {
                let a = n.unsigned_abs() as usize;
                blocks[i] = [[-1.0, 0.0], [0.0, -tab.di[a] / tab.dk[a]]];
            }
        }
        Eps::Finite(e1) => {
            let kap1 = kappa(e1, xi, kz);
            let x1 = kap1 * r;
            for (i, n) in (-(n_max as i32)..=n_max as i32).enumerate() {
                let a = n.unsigned_abs() as usize;
                let d = i_log_derivative(a, x1);
                let c = kz * n as f64 / r * (1.0 / (kap1 * kap1) - 1.0 / (kap * kap));
                let (di, dk) = (tab.di[a], tab.dk[a]);
                let aa = [
                    [c, -xi / kap1 * d + xi / kap * dk],
                    [xi * e1 / kap1 * d - xi * eps / kap * dk, c],
                ];
                let bb = [
                    [c, -xi / kap1 * d + xi / kap * di],
                    [xi * e1 / kap1 * d - xi * eps / kap * di, c],
                ];
                let det = aa[0][0] * aa[1][1] - aa[0][1] * aa[1][0];
                let inv = [[aa[1][1] / det, -aa[0][1] / det], [-aa[1][0] / det, aa[0][0] / det]];
                for p in 0..2 {
                    for q in 0..2 {
                        blocks[i][p][q] = -(inv[p][0] * bb[0][q] + inv[p][1] * bb[1][q]);
                    }
                }
            }
        }
    }
    CylinderT0 { n_max, kappa: kap, radius: r, blocks, ln_sigma }
}

/// A lattice sum with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSum {
    pub value: f64,
    /// Bound on the neglected terms `|j| > terms`.
    pub tail_bound: f64,
    pub terms: usize,
}

/// Starting cutoff `J = max(16, ⌈10/κ⌉)`.
pub fn default_cutoff(kappa: f64) -> usize {
    16usize.max((10.0 / kappa).ceil().min(1e7) as usize)
}

/// `S_m = Σ_{j≠0} e^{i k_y j} K_m(|j| κ) e^{-i m θ_j}`, `θ_j = sign(j) π/2`.
///
/// The sum is real: `S_m = 2 Σ_{j≥1} K_{|m|}(jκ) cos(j k_y - m π/2)`. With
/// `cutoff = None` the cutoff starts at [`default_cutoff`] and doubles until the
/// tail bound drops below [`LATTICE_TOL`] of the summed magnitudes.
pub fn lattice_sum(kappa: f64, k_y: f64, m: i32, cutoff: Option<usize>) -> LatticeSum {
    assert!(kappa > 0.0);
    let a = m.unsigned_abs() as usize;
    let mut buf = vec![0.0; a + 1];
    let mut value = 0.0;
    let mut mag = 0.0;
    let mut j = 0usize;
    let mut target = cutoff.unwrap_or_else(|| default_cutoff(kappa));
    loop {
        while j < target {
            j += 1;
            let x = j as f64 * kappa;
            k_scaled_into(x, &mut buf);
            let t = 2.0 * buf[a] * (-x).exp();
            value += t * (j as f64 * k_y - m as f64 * FRAC_PI_2).cos();
            mag += t;
        }
        let tail = tail_bound(kappa, j, a);
        if cutoff.is_some() || tail <= LATTICE_TOL * mag || tail == 0.0 {
            return LatticeSum { value, tail_bound: tail, terms: j };
        }
        target = 2 * j;
    }
}

/// Bound on `2 Σ_{j>J} K_m(jκ)`, from `e^x K_m(x)` being decreasing.
fn tail_bound(kappa: f64, j: usize, m: usize) -> f64 {
    let x = (j + 1) as f64 * kappa;
    let mut buf = vec![0.0; m + 1];
    k_scaled_into(x, &mut buf);
    2.0 * buf[m] * (-x).exp() / (1.0 - (-kappa).exp())
}

/// Balanced lattice operator `Ŝ_{n'n} = Σ_{n'} S_{n'-n} (-1)^n Σ_n` over
/// `n, n' ∈ [-n_max, n_max]`, plus the largest relative tail bound.
pub fn balanced_lattice_matrix(kappa: f64, k_y: f64, ln_sigma: &[f64], n_max: usize) -> (RMatrix, f64) {
    let nm = 2 * n_max;
    let size = 2 * n_max + 1;
    let mut buf = vec![0.0; nm + 1];
    let mut s = vec![0.0; 2 * nm + 1]; // S_m for m = -nm..=nm
    let mut mag = vec![0.0; nm + 1];
    let mut j = 0usize;
    let mut target = default_cutoff(kappa);
    let worst = loop {
        while j < target {
            j += 1;
            let x = j as f64 * kappa;
            k_scaled_into(x, &mut buf);
            let e = 2.0 * (-x).exp();
            let (sn, cs) = (j as f64 * k_y).sin_cos();
            for a in 0..=nm {
                let t = e * buf[a];
                mag[a] += t;
                // cos(jk - mπ/2) for m = ±a
                let (c_plus, c_minus) = match a % 4 {
                    0 => (cs, cs),
                    1 => (sn, -sn),
                    2 => (-cs, -cs),
                    _ => (-sn, sn),
                };
                s[nm + a] += t * c_plus;
                if a > 0 {
                    s[nm - a] += t * c_minus;
                }
            }
        }
        let x = (j + 1) as f64 * kappa;
        k_scaled_into(x, &mut buf);
        let geo = 2.0 * (-x).exp() / (1.0 - (-kappa).exp());
        let worst = (0..=nm).map(|a| buf[a] * geo / mag[a]).fold(0.0, f64::max);
        if worst <= LATTICE_TOL || !worst.is_finite() {
            break worst;
        }
        target = 2 * j;
    };
    let m = RMatrix::from_fn(size, size, |ip, i| {
        let n = i as i32 - n_max as i32;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let d = ip as i32 - i as i32;
        sign * s[(nm as i32 + d) as usize] * (ln_sigma[ip] + ln_sigma[i]).exp()
    });
    (m, worst)
}

/// Dressed array T-matrix in balanced form, `T̂ = (1 - t̂ Ŝ)⁻¹ t̂`, over
/// cylinder modes ordered as in [`CylindricalMode::index`].
pub fn array_tmatrix(t0: &CylinderT0, s_hat: &RMatrix, node: (f64, f64, f64)) -> Result<RMatrix> {
    let size = 2 * t0.n_max + 1;
    let dim = 2 * size;
    let mut tb = RMatrix::zeros(dim, dim);
    for i in 0..size {
        let b = t0.blocks[i];
        for p in 0..2 {
            for q in 0..2 {
                tb[(2 * i + p, 2 * i + q)] = b[p][q];
            }
        }
    }
    if t0.is_zero() {
        return Ok(tb);
    }
    // 1 - t̂ (Ŝ ⊗ 1₂)
    let a = RMatrix::from_fn(dim, dim, |row, col| {
        let (i, p) = (row / 2, row % 2);
        let (jj, q) = (col / 2, col % 2);
        let b = t0.blocks[i];
        let v = b[p][q] * s_hat[(i, jj)];
        let delta = if row == col { 1.0 } else { 0.0 };
        delta - v
    });
    let (xi, ky, kz) = node;
    let lu = Lu::factor(a).map_err(|_| Error::IllConditioned { xi, ky, kz, cond: f64::INFINITY })?;
    let cond = lu.pivot_ratio();
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned { xi, ky, kz, cond });
    }
    lu.solve_in_place(&mut tb);
    Ok(tb)
}

/// Maps `(A, B)` amplitudes (TE, TM) of a planewave to its `(E_z, H_z)`
/// components. `up` selects the direction of travel along `x`.
fn amplitude_to_potentials(eps: f64, xi: f64, ky: f64, kz: f64, up: bool) -> [[f64; 2]; 2] {
    let p = (ky * ky + kz * kz).sqrt();
    let q = (eps * xi * xi + p * p).sqrt();
    let s = if up { 1.0 } else { -1.0 };
    [[ky / p, s * q * kz / (xi * eps * p)], [-s * q * kz / (xi * p), ky / p]]
}

/// TE/TM are undefined for a mode at exactly normal incidence.
fn check_in_plane(k_y: f64, kz: f64, orders: &[i32]) -> Result<()> {
    for &m in orders {
        let k = k_y + 2.0 * PI * m as f64;
        if k * k + kz * kz == 0.0 {
            return Err(Error::InvalidParameter("planewave mode at exactly normal incidence".into()));
        }
    }
    Ok(())
}

fn inv2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

/// Reflection of the bare array (wires in a uniform medium) in the planewave
/// basis: rows and columns are `pol * orders.len() + i` with `pol` = TE, TM
/// and `orders[i]` the diffraction order along `y`. Referenced to the tangent
/// plane `x = 0`, for down-going incidence from `x > 0`.
///
/// Reciprocity makes `q_i w_i R_ij = q_j w_j R_ji`, with `q_i` the normal
/// wavevector of mode `i` and `w = 1` (TE) or `-1/ε` (TM).
pub fn array_reflection(arr: &ArrayEps, xi: f64, k_y: f64, kz: f64, orders: &[i32], n_max: usize) -> Result<RMatrix> {
    let nm = orders.len();
    check_in_plane(k_y, kz, orders)?;
    let t0 = cylinder_tmatrix0(arr, xi, kz, n_max);
    if t0.is_zero() {
        return Ok(RMatrix::zeros(2 * nm, 2 * nm));
    }
    let (s_hat, _) = balanced_lattice_matrix(t0.kappa, k_y, &t0.ln_sigma, n_max);
    let t = array_tmatrix(&t0, &s_hat, (xi, k_y, kz))?;
    Ok(reflection_from_tmatrix(arr, xi, k_y, kz, orders, &t0, &t))
}

/// Planewave reflection from a balanced array T-matrix.
pub fn reflection_from_tmatrix(
    arr: &ArrayEps,
    xi: f64,
    k_y: f64,
    kz: f64,
    orders: &[i32],
    t0: &CylinderT0,
    t: &RMatrix,
) -> RMatrix {
    let n_max = t0.n_max;
    let size = 2 * n_max + 1;
    let nm = orders.len();
    let kap = t0.kappa;
    let r = arr.radius;
    let eps = arr.medium;
    // W[m][n] = ((q+k)/κ)^n Σ_n e^{-q r}
    let mut w = vec![0.0; nm * size];
    let mut qs = vec![0.0; nm];
    for (im, &m) in orders.iter().enumerate() {
        let k = k_y + 2.0 * PI * m as f64;
        let q = (kap * kap + k * k).sqrt();
        qs[im] = q;
        let l = if k >= 0.0 { (q + k).ln() - kap.ln() } else { kap.ln() - (q - k).ln() };
        for i in 0..size {
            let n = i as f64 - n_max as f64;
            w[im * size + i] = (n * l + t0.ln_sigma[i] - q * r).exp();
        }
    }
    // Potentials out (E_z, H_z at order m) per potentials in (order m').
    let mut out = RMatrix::zeros(2 * nm, 2 * nm);
    // tw[(cyl row), (m', pol_in)] = Σ_{n'} T̂[row, (n', pol_in)] W[m', n']
    let dim = 2 * size;
    let mut tw = vec![0.0; dim * 2 * nm];
    for row in 0..dim {
        for (jm, _) in orders.iter().enumerate() {
            for b in 0..2 {
                let mut acc = 0.0;
                for i in 0..size {
                    acc += t[(row, 2 * i + b)] * w[jm * size + i];
                }
                tw[row * 2 * nm + 2 * jm + b] = acc;
            }
        }
    }
    for (im, &m) in orders.iter().enumerate() {
        let k_out = k_y + 2.0 * PI * m as f64;
        let c_up = inv2(amplitude_to_potentials(eps, xi, k_out, kz, true));
        let pref = PI / qs[im];
        for (jm, &mp) in orders.iter().enumerate() {
            let k_in = k_y + 2.0 * PI * mp as f64;
            let c_down = amplitude_to_potentials(eps, xi, k_in, kz, false);
            let mut pot = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    let mut acc = 0.0;
                    for i in 0..size {
                        acc += w[im * size + i] * tw[(2 * i + a) * 2 * nm + 2 * jm + b];
                    }
                    pot[a][b] = pref * acc;
                }
            }
            for a in 0..2 {
                for b in 0..2 {
                    let mut v = 0.0;
                    for c in 0..2 {
                        for d in 0..2 {
                            v += c_up[a][c] * pot[c][d] * c_down[d][b];
                        }
                    }
                    out[(a * nm + im, b * nm + jm)] = v;
                }
            }
        }
    }
    out
}

/// A patterned slab: wires embedded in a substrate, tangent to its surface,
/// facing a fluid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabEps {
    pub radius: f64,
    pub wire: Eps,
    pub substrate: Eps,
    pub fluid: f64,
}

/// Full reflection of a patterned slab seen from the fluid, same basis and
/// reference plane as [`array_reflection`].
pub fn patterned_slab_reflection(
    slab: &SlabEps,
    xi: f64,
    k_y: f64,
    kz: f64,
    orders: &[i32],
    n_max: usize,
) -> Result<RMatrix> {
    let nm = orders.len();
    check_in_plane(k_y, kz, orders)?;
    let mut iface = Vec::with_capacity(2 * nm);
    for pol in Pol::BOTH {
        for &m in orders {
            let k = k_y + 2.0 * PI * m as f64;
            let p = (k * k + kz * kz).sqrt();
            iface.push(Interface::new(slab.fluid, slab.substrate, xi, p, pol));
        }
    }
    let bare = match slab.substrate {
        Eps::PerfectMetal => RMatrix::zeros(2 * nm, 2 * nm),
        Eps::Finite(_) if slab.wire == slab.substrate => RMatrix::zeros(2 * nm, 2 * nm),
        Eps::Finite(es) => {
            let arr = ArrayEps { radius: slab.radius, wire: slab.wire, medium: es };
            array_reflection(&arr, xi, k_y, kz, orders, n_max)?
        }
    };
    slab_reflection(&bare, &iface)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::fresnel_reflection;
    use num_complex::Complex64;

    fn vac(radius: f64, wire: Eps) -> ArrayEps {
        ArrayEps { radius, wire, medium: 1.0 }
    }

    #[test]
    fn perfect_metal_axial_order_zero() {
        // -I0(x)/K0(x) from scipy.special.
        for (xi, want) in [(1.0, -0.7451050189001771), (2.5, -1.8763179818915214)] {
            let t = cylinder_tmatrix0(&vac(0.3, Eps::PerfectMetal), xi, 0.0, 4);
            let got = t.element(0)[0][0];
            assert!((got - want).abs() < 1e-13 * want.abs(), "{got} {want}");
            assert_eq!(t.element(0)[0][1], 0.0);
        }
    }

    #[test]
    fn same_material_does_not_scatter() {
        let arr = ArrayEps { radius: 0.3, wire: Eps::Finite(2.1), medium: 2.1 };
        assert!(cylinder_tmatrix0(&arr, 0.7, 1.3, 8).is_zero());
        let r = array_reflection(&arr, 0.7, 0.2, 1.3, &[-1, 0, 1], 8).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        let slab = SlabEps { radius: 0.3, wire: Eps::Finite(2.1), substrate: Eps::Finite(2.1), fluid: 2.1 };
        assert_eq!(patterned_slab_reflection(&slab, 0.7, 0.2, 1.3, &[-1, 0, 1], 8).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn thin_wire_matches_born_polarizability() {
        // Born: 2D Green function -K0/2π with source ξ² Δε E_z over area πr².
        let (de, xi) = (1.5, 0.8);
        for r in [1e-3, 2e-3] {
            let t = cylinder_tmatrix0(&vac(r, Eps::Finite(1.0 + de)), xi, 0.0, 3);
            let want = -de * xi * xi * r * r / 2.0;
            let got = t.element(0)[0][0];
            assert!(((got - want) / want).abs() < 1e-4, "{got} {want}");
        }
        let a = cylinder_tmatrix0(&vac(1e-3, Eps::Finite(2.5)), 0.8, 0.0, 0).element(0)[0][0];
        let b = cylinder_tmatrix0(&vac(5e-4, Eps::Finite(2.5)), 0.8, 0.0, 0).element(0)[0][0];
        assert!((a / b - 4.0).abs() < 1e-3);
    }

    #[test]
    fn strong_dielectric_approaches_perfect_metal_with_mixing() {
        let pec = cylinder_tmatrix0(&vac(0.3, Eps::PerfectMetal), 0.9, 1.7, 5);
        let die = cylinder_tmatrix0(&vac(0.3, Eps::Finite(1e12)), 0.9, 1.7, 5);
        for n in -5..=5 {
            let (p, d) = (pec.block(n), die.block(n));
            for i in 0..2 {
                for j in 0..2 {
                    assert!((p[i][j] - d[i][j]).abs() < 1e-4, "n={n} {i}{j}: {} {}", p[i][j], d[i][j]);
                }
            }
        }
        // Polarization mixing is present for a finite dielectric at k_z ≠ 0.
        let mixed = cylinder_tmatrix0(&vac(0.3, Eps::Finite(4.0)), 0.9, 1.7, 2);
        assert!(mixed.block(1)[0][1].abs() > 1e-3);
        assert!((mixed.block(1)[0][1] + mixed.block(-1)[0][1]).abs() < 1e-14);
    }

    #[test]
    fn lattice_sums_match_reference_and_brute_force() {
        // Direct complex sums over |j| ≤ 60 (scipy.special.kv).
        let refs = [(0, 0.4247759580860617), (1, 0.6340194228602688), (-2, -1.3085001154561873), (3, -4.365867385405271)];
        for (m, want) in refs {
            let s = lattice_sum(1.3, 0.7, m, None);
            assert!((s.value - want).abs() < 2.0 * LATTICE_TOL * want.abs().max(1.0), "{m}: {}", s.value);
            assert!(s.tail_bound < 1e-3 * s.value.abs());
        }
        for (kap, ky, m) in [(0.05, 0.3, 0), (0.2, -2.0, 3), (0.01, 3.0, 1), (1.0, 0.0, 5)] {
            let s = lattice_sum(kap, ky, m, None);
            let brute = lattice_sum(kap, ky, m, Some(10 * s.terms));
            assert!((s.value - brute.value).abs() <= s.tail_bound * 1.0001 + 1e-14 * s.value.abs());
        }
    }

    #[test]
    fn lattice_sum_symmetry_and_decay() {
        for m in -4..=4 {
            let a = lattice_sum(0.4, 1.1, m, None).value;
            let b = lattice_sum(0.4, -1.1, m, None).value;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert!((b - sign * a).abs() < 1e-12 * a.abs().max(1.0));
        }
        assert!(lattice_sum(50.0, 0.3, 2, None).value.abs() < (-45f64).exp());
    }

    #[test]
    fn balanced_matrix_is_consistent_with_lattice_sums() {
        let t0 = cylinder_tmatrix0(&vac(0.3, Eps::Finite(3.0)), 0.6, 0.4, 4);
        let (s, tail) = balanced_lattice_matrix(t0.kappa, 0.9, &t0.ln_sigma, 4);
        assert!(tail < 1e-9);
        for ip in 0..9 {
            for i in 0..9 {
                let n = i as i32 - 4;
                let d = ip as i32 - i as i32;
                let raw = lattice_sum(t0.kappa, 0.9, d, None).value;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let want = sign * raw * (t0.ln_sigma[ip] + t0.ln_sigma[i]).exp();
                assert!((s[(ip, i)] - want).abs() < 1e-9 * want.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn graf_translation_reproduces_neighbour_fields() {
        // Field of all other cylinders at a point near the origin, summed
        // directly, versus the regular-wave expansion Σ (-1)^n S_{n'-n} I_{n'}.
        let (kap, ky) = (1.3, 0.7);
        let (rho, th) = (0.25f64, 0.8f64);
        let (x, y) = (rho * th.cos(), rho * th.sin());
        let tab = BesselTable::new(26, kap * rho);
        let ival = |n: i32| tab.i[n.unsigned_abs() as usize] * (kap * rho).exp();
        for n in [0i32, 1, -2, 3] {
            let mut direct = Complex64::new(0.0, 0.0);
            for j in -80i32..=80 {
                if j == 0 {
                    continue;
                }
                let (xx, yy) = (x, y - j as f64);
                let d = (xx * xx + yy * yy).sqrt();
                let mut kb = vec![0.0; n.unsigned_abs() as usize + 1];
                k_scaled_into(kap * d, &mut kb);
                let kn = kb[n.unsigned_abs() as usize] * (-kap * d).exp();
                direct += Complex64::from_polar(kn, ky * j as f64 + n as f64 * yy.atan2(xx));
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let mut series = Complex64::new(0.0, 0.0);
            for np in -25i32..=25 {
                let s = lattice_sum(kap, ky, np - n, None).value;
                series += Complex64::from_polar(sign * s * ival(np), np as f64 * th);
            }
            assert!((direct - series).norm() < 1e-9 * direct.norm(), "{n}: {direct} {series}");
        }
    }

    #[test]
    fn array_tmatrix_reduces_to_born_series_for_weak_wires() {
        let t0 = cylinder_tmatrix0(&vac(0.2, Eps::Finite(1.001)), 0.5, 0.3, 4);
        let (s, _) = balanced_lattice_matrix(t0.kappa, 0.4, &t0.ln_sigma, 4);
        let t = array_tmatrix(&t0, &s, (0.5, 0.4, 0.3)).unwrap();
        let dim = 18;
        let tb = RMatrix::from_fn(dim, dim, |r, c| if r / 2 == c / 2 { t0.blocks[r / 2][r % 2][c % 2] } else { 0.0 });
        let s2 = RMatrix::from_fn(dim, dim, |r, c| if r % 2 == c % 2 { s[(r / 2, c / 2)] } else { 0.0 });
        let born = tb.matmul(&s2).matmul(&tb);
        let scale = tb.max_abs();
        for r in 0..dim {
            for c in 0..dim {
                let second = tb[(r, c)] + born[(r, c)];
                assert!((t[(r, c)] - second).abs() < 1e-3 * scale * scale, "{r} {c}");
            }
        }
        let zero = RMatrix::zeros(9, 9);
        assert_eq!(array_tmatrix(&t0, &zero, (0.5, 0.4, 0.3)).unwrap(), tb);
    }

    #[test]
    fn thin_wire_array_matches_born_sheet() {
        // A row of thin wires acts like a sheet of excess permittivity Δε πr²:
        // r_TE ≈ -ξ² Δε π r² / (2q) at k_z = 0, E along the wires.
        let (de, r, xi, ky) = (1.0, 0.02, 1.0, 1e-3);
        let arr = vac(r, Eps::Finite(1.0 + de));
        let rm = array_reflection(&arr, xi, ky, 0.0, &[-1, 0, 1], 6).unwrap();
        let q = (xi * xi + ky * ky).sqrt();
        let want = -xi * xi * de * PI * r * r / (2.0 * q) * (-2.0 * q * r).exp();
        let got = rm[(1, 1)];
        assert!(((got - want) / want).abs() < 0.02, "{got} {want}");
        assert!(rm[(4, 1)].abs() < 1e-3 * want.abs());
    }

    #[test]
    fn multipole_truncation_converges() {
        let arr = ArrayEps { radius: 0.3, wire: Eps::Finite(50.0), medium: 2.1 };
        let orders = [-2, -1, 0, 1, 2];
        let a = array_reflection(&arr, 0.5, 0.7, 0.9, &orders, 10).unwrap();
        let b = array_reflection(&arr, 0.5, 0.7, 0.9, &orders, 14).unwrap();
        let mut diff = 0.0f64;
        for i in 0..10 {
            for j in 0..10 {
                diff = diff.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        assert!(diff < 1e-4 * a.max_abs(), "{diff}");
    }

    fn reciprocity_defect(r: &RMatrix, eps: f64, xi: f64, k_y: f64, kz: f64, orders: &[i32]) -> f64 {
        let nm = orders.len();
        let weight = |i: usize| {
            let k = k_y + 2.0 * PI * orders[i % nm] as f64;
            let q = (eps * xi * xi + k * k + kz * kz).sqrt();
            if i < nm { q } else { -q / eps }
        };
        let mut worst = 0.0f64;
        for i in 0..2 * nm {
            for j in 0..2 * nm {
                let d = weight(i) * r[(i, j)] - weight(j) * r[(j, i)];
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn array_and_slab_are_reciprocal(
            radius in 0.05f64..0.45, ew in 1.0f64..40.0, es in 1.0f64..4.0, ef in 1.0f64..3.0,
            xi in 0.05f64..3.0, ky in 0.01f64..3.1, kz in -4.0f64..4.0, flip in proptest::bool::ANY,
        ) {
            let orders = [-2, -1, 0, 1, 2];
            let ky = if flip { -ky } else { ky };
            let arr = ArrayEps { radius, wire: Eps::Finite(ew), medium: es };
            let r = array_reflection(&arr, xi, ky, kz, &orders, 8).unwrap();
            proptest::prop_assert!(reciprocity_defect(&r, es, xi, ky, kz, &orders) < 1e-9 * (1.0 + r.max_abs()));
            let slab = SlabEps { radius, wire: Eps::Finite(ew), substrate: Eps::Finite(es), fluid: ef };
            let r = patterned_slab_reflection(&slab, xi, ky, kz, &orders, 8).unwrap();
            proptest::prop_assert!(r.is_finite());
            proptest::prop_assert!(reciprocity_defect(&r, ef, xi, ky, kz, &orders) < 1e-9 * (1.0 + r.max_abs()));
        }
    }

    #[test]
    fn wireless_slab_is_fresnel() {
        let slab = SlabEps { radius: 0.3, wire: Eps::Finite(2.1), substrate: Eps::Finite(2.1), fluid: 1.8 };
        let orders = [-1, 0, 1];
        let r = patterned_slab_reflection(&slab, 0.6, 0.3, 0.5, &orders, 6).unwrap();
        for (pol, _) in Pol::BOTH.iter().enumerate() {
            for (i, &m) in orders.iter().enumerate() {
                let k = 0.3 + 2.0 * PI * m as f64;
                let p = (k * k + 0.25f64).sqrt();
                let want = fresnel_reflection(1.8, Eps::Finite(2.1), 0.6, p)[pol];
                assert!((r[(pol * 3 + i, pol * 3 + i)] - want).abs() < 1e-15);
            }
        }
    }
}
