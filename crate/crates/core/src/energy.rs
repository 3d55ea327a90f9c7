//! Casimir energy and pressure between two slabs.
//!
//! Slab 1 occupies `x < 0` and slab 2 `x > d`, both facing a fluid. The energy
//! per unit area is
//!
//! ```text
//! E = 1/(2π) ∫dξ ∫d²k/(2π)² log det(1 - R₁ U† R₂ U)
//! ```
//!
//! with `U = diag(e^{-q_G d} e^{i(k_y+G_y) y})`. The pressure is returned as
//! `P = ∂E/∂d`, so attraction is positive, evaluated at every node by
//!
//! ```text
//! ∂_d log det(1 - M) = Tr[(1 - M)⁻¹ R₁ (Q N + N Q)],   N = U† R₂ U.
//! ```
//!
//! Slab 2 is described in its own frame (normal pointing into the fluid). The
//! mirror `x → -x` leaves TE amplitudes alone and flips TM amplitudes, so its
//! lab-frame reflection is `P R P` with `P = diag(1, -1)` per polarization.
//! In the crossed orientation its frame is also rotated a quarter turn about
//! the normal, which maps lab `(k_y, k_z)` to local `(-k_z, k_y)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cylwave::{patterned_slab_reflection, SlabEps, DEFAULT_N_MAX};
use crate::layers::{multilayer_reflection, Layer, Pol, StackEps};
use crate::linalg::{Lu, Matrix, RMatrix, Scalar};
use crate::materials::MaterialModel;
use crate::quadrature::{clustered, semi_infinite, FrequencyGrid, Rule};
use crate::units::Period;
use crate::{Error, Result};

/// Relative orientation of the two wire arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Both arrays run along `z`.
    Aligned,
    /// Slab 2 runs along `y`.
    Crossed,
}

/// One slab as seen from the fluid.
#[derive(Debug, Clone, PartialEq)]
pub enum SlabSpec {
    /// Planar layers on a substrate (layers listed from the fluid side).
    Planar { layers: Vec<Layer>, substrate: MaterialModel },
    /// Wires of radius `radius` (in `a`) embedded in `substrate`, tangent to
    /// its surface, period 1 along the array axis.
    Wires { radius: f64, wire: MaterialModel, substrate: MaterialModel },
}

impl SlabSpec {
    pub fn half_space(substrate: MaterialModel) -> Self {
        SlabSpec::Planar { layers: Vec::new(), substrate }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SlabSpec::Planar { layers, substrate } => {
                substrate.validate()?;
                for l in layers {
                    l.model.validate()?;
                    if !(l.thickness > 0.0) {
                        return Err(Error::InvalidParameter("layer thickness must be positive".into()));
                    }
                }
                Ok(())
            }
            SlabSpec::Wires { radius, wire, substrate } => {
                if !(*radius > 0.0 && *radius < 0.5) {
                    return Err(Error::InvalidParameter(alloc::format!("wire radius {radius} outside (0, a/2)")));
                }
                wire.validate()?;
                substrate.validate()
            }
        }
    }

    /// Reflection in the slab's own frame for fluid permittivity `fluid`,
    /// modes `pol * orders.len() + i`.
    #[allow(clippy::too_many_arguments)]
    pub fn reflection_at(
        &self,
        period: Period,
        fluid: f64,
        xi: f64,
        k_y: f64,
        k_z: f64,
        orders: &[i32],
        n_max: usize,
    ) -> Result<RMatrix> {
        self.at(period, xi, fluid).reflection(xi, k_y, k_z, orders, n_max)
    }

    fn at(&self, period: Period, xi: f64, fluid: f64) -> SlabAt {
        match self {
            SlabSpec::Planar { layers, substrate } => SlabAt::Planar(StackEps {
                cover: fluid,
                layers: layers.iter().map(|l| (l.model.eps_at(period, xi), l.thickness)).collect(),
                substrate: substrate.eps_at(period, xi),
            }),
            SlabSpec::Wires { radius, wire, substrate } => SlabAt::Wires(SlabEps {
                radius: *radius,
                wire: wire.eps_at(period, xi),
                substrate: substrate.eps_at(period, xi),
                fluid,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SlabAt {
    Planar(StackEps),
    Wires(SlabEps),
}

impl SlabAt {
    /// Reflection in the slab's own frame, modes `pol * orders.len() + i`.
    fn reflection(&self, xi: f64, k_y: f64, kz: f64, orders: &[i32], n_max: usize) -> Result<RMatrix> {
        match self {
            SlabAt::Planar(stack) => {
                let n = orders.len();
                let mut r = RMatrix::zeros(2 * n, 2 * n);
                for (i, &m) in orders.iter().enumerate() {
                    let k = k_y + 2.0 * PI * m as f64;
                    let rr = multilayer_reflection(stack, xi, (k * k + kz * kz).sqrt());
                    r[(i, i)] = rr[0];
                    r[(n + i, n + i)] = rr[1];
                }
                Ok(r)
            }
            SlabAt::Wires(s) => patterned_slab_reflection(s, xi, k_y, kz, orders, n_max),
        }
    }
}

/// `y` reduced to `[0, 1)`.
pub(crate) fn unit_fraction(y: f64) -> f64 {
    let r = y % 1.0;
    if r < 0.0 { r + 1.0 } else { r }
}

/// Two slabs across a fluid.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabConfig {
    pub slab1: SlabSpec,
    pub slab2: SlabSpec,
    pub fluid: MaterialModel,
    pub period: Period,
    /// Surface-to-surface separation in `a`.
    pub d: f64,
    /// Lateral shift of slab 2 along `y`, in `a`. Ignored when crossed.
    pub y: f64,
    pub orientation: Orientation,
}

impl SlabConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("separation must be positive, got {}", self.d)));
        }
        if !self.y.is_finite() {
            return Err(Error::InvalidParameter("lateral shift must be finite".into()));
        }
        self.slab1.validate()?;
        self.slab2.validate()?;
        self.fluid.validate()?;
        if self.fluid.static_limit().is_perfect_metal() {
            return Err(Error::InvalidParameter("the gap cannot be a perfect metal".into()));
        }
        Ok(())
    }

    /// Shift reduced to `[0, 1)`; zero when crossed.
    pub fn reduced_shift(&self) -> f64 {
        match self.orientation {
            Orientation::Aligned => unit_fraction(self.y),
            Orientation::Crossed => 0.0,
        }
    }

    fn fluid_eps(&self, xi: f64) -> f64 {
        self.fluid.eps_at(self.period, xi).expect_finite("fluid")
    }

    fn same_slabs(&self) -> bool {
        self.slab1 == self.slab2
    }
}

/// Quadrature and truncation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    /// Gauss–Legendre nodes of the rational ξ map.
    pub n_xi: usize,
    /// `ξ₀` of the map; `None` picks `1/(√ε₃ d)`.
    pub xi_scale: Option<f64>,
    /// Nodes along each Brillouin-zone direction (and along `k_z ∈ (0, ∞)`
    /// when aligned).
    pub n_k: usize,
    /// Strength of the clustering of Brillouin-zone nodes toward `k = 0`;
    /// the map parameter is `asinh(cluster · π d)`.
    pub cluster: f64,
    /// Separation that shapes the `k` grid and the default `ξ₀`; `None`
    /// uses the configuration's own. Fixing it makes `E(d)` at nearby `d`
    /// share one set of nodes.
    pub grid_separation: Option<f64>,
    /// Reciprocal-lattice orders per periodic direction (odd).
    pub n_g: usize,
    /// Cylindrical orders `|n| ≤ n_max`.
    pub n_max: usize,
    /// Exponential extrapolation in `N_G` from `{N_G-4, N_G-2, N_G}`. `None`
    /// enables it for crossed slabs only.
    pub extrapolate: Option<bool>,
    /// Keep only specular entries of both reflection matrices.
    pub specular_only: bool,
    /// Rerun with half the ξ and k nodes to estimate the quadrature error.
    pub error_estimate: bool,
    /// Relative error above which a result is flagged.
    pub tolerance: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme {
            n_xi: 24,
            xi_scale: None,
            n_k: 24,
            cluster: 1.0,
            grid_separation: None,
            n_g: 7,
            n_max: DEFAULT_N_MAX,
            extrapolate: None,
            specular_only: false,
            error_estimate: true,
            tolerance: 0.01,
        }
    }
}

impl QuadratureScheme {
    pub fn validate(&self) -> Result<()> {
        if self.n_xi < 2 || self.n_k < 2 {
            return Err(Error::InvalidParameter("quadrature orders must be at least 2".into()));
        }
        if self.n_g % 2 == 0 || self.n_g == 0 {
            return Err(Error::InvalidParameter(alloc::format!("N_G must be odd, got {}", self.n_g)));
        }
        if self.grid_separation.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::InvalidParameter("grid separation must be positive".into()));
        }
        if self.xi_scale.is_some_and(|s| !(s > 0.0)) || !(self.cluster >= 0.0) || !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("scale, clustering and tolerance must be positive".into()));
        }
        Ok(())
    }

    fn extrapolates(&self, o: Orientation) -> bool {
        self.extrapolate.unwrap_or(o == Orientation::Crossed) && self.n_g >= 7
    }

    fn halved(&self) -> Self {
        QuadratureScheme { n_xi: (self.n_xi / 2).max(2), n_k: (self.n_k / 2).max(2), ..self.clone() }
    }
}

/// Joint planewave basis of both slabs.
///
/// Aligned: modes `pol * N_G + i` with `G = (2π m_i, 0)`. Crossed: modes
/// `pol * N_G² + i N_G + j` with `G = (2π m_i, 2π m_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanewaveBasis {
    pub orientation: Orientation,
    pub orders: Vec<i32>,
}

impl PlanewaveBasis {
    pub fn per_pol(&self) -> usize {
        match self.orientation {
            Orientation::Aligned => self.orders.len(),
            Orientation::Crossed => self.orders.len() * self.orders.len(),
        }
    }

    pub fn len(&self) -> usize {
        2 * self.per_pol()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Reciprocal-lattice orders `(m_y, m_z)` of mode `i`.
    pub fn g(&self, i: usize) -> (i32, i32) {
        let n = self.orders.len();
        let i = i % self.per_pol();
        match self.orientation {
            Orientation::Aligned => (self.orders[i], 0),
            Orientation::Crossed => (self.orders[i / n], self.orders[i % n]),
        }
    }

    pub fn pol(&self, i: usize) -> Pol {
        if i < self.per_pol() {
            Pol::Te
        } else {
            Pol::Tm
        }
    }

    /// In-plane wavevector of mode `i` at Bloch vector `(k_y, k_z)`.
    pub fn wavevector(&self, i: usize, k_y: f64, k_z: f64) -> (f64, f64) {
        let (my, mz) = self.g(i);
        (k_y + 2.0 * PI * my as f64, k_z + 2.0 * PI * mz as f64)
    }

    /// `q = √(ε₃ ξ² + |k + G|²)` per mode.
    pub fn q(&self, eps3: f64, xi: f64, k_y: f64, k_z: f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.wavevector(i, k_y, k_z);
                (eps3 * xi * xi + a * a + b * b).sqrt()
            })
            .collect()
    }
}

pub fn joint_basis(orientation: Orientation, n_g: usize) -> PlanewaveBasis {
    let half = (n_g / 2) as i32;
    PlanewaveBasis { orientation, orders: (-half..=half).collect() }
}

/// Diagonal of `U`: `e^{-q d} e^{i (k_y + G_y) y}`.
pub fn translation_matrix(basis: &PlanewaveBasis, q: &[f64], d: f64, y: f64, k_y: f64) -> Vec<Complex64> {
    (0..basis.len())
        .map(|i| {
            let (ky, _) = basis.wavevector(i, k_y, 0.0);
            Complex64::from_polar((-q[i] * d).exp(), ky * y)
        })
        .collect()
}

/// Zeroes every entry that couples different reciprocal-lattice orders.
pub fn specular_filter<T: Scalar>(r: &Matrix<T>, basis: &PlanewaveBasis) -> Matrix<T> {
    let n = basis.per_pol();
    Matrix::from_fn(r.rows(), r.cols(), |i, j| if i % n == j % n { r[(i, j)] } else { T::zero() })
}

/// `log det(1 - R₁ U† R₂ U)` and its `d`-derivative at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeValue {
    pub log_det: Complex64,
    pub d_log_det: f64,
}

/// Evaluates the integrand for reflection matrices already in the lab frame.
pub fn log_det_integrand<T: Scalar>(r1: &Matrix<T>, r2: &Matrix<T>, u: &[T], q: &[f64]) -> Result<NodeValue> {
    let n = r1.rows();
    let nmat = Matrix::from_fn(n, n, |i, j| u[i].conj() * r2[(i, j)] * u[j]);
    let m = r1.matmul(&nmat);
    let lu = Lu::factor(m.one_minus()).map_err(|_| Error::Singular { context: "1 - M".into() })?;
    let mut log_det = lu.log_det();
    // Pivot logs are summed branch by branch; bring the phase back to (-π, π].
    log_det.im -= 2.0 * PI * (log_det.im / (2.0 * PI)).round();
    let x = lu.solve(r1);
    let mut tr = T::zero();
    for i in 0..n {
        for j in 0..n {
            tr = tr + x[(i, j)] * nmat[(j, i)] * T::from_real(q[i] + q[j]);
        }
    }
    let d_log_det = tr.re();
    Ok(NodeValue { log_det, d_log_det })
}

fn lab_slab2<T: Scalar>(r: &RMatrix, per_pol: usize) -> Matrix<T> {
    Matrix::from_fn(r.rows(), r.cols(), |i, j| {
        let s = if (i < per_pol) == (j < per_pol) { 1.0 } else { -1.0 };
        T::from_real(s * r[(i, j)])
    })
}

/// Lab-frame `(R₁, R₂)` at one node.
fn slab_matrices(
    cfg: &SlabConfig,
    s1: &SlabAt,
    s2: &SlabAt,
    basis: &PlanewaveBasis,
    xi: f64,
    k_y: f64,
    k_z: f64,
    n_max: usize,
) -> Result<(RMatrix, RMatrix)> {
    let orders = &basis.orders;
    let pp = basis.per_pol();
    match basis.orientation {
        Orientation::Aligned => {
            let r1 = s1.reflection(xi, k_y, k_z, orders, n_max)?;
            let r2 = if cfg.same_slabs() { r1.clone() } else { s2.reflection(xi, k_y, k_z, orders, n_max)? };
            Ok((r1, lab_slab2(&r2, pp)))
        }
        Orientation::Crossed => {
            let n = orders.len();
            let dim = basis.len();
            let mut r1 = RMatrix::zeros(dim, dim);
            let mut r2 = RMatrix::zeros(dim, dim);
            // Slab 1 conserves k_z + G_z: one block per G_z, indexed by G_y.
            for (jz, &mz) in orders.iter().enumerate() {
                let b = s1.reflection(xi, k_y, k_z + 2.0 * PI * mz as f64, orders, n_max)?;
                for a in 0..2 {
                    for c in 0..2 {
                        for iy in 0..n {
                            for jy in 0..n {
                                r1[(a * pp + iy * n + jz, c * pp + jy * n + jz)] = b[(a * n + iy, c * n + jy)];
                            }
                        }
                    }
                }
            }
            // Slab 2 conserves k_y + G_y; its local order -m_z is lab m_z.
            let local: Vec<i32> = orders.iter().map(|m| -m).collect();
            for (iy, &my) in orders.iter().enumerate() {
                let b = s2.reflection(xi, -k_z, k_y + 2.0 * PI * my as f64, &local, n_max)?;
                for a in 0..2 {
                    for c in 0..2 {
                        let s = if a == c { 1.0 } else { -1.0 };
                        for iz in 0..n {
                            for jz in 0..n {
                                r2[(a * pp + iy * n + iz, c * pp + iy * n + jz)] = s * b[(a * n + iz, c * n + jz)];
                            }
                        }
                    }
                }
            }
            Ok((r1, r2))
        }
    }
}

/// One quadrature node: `ξ`, Bloch vector and the product of weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub xi: f64,
    pub k_y: f64,
    pub k_z: f64,
    pub weight: f64,
}

/// Dispatch of independent node evaluations. Results must come back in node
/// order so that the reduction is deterministic.
pub trait NodeMap {
    fn map_nodes(&self, count: usize, eval: &(dyn Fn(usize) -> Result<NodeValue> + Sync)) -> Vec<Result<NodeValue>>;
}

/// Evaluates nodes one after another.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl NodeMap for Serial {
    fn map_nodes(&self, count: usize, eval: &(dyn Fn(usize) -> Result<NodeValue> + Sync)) -> Vec<Result<NodeValue>> {
        (0..count).map(eval).collect()
    }
}

/// `ξ₀` used when the scheme leaves it open.
pub fn default_xi_scale(cfg: &SlabConfig, d: f64) -> f64 {
    let mut xi0 = 1.0 / d;
    // A dispersive fluid sets its own scale.
    for _ in 0..2 {
        xi0 = 1.0 / (cfg.fluid_eps(xi0).sqrt() * d);
    }
    xi0
}

/// Tensor-product quadrature nodes. The total weight includes the
/// `1/(2π)³` prefactor and any symmetry multiplicity.
pub fn quadrature_nodes(cfg: &SlabConfig, scheme: &QuadratureScheme) -> Vec<Node> {
    let d = scheme.grid_separation.unwrap_or(cfg.d);
    let xi_rule = FrequencyGrid::rational(scheme.n_xi, scheme.xi_scale.unwrap_or_else(|| default_xi_scale(cfg, d)));
    let beta = (scheme.cluster * PI * d).asinh();
    let (ky_rule, kz_rule, mult): (Rule, Rule, f64) = match cfg.orientation {
        Orientation::Aligned => {
            // Split at k_y = 0, where the integrand has a logarithmic kink.
            let half = clustered(scheme.n_k, PI, beta, true);
            let mirrored = Rule {
                nodes: half.nodes.iter().rev().map(|k| -k).chain(half.nodes.iter().copied()).collect(),
                weights: half.weights.iter().rev().chain(half.weights.iter()).copied().collect(),
            };
            (mirrored, semi_infinite(scheme.n_k, 0.5 / d), 2.0)
        }
        Orientation::Crossed => (clustered(scheme.n_k, PI, beta, true), clustered(scheme.n_k, PI, beta, true), 4.0),
    };
    let pref = mult / (8.0 * PI * PI * PI);
    let mut nodes = Vec::with_capacity(xi_rule.nodes().len() * ky_rule.len() * kz_rule.len());
    for (xi, wx) in xi_rule.rule().iter() {
        for (k_y, wy) in ky_rule.iter() {
            for (k_z, wz) in kz_rule.iter() {
                nodes.push(Node { xi, k_y, k_z, weight: pref * wx * wy * wz });
            }
        }
    }
    nodes
}

/// Everything entering the integrand at one node: lab-frame reflections,
/// decay constants and the diagonal of `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMatrices {
    pub basis: PlanewaveBasis,
    pub r1: RMatrix,
    pub r2: RMatrix,
    pub q: Vec<f64>,
    pub u: Vec<Complex64>,
}

pub fn node_matrices(cfg: &SlabConfig, scheme: &QuadratureScheme, n_g: usize, node: &Node) -> Result<NodeMatrices> {
    let basis = joint_basis(cfg.orientation, n_g);
    let eps3 = cfg.fluid_eps(node.xi);
    let s1 = cfg.slab1.at(cfg.period, node.xi, eps3);
    let s2 = cfg.slab2.at(cfg.period, node.xi, eps3);
    let (mut r1, mut r2) = slab_matrices(cfg, &s1, &s2, &basis, node.xi, node.k_y, node.k_z, scheme.n_max)?;
    if scheme.specular_only {
        r1 = specular_filter(&r1, &basis);
        r2 = specular_filter(&r2, &basis);
    }
    let q = basis.q(eps3, node.xi, node.k_y, node.k_z);
    let u = translation_matrix(&basis, &q, cfg.d, cfg.reduced_shift(), node.k_y);
    Ok(NodeMatrices { basis, r1, r2, q, u })
}

/// Integrand at one node for `N_G` orders.
pub fn evaluate_node(cfg: &SlabConfig, scheme: &QuadratureScheme, n_g: usize, node: &Node) -> Result<NodeValue> {
    let NodeMatrices { r1, r2, q, u, .. } = node_matrices(cfg, scheme, n_g, node)?;
    let y = cfg.reduced_shift();
    let at = |e: Error| match e {
        Error::Singular { .. } => Error::NotContractive { xi: node.xi, ky: node.k_y, kz: node.k_z },
        e => e,
    };
    let v = if y == 0.0 {
        let ur: Vec<f64> = u.iter().map(|z| z.re).collect();
        log_det_integrand(&r1, &r2, &ur, &q).map_err(at)?
    } else {
        let u = u.as_slice();
        log_det_integrand(&r1.to_complex(), &r2.to_complex(), u, &q).map_err(at)?
    };
    // A real round trip with det(1 - M) ≤ 0 has an eigenvalue beyond 1.
    if y == 0.0 && (v.log_det.im.abs() > 1.0 || !v.log_det.re.is_finite()) {
        return Err(Error::NotContractive { xi: node.xi, ky: node.k_y, kz: node.k_z });
    }
    Ok(v)
}

/// Energy and pressure for one scheme and one `N_G`, without extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawIntegral {
    pub energy: f64,
    pub energy_imag: f64,
    pub pressure: f64,
}

pub fn integrate(cfg: &SlabConfig, scheme: &QuadratureScheme, n_g: usize, map: &dyn NodeMap) -> Result<RawIntegral> {
    let nodes = quadrature_nodes(cfg, scheme);
    let vals = map.map_nodes(nodes.len(), &|i| evaluate_node(cfg, scheme, n_g, &nodes[i]));
    let (mut e, mut ei, mut p) = (0.0, 0.0, 0.0);
    for (node, v) in nodes.iter().zip(vals) {
        let v = v?;
        e += node.weight * v.log_det.re;
        ei += node.weight * v.log_det.im;
        p += node.weight * v.d_log_det;
    }
    if ei.abs() > 1e-8 * e.abs() + 1e-300 {
        return Err(Error::ComplexEnergy { xi: f64::NAN, real: e, imag: ei });
    }
    Ok(RawIntegral { energy: e, energy_imag: ei, pressure: p })
}

/// Limit of `f(N)` for `N = n-4, n-2, n` assuming geometric convergence.
/// Falls back to the last value if the sequence is not geometric.
pub fn extrapolate_geometric(f: [f64; 3]) -> f64 {
    let (d1, d2) = (f[1] - f[0], f[2] - f[1]);
    if d1 == 0.0 {
        return f[2];
    }
    let rho = d2 / d1;
    if rho > 0.0 && rho < 1.0 {
        f[2] + d2 * rho / (1.0 - rho)
    } else {
        f[2]
    }
}

/// Result of a force calculation, natural units.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceResult {
    /// Energy per area in `ħc/a³`.
    pub energy: f64,
    /// Pressure in `ħc/a⁴`, positive when attractive.
    pub pressure: f64,
    /// Estimated absolute error of `pressure`.
    pub error: f64,
    /// Estimated absolute error of `energy`.
    pub energy_error: f64,
    /// Set when `error` exceeds the scheme tolerance.
    pub flagged: bool,
    pub meta: Convergence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    /// `(N_G, E, P)` for every truncation evaluated.
    pub by_n_g: Vec<(usize, f64, f64)>,
    pub extrapolated: bool,
    /// `(E, P)` of the half-resolution rerun, when requested.
    pub coarse: Option<(f64, f64)>,
    pub nodes: usize,
}

impl ForceResult {
    pub fn pressure_si(&self, period: Period) -> Option<f64> {
        period.pressure_to_si(self.pressure)
    }

    pub fn energy_si(&self, period: Period) -> Option<f64> {
        period.energy_to_si(self.energy)
    }
}

/// Energy and pressure of a configuration, with truncation extrapolation and
/// an error estimate.
pub fn casimir_pressure(cfg: &SlabConfig, scheme: &QuadratureScheme, map: &dyn NodeMap) -> Result<ForceResult> {
    cfg.validate()?;
    scheme.validate()?;
    let n_g = scheme.n_g;
    let extrapolated = scheme.extrapolates(cfg.orientation);
    let truncations: Vec<usize> = if extrapolated { vec![n_g - 4, n_g - 2, n_g] } else { vec![n_g] };
    let mut by_n_g = Vec::with_capacity(3);
    for &n in &truncations {
        let r = integrate(cfg, scheme, n, map)?;
        by_n_g.push((n, r.energy, r.pressure));
    }
    let last = *by_n_g.last().expect("at least one truncation");
    let (mut energy, mut pressure) = (last.1, last.2);
    let (mut e_err, mut p_err) = (0.0, 0.0);
    if extrapolated {
        energy = extrapolate_geometric([by_n_g[0].1, by_n_g[1].1, by_n_g[2].1]);
        pressure = extrapolate_geometric([by_n_g[0].2, by_n_g[1].2, by_n_g[2].2]);
        e_err += (energy - last.1).abs();
        p_err += (pressure - last.2).abs();
    }
    let coarse = if scheme.error_estimate {
        let c = integrate(cfg, &scheme.halved(), n_g, map)?;
        e_err += (c.energy - last.1).abs();
        p_err += (c.pressure - last.2).abs();
        Some((c.energy, c.pressure))
    } else {
        None
    };
    let flagged = p_err > scheme.tolerance * pressure.abs();
    Ok(ForceResult {
        energy,
        pressure,
        error: p_err,
        energy_error: e_err,
        flagged,
        meta: Convergence { by_n_g, extrapolated, coarse, nodes: quadrature_nodes(cfg, scheme).len() },
    })
}

/// Ideal-conductor plate pressure `π²/(240 d⁴)` in `ħc/a⁴`.
pub fn ideal_plate_pressure(d: f64) -> f64 {
    PI * PI / (240.0 * d.powi(4))
}

/// One row of an orientation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationTable {
    /// `(y, P_aligned(y))`.
    pub aligned: Vec<(f64, f64)>,
    pub crossed: f64,
    /// `P_aligned(1/2) ≤ P_crossed ≤ P_aligned(0)`, with the error bars.
    pub bound_holds: bool,
    /// `max_y P_crossed / P_aligned(y)`.
    pub max_ratio: f64,
}

/// Aligned pressures at `y ∈ {0, 1/8, …, 1/2}` (or the supplied shifts) and
/// the crossed pressure, with the orientation bound checked.
pub fn force_vs_orientation(
    cfg: &SlabConfig,
    shifts: Option<&[f64]>,
    scheme: &QuadratureScheme,
    map: &dyn NodeMap,
) -> Result<OrientationTable> {
    let default: Vec<f64> = (0..=4).map(|i| i as f64 / 8.0).collect();
    let shifts = shifts.unwrap_or(&default);
    let mut aligned = Vec::with_capacity(shifts.len());
    let mut errs = Vec::with_capacity(shifts.len());
    for &y in shifts {
        let c = SlabConfig { y, orientation: Orientation::Aligned, ..cfg.clone() };
        let r = casimir_pressure(&c, scheme, map)?;
        aligned.push((y, r.pressure));
        errs.push(r.error);
    }
    let cr = casimir_pressure(&SlabConfig { y: 0.0, orientation: Orientation::Crossed, ..cfg.clone() }, scheme, map)?;
    let at = |target: f64| {
        shifts.iter().position(|&y| (unit_fraction(y) - target).abs() < 1e-12).map(|i| (aligned[i].1, errs[i]))
    };
    let bound_holds = match (at(0.0), at(0.5)) {
        (Some((p0, e0)), Some((ph, eh))) => ph - eh - cr.error <= cr.pressure && cr.pressure <= p0 + e0 + cr.error,
        _ => true,
    };
    let max_ratio = aligned.iter().map(|&(_, p)| cr.pressure / p).fold(f64::NEG_INFINITY, f64::max);
    Ok(OrientationTable { aligned, crossed: cr.pressure, bound_holds, max_ratio })
}
