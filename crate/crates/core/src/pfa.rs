//! Proximity-force estimates.
//!
//! Two uses: the patch PFA for slabs of square wires (each lateral patch
//! feels the planar Lifshitz pressure of its own layer stacks), and the
//! Derjaguin integral that turns a plate–plate pressure curve into the
//! force on a sphere or a cylinder facing a plate.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::energy::{casimir_pressure, NodeMap, Orientation, QuadratureScheme, SlabConfig};
use crate::layers::{multilayer_reflection, qz, Layer, LayerStack};
use crate::materials::MaterialModel;
use crate::quadrature::{gauss_legendre_on, semi_infinite, CubicSpline, FrequencyGrid};
use crate::units::Period;
use crate::{Error, Result};

/// Quadrature for planar Lifshitz integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarScheme {
    pub n_xi: usize,
    pub n_k: usize,
}

impl Default for PlanarScheme {
    fn default() -> Self {
        PlanarScheme { n_xi: 48, n_k: 48 }
    }
}

/// Energy per area (`ħc/a³`) and pressure (`ħc/a⁴`, attraction positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateForce {
    pub energy: f64,
    pub pressure: f64,
}

/// Lifshitz energy and pressure between two planar stacks with a common
/// cover (the fluid), outer surfaces a distance `d` apart.
pub fn lifshitz_pressure(s1: &LayerStack, s2: &LayerStack, period: Period, d: f64, scheme: &PlanarScheme) -> Result<PlateForce> {
    if s1.cover != s2.cover {
        return Err(Error::InvalidParameter("both stacks must face the same fluid".into()));
    }
    s1.validate()?;
    s2.validate()?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("separation must be positive, got {d}")));
    }
    let cover = |xi: f64| s1.cover.eps_at(period, xi).expect_finite("fluid");
    let mut xi0 = 1.0 / d;
    for _ in 0..2 {
        xi0 = 1.0 / (cover(xi0).sqrt() * d);
    }
    let xi_rule = FrequencyGrid::rational(scheme.n_xi, xi0);
    let k_rule = semi_infinite(scheme.n_k, 0.5 / d);
    let (mut e, mut p) = (0.0, 0.0);
    for (xi, wx) in xi_rule.rule().iter() {
        let (a, b) = (s1.at(period, xi), s2.at(period, xi));
        for (k, wk) in k_rule.iter() {
            let q = qz(a.cover, xi, k);
            let x = (-2.0 * q * d).exp();
            let (r1, r2) = (multilayer_reflection(&a, xi, k), multilayer_reflection(&b, xi, k));
            for pol in 0..2 {
                let m = r1[pol] * r2[pol] * x;
                e += wx * wk * k * (-m).ln_1p();
                p += wx * wk * k * 2.0 * q * m / (1.0 - m);
            }
        }
    }
    let pref = 1.0 / (4.0 * PI * PI);
    Ok(PlateForce { energy: pref * e, pressure: pref * p })
}

/// Slab of square wires of side `width` (in `a`) with their top faces flush
/// with the substrate surface, one wire per period.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareWireSlab {
    pub width: f64,
    pub wire: MaterialModel,
    pub substrate: MaterialModel,
}

/// What a lateral patch of one slab looks like in depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchKind {
    /// A wire-thick layer of wire material over substrate.
    Wire,
    /// Bare substrate.
    Substrate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub lower: PatchKind,
    pub upper: PatchKind,
    pub fraction: f64,
}

/// Area fractions of the opposing patch pairs in one unit cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchDecomposition {
    pub patches: Vec<Patch>,
}

impl PatchDecomposition {
    /// Decomposition for wires of fractional width `w ≤ 1/2` at shift `y`
    /// (aligned) or a quarter turn apart (crossed, `y` irrelevant).
    pub fn new(w: f64, y: f64, orientation: Orientation) -> Result<Self> {
        if !(w > 0.0 && w <= 0.5) {
            return Err(Error::InvalidParameter(alloc::format!("square-wire width {w} outside (0, a/2]")));
        }
        let both = match orientation {
            Orientation::Aligned => {
                let t = crate::energy::unit_fraction(y);
                (w - t.min(1.0 - t)).max(0.0)
            }
            Orientation::Crossed => w * w,
        };
        use PatchKind::*;
        Ok(PatchDecomposition {
            patches: vec![
                Patch { lower: Wire, upper: Wire, fraction: both },
                Patch { lower: Wire, upper: Substrate, fraction: w - both },
                Patch { lower: Substrate, upper: Wire, fraction: w - both },
                Patch { lower: Substrate, upper: Substrate, fraction: 1.0 - 2.0 * w + both },
            ],
        })
    }

    pub fn fraction(&self, lower: PatchKind, upper: PatchKind) -> f64 {
        self.patches.iter().filter(|p| p.lower == lower && p.upper == upper).map(|p| p.fraction).sum()
    }
}

impl SquareWireSlab {
    fn stack(&self, kind: PatchKind, fluid: &MaterialModel) -> LayerStack {
        match kind {
            PatchKind::Wire => LayerStack {
                cover: fluid.clone(),
                layers: vec![Layer { model: self.wire.clone(), thickness: self.width }],
                substrate: self.substrate.clone(),
            },
            PatchKind::Substrate => LayerStack::half_space(fluid.clone(), self.substrate.clone()),
        }
    }
}

/// Patch-PFA energy and pressure between two square-wire slabs.
#[allow(clippy::too_many_arguments)]
pub fn pfa_pressure(
    slab1: &SquareWireSlab,
    slab2: &SquareWireSlab,
    fluid: &MaterialModel,
    period: Period,
    d: f64,
    y: f64,
    orientation: Orientation,
    scheme: &PlanarScheme,
) -> Result<PlateForce> {
    if slab1.width != slab2.width {
        return Err(Error::InvalidParameter("both slabs need the same wire width".into()));
    }
    let parts = PatchDecomposition::new(slab1.width, y, orientation)?;
    let (mut e, mut p) = (0.0, 0.0);
    for patch in &parts.patches {
        if patch.fraction == 0.0 {
            continue;
        }
        let f = lifshitz_pressure(&slab1.stack(patch.lower, fluid), &slab2.stack(patch.upper, fluid), period, d, scheme)?;
        e += patch.fraction * f.energy;
        p += patch.fraction * f.pressure;
    }
    Ok(PlateForce { energy: e, pressure: p })
}

/// Plate–plate pressure sampled against separation, natural units.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureTable {
    pub period: Period,
    pub d: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl PressureTable {
    pub fn new(period: Period, d: Vec<f64>, pressure: Vec<f64>) -> Result<Self> {
        if d.len() < 4 || pressure.len() != d.len() {
            return Err(Error::InvalidParameter("pressure tables need at least four matching samples".into()));
        }
        if d[0] <= 0.0 || d.windows(2).any(|w| w[1] <= w[0]) || pressure.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("pressure table separations must increase from a positive value".into()));
        }
        if period.meters().is_none() {
            return Err(Error::InvalidParameter("forces in pN need a finite period".into()));
        }
        Ok(PressureTable { period, d, pressure })
    }
}

/// Exact pressures of `cfg` at each separation in `ds` (the configuration's
/// own `d` is ignored).
pub fn tabulate_pressure(cfg: &SlabConfig, ds: &[f64], scheme: &QuadratureScheme, map: &dyn NodeMap) -> Result<PressureTable> {
    let mut p = Vec::with_capacity(ds.len());
    for &d in ds {
        let c = SlabConfig { d, ..cfg.clone() };
        p.push(casimir_pressure(&c, scheme, map)?.pressure);
    }
    PressureTable::new(cfg.period, ds.to_vec(), p)
}

/// Sphere or cylinder facing a plate; lengths in µm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvedBody {
    Sphere { radius: f64 },
    Cylinder { radius: f64, length: f64 },
}

impl CurvedBody {
    fn radius(&self) -> f64 {
        match *self {
            CurvedBody::Sphere { radius } | CurvedBody::Cylinder { radius, .. } => radius,
        }
    }
}

/// Derjaguin force with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerjaguinForce {
    /// Force in pN, attraction positive.
    pub force: f64,
    /// Contribution from beyond the last table sample.
    pub tail: f64,
    /// The power-law tail could not be fitted; the integral stops at the
    /// last sample.
    pub tail_fallback: bool,
    /// `R` is not much larger than both `d` and `a` (factor below 100).
    pub outside_regime: bool,
}

/// Interpolated `P(u)` in SI (Pa) with `u` in µm.
struct Interpolant {
    spline: CubicSpline, // P u⁴ against ln u
    u_max: f64,
    tail: Option<(f64, f64)>, // P = c u^{-p}
}

impl Interpolant {
    fn new(table: &PressureTable) -> Self {
        let to_um = |d: f64| table.period.length_to_nm(d).unwrap() * 1e-3;
        let u: Vec<f64> = table.d.iter().map(|&d| to_um(d)).collect();
        let p: Vec<f64> = table.pressure.iter().map(|&p| table.period.pressure_to_si(p).unwrap()).collect();
        let t: Vec<f64> = u.iter().map(|x| x.ln()).collect();
        let y: Vec<f64> = u.iter().zip(&p).map(|(x, p)| p * x.powi(4)).collect();
        let spline = CubicSpline::new(&t, &y).expect("validated table");
        let u_max = *u.last().unwrap();
        // Power law through the samples of the last decade, one sign only.
        let last: Vec<(f64, f64)> = u.iter().zip(&p).filter(|(x, _)| **x >= u_max / 10.0).map(|(x, p)| (*x, *p)).collect();
        let sign = last.last().unwrap().1.signum();
        let tail = if last.len() >= 2 && sign != 0.0 && last.iter().all(|(_, p)| p.signum() == sign) {
            let n = last.len() as f64;
            let (sx, sy) = last.iter().fold((0.0, 0.0), |(a, b), (x, p)| (a + x.ln(), b + (p * sign).ln()));
            let (mx, my) = (sx / n, sy / n);
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (x, p) in &last {
                sxy += (x.ln() - mx) * ((p * sign).ln() - my);
                sxx += (x.ln() - mx).powi(2);
            }
            let slope = sxy / sxx;
            let power = -slope;
            // The cylinder integral needs p > 1/2, the sphere p > 1.
            (power > 1.0 && power.is_finite()).then(|| (sign * (my - slope * mx).exp(), power))
        } else {
            None
        };
        Interpolant { spline, u_max, tail }
    }

    fn eval(&self, u: f64) -> f64 {
        self.spline.eval(u.ln()) / u.powi(4)
    }
}

/// Gauss–Legendre over `[a, b]` in `ln u`, split into pieces no wider than
/// a factor 1.25.
fn integrate_log(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let pieces = ((b / a).ln() / 1.25f64.ln()).ceil().max(1.0) as usize;
    let rule = gauss_legendre_on(8, 0.0, 1.0);
    let (la, lb) = (a.ln(), b.ln());
    let h = (lb - la) / pieces as f64;
    let mut s = 0.0;
    for i in 0..pieces {
        for (t, w) in rule.iter() {
            let u = (la + h * (i as f64 + t)).exp();
            s += w * h * u * f(u);
        }
    }
    s
}

/// Hybrid Derjaguin force at separation `d` (in `a`): every surface element
/// of the body feels the tabulated plate–plate pressure at its own gap.
pub fn derjaguin_force(body: CurvedBody, table: &PressureTable, d: f64) -> Result<DerjaguinForce> {
    if d < table.d[0] || d > *table.d.last().unwrap() {
        return Err(Error::TableRange { d });
    }
    let r = body.radius();
    if !(r > 0.0) {
        return Err(Error::InvalidParameter("radius of curvature must be positive".into()));
    }
    let interp = Interpolant::new(table);
    let u0 = table.period.length_to_nm(d).unwrap() * 1e-3;
    let a_um = table.period.length_to_nm(1.0).unwrap() * 1e-3;
    let outside_regime = r < 100.0 * u0.max(a_um);
    let u_max = interp.u_max;
    let (body_part, tail) = match body {
        CurvedBody::Sphere { radius } => {
            let inner = integrate_log(|u| interp.eval(u), u0, u_max);
            let tail = interp.tail.map(|(c, p)| c * u_max.powf(1.0 - p) / (p - 1.0)).unwrap_or(0.0);
            (2.0 * PI * radius * inner, 2.0 * PI * radius * tail)
        }
        CurvedBody::Cylinder { radius, length } => {
            // u = u0 + s² removes the inverse square root.
            let smax = (u_max - u0).sqrt();
            let inner = if smax > 0.0 {
                let rule = gauss_legendre_on(64, 0.0, 1.0);
                let mut acc = 0.0;
                // Pieces geometric in s keep resolution near the contact.
                let pieces = 24usize;
                let s_lo = (1e-3 * smax).min(smax);
                let edges: Vec<f64> = core::iter::once(0.0)
                    .chain((0..=pieces).map(|i| s_lo * (smax / s_lo).powf(i as f64 / pieces as f64)))
                    .collect();
                for w in edges.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    for (t, wt) in rule.iter() {
                        let s = a + (b - a) * t;
                        acc += wt * (b - a) * 2.0 * interp.eval(u0 + s * s);
                    }
                }
                acc
            } else {
                0.0
            };
            let tail = interp
                .tail
                .map(|(c, p)| {
                    let rule = gauss_legendre_on(48, 0.0, 1.0);
                    let s: f64 = rule.iter().map(|(t, w)| w * t.powf(p - 1.5) / (u_max - u0 * t).sqrt()).sum();
                    c * u_max.powf(1.0 - p) * s
                })
                .unwrap_or(0.0);
            let f = length * (2.0 * radius).sqrt();
            (f * inner, f * tail)
        }
    };
    Ok(DerjaguinForce { force: body_part + tail, tail, tail_fallback: interp.tail.is_none(), outside_regime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::ideal_plate_pressure;
    use crate::materials::{ethanol, gold, perfect_metal, silica, vacuum};

    #[test]
    fn ideal_plates() {
        let s = LayerStack::half_space(vacuum().model, perfect_metal().model);
        for d in [0.1, 1.0, 7.0] {
            let f = lifshitz_pressure(&s, &s, Period::Infinite, d, &PlanarScheme::default()).unwrap();
            assert!((f.pressure / ideal_plate_pressure(d) - 1.0).abs() < 1e-6);
            assert!((f.energy / (-PI * PI / (720.0 * d * d * d)) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn patch_fractions() {
        for (y, o) in [(0.0, Orientation::Aligned), (0.1, Orientation::Aligned), (0.5, Orientation::Aligned), (0.9, Orientation::Crossed)] {
            let p = PatchDecomposition::new(0.3, y, o).unwrap();
            let total: f64 = p.patches.iter().map(|p| p.fraction).sum();
            assert!((total - 1.0).abs() < 1e-15);
            assert!(p.patches.iter().all(|p| p.fraction >= 0.0));
        }
        let ww = |y| PatchDecomposition::new(0.3, y, Orientation::Aligned).unwrap().fraction(PatchKind::Wire, PatchKind::Wire);
        assert!((ww(0.0) - 0.3).abs() < 1e-15 && (ww(0.1) - 0.2).abs() < 1e-15 && ww(0.5) == 0.0);
        assert!((ww(-0.1) - ww(0.1)).abs() < 1e-15 && (ww(1.1) - ww(0.1)).abs() < 1e-15);
        // Crossed is the average over shifts.
        let rule = gauss_legendre_on(200, 0.0, 1.0);
        let avg: f64 = rule.iter().map(|(y, w)| w * ww(y)).sum();
        assert!((avg - 0.09).abs() < 1e-4);
    }

    #[test]
    fn pfa_ordering_and_vanishing_wires() {
        let slab = SquareWireSlab { width: 0.3, wire: gold().model, substrate: silica().model };
        let p = Period::from_nm(100.0);
        let s = PlanarScheme::default();
        let f = |y, o| pfa_pressure(&slab, &slab, &ethanol().model, p, 0.8, y, o, &s).unwrap().pressure;
        let (f0, fh, fc) = (f(0.0, Orientation::Aligned), f(0.5, Orientation::Aligned), f(0.0, Orientation::Crossed));
        assert!(fh <= fc && fc <= f0, "{fh} {fc} {f0}");
        let bare = LayerStack::half_space(ethanol().model, silica().model);
        let sub = lifshitz_pressure(&bare, &bare, p, 0.8, &s).unwrap().pressure;
        let thin = SquareWireSlab { width: 1e-9, ..slab };
        let ft = pfa_pressure(&thin, &thin, &ethanol().model, p, 0.8, 0.0, Orientation::Crossed, &s).unwrap().pressure;
        assert!((ft / sub - 1.0).abs() < 1e-6);
    }

    fn power_table(n: usize) -> PressureTable {
        let d = crate::ema::log_grid(0.2, 20.0, n);
        let p = d.iter().map(|x| 1e-3 / x.powi(4)).collect();
        PressureTable::new(Period::from_nm(100.0), d, p).unwrap()
    }

    #[test]
    fn derjaguin_power_law() {
        let t = power_table(81);
        let c = Period::from_nm(100.0).pressure_to_si(1e-3).unwrap() * 0.1f64.powi(4); // Pa µm⁴
        let d = 0.5;
        let u = 0.05;
        let s = derjaguin_force(CurvedBody::Sphere { radius: 200.0 }, &t, d).unwrap();
        let want = 2.0 * PI * 200.0 * c / (3.0 * u * u * u);
        assert!((s.force / want - 1.0).abs() < 1e-6, "{} {}", s.force, want);
        assert!(!s.tail_fallback && !s.outside_regime);
        // ∫_u^∞ c v^-4 (v-u)^-1/2 dv = c (16/35)·... = c B(1/2, 7/2) u^-7/2.
        let cy = derjaguin_force(CurvedBody::Cylinder { radius: 200.0, length: 16.0 }, &t, d).unwrap();
        let beta = PI.sqrt() * 1.875 * PI.sqrt() / 6.0; // Γ(1/2)Γ(7/2)/Γ(4)
        let want = 16.0 * (400.0f64).sqrt() * c * beta * u.powf(-3.5);
        assert!((cy.force / want - 1.0).abs() < 1e-5, "{} {}", cy.force, want);
    }

    #[test]
    fn derjaguin_is_linear_and_checks_range() {
        let t = power_table(30);
        let f1 = derjaguin_force(CurvedBody::Sphere { radius: 100.0 }, &t, 1.0).unwrap().force;
        let f2 = derjaguin_force(CurvedBody::Sphere { radius: 200.0 }, &t, 1.0).unwrap().force;
        assert_eq!(2.0 * f1, f2);
        let zero = PressureTable::new(t.period, t.d.clone(), vec![0.0; t.d.len()]).unwrap();
        let z = derjaguin_force(CurvedBody::Cylinder { radius: 1.0, length: 1.0 }, &zero, 1.0).unwrap();
        assert_eq!(z.force, 0.0);
        assert!(z.tail_fallback);
        assert!(matches!(derjaguin_force(CurvedBody::Sphere { radius: 1.0 }, &t, 0.1), Err(Error::TableRange { .. })));
    }
}
