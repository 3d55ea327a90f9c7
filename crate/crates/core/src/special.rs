//! Modified Bessel functions of integer order.
//!
//! Values are returned exponentially scaled, `Î_n(x) = I_n(x)e^{-x}` and
//! `K̂_n(x) = K_n(x)e^{x}`, so that products such as `I_n/K_n` can be formed
//! for arguments far beyond the overflow threshold of the unscaled functions.
//!
//! `K_0`, `K_1` use the ascending series for `x <= 2` and Steed's continued
//! fraction (Thompson–Barnett) above. `I_n` comes from the continued fraction
//! for `I_{n+1}/I_n`, downward recurrence and the Wronskian
//! `I_0 K_1 + I_1 K_0 = 1/x`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // float methods are inherent in core only on recent toolchains
use num_traits::Float;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;

/// `(K̂_0(x), K̂_1(x))` for `x > 0`.
pub fn k01_scaled(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= 2.0 {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_cf2(x)
    }
}

fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let lnx2 = (0.5 * x).ln();
    // I_0, I_1 and the digamma-weighted sums in the same loop.
    let mut term0 = 1.0; // y^k / (k!)^2
    let mut term1 = 0.5 * x; // (x/2) y^k / (k!(k+1)!)
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut hk = 0.0; // harmonic number H_k
    let mut k = 0usize;
    loop {
        let hk1 = hk + 1.0 / (k as f64 + 1.0);
        i0 += term0;
        i1 += term1;
        s0 += term0 * hk;
        // ψ(k+1) + ψ(k+2) = H_k + H_{k+1} - 2γ
        s1 += term1 * (hk + hk1 - 2.0 * EULER_GAMMA);
        k += 1;
        let kf = k as f64;
        term0 *= y / (kf * kf);
        term1 *= y / (kf * (kf + 1.0));
        hk = hk1;
        if term0 < EPS * i0 && k > 2 {
            break;
        }
    }
    let k0 = -(lnx2 + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + lnx2 * i1 - 0.5 * s1;
    (k0, k1)
}

fn k01_cf2(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..100_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// Fills `out[m] = K̂_m(x)` for `m = 0..out.len()` by upward recurrence.
pub fn k_scaled_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let (k0, k1) = k01_scaled(x);
    out[0] = k0;
    if out.len() > 1 {
        out[1] = k1;
    }
    for m in 2..out.len() {
        out[m] = out[m - 2] + 2.0 * (m as f64 - 1.0) / x * out[m - 1];
    }
}

/// `I_{n+1}(x) / I_n(x)` by the modified Lentz continued fraction.
pub fn i_ratio(n: usize, x: f64) -> f64 {
    let tiny = 1e-300;
    let xi = 1.0 / x;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..1_000_000 {
        let b = 2.0 * (n as f64 + j as f64) * xi;
        d = b + d;
        if d == 0.0 {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    // f = 1/(b_1 + 1/(b_2 + ...)), which is I_{n+1}/I_n.
    f
}

/// `I_n'(x)/I_n(x)`.
pub fn i_log_derivative(n: usize, x: f64) -> f64 {
    i_ratio(n, x) + n as f64 / x
}

/// Scaled `I_n`, `K_n` and logarithmic derivatives for `n = 0..=nmax`.
#[derive(Debug, Clone)]
pub struct BesselTable {
    pub x: f64,
    /// `I_n(x) e^{-x}`
    pub i: Vec<f64>,
    /// `K_n(x) e^{x}`
    pub k: Vec<f64>,
    /// `I_n'(x) / I_n(x)`
    pub di: Vec<f64>,
    /// `K_n'(x) / K_n(x)`
    pub dk: Vec<f64>,
}

impl BesselTable {
    pub fn new(nmax: usize, x: f64) -> Self {
        assert!(x > 0.0, "Bessel argument must be positive");
        let mut k = vec![0.0; nmax + 2];
        k_scaled_into(x, &mut k);

        // Downward recurrence for I from the ratio at the top order.
        let top = nmax + 1;
        let mut i = vec![0.0; nmax + 2];
        i[top] = 1.0;
        let mut upper = i_ratio(top, x); // I_{top+1} / I_top
        for n in (1..=top).rev() {
            let below = upper + 2.0 * n as f64 / x * i[n];
            upper = i[n];
            i[n - 1] = below;
            if below.abs() > 1e250 {
                for v in i[n - 1..].iter_mut() {
                    *v *= 1e-250;
                }
                upper *= 1e-250;
            }
        }
        let norm = (1.0 / x) / (i[0] * k[1] + i[1] * k[0]);
        for v in i.iter_mut() {
            *v *= norm;
        }

        let mut di = Vec::with_capacity(nmax + 1);
        let mut dk = Vec::with_capacity(nmax + 1);
        for n in 0..=nmax {
            let nx = n as f64 / x;
            di.push(if i[n] > 0.0 { i[n + 1] / i[n] + nx } else { i_log_derivative(n, x) });
            dk.push(-k[n + 1] / k[n] + nx);
        }
        i.truncate(nmax + 1);
        k.truncate(nmax + 1);
        BesselTable { x, i, k, di, dk }
    }
}
