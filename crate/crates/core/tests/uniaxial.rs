//! Uniaxial reflection against a direct numerical solution of the 4×4
//! first-order field equations, plus symmetry properties.

use casimir_core::ema::{uniaxial_reflection, uniaxial_reflection_k};
use casimir_core::materials::Eps;
use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;

/// `∂_x (E_y, E_z, H_y, H_z) = Δ (E_y, E_z, H_y, H_z)` for
/// `ε = diag(exx, eyy, ezz)` at imaginary frequency.
fn berreman(exx: f64, eyy: f64, ezz: f64, xi: f64, ky: f64, kz: f64) -> Matrix4<f64> {
    let a = xi * exx;
    Matrix4::new(
        0.0, 0.0, ky * kz / a, -ky * ky / a - xi,
        0.0, 0.0, kz * kz / a + xi, -ky * kz / a,
        -ky * kz / xi, ky * ky / xi + xi * ezz, 0.0, 0.0,
        -kz * kz / xi - xi * eyy, kz * ky / xi, 0.0, 0.0,
    )
}

/// Orthonormal basis of the null space of `Δ - λ`, `dim` vectors.
fn null_space(delta: &Matrix4<f64>, lambda: f64, dim: usize) -> Vec<Vector4<f64>> {
    let svd = (delta - Matrix4::identity() * lambda).svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut idx: Vec<usize> = (0..4).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    idx[..dim].iter().map(|&i| vt.row(i).transpose()).collect()
}

/// TE and TM amplitudes of a field: projections on `ê = (0, -k_z, k_y)/p`.
fn amplitudes(v: &Vector4<f64>, ky: f64, kz: f64) -> [f64; 2] {
    let p = (ky * ky + kz * kz).sqrt();
    [(-kz * v[0] + ky * v[1]) / p, (-kz * v[2] + ky * v[3]) / p]
}

/// Field vector in an eigenspace with prescribed TE/TM amplitudes.
fn with_amplitudes(basis: &[Vector4<f64>], ky: f64, kz: f64, amp: [f64; 2]) -> Vector4<f64> {
    let a0 = amplitudes(&basis[0], ky, kz);
    let a1 = amplitudes(&basis[1], ky, kz);
    let det = a0[0] * a1[1] - a0[1] * a1[0];
    let c0 = (amp[0] * a1[1] - amp[1] * a1[0]) / det;
    let c1 = (a0[0] * amp[1] - a0[1] * amp[0]) / det;
    basis[0] * c0 + basis[1] * c1
}

fn oracle(par: f64, perp: f64, ef: f64, xi: f64, ky: f64, kz: f64) -> [[f64; 2]; 2] {
    let fluid = berreman(ef, ef, ef, xi, ky, kz);
    let q = (ef * xi * xi + ky * ky + kz * kz).sqrt();
    // Toward the medium the field grows with x; reflected waves decay.
    let down = null_space(&fluid, q, 2);
    let up = null_space(&fluid, -q, 2);
    let medium = berreman(perp, perp, par, xi, ky, kz);
    let mut lams: Vec<f64> = medium.complex_eigenvalues().iter().filter(|z| z.re > 0.0).map(|z| z.re).collect();
    lams.sort_by(f64::total_cmp);
    assert_eq!(lams.len(), 2);
    let trans: Vec<Vector4<f64>> = lams.iter().map(|&l| null_space(&medium, l, 1)[0]).collect();
    let mut r = [[0.0; 2]; 2];
    for pin in 0..2 {
        let mut amp = [0.0; 2];
        amp[pin] = 1.0;
        let inc = with_amplitudes(&down, ky, kz, amp);
        // inc + a0 up0 + a1 up1 - b0 t0 - b1 t1 = 0
        let m = Matrix4::from_columns(&[up[0], up[1], -trans[0], -trans[1]]);
        let x = m.lu().solve(&(-inc)).unwrap();
        let refl = up[0] * x[0] + up[1] * x[1];
        let a = amplitudes(&refl, ky, kz);
        r[0][pin] = a[0];
        r[1][pin] = a[1];
    }
    r
}

#[test]
fn matches_first_order_system_solution() {
    let cases = [
        (9.0, 2.0, 1.0, 0.4, 0.7, 0.5),
        (2.0, 9.0, 1.0, 0.4, 0.7, 0.5),
        (40.0, 3.8, 1.9, 0.1, -0.3, 1.2),
        (1.5, 4.0, 2.5, 2.0, 1.0, -0.2),
        (300.0, 2.1, 1.0, 0.02, 0.05, 0.01),
    ];
    for &(par, perp, ef, xi, ky, kz) in &cases {
        let got = uniaxial_reflection_k(Eps::Finite(par), Eps::Finite(perp), ef, xi, ky, kz).unwrap();
        let want = oracle(par, perp, ef, xi, ky, kz);
        for i in 0..2 {
            for j in 0..2 {
                assert!((got.r[i][j] - want[i][j]).abs() < 1e-9, "case {:?}: {:?} vs {:?}", (par, perp, ef, xi, ky, kz), got.r, want);
            }
        }
    }
}

proptest! {
    #[test]
    fn agrees_with_oracle(par in 1.0f64..50.0, perp in 1.0f64..10.0, ef in 1.0f64..3.0,
                          xi in 0.05f64..3.0, k in 0.05f64..3.0, phi in 0.05f64..1.5) {
        // Keep the two transmitted eigenvalues apart for the SVD null space.
        let (ky, kz) = (k * phi.sin(), k * phi.cos());
        let ko = (perp * xi * xi + k * k).sqrt();
        let ke = (par * xi * xi + ky * ky + par / perp * kz * kz).sqrt();
        prop_assume!((ko - ke).abs() > 1e-3 * ko);
        let got = uniaxial_reflection_k(Eps::Finite(par), Eps::Finite(perp), ef, xi, ky, kz).unwrap();
        let want = oracle(par, perp, ef, xi, ky, kz);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((got.r[i][j] - want[i][j]).abs() < 1e-7, "{:?} vs {:?}", got.r, want);
            }
        }
    }

    #[test]
    fn reciprocal_and_symmetric(par in 1.0f64..1e4, perp in 1.0f64..10.0, ef in 1.0f64..3.0,
                                xi in 0.01f64..5.0, k in 0.01f64..5.0, phi in -3.0f64..3.0) {
        let e = |phi: f64| uniaxial_reflection(Eps::Finite(par), Eps::Finite(perp), ef, xi, k, phi).unwrap();
        let r = e(phi);
        // q w_i R_ij symmetric with w = (1, -1/ε_f) at a single interface.
        prop_assert!((r.te_tm() + r.tm_te() / ef).abs() < 1e-10 * (1.0 + r.tm_te().abs()));
        let flipped = e(phi + std::f64::consts::PI);
        let mirrored = e(-phi);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((r.r[i][j] - flipped.r[i][j]).abs() < 1e-10);
                let s = if i == j { 1.0 } else { -1.0 };
                prop_assert!((r.r[i][j] - s * mirrored.r[i][j]).abs() < 1e-10);
            }
        }
        prop_assert!(r.r.iter().flatten().all(|x| x.abs() <= 1.0 + 1e-12));
    }
}
