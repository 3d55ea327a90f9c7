//! Small dense matrices and LU factorization with partial pivoting.
//!
//! Sizes here never exceed a few hundred rows (the crossed-slab round-trip
//! operator at `N_G = 7` is 98×98), so a straightforward row-major kernel is
//! all that is needed.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Field over which the matrices are defined.
pub trait Scalar:
    Copy
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + core::ops::Div<Output = Self>
    + PartialEq
    + core::fmt::Debug
{
    fn from_real(v: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn modulus(self) -> f64;
    fn ln_c(self) -> Complex64;
}

impl Scalar for f64 {
    fn from_real(v: f64) -> Self {
        v
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn ln_c(self) -> Complex64 {
        Complex64::new(self, 0.0).ln()
    }
}

impl Scalar for Complex64 {
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn ln_c(self) -> Complex64 {
        self.ln()
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type CMatrix = Matrix<Complex64>;
pub type RMatrix = Matrix<f64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let orow = i * rhs.cols;
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out.data[orow..orow + rhs.cols].iter_mut().zip(brow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Scales row `i` by `s[i]`.
    pub fn scale_rows(&mut self, s: &[T]) {
        for (i, &si) in s.iter().enumerate().take(self.rows) {
            for v in &mut self.data[i * self.cols..(i + 1) * self.cols] {
                *v = *v * si;
            }
        }
    }

    /// Scales column `j` by `s[j]`.
    pub fn scale_cols(&mut self, s: &[T]) {
        for i in 0..self.rows {
            for (v, &sj) in self.data[i * self.cols..(i + 1) * self.cols].iter_mut().zip(s) {
                *v = *v * sj;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.modulus().is_finite())
    }

    /// `1 - self`.
    pub fn one_minus(&self) -> Matrix<T> {
        let mut m = self.clone();
        for v in m.data.iter_mut() {
            *v = -*v;
        }
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] = m[(i, i)] + T::one();
        }
        m
    }
}

impl RMatrix {
    pub fn to_complex(&self) -> CMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl CMatrix {
    pub fn adjoint(&self) -> CMatrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `PA = LU` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: f64,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(mut a: Matrix<T>) -> Result<Self> {
        assert!(a.is_square(), "LU of a non-square matrix");
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].modulus();
            for i in k + 1..n {
                let v = a[(i, k)].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { context: alloc::format!("zero pivot in column {k} of {n}") });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                if f == T::zero() {
                    continue;
                }
                a[(i, k)] = f;
                let (upper, lower) = a.data.split_at_mut(i * n);
                let krow = &upper[k * n + k + 1..k * n + n];
                for (x, &u) in lower[k + 1..n].iter_mut().zip(krow) {
                    *x = *x - f * u;
                }
            }
        }
        Ok(Lu { lu: a, perm, sign })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// Solves `A X = B` in place.
    pub fn solve_in_place(&self, b: &mut Matrix<T>) {
        let n = self.dim();
        assert_eq!(b.rows, n);
        let m = b.cols;
        let mut x = Matrix::zeros(n, m);
        for i in 0..n {
            let src = self.perm[i];
            x.data[i * m..(i + 1) * m].copy_from_slice(&b.data[src * m..(src + 1) * m]);
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l == T::zero() {
                    continue;
                }
                let (upper, lower) = x.data.split_at_mut(i * m);
                for (xi, &xk) in lower[..m].iter_mut().zip(&upper[k * m..(k + 1) * m]) {
                    *xi = *xi - l * xk;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                if u == T::zero() {
                    continue;
                }
                let (head, tail) = x.data.split_at_mut(k * m);
                let xk = &tail[..m];
                for (xi, &v) in head[i * m..(i + 1) * m].iter_mut().zip(xk) {
                    *xi = *xi - u * v;
                }
            }
            let d = self.lu[(i, i)];
            for xi in &mut x.data[i * m..(i + 1) * m] {
                *xi = *xi / d;
            }
        }
        *b = x;
    }

    pub fn solve(&self, b: &Matrix<T>) -> Matrix<T> {
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        x
    }

    pub fn det(&self) -> T {
        let mut d = if self.sign < 0.0 { -T::one() } else { T::one() };
        for i in 0..self.dim() {
            d = d * self.lu[(i, i)];
        }
        d
    }

    /// Principal-branch-free `log det`: the sum of logs of the pivots.
    pub fn log_det(&self) -> Complex64 {
        let mut s = if self.sign < 0.0 { Complex64::new(0.0, core::f64::consts::PI) } else { Complex64::zero() };
        for i in 0..self.dim() {
            s += self.lu[(i, i)].ln_c();
        }
        s
    }

    /// Ratio of largest to smallest pivot modulus, a cheap condition proxy.
    pub fn pivot_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..self.dim() {
            let v = self.lu[(i, i)].modulus();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi / lo
    }
}

/// Spectral radius estimate by power iteration (used only for diagnostics).
pub fn spectral_radius_estimate(m: &CMatrix, iters: usize) -> f64 {
    let n = m.rows();
    if n == 0 {
        return 0.0;
    }
    let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.3)).collect();
    let mut lambda = 0.0;
    for _ in 0..iters {
        let mut w = vec![Complex64::zero(); n];
        for i in 0..n {
            w[i] = m.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm / vnorm;
        v = w.into_iter().map(|z| z / norm).collect();
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = RMatrix::from_fn(5, 5, |i, j| if i == j { 4.0 } else { 1.0 / (1.0 + i as f64 + 2.0 * j as f64) });
        let x = RMatrix::from_fn(5, 2, |i, j| (i as f64) - 0.5 * j as f64);
        let b = a.matmul(&x);
        let lu = Lu::factor(a).unwrap();
        let got = lu.solve(&b);
        for i in 0..5 {
            for j in 0..2 {
                assert!((got[(i, j)] - x[(i, j)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn determinant_of_2x2_matches_expansion() {
        let a = CMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, 0.5 * j as f64 - 0.2 * i as f64));
        let expected = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let lu = Lu::factor(a).unwrap();
        assert!((lu.det() - expected).norm() < 1e-14);
        assert!((lu.log_det().exp() - expected).norm() < 1e-14);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = RMatrix::from_fn(3, 3, |i, j| [[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [4.0, -3.0, 8.0]][i][j]);
        let lu = Lu::factor(a).unwrap();
        assert!((lu.det() - (-2.0)).abs() < 1e-13);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = RMatrix::from_fn(2, 2, |i, _| i as f64);
        assert!(matches!(Lu::factor(a), Err(Error::Singular { .. })));
    }

    #[test]
    fn power_iteration_finds_dominant_eigenvalue() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c(0.5, 0.0);
        m[(1, 1)] = c(-0.8, 0.0);
        m[(2, 2)] = c(0.1, 0.0);
        assert!((spectral_radius_estimate(&m, 200) - 0.8).abs() < 1e-6);
    }
}
