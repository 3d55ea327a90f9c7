//! Exact Casimir interactions between periodic arrays of nanowires.
//!
//! Everything in this crate works in natural units: lengths are measured in
//! units of the array period `a`, imaginary frequencies in units of `c/a`, and
//! `ħ = c = 1`. Energies per unit area therefore come out in `ħc/a³` and
//! pressures in `ħc/a⁴`; [`units`] converts to SI.
//!
//! The crate is `no_std` (it only needs `alloc`). File formats, the command
//! line front-end and parallel dispatch live in the companion `casimir-app`
//! crate.
//!
//! Layout:
//! - [`materials`]: permittivities on the imaginary frequency axis.
//! - [`special`]: modified Bessel functions `I_n`, `K_n`.
//! - [`cylwave`]: single-cylinder and array T-matrices, lattice sums and the
//!   conversion to the planewave basis.
//! - [`layers`]: Fresnel and multilayer reflection, and the full slab operator.
//! - [`ema`]: uniaxial effective-medium reflection, parameter retrieval and
//!   effective-medium forces.
//! - [`energy`]: the log-det energy and trace-formula pressure between slabs.
//! - [`pfa`]: proximity-force and Derjaguin (hybrid) forces.

#![no_std]

extern crate alloc;

pub mod cylwave;
pub mod ema;
pub mod energy;
mod error;
pub mod layers;
pub mod linalg;
pub mod materials;
pub mod pfa;
pub mod quadrature;
pub mod special;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
