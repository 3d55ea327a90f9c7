use alloc::string::String;

/// Errors raised by the numerical kernels.
///
/// Node coordinates are carried along so that a failure deep inside a
/// quadrature can be traced back to the `(ξ, k)` point that produced it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{model} permittivity diverges at xi = {xi}")]
    Domain { model: &'static str, xi: f64 },

    #[error("perfect metal has no finite permittivity; use the ideal-conductor path")]
    PerfectMetal,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular linear system ({context})")]
    Singular { context: String },

    #[error("ill-conditioned array T-matrix at xi = {xi}, ky = {ky}, kz = {kz} (cond ~ {cond:e})")]
    IllConditioned { xi: f64, ky: f64, kz: f64, cond: f64 },

    #[error("spectral radius of the round-trip operator >= 1 at xi = {xi}, ky = {ky}, kz = {kz}")]
    NotContractive { xi: f64, ky: f64, kz: f64 },

    #[error("energy integrand has a large imaginary part ({imag:e} vs {real:e}) at xi = {xi}")]
    ComplexEnergy { xi: f64, real: f64, imag: f64 },

    #[error("pressure table does not cover separation {d}")]
    TableRange { d: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
