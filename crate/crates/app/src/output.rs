//! Output files.
//!
//! Force sweeps write one CSV per sweep with columns
//!
//! | column | meaning |
//! |---|---|
//! | `d_over_a` | separation in `a` |
//! | `y_over_a` | lateral shift in `a` (0 for crossed points) |
//! | `theta_deg` | 0 aligned, 90 crossed |
//! | `method` | `exact`, `specular`, `ema` or `pfa` |
//! | `E_hbar_c_per_a3` | energy per area |
//! | `P_hbar_c_per_a4` | pressure, attraction positive |
//! | `err_hbar_c_per_a4` | estimated absolute error of `P` |
//! | `d_nm`, `E_J_per_m2`, `P_Pa`, `err_Pa` | SI values, empty when `a → ∞` |
//! | `flagged` | error estimate above tolerance, or the point failed |
//! | `note` | failure message, if any |
//!
//! `1 Pa = 1 pN/µm²`. Floating-point values are written in shortest
//! round-trip form, so identical runs give identical files.
//!
//! # Matrix dumps
//!
//! With `--dump-matrices` every exact or specular point writes a text file
//! `matrices/<sweep>/<method>-<point>.txt`:
//!
//! ```text
//! # casimir matrix dump v1
//! # d <d> y <y> orientation <aligned|crossed> n_g <N_G>
//! # modes: pol * per_pol + i (pol 0 = TE, 1 = TM); orders <m_1 ... m_N>
//! node <index> xi <ξ> k_y <k_y> k_z <k_z> weight <w>
//! q <q_1> ... <q_n>
//! u <re_1> <im_1> ... <re_n> <im_n>
//! R1 <rows> <cols>
//! <row 1: cols values>
//! ...
//! R2 <rows> <cols>
//! ...
//! ```
//!
//! `R1` and `R2` are the lab-frame reflections entering `log det(1 - R₁U†R₂U)`
//! and `u` is the diagonal of the translation `U`. Crossed bases list modes
//! `pol * N_G² + i N_G + j` for orders `(m_i, m_j)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use casimir_core::energy::{NodeMatrices, Orientation};
use casimir_core::linalg::RMatrix;
use casimir_core::units::Period;
use serde::{Deserialize, Serialize};

use crate::config::{Method, QuadratureOverrides, RunConfig};
use crate::material_file::MaterialFile;

/// Shortest round-trip text for a value.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceRow {
    pub d: f64,
    pub y: f64,
    pub theta: f64,
    pub method: Method,
    pub energy: f64,
    pub pressure: f64,
    pub error: f64,
    pub flagged: bool,
    pub note: String,
}

pub const FORCE_HEADER: [&str; 13] = [
    "d_over_a",
    "y_over_a",
    "theta_deg",
    "method",
    "E_hbar_c_per_a3",
    "P_hbar_c_per_a4",
    "err_hbar_c_per_a4",
    "d_nm",
    "E_J_per_m2",
    "P_Pa",
    "err_Pa",
    "flagged",
    "note",
];

pub fn write_forces(path: &Path, period: Period, rows: &[ForceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(FORCE_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.d),
            num(r.y),
            num(r.theta),
            r.method.to_string(),
            num(r.energy),
            num(r.pressure),
            num(r.error),
            opt(period.length_to_nm(r.d)),
            opt(period.energy_to_si(r.energy)),
            opt(period.pressure_to_si(r.pressure)),
            opt(period.pressure_to_si(r.error)),
            r.flagged.to_string(),
            r.note.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const RETRIEVAL_HEADER: [&str; 4] = ["xi_c_per_a", "xi_rad_per_s", "eps_par", "eps_perp"];

pub fn write_retrieval(path: &Path, period: Period, xi: &[f64], par: &[f64], perp: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(RETRIEVAL_HEADER)?;
    for i in 0..xi.len() {
        let si = period.meters().map(|_| period.xi_to_si(xi[i]));
        w.write_record([num(xi[i]), opt(si), num(par[i]), num(perp[i])])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an effective-permittivity table written by [`write_retrieval`].
pub fn read_retrieval(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let cols = columns(r.headers()?, &["xi_c_per_a", "eps_par", "eps_perp"], path)?;
    let (mut xi, mut par, mut perp) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        xi.push(rec[cols[0]].parse()?);
        par.push(rec[cols[1]].parse()?);
        perp.push(rec[cols[2]].parse()?);
    }
    Ok((xi, par, perp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub d: f64,
    pub pressure: f64,
    pub error: f64,
    pub flagged: bool,
}

pub const TABLE_HEADER: [&str; 7] = ["d_over_a", "P_hbar_c_per_a4", "err_hbar_c_per_a4", "d_nm", "P_Pa", "err_Pa", "flagged"];

pub fn write_pressure_table(path: &Path, period: Period, rows: &[TableRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.d),
            num(r.pressure),
            num(r.error),
            opt(period.length_to_nm(r.d)),
            opt(period.pressure_to_si(r.pressure)),
            opt(period.pressure_to_si(r.error)),
            r.flagged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Separations and pressures (natural units) of a persisted pressure table.
pub fn read_pressure_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let cols = columns(r.headers()?, &["d_over_a", "P_hbar_c_per_a4"], path)?;
    let (mut d, mut p) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |c: usize| -> Result<f64> {
            rec[c].parse().with_context(|| format!("{} row {}: bad number `{}`", path.display(), i + 2, &rec[c]))
        };
        d.push(parse(cols[0])?);
        p.push(parse(cols[1])?);
    }
    Ok((d, p))
}

fn columns(headers: &csv::StringRecord, want: &[&str], path: &Path) -> Result<Vec<usize>> {
    want.iter()
        .map(|w| {
            headers
                .iter()
                .position(|h| h == *w)
                .with_context(|| format!("{}: missing column `{w}`", path.display()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerjaguinRow {
    pub d: f64,
    pub y: f64,
    pub theta: f64,
    pub body: &'static str,
    pub force: f64,
    pub tail: f64,
    pub tail_fallback: bool,
    pub outside_regime: bool,
}

pub const DERJAGUIN_HEADER: [&str; 9] =
    ["d_over_a", "d_nm", "y_over_a", "theta_deg", "body", "F_pN", "tail_pN", "tail_fallback", "outside_regime"];

pub fn write_derjaguin(path: &Path, period: Period, rows: &[DerjaguinRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(DERJAGUIN_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.d),
            opt(period.length_to_nm(r.d)),
            num(r.y),
            num(r.theta),
            r.body.to_string(),
            num(r.force),
            num(r.tail),
            r.tail_fallback.to_string(),
            r.outside_regime.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Header of a matrix dump file.
pub fn dump_header(d: f64, y: f64, orientation: Orientation, n_g: usize, orders: &[i32]) -> String {
    let o = match orientation {
        Orientation::Aligned => "aligned",
        Orientation::Crossed => "crossed",
    };
    let orders: Vec<String> = orders.iter().map(i32::to_string).collect();
    format!(
        "# casimir matrix dump v1\n# d {} y {} orientation {o} n_g {n_g}\n# modes: pol * per_pol + i (pol 0 = TE, 1 = TM); orders {}\n",
        num(d),
        num(y),
        orders.join(" ")
    )
}

pub fn dump_node(out: &mut impl Write, index: usize, xi: f64, k_y: f64, k_z: f64, weight: f64, m: &NodeMatrices) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "node {index} xi {} k_y {} k_z {} weight {}", num(xi), num(k_y), num(k_z), num(weight))?;
    s.push('q');
    for q in &m.q {
        write!(s, " {}", num(*q))?;
    }
    s.push_str("\nu");
    for u in &m.u {
        write!(s, " {} {}", num(u.re), num(u.im))?;
    }
    s.push('\n');
    matrix(&mut s, "R1", &m.r1)?;
    matrix(&mut s, "R2", &m.r2)?;
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn matrix(s: &mut String, name: &str, m: &RMatrix) -> std::fmt::Result {
    writeln!(s, "{name} {} {}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| num(*x)).collect();
        writeln!(s, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn create_buffered(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

/// Everything needed to reproduce a run's numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// `casimir <version>`.
    pub version: String,
    pub config: RunConfig,
    /// Definitions of every material a sweep refers to.
    pub materials: BTreeMap<String, MaterialFile>,
    pub sweeps: Vec<SweepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub name: String,
    /// Exact-solver settings after all overrides.
    pub quadrature: QuadratureOverrides,
    pub outputs: Vec<String>,
    pub rows: usize,
    pub flagged: Vec<FlaggedPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieval: Option<RetrievalRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPoint {
    pub d: f64,
    pub y: f64,
    pub theta: f64,
    pub method: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalRecord {
    /// Fitted `ξ_p′` in `c/a`, when the fit succeeded.
    pub plasma_c_per_a: Option<f64>,
    pub plasma_rad_per_s: Option<f64>,
    /// `ξ_p′ / ξ_p` for plasma or Drude wires.
    pub plasma_ratio: Option<f64>,
    /// Frequencies (`c/a`) where the inversion failed.
    pub excluded: Vec<f64>,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut w = create_buffered(path)?;
    serde_json::to_writer_pretty(&mut w, manifest)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}
