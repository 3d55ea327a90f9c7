//! Sweep execution.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use casimir_core::ema::{ema_pressure, log_grid, retrieve_table, EmaScheme, EffectiveEps, UniaxialSlab};
use casimir_core::energy::{casimir_pressure, node_matrices, quadrature_nodes, QuadratureScheme, SlabConfig, SlabSpec};
use casimir_core::materials::{Eps, MaterialModel};
use casimir_core::pfa::{derjaguin_force, pfa_pressure, PlanarScheme, PressureTable, SquareWireSlab};
use casimir_core::units::Period;
use log::{info, warn};

use crate::config::{EmaModel, Method, QuadratureOverrides, RunConfig, Sweep, Task};
use crate::material_file::MaterialDb;
use crate::output::{self, DerjaguinRow, FlaggedPoint, ForceRow, Manifest, RetrievalRecord, SweepRecord, TableRow};
use crate::pool::Pool;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Output directory.
    pub out: PathBuf,
    /// 0 for the machine's parallelism.
    pub workers: usize,
    pub dump_matrices: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// `None` when there was nothing to do.
    pub manifest: Option<Manifest>,
    pub files: Vec<PathBuf>,
    pub flagged: usize,
}

pub const VERSION: &str = concat!("casimir ", env!("CARGO_PKG_VERSION"));

/// Runs every sweep of a validated configuration and writes the outputs.
pub fn run(config: &RunConfig, db: &MaterialDb, opts: &RunOptions) -> Result<RunSummary> {
    if config.sweeps.is_empty() {
        warn!("the configuration has no sweeps; nothing to do");
        return Ok(RunSummary { manifest: None, files: Vec::new(), flagged: 0 });
    }
    std::fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let pool = Pool::new(opts.workers)?;
    info!("{} sweeps on {} workers", config.sweeps.len(), pool.workers());
    let mut files = Vec::new();
    let mut records = Vec::new();
    let mut materials = BTreeMap::new();
    let mut flagged = 0;
    for sweep in &config.sweeps {
        for name in [&sweep.materials.wire, &sweep.materials.substrate, &sweep.materials.fluid] {
            let file = db.file(name).with_context(|| format!("unknown material `{name}`"))?;
            materials.insert(name.clone(), file.clone());
        }
        let ctx = SweepContext::new(config, sweep, db, &pool, opts)?;
        let rec = ctx.run().with_context(|| format!("sweep `{}`", sweep.name))?;
        flagged += rec.flagged.len();
        files.extend(rec.outputs.iter().map(|f| opts.out.join(f)));
        records.push(rec);
    }
    let manifest = Manifest { version: VERSION.into(), config: config.clone(), materials, sweeps: records };
    let path = opts.out.join(&config.output.manifest);
    output::write_manifest(&path, &manifest)?;
    files.push(path);
    Ok(RunSummary { manifest: Some(manifest), files, flagged })
}

struct SweepContext<'a> {
    config: &'a RunConfig,
    sweep: &'a Sweep,
    pool: &'a Pool,
    opts: &'a RunOptions,
    period: Period,
    wire: MaterialModel,
    substrate: MaterialModel,
    fluid: MaterialModel,
    overrides: QuadratureOverrides,
    scheme: QuadratureScheme,
}

impl<'a> SweepContext<'a> {
    fn new(config: &'a RunConfig, sweep: &'a Sweep, db: &MaterialDb, pool: &'a Pool, opts: &'a RunOptions) -> Result<Self> {
        let model = |name: &str| -> Result<MaterialModel> {
            Ok(db.get(name).with_context(|| format!("unknown material `{name}`"))?.model.clone())
        };
        let overrides = match &sweep.quadrature {
            Some(q) => config.quadrature.overlay(q),
            None => config.quadrature.clone(),
        };
        let scheme = overrides.scheme();
        Ok(SweepContext {
            config,
            sweep,
            pool,
            opts,
            period: sweep.geometry.period(),
            wire: model(&sweep.materials.wire)?,
            substrate: model(&sweep.materials.substrate)?,
            fluid: model(&sweep.materials.fluid)?,
            overrides: resolved(&scheme),
            scheme,
        })
    }

    fn wires(&self) -> SlabSpec {
        SlabSpec::Wires { radius: self.sweep.geometry.radius, wire: self.wire.clone(), substrate: self.substrate.clone() }
    }

    fn slab_config(&self, d: f64, y: f64, orientation: casimir_core::energy::Orientation) -> SlabConfig {
        SlabConfig {
            slab1: self.wires(),
            slab2: self.wires(),
            fluid: self.fluid.clone(),
            period: self.period,
            d,
            y,
            orientation,
        }
    }

    fn record(&self, outputs: Vec<String>, rows: usize, flagged: Vec<FlaggedPoint>) -> SweepRecord {
        SweepRecord {
            name: self.sweep.name.clone(),
            quadrature: self.overrides.clone(),
            outputs,
            rows,
            flagged,
            retrieval: None,
        }
    }

    fn run(&self) -> Result<SweepRecord> {
        match self.sweep.task {
            Task::Force => self.forces(),
            Task::Retrieve => self.retrieve(),
            Task::Derjaguin => self.derjaguin(),
        }
    }

    fn forces(&self) -> Result<SweepRecord> {
        let c = &self.sweep.configuration;
        let placements = c.placements();
        let ema = if c.methods.contains(&Method::Ema) { Some(self.effective_slab()?) } else { None };
        let mut rows = Vec::new();
        for &d in &c.d {
            for &(y, theta, orientation) in &placements {
                for &method in &c.methods {
                    info!("{}: d = {d}, y = {y}, theta = {theta}, {method}", self.sweep.name);
                    let cfg = self.slab_config(d, y, orientation);
                    let row = match method {
                        Method::Exact | Method::Specular => {
                            let scheme = QuadratureScheme { specular_only: method == Method::Specular, ..self.scheme.clone() };
                            if self.opts.dump_matrices {
                                let tag = format!("{method}-{}", rows.len());
                                self.dump(&cfg, &scheme, &tag)?;
                            }
                            casimir_pressure(&cfg, &scheme, self.pool).map(|r| (r.energy, r.pressure, r.error, r.flagged))
                        }
                        Method::Ema => {
                            let slab = ema.as_ref().expect("built above");
                            let fine = self.config.ema.scheme();
                            let coarse = EmaScheme {
                                n_xi: (fine.n_xi / 2).max(2),
                                n_k: (fine.n_k / 2).max(2),
                                n_phi: (fine.n_phi / 2).max(1),
                            };
                            let run = |s: &EmaScheme| ema_pressure(slab, slab, orientation, &self.fluid, self.period, d, s);
                            run(&fine).and_then(|f| run(&coarse).map(|c| self.estimate(f.energy, f.pressure, c.pressure)))
                        }
                        Method::Pfa => {
                            let slab = SquareWireSlab {
                                width: self.sweep.geometry.radius,
                                wire: self.wire.clone(),
                                substrate: self.substrate.clone(),
                            };
                            let fine = self.config.pfa.scheme();
                            let coarse = PlanarScheme { n_xi: (fine.n_xi / 2).max(2), n_k: (fine.n_k / 2).max(2) };
                            let run = |s: &PlanarScheme| {
                                pfa_pressure(&slab, &slab, &self.fluid, self.period, d, y, orientation, s)
                            };
                            run(&fine).and_then(|f| run(&coarse).map(|c| self.estimate(f.energy, f.pressure, c.pressure)))
                        }
                    };
                    rows.push(match row {
                        Ok((energy, pressure, error, flagged)) => {
                            ForceRow { d, y, theta, method, energy, pressure, error, flagged, note: String::new() }
                        }
                        Err(e) => {
                            warn!("{}: d = {d}, y = {y}, theta = {theta}, {method}: {e}", self.sweep.name);
                            ForceRow {
                                d,
                                y,
                                theta,
                                method,
                                energy: f64::NAN,
                                pressure: f64::NAN,
                                error: f64::NAN,
                                flagged: true,
                                note: e.to_string(),
                            }
                        }
                    });
                }
            }
        }
        let file = format!("{}.csv", self.sweep.name);
        output::write_forces(&self.opts.out.join(&file), self.period, &rows)?;
        let flagged = rows
            .iter()
            .filter(|r| r.flagged)
            .map(|r| FlaggedPoint {
                d: r.d,
                y: r.y,
                theta: r.theta,
                method: r.method.to_string(),
                reason: if r.note.is_empty() {
                    format!("error estimate {} exceeds tolerance {}", output::num(r.error), self.scheme.tolerance)
                } else {
                    r.note.clone()
                },
            })
            .collect();
        Ok(self.record(vec![file], rows.len(), flagged))
    }

    /// `(E, P, err, flagged)` from a fine and a half-resolution pressure.
    fn estimate(&self, energy: f64, fine: f64, coarse: f64) -> (f64, f64, f64, bool) {
        let err = (fine - coarse).abs();
        (energy, fine, err, err > self.scheme.tolerance * fine.abs())
    }

    fn effective_slab(&self) -> Result<UniaxialSlab> {
        Ok(match self.config.ema.model {
            EmaModel::Static => UniaxialSlab::Constant { par: Eps::PerfectMetal, perp: self.substrate.static_limit() },
            EmaModel::Retrieved => {
                let (eps, excluded) = self.retrieval()?;
                if !excluded.is_empty() {
                    warn!("{}: retrieval failed at {} frequencies", self.sweep.name, excluded.len());
                }
                UniaxialSlab::Table(eps)
            }
        })
    }

    fn retrieval(&self) -> Result<(EffectiveEps, Vec<f64>)> {
        let r = &self.config.retrieval;
        let xis = log_grid(r.xi_min, r.xi_max, r.points);
        let out = retrieve_table(&self.wires(), &self.fluid, self.period, &xis, &r.scheme())?;
        let mut eps = out.eps;
        eps.fit_plasma(r.fit_below);
        Ok((eps, out.excluded))
    }

    fn retrieve(&self) -> Result<SweepRecord> {
        let (eps, excluded) = self.retrieval()?;
        let (xi, par, perp) = eps.samples();
        let file = format!("{}.csv", self.sweep.name);
        output::write_retrieval(&self.opts.out.join(&file), self.period, xi, par, perp)?;
        let plasma = eps.plasma_frequency();
        let wire_plasma = match &self.wire {
            MaterialModel::Plasma { plasma } => Some(*plasma),
            MaterialModel::Drude(d) => Some(d.plasma),
            _ => None,
        };
        let plasma_si = plasma.filter(|_| self.period.meters().is_some()).map(|p| self.period.xi_to_si(p));
        if !excluded.is_empty() {
            warn!("{}: retrieval failed at {} frequencies; they are left out of the table", self.sweep.name, excluded.len());
        }
        // Excluded frequencies are reported in the manifest; they are not
        // failed force points.
        let mut rec = self.record(vec![file], xi.len(), Vec::new());
        rec.retrieval = Some(RetrievalRecord {
            plasma_c_per_a: plasma,
            plasma_rad_per_s: plasma_si,
            plasma_ratio: plasma_si.zip(wire_plasma).map(|(p, w)| p / w),
            excluded,
        });
        Ok(rec)
    }

    fn derjaguin(&self) -> Result<SweepRecord> {
        let dj = self.sweep.derjaguin.as_ref().context("missing [derjaguin] block")?;
        let body = dj.curved_body();
        let c = &self.sweep.configuration;
        let mut outputs = Vec::new();
        let mut flagged = Vec::new();
        let mut rows = Vec::new();
        for (pi, &(y, theta, orientation)) in c.placements().iter().enumerate() {
            let table = match (&dj.table, &dj.table_csv) {
                (_, Some(path)) => {
                    let (d, p) = output::read_pressure_table(&self.opts.out.join(Path::new(path)))?;
                    PressureTable::new(self.period, d, p)?
                }
                (Some(grid), None) => {
                    let mut trows = Vec::new();
                    for d in grid.separations() {
                        info!("{}: table d = {d}, y = {y}, theta = {theta}", self.sweep.name);
                        let r = casimir_pressure(&self.slab_config(d, y, orientation), &self.scheme, self.pool)
                            .with_context(|| format!("pressure table at d = {d}"))?;
                        if r.flagged {
                            flagged.push(FlaggedPoint {
                                d,
                                y,
                                theta,
                                method: "exact".into(),
                                reason: format!("error estimate {} exceeds tolerance", output::num(r.error)),
                            });
                        }
                        trows.push(TableRow { d, pressure: r.pressure, error: r.error, flagged: r.flagged });
                    }
                    let file = format!("{}-table-{pi}.csv", self.sweep.name);
                    output::write_pressure_table(&self.opts.out.join(&file), self.period, &trows)?;
                    outputs.push(file);
                    PressureTable::new(self.period, trows.iter().map(|r| r.d).collect(), trows.iter().map(|r| r.pressure).collect())?
                }
                (None, None) => bail!("no pressure table source"),
            };
            for &d in &c.d {
                let f = derjaguin_force(body, &table, d)?;
                if f.outside_regime {
                    warn!("{}: R is not much larger than d and a at d = {d}", self.sweep.name);
                }
                if f.tail_fallback {
                    warn!("{}: power-law tail fit failed; tail truncated", self.sweep.name);
                }
                rows.push(DerjaguinRow {
                    d,
                    y,
                    theta,
                    body: match dj.body {
                        crate::config::BodyShape::Sphere => "sphere",
                        crate::config::BodyShape::Cylinder => "cylinder",
                    },
                    force: f.force,
                    tail: f.tail,
                    tail_fallback: f.tail_fallback,
                    outside_regime: f.outside_regime,
                });
            }
        }
        let file = format!("{}.csv", self.sweep.name);
        output::write_derjaguin(&self.opts.out.join(&file), self.period, &rows)?;
        outputs.push(file);
        Ok(self.record(outputs, rows.len(), flagged))
    }

    fn dump(&self, cfg: &SlabConfig, scheme: &QuadratureScheme, tag: &str) -> Result<()> {
        use std::io::Write;
        let dir = self.opts.out.join("matrices").join(&self.sweep.name);
        std::fs::create_dir_all(&dir)?;
        let mut w = output::create_buffered(&dir.join(format!("{tag}.txt")))?;
        let n_g = scheme.n_g;
        let basis = casimir_core::energy::joint_basis(cfg.orientation, n_g);
        w.write_all(output::dump_header(cfg.d, cfg.y, cfg.orientation, n_g, &basis.orders).as_bytes())?;
        for (i, node) in quadrature_nodes(cfg, scheme).iter().enumerate() {
            let m = node_matrices(cfg, scheme, n_g, node)?;
            output::dump_node(&mut w, i, node.xi, node.k_y, node.k_z, node.weight, &m)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Every field of `scheme` as an explicit override.
fn resolved(s: &QuadratureScheme) -> QuadratureOverrides {
    QuadratureOverrides {
        n_xi: Some(s.n_xi),
        xi_scale: s.xi_scale,
        n_k: Some(s.n_k),
        cluster: Some(s.cluster),
        grid_separation: s.grid_separation,
        n_g: Some(s.n_g),
        n_max: Some(s.n_max),
        extrapolate: s.extrapolate,
        error_estimate: Some(s.error_estimate),
        tolerance: Some(s.tolerance),
    }
}
