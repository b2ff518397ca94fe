//! Time loop with diagnostics at a fixed cadence, CSV series, checkpoints and
//! resume.

use super::checkpoint::Checkpoint;
use super::Solver;
use crate::diagnostics::{apriori_lhs, interaction_envelopes, DiagnosticsRecord, Snapshot};
use crate::error::{Error, Result};
use crate::gas::{fit_inverse_pressure, RelativeBoundConstants, RelativeSamples, RESOLVABLE_GAP};
use crate::verdict::Verdict;
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub t_end: f64,
    /// Time between diagnostics rows.
    pub cadence: f64,
    /// Write `checkpoint.chk` every this many diagnostics rows (0 = never).
    pub checkpoint_rows: u64,
}

/// Quantities recorded next to the main series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtraRecord {
    pub t: f64,
    pub n1: f64,
    pub n2: f64,
    pub transverse_ke: f64,
    pub sup_phi: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Smallest relative-bound constants that the visited pairs `(v, v̄)` need.
    pub visited: RelativeBoundConstants,
    /// Worst margin of the lower energy bound over the visited pairs.
    pub energy_lower_margin: f64,
    /// Smallest inverse-pressure constant that the visited shock volumes need.
    pub inverse_c: f64,
}

impl Default for ExtraRecord {
    fn default() -> Self {
        Self {
            t: 0.0,
            n1: 0.0,
            n2: 0.0,
            transverse_ke: 0.0,
            sup_phi: 0.0,
            rho_min: 0.0,
            rho_max: 0.0,
            visited: RelativeBoundConstants { quadratic_q: 0.0, quadratic_p: 0.0, pressure_upper: 0.0, energy_upper: 0.0 },
            energy_lower_margin: f64::INFINITY,
            inverse_c: 0.0,
        }
    }
}

impl ExtraRecord {
    pub const CSV_HEADER: &'static str =
        "t,N1,N2,transverse_ke,sup_phi,rho_min,rho_max,C_quadratic_q,C_quadratic_p,C_pressure_upper,C_energy_upper,energy_lower_margin,C_inverse";

    fn columns(&self) -> [f64; 13] {
        let c = &self.visited;
        [
            self.t,
            self.n1,
            self.n2,
            self.transverse_ke,
            self.sup_phi,
            self.rho_min,
            self.rho_max,
            c.quadratic_q,
            c.quadratic_p,
            c.pressure_upper,
            c.energy_upper,
            self.energy_lower_margin,
            self.inverse_c,
        ]
    }

    fn csv_row(&self) -> String {
        self.columns()
            .iter()
            .map(|x| format!("{x:.17e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    fn from_csv_row(line: &str) -> Result<Self> {
        let x: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Usage(format!("bad CSV row: {e}")))?;
        if x.len() != 13 {
            return Err(Error::Usage(format!("expected 13 columns, got {}", x.len())));
        }
        Ok(Self {
            t: x[0],
            n1: x[1],
            n2: x[2],
            transverse_ke: x[3],
            sup_phi: x[4],
            rho_min: x[5],
            rho_max: x[6],
            visited: RelativeBoundConstants { quadratic_q: x[7], quadratic_p: x[8], pressure_upper: x[9], energy_upper: x[10] },
            energy_lower_margin: x[11],
            inverse_c: x[12],
        })
    }
}

/// Bookkeeping stored next to a checkpoint so that a resumed run continues
/// the same series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResumeMeta {
    pub rows: u64,
    pub boundary_inflow: f64,
    pub initial_mass: f64,
    pub initial_h2: f64,
    pub last_dt: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    pub records: Vec<DiagnosticsRecord>,
    pub extras: Vec<ExtraRecord>,
    pub initial_h2: f64,
    pub steps: u64,
    /// Set when a step failed; the series up to the failure is kept.
    pub error: Option<String>,
}

/// Diagnostics of the current solver state.
pub fn record(solver: &Solver, dt: f64) -> Result<(DiagnosticsRecord, ExtraRecord)> {
    let t = solver.time();
    let x = solver.shift.x;
    let snap = Snapshot::new(&solver.wave, &solver.shift, &solver.grid, &solver.state, t, x)?;
    let xdot = if solver.control.couple_shift {
        solver.shift.shift_rate(&solver.wave, &solver.state, &solver.grid, t, x)?
    } else {
        0.0
    };
    let good = snap.good_terms();
    let (h2_phi, h2_psi) = snap.perturbation_h2();
    let (n1, n2) = interaction_envelopes(&solver.wave, t, x, 0.05)?;
    let rec = DiagnosticsRecord {
        t,
        dt,
        x,
        xdot,
        e_rel: snap.relative_entropy(),
        g2: good.g2,
        g3: good.g3,
        gr: good.gr,
        gs: good.gs,
        d: good.d,
        h2_phi,
        h2_psi,
        supdist: snap.sup_distance_limit(),
        mass_delta: solver.mass_delta(),
    };
    let extra = ExtraRecord {
        t,
        n1,
        n2,
        transverse_ke: snap.transverse_kinetic_energy(),
        sup_phi: snap.sup_phi(),
        rho_min: solver.state.rho.iter().copied().fold(f64::INFINITY, f64::min),
        rho_max: solver.state.rho.iter().copied().fold(0.0, f64::max),
        ..Default::default()
    };
    Ok((rec, visited_bounds(solver, &snap, extra)))
}

/// Relative-bound and inverse-pressure constants required by the states of
/// the current snapshot.
fn visited_bounds(solver: &Solver, snap: &Snapshot, mut extra: ExtraRecord) -> ExtraRecord {
    let g = solver.gas();
    let w = &solver.wave;
    let plane = solver.grid.plane();
    let v = solver.state.specific_volume();
    let delta = w.delta_s() + w.delta_r();
    let pairs = v.iter().enumerate().map(|(e, &x)| (x, snap.composite[e / plane].v));
    let samples = RelativeSamples::from_pairs(g, delta, pairs);
    extra.visited = samples.fit(g);
    let zero = RelativeBoundConstants { quadratic_q: 0.0, quadratic_p: 0.0, pressure_upper: 0.0, energy_upper: 0.0 };
    extra.energy_lower_margin = if samples.near.is_empty() { f64::INFINITY } else { samples.margins(g, &zero).energy_lower };
    let d = &w.shock.data;
    let (vm, vp) = (d.minus_state.v, d.plus_state.v);
    let resolvable = |x: f64| x - vm > RESOLVABLE_GAP && vp - x > RESOLVABLE_GAP;
    let inside: Vec<(f64, f64, f64)> = v.iter().filter(|x| resolvable(**x)).map(|&x| (d.delta_s, vp, x)).collect();
    extra.inverse_c = fit_inverse_pressure(g, vm, &inside);
    extra
}

struct Sink {
    dir: PathBuf,
    series: BufWriter<File>,
    extras: BufWriter<File>,
}

impl Sink {
    fn open(dir: &Path, keep: Option<(&[DiagnosticsRecord], &[ExtraRecord])>) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut series = BufWriter::new(OpenOptions::new().create(true).write(true).truncate(true).open(dir.join("series.csv"))?);
        let mut extras = BufWriter::new(OpenOptions::new().create(true).write(true).truncate(true).open(dir.join("extras.csv"))?);
        writeln!(series, "{}", DiagnosticsRecord::CSV_HEADER)?;
        writeln!(extras, "{}", ExtraRecord::CSV_HEADER)?;
        if let Some((r, e)) = keep {
            for x in r {
                writeln!(series, "{}", x.csv_row())?;
            }
            for x in e {
                writeln!(extras, "{}", x.csv_row())?;
            }
        }
        series.flush()?;
        extras.flush()?;
        Ok(Self { dir: dir.to_path_buf(), series, extras })
    }

    fn push(&mut self, r: &DiagnosticsRecord, e: &ExtraRecord) -> Result<()> {
        writeln!(self.series, "{}", r.csv_row())?;
        writeln!(self.extras, "{}", e.csv_row())?;
        self.series.flush()?;
        self.extras.flush()?;
        Ok(())
    }

    fn checkpoint(&self, solver: &Solver, name: &str, meta: &ResumeMeta) -> Result<()> {
        let g = &solver.grid;
        let c = Checkpoint { dims: [g.n1 as u64, g.n2 as u64, g.n3 as u64], state: solver.state.clone(), shift: solver.shift.x };
        c.save(&self.dir.join(format!("{name}.chk")))?;
        let json = serde_json::to_string_pretty(meta).map_err(|e| Error::Internal(e.to_string()))?;
        std::fs::write(self.dir.join(format!("{name}.json")), json)?;
        Ok(())
    }
}

/// Read a previously written series.
pub fn read_series(dir: &Path) -> Result<(Vec<DiagnosticsRecord>, Vec<ExtraRecord>)> {
    let lines = |name: &str| -> Result<Vec<String>> {
        let f = File::open(dir.join(name))?;
        BufReader::new(f).lines().skip(1).map(|l| l.map_err(Error::from)).filter(|l| !matches!(l, Ok(s) if s.trim().is_empty())).collect()
    };
    let r = lines("series.csv")?.iter().map(|l| DiagnosticsRecord::from_csv_row(l)).collect::<Result<Vec<_>>>()?;
    let e = lines("extras.csv")?.iter().map(|l| ExtraRecord::from_csv_row(l)).collect::<Result<Vec<_>>>()?;
    Ok((r, e))
}

/// Load a checkpoint (and its sidecar) into `solver`.
pub fn restore(solver: &mut Solver, checkpoint: &Path) -> Result<ResumeMeta> {
    let c = Checkpoint::load(checkpoint)?;
    let g = &solver.grid;
    if c.dims != [g.n1 as u64, g.n2 as u64, g.n3 as u64] {
        return Err(Error::Config(format!("checkpoint dims {:?} do not match the configured grid", c.dims)));
    }
    let meta_path = checkpoint.with_extension("json");
    let meta: ResumeMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)
        .map_err(|e| Error::Config(format!("{}: {e}", meta_path.display())))?;
    c.state.check_physical()?;
    solver.state = c.state;
    solver.shift.x = c.shift;
    solver.boundary_inflow = meta.boundary_inflow;
    solver.initial_mass = meta.initial_mass;
    Ok(meta)
}

/// Advance to `t_end`, recording diagnostics every `cadence`. With `out`
/// set, the series and checkpoints are written there. With `resume` set the
/// solver must already hold the restored state and the series is continued.
pub fn run(solver: &mut Solver, settings: &RunSettings, out: Option<&Path>, initial_h2: f64, resume: Option<ResumeMeta>) -> Result<RunArtifacts> {
    if !(settings.cadence > 0.0) || !(settings.t_end >= 0.0) {
        return Err(Error::Config("cadence must be > 0 and t_end >= 0".into()));
    }
    let mut art = RunArtifacts { initial_h2, ..Default::default() };
    let mut row: u64 = 0;
    let mut last_dt = 0.0;
    if let Some(meta) = resume {
        let dir = out.ok_or_else(|| Error::Usage("resume needs the output directory of the original run".into()))?;
        let (mut r, mut e) = read_series(dir)?;
        r.truncate(meta.rows as usize);
        e.truncate(meta.rows as usize);
        art.records = r;
        art.extras = e;
        art.initial_h2 = meta.initial_h2;
        row = meta.rows;
        last_dt = meta.last_dt;
    }
    let mut sink = match out {
        Some(d) => Some(Sink::open(d, Some((&art.records, &art.extras)))?),
        None => None,
    };
    let meta = |solver: &Solver, rows: u64, last_dt: f64, h2: f64| ResumeMeta {
        rows,
        boundary_inflow: solver.boundary_inflow,
        initial_mass: solver.initial_mass,
        initial_h2: h2,
        last_dt,
    };
    let n_rows = (settings.t_end / settings.cadence).round() as u64;
    if resume.is_none() {
        let (r, e) = record(solver, 0.0)?;
        if let Some(s) = sink.as_mut() {
            s.push(&r, &e)?;
        }
        art.records.push(r);
        art.extras.push(e);
        row = 1;
    }
    while row <= n_rows {
        let target = (row as f64 * settings.cadence).min(settings.t_end);
        let stepped = loop {
            if solver.time() >= target {
                break Ok(());
            }
            match solver.step(target) {
                Ok(rep) => {
                    last_dt = rep.dt;
                    art.steps += 1;
                }
                Err(e) => break Err(e),
            }
        };
        if let Err(e) = stepped {
            art.error = Some(e.to_string());
            if let Some(s) = sink.as_ref() {
                s.checkpoint(solver, "failed", &meta(solver, art.records.len() as u64, last_dt, art.initial_h2))?;
            }
            return Ok(art);
        }
        let (r, e) = record(solver, last_dt)?;
        if let Some(s) = sink.as_mut() {
            s.push(&r, &e)?;
        }
        art.records.push(r);
        art.extras.push(e);
        if let Some(s) = sink.as_ref() {
            if settings.checkpoint_rows > 0 && row % settings.checkpoint_rows == 0 {
                s.checkpoint(solver, "checkpoint", &meta(solver, art.records.len() as u64, last_dt, art.initial_h2))?;
            }
        }
        row += 1;
    }
    if let Some(s) = sink.as_ref() {
        s.checkpoint(solver, "final", &meta(solver, art.records.len() as u64, last_dt, art.initial_h2))?;
    }
    Ok(art)
}

/// Frozen constants of the run-level checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    /// `C₀` of the a priori inequality.
    pub apriori_c0: f64,
    /// `C` of `|X(t)| ≤ C t`.
    pub shift_growth: f64,
    pub delta_s: f64,
    pub delta_r: f64,
}

impl StabilityConstants {
    /// `|Ẋ| ≤ M(1+ν)ρ_max(L_p/σ*² + 1)‖v − v̄‖∞` with `L_p = |p'|` at
    /// `0.9 v_−` and `ρ_max = 1.1/v_−`; the growth constant uses the initial
    /// sup of `φ` inflated tenfold.
    pub fn frozen(solver: &Solver, initial_sup_phi: f64) -> Self {
        let s = &solver.shift;
        let g = solver.gas();
        let vl = solver.wave.left_state().v;
        let lp = g.dp(0.9 * vl).abs();
        let c0 = s.m * (1.0 + s.nu) * (1.1 / vl) * (lp / (s.sigma_star * s.sigma_star) + 1.0);
        Self { apriori_c0: 1.0, shift_growth: c0 * 10.0 * initial_sup_phi.max(1e-12), delta_s: s.delta_s, delta_r: solver.wave.delta_r() }
    }
}

/// Run-level checks on a finished series.
pub fn stability_verdicts(art: &RunArtifacts, k: &StabilityConstants) -> Vec<Verdict> {
    let r = &art.records;
    let mut out = vec![Verdict::flag("run completed without a physics or numerical error", art.error.is_none())];
    if r.is_empty() {
        return out;
    }
    let last = r.last().expect("non-empty");
    let peak = |f: &dyn Fn(&DiagnosticsRecord) -> f64| r.iter().map(f).filter(|x| x.is_finite()).fold(0.0, f64::max);
    let e_peak = peak(&|x| x.e_rel);
    out.push(Verdict::below("E_rel(final)/E_rel(peak)", last.e_rel / e_peak, 0.1));
    let s_peak = peak(&|x| x.supdist);
    out.push(Verdict::below("supdist(final)/supdist(peak)", last.supdist / s_peak, 0.2));
    let xd_peak = peak(&|x| x.xdot.abs());
    let xd_ratio = if xd_peak > 0.0 { last.xdot.abs() / xd_peak } else { 0.0 };
    out.push(Verdict::below("|Xdot(final)|/max|Xdot|", xd_ratio, 0.1));
    let growth = r.iter().filter(|x| x.t > 0.0).map(|x| x.x.abs() / x.t).fold(0.0, f64::max);
    out.push(Verdict::at_least("C - max |X(t)|/t", k.shift_growth - growth, 0.0));
    let finite = r.iter().all(|x| {
        [x.e_rel, x.g2, x.g3, x.gr, x.gs, x.d, x.h2_phi, x.h2_psi, x.x, x.xdot].iter().all(|v| v.is_finite())
    });
    out.push(Verdict::flag("all functionals finite", finite));
    let min_good = r
        .iter()
        .flat_map(|x| [x.e_rel, x.g2, x.g3, x.gr, x.gs, x.d])
        .fold(f64::INFINITY, f64::min);
    out.push(Verdict::at_least("min over run of E_rel and good terms", min_good, 0.0));
    let lhs = apriori_lhs(r, k.delta_s);
    let rhs = k.apriori_c0 * (art.initial_h2.powi(2) + k.delta_r.cbrt());
    out.push(Verdict::below("a priori functional / bound", lhs / rhs, 1.0));
    out
}

/// Stable means: the run finished, every functional stayed finite and
/// nonnegative, and the a priori inequality held.
pub fn is_stable(verdicts: &[Verdict]) -> bool {
    verdicts
        .iter()
        .filter(|v| {
            v.criterion.starts_with("run completed")
                || v.criterion.starts_with("all functionals")
                || v.criterion.starts_with("min over run")
                || v.criterion.starts_with("a priori")
        })
        .all(|v| v.pass)
}
