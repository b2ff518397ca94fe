//! The five commands. Each returns its verdicts and, given an output
//! directory, writes its tables and a verdict JSON there.

use super::config::RunConfig;
use crate::diagnostics::{
    interaction_envelopes, log_linear_slope, verify_gagliardo_nirenberg, verify_weighted_poincare,
    weighted_poincare_sides, PoincareQuadrature, Snapshot,
};
use crate::error::{Error, Result};
use crate::gas::{fit_inverse_pressure, inverse_pressure_margin, inverse_pressure_samples, RelativeBoundConstants, RelativeSamples};
use crate::rarefaction::{burgers_fan_gap, log_log_slope, rarefaction_envelopes, EnvelopeOptions, NormExponent};
use crate::shock::{lax_conditions, rh_connect, rh_residuals, ShockProfile};
use crate::solver::grid::SlabGrid;
use crate::solver::run::{self, is_stable, stability_verdicts, RunArtifacts, StabilityConstants};
use crate::solver::verification::{comoving_shock_error, manufactured_order};
use crate::solver::{init_state, Solver};
use crate::verdict::{self, Verdict};
use std::fmt::Write as _;
use std::path::Path;

/// Safety factor applied to constants fitted on one sample set before they
/// are checked on a fresh one.
pub const FREEZE_FACTOR: f64 = 1.25;
const MARGIN_FLOOR: f64 = -1e-8;

fn write_verdicts(out: Option<&Path>, name: &str, vs: &[Verdict]) -> Result<()> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), verdict::to_json(vs))?;
    }
    Ok(())
}

fn write_table(out: Option<&Path>, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut s = format!("{header}\n");
        for r in rows {
            let cells: Vec<String> = r.iter().map(|x| format!("{x:.17e}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        std::fs::write(dir.join(name), s)?;
    }
    Ok(())
}

/// Shock checks: jump conditions, Lax inequalities, monotonicity and the
/// tail rates at `δ_S` and `δ_S/2`.
pub fn profile_verdicts(cfg: &RunConfig) -> Result<(ShockProfile, Vec<Verdict>)> {
    cfg.validate_wave()?;
    let g = cfg.gas_model()?;
    let plus = cfg.plus_state()?;
    let data = rh_connect(&g, plus, cfg.wave.delta_s)?;
    let rh = rh_residuals(&g, &data);
    let lax = lax_conditions(&g, &data);
    let profile = ShockProfile::build(&g, data)?;
    let (l, r) = profile.tail_rate_fit()?;
    let half = ShockProfile::build(&g, rh_connect(&g, plus, 0.5 * cfg.wave.delta_s)?)?;
    let (hl, hr) = half.tail_rate_fit()?;
    let vs = vec![
        Verdict::below("Rankine-Hugoniot residual", rh[0].abs().max(rh[1].abs()), 1e-12),
        Verdict::flag("Lax inequalities strict", lax.iter().all(|x| *x)),
        Verdict::flag("profile monotone", profile.is_monotone()),
        Verdict::at_least("tail rate (left) positive", l, f64::MIN_POSITIVE),
        Verdict::at_least("tail rate (right) positive", r, f64::MIN_POSITIVE),
        Verdict::within("tail rate ratio delta_S/2 vs delta_S (left)", hl / l, 0.3, 0.7),
        Verdict::within("tail rate ratio delta_S/2 vs delta_S (right)", hr / r, 0.3, 0.7),
    ];
    Ok((profile, vs))
}

pub fn cmd_profile(cfg: &RunConfig, out: Option<&Path>) -> Result<Vec<Verdict>> {
    let (profile, vs) = profile_verdicts(cfg)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        profile.write_csv(std::io::BufWriter::new(std::fs::File::create(dir.join("profile.csv"))?))?;
    }
    write_verdicts(out, "profile_verdicts.json", &vs)?;
    Ok(vs)
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| (a.ln() + (b.ln() - a.ln()) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Rows `t, Linf_vx, L1_vx, Linf_u1x, Linf_vxx, burgers_gap` on a log-t grid.
pub fn rarefaction_table(cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate_wave()?;
    cfg.validate_envelopes()?;
    let cw = cfg.composite()?;
    let w = &cw.rarefaction;
    if w.is_degenerate() {
        return Ok(Vec::new());
    }
    let e = &cfg.envelopes;
    let opts = EnvelopeOptions { dx: e.dx, ..Default::default() };
    log_grid(e.t_min, e.t_max, e.points)
        .into_iter()
        .map(|t| {
            let inf = rarefaction_envelopes(w, t, NormExponent::Infinity, opts)?;
            let l1 = rarefaction_envelopes(w, t, NormExponent::Finite(1.0), opts)?;
            let gap = burgers_fan_gap(w.w_minus, w.w_m, t, 5.0 * e.dx)?;
            Ok(vec![t, inf.v_x, l1.v_x, inf.u1_x, inf.v_xx, gap])
        })
        .collect()
}

/// Envelope decay, the `L¹` bound, and convergence to the inviscid fan.
pub fn rarefaction_verdicts(cfg: &RunConfig, rows: &[Vec<f64>]) -> Result<Vec<Verdict>> {
    let cw = cfg.composite()?;
    let w = &cw.rarefaction;
    if w.is_degenerate() {
        return Ok(vec![Verdict::flag("degenerate rarefaction: envelopes vanish", rows.is_empty())]);
    }
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let linf: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let l1_worst = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    let l1_zero = rarefaction_envelopes(w, 0.0, NormExponent::Finite(1.0), EnvelopeOptions { dx: cfg.envelopes.dx, ..Default::default() })?.v_x;
    let gaps: Vec<f64> = rows.iter().map(|r| r[5]).collect();
    let increases = gaps.windows(2).map(|p| p[1] - p[0]).fold(f64::NEG_INFINITY, f64::max);
    let width = w.w_m - w.w_minus;
    Ok(vec![
        Verdict::within("Linf(d1 v^R) decay exponent", log_log_slope(&ts, &linf), -1.1, -0.9),
        Verdict::below("max_t L1(d1 v^R) / delta_R", l1_worst.max(l1_zero) / w.delta_r, 1.01 + 1e-12),
        Verdict::below("Burgers fan gap at t_max / (w_m - w_-)", gaps.last().copied().unwrap_or(f64::NAN) / width, 0.05),
        Verdict::below("largest increase of the fan gap between grid times", increases, 1e-12 * width),
    ])
}

/// Rows `t, N1, N2` over the interaction window.
pub fn interaction_table(cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate_wave()?;
    cfg.validate_envelopes()?;
    let cw = cfg.composite()?;
    let e = &cfg.envelopes;
    let n = 10;
    (0..n)
        .map(|k| {
            let t = e.interaction_t_min + (e.interaction_t_max - e.interaction_t_min) * k as f64 / (n - 1) as f64;
            let (n1, n2) = interaction_envelopes(&cw, t, 0.0, 0.05)?;
            Ok(vec![t, n1, n2])
        })
        .collect()
}

/// `log N1` slope against `δ_S`, and `N2/N1` against `√δ_S`.
pub fn interaction_verdicts(cfg: &RunConfig, rows: &[Vec<f64>]) -> Result<Vec<Verdict>> {
    let cw = cfg.composite()?;
    if cw.rarefaction.is_degenerate() {
        return Ok(vec![Verdict::flag("degenerate rarefaction: interaction vanishes", rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0))]);
    }
    let ds = cfg.wave.delta_s;
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let n1: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let slope = log_linear_slope(&ts, &n1);
    let (a, b) = interaction_envelopes(&cw, cfg.envelopes.interaction_t_probe, 0.0, 0.05)?;
    Ok(vec![
        Verdict::below("log N1 slope", slope, 0.0),
        Verdict::within("|log N1 slope| / delta_S", slope.abs() / ds, 1.0 / 3.0, 3.0),
        Verdict::within("N2/N1 / sqrt(delta_S) at the probe time", b / a / ds.sqrt(), 1.0 / 3.0, 3.0),
    ])
}

pub fn cmd_rarefaction(cfg: &RunConfig, out: Option<&Path>) -> Result<Vec<Verdict>> {
    let rows = rarefaction_table(cfg)?;
    write_table(out, "envelopes.csv", "t,Linf_vx,L1_vx,Linf_u1x,Linf_vxx,burgers_gap", &rows)?;
    let inter = interaction_table(cfg)?;
    write_table(out, "interaction.csv", "t,N1,N2", &inter)?;
    let mut vs = rarefaction_verdicts(cfg, &rows)?;
    vs.extend(interaction_verdicts(cfg, &inter)?);
    write_verdicts(out, "rarefaction_verdicts.json", &vs)?;
    Ok(vs)
}

fn scale(c: RelativeBoundConstants, f: f64) -> RelativeBoundConstants {
    RelativeBoundConstants {
        quadratic_q: c.quadratic_q * f,
        quadratic_p: c.quadratic_p * f,
        pressure_upper: c.pressure_upper * f,
        energy_upper: c.energy_upper * f,
    }
}

/// Randomized functional-inequality suites. The relative-quantity constants
/// are fitted on the configured seed, inflated by [`FREEZE_FACTOR`] and
/// checked on fresh samples; the Gagliardo-Nirenberg constant is reported as
/// fitted.
pub fn inequality_verdicts(cfg: &RunConfig) -> Result<Vec<Verdict>> {
    cfg.validate_wave()?;
    cfg.validate_verify()?;
    let v = &cfg.verify;
    let g = cfg.gas_model()?;
    let cw = cfg.composite()?;
    let quad = PoincareQuadrature::default();
    let mut vs = Vec::new();

    let (l, r) = weighted_poincare_sides(&|y1, _, _| [y1, 1.0, 0.0, 0.0], quad)?;
    vs.push(Verdict::below("Poincare equality case |LHS - 1/12|", (l - 1.0 / 12.0).abs(), 1e-6));
    vs.push(Verdict::below("Poincare equality case |RHS - 1/12|", (r - 1.0 / 12.0).abs(), 1e-6));
    vs.push(Verdict::at_least("Poincare worst margin", verify_weighted_poincare(v.poincare_trials, v.seed, quad)?, MARGIN_FLOOR));

    let planar = SlabGrid::new(-20.0, 20.0, 800, 1, 1)?;
    let general = SlabGrid::new(-20.0, 20.0, 160, 12, 12)?;
    let fit = verify_gagliardo_nirenberg(&planar, &general, v.gn_trials, v.seed);
    vs.push(Verdict::at_least("Gagliardo-Nirenberg planar margin", fit.planar_margin, MARGIN_FLOOR));
    vs.push(Verdict::flag("Gagliardo-Nirenberg fitted C finite", fit.fitted_c.is_finite()));

    let (frozen, c) = frozen_constants(cfg)?;
    let check = RelativeSamples::generate(&g, cw.middle().v, cfg.wave.delta_s + cfg.wave.delta_r, v.relative_samples, v.seed.wrapping_add(1));
    vs.push(Verdict::at_least("relative quantity bounds worst margin", check.margins(&g, &frozen).worst(), MARGIN_FLOOR));

    let v_minus = cw.middle().v;
    let check = inverse_pressure_samples(&g, v_minus, cfg.wave.delta_s, v.inverse_samples, v.seed.wrapping_add(1));
    vs.push(Verdict::at_least("inverse pressure bound worst margin", inverse_pressure_margin(&g, v_minus, &check, c), MARGIN_FLOOR));
    Ok(vs)
}

/// Relative-bound and inverse-pressure constants fitted on the configured
/// seed and inflated by [`FREEZE_FACTOR`]; the inverse constant is zero
/// under `force_failure`.
pub fn frozen_constants(cfg: &RunConfig) -> Result<(RelativeBoundConstants, f64)> {
    let v = &cfg.verify;
    let g = cfg.gas_model()?;
    let cw = cfg.composite()?;
    let calib = RelativeSamples::generate(&g, cw.middle().v, cfg.wave.delta_s + cfg.wave.delta_r, v.relative_samples, v.seed);
    let v_minus = cw.middle().v;
    let inv = inverse_pressure_samples(&g, v_minus, cfg.wave.delta_s, v.inverse_samples, v.seed);
    let c = if v.force_failure { 0.0 } else { fit_inverse_pressure(&g, v_minus, &inv) * FREEZE_FACTOR };
    Ok((scale(calib.fit(&g), FREEZE_FACTOR), c))
}

/// Frozen constants against the largest ones the visited states needed.
fn in_situ_verdicts(art: &RunArtifacts, frozen: &RelativeBoundConstants, inverse_c: f64) -> Vec<Verdict> {
    let mut rel = f64::INFINITY;
    let mut lower = f64::INFINITY;
    let mut inv = f64::INFINITY;
    for e in &art.extras {
        let c = &e.visited;
        rel = rel
            .min(frozen.quadratic_q - c.quadratic_q)
            .min(frozen.quadratic_p - c.quadratic_p)
            .min(frozen.pressure_upper - c.pressure_upper)
            .min(frozen.energy_upper - c.energy_upper);
        lower = lower.min(e.energy_lower_margin);
        inv = inv.min(inverse_c - e.inverse_c);
    }
    vec![
        Verdict::at_least("in-situ relative bounds: frozen minus visited constant", rel, MARGIN_FLOOR),
        Verdict::at_least("in-situ lower energy bound margin", lower, MARGIN_FLOOR),
        Verdict::at_least("in-situ inverse pressure: frozen minus visited constant", inv, MARGIN_FLOOR),
    ]
}

/// Second-order checks of the discrete scheme.
pub fn scheme_verdicts(cfg: &RunConfig) -> Result<Vec<Verdict>> {
    cfg.validate_wave()?;
    let g = cfg.gas_model()?;
    let order = manufactured_order(&g)?;
    let (e1, _) = comoving_shock_error(&g, cfg.plus_state()?, cfg.wave.delta_s, 400, 1.0)?;
    let (e2, _) = comoving_shock_error(&g, cfg.plus_state()?, cfg.wave.delta_s, 800, 1.0)?;
    Ok(vec![
        Verdict::within("manufactured solution order", order, 1.7, 2.3),
        Verdict::within("co-moving shock sup-error order", (e1 / e2).log2(), 1.7, 2.3),
    ])
}

pub fn cmd_verify(cfg: &RunConfig, out: Option<&Path>) -> Result<Vec<Verdict>> {
    let mut vs = inequality_verdicts(cfg)?;
    vs.extend(scheme_verdicts(cfg)?);
    write_verdicts(out, "verify_verdicts.json", &vs)?;
    Ok(vs)
}

/// Result of a time-dependent run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub artifacts: RunArtifacts,
    pub constants: StabilityConstants,
    pub verdicts: Vec<Verdict>,
}

/// Trapezoid integral of the `G3` column.
pub fn g3_integral(art: &RunArtifacts) -> f64 {
    art.records.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].g3 + w[1].g3)).sum()
}

/// Build the solver from the config, optionally restore a checkpoint, run
/// and judge. Without `out` nothing is written.
pub fn simulate(cfg: &RunConfig, out: Option<&Path>, resume: Option<&Path>) -> Result<Simulation> {
    cfg.validate_run()?;
    let cw = cfg.composite()?;
    let grid = cfg.slab()?;
    let (state, h2) = init_state(&cw, &grid, &cfg.perturbation_spec())?;
    let mut solver = Solver::new(cw, grid, state, cfg.step_control())?;
    let sup_phi0 = Snapshot::new(&solver.wave, &solver.shift, &solver.grid, &solver.state, 0.0, 0.0)?.sup_phi();
    let constants = StabilityConstants::frozen(&solver, sup_phi0);
    let meta = match resume {
        Some(p) => Some(run::restore(&mut solver, p)?),
        None => None,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    }
    let artifacts = run::run(&mut solver, &cfg.run_settings(), out, h2, meta)?;
    let mut verdicts = stability_verdicts(&artifacts, &constants);
    let (frozen, inverse_c) = frozen_constants(cfg)?;
    verdicts.extend(in_situ_verdicts(&artifacts, &frozen, inverse_c));
    if !grid.is_planar() {
        let ke: Vec<f64> = artifacts.extras.iter().map(|e| e.transverse_ke).collect();
        let peak = ke.iter().copied().fold(0.0, f64::max);
        let last = ke.last().copied().unwrap_or(f64::NAN);
        verdicts.push(Verdict::at_least("transverse KE peak/final", peak / last, 10.0));
        let g3 = g3_integral(&artifacts);
        verdicts.push(Verdict::flag("G3 time integral finite and positive", g3.is_finite() && g3 > 0.0));
    }
    verdicts.push(Verdict::flag("verdict stable", is_stable(&verdicts)));
    write_verdicts(out, "verdicts.json", &verdicts)?;
    Ok(Simulation { artifacts, constants, verdicts })
}

/// Verdict files found in `dir`, in a fixed order.
pub const VERDICT_FILES: [&str; 4] = ["profile_verdicts.json", "rarefaction_verdicts.json", "verify_verdicts.json", "verdicts.json"];

/// Collect the verdict files of earlier commands in `dir`.
pub fn cmd_report(dir: &Path) -> Result<Vec<(String, Vec<Verdict>)>> {
    let mut found = Vec::new();
    for name in VERDICT_FILES {
        let p = dir.join(name);
        if !p.exists() {
            continue;
        }
        let text = std::fs::read_to_string(&p)?;
        let vs: Vec<Verdict> = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
        found.push((name.to_string(), vs));
    }
    if found.is_empty() {
        return Err(Error::Config(format!("no verdict files in {}", dir.display())));
    }
    Ok(found)
}
