//! Run configuration: TOML with every default embedded.

use crate::composite::CompositeWave;
use crate::error::{Error, Result};
use crate::gas::{GasModel, PlanarState};
use crate::solver::grid::SlabGrid;
use crate::solver::run::RunSettings;
use crate::solver::{BoundaryMode, PerturbationMode, PerturbationSpec, StepControl};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_TOML: &str = include_str!("../../configs/default.toml");
pub const S3_TOML: &str = include_str!("../../configs/s3.toml");

/// Cap on `δ_R + δ_S`.
pub const DELTA0_CAP: f64 = 0.3;
/// Cap on the `H²` size of the initial perturbation.
pub const EPS0_CAP: f64 = 0.05;
/// Fraction of the slab length kept free of waves at each `x1` end.
pub const BOUNDARY_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    pub v_plus: f64,
    pub u1_plus: f64,
    pub delta_s: f64,
    pub delta_r: f64,
    pub shock_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x1_min: f64,
    pub x1_max: f64,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    pub amplitude: f64,
    pub mode: PerturbationMode,
    pub center: f64,
    pub support_width: f64,
    pub transverse_wavenumbers: [u32; 2],
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "3d")]
    ThreeD,
    VerifyOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: Mode,
    pub t_end: f64,
    pub cadence: f64,
    /// Checkpoint every this many diagnostics rows (0 = only the final one).
    pub checkpoint_every: u64,
    pub cfl: f64,
    pub visc_cfl: f64,
    pub boundary: BoundaryMode,
    pub couple_shift: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub dx: f64,
    pub interaction_t_min: f64,
    pub interaction_t_max: f64,
    pub interaction_t_probe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub poincare_trials: usize,
    pub gn_trials: usize,
    pub relative_samples: usize,
    pub inverse_samples: usize,
    pub seed: u64,
    /// Freeze one constant at zero so that its margin goes negative.
    pub force_failure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gas: GasSection,
    pub wave: WaveSection,
    pub grid: GridSection,
    pub perturbation: PerturbationSection,
    pub run: RunSection,
    pub envelopes: EnvelopeSection,
    pub verify: VerifySection,
    pub output: OutputSection,
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_table() && v.is_table() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_toml_str("").expect("embedded defaults parse")
    }
}

impl RunConfig {
    /// Parse `text` layered over the embedded defaults. Keys that are not
    /// part of the schema are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut base: toml::Value = toml::from_str(DEFAULT_TOML).map_err(|e| Error::Internal(e.to_string()))?;
        let over: toml::Value = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        merge(&mut base, over);
        base.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Fails when a seed does not fit a TOML integer.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    pub fn gas_model(&self) -> Result<GasModel> {
        GasModel::new(self.gas.gamma, self.gas.mu, self.gas.lambda).map_err(as_config)
    }

    pub fn plus_state(&self) -> Result<PlanarState> {
        PlanarState::new(self.wave.v_plus, self.wave.u1_plus).map_err(as_config)
    }

    pub fn composite(&self) -> Result<CompositeWave> {
        let w = &self.wave;
        CompositeWave::from_strengths(&self.gas_model()?, self.plus_state()?, w.delta_s, w.delta_r, w.shock_offset)
    }

    pub fn slab(&self) -> Result<SlabGrid> {
        let g = &self.grid;
        SlabGrid::new(g.x1_min, g.x1_max, g.n1, g.n2, g.n3).map_err(as_config)
    }

    pub fn perturbation_spec(&self) -> PerturbationSpec {
        let p = &self.perturbation;
        PerturbationSpec {
            amplitude: p.amplitude,
            mode: p.mode,
            center: p.center,
            support_width: p.support_width,
            transverse_wavenumbers: p.transverse_wavenumbers,
            seed: p.seed,
        }
    }

    pub fn step_control(&self) -> StepControl {
        let r = &self.run;
        StepControl { cfl: r.cfl, visc_cfl: r.visc_cfl, boundary: r.boundary, couple_shift: r.couple_shift }
    }

    pub fn run_settings(&self) -> RunSettings {
        RunSettings { t_end: self.run.t_end, cadence: self.run.cadence, checkpoint_rows: self.run.checkpoint_every }
    }

    /// Gas and wave checks shared by every command.
    pub fn validate_wave(&self) -> Result<()> {
        self.gas_model()?;
        self.plus_state()?;
        let w = &self.wave;
        if !(w.delta_s > 0.0) || !(w.delta_r >= 0.0) {
            return Err(Error::Config(format!("wave.delta_s must be > 0 and wave.delta_r >= 0, got {} and {}", w.delta_s, w.delta_r)));
        }
        let delta = w.delta_s + w.delta_r;
        if delta > DELTA0_CAP {
            return Err(Error::Config(format!("wave strength delta_s + delta_r = {delta} exceeds the cap {DELTA0_CAP}")));
        }
        if !w.shock_offset.is_finite() {
            return Err(Error::Config("wave.shock_offset must be finite".into()));
        }
        Ok(())
    }

    pub fn validate_envelopes(&self) -> Result<()> {
        let e = &self.envelopes;
        let ok = e.t_min > 0.0 && e.t_max > e.t_min && e.points >= 3 && e.dx > 0.0;
        let ok = ok && e.interaction_t_min >= 0.0 && e.interaction_t_max > e.interaction_t_min && e.interaction_t_probe >= 0.0;
        if !ok {
            return Err(Error::Config("envelopes: need 0 < t_min < t_max, points >= 3, dx > 0 and an increasing interaction window".into()));
        }
        Ok(())
    }

    pub fn validate_verify(&self) -> Result<()> {
        let v = &self.verify;
        if v.poincare_trials == 0 || v.gn_trials < 2 || v.relative_samples < 2 || v.inverse_samples == 0 {
            return Err(Error::Config("verify: trial and sample counts must be positive (gn_trials >= 2, relative_samples >= 2)".into()));
        }
        Ok(())
    }

    /// Everything `simulate` needs, including the boundary-distance check.
    pub fn validate_run(&self) -> Result<()> {
        self.validate_wave()?;
        let grid = self.slab()?;
        let r = &self.run;
        match r.mode {
            Mode::OneD if !grid.is_planar() => return Err(Error::Config("run.mode = \"1d\" needs grid.n2 = grid.n3 = 1".into())),
            Mode::ThreeD if grid.is_planar() => return Err(Error::Config("run.mode = \"3d\" needs grid.n2 > 1 or grid.n3 > 1".into())),
            Mode::VerifyOnly => return Err(Error::Config("run.mode = \"verify-only\" does not run the solver".into())),
            _ => {}
        }
        if !(r.t_end >= 0.0) || !(r.cadence > 0.0) || !r.t_end.is_finite() {
            return Err(Error::Config(format!("run.t_end must be >= 0 and run.cadence > 0, got {} and {}", r.t_end, r.cadence)));
        }
        if !(r.cfl > 0.0 && r.cfl <= 1.0) || !(r.visc_cfl > 0.0 && r.visc_cfl <= 0.5) {
            return Err(Error::Config("run.cfl must lie in (0, 1] and run.visc_cfl in (0, 0.5]".into()));
        }
        let p = &self.perturbation;
        if !(p.amplitude >= 0.0) || p.amplitude > EPS0_CAP {
            return Err(Error::Config(format!("perturbation.amplitude = {} outside [0, {EPS0_CAP}]", p.amplitude)));
        }
        if !(p.support_width > 0.0) {
            return Err(Error::Config("perturbation.support_width must be > 0".into()));
        }
        self.check_boundary_distance(&self.composite()?, &grid)
    }

    /// The rarefaction edges travel at `λ1` of the end states and the shock
    /// at `σ`; all of them, and the perturbation support, must stay inside
    /// the slab with a margin of 10% of its length at each end.
    pub fn check_boundary_distance(&self, cw: &CompositeWave, grid: &SlabGrid) -> Result<()> {
        let g = &cw.gas;
        let t = self.run.t_end;
        let (l1l, l1m) = (g.lambda1(cw.left_state()), g.lambda1(cw.middle()));
        let xs = cw.offset + cw.shock.data.sigma * t;
        let p = &self.perturbation;
        let feats = [l1l * (1.0 + t), l1m * (1.0 + t), l1l, l1m, cw.offset, xs, p.center - p.support_width, p.center + p.support_width];
        let lo = feats.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = feats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = grid.x1_max - grid.x1_min;
        let (a, b) = (grid.x1_min + BOUNDARY_MARGIN * span, grid.x1_max - BOUNDARY_MARGIN * span);
        if lo < a || hi > b {
            return Err(Error::Config(format!(
                "waves reach [{lo:.2}, {hi:.2}] by t = {t}, outside the admissible [{a:.2}, {b:.2}] of the slab [{}, {}]",
                grid.x1_min, grid.x1_max
            )));
        }
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) | Error::Usage(m) | Error::Physics(m) => Error::Config(m),
        other => other,
    }
}
