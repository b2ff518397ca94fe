//! Superposition of the approximate 1-rarefaction and the shifted viscous
//! 2-shock, together with the perturbation fields and the source terms of the
//! system satisfied by `(φ, h − h̄)`.

use crate::error::{Error, Result};
use crate::gas::{GasModel, PlanarState};
use crate::rarefaction::{RarefactionSample, RarefactionWave};
use crate::shock::{rh_connect, ShockProfile, ShockSample};
use crate::solver::grid::{partial, FlowState, SlabGrid};

/// Beyond this distance from the smoothed fan the rarefaction equals its far
/// field to below `e^{-50}` relative.
const FAN_MARGIN: f64 = 25.0;

/// Default placement of the shock centre at `t = 0`.
pub const DEFAULT_SHOCK_OFFSET: f64 = 40.0;

#[derive(Debug, Clone)]
pub struct CompositeWave {
    pub gas: GasModel,
    pub rarefaction: RarefactionWave,
    pub shock: ShockProfile,
    /// Shock centre at `t = 0, X = 0`.
    pub offset: f64,
}

/// Composite fields at one point, with the two components they are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeSample {
    pub v: f64,
    pub u1: f64,
    pub h1: f64,
    pub v_x: f64,
    pub u1_x: f64,
    pub v_xx: f64,
    pub rare: RarefactionSample,
    pub shock: ShockSample,
}

/// `(φ, ψ, h − h̄)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub phi: Vec<f64>,
    pub psi: [Vec<f64>; 3],
    pub h_minus_hbar: [Vec<f64>; 3],
}

/// Source terms on a grid. `defect` is `∂₁p̄ − ∂₁p^R − ∂₁p^S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sources {
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub q3: Vec<f64>,
    pub f: Vec<f64>,
    pub defect: Vec<f64>,
}

impl CompositeWave {
    pub fn new(g: &GasModel, rarefaction: RarefactionWave, shock: ShockProfile, offset: f64) -> Result<Self> {
        let (r, s) = (rarefaction.right_state, shock.data.minus_state);
        if (r.rho() - s.rho()).abs() > 1e-12 || (r.u1 - s.u1).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "rarefaction right state ({}, {}) differs from shock left state ({}, {})",
                r.v, r.u1, s.v, s.u1
            )));
        }
        if !offset.is_finite() {
            return Err(Error::Config("shock offset must be finite".into()));
        }
        Ok(Self { gas: *g, rarefaction, shock, offset })
    }

    /// Build both waves from the right state and the two strengths.
    pub fn from_strengths(g: &GasModel, plus: PlanarState, delta_s: f64, delta_r: f64, offset: f64) -> Result<Self> {
        let data = rh_connect(g, plus, delta_s)?;
        let shock = ShockProfile::build(g, data)?;
        let rarefaction = RarefactionWave::ending_at(g, data.minus_state, delta_r)?;
        Self::new(g, rarefaction, shock, offset)
    }

    pub fn middle(&self) -> PlanarState {
        self.shock.data.minus_state
    }

    pub fn left_state(&self) -> PlanarState {
        self.rarefaction.left_state
    }

    pub fn right_state(&self) -> PlanarState {
        self.shock.data.plus_state
    }

    pub fn delta_r(&self) -> f64 {
        self.rarefaction.delta_r
    }

    pub fn delta_s(&self) -> f64 {
        self.shock.data.delta_s
    }

    /// `δ = |v_+ − v_m| + |v_m − v_−|`.
    pub fn total_strength(&self) -> f64 {
        (self.right_state().v - self.middle().v).abs() + (self.middle().v - self.left_state().v).abs()
    }

    /// Profile coordinate `ξ = x1 − offset − σt − X`.
    pub fn shock_coordinate(&self, t: f64, x1: f64, shift: f64) -> f64 {
        x1 - self.offset - self.shock.data.sigma * t - shift
    }

    /// Interval outside of which the smoothed fan is at its far fields.
    pub fn fan_window(&self, t: f64) -> (f64, f64) {
        let r = &self.rarefaction;
        (r.w_minus * (1.0 + t) - FAN_MARGIN, r.w_m * (1.0 + t) + FAN_MARGIN)
    }

    pub fn rarefaction_at(&self, t: f64, x1: f64) -> Result<RarefactionSample> {
        let (lo, hi) = self.fan_window(t);
        let r = &self.rarefaction;
        if t >= 0.0 && !r.is_degenerate() {
            let far = |s: PlanarState| RarefactionSample { v: s.v, u1: s.u1, ..Default::default() };
            if x1 < lo {
                return Ok(far(r.left_state));
            }
            if x1 > hi {
                return Ok(far(r.right_state));
            }
        }
        r.approx_state(t, x1)
    }

    pub fn shock_at(&self, t: f64, x1: f64, shift: f64) -> ShockSample {
        self.shock.eval(self.shock_coordinate(t, x1, shift))
    }

    /// `(v̄, ū1, h̄1)` and their `x1` derivatives.
    pub fn eval(&self, t: f64, x1: f64, shift: f64) -> Result<CompositeSample> {
        let rare = self.rarefaction_at(t, x1)?;
        let shock = self.shock_at(t, x1, shift);
        let m = self.middle();
        Ok(CompositeSample {
            v: shock.v + (rare.v - m.v),
            u1: shock.u1 + (rare.u1 - m.u1),
            h1: shock.h1 + (rare.u1 - m.u1),
            v_x: rare.v_x + shock.v_x,
            u1_x: rare.u1_x + shock.u1_x,
            v_xx: rare.v_xx + shock.v_xx,
            rare,
            shock,
        })
    }

    /// Same as [`eval`](Self::eval) at a point of the slab; the transverse
    /// coordinates do not enter.
    pub fn eval_at(&self, t: f64, x: [f64; 3], shift: f64) -> Result<CompositeSample> {
        self.eval(t, x[0], shift)
    }

    /// Composite built with the inviscid fan `w^r(x1/t)` in place of the
    /// smoothed rarefaction.
    pub fn eval_exact(&self, t: f64, x1: f64, shift: f64) -> Result<(f64, f64)> {
        self.eval_exact_split(t, t, x1, shift)
    }

    /// Fan at `t_fan`, shock at `t`.
    pub(crate) fn eval_exact_split(&self, t_fan: f64, t: f64, x1: f64, shift: f64) -> Result<(f64, f64)> {
        let (vr, ur) = if self.rarefaction.is_degenerate() {
            (self.middle().v, self.middle().u1)
        } else {
            self.rarefaction.exact_state(t_fan, x1)?
        };
        let s = self.shock_at(t, x1, shift);
        let m = self.middle();
        Ok((vr + s.v - m.v, ur + s.u1 - m.u1))
    }

    /// Composite samples at every `x1` cell centre.
    pub fn planar(&self, grid: &SlabGrid, t: f64, shift: f64) -> Result<Vec<CompositeSample>> {
        (0..grid.n1).map(|i| self.eval(t, grid.x1(i), shift)).collect()
    }

    /// The composite wave as a flow state.
    pub fn sample_state(&self, grid: &SlabGrid, t: f64, shift: f64) -> Result<FlowState> {
        let cs = self.planar(grid, t, shift)?;
        let v = grid.broadcast(&cs.iter().map(|c| c.v).collect::<Vec<_>>());
        let u1 = grid.broadcast(&cs.iter().map(|c| c.u1).collect::<Vec<_>>());
        let zero = vec![0.0; grid.len()];
        Ok(FlowState::from_primitive(&v, [&u1, &zero, &zero], t))
    }

    pub fn perturbation(&self, state: &FlowState, grid: &SlabGrid, t: f64, shift: f64) -> Result<Perturbation> {
        state.check(grid)?;
        let cs = self.planar(grid, t, shift)?;
        let v = state.specific_volume();
        let u = state.velocity();
        let h = effective_velocity(&self.gas, &v, &u, grid)?;
        let plane = grid.plane();
        let mut phi = vec![0.0; grid.len()];
        let mut psi1 = vec![0.0; grid.len()];
        let mut dh1 = vec![0.0; grid.len()];
        for (i, c) in cs.iter().enumerate() {
            for q in i * plane..(i + 1) * plane {
                phi[q] = v[q] - c.v;
                psi1[q] = u[0][q] - c.u1;
                dh1[q] = h[0][q] - c.h1;
            }
        }
        let [_, u2, u3] = u;
        let [_, h2, h3] = h;
        Ok(Perturbation { phi, psi: [psi1, u2.clone(), u3.clone()], h_minus_hbar: [dh1, h2, h3] })
    }

    pub fn interaction_sources(&self, state: &FlowState, grid: &SlabGrid, t: f64, shift: f64) -> Result<Sources> {
        state.check(grid)?;
        let cs = self.planar(grid, t, shift)?;
        let plane = grid.plane();
        let n = grid.len();
        let mut out = Sources { q1: vec![0.0; n], q2: vec![0.0; n], q3: vec![0.0; n], f: vec![0.0; n], defect: vec![0.0; n] };
        for (i, c) in cs.iter().enumerate() {
            for q in i * plane..(i + 1) * plane {
                let rho = state.rho[q];
                let s = self.point_sources(c, rho, state.mom[0][q] / rho);
                out.q1[q] = s[0];
                out.q2[q] = s[1];
                out.q3[q] = s[2];
                out.f[q] = s[3];
                out.defect[q] = s[4];
            }
        }
        Ok(out)
    }

    /// `[Q1, Q2, Q3, F, defect]` for density `rho` and normal velocity `u1`.
    pub fn point_sources(&self, c: &CompositeSample, rho: f64, u1: f64) -> [f64; 5] {
        let g = &self.gas;
        let (r, s) = (&c.rare, &c.shock);
        let v = 1.0 / rho;
        let sstar = self.shock.data.sigma_star;
        let f = sstar * rho * (v - s.v) + rho * (u1 - s.u1);
        let p_r_x = g.dp(r.v) * r.v_x;
        let defect = g.dp(c.v) * c.v_x - p_r_x - g.dp(s.v) * s.v_x;
        let q1 = rho * (u1 - r.u1) * r.v_x - rho * (v - r.v) * r.u1_x + f * s.v_x;
        let common = rho * (u1 - r.u1) * r.u1_x + rho * (v - r.v) * p_r_x + defect;
        [q1, common + f * s.h1_x, common + f * s.u1_x, f, defect]
    }
}

/// `h = u − (2μ+λ)∇v` with centred differences.
pub fn effective_velocity(g: &GasModel, v: &[f64], u: &[Vec<f64>; 3], grid: &SlabGrid) -> Result<[Vec<f64>; 3]> {
    grid.check_field(v)?;
    for c in u {
        grid.check_field(c)?;
    }
    let k = g.visc();
    Ok([0, 1, 2].map(|a| {
        let dv = partial(grid, v, a);
        u[a].iter().zip(dv).map(|(u, d)| u - k * d).collect()
    }))
}
