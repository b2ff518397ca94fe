//! Weight function `a`, the shift ODE for `X(t)` and its time integration.

use crate::composite::CompositeWave;
use crate::error::{Error, Result};
use crate::gas::GasModel;
use crate::solver::grid::{pairwise_sum, FlowState, SlabGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftState {
    pub x: f64,
    pub xdot: f64,
    pub nu: f64,
    pub delta_s: f64,
    pub m: f64,
    pub sigma_star: f64,
    pub sigma_m: f64,
    p_m: f64,
    /// `(t, X, Ẋ)` at the start of every advance.
    pub history: Vec<(f64, f64, f64)>,
}

impl ShiftState {
    pub fn new(cw: &CompositeWave) -> Self {
        let d = &cw.shock.data;
        Self::with_nu(cw, d.delta_s.sqrt())
    }

    /// Expert override of the weight amplitude `ν` (default `√δ_S`).
    pub fn with_nu(cw: &CompositeWave, nu: f64) -> Self {
        let g = &cw.gas;
        let d = &cw.shock.data;
        let vm = d.minus_state.v;
        Self {
            x: 0.0,
            xdot: 0.0,
            nu,
            delta_s: d.delta_s,
            m: d.shift_gain(g),
            sigma_star: d.sigma_star,
            sigma_m: (-g.dp(vm)).sqrt(),
            p_m: g.p(vm),
            history: Vec::new(),
        }
    }

    /// `y1 = (p(v_m) − p(v^S)) / δ_S` at the current shift.
    pub fn shifted_coordinate(&self, cw: &CompositeWave, t: f64, x1: f64) -> f64 {
        let s = cw.shock_at(t, x1, self.x);
        (self.p_m - cw.gas.p(s.v)) / self.delta_s
    }

    /// `(a, ∂1 a)` at the current shift.
    pub fn weight(&self, cw: &CompositeWave, t: f64, x1: f64) -> (f64, f64) {
        let s = cw.shock_at(t, x1, self.x);
        self.weight_from_volume(&cw.gas, s.v, s.v_x)
    }

    /// `(a, ∂1 a)` from the shock volume and its slope.
    pub fn weight_from_volume(&self, g: &GasModel, v_s: f64, v_s_x: f64) -> (f64, f64) {
        let k = self.nu / self.delta_s;
        (1.0 + k * (self.p_m - g.p(v_s)), -k * g.dp(v_s) * v_s_x)
    }

    /// `Ẋ` for the given flow field and shift `X`.
    pub fn shift_rate(&self, cw: &CompositeWave, state: &FlowState, grid: &SlabGrid, t: f64, shift: f64) -> Result<f64> {
        state.check(grid)?;
        let gamma = cw.gas.gamma;
        let p: Vec<f64> = state.rho.iter().map(|r| r.powf(gamma)).collect();
        self.shift_rate_with_pressure(cw, &state.rho, &p, grid, t, shift)
    }

    /// [`shift_rate`](Self::shift_rate) with the pressure field `ρ^γ` supplied.
    pub fn shift_rate_with_pressure(&self, cw: &CompositeWave, rho: &[f64], pressure: &[f64], grid: &SlabGrid, t: f64, shift: f64) -> Result<f64> {
        grid.check_field(rho)?;
        grid.check_field(pressure)?;
        let g = &cw.gas;
        let half = cw.shock.half_width();
        let plane = grid.plane();
        let (fan_lo, fan_hi) = cw.fan_window(t);
        let m = cw.middle();
        let k = self.nu / self.delta_s;
        let degenerate = cw.rarefaction.is_degenerate();
        let mut slices = Vec::with_capacity(grid.n1);
        let mut buf = vec![0.0; plane];
        for i in 0..grid.n1 {
            let x1 = grid.x1(i);
            if cw.shock_coordinate(t, x1, shift).abs() > half {
                continue;
            }
            let s = cw.shock_at(t, x1, shift);
            if s.v_x == 0.0 {
                continue;
            }
            let (v_bar, p_bar) = if degenerate || x1 > fan_hi {
                (s.v, s.p)
            } else if x1 < fan_lo {
                let v = s.v + (cw.rarefaction.left_state.v - m.v);
                (v, g.p(v))
            } else {
                let v = s.v + (cw.rarefaction_at(t, x1)?.v - m.v);
                (v, g.p(v))
            };
            let a = 1.0 + k * (self.p_m - s.p);
            let ps_x = -g.gamma * s.p / s.v * s.v_x;
            let c1 = a * s.h1_x / self.sigma_star;
            let c2 = a * ps_x;
            for (q, b) in buf.iter_mut().enumerate() {
                let e = i * plane + q;
                let r = rho[e];
                if !(r > 0.0) {
                    return Err(Error::Physics(format!("vacuum at x1 = {x1}")));
                }
                *b = r * (c1 * (pressure[e] - p_bar) - c2 * (1.0 / r - v_bar));
            }
            slices.push(pairwise_sum(&buf));
        }
        let integral = pairwise_sum(&slices) * grid.cell_volume();
        let rate = -self.m / self.delta_s * integral;
        if rate.is_finite() {
            Ok(rate)
        } else {
            Err(Error::Numerical("non-finite shift rate".into()))
        }
    }

    /// One explicit trapezoidal step of `Ẋ = rate(t, X)` from `t` to `t + dt`.
    /// Returns the rate at the step start.
    pub fn advance<F>(&mut self, t: f64, dt: f64, mut rate: F) -> Result<f64>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        if !(dt > 0.0) {
            return Err(Error::Usage(format!("shift step needs dt > 0, got {dt}")));
        }
        let r0 = rate(t, self.x)?;
        let r1 = rate(t + dt, self.x + dt * r0)?;
        self.apply_heun(t, dt, r0, r1)?;
        Ok(r0)
    }

    /// Commit a trapezoidal step from the start rate `r0` and the predicted
    /// end rate `r1`.
    pub fn apply_heun(&mut self, t: f64, dt: f64, r0: f64, r1: f64) -> Result<()> {
        if !r0.is_finite() || !r1.is_finite() {
            return Err(Error::Numerical("non-finite shift rate".into()));
        }
        self.history.push((t, self.x, r0));
        self.xdot = r0;
        self.x += 0.5 * dt * (r0 + r1);
        Ok(())
    }
}
