//! Viscous 2-shock: Rankine–Hugoniot end states, Lax admissibility, and the
//! traveling profile obtained from the first integral
//! `(2μ+λ) v' = -σ*(v - v_m) - (p(v) - p(v_m))/σ*`.

use crate::error::{domain, Error, Result};
use crate::gas::{GasModel, PlanarState};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// End states, speed and mass flux of an admissible 2-shock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockData {
    pub plus_state: PlanarState,
    pub minus_state: PlanarState,
    pub sigma: f64,
    /// Mass flux through the shock, `ρ(σ - u1) > 0`.
    pub sigma_star: f64,
    pub delta_s: f64,
}

/// Residuals of the two Rankine–Hugoniot relations in conservative form.
pub fn rh_residuals(g: &GasModel, d: &ShockData) -> [f64; 2] {
    let (rp, up) = (d.plus_state.rho(), d.plus_state.u1);
    let (rm, um) = (d.minus_state.rho(), d.minus_state.u1);
    let mass = -d.sigma * (rp - rm) + (rp * up - rm * um);
    let mom = -d.sigma * (rp * up - rm * um)
        + (rp * up * up - rm * um * um)
        + (rp.powf(g.gamma) - rm.powf(g.gamma));
    [mass, mom]
}

/// Lax conditions `σ > λ1(m)` and `λ2(+) < σ < λ2(m)`, in that order.
pub fn lax_conditions(g: &GasModel, d: &ShockData) -> [bool; 3] {
    [
        d.sigma > g.lambda1(d.minus_state),
        g.lambda2(d.plus_state) < d.sigma,
        d.sigma < g.lambda2(d.minus_state),
    ]
}

/// The 2-shock with right state `plus_state` and strength `|p(v_m) - p(v_+)|`.
pub fn rh_connect(g: &GasModel, plus_state: PlanarState, delta_s: f64) -> Result<ShockData> {
    if !(delta_s > 0.0) || !delta_s.is_finite() {
        return Err(domain(format!("shock strength must be positive and finite, got {delta_s}")));
    }
    let (vp, up) = (plus_state.v, plus_state.u1);
    let vm = g.volume_at_pressure(g.p(vp) + delta_s);
    if !(vm > 0.0) || vm >= vp {
        return Err(domain(format!("no admissible middle state for strength {delta_s}")));
    }
    let sigma_star = (-(g.p(vp) - g.p(vm)) / (vp - vm)).sqrt();
    let um = up + sigma_star * (vp - vm);
    let sigma = um + sigma_star * vm;
    let data = ShockData {
        plus_state,
        minus_state: PlanarState::new(vm, um)?,
        sigma,
        sigma_star,
        delta_s: (g.p(vm) - g.p(vp)).abs(),
    };
    if lax_conditions(g, &data).iter().any(|ok| !ok) {
        return Err(Error::Internal(format!("Lax conditions fail for {data:?}")));
    }
    Ok(data)
}

impl ShockData {
    /// Right side of the first-order profile equation `v' = f(v)`.
    #[inline]
    pub fn profile_rhs(&self, g: &GasModel, v: f64) -> f64 {
        let vm = self.minus_state.v;
        let ss = self.sigma_star;
        -(ss * (v - vm) + (g.p(v) - g.p(vm)) / ss) / g.visc()
    }

    /// `f'(v)`, so that `v'' = f'(v) f(v)`.
    #[inline]
    pub fn profile_rhs_slope(&self, g: &GasModel, v: f64) -> f64 {
        let ss = self.sigma_star;
        -(ss + g.dp(v) / ss) / g.visc()
    }

    /// Exponential rates of the linearized profile equation at `v_m` and `v_+`.
    pub fn linear_tail_rates(&self, g: &GasModel) -> (f64, f64) {
        (
            self.profile_rhs_slope(g, self.minus_state.v),
            -self.profile_rhs_slope(g, self.plus_state.v),
        )
    }

    /// `M = 5(γ+1)/(8γ) σ_m^3 v_m^2 / p(v_m)` with `σ_m = sqrt(-p'(v_m))`.
    pub fn shift_gain(&self, g: &GasModel) -> f64 {
        let vm = self.minus_state.v;
        let sm = (-g.dp(vm)).sqrt();
        5.0 * (g.gamma + 1.0) / (8.0 * g.gamma) * sm.powi(3) * vm * vm / g.p(vm)
    }
}

/// Tabulated viscous shock profile on a uniform `ξ` grid centred at
/// `v(0) = (v_m + v_+)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockProfile {
    pub gas: GasModel,
    pub data: ShockData,
    pub spacing: f64,
    pub xi: Vec<f64>,
    pub v: Vec<f64>,
    pub u1: Vec<f64>,
    pub h1: Vec<f64>,
    /// `v'` from the profile equation at each node.
    pub dv: Vec<f64>,
    /// `p(v)` and its `ξ` derivative at each node.
    p: Vec<f64>,
    dp: Vec<f64>,
    p_minus: f64,
    p_plus: f64,
    inv_spacing: f64,
    inv_sigma_star: f64,
    inv_visc: f64,
}

/// Profile quantities at one point with analytic `ξ` derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShockSample {
    pub v: f64,
    pub u1: f64,
    pub h1: f64,
    pub v_x: f64,
    pub u1_x: f64,
    pub h1_x: f64,
    pub v_xx: f64,
    /// `p(v)`.
    pub p: f64,
}

fn rk4_step(data: &ShockData, g: &GasModel, v: f64, h: f64) -> f64 {
    let k1 = data.profile_rhs(g, v);
    let k2 = data.profile_rhs(g, v + 0.5 * h * k1);
    let k3 = data.profile_rhs(g, v + 0.5 * h * k2);
    let k4 = data.profile_rhs(g, v + h * k3);
    v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

impl ShockProfile {
    /// Half width at which both tails are within `tol` of their far fields,
    /// from the linearized decay rates.
    pub fn suggested_half_width(g: &GasModel, data: &ShockData, tol: f64) -> f64 {
        let (rl, rr) = data.linear_tail_rates(g);
        let jump = 0.5 * (data.plus_state.v - data.minus_state.v);
        (jump / tol).ln().max(1.0) / rl.min(rr)
    }

    /// Default tabulation: tails resolved to `1e-11` relative, spacing 0.05.
    pub fn build(g: &GasModel, data: ShockData) -> Result<Self> {
        let width = Self::suggested_half_width(g, &data, 1e-11 * data.plus_state.v);
        Self::integrate(g, data, width, 0.05)
    }

    /// March the profile equation with classical RK4 from `ξ = 0` in both directions.
    pub fn integrate(g: &GasModel, data: ShockData, xi_half_width: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !(xi_half_width > spacing) {
            return Err(Error::Config(format!(
                "bad profile grid: half width {xi_half_width}, spacing {spacing}"
            )));
        }
        let n_half = (xi_half_width / spacing).round() as usize;
        let (vm, vp) = (data.minus_state.v, data.plus_state.v);
        let mut right = Vec::with_capacity(n_half + 1);
        let mut left = Vec::with_capacity(n_half + 1);
        let v0 = 0.5 * (vm + vp);
        right.push(v0);
        left.push(v0);
        for k in 0..n_half {
            right.push(rk4_step(&data, g, right[k], spacing));
            left.push(rk4_step(&data, g, left[k], -spacing));
        }
        let breach = |v: f64| v < vm - 1e-8 || v > vp + 1e-8 || !v.is_finite();
        if right.iter().chain(left.iter()).any(|&v| breach(v)) {
            return Err(Error::Numerical("profile left the interval (v_m, v_+)".into()));
        }
        let mut v: Vec<f64> = left.into_iter().skip(1).rev().collect();
        v.extend(right);
        // integration overshoot below round-off is clamped to the far fields
        for x in v.iter_mut() {
            *x = x.clamp(vm, vp);
        }
        let n = v.len();
        let xi: Vec<f64> = (0..n).map(|i| (i as f64 - n_half as f64) * spacing).collect();
        let um = data.minus_state.u1;
        let dv: Vec<f64> = v.iter().map(|&x| data.profile_rhs(g, x)).collect();
        let u1: Vec<f64> = v.iter().map(|&x| um - data.sigma_star * (x - vm)).collect();
        let h1 = u1.iter().zip(&dv).map(|(u, d)| u - g.visc() * d).collect();
        let p: Vec<f64> = v.iter().map(|&x| g.p(x)).collect();
        let dp = p.iter().zip(&v).zip(&dv).map(|((p, v), d)| -g.gamma * p / v * d).collect();
        Ok(Self {
            gas: *g,
            p_minus: g.p(data.minus_state.v),
            p_plus: g.p(data.plus_state.v),
            inv_spacing: 1.0 / spacing,
            inv_sigma_star: 1.0 / data.sigma_star,
            inv_visc: 1.0 / g.visc(),
            data,
            spacing,
            xi,
            v,
            u1,
            h1,
            dv,
            p,
            dp,
        })
    }

    pub fn half_width(&self) -> f64 {
        -self.xi[0]
    }

    /// Profile at `ξ` by cubic Hermite interpolation of `v` and `p(v)` (nodal
    /// slopes from the profile equation); every derivative is then evaluated
    /// analytically from the interpolated pair. Outside the table the far
    /// fields are returned.
    pub fn eval(&self, xi: f64) -> ShockSample {
        let d = &self.data;
        let n = self.v.len();
        let pos = (xi - self.xi[0]) * self.inv_spacing;
        if !(pos >= 0.0) {
            return self.far_field(d.minus_state, self.p_minus);
        }
        if pos >= (n - 1) as f64 {
            return self.far_field(d.plus_state, self.p_plus);
        }
        let i = (pos.floor() as usize).min(n - 2);
        let s = pos - i as f64;
        let h = self.spacing;
        let (s2, s3) = (s * s, s * s * s);
        let b = [2.0 * s3 - 3.0 * s2 + 1.0, (s3 - 2.0 * s2 + s) * h, -2.0 * s3 + 3.0 * s2, (s3 - s2) * h];
        let v = b[0] * self.v[i] + b[1] * self.dv[i] + b[2] * self.v[i + 1] + b[3] * self.dv[i + 1];
        let p = b[0] * self.p[i] + b[1] * self.dp[i] + b[2] * self.p[i + 1] + b[3] * self.dp[i + 1];
        self.sample_from(v, p)
    }

    /// All profile quantities at a given `v` on the profile curve.
    pub fn sample_at_volume(&self, v: f64) -> ShockSample {
        self.sample_from(v, self.gas.p(v))
    }

    fn sample_from(&self, v: f64, p: f64) -> ShockSample {
        let g = &self.gas;
        let d = &self.data;
        let (vm, ss) = (d.minus_state.v, d.sigma_star);
        let (iss, ik) = (self.inv_sigma_star, self.inv_visc);
        let dp = -g.gamma * p / v;
        let v_x = -(ss * (v - vm) + (p - self.p_minus) * iss) * ik;
        let u1 = d.minus_state.u1 - ss * (v - vm);
        ShockSample {
            v,
            u1,
            h1: u1 - g.visc() * v_x,
            v_x,
            u1_x: -ss * v_x,
            h1_x: dp * v_x * iss,
            v_xx: -(ss + dp * iss) * ik * v_x,
            p,
        }
    }

    fn far_field(&self, s: PlanarState, p: f64) -> ShockSample {
        ShockSample { v: s.v, u1: s.u1, h1: s.u1, p, ..Default::default() }
    }

    /// Shifted profile `(v^s, u1^s, h1^s)(x1 - σt - X)`.
    pub fn shifted(&self, t: f64, x1: f64, shift: f64) -> ShockSample {
        self.eval(x1 - self.data.sigma * t - shift)
    }

    /// Least-squares decay rates of `|v - v_m|` (left) and `|v - v_+|` (right)
    /// over the outer half of each tail.
    pub fn tail_rate_fit(&self) -> Result<(f64, f64)> {
        let (vm, vp) = (self.data.minus_state.v, self.data.plus_state.v);
        let n = self.v.len();
        let mid = n / 2;
        let fit = |idx: Vec<usize>, far: f64| -> Result<f64> {
            let pts: Vec<(f64, f64)> = idx
                .into_iter()
                .map(|i| (self.xi[i].abs(), (self.v[i] - far).abs()))
                .filter(|&(_, d)| d >= 1e-13)
                .collect();
            if pts.len() < 8 {
                return Err(Error::Config("tail reaches the floating-point floor before the fit window".into()));
            }
            let m = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
            let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
            let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
            let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            Ok(-num / den)
        };
        let left = fit((0..mid / 2).collect(), vm)?;
        let right = fit((mid + mid / 2..n).collect(), vp)?;
        Ok((left, right))
    }

    /// Largest `|v''| / (δ_S |v'|)` over the table.
    pub fn second_derivative_ratio(&self) -> f64 {
        let g = &self.gas;
        self.v
            .iter()
            .zip(&self.dv)
            .filter(|(_, d)| **d > 0.0)
            .map(|(&v, _)| self.data.profile_rhs_slope(g, v).abs() / self.data.delta_s)
            .fold(0.0, f64::max)
    }

    /// Whether the tabulated `v` is strictly increasing wherever it is
    /// distinguishable from the far fields (`> 1e-13`).
    pub fn is_monotone(&self) -> bool {
        let (vm, vp) = (self.data.minus_state.v, self.data.plus_state.v);
        let inner = |v: f64| v - vm > 1e-13 && vp - v > 1e-13;
        self.v.windows(2).all(|w| w[1] >= w[0] && (!(inner(w[0]) && inner(w[1])) || w[1] > w[0]))
            && self.dv.iter().zip(&self.v).all(|(d, &v)| !inner(v) || *d > 0.0)
            && self.u1.windows(2).all(|w| w[1] <= w[0])
    }

    /// CSV dump with columns `xi,v_s,u1_s,h1_s`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "xi,v_s,u1_s,h1_s")?;
        for i in 0..self.v.len() {
            writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", self.xi[i], self.v[i], self.u1[i], self.h1[i])?;
        }
        Ok(())
    }
}
