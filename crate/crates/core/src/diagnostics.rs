//! Functionals monitored along a run (weighted relative entropy, good terms,
//! Sobolev norms, distance to the Riemann solution, interaction envelopes)
//! and randomized verifiers for the functional inequalities.

use crate::composite::{CompositeSample, CompositeWave};
use crate::error::{Error, Result};
use crate::gas::Potential;
use crate::shift::ShiftState;
use crate::solver::grid::{gradient, partial, second_partial, FlowState, SlabGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// One row of the run time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Xdot")]
    pub xdot: f64,
    #[serde(rename = "E_rel")]
    pub e_rel: f64,
    #[serde(rename = "G2")]
    pub g2: f64,
    #[serde(rename = "G3")]
    pub g3: f64,
    #[serde(rename = "GR")]
    pub gr: f64,
    #[serde(rename = "GS")]
    pub gs: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "H2_phi")]
    pub h2_phi: f64,
    #[serde(rename = "H2_psi")]
    pub h2_psi: f64,
    pub supdist: f64,
    pub mass_delta: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,dt,X,Xdot,E_rel,G2,G3,GR,GS,D,H2_phi,H2_psi,supdist,mass_delta";

    pub fn csv_row(&self) -> String {
        [
            self.t, self.dt, self.x, self.xdot, self.e_rel, self.g2, self.g3, self.gr, self.gs, self.d, self.h2_phi,
            self.h2_psi, self.supdist, self.mass_delta,
        ]
        .iter()
        .map(|x| format!("{x:.17e}"))
        .collect::<Vec<_>>()
        .join(",")
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let xs: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Usage(format!("bad CSV row: {e}")))?;
        if xs.len() != 14 {
            return Err(Error::Usage(format!("expected 14 columns, got {}", xs.len())));
        }
        Ok(Self {
            t: xs[0],
            dt: xs[1],
            x: xs[2],
            xdot: xs[3],
            e_rel: xs[4],
            g2: xs[5],
            g3: xs[6],
            gr: xs[7],
            gs: xs[8],
            d: xs[9],
            h2_phi: xs[10],
            h2_psi: xs[11],
            supdist: xs[12],
            mass_delta: xs[13],
        })
    }

    pub fn good_terms(&self) -> GoodTerms {
        GoodTerms { g2: self.g2, g3: self.g3, gr: self.gr, gs: self.gs, d: self.d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GoodTerms {
    pub g2: f64,
    pub g3: f64,
    pub gr: f64,
    pub gs: f64,
    pub d: f64,
}

impl GoodTerms {
    pub fn sum(&self) -> f64 {
        self.g2 + self.g3 + self.gr + self.gs + self.d
    }

    pub fn all_nonnegative(&self) -> bool {
        [self.g2, self.g3, self.gr, self.gs, self.d].iter().all(|x| *x >= 0.0)
    }
}

/// Everything the functionals need at one time, computed once.
pub struct Snapshot<'a> {
    pub wave: &'a CompositeWave,
    pub shift: &'a ShiftState,
    pub grid: &'a SlabGrid,
    pub state: &'a FlowState,
    pub t: f64,
    /// Shift at which the ansatz is evaluated.
    pub x: f64,
    pub composite: Vec<CompositeSample>,
    v: Vec<f64>,
    u: [Vec<f64>; 3],
    h: [Vec<f64>; 3],
}

impl<'a> Snapshot<'a> {
    pub fn new(wave: &'a CompositeWave, shift: &'a ShiftState, grid: &'a SlabGrid, state: &'a FlowState, t: f64, x: f64) -> Result<Self> {
        state.check(grid)?;
        state.check_physical()?;
        let composite = wave.planar(grid, t, x)?;
        let v = state.specific_volume();
        let u = state.velocity();
        let h = crate::composite::effective_velocity(&wave.gas, &v, &u, grid)?;
        Ok(Self { wave, shift, grid, state, t, x, composite, v, u, h })
    }

    fn per_cell<F: Fn(usize, usize) -> f64>(&self, f: F) -> f64 {
        let plane = self.grid.plane();
        let vals: Vec<f64> = (0..self.grid.len()).map(|e| f(e / plane, e)).collect();
        self.grid.integrate(&vals)
    }

    /// `∫ aρ (Q(v|v̄) + ½|h − h̄|²)`.
    pub fn relative_entropy(&self) -> f64 {
        self.relative_entropy_scaled(1.0)
    }

    /// Relative entropy with `h − h̄` replaced by `s·(h − h̄)`.
    pub fn relative_entropy_scaled(&self, s: f64) -> f64 {
        let g = &self.wave.gas;
        let weights: Vec<f64> = self.composite.iter().map(|c| self.shift.weight_from_volume(g, c.shock.v, c.shock.v_x).0).collect();
        self.per_cell(|i, e| {
            let c = &self.composite[i];
            let rho = self.state.rho[e];
            let dh = [self.h[0][e] - c.h1, self.h[1][e], self.h[2][e]];
            let kin = 0.5 * s * s * (dh[0] * dh[0] + dh[1] * dh[1] + dh[2] * dh[2]);
            weights[i] * rho * (g.relative_unchecked(Potential::InternalEnergy, self.v[e], c.v) + kin)
        })
    }

    pub fn good_terms(&self) -> GoodTerms {
        let g = &self.wave.gas;
        let k = self.shift.nu / self.shift.delta_s;
        let sstar = self.shift.sigma_star;
        let p: Vec<f64> = self.v.iter().map(|v| g.p(*v)).collect();
        let dp = gradient(self.grid, &p);
        let g2 = k * self.per_cell(|i, e| {
            let c = &self.composite[i];
            let w = self.h[0][e] - c.h1 - (p[e] - g.p(c.v)) / sstar;
            c.shock.v_x * w * w
        });
        let g3 = k * self.per_cell(|i, e| self.composite[i].shock.v_x * (self.h[1][e].powi(2) + self.h[2][e].powi(2)));
        let gr = self.per_cell(|i, e| {
            let c = &self.composite[i];
            c.rare.u1_x * g.relative_unchecked(Potential::Pressure, self.v[e], c.v)
        });
        let gs = self.per_cell(|i, e| {
            let c = &self.composite[i];
            c.shock.v_x * (p[e] - g.p(c.v)).powi(2)
        });
        let d = self.per_cell(|i, e| {
            let c = &self.composite[i];
            (dp[0][e] - g.dp(c.v) * c.v_x).powi(2) + dp[1][e].powi(2) + dp[2][e].powi(2)
        });
        GoodTerms { g2, g3, gr, gs, d }
    }

    /// `(φ, ψ1, ψ2, ψ3)` fields.
    pub fn perturbation_fields(&self) -> [Vec<f64>; 4] {
        let plane = self.grid.plane();
        let n = self.grid.len();
        let mut phi = vec![0.0; n];
        let mut psi1 = vec![0.0; n];
        for e in 0..n {
            let c = &self.composite[e / plane];
            phi[e] = self.v[e] - c.v;
            psi1[e] = self.u[0][e] - c.u1;
        }
        [phi, psi1, self.u[1].clone(), self.u[2].clone()]
    }

    /// `(‖φ‖_{H²}, ‖ψ‖_{H²})`.
    pub fn perturbation_h2(&self) -> (f64, f64) {
        let [phi, p1, p2, p3] = self.perturbation_fields();
        let h2 = |f: &[f64]| sobolev_norms(self.grid, f).2;
        (h2(&phi), (h2(&p1).powi(2) + h2(&p2).powi(2) + h2(&p3).powi(2)).sqrt())
    }

    /// `max |(v, u) − Riemann composite|` against the inviscid fan.
    pub fn sup_distance_to_riemann(&self) -> Result<f64> {
        if !(self.t > 0.0) {
            return Err(Error::Domain(format!("distance to the fan needs t > 0, got {}", self.t)));
        }
        self.sup_distance_with_fan_at(self.t)
    }

    /// Same as [`sup_distance_to_riemann`](Self::sup_distance_to_riemann),
    /// with the fan at `t = 0` replaced by its limit, the Riemann step.
    pub fn sup_distance_limit(&self) -> f64 {
        self.sup_distance_with_fan_at(self.t.max(1e-12)).unwrap_or(f64::NAN)
    }

    fn sup_distance_with_fan_at(&self, t_fan: f64) -> Result<f64> {
        let plane = self.grid.plane();
        let mut worst = 0.0f64;
        for i in 0..self.grid.n1 {
            let (ve, ue) = self.wave.eval_exact_split(t_fan, self.t, self.grid.x1(i), self.x)?;
            for e in i * plane..(i + 1) * plane {
                let d = (self.v[e] - ve).abs().max((self.u[0][e] - ue).abs()).max(self.u[1][e].abs()).max(self.u[2][e].abs());
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    /// `‖v − v̄‖_{L∞}`.
    pub fn sup_phi(&self) -> f64 {
        let plane = self.grid.plane();
        (0..self.grid.len()).map(|e| (self.v[e] - self.composite[e / plane].v).abs()).fold(0.0, f64::max)
    }

    /// `∫ ρ(u2² + u3²)`.
    pub fn transverse_kinetic_energy(&self) -> f64 {
        self.per_cell(|_, e| self.state.rho[e] * (self.u[1][e].powi(2) + self.u[2][e].powi(2)))
    }

    /// `G^S` in the `x` chart, the same integral in the `y1` chart
    /// (`δ_S ∫∫ w²/|p'(v^S)| dy`), and `δ_S ∫∫ w² dy`, where `w = p − p̄`.
    /// Gauss nodes in `y1` are mapped back to `x1` and `w` is interpolated
    /// linearly between cell centres.
    pub fn gs_dual_chart(&self, nodes: usize) -> Result<DualChart> {
        let g = &self.wave.gas;
        let gs = self.good_terms().gs;
        let plane = self.grid.plane();
        let (ys, ws) = gauss_legendre(nodes);
        let mut acc = 0.0;
        let mut acc_jac = 0.0;
        for (y, wq) in ys.iter().zip(&ws) {
            let y1 = 0.5 * (y + 1.0);
            let x1 = self.x1_at_y1(y1);
            let s = (x1 - self.grid.x1(0)) / self.grid.dx1;
            if s < 0.0 || s > (self.grid.n1 - 1) as f64 {
                return Err(Error::Config(format!("y1 = {y1} maps outside the slab (x1 = {x1})")));
            }
            let i = (s.floor() as usize).min(self.grid.n1 - 2);
            let f = s - i as f64;
            let c0 = &self.composite[i];
            let c1 = &self.composite[i + 1];
            let mut row = 0.0;
            for q in 0..plane {
                let w0 = g.p(self.v[i * plane + q]) - g.p(c0.v);
                let w1 = g.p(self.v[(i + 1) * plane + q]) - g.p(c1.v);
                let w = (1.0 - f) * w0 + f * w1;
                row += w * w;
            }
            acc += 0.5 * wq * row / plane as f64;
            let vs = self.wave.shock_at(self.t, x1, self.x).v;
            acc_jac += 0.5 * wq * row / plane as f64 / g.dp(vs).abs();
        }
        let ds = self.shift.delta_s;
        Ok(DualChart { gs_x: gs, gs_y: ds * acc_jac, w_squared: ds * acc })
    }

    /// Inverse of the `y1` chart by bisection in `x1`.
    fn x1_at_y1(&self, y1: f64) -> f64 {
        let half = self.wave.shock.half_width();
        let centre = self.wave.offset + self.wave.shock.data.sigma * self.t + self.x;
        let (mut lo, mut hi) = (centre - half, centre + half);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let s = self.wave.shock_at(self.t, mid, self.x);
            let ym = (self.wave.gas.p(self.wave.middle().v) - self.wave.gas.p(s.v)) / self.shift.delta_s;
            if ym < y1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `G^S` evaluated in the two charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualChart {
    pub gs_x: f64,
    pub gs_y: f64,
    /// `δ_S ∫∫ w² dy`.
    pub w_squared: f64,
}

/// `(‖f‖, ‖f‖_{H¹}, ‖f‖_{H²})` with centred differences and the full Hessian.
pub fn sobolev_norms(grid: &SlabGrid, f: &[f64]) -> (f64, f64, f64) {
    let sq = |g: &[f64]| grid.integrate(&g.iter().map(|x| x * x).collect::<Vec<_>>());
    let l2 = sq(f);
    let grads = gradient(grid, f);
    let h1 = l2 + grads.iter().map(|g| sq(g)).sum::<f64>();
    let mut h2 = h1;
    for a in 0..3 {
        h2 += sq(&second_partial(grid, f, a));
        for b in 0..3 {
            if b != a {
                h2 += sq(&partial(grid, &grads[a], b));
            }
        }
    }
    (l2.sqrt(), h1.sqrt(), h2.sqrt())
}

/// Product norms `(N1, N2)` of the rarefaction/shock interaction, by
/// trapezoid quadrature in `x1` (transverse measure is one).
pub fn interaction_envelopes(cw: &CompositeWave, t: f64, shift: f64, dx: f64) -> Result<(f64, f64)> {
    if cw.rarefaction.is_degenerate() {
        return Ok((0.0, 0.0));
    }
    let (lo, _) = cw.fan_window(t);
    let hi = cw.offset + cw.shock.data.sigma * t + shift + cw.shock.half_width();
    let lo = lo.min(cw.offset + cw.shock.data.sigma * t + shift - cw.shock.half_width());
    let n = ((hi - lo) / dx).ceil() as usize;
    let h = (hi - lo) / n as f64;
    let m = cw.middle();
    let mut acc = [0.0; 5];
    for j in 0..=n {
        let x = lo + j as f64 * h;
        let c = cw.eval(t, x, shift)?;
        let (r, s) = (c.rare, c.shock);
        let wgt = if j == 0 || j == n { 0.5 } else { 1.0 };
        let terms = [
            r.v_x * (s.v - m.v),
            r.v_x * (s.u1 - m.u1),
            s.v_x * (r.v - m.v),
            s.v_x * (r.u1 - m.u1),
            r.v_x * s.v_x,
        ];
        for (a, v) in acc.iter_mut().zip(terms) {
            *a += wgt * v * v;
        }
    }
    let nm = acc.map(|a| (a * h).sqrt());
    Ok((nm[0] + nm[1], nm[2] + nm[3] + nm[4]))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Value and gradient `(f, ∂y1 f, ∂y2 f, ∂y3 f)` of a trial function on
/// `[0, 1] × 𝕋²`.
pub type TrialFn<'a> = &'a dyn Fn(f64, f64, f64) -> [f64; 4];

/// Quadrature settings for the weighted Poincaré check.
#[derive(Debug, Clone, Copy)]
pub struct PoincareQuadrature {
    pub y1_nodes: usize,
    pub transverse_nodes: usize,
}

impl Default for PoincareQuadrature {
    fn default() -> Self {
        Self { y1_nodes: 64, transverse_nodes: 16 }
    }
}

/// `(LHS, RHS)` of the weighted Poincaré inequality for one trial.
pub fn weighted_poincare_sides(f: TrialFn, quad: PoincareQuadrature) -> Result<(f64, f64)> {
    // transverse gradients must vanish at y1 ∈ {0, 1} for the weighted term to be finite
    let m = quad.transverse_nodes;
    for j in 0..m {
        for k in 0..m {
            let (y2, y3) = ((j as f64 + 0.5) / m as f64, (k as f64 + 0.5) / m as f64);
            for y1 in [0.0, 1.0] {
                let v = f(y1, y2, y3);
                if v[2].abs() > 1e-9 || v[3].abs() > 1e-9 {
                    return Err(Error::Domain("trial function has a non-integrable weighted transverse gradient".into()));
                }
            }
        }
    }
    let (ys, ws) = gauss_legendre(quad.y1_nodes);
    let cell = 1.0 / (m * m) as f64;
    let mut mean = 0.0;
    let mut samples = Vec::with_capacity(ys.len() * m * m);
    for (y, w) in ys.iter().zip(&ws) {
        let y1 = 0.5 * (y + 1.0);
        for j in 0..m {
            for k in 0..m {
                let v = f(y1, (j as f64 + 0.5) / m as f64, (k as f64 + 0.5) / m as f64);
                let wt = 0.5 * w * cell;
                mean += wt * v[0];
                samples.push((y1, wt, v));
            }
        }
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (y1, wt, v) in samples {
        let b = y1 * (1.0 - y1);
        lhs += wt * (v[0] - mean).powi(2);
        rhs += wt * (0.5 * b * v[1] * v[1] + (v[2] * v[2] + v[3] * v[3]) / (16.0 * PI * PI * b));
    }
    Ok((lhs, rhs))
}

/// Random truncated Fourier trial: cosine modes in `y1` for the planar part,
/// sine modes times transverse harmonics for the rest.
#[derive(Debug, Clone)]
pub struct FourierTrial {
    planar: Vec<f64>,
    transverse: Vec<(usize, [i32; 2], f64, f64)>,
    linear: f64,
}

impl FourierTrial {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let planar = (0..5).map(|n| rng.gen_range(-1.0..1.0) / (1.0 + n as f64)).collect();
        let n_modes = rng.gen_range(0..6);
        let transverse = (0..n_modes)
            .map(|_| {
                let n = rng.gen_range(1..4);
                let k = [rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
                (n, k, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
            .collect();
        Self { planar, transverse, linear: rng.gen_range(-1.0..1.0) }
    }

    pub fn eval(&self, y1: f64, y2: f64, y3: f64) -> [f64; 4] {
        let mut out = [self.linear * y1, self.linear, 0.0, 0.0];
        for (n, a) in self.planar.iter().enumerate() {
            let w = PI * n as f64;
            out[0] += a * (w * y1).cos();
            out[1] -= a * w * (w * y1).sin();
        }
        for &(n, k, a, b) in &self.transverse {
            let w = PI * n as f64;
            let th = 2.0 * PI * (k[0] as f64 * y2 + k[1] as f64 * y3);
            let e = a * th.cos() + b * th.sin();
            let de = -a * th.sin() + b * th.cos();
            let (s, c) = ((w * y1).sin(), (w * y1).cos());
            out[0] += s * e;
            out[1] += w * c * e;
            out[2] += s * de * 2.0 * PI * k[0] as f64;
            out[3] += s * de * 2.0 * PI * k[1] as f64;
        }
        out
    }
}

/// Smallest `RHS − LHS` over `n_trials` random Fourier trials.
pub fn verify_weighted_poincare(n_trials: usize, seed: u64, quad: PoincareQuadrature) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..n_trials {
        let trial = FourierTrial::random(&mut rng);
        let (l, r) = weighted_poincare_sides(&|a, b, c| trial.eval(a, b, c), quad)?;
        worst = worst.min(r - l);
    }
    Ok(worst)
}

/// Outcome of the Gagliardo-Nirenberg study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GagliardoNirenbergReport {
    /// `min (√2‖g‖^{1/2}‖∂1 g‖^{1/2} − ‖g‖∞)` over planar trials.
    pub planar_margin: f64,
    /// Smallest `C` for which every general trial satisfies the inequality.
    pub fitted_c: f64,
}

/// Norms `(‖g‖∞, ‖g‖, ‖∂1 g‖, ‖∇g‖, ‖∇²g‖)` of a grid field.
pub fn gn_norms(grid: &SlabGrid, g: &[f64]) -> [f64; 5] {
    let sq = |f: &[f64]| grid.integrate(&f.iter().map(|x| x * x).collect::<Vec<_>>());
    let grads = gradient(grid, g);
    let mut hess = 0.0;
    for a in 0..3 {
        hess += sq(&second_partial(grid, g, a));
        for b in 0..3 {
            if b != a {
                hess += sq(&partial(grid, &grads[a], b));
            }
        }
    }
    [
        g.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        sq(g).sqrt(),
        sq(&grads[0]).sqrt(),
        grads.iter().map(|f| sq(f)).sum::<f64>().sqrt(),
        hess.sqrt(),
    ]
}

fn gn_trial(grid: &SlabGrid, rng: &mut ChaCha8Rng, planar: bool) -> Vec<f64> {
    let lumps: Vec<(f64, f64, f64, [i32; 2], f64, f64)> = (0..rng.gen_range(1..4))
        .map(|_| {
            let span = grid.x1_max - grid.x1_min;
            let c = grid.x1_min + span * rng.gen_range(0.35..0.65);
            let w = span * rng.gen_range(0.02..0.08);
            let k = if planar { [0, 0] } else { [rng.gen_range(-2..=2), rng.gen_range(-2..=2)] };
            (c, w, rng.gen_range(-1.0..1.0), k, rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let mut g = vec![0.0; grid.len()];
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            for k in 0..grid.n3 {
                let (x1, x2, x3) = (grid.x1(i), grid.x2(j), grid.x3(k));
                let mut val = 0.0;
                for &(c, w, a, kk, mix, ph) in &lumps {
                    let th = 2.0 * PI * (kk[0] as f64 * x2 + kk[1] as f64 * x3) + ph;
                    let trans = if planar { 1.0 } else { 1.0 - mix + mix * th.cos() };
                    val += a * (-((x1 - c) / w).powi(2)).exp() * trans;
                }
                g[grid.idx(i, j, k)] = val;
            }
        }
    }
    g
}

/// Planar trials on `planar_grid` check the `x1` part alone; general trials
/// on `grid` fit the constant of the transverse term.
pub fn verify_gagliardo_nirenberg(planar_grid: &SlabGrid, grid: &SlabGrid, n_trials: usize, seed: u64) -> GagliardoNirenbergReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planar_margin = f64::INFINITY;
    let mut fitted_c = 0.0f64;
    for t in 0..n_trials {
        if t % 2 == 0 {
            let g = gn_trial(planar_grid, &mut rng, true);
            let [inf, l2, d1, ..] = gn_norms(planar_grid, &g);
            planar_margin = planar_margin.min(2f64.sqrt() * (l2 * d1).sqrt() - inf);
        } else {
            let g = gn_trial(grid, &mut rng, false);
            let [inf, l2, d1, grad, hess] = gn_norms(grid, &g);
            let excess = inf - 2f64.sqrt() * (l2 * d1).sqrt();
            if excess > 0.0 {
                fitted_c = fitted_c.max(excess / (grad * hess).sqrt());
            }
        }
    }
    GagliardoNirenbergReport { planar_margin, fitted_c }
}

/// `L²` norms of the two rows of the `(φ, h − h̄)` system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReformulationResidual {
    pub volume_row: f64,
    pub effective_velocity_row: f64,
    /// Snapshot spacing exceeds ten solver steps.
    pub coarse_sampling: bool,
}

/// Spatial part of both rows (everything except the time derivative) and the
/// fields whose time derivative is needed.
struct RowParts {
    phi: Vec<f64>,
    dh: [Vec<f64>; 3],
    rho: Vec<f64>,
    row1: Vec<f64>,
    row2: [Vec<f64>; 3],
}

fn row_parts(cw: &CompositeWave, grid: &SlabGrid, state: &FlowState, t: f64, shift: f64, xdot: f64, include_r: bool) -> Result<RowParts> {
    let g = &cw.gas;
    let k = g.visc();
    let cs = cw.planar(grid, t, shift)?;
    let plane = grid.plane();
    let n = grid.len();
    let v = state.specific_volume();
    let u = state.velocity();
    let h = crate::composite::effective_velocity(g, &v, &u, grid)?;
    let mut phi = vec![0.0; n];
    let mut dh = [vec![0.0; n], h[1].clone(), h[2].clone()];
    for e in 0..n {
        let c = &cs[e / plane];
        phi[e] = v[e] - c.v;
        dh[0][e] = h[0][e] - c.h1;
    }
    let gphi = gradient(grid, &phi);
    let lap_v = crate::solver::grid::laplacian(grid, &v);
    let du: [[Vec<f64>; 3]; 3] = [0, 1, 2].map(|a| gradient(grid, &u[a]));
    let div_u: Vec<f64> = (0..n).map(|e| du[0][0][e] + du[1][1][e] + du[2][2][e]).collect();
    let gdh: [[Vec<f64>; 3]; 3] = [0, 1, 2].map(|a| gradient(grid, &dh[a]));
    let p: Vec<f64> = v.iter().map(|v| g.p(*v)).collect();
    let gp = gradient(grid, &p);
    let gv = gradient(grid, &v);
    let lap_u: [Vec<f64>; 3] = [0, 1, 2].map(|a| crate::solver::grid::laplacian(grid, &u[a]));
    let grad_div = gradient(grid, &div_u);
    let sources = cw.interaction_sources(state, grid, t, shift)?;
    let mut row1 = vec![0.0; n];
    let mut row2 = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for e in 0..n {
        let c = &cs[e / plane];
        let (r, s) = (&c.rare, &c.shock);
        let rho = state.rho[e];
        let adv_phi: f64 = (0..3).map(|d| u[d][e] * gphi[d][e]).sum();
        let div_dh = div_u[e] - k * lap_v[e] - (r.u1_x + s.h1_x);
        row1[e] = rho * adv_phi - div_dh - rho * xdot * s.v_x - k * (lap_v[e] - s.v_xx) + sources.q1[e];
        for a in 0..3 {
            let adv: f64 = (0..3).map(|d| u[d][e] * gdh[a][d][e]).sum();
            let grad_p = gp[a][e] - if a == 0 { g.dp(c.v) * c.v_x } else { 0.0 };
            let mut rr = 0.0;
            if include_r {
                let stretch: f64 = (0..3).map(|j| du[j][a][e] * gv[j][e]).sum();
                let curlcurl = grad_div[a][e] - lap_u[a][e];
                rr = k / v[e] * (stretch - div_u[e] * gv[a][e]) - g.mu * curlcurl;
            }
            let shift_term = if a == 0 { rho * xdot * s.h1_x } else { 0.0 };
            let q2 = if a == 0 { sources.q2[e] } else { 0.0 };
            row2[a][e] = rho * adv + grad_p - shift_term - rr + q2;
        }
    }
    Ok(RowParts { phi, dh, rho: state.rho.clone(), row1, row2 })
}

/// Residual of the `(φ, h − h̄)` system between two snapshots, centred at
/// their mid time. `xdot` is the shift rate over the interval.
#[allow(clippy::too_many_arguments)]
pub fn reformulation_residual(
    cw: &CompositeWave,
    grid: &SlabGrid,
    before: (&FlowState, f64),
    after: (&FlowState, f64),
    xdot: f64,
    solver_dt: Option<f64>,
    include_r: bool,
) -> Result<ReformulationResidual> {
    let (s0, x0) = before;
    let (s1, x1) = after;
    let dt = s1.time - s0.time;
    if !(dt > 0.0) {
        return Err(Error::Usage("snapshots must be in increasing time".into()));
    }
    let a = row_parts(cw, grid, s0, s0.time, x0, xdot, include_r)?;
    let b = row_parts(cw, grid, s1, s1.time, x1, xdot, include_r)?;
    let n = grid.len();
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    for e in 0..n {
        let rho = 0.5 * (a.rho[e] + b.rho[e]);
        r1[e] = rho * (b.phi[e] - a.phi[e]) / dt + 0.5 * (a.row1[e] + b.row1[e]);
        let mut sq = 0.0;
        for c in 0..3 {
            let x = rho * (b.dh[c][e] - a.dh[c][e]) / dt + 0.5 * (a.row2[c][e] + b.row2[c][e]);
            sq += x * x;
        }
        r2[e] = sq;
    }
    let l2 = |f: &[f64]| grid.integrate(&f.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
    Ok(ReformulationResidual {
        volume_row: l2(&r1),
        effective_velocity_row: grid.integrate(&r2).sqrt(),
        coarse_sampling: solver_dt.is_some_and(|h| dt > 10.0 * h),
    })
}

/// Discrete a priori functional: `sup H²² + δ_S∫|Ẋ|² + ∫(G2+G3+GR+GS+D)`
/// by trapezoid rule over the record series.
pub fn apriori_lhs(records: &[DiagnosticsRecord], delta_s: f64) -> f64 {
    let sup = records.iter().map(|r| r.h2_phi.powi(2) + r.h2_psi.powi(2)).fold(0.0, f64::max);
    let mut integral = 0.0;
    for w in records.windows(2) {
        let f = |r: &DiagnosticsRecord| delta_s * r.xdot * r.xdot + r.good_terms().sum();
        integral += 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1]));
    }
    sup + integral
}

/// Least-squares slope of `ln y` against `x`.
pub fn log_linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::{GasModel, PlanarState};
    use crate::solver::{init_state, PerturbationMode, PerturbationSpec, Solver, StepControl};

    fn wave(delta_r: f64) -> CompositeWave {
        let g = GasModel::new(1.4, 1.0, 0.0).unwrap();
        CompositeWave::from_strengths(&g, PlanarState::new(1.2, 0.0).unwrap(), 0.1, delta_r, 40.0).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let r = DiagnosticsRecord { t: 1.5, dt: 1e-3, x: -0.25, xdot: 1e-300, e_rel: 3.0, supdist: 0.1, ..Default::default() };
        assert_eq!(DiagnosticsRecord::from_csv_row(&r.csv_row()).unwrap(), r);
        assert_eq!(DiagnosticsRecord::CSV_HEADER.split(',').count(), 14);
        assert!(DiagnosticsRecord::from_csv_row("1,2").is_err());
    }

    #[test]
    fn sobolev_norms_of_constant_and_mode() {
        let grid = SlabGrid::new(0.0, 3.0, 30, 8, 4).unwrap();
        let f = vec![-2.0; grid.len()];
        let (l2, h1, h2) = sobolev_norms(&grid, &f);
        let want = 2.0 * 3f64.sqrt();
        assert!((l2 - want).abs() < 1e-12 && (h1 - want).abs() < 1e-12 && (h2 - want).abs() < 1e-12);

        let ratio = |n2: usize| {
            let grid = SlabGrid::new(0.0, 1.0, 16, n2, 1).unwrap();
            let f: Vec<f64> = (0..grid.len()).map(|e| (4.0 * PI * grid.x2((e / grid.n3) % grid.n2)).sin()).collect();
            let (l2, h1, _) = sobolev_norms(&grid, &f);
            (h1 * h1 - l2 * l2).sqrt() / l2
        };
        let k = 4.0 * PI;
        let (e1, e2) = ((ratio(32) - k).abs(), (ratio(64) - k).abs());
        assert!(e1 < 0.1 * k && (3.5..4.5).contains(&(e1 / e2)), "{e1} {e2}");
    }

    // h̄ carries ∂1v^S only, so on the composite h − h̄ = −κ∂1v^R up to
    // the differencing error of ∇v.
    #[test]
    fn functionals_on_composite() {
        let cw = wave(0.05);
        let shift = ShiftState::new(&cw);
        let k = cw.gas.visc();
        let errs = [2800, 5600].map(|n1| {
            let grid = SlabGrid::new(-300.0, 400.0, n1, 1, 1).unwrap();
            let st = cw.sample_state(&grid, 3.0, 0.0).unwrap();
            let snap = Snapshot::new(&cw, &shift, &grid, &st, 3.0, 0.0).unwrap();
            let (mut e, mut g2) = (0.0, 0.0);
            for c in &snap.composite {
                let w = shift.weight_from_volume(&cw.gas, c.shock.v, c.shock.v_x).0;
                let dh = k * c.rare.v_x;
                e += grid.dx1 * w / c.v * 0.5 * dh * dh;
                g2 += grid.dx1 * shift.nu / shift.delta_s * c.shock.v_x * dh * dh;
            }
            let gt = snap.good_terms();
            assert!(gt.g3 == 0.0 && gt.gr.abs() < 1e-24 && gt.gs.abs() < 1e-24, "{gt:?}");
            assert!(snap.sup_phi() < 1e-15);
            [((snap.relative_entropy() - e) / e).abs(), ((gt.g2 - g2) / g2).abs(), gt.d]
        });
        for c in 0..3 {
            assert!(errs[1][c] < 1e-2 && errs[0][c] / errs[1][c] > 3.0, "{errs:?}");
        }
    }

    #[test]
    fn relative_entropy_is_quadratic() {
        let cw = wave(0.0);
        let shift = ShiftState::new(&cw);
        let grid = SlabGrid::new(-300.0, 400.0, 2800, 1, 1).unwrap();
        let e = |eps: f64| {
            let (st, _) = init_state(&cw, &grid, &PerturbationSpec { amplitude: eps, ..Default::default() }).unwrap();
            let snap = Snapshot::new(&cw, &shift, &grid, &st, 0.0, 0.0).unwrap();
            let (a, b) = (snap.relative_entropy_scaled(0.0), snap.relative_entropy_scaled(1.0));
            let two = snap.relative_entropy_scaled(2.0);
            assert!(((two - a) - 4.0 * (b - a)).abs() < 1e-12 * (two - a));
            b
        };
        let r = e(1e-3) / e(5e-4);
        assert!((3.8..=4.2).contains(&r), "{r}");
    }

    #[test]
    fn transverse_velocity_only_feeds_g3() {
        let cw = wave(0.05);
        let shift = ShiftState::new(&cw);
        let grid = SlabGrid::new(-300.0, 400.0, 1400, 4, 1).unwrap();
        let mut st = cw.sample_state(&grid, 0.0, 0.0).unwrap();
        for e in 0..grid.len() {
            let i = e / grid.plane();
            let x1 = grid.x1(i);
            let u2 = 1e-3 * (-(x1 - 40.0).powi(2) / 50.0).exp() * (2.0 * PI * grid.x2(e % grid.n2)).sin();
            st.mom[1][e] = st.rho[e] * u2;
        }
        let snap = Snapshot::new(&cw, &shift, &grid, &st, 0.0, 0.0).unwrap();
        let gt = snap.good_terms();
        assert!(gt.g3 > 0.0 && gt.gs.abs() < 1e-24 && gt.gr.abs() < 1e-24, "{gt:?}");
        assert!(gt.all_nonnegative());
        assert!(snap.transverse_kinetic_energy() > 0.0);
    }

    #[test]
    fn gs_dual_chart_agrees() {
        let cw = wave(0.05);
        let shift = ShiftState::new(&cw);
        let grid = SlabGrid::new(-300.0, 400.0, 5600, 1, 1).unwrap();
        let spec = PerturbationSpec { amplitude: 1e-3, support_width: 60.0, mode: PerturbationMode::RandomSmooth, seed: 5, ..Default::default() };
        let (st, _) = init_state(&cw, &grid, &spec).unwrap();
        let snap = Snapshot::new(&cw, &shift, &grid, &st, 0.0, 0.0).unwrap();
        let d = snap.gs_dual_chart(400).unwrap();
        assert!(((d.gs_y - d.gs_x) / d.gs_x).abs() < 0.02, "{d:?}");
        let r = d.gs_x / d.w_squared;
        assert!((0.5..=2.0).contains(&r), "{r}");
    }

    #[test]
    fn sup_distance_needs_positive_time() {
        let cw = wave(0.05);
        let shift = ShiftState::new(&cw);
        let grid = SlabGrid::new(-300.0, 400.0, 700, 1, 1).unwrap();
        let st = cw.sample_state(&grid, 0.0, 0.0).unwrap();
        let snap = Snapshot::new(&cw, &shift, &grid, &st, 0.0, 0.0).unwrap();
        assert!(matches!(snap.sup_distance_to_riemann(), Err(Error::Domain(_))));
        assert!(snap.sup_distance_limit().is_finite());
    }

    // On the smoothed composite the distance to the inviscid fan is the
    // smoothing gap of the rarefaction alone.
    #[test]
    fn sup_distance_on_composite_is_fan_gap() {
        let cw = wave(0.05);
        let shift = ShiftState::new(&cw);
        let t = 50.0;
        let grid = SlabGrid::new(-300.0, 400.0, 2800, 1, 1).unwrap();
        let st = cw.sample_state(&grid, t, 0.0).unwrap();
        let snap = Snapshot::new(&cw, &shift, &grid, &st, t, 0.0).unwrap();
        let d = snap.sup_distance_to_riemann().unwrap();
        let mut gap = 0.0f64;
        for i in 0..grid.n1 {
            let x = grid.x1(i);
            let a = cw.rarefaction.approx_state(t, x).unwrap();
            let (v, u) = cw.rarefaction.exact_state(t, x).unwrap();
            gap = gap.max((a.v - v).abs()).max((a.u1 - u).abs());
        }
        assert!(d <= gap * (1.0 + 1e-9) + 1e-15 && d > 0.5 * gap, "{d} {gap}");
    }

    #[test]
    fn envelopes_vanish_without_rarefaction() {
        let cw = wave(0.0);
        assert_eq!(interaction_envelopes(&cw, 5.0, 0.0, 0.1).unwrap(), (0.0, 0.0));
        let (n1, n2) = interaction_envelopes(&wave(0.05), 5.0, 0.0, 0.1).unwrap();
        assert!(n1 > 0.0 && n2 > 0.0);
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((m - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn poincare_equality_case_and_constants() {
        let q = PoincareQuadrature::default();
        let (l, r) = weighted_poincare_sides(&|y1, _, _| [y1, 1.0, 0.0, 0.0], q).unwrap();
        assert!((l - 1.0 / 12.0).abs() < 1e-6 && (r - 1.0 / 12.0).abs() < 1e-6, "{l} {r}");
        let (l, r) = weighted_poincare_sides(&|_, _, _| [3.0, 0.0, 0.0, 0.0], q).unwrap();
        assert!(l.abs() < 1e-20 && r == 0.0);
        let bad = |_: f64, y2: f64, _: f64| [(2.0 * PI * y2).sin(), 0.0, 2.0 * PI * (2.0 * PI * y2).cos(), 0.0];
        assert!(matches!(weighted_poincare_sides(&bad, q), Err(Error::Domain(_))));
    }

    #[test]
    fn poincare_random_trials() {
        let worst = verify_weighted_poincare(200, 11, PoincareQuadrature::default()).unwrap();
        assert!(worst >= -1e-8, "{worst}");
    }

    #[test]
    fn gagliardo_nirenberg_sech_and_transverse_mode() {
        let grid = SlabGrid::new(-30.0, 30.0, 6000, 1, 1).unwrap();
        let g: Vec<f64> = (0..grid.len()).map(|i| 1.0 / grid.x1(i).cosh()).collect();
        let [inf, l2, d1, ..] = gn_norms(&grid, &g);
        assert!((inf - 1.0).abs() < 1e-3);
        assert!((l2 * l2 - 2.0).abs() < 1e-4 && (d1 * d1 - 2.0 / 3.0).abs() < 1e-4);
        let bound = 2f64.sqrt() * (l2 * d1).sqrt();
        assert!((bound - 2f64.sqrt() * 2f64.powf(0.25) * (2.0f64 / 3.0).powf(0.25)).abs() < 1e-4 && bound > inf);

        let grid = SlabGrid::new(0.0, 1.0, 16, 32, 1).unwrap();
        let g: Vec<f64> = (0..grid.len()).map(|e| (2.0 * PI * grid.x2(e % grid.n2)).sin()).collect();
        let [inf, _, d1, grad, hess] = gn_norms(&grid, &g);
        assert!(d1 < 1e-12 && inf > 0.9 && grad > 0.0 && hess > 0.0);
    }

    #[test]
    fn gagliardo_nirenberg_constant_is_resolution_stable() {
        let planar = SlabGrid::new(-20.0, 20.0, 800, 1, 1).unwrap();
        let coarse = verify_gagliardo_nirenberg(&planar, &SlabGrid::new(-20.0, 20.0, 200, 16, 16).unwrap(), 40, 2);
        let fine = verify_gagliardo_nirenberg(&planar, &SlabGrid::new(-20.0, 20.0, 400, 32, 32).unwrap(), 40, 2);
        assert!(coarse.planar_margin >= 0.0 && fine.planar_margin >= 0.0);
        let rel = (coarse.fitted_c - fine.fitted_c).abs() / fine.fitted_c.max(1e-300);
        assert!(fine.fitted_c == 0.0 && coarse.fitted_c == 0.0 || rel < 0.05, "{coarse:?} {fine:?}");
    }

    fn residual_for(n1: usize, dt: f64) -> ReformulationResidual {
        let cw = wave(0.0);
        let grid = SlabGrid::new(-60.0, 140.0, n1, 1, 1).unwrap();
        let s0 = cw.sample_state(&grid, 1.0, 0.0).unwrap();
        let s1 = cw.sample_state(&grid, 1.0 + dt, 0.0).unwrap();
        reformulation_residual(&cw, &grid, (&s0, 0.0), (&s1, 0.0), 0.0, None, true).unwrap()
    }

    #[test]
    fn reformulation_residual_of_exact_shock_is_second_order() {
        let (a, b) = (residual_for(400, 1e-4), residual_for(800, 1e-4));
        for (x, y) in [(a.volume_row, b.volume_row), (a.effective_velocity_row, b.effective_velocity_row)] {
            assert!((3.0..=5.0).contains(&(x / y)), "{a:?} {b:?}");
        }
    }

    // A shear layer u2(x1) is rotational, so R carries −μ curl curl u.
    #[test]
    fn reformulation_residual_needs_the_r_term() {
        let cw = wave(0.05);
        let grid = SlabGrid::new(-150.0, 250.0, 3200, 1, 1).unwrap();
        let mut st = cw.sample_state(&grid, 0.0, 0.0).unwrap();
        for i in 0..grid.n1 {
            st.mom[1][i] = st.rho[i] * 0.05 * (-(grid.x1(i) - 60.0).powi(2) / 8.0).exp();
        }
        let mut s = Solver::new(cw.clone(), grid, st, StepControl::default()).unwrap();
        s.advance_to(0.5).unwrap();
        let (before, x0) = (s.state.clone(), s.shift.x);
        let rep = s.step(1.0).unwrap();
        let res = |r| reformulation_residual(&cw, &grid, (&before, x0), (&s.state, s.shift.x), rep.xdot, Some(rep.dt), r).unwrap();
        let (with, without) = (res(true), res(false));
        assert!(!with.coarse_sampling);
        assert!(without.effective_velocity_row > 10.0 * with.effective_velocity_row, "{with:?} {without:?}");
        assert_eq!(with.volume_row, without.volume_row);
    }

    #[test]
    fn apriori_functional_and_slope() {
        let recs: Vec<DiagnosticsRecord> = (0..3)
            .map(|k| DiagnosticsRecord { t: k as f64, h2_phi: 1.0 - 0.1 * k as f64, xdot: 1.0, g2: 1.0, ..Default::default() })
            .collect();
        assert!((apriori_lhs(&recs, 0.5) - (1.0 + 2.0 * 1.5)).abs() < 1e-14);
        let xs = [0.0f64, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * (-0.7 * x).exp()).collect();
        assert!((log_linear_slope(&xs, &ys) + 0.7).abs() < 1e-12);
    }
}
