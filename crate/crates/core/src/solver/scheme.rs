//! Spatial discretization: central fluxes with third-difference scalar
//! dissipation (local Lax-Friedrichs on linearly reconstructed states),
//! centred viscous terms, two ghost layers at each `x1` end.

use super::grid::{FlowState, SlabGrid};
use crate::error::{Error, Result};
use crate::gas::GasModel;

/// One transverse plane of conserved values.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rho: Vec<f64>,
    pub mom: [Vec<f64>; 3],
}

impl Layer {
    /// A plane that is uniform in `(x2, x3)`.
    pub fn uniform(plane: usize, rho: f64, u1: f64) -> Self {
        Self { rho: vec![rho; plane], mom: [vec![rho * u1; plane], vec![0.0; plane], vec![0.0; plane]] }
    }
}

/// Ghost planes; index 0 is adjacent to the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Ghosts {
    pub left: [Layer; 2],
    pub right: [Layer; 2],
}

/// Time derivative of `(ρ, m1, m2, m3)`.
pub type Rhs = [Vec<f64>; 4];

pub fn zero_rhs(grid: &SlabGrid) -> Rhs {
    [0; 4].map(|_| vec![0.0; grid.len()])
}

/// Padded primitive and conserved fields plus per-direction scratch.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    rho: Vec<f64>,
    m: [Vec<f64>; 3],
    u: [Vec<f64>; 3],
    p: Vec<f64>,
    c: Vec<f64>,
    flux: [Vec<f64>; 4],
}

const PAD: usize = 2;

/// Side results of one right-hand side evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsInfo {
    /// Net mass inflow rate through the two `x1` ends.
    pub inflow: f64,
    /// `min dx_d / (|u_d| + c)` over the interior.
    pub advective_dt: f64,
    pub rho_min: f64,
    pub max_speed: f64,
}

/// Periodic neighbour tables `(j-1, j+1, j+2)`.
fn wrap(n: usize) -> [Vec<usize>; 3] {
    [n - 1, 1, 2].map(|s| (0..n).map(|j| (j + s) % n).collect())
}

impl Workspace {
    fn fill(&mut self, g: &GasModel, grid: &SlabGrid, s: &FlowState, gh: &Ghosts) -> Result<()> {
        let plane = grid.plane();
        let n = (grid.n1 + 2 * PAD) * plane;
        self.rho.resize(n, 0.0);
        for a in 0..3 {
            self.m[a].resize(n, 0.0);
            self.u[a].resize(n, 0.0);
        }
        self.p.resize(n, 0.0);
        self.c.resize(n, 0.0);
        let interior = PAD * plane..(PAD + grid.n1) * plane;
        self.rho[interior.clone()].copy_from_slice(&s.rho);
        for a in 0..3 {
            self.m[a][interior.clone()].copy_from_slice(&s.mom[a]);
        }
        for (layer, pos) in [(&gh.left[0], PAD - 1), (&gh.left[1], PAD - 2), (&gh.right[0], PAD + grid.n1), (&gh.right[1], PAD + grid.n1 + 1)] {
            if layer.rho.len() != plane || layer.mom.iter().any(|m| m.len() != plane) {
                return Err(Error::Usage("ghost layer size does not match the transverse grid".into()));
            }
            let r = pos * plane..(pos + 1) * plane;
            self.rho[r.clone()].copy_from_slice(&layer.rho);
            for a in 0..3 {
                self.m[a][r.clone()].copy_from_slice(&layer.mom[a]);
            }
        }
        let gamma = g.gamma;
        for e in 0..n {
            let rho = self.rho[e];
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(Error::Physics(format!("vacuum or non-finite density {rho} in padded cell {e}")));
            }
            let inv = 1.0 / rho;
            for a in 0..3 {
                self.u[a][e] = self.m[a][e] * inv;
            }
            let p = rho.powf(gamma);
            self.p[e] = p;
            self.c[e] = (gamma * p * inv).sqrt();
        }
        Ok(())
    }

    /// Pressure `ρ^γ` of the interior cells from the last fill.
    pub fn pressure(&self, grid: &SlabGrid) -> &[f64] {
        &self.p[PAD * grid.plane()..(PAD + grid.n1) * grid.plane()]
    }

    /// Numerical flux in direction `D` across the face between cells `a`
    /// and `b`, with outer neighbours `am`, `bp`.
    #[inline(always)]
    fn face_flux<const D: usize>(&self, am: usize, a: usize, b: usize, bp: usize) -> [f64; 4] {
        let (ua, ub) = (self.u[D][a], self.u[D][b]);
        let speed = (ua.abs() + self.c[a]).max(ub.abs() + self.c[b]);
        let half = 0.5 * speed;
        let jump = |q: &[f64]| 0.25 * (3.0 * (q[b] - q[a]) + q[am] - q[bp]);
        let mut out = [0.0; 4];
        out[0] = 0.5 * (self.m[D][a] + self.m[D][b]) - half * jump(&self.rho);
        for k in 0..3 {
            let m = &self.m[k];
            let (mut fa, mut fb) = (m[a] * ua, m[b] * ub);
            if k == D {
                fa += self.p[a];
                fb += self.p[b];
            }
            out[1 + k] = 0.5 * (fa + fb) - half * jump(m);
        }
        out
    }

    /// `min dx_d/(|u_d| + c)` and `max (|u_d| + c)` over the given cells.
    fn speeds(&self, cells: std::ops::Range<usize>, d: usize, h: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for e in cells {
            let s = self.u[d][e].abs() + self.c[e];
            lo = lo.min(h / s);
            hi = hi.max(s);
        }
        (lo, hi)
    }
}

/// Evaluate the semi-discrete right-hand side.
pub fn rhs(g: &GasModel, grid: &SlabGrid, state: &FlowState, ghosts: &Ghosts, ws: &mut Workspace, out: &mut Rhs) -> Result<RhsInfo> {
    state.check(grid)?;
    ws.fill(g, grid, state, ghosts)?;
    let (n1, n2, n3) = (grid.n1, grid.n2, grid.n3);
    let plane = grid.plane();
    for o in out.iter_mut() {
        o.clear();
        o.resize(grid.len(), 0.0);
    }
    let h = [grid.dx1, grid.dx2, grid.dx3];
    let active = [true, n2 > 1, n3 > 1];
    let interior = PAD * plane..(PAD + n1) * plane;
    let mut info = RhsInfo { inflow: 0.0, advective_dt: f64::INFINITY, rho_min: f64::INFINITY, max_speed: 0.0 };
    for e in interior.clone() {
        info.rho_min = info.rho_min.min(ws.rho[e]);
    }

    // x1 faces i - 1/2 for i = 0..=n1
    for d in 0..3 {
        if active[d] {
            let (lo, hi) = ws.speeds(interior.clone(), d, h[d]);
            info.advective_dt = info.advective_dt.min(lo);
            info.max_speed = info.max_speed.max(hi);
        }
    }
    let nf = (n1 + 1) * plane;
    let mut flux = std::mem::take(&mut ws.flux);
    for f in flux.iter_mut() {
        f.resize(nf, 0.0);
    }
    for i in 0..=n1 {
        for q in 0..plane {
            let a = (i + PAD - 1) * plane + q;
            let fl = ws.face_flux::<0>(a - plane, a, a + plane, a + 2 * plane);
            for k in 0..4 {
                flux[k][i * plane + q] = fl[k];
            }
        }
    }
    let inv = 1.0 / grid.dx1;
    for k in 0..4 {
        let fk = &flux[k];
        for (c, o) in out[k].iter_mut().enumerate() {
            *o = -(fk[c + plane] - fk[c]) * inv;
        }
    }
    let area = grid.dx2 * grid.dx3;
    info.inflow = (flux[0][..plane].iter().sum::<f64>() - flux[0][n1 * plane..].iter().sum::<f64>()) * area;
    ws.flux = flux;

    // transverse faces, periodic
    let [jm, jp, jp2] = wrap(n2);
    let [km, kp, kp2] = wrap(n3);
    for d in 1..3 {
        if !active[d] {
            continue;
        }
        let inv = 1.0 / h[d];
        for i in 0..n1 {
            let base = (i + PAD) * plane;
            for j in 0..n2 {
                for k in 0..n3 {
                    let at = |jj: usize, kk: usize| base + jj * n3 + kk;
                    let (am, a, b, bp) = if d == 1 {
                        (at(jm[j], k), at(j, k), at(jp[j], k), at(jp2[j], k))
                    } else {
                        (at(j, km[k]), at(j, k), at(j, kp[k]), at(j, kp2[k]))
                    };
                    let fl = if d == 1 { ws.face_flux::<1>(am, a, b, bp) } else { ws.face_flux::<2>(am, a, b, bp) };
                    let (ca, cb) = (a - PAD * plane, b - PAD * plane);
                    for kk in 0..4 {
                        out[kk][ca] -= fl[kk] * inv;
                        out[kk][cb] += fl[kk] * inv;
                    }
                }
            }
        }
    }

    viscous(g, grid, ws, out);
    Ok(info)
}

/// `μΔu + (μ+λ)∇div u` added to the momentum rows.
fn viscous(g: &GasModel, grid: &SlabGrid, ws: &Workspace, out: &mut Rhs) {
    let (n1, n2, n3) = (grid.n1, grid.n2, grid.n3);
    let plane = grid.plane();
    let mu = g.mu;
    let ml = g.mu + g.lambda_v;
    let ih2 = [grid.dx1, grid.dx2, grid.dx3].map(|x| 1.0 / (x * x));
    let u = &ws.u;
    if plane == 1 {
        let coef = [(mu + ml) * ih2[0], mu * ih2[0], mu * ih2[0]];
        for c in 0..n1 {
            let e = c + PAD;
            for a in 0..3 {
                out[1 + a][c] += coef[a] * (u[a][e + 1] - 2.0 * u[a][e] + u[a][e - 1]);
            }
        }
        return;
    }
    let (a2, a3) = (n2 > 1, n3 > 1);
    let cxy = 1.0 / (4.0 * grid.dx1 * grid.dx2);
    let cxz = 1.0 / (4.0 * grid.dx1 * grid.dx3);
    let cyz = 1.0 / (4.0 * grid.dx2 * grid.dx3);
    let [jm, jp, _] = wrap(n2);
    let [km, kp, _] = wrap(n3);
    for i in PAD..PAD + n1 {
        for j in 0..n2 {
            // row offsets of j-1 and j+1
            let (ym, yp) = (jm[j] * n3, jp[j] * n3);
            for k in 0..n3 {
                let (zm, zp) = (km[k], kp[k]);
                let row = |ii: usize, jj: usize, kk: usize| ii * plane + jj + kk;
                let e = row(i, j * n3, k);
                let (xm, xp) = (e - plane, e + plane);
                let (eym, eyp) = (row(i, ym, k), row(i, yp, k));
                let (ezm, ezp) = (row(i, j * n3, zm), row(i, j * n3, zp));
                let c = e - PAD * plane;
                let lap = |f: &[f64], d: usize| -> f64 {
                    match d {
                        0 => (f[xp] - 2.0 * f[e] + f[xm]) * ih2[0],
                        1 => (f[eyp] - 2.0 * f[e] + f[eym]) * ih2[1],
                        _ => (f[ezp] - 2.0 * f[e] + f[ezm]) * ih2[2],
                    }
                };
                let dxy = |f: &[f64]| (f[row(i + 1, yp, k)] - f[row(i + 1, ym, k)] - f[row(i - 1, yp, k)] + f[row(i - 1, ym, k)]) * cxy;
                let dxz = |f: &[f64]| {
                    (f[row(i + 1, j * n3, zp)] - f[row(i + 1, j * n3, zm)] - f[row(i - 1, j * n3, zp)] + f[row(i - 1, j * n3, zm)]) * cxz
                };
                let dyz = |f: &[f64]| (f[row(i, yp, zp)] - f[row(i, yp, zm)] - f[row(i, ym, zp)] + f[row(i, ym, zm)]) * cyz;
                for a in 0..3 {
                    let ua = &u[a][..];
                    let mut acc = if a == 0 { mu + ml } else { mu } * lap(ua, 0);
                    if a2 {
                        acc += if a == 1 { mu + ml } else { mu } * lap(ua, 1);
                    }
                    if a3 {
                        acc += if a == 2 { mu + ml } else { mu } * lap(ua, 2);
                    }
                    out[1 + a][c] += acc;
                }
                if a2 {
                    out[1][c] += ml * dxy(&u[1]);
                    out[2][c] += ml * dxy(&u[0]);
                }
                if a3 {
                    out[1][c] += ml * dxz(&u[2]);
                    out[3][c] += ml * dxz(&u[0]);
                }
                if a2 && a3 {
                    out[2][c] += ml * dyz(&u[2]);
                    out[3][c] += ml * dyz(&u[1]);
                }
            }
        }
    }
}

/// Viscous step limit `visc_cfl·min(1, 2ρ_min)/((2μ+λ)Σ dx_i⁻²)`. The
/// density factor keeps the diffusion number of `(2μ+λ)/ρ` below one half
/// when `visc_cfl ≤ 1/4`.
pub fn viscous_dt(g: &GasModel, grid: &SlabGrid, rho_min: f64, visc_cfl: f64) -> f64 {
    visc_cfl * (2.0 * rho_min).min(1.0) / (g.visc() * grid.inverse_square_spacing())
}

/// Largest stable step: the advective limit `cfl·min dx/(|u|+c)` and
/// [`viscous_dt`].
pub fn stable_dt(g: &GasModel, grid: &SlabGrid, state: &FlowState, cfl: f64, visc_cfl: f64) -> f64 {
    let h = [grid.dx1, grid.dx2, grid.dx3];
    let active = [true, grid.n2 > 1, grid.n3 > 1];
    let mut adv = f64::INFINITY;
    let mut rho_min = f64::INFINITY;
    for e in 0..state.rho.len() {
        let rho = state.rho[e];
        rho_min = rho_min.min(rho);
        let c = g.sound_speed_unchecked(rho);
        for d in 0..3 {
            if active[d] {
                let s = (state.mom[d][e] / rho).abs() + c;
                adv = adv.min(h[d] / s);
            }
        }
    }
    (cfl * adv).min(viscous_dt(g, grid, rho_min, visc_cfl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::verification::manufactured_rhs_error;

    #[test]
    fn manufactured_solution_second_order() {
        let g = GasModel::new(1.4, 0.7, 0.4).unwrap();
        let coarse = manufactured_rhs_error(&g, 40, 12).unwrap();
        let fine = manufactured_rhs_error(&g, 80, 24).unwrap();
        let ratio = coarse / fine;
        assert!((3.3..=4.8).contains(&ratio), "{coarse} {fine} {ratio}");
    }

    #[test]
    fn constant_state_is_steady() {
        let g = GasModel::new(1.4, 1.0, 0.3).unwrap();
        let grid = SlabGrid::new(-5.0, 5.0, 20, 4, 3).unwrap();
        let u = [0.3, -0.2, 0.7];
        let ones = vec![1.0; grid.len()];
        let v = vec![0.8; grid.len()];
        let us = u.map(|c| ones.iter().map(|o| o * c).collect::<Vec<_>>());
        let state = FlowState::from_primitive(&v, [&us[0], &us[1], &us[2]], 0.0);
        let mut l = Layer::uniform(grid.plane(), 1.25, u[0]);
        l.mom[1] = vec![1.25 * u[1]; grid.plane()];
        l.mom[2] = vec![1.25 * u[2]; grid.plane()];
        let gh = Ghosts { left: [l.clone(), l.clone()], right: [l.clone(), l] };
        let mut ws = Workspace::default();
        let mut out = zero_rhs(&grid);
        let info = rhs(&g, &grid, &state, &gh, &mut ws, &mut out).unwrap();
        assert!(info.inflow.abs() < 1e-13);
        assert_eq!(info.rho_min, 1.25);
        for f in &out {
            assert!(f.iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn vacuum_and_bad_ghosts_rejected() {
        let g = GasModel::new(1.4, 1.0, 0.0).unwrap();
        let grid = SlabGrid::new(0.0, 1.0, 16, 2, 1).unwrap();
        let mut state = FlowState::from_primitive(&vec![1.0; 32], [&vec![0.0; 32], &vec![0.0; 32], &vec![0.0; 32]], 0.0);
        let l = Layer::uniform(2, 1.0, 0.0);
        let gh = Ghosts { left: [l.clone(), l.clone()], right: [l.clone(), l.clone()] };
        let mut ws = Workspace::default();
        let mut out = zero_rhs(&grid);
        state.rho[5] = 0.0;
        assert!(matches!(rhs(&g, &grid, &state, &gh, &mut ws, &mut out), Err(Error::Physics(_))));
        state.rho[5] = 1.0;
        let bad = Ghosts { left: [Layer::uniform(3, 1.0, 0.0), l.clone()], right: [l.clone(), l] };
        assert!(matches!(rhs(&g, &grid, &state, &bad, &mut ws, &mut out), Err(Error::Usage(_))));
    }

    #[test]
    fn viscous_dt_limit_scales_with_spacing() {
        let g = GasModel::new(1.4, 1.0, 0.0).unwrap();
        let grid = SlabGrid::new(0.0, 1.0, 100, 1, 1).unwrap();
        let n = grid.len();
        let st = FlowState::from_primitive(&vec![1.0; n], [&vec![0.0; n], &vec![0.0; n], &vec![0.0; n]], 0.0);
        let dt = stable_dt(&g, &grid, &st, 10.0, 0.25);
        assert!((dt - 0.25 * 1e-4 / 2.0).abs() < 1e-15);
        let thin = FlowState::from_primitive(&vec![4.0; n], [&vec![0.0; n], &vec![0.0; n], &vec![0.0; n]], 0.0);
        let dt = stable_dt(&g, &grid, &thin, 10.0, 0.25);
        assert!((dt - 0.5 * 0.25 * 1e-4 / 2.0).abs() < 1e-15);
        let cube = SlabGrid::new(0.0, 1.0, 100, 100, 100).unwrap();
        assert!((viscous_dt(&g, &cube, 1.0, 0.25) - 0.25 * 1e-4 / 6.0).abs() < 1e-15);
    }
}
