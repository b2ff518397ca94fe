//! Convergence checks of the discrete scheme: a manufactured solution for the
//! right-hand side and the travelling viscous shock for the full time step.

use super::grid::{FlowState, SlabGrid};
use super::scheme::{rhs, zero_rhs, Ghosts, Layer, Workspace};
use super::{init_state, PerturbationSpec, Solver, StepControl};
use crate::composite::CompositeWave;
use crate::error::Result;
use crate::gas::{GasModel, PlanarState};
use std::f64::consts::PI;

/// Smooth periodic-in-`(x2, x3)` density and velocity.
fn prim(x: [f64; 3]) -> (f64, [f64; 3]) {
    let (a, b, c) = (0.3 * x[0], 2.0 * PI * x[1], 2.0 * PI * x[2]);
    let rho = 1.0 + 0.2 * a.sin() + 0.1 * b.cos() * c.sin();
    let u = [0.5 + 0.3 * a.cos() * b.sin(), 0.2 * (a + c).sin(), -0.1 + 0.15 * a.sin() * b.cos()];
    (rho, u)
}

/// Fourth-order central difference.
fn d4(f: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], axis: usize) -> f64 {
    let h = 1e-3;
    let at = |s: f64| {
        let mut y = x;
        y[axis] += s * h;
        f(y)
    };
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
}

// Continuous right-hand side of the closed-form fields.
fn exact_rhs(g: &GasModel, x: [f64; 3]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for d in 0..3 {
        out[0] -= d4(&|y| { let (r, u) = prim(y); r * u[d] }, x, d);
    }
    for a in 0..3 {
        let mut acc = -d4(&|y| g.p(1.0 / prim(y).0), x, a);
        for d in 0..3 {
            acc -= d4(&|y| { let (r, u) = prim(y); r * u[a] * u[d] }, x, d);
            acc += g.mu * d4(&|y| d4(&|z| prim(z).1[a], y, d), x, d);
        }
        let div = |y: [f64; 3]| (0..3).map(|d| d4(&|z| prim(z).1[d], y, d)).sum::<f64>();
        acc += (g.mu + g.lambda_v) * d4(&div, x, a);
        out[1 + a] = acc;
    }
    out
}

fn layer(grid: &SlabGrid, i: isize) -> Layer {
    let x1 = grid.x1_min + (i as f64 + 0.5) * grid.dx1;
    let plane = grid.plane();
    let mut l = Layer { rho: vec![0.0; plane], mom: [0; 3].map(|_| vec![0.0; plane]) };
    for j in 0..grid.n2 {
        for k in 0..grid.n3 {
            let (r, u) = prim([x1, grid.x2(j), grid.x3(k)]);
            let q = j * grid.n3 + k;
            l.rho[q] = r;
            for a in 0..3 {
                l.mom[a][q] = r * u[a];
            }
        }
    }
    l
}

/// Max-norm error of the discrete right-hand side against the closed-form
/// fields, with exact ghost layers.
pub fn manufactured_rhs_error(g: &GasModel, n1: usize, nt: usize) -> Result<f64> {
    let grid = SlabGrid::new(0.0, 10.0, n1, nt, nt)?;
    let mut state = FlowState::zeros(&grid);
    for i in 0..n1 {
        for j in 0..nt {
            for k in 0..nt {
                let e = grid.idx(i, j, k);
                let (r, u) = prim([grid.x1(i), grid.x2(j), grid.x3(k)]);
                state.rho[e] = r;
                for a in 0..3 {
                    state.mom[a][e] = r * u[a];
                }
            }
        }
    }
    let n = n1 as isize;
    let gh = Ghosts { left: [layer(&grid, -1), layer(&grid, -2)], right: [layer(&grid, n), layer(&grid, n + 1)] };
    let mut ws = Workspace::default();
    let mut out = zero_rhs(&grid);
    rhs(g, &grid, &state, &gh, &mut ws, &mut out)?;
    let mut worst = 0.0f64;
    for i in 0..n1 {
        for j in 0..nt {
            for k in 0..nt {
                let e = grid.idx(i, j, k);
                let want = exact_rhs(g, [grid.x1(i), grid.x2(j), grid.x3(k)]);
                for f in 0..4 {
                    worst = worst.max((out[f][e] - want[f]).abs());
                }
            }
        }
    }
    Ok(worst)
}


/// `log2` of the error ratio between `n` and `2n` cells per direction.
pub fn manufactured_order(g: &GasModel) -> Result<f64> {
    Ok((manufactured_rhs_error(g, 40, 12)? / manufactured_rhs_error(g, 80, 24)?).log2())
}

/// Unperturbed viscous shock run with the shift coupled: returns the sup
/// error of `ρ` against the travelling profile at `t_end` and the final shift.
pub fn comoving_shock_error(g: &GasModel, plus: PlanarState, delta_s: f64, n1: usize, t_end: f64) -> Result<(f64, f64)> {
    let cw = CompositeWave::from_strengths(g, plus, delta_s, 0.0, 40.0)?;
    let grid = SlabGrid::new(-60.0, 140.0, n1, 1, 1)?;
    let (st, _) = init_state(&cw, &grid, &PerturbationSpec { amplitude: 0.0, ..Default::default() })?;
    let mut s = Solver::new(cw.clone(), grid, st, StepControl::default())?;
    s.advance_to(t_end)?;
    let want = cw.sample_state(&s.grid, t_end, 0.0)?;
    let err = s.state.rho.iter().zip(&want.rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((err, s.shift.x))
}
