//! Cell-centred grid on the truncated slab `[x1_min, x1_max] × 𝕋²` and the
//! discrete fields living on it.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform cell-centred grid; the transverse period is exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabGrid {
    pub x1_min: f64,
    pub x1_max: f64,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub dx1: f64,
    pub dx2: f64,
    pub dx3: f64,
}

impl SlabGrid {
    pub fn new(x1_min: f64, x1_max: f64, n1: usize, n2: usize, n3: usize) -> Result<Self> {
        if n1 < 16 {
            return Err(Error::Config(format!("n1 must be at least 16, got {n1}")));
        }
        if n2 == 0 || n3 == 0 {
            return Err(Error::Config("n2 and n3 must be at least 1".into()));
        }
        if !(x1_max > x1_min) {
            return Err(Error::Config(format!("empty slab [{x1_min}, {x1_max}]")));
        }
        Ok(Self {
            x1_min,
            x1_max,
            n1,
            n2,
            n3,
            dx1: (x1_max - x1_min) / n1 as f64,
            dx2: 1.0 / n2 as f64,
            dx3: 1.0 / n3 as f64,
        })
    }

    /// The planar fast path (`n2 = n3 = 1`).
    pub fn is_planar(&self) -> bool {
        self.n2 == 1 && self.n3 == 1
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells per `x1` plane.
    pub fn plane(&self) -> usize {
        self.n2 * self.n3
    }

    /// Linear index; `x1` varies slowest, `x3` fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n2 + j) * self.n3 + k
    }

    #[inline]
    pub fn x1(&self, i: usize) -> f64 {
        self.x1_min + (i as f64 + 0.5) * self.dx1
    }

    #[inline]
    pub fn x2(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx2
    }

    #[inline]
    pub fn x3(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dx3
    }

    pub fn x1_centers(&self) -> Vec<f64> {
        (0..self.n1).map(|i| self.x1(i)).collect()
    }

    /// Volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.dx1 * self.dx2 * self.dx3
    }

    /// Number of transverse directions that are resolved.
    pub fn active_dims(&self) -> usize {
        1 + usize::from(self.n2 > 1) + usize::from(self.n3 > 1)
    }

    /// `Σ 1/dx_i²` over resolved directions.
    pub fn inverse_square_spacing(&self) -> f64 {
        let mut s = 1.0 / (self.dx1 * self.dx1);
        if self.n2 > 1 {
            s += 1.0 / (self.dx2 * self.dx2);
        }
        if self.n3 > 1 {
            s += 1.0 / (self.dx3 * self.dx3);
        }
        s
    }

    pub fn check_field(&self, f: &[f64]) -> Result<()> {
        if f.len() == self.len() {
            Ok(())
        } else {
            Err(Error::Usage(format!("field of length {} on a grid of {} cells", f.len(), self.len())))
        }
    }

    /// Broadcast an `x1` profile over the transverse cells.
    pub fn broadcast(&self, profile: &[f64]) -> Vec<f64> {
        let plane = self.plane();
        let mut out = Vec::with_capacity(self.len());
        for &p in profile {
            out.extend(std::iter::repeat(p).take(plane));
        }
        out
    }

    /// Midpoint-rule integral over the slab.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        pairwise_sum(f) * self.cell_volume()
    }
}

/// Fixed-order pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Density and momentum on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub rho: Vec<f64>,
    pub mom: [Vec<f64>; 3],
    pub time: f64,
}

impl FlowState {
    pub fn zeros(grid: &SlabGrid) -> Self {
        let n = grid.len();
        Self { rho: vec![0.0; n], mom: [vec![0.0; n], vec![0.0; n], vec![0.0; n]], time: 0.0 }
    }

    /// Assemble from specific volume and velocity fields.
    pub fn from_primitive(v: &[f64], u: [&[f64]; 3], time: f64) -> Self {
        let rho: Vec<f64> = v.iter().map(|v| 1.0 / v).collect();
        let mom = [0, 1, 2].map(|c| rho.iter().zip(u[c]).map(|(r, u)| r * u).collect());
        Self { rho, mom, time }
    }

    pub fn specific_volume(&self) -> Vec<f64> {
        self.rho.iter().map(|r| 1.0 / r).collect()
    }

    pub fn velocity(&self) -> [Vec<f64>; 3] {
        [0, 1, 2].map(|c| self.mom[c].iter().zip(&self.rho).map(|(m, r)| m / r).collect())
    }

    pub fn check(&self, grid: &SlabGrid) -> Result<()> {
        grid.check_field(&self.rho)?;
        for m in &self.mom {
            grid.check_field(m)?;
        }
        Ok(())
    }

    /// Fails on vacuum or non-finite entries.
    pub fn check_physical(&self) -> Result<()> {
        if let Some(i) = self.rho.iter().position(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::Physics(format!("vacuum or non-finite density at cell {i}: {}", self.rho[i])));
        }
        for m in &self.mom {
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Physics("non-finite momentum".into()));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self, grid: &SlabGrid) -> f64 {
        grid.integrate(&self.rho)
    }
}

/// Centred first derivative along `axis` (0 = x1). Periodic in `x2`, `x3`;
/// second-order one-sided at the `x1` ends.
pub fn partial(grid: &SlabGrid, f: &[f64], axis: usize) -> Vec<f64> {
    let (n1, n2, n3) = (grid.n1, grid.n2, grid.n3);
    let mut out = vec![0.0; f.len()];
    match axis {
        0 => {
            let h = grid.dx1;
            let plane = grid.plane();
            for i in 0..n1 {
                for q in 0..plane {
                    let at = |ii: usize| f[ii * plane + q];
                    out[i * plane + q] = if i == 0 {
                        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
                    } else if i == n1 - 1 {
                        (3.0 * at(n1 - 1) - 4.0 * at(n1 - 2) + at(n1 - 3)) / (2.0 * h)
                    } else {
                        (at(i + 1) - at(i - 1)) / (2.0 * h)
                    };
                }
            }
        }
        1 => {
            if n2 == 1 {
                return out;
            }
            let h = grid.dx2;
            for i in 0..n1 {
                for j in 0..n2 {
                    let (jp, jm) = ((j + 1) % n2, (j + n2 - 1) % n2);
                    for k in 0..n3 {
                        out[grid.idx(i, j, k)] = (f[grid.idx(i, jp, k)] - f[grid.idx(i, jm, k)]) / (2.0 * h);
                    }
                }
            }
        }
        2 => {
            if n3 == 1 {
                return out;
            }
            let h = grid.dx3;
            for i in 0..n1 {
                for j in 0..n2 {
                    for k in 0..n3 {
                        let (kp, km) = ((k + 1) % n3, (k + n3 - 1) % n3);
                        out[grid.idx(i, j, k)] = (f[grid.idx(i, j, kp)] - f[grid.idx(i, j, km)]) / (2.0 * h);
                    }
                }
            }
        }
        _ => panic!("axis {axis} out of range"),
    }
    out
}

/// Centred second derivative along `axis`; second-order one-sided at the `x1` ends.
pub fn second_partial(grid: &SlabGrid, f: &[f64], axis: usize) -> Vec<f64> {
    let (n1, n2, n3) = (grid.n1, grid.n2, grid.n3);
    let mut out = vec![0.0; f.len()];
    match axis {
        0 => {
            let h2 = grid.dx1 * grid.dx1;
            let plane = grid.plane();
            for i in 0..n1 {
                for q in 0..plane {
                    let at = |ii: usize| f[ii * plane + q];
                    out[i * plane + q] = if i == 0 {
                        (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2
                    } else if i == n1 - 1 {
                        (2.0 * at(n1 - 1) - 5.0 * at(n1 - 2) + 4.0 * at(n1 - 3) - at(n1 - 4)) / h2
                    } else {
                        (at(i + 1) - 2.0 * at(i) + at(i - 1)) / h2
                    };
                }
            }
        }
        1 | 2 => {
            let n = if axis == 1 { n2 } else { n3 };
            if n == 1 {
                return out;
            }
            let h2 = if axis == 1 { grid.dx2 * grid.dx2 } else { grid.dx3 * grid.dx3 };
            for i in 0..n1 {
                for j in 0..n2 {
                    for k in 0..n3 {
                        let (p, m) = if axis == 1 {
                            (grid.idx(i, (j + 1) % n2, k), grid.idx(i, (j + n2 - 1) % n2, k))
                        } else {
                            (grid.idx(i, j, (k + 1) % n3), grid.idx(i, j, (k + n3 - 1) % n3))
                        };
                        let c = grid.idx(i, j, k);
                        out[c] = (f[p] - 2.0 * f[c] + f[m]) / h2;
                    }
                }
            }
        }
        _ => panic!("axis {axis} out of range"),
    }
    out
}

pub fn gradient(grid: &SlabGrid, f: &[f64]) -> [Vec<f64>; 3] {
    [0, 1, 2].map(|a| partial(grid, f, a))
}

pub fn laplacian(grid: &SlabGrid, f: &[f64]) -> Vec<f64> {
    let mut out = second_partial(grid, f, 0);
    for a in 1..3 {
        for (o, s) in out.iter_mut().zip(second_partial(grid, f, a)) {
            *o += s;
        }
    }
    out
}

pub fn divergence(grid: &SlabGrid, u: &[Vec<f64>; 3]) -> Vec<f64> {
    let mut out = partial(grid, &u[0], 0);
    for a in 1..3 {
        for (o, s) in out.iter_mut().zip(partial(grid, &u[a], a)) {
            *o += s;
        }
    }
    out
}
