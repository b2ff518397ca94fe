//! The weight `a` and the shift rate on a perturbed composite.

use cwstab::composite::CompositeWave;
use cwstab::gas::{GasModel, PlanarState};
use cwstab::shift::ShiftState;
use cwstab::solver::grid::SlabGrid;
use cwstab::solver::{init_state, PerturbationSpec};

fn main() -> cwstab::Result<()> {
    let g = GasModel::new(1.4, 1.0, 0.0)?;
    let cw = CompositeWave::from_strengths(&g, PlanarState::new(1.2, 0.0)?, 0.1, 0.05, 40.0)?;
    let shift = ShiftState::new(&cw);
    println!("nu = {:.4}, M = {:.4}, sigma* = {:.6}", shift.nu, shift.m, shift.sigma_star);
    for x in [0.0, 30.0, 40.0, 50.0, 80.0] {
        let (a, a_x) = shift.weight(&cw, 0.0, x);
        println!("x1 = {x:>5}: a = {a:.8} a' = {a_x:.3e}");
    }

    let grid = SlabGrid::new(-150.0, 250.0, 1600, 1, 1)?;
    let exact = cw.sample_state(&grid, 0.0, 0.0)?;
    println!("rate on the composite: {:.3e}", shift.shift_rate(&cw, &exact, &grid, 0.0, 0.0)?);
    for amp in [1e-3, 2e-3, 4e-3] {
        let (st, _) = init_state(&cw, &grid, &PerturbationSpec { amplitude: amp, ..Default::default() })?;
        println!("amplitude {amp:.0e}: rate {:.4e}", shift.shift_rate(&cw, &st, &grid, 0.0, 0.0)?);
    }
    Ok(())
}
