//! Three-dimensional run seeded with a transverse Fourier mode: the
//! transverse kinetic energy and the G3 dissipation.

use cwstab::composite::CompositeWave;
use cwstab::gas::{GasModel, PlanarState};
use cwstab::solver::grid::SlabGrid;
use cwstab::solver::run::{run, RunSettings};
use cwstab::solver::{init_state, PerturbationMode, PerturbationSpec, Solver, StepControl};

fn main() -> cwstab::Result<()> {
    let g = GasModel::new(1.4, 1.0, 0.0)?;
    let cw = CompositeWave::from_strengths(&g, PlanarState::new(1.2, 0.0)?, 0.1, 0.05, 40.0)?;
    let grid = SlabGrid::new(-60.0, 120.0, 180, 8, 8)?;
    let spec = PerturbationSpec { mode: PerturbationMode::TransverseMode, ..Default::default() };
    let (state, h2) = init_state(&cw, &grid, &spec)?;
    let mut solver = Solver::new(cw, grid, state, StepControl::default())?;
    let art = run(&mut solver, &RunSettings { t_end: 4.0, cadence: 0.5, checkpoint_rows: 0 }, None, h2, None)?;

    println!("{:>5} {:>12} {:>12} {:>12}", "t", "transverse", "G3", "H2_psi");
    for (r, e) in art.records.iter().zip(&art.extras) {
        println!("{:>5.1} {:>12.4e} {:>12.4e} {:>12.4e}", r.t, e.transverse_ke, r.g3, r.h2_psi);
    }
    Ok(())
}
