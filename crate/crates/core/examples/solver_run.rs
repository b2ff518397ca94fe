//! A short planar run of the perturbed composite with the diagnostics series.

use cwstab::composite::CompositeWave;
use cwstab::gas::{GasModel, PlanarState};
use cwstab::solver::grid::SlabGrid;
use cwstab::solver::run::{run, RunSettings};
use cwstab::solver::{init_state, PerturbationSpec, Solver, StepControl};

fn main() -> cwstab::Result<()> {
    let g = GasModel::new(1.4, 1.0, 0.0)?;
    let cw = CompositeWave::from_strengths(&g, PlanarState::new(1.2, 0.0)?, 0.1, 0.05, 40.0)?;
    let grid = SlabGrid::new(-150.0, 250.0, 1600, 1, 1)?;
    let (state, h2) = init_state(&cw, &grid, &PerturbationSpec::default())?;
    let mut solver = Solver::new(cw, grid, state, StepControl::default())?;
    let settings = RunSettings { t_end: 20.0, cadence: 2.0, checkpoint_rows: 0 };
    let art = run(&mut solver, &settings, None, h2, None)?;

    println!("{} steps, initial H2 {h2:.3e}", art.steps);
    println!("{:>6} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}", "t", "X", "Xdot", "E_rel", "D", "supdist", "mass");
    for r in &art.records {
        println!(
            "{:>6.1} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
            r.t, r.x, r.xdot, r.e_rel, r.d, r.supdist, r.mass_delta
        );
    }
    Ok(())
}
