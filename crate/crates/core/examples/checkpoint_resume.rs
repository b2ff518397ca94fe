//! Interrupt a run at a checkpoint, resume it and compare with an
//! uninterrupted run.

use cwstab::composite::CompositeWave;
use cwstab::gas::{GasModel, PlanarState};
use cwstab::solver::checkpoint::Checkpoint;
use cwstab::solver::grid::SlabGrid;
use cwstab::solver::run::{restore, run, RunSettings};
use cwstab::solver::{init_state, PerturbationSpec, Solver, StepControl};

fn fresh() -> cwstab::Result<(Solver, f64)> {
    let g = GasModel::new(1.4, 1.0, 0.0)?;
    let cw = CompositeWave::from_strengths(&g, PlanarState::new(1.2, 0.0)?, 0.1, 0.05, 40.0)?;
    let grid = SlabGrid::new(-150.0, 250.0, 800, 1, 1)?;
    let (state, h2) = init_state(&cw, &grid, &PerturbationSpec::default())?;
    Ok((Solver::new(cw, grid, state, StepControl::default())?, h2))
}

fn main() -> cwstab::Result<()> {
    let dir = std::env::temp_dir().join(format!("cwstab-resume-{}", std::process::id()));
    let full_dir = dir.join("full");
    let part_dir = dir.join("part");

    let (mut a, h2) = fresh()?;
    let full = run(&mut a, &RunSettings { t_end: 10.0, cadence: 1.0, checkpoint_rows: 0 }, Some(&full_dir), h2, None)?;

    let (mut b, h2) = fresh()?;
    run(&mut b, &RunSettings { t_end: 6.0, cadence: 1.0, checkpoint_rows: 3 }, Some(&part_dir), h2, None)?;
    let chk = part_dir.join("checkpoint.chk");
    let saved = Checkpoint::load(&chk)?;
    println!("checkpoint: dims {:?}, t = {}, X = {:.3e}", saved.dims, saved.state.time, saved.shift);

    let (mut c, _) = fresh()?;
    let meta = restore(&mut c, &chk)?;
    let resumed = run(&mut c, &RunSettings { t_end: 10.0, cadence: 1.0, checkpoint_rows: 0 }, Some(&part_dir), 0.0, Some(meta))?;

    let worst = full
        .records
        .iter()
        .zip(&resumed.records)
        .map(|(p, q)| (p.e_rel - q.e_rel).abs().max((p.x - q.x).abs()))
        .fold(0.0, f64::max);
    println!("rows {} vs {}, largest difference in E_rel or X: {worst:.3e}", full.records.len(), resumed.records.len());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
