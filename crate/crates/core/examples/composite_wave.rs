//! Composite of the rarefaction and the viscous shock, and the two
//! interaction envelopes.

use cwstab::composite::CompositeWave;
use cwstab::diagnostics::interaction_envelopes;
use cwstab::gas::{GasModel, PlanarState};
use cwstab::solver::grid::SlabGrid;

fn main() -> cwstab::Result<()> {
    let g = GasModel::new(1.4, 1.0, 0.0)?;
    let cw = CompositeWave::from_strengths(&g, PlanarState::new(1.2, 0.0)?, 0.1, 0.05, 40.0)?;
    let (l, m, r) = (cw.left_state(), cw.middle(), cw.right_state());
    println!("states v: {:.6} -> {:.6} -> {:.6}", l.v, m.v, r.v);
    println!("total strength {:.4}", cw.total_strength());

    for x in [-100.0, -20.0, 0.0, 40.0, 80.0] {
        let c = cw.eval(5.0, x, 0.0)?;
        println!("t = 5, x1 = {x:>6}: v = {:.6} u1 = {:.6} h1 = {:.6}", c.v, c.u1, c.h1);
    }

    let grid = SlabGrid::new(-150.0, 250.0, 800, 1, 1)?;
    let st = cw.sample_state(&grid, 5.0, 0.0)?;
    println!("mass on the slab at t = 5: {:.10}", st.total_mass(&grid));

    for t in [0.0, 25.0, 50.0, 100.0] {
        let (n1, n2) = interaction_envelopes(&cw, t, 0.0, 0.05)?;
        println!("t = {t:>5}: N1 = {n1:.3e} N2 = {n2:.3e}");
    }
    Ok(())
}
