//! Pressure law, characteristic speeds, Riemann invariants and the relative
//! quantities of the γ-law gas.

use cwstab::gas::{Family, GasModel, PlanarState, Potential};

fn main() -> cwstab::Result<()> {
    let g = GasModel::new(1.4, 1.0, 0.0)?;
    println!("p(1) = {}, p'(1) = {}, c(1) = {}", g.pressure(1.0)?, g.pressure_derivative(1.0)?, g.sound_speed(1.0)?);

    let s = PlanarState::new(1.2, 0.0)?;
    let (l1, l2) = g.eigenvalues(s.rho(), s.u1)?;
    println!("eigenvalues at v = 1.2: {l1:.6} {l2:.6}");

    // u1 on the 1-rarefaction curve through s keeps the first invariant fixed
    let rho = 0.9 * s.rho();
    let u1 = g.rarefaction_curve(s.rho(), s.u1, rho)?;
    let a = g.riemann_invariant(s.rho(), s.u1, Family::First)?;
    let b = g.riemann_invariant(rho, u1, Family::First)?;
    println!("first invariant {a:.12} -> {b:.12}");

    for w in [0.8, 1.0, 1.2] {
        let q = g.relative_quantity(Potential::InternalEnergy, 1.1, w)?;
        let p = g.relative_quantity(Potential::Pressure, 1.1, w)?;
        println!("Q(1.1|{w}) = {q:.3e}   p(1.1|{w}) = {p:.3e}");
    }
    Ok(())
}
