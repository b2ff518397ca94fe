//! Rankine-Hugoniot connection, the viscous 2-shock profile and its tails.

use cwstab::gas::{GasModel, PlanarState};
use cwstab::shock::{lax_conditions, rh_connect, rh_residuals, ShockProfile};

fn main() -> cwstab::Result<()> {
    let g = GasModel::new(1.4, 1.0, 0.0)?;
    let plus = PlanarState::new(1.2, 0.0)?;
    let data = rh_connect(&g, plus, 0.1)?;
    println!("sigma = {:.10}, sigma* = {:.10}", data.sigma, data.sigma_star);
    println!("v_m = {:.10}, u_m = {:.10}", data.minus_state.v, data.minus_state.u1);
    println!("RH residuals {:?}, Lax {:?}", rh_residuals(&g, &data), lax_conditions(&g, &data));

    let profile = ShockProfile::build(&g, data)?;
    let (left, right) = profile.tail_rate_fit()?;
    let (ll, lr) = profile.data.linear_tail_rates(&g);
    println!("tail rates: fitted {left:.5} / {right:.5}, linearized {ll:.5} / {lr:.5}");
    println!("monotone: {}", profile.is_monotone());

    for xi in [-40.0, -10.0, 0.0, 10.0, 40.0] {
        let s = profile.eval(xi);
        println!("xi = {xi:>6}: v = {:.8} u1 = {:.8} h1 = {:.8} v' = {:.3e}", s.v, s.u1, s.h1, s.v_x);
    }
    Ok(())
}
