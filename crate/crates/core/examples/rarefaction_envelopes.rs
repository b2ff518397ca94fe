//! Smoothed rarefaction: derivative envelopes in time and the distance to
//! the inviscid fan.

use cwstab::gas::{GasModel, PlanarState};
use cwstab::rarefaction::{burgers_fan_gap, log_log_slope, rarefaction_envelopes, EnvelopeOptions, NormExponent, RarefactionWave};

fn main() -> cwstab::Result<()> {
    let g = GasModel::new(1.4, 1.0, 0.0)?;
    let middle = PlanarState::new(1.1, 0.05)?;
    let w = RarefactionWave::ending_at(&g, middle, 0.05)?;
    println!("w- = {:.6}, wm = {:.6}, delta_R = {}", w.w_minus, w.w_m, w.delta_r);

    let ts = [1.0, 10.0, 100.0, 1000.0];
    let mut sup = Vec::new();
    println!("{:>8} {:>12} {:>12} {:>12}", "t", "Linf v_x", "L1 v_x", "fan gap");
    for t in ts {
        let inf = rarefaction_envelopes(&w, t, NormExponent::Infinity, EnvelopeOptions::default())?;
        let l1 = rarefaction_envelopes(&w, t, NormExponent::Finite(1.0), EnvelopeOptions::default())?;
        let gap = burgers_fan_gap(w.w_minus, w.w_m, t, 0.05)?;
        println!("{t:>8} {:>12.4e} {:>12.4e} {gap:>12.4e}", inf.v_x, l1.v_x);
        sup.push(inf.v_x);
    }
    println!("log-log slope of Linf over the last two decades: {:.3}", log_log_slope(&ts[1..], &sup[1..]));
    Ok(())
}
