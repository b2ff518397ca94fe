//! Layer a TOML fragment over the defaults, validate it and run the cheap
//! profile and rarefaction checks.

use cwstab::expcli::commands::{cmd_profile, cmd_rarefaction};
use cwstab::expcli::RunConfig;
use cwstab::verdict::{all_pass, to_json};

fn main() -> cwstab::Result<()> {
    let cfg = RunConfig::from_toml_str("[wave]\ndelta_s = 0.08\n[perturbation]\nseed = 3\n")?;
    println!("delta_s {}, delta_r {}, n1 {}", cfg.wave.delta_s, cfg.wave.delta_r, cfg.grid.n1);

    match RunConfig::from_toml_str("[wave]\ndelta_s = 0.5\n").and_then(|c| c.validate_wave()) {
        Ok(()) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    match RunConfig::from_toml_str("[grid]\ncells = 3\n") {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }

    let mut vs = cmd_profile(&cfg, None)?;
    vs.extend(cmd_rarefaction(&cfg, None)?);
    println!("{}", to_json(&vs));
    println!("all pass: {}", all_pass(&vs));
    Ok(())
}
