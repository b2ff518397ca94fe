//! Randomized checks of the functional inequalities used by the energy
//! method, plus the pointwise relative-quantity bounds.

use cwstab::diagnostics::{verify_gagliardo_nirenberg, verify_weighted_poincare, weighted_poincare_sides, PoincareQuadrature};
use cwstab::gas::{fit_inverse_pressure, inverse_pressure_margin, inverse_pressure_samples, GasModel, RelativeSamples};
use cwstab::solver::grid::SlabGrid;

fn main() -> cwstab::Result<()> {
    let quad = PoincareQuadrature::default();
    let (l, r) = weighted_poincare_sides(&|y1, _, _| [y1, 1.0, 0.0, 0.0], quad)?;
    println!("Poincare with f = y1: {l:.10} vs {r:.10} (1/12 = {:.10})", 1.0 / 12.0);
    println!("Poincare worst margin over 100 trials: {:.3e}", verify_weighted_poincare(100, 7, quad)?);

    let planar = SlabGrid::new(-20.0, 20.0, 800, 1, 1)?;
    let general = SlabGrid::new(-20.0, 20.0, 160, 12, 12)?;
    let gn = verify_gagliardo_nirenberg(&planar, &general, 60, 7);
    println!("Gagliardo-Nirenberg: planar margin {:.3e}, fitted C {:.4}", gn.planar_margin, gn.fitted_c);

    let g = GasModel::new(1.4, 1.0, 0.0)?;
    let samples = RelativeSamples::generate(&g, 1.1, 0.15, 5000, 7);
    let c = samples.fit(&g);
    println!("relative bounds fitted on {} samples: {c:?}", samples.len());
    let held_out = RelativeSamples::generate(&g, 1.1, 0.15, 5000, 8);
    println!("worst margin on the fitting samples {:.3e}, on held-out samples {:.3e}", samples.margins(&g, &c).worst(), held_out.margins(&g, &c).worst());

    let inv = inverse_pressure_samples(&g, 1.1, 0.1, 5000, 7);
    let c = fit_inverse_pressure(&g, 1.1, &inv);
    println!("inverse pressure constant {c:.4}, margin {:.3e}, margin at C = 0 {:.3e}", inverse_pressure_margin(&g, 1.1, &inv, c), inverse_pressure_margin(&g, 1.1, &inv, 0.0));
    Ok(())
}
