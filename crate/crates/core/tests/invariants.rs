use cwstab::composite::CompositeWave;
use cwstab::diagnostics::Snapshot;
use cwstab::gas::{Family, GasModel, PlanarState, Potential};
use cwstab::rarefaction::smooth_burgers;
use cwstab::shock::{lax_conditions, rh_connect, rh_residuals, ShockProfile};
use cwstab::shift::ShiftState;
use cwstab::solver::checkpoint::Checkpoint;
use cwstab::solver::grid::{FlowState, SlabGrid};
use cwstab::solver::{init_state, PerturbationMode, PerturbationSpec, Solver, StepControl};
use cwstab::verdict::Verdict;
use proptest::prelude::*;

fn gas(gamma: f64) -> GasModel {
    GasModel::new(gamma, 1.0, 0.0).unwrap()
}

fn wave(delta_s: f64, delta_r: f64) -> CompositeWave {
    CompositeWave::from_strengths(&gas(1.4), PlanarState::new(1.2, 0.0).unwrap(), delta_s, delta_r, 40.0).unwrap()
}

fn flux(g: &GasModel, rho: f64, m: f64) -> [f64; 2] {
    [m, m * m / rho + g.p(1.0 / rho)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relative_quantities_are_nonnegative(gamma in 1.05f64..3.0, v in 0.3f64..3.0, w in 0.3f64..3.0) {
        let g = gas(gamma);
        for pot in [Potential::Pressure, Potential::InternalEnergy] {
            let r = g.relative_unchecked(pot, v, w);
            prop_assert!(r >= -1e-12, "{pot:?} {r}");
            if (v - w).abs() > 1e-3 {
                prop_assert!(r > 0.0);
            }
            prop_assert!(g.relative_unchecked(pot, w, w).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_match_flux_jacobian(gamma in 1.05f64..3.0, rho in 0.3f64..3.0, u in -2.0f64..2.0) {
        let g = gas(gamma);
        let (l1, l2) = g.eigenvalues(rho, u).unwrap();
        prop_assert!(l1 < l2);
        let m = rho * u;
        let h = 1e-5;
        let d = |dr: f64, dm: f64| {
            let a = flux(&g, rho + dr, m + dm);
            let b = flux(&g, rho - dr, m - dm);
            [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
        };
        let (c0, c1) = (d(h, 0.0), d(0.0, h));
        let (tr, det) = (c0[0] + c1[1], c0[0] * c1[1] - c1[0] * c0[1]);
        let disc = (tr * tr / 4.0 - det).sqrt();
        prop_assert!((tr / 2.0 - disc - l1).abs() < 1e-6);
        prop_assert!((tr / 2.0 + disc - l2).abs() < 1e-6);
    }

    #[test]
    fn first_invariant_is_constant_on_rarefaction_curve(gamma in 1.05f64..3.0, rho0 in 0.3f64..3.0, u0 in -1.0f64..1.0, f in 0.5f64..1.5) {
        let g = gas(gamma);
        let u = g.rarefaction_curve(rho0, u0, f * rho0).unwrap();
        let a = g.riemann_invariant(rho0, u0, Family::First).unwrap();
        let b = g.riemann_invariant(f * rho0, u, Family::First).unwrap();
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn smoothed_burgers_is_monotone_and_bounded(wl in -2.0f64..1.0, dw in 0.001f64..0.5, t in 0.0f64..500.0, x in -600.0f64..600.0) {
        let wr = wl + dw;
        let a = smooth_burgers(wl, wr, t, x).unwrap();
        let b = smooth_burgers(wl, wr, t, x + 0.5).unwrap();
        prop_assert!(a.w >= wl - 1e-12 && a.w <= wr + 1e-12);
        prop_assert!(b.w >= a.w - 1e-12);
        prop_assert!(a.w_x >= 0.0);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact(n1 in 1usize..20, n2 in 1usize..4, n3 in 1usize..4, seed in any::<u64>(), t in 0.0f64..1e3, x in -10.0f64..10.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = n1 * n2 * n3;
        let mut field = || (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect::<Vec<f64>>();
        let state = FlowState { rho: field(), mom: [field(), field(), field()], time: t };
        let chk = Checkpoint { dims: [n1 as u64, n2 as u64, n3 as u64], state, shift: x };
        let mut buf = Vec::new();
        chk.write_to(&mut buf).unwrap();
        prop_assert_eq!(buf.len(), 64 + 4 * 8 * n);
        let back = Checkpoint::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.shift.to_bits(), chk.shift.to_bits());
        prop_assert_eq!(back.state.time.to_bits(), chk.state.time.to_bits());
        prop_assert!(back.state.rho.iter().zip(&chk.state.rho).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(back, chk);
    }

    #[test]
    fn verdict_json_round_trip(name in "[a-z ]{1,20}", m in prop::num::f64::ANY, th in -1e6f64..1e6, pass in any::<bool>()) {
        let v = Verdict { criterion: name, measured: m, threshold: th, pass };
        let back: Vec<Verdict> = serde_json::from_str(&cwstab::verdict::to_json(std::slice::from_ref(&v))).unwrap();
        prop_assert_eq!(&back[0].criterion, &v.criterion);
        prop_assert_eq!(back[0].pass, v.pass);
        if m.is_finite() {
            prop_assert_eq!(back[0].measured, m);
        } else {
            prop_assert!(back[0].measured.is_nan());
        }
    }

    #[test]
    fn config_round_trips_through_toml(seed in 0u64..=i64::MAX as u64, ds in 0.01f64..0.2, amp in 1e-6f64..0.05) {
        let mut cfg = cwstab::expcli::RunConfig::default();
        cfg.perturbation.seed = seed;
        cfg.wave.delta_s = ds;
        cfg.perturbation.amplitude = amp;
        let back = cwstab::expcli::RunConfig::from_toml_str(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shock_connection_and_first_integral(v_plus in 0.8f64..1.6, u_plus in -0.5f64..0.5, delta_s in 0.02f64..0.2, xi in -200.0f64..200.0) {
        let g = gas(1.4);
        let d = rh_connect(&g, PlanarState::new(v_plus, u_plus).unwrap(), delta_s).unwrap();
        prop_assert!(rh_residuals(&g, &d).iter().all(|r| r.abs() < 1e-12));
        prop_assert_eq!(lax_conditions(&g, &d), [true, true, true]);
        let p = ShockProfile::build(&g, d).unwrap();
        prop_assert!(p.is_monotone());
        let s = p.eval(xi);
        let m = d.minus_state;
        prop_assert!((s.u1 - m.u1 + d.sigma_star * (s.v - m.v)).abs() < 1e-10);
        prop_assert!(s.v >= m.v - 1e-12 && s.v <= v_plus + 1e-12);
    }

    #[test]
    fn composite_is_transversally_invariant(delta_s in 0.02f64..0.2, delta_r in 0.0f64..0.1, t in 0.0f64..50.0, x1 in -100.0f64..200.0, x2 in 0.0f64..1.0, x3 in 0.0f64..1.0, shift in -1.0f64..1.0) {
        let cw = wave(delta_s, delta_r);
        let a = cw.eval(t, x1, shift).unwrap();
        let b = cw.eval_at(t, [x1, x2, x3], shift).unwrap();
        prop_assert_eq!(a.v.to_bits(), b.v.to_bits());
        prop_assert_eq!(a.u1.to_bits(), b.u1.to_bits());
        prop_assert_eq!(a.h1.to_bits(), b.h1.to_bits());
    }

    #[test]
    fn weight_is_increasing(delta_s in 0.02f64..0.2, x1 in -200.0f64..300.0, t in 0.0f64..50.0) {
        let cw = wave(delta_s, 0.05);
        let s = ShiftState::new(&cw);
        let (a, a_x) = s.weight(&cw, t, x1);
        prop_assert!(a_x > 0.0 || cw.shock_at(t, x1, 0.0).v_x == 0.0);
        prop_assert!((1.0..=1.0 + s.nu + 1e-12).contains(&a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn perturbation_of_the_composite_vanishes(delta_s in 0.02f64..0.2, delta_r in 0.0f64..0.1, t in 0.0f64..20.0) {
        let cw = wave(delta_s, delta_r);
        let grid = SlabGrid::new(-150.0, 250.0, 400, 1, 1).unwrap();
        let st = cw.sample_state(&grid, t, 0.0).unwrap();
        let p = cw.perturbation(&st, &grid, t, 0.0).unwrap();
        prop_assert!(p.phi.iter().chain(&p.psi[0]).all(|x| x.abs() < 1e-13));
        let rate = ShiftState::new(&cw).shift_rate(&cw, &st, &grid, t, 0.0).unwrap();
        prop_assert!(rate.abs() < 1e-14);
    }

    #[test]
    fn functionals_stay_nonnegative(amp in 1e-5f64..1e-2, seed in any::<u64>(), smooth in any::<bool>()) {
        let cw = wave(0.1, 0.05);
        let grid = SlabGrid::new(-150.0, 250.0, 800, 1, 1).unwrap();
        let mode = if smooth { PerturbationMode::RandomSmooth } else { PerturbationMode::PlanarBump };
        let (st, _) = init_state(&cw, &grid, &PerturbationSpec { amplitude: amp, mode, seed, ..Default::default() }).unwrap();
        let shift = ShiftState::new(&cw);
        let snap = Snapshot::new(&cw, &shift, &grid, &st, 0.0, 0.0).unwrap();
        prop_assert!(snap.relative_entropy() >= 0.0);
        prop_assert!(snap.good_terms().all_nonnegative());
    }

    #[test]
    fn short_runs_conserve_mass(amp in 1e-4f64..5e-3, seed in any::<u64>()) {
        let cw = wave(0.1, 0.05);
        let grid = SlabGrid::new(-150.0, 250.0, 400, 1, 1).unwrap();
        let spec = PerturbationSpec { amplitude: amp, mode: PerturbationMode::RandomSmooth, seed, ..Default::default() };
        let (st, _) = init_state(&cw, &grid, &spec).unwrap();
        let mass = st.total_mass(&grid);
        let mut s = Solver::new(cw, grid, st, StepControl::default()).unwrap();
        for _ in 0..50 {
            s.step(f64::INFINITY).unwrap();
            prop_assert!(s.state.rho.iter().all(|r| *r > 0.0));
        }
        prop_assert!(s.mass_delta().abs() <= 1e-10 * mass * s.time().max(1.0));
    }
}
