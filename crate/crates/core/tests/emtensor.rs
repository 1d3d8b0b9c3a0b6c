use fluidsym::charges::{charge, energy_density, momentum_density, Generator};
use fluidsym::dynamics::{evolve, presets, EvolveOptions};
use fluidsym::emtensor::*;
use fluidsym::grid::{FieldMap2D, FieldPair, Grid1D};
use fluidsym::potential::Potential;
use fluidsym::schrodinger::{datum, evolve_nls, NlsOptions, Nonlinearity, WaveField};
use fluidsym::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn standard() -> FieldPair {
    presets::standard(&presets::standard_grid()).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

#[test]
fn free_components_are_the_charge_densities() {
    let s = standard();
    let q = tensor_q(&s, &Potential::Free).unwrap();
    let h = energy_density(&s, &Potential::Free).unwrap();
    let p = momentum_density(&s).unwrap();
    assert!(max_diff(q.tt.values(), h.values()) < 1e-12);
    assert!(max_diff(q.tx.values(), p.values()) < 1e-12);
}

#[test]
fn cubic_trace_identity_holds_on_any_state() {
    let s = presets::random_compact(&presets::standard_grid(), 7, 0.0).unwrap();
    let shifted = FieldPair::new(s.r.map(|r| r + 0.1).unwrap(), s.theta.clone(), 0.0).unwrap();
    let res = trace_check(&shifted, &Potential::conformal(0.7).unwrap()).unwrap();
    assert!(res.max_abs() < 1e-13, "{}", res.max_abs());
    let res = trace_check(&shifted, &Potential::power_law(0.7, 2.0).unwrap()).unwrap();
    assert!(res.max_abs() > 1e-2);
}

#[test]
fn extended_tensor_relates_to_the_ordinary_one() {
    for pot in [Potential::Free, Potential::conformal(0.01).unwrap()] {
        let r = relation_check(&standard(), &pot).unwrap();
        assert!(r.max() < 1e-10, "{pot:?}: {r:?}");
    }
}

#[test]
fn extended_trace_vanishes_only_for_the_conformal_potential() {
    let s = standard();
    let cubic = tensor_m(&s, &Potential::conformal(0.01).unwrap()).unwrap();
    assert!(cubic.trace().unwrap().max_abs() < 1e-10);
    let lifted = FieldPair::new(s.r.map(|r| r + 0.5).unwrap(), s.theta.clone(), 0.0).unwrap();
    let membrane = tensor_m(&lifted, &Potential::membrane(1.0).unwrap()).unwrap();
    assert!(membrane.trace().unwrap().max_abs() > 1.0);
}

#[test]
fn currents_reproduce_every_free_charge() {
    let s = standard();
    for g in Generator::ALL {
        let q = current(g, &s, &Potential::Free).unwrap().value;
        let direct = charge(g, &s, &Potential::Free).unwrap();
        assert!((q - direct).abs() < 1e-8, "{g}: {q} vs {direct}");
    }
}

#[test]
fn particle_number_current_is_the_density() {
    let s = standard();
    let c = current(Generator::N, &s, &Potential::Free).unwrap();
    assert!(max_diff(c.density.values(), s.r.values()) < 1e-14);
    assert!((c.value - s.r.integrate()).abs() < 1e-10);
}

#[test]
fn c1_density_matches_the_free_tensor_form() {
    let s = standard();
    let q = tensor_q(&s, &Potential::Free).unwrap();
    let x = s.grid().windowed_coords();
    let (th, r) = (s.theta.values(), s.r.values());
    let expected: Vec<f64> = (0..x.len())
        .map(|j| 0.5 * x[j] * x[j] * q.tt.values()[j] - x[j] * th[j] * q.tx.values()[j] + th[j] * th[j] * r[j])
        .collect();
    let c = current(Generator::C1, &s, &Potential::Free).unwrap();
    assert!(max_diff(c.density.values(), &expected) < 1e-12);
}

#[test]
fn continuity_converges_on_free_runs() {
    let s = standard();
    let residual = |dt| {
        let traj = evolve(&s, &Potential::Free, &EvolveOptions::new(dt, 0.5)).unwrap();
        continuity_residual(&traj, &Potential::Free).unwrap().max
    };
    let (coarse, fine) = (residual(4e-2), residual(2e-2));
    assert!(fine < 1e-6);
    assert!(coarse / fine >= 8.0, "{coarse} -> {fine}");
}

#[test]
fn uniform_rest_state_is_exactly_conserved() {
    let grid = Grid1D::new(64, 10.0).unwrap();
    let s = FieldPair::from_fns(&grid, |_| 1.2, |_| 0.0, 0.0).unwrap();
    let pot = Potential::conformal(0.5).unwrap();
    let traj = evolve(&s, &pot, &EvolveOptions::new(1e-2, 0.1)).unwrap();
    assert!(continuity_residual(&traj, &pot).unwrap().max < 1e-10);
    assert!(fluid_continuity(&traj, &pot).unwrap().max() < 1e-10);
}

#[test]
fn pasted_random_slices_are_flagged() {
    let grid = Grid1D::new(64, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let slices: Vec<FieldPair> = (0..6)
        .map(|i| {
            let (a, b): (f64, f64) = (rng.gen_range(0.5..1.5), rng.gen_range(-1.0..1.0));
            FieldPair::from_fns(&grid, |x| 1.0 + 0.5 * a * (x * 0.6).cos(), |x| b * (x * 1.2).sin(), 0.1 * i as f64)
                .unwrap()
        })
        .collect();
    let traj = FieldMap2D::from_slices(&slices).unwrap();
    assert!(continuity_residual(&traj, &Potential::Free).unwrap().max > 0.1);
}

#[test]
fn too_few_slices_are_rejected() {
    let s = standard();
    let traj = evolve(&s, &Potential::Free, &EvolveOptions::new(1e-2, 0.02)).unwrap();
    assert!(matches!(continuity_residual(&traj, &Potential::Free), Err(Error::InsufficientResolution(_))));
}

#[test]
fn fluid_tensor_is_conserved_on_extended_space() {
    let traj = evolve(&standard(), &Potential::Free, &EvolveOptions::new(2e-2, 0.5)).unwrap();
    assert!(fluid_continuity(&traj, &Potential::Free).unwrap().max() < 1e-6);
}

fn wave_grid() -> Grid1D {
    Grid1D::new(256, 40.0).unwrap()
}

#[test]
fn plane_wave_tensor_is_constant_and_conserved() {
    let psi = WaveField::plane_wave(&wave_grid(), 3, 0.0).unwrap();
    let m = tensor_schrodinger(&psi, true).unwrap();
    for f in [&m.xx, &m.xt, &m.xs, &m.tt, &m.ts, &m.ss] {
        let v = f.values();
        assert!(max_diff(v, &vec![v[0]; v.len()]) < 1e-10);
    }
    let traj = evolve_nls(&psi, Nonlinearity::Linear, &NlsOptions::new(1e-2, 0.1)).unwrap();
    assert!(schrodinger_continuity(&traj, true).unwrap().max() < 1e-10);
}

#[test]
fn schrodinger_tensor_conservation_converges() {
    let psi0 = datum(&wave_grid(), 1.0).unwrap();
    let residual = |h| {
        let traj = evolve_nls(&psi0, Nonlinearity::Linear, &NlsOptions::new(h, 0.5)).unwrap();
        schrodinger_continuity(&traj, true).unwrap().max()
    };
    let (coarse, fine) = (residual(4e-2), residual(2e-2));
    assert!(coarse / fine > 10.0, "{coarse} -> {fine}");
    assert!(fine < 1e-5);
}

#[test]
fn hessian_term_is_required_for_conservation() {
    let psi0 = datum(&wave_grid(), 1.0).unwrap();
    let traj = evolve_nls(&psi0, Nonlinearity::Linear, &NlsOptions::new(2e-2, 0.5)).unwrap();
    assert!(schrodinger_continuity(&traj, false).unwrap().max() > 0.1);
}

#[test]
fn schrodinger_stress_is_the_quantum_stress() {
    let psi = datum(&wave_grid(), 1.0).unwrap();
    let m = tensor_schrodinger(&psi, true).unwrap();
    let (r, u) = psi.density_and_velocity().unwrap();
    let (rx, rxx) = (r.derivative(1).unwrap(), r.derivative(2).unwrap());
    let expected: Vec<f64> = (0..r.values().len())
        .map(|j| {
            let (r, rx, rxx, u) = (r.values()[j], rx.values()[j], rxx.values()[j], u.values()[j]);
            r * u * u + 0.25 * rx * rx / r - 0.25 * rxx
        })
        .collect();
    assert!(max_diff(m.xx.values(), &expected) < 1e-12);
}
