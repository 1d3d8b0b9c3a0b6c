use fluidsym::charges::{conservation_report, ConservationReport, Generator};
use fluidsym::dynamics::{evolve, presets, EvolveOptions};
use fluidsym::potential::Potential;
use fluidsym::Error;
use Generator::*;

fn report(pot: &Potential, membrane: bool, dt: f64) -> ConservationReport {
    let g = presets::standard_grid();
    let s = if membrane { presets::membrane(&g, 0.15).unwrap() } else { presets::standard(&g).unwrap() };
    conservation_report(&evolve(&s, pot, &EvolveOptions::new(dt, 1.0)).unwrap(), pot).unwrap()
}

fn assert_pattern(pot: Potential, membrane: bool, kept: &[Generator]) {
    let rep = report(&pot, membrane, 1e-3);
    for g in Generator::ALL {
        if kept.contains(&g) {
            assert!(rep.drift(g) < 1e-6, "{g}: {}", rep.drift(g));
        } else {
            assert!(rep.drift(g) > 1e-3, "{g} should drift: {}", rep.drift(g));
        }
    }
    let (coarse, fine) = (report(&pot, membrane, 4e-2), report(&pot, membrane, 2e-2));
    for &g in kept {
        if coarse.drift(g) > 1e-12 {
            assert!(coarse.drift(g) / fine.drift(g) >= 8.0, "{g}: {} -> {}", coarse.drift(g), fine.drift(g));
        }
    }
}

#[test]
fn free_run_conserves_all_ten() {
    assert_pattern(Potential::Free, false, &Generator::ALL);
}

#[test]
fn membrane_keeps_the_poincare_charges() {
    assert_pattern(Potential::membrane(0.01).unwrap(), true, &[H, P, B, N, G, D]);
}

#[test]
fn cubic_potential_keeps_the_schrodinger_charges() {
    assert_pattern(Potential::conformal(0.01).unwrap(), false, &[H, P, B, N, Delta, K]);
}

#[test]
fn strong_cubic_potential_breaks_down() {
    // c = 1 steepens the standard datum into a front before t = 1.
    let g = presets::standard_grid();
    let s = presets::standard(&g).unwrap();
    let err = evolve(&s, &Potential::conformal(1.0).unwrap(), &EvolveOptions::new(1e-3, 1.0)).unwrap_err();
    assert!(matches!(err, Error::Caustic { .. } | Error::DensityFloor { .. }), "{err:?}");
}
