use fluidsym::charges::{conservation_report, Generator};
use fluidsym::grid::Grid1D;
use fluidsym::schrodinger::*;

fn grid() -> Grid1D {
    Grid1D::new(256, 40.0).unwrap()
}

fn run(nl: Nonlinearity, dt: f64) -> WaveTrajectory {
    let psi0 = datum(&grid(), 1.0).unwrap();
    evolve_nls(&psi0, nl, &NlsOptions::new(dt, 1.0).stride((1e-2 / dt).round() as usize)).unwrap()
}

#[test]
fn madelung_fields_obey_the_fluid_equations() {
    for nl in [Nonlinearity::Linear, Nonlinearity::Quintic { c: 0.05 }] {
        let res = effective_potential_check(&run(nl, 1e-3), nl).unwrap();
        assert!(res.times.len() >= 90);
        assert!(res.max_continuity < 1e-6, "{nl:?}: {}", res.max_continuity);
        assert!(res.max_phase < 1e-6, "{nl:?}: {}", res.max_phase);
    }
}

#[test]
fn wrong_potential_is_detected() {
    let res = effective_potential_check(&run(Nonlinearity::Quintic { c: 0.05 }, 1e-3), Nonlinearity::Linear).unwrap();
    assert!(res.max_phase > 1e-2, "{}", res.max_phase);
}

#[test]
fn quintic_energy_drift_is_second_order() {
    let nl = Nonlinearity::Quintic { c: 0.05 };
    let drift = |dt| {
        let rep = conservation_report(&run(nl, dt).hydro().unwrap(), &nl.potential()).unwrap();
        rep.drift(Generator::H)
    };
    let (coarse, fine) = (drift(2e-3), drift(1e-3));
    let order = (coarse / fine).log2();
    assert!((1.7..2.3).contains(&order), "{coarse} -> {fine}: order {order}");
}

#[test]
fn only_the_schrodinger_charges_survive() {
    let nl = Nonlinearity::Linear;
    let rep = conservation_report(&run(nl, 1e-3).hydro().unwrap(), &nl.potential()).unwrap();
    for g in [Generator::H, Generator::P, Generator::B, Generator::N, Generator::Delta, Generator::K] {
        assert!(rep.drift(g) < 1e-6, "{g}: {}", rep.drift(g));
    }
    for g in [Generator::G, Generator::D, Generator::C1, Generator::C2] {
        assert!(rep.drift(g) > 1e-3, "{g}: {}", rep.drift(g));
    }
}

#[test]
fn slices_need_uniform_spacing() {
    let psi0 = datum(&grid(), 1.0).unwrap();
    let traj = evolve_nls(&psi0, Nonlinearity::Linear, &NlsOptions::new(1e-2, 0.03)).unwrap();
    assert!(effective_potential_check(&traj, Nonlinearity::Linear).is_err());
}
