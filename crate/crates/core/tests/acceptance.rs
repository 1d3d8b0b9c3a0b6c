//! The eight acceptance criteria, one test each. Every test prints its
//! criterion line with the worst margin; run with `--nocapture` to see them.

use fluidsym::acceptance::criterion;

fn run(id: u8) {
    let c = criterion(id);
    println!("{c}");
    assert!(c.pass, "{c}");
}

#[test]
fn criterion_1_poisson_table() {
    run(1);
}

#[test]
fn criterion_2_conservation_pattern() {
    run(2);
}

#[test]
fn criterion_3_lie_algebra() {
    run(3);
}

#[test]
fn criterion_4_matrix_realization() {
    run(4);
}

#[test]
fn criterion_5_projection_machinery() {
    run(5);
}

#[test]
fn criterion_6_energy_momentum_tensor() {
    run(6);
}

#[test]
fn criterion_7_schrodinger_sector() {
    run(7);
}

#[test]
fn criterion_8_interchange() {
    run(8);
}
