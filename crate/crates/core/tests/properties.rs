use fluidsym::charges::{charge, functional_gradient, Generator};
use fluidsym::conformal::{embed, expm, form5, generator_matrix, Mat5};
use fluidsym::dynamics::presets;
use fluidsym::grid::{Field1D, FieldPair, Grid1D};
use fluidsym::poisson::verify_table;
use fluidsym::potential::Potential;
use proptest::prelude::*;

fn grid() -> Grid1D {
    Grid1D::new(256, 20.0).unwrap()
}

/// Smooth periodic function from a few low Fourier modes.
fn trig(grid: &Grid1D, coeffs: &[(f64, f64)]) -> Field1D {
    let k0 = 2.0 * std::f64::consts::PI / grid.length();
    Field1D::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(m, (a, b))| a * (k0 * (m + 1) as f64 * x).cos() + b * (k0 * (m + 1) as f64 * x).sin())
            .sum()
    })
    .unwrap()
}

fn modes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..8)
}

fn bump(grid: &Grid1D, amp: f64, centre: f64) -> Field1D {
    Field1D::from_fn(grid, |x| amp * (-(x - centre).powi(2)).exp()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn derivative_is_linear(f in modes(), g in modes(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let grid = grid();
        let (f, g) = (trig(&grid, &f), trig(&grid, &g));
        let combo = f.zip_with(&g, |u, v| a * u + b * v).unwrap();
        let lhs = combo.derivative(1).unwrap();
        let rhs = f.derivative(1).unwrap().zip_with(&g.derivative(1).unwrap(), |u, v| a * u + b * v).unwrap();
        let gap = lhs.zip_with(&rhs, |u, v| u - v).unwrap().max_abs();
        prop_assert!(gap < 1e-11, "gap {gap}");
    }

    #[test]
    fn derivative_integrates_to_zero(f in modes(), order in 1u32..3) {
        let grid = grid();
        let d = trig(&grid, &f).derivative(order).unwrap();
        prop_assert!(d.integrate().abs() < 1e-11);
    }

    #[test]
    fn gradient_matches_directional_derivative(
        seed in 0u64..1000,
        gen in 0usize..10,
        amp in -0.5..0.5f64,
        centre in -2.0..2.0f64,
    ) {
        let grid = grid();
        let g = Generator::from_index(gen).unwrap();
        let state = presets::random_compact(&grid, seed, 0.2).unwrap();
        let d_r = state.r.zip_with(&bump(&grid, amp, centre), |r, b| r * b).unwrap();
        let d_theta = bump(&grid, 1.0 - amp, -centre);
        let shifted = |eps: f64| {
            FieldPair::new(
                state.r.zip_with(&d_r, |u, v| u + eps * v).unwrap(),
                state.theta.zip_with(&d_theta, |u, v| u + eps * v).unwrap(),
                state.t,
            )
            .unwrap()
        };
        let eps = 1e-4;
        let q = |e: f64| charge(g, &shifted(e), &Potential::Free).unwrap();
        let numeric = (q(eps) - q(-eps)) / (2.0 * eps);
        let grad = functional_gradient(g, &state, &Potential::Free).unwrap();
        let analytic = grad.d_r.zip_with(&d_r, |u, v| u * v).unwrap().integrate()
            + grad.d_theta.zip_with(&d_theta, |u, v| u * v).unwrap().integrate();
        prop_assert!(
            (numeric - analytic).abs() < 1e-6 * analytic.abs().max(1.0),
            "{}: {numeric} vs {analytic}", g.name()
        );
    }

    #[test]
    fn conformal_group_preserves_the_quadric(
        coeffs in prop::collection::vec(-0.3..0.3f64, 10),
        y in prop::array::uniform3(-2.0..2.0f64),
    ) {
        let z = Generator::ALL
            .iter()
            .zip(&coeffs)
            .fold(Mat5::zero(), |acc, (&g, &c)| {
                let m = generator_matrix(g).scale(c);
                let mut out = acc;
                for i in 0..5 {
                    for j in 0..5 {
                        out.0[i][j] += m.0[i][j];
                    }
                }
                out
            });
        let m = expm(&z);
        let p = m.apply(&embed(&y));
        let scale = p.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        prop_assert!(form5(&p).abs() < 1e-11 * scale * scale);
        prop_assert!(m.group_defect() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn brackets_are_antisymmetric(seed in 0u64..10_000, t in 0.0..1.0f64) {
        let grid = presets::standard_grid();
        let state = presets::random_compact(&grid, seed, t).unwrap();
        let rep = verify_table(&state, &Potential::Free).unwrap();
        prop_assert!(rep.max_antisymmetry < 1e-10);
        prop_assert!(rep.max_residual < 1e-7);
    }
}
