//! One function per subcommand. Each writes its files under the output
//! directory, prints a short summary and returns an error when a run fails
//! or a criterion is not met.

use std::path::{Path, PathBuf};

use fluidsym::acceptance::{criterion, run_all, Check, Criterion};
use fluidsym::bargmann::{interchange_transform, named_transform, project_transform, ExtendedMap};
use fluidsym::charges::{conservation_report, relative_drift, Generator};
use fluidsym::dynamics::{evolve, presets, EvolveOptions};
use fluidsym::emtensor::{continuity_residual, tensor_q};
use fluidsym::grid::{FieldMap2D, Grid1D};
use fluidsym::io::{save_trajectory, Report, Table};
use fluidsym::liealg::structure_table;
use fluidsym::poisson::verify_table;
use fluidsym::potential::Potential;
use fluidsym::schrodinger::{datum, effective_potential_check, evolve_nls, NlsOptions, Nonlinearity};
use serde_json::json;

use crate::config::{Preset, RunConfig};
use crate::{CliError, Command};

/// Drift bound for charges expected to be conserved.
const CONSERVED: f64 = 1e-6;

pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<(), CliError> {
    match command {
        Command::Simulate => simulate(cfg),
        Command::Charges => charges(cfg),
        Command::Brackets => brackets(cfg),
        Command::Algebra => algebra(cfg),
        Command::Conformal => conformal(cfg),
        Command::Transform => transform(cfg),
        Command::Emtensor => emtensor(cfg),
        Command::Schrodinger => schrodinger(cfg),
        Command::VerifyAll => verify_all(cfg),
    }
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"))
}

/// Charges expected to survive the potential.
pub fn expected_conserved(pot: &Potential) -> Vec<Generator> {
    use Generator::*;
    let keep = |f: fn(Generator) -> bool| Generator::ALL.into_iter().filter(|&g| f(g)).collect();
    match *pot {
        Potential::Free => Generator::ALL.to_vec(),
        Potential::PowerLaw { omega: -1.0, .. } => keep(Generator::survives_membrane),
        Potential::PowerLaw { omega: 3.0, .. } => keep(Generator::preserves_fiber),
        _ => vec![H, P, B, N],
    }
}

fn trajectory(cfg: &RunConfig) -> Result<(Potential, EvolveOptions, FieldMap2D), CliError> {
    let pot = cfg.potential.build()?;
    let opts = cfg.evolve_options();
    let traj = evolve(&cfg.initial_state()?, &pot, &opts)?;
    Ok((pot, opts, traj))
}

/// Print the criteria, write the report and fail when any criterion fails.
fn finish(dir: &Path, command: &str, criteria: Vec<Criterion>, data: serde_json::Value) -> Result<(), CliError> {
    for c in &criteria {
        println!("{c}");
    }
    let report = Report::new(command, criteria, data);
    let path = report.write(dir)?;
    println!("report: {}", path.display());
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<String> = report.criteria.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        Err(CliError::Failed(format!("criteria not met: {}", failed.join(", "))))
    }
}

fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg);
    let (pot, opts, traj) = trajectory(cfg)?;
    save_trajectory(&dir.join("trajectory"), &traj, &pot, &opts)?;
    let rep = conservation_report(&traj, &pot)?;
    drift_table(&rep.history)?.write(&dir.join("drift.csv"))?;
    println!("stored {} slices up to t = {}", traj.len(), traj.times().last().copied().unwrap_or(0.0));
    for row in &rep.rows {
        println!("{:>6}  drift {:.3e}", row.generator.name(), row.max_drift);
    }
    Ok(())
}

fn drift_table(history: &[(f64, [f64; 10])]) -> Result<Table, CliError> {
    let mut table =
        Table::new(std::iter::once("t".to_string()).chain(Generator::ALL.iter().map(|g| g.name().to_string())));
    let Some((_, first)) = history.first() else { return Ok(table) };
    for (t, q) in history {
        table.push(std::iter::once(*t).chain((0..10).map(|i| relative_drift(first[i], q[i]))).collect())?;
    }
    Ok(table)
}

fn charges(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg);
    let (pot, _, traj) = trajectory(cfg)?;
    let rep = conservation_report(&traj, &pot)?;
    let mut values =
        Table::new(std::iter::once("t".to_string()).chain(Generator::ALL.iter().map(|g| g.name().to_string())));
    for (t, q) in &rep.history {
        values.push(std::iter::once(*t).chain(q.iter().copied()).collect())?;
    }
    values.write(&dir.join("charges.csv"))?;
    drift_table(&rep.history)?.write(&dir.join("drift.csv"))?;
    let expected = expected_conserved(&pot);
    let checks = Generator::ALL
        .iter()
        .map(|&g| {
            let name = format!("{} drift", g.name());
            if expected.contains(&g) {
                Check::below(name, rep.drift(g), CONSERVED)
            } else {
                Check::above(name, rep.drift(g), CONSERVED)
            }
        })
        .collect();
    let data = json!({ "potential": pot, "expected_conserved": expected, "rows": rep.rows });
    finish(&dir, "charges", vec![Criterion::from_checks(2, Ok(checks))], data)
}

fn brackets(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg);
    let pot = cfg.potential.build()?;
    if !pot.is_free() {
        return Err(CliError::Config("the full bracket table needs the free potential".into()));
    }
    // The pedestal of the standard datum adds surface terms to every x-weighted bracket.
    let state = match cfg.initial.preset {
        Preset::Standard => presets::standard_compact(&cfg.grid()?, 0.0)?,
        _ => cfg.initial_state()?,
    };
    let rep = verify_table(&state, &pot)?;
    let checks = vec![
        Check::below("worst relative residual", rep.max_residual, 1e-7),
        Check::below("antisymmetry", rep.max_antisymmetry, 1e-10),
    ];
    println!("{} brackets, worst residual {:.3e}", rep.rows.len(), rep.max_residual);
    finish(&dir, "brackets", vec![Criterion::from_checks(1, Ok(checks))], json!({ "entries": rep.rows }))
}

fn algebra(cfg: &RunConfig) -> Result<(), CliError> {
    let table = structure_table()?;
    finish(&out_dir(cfg), "algebra", vec![criterion(3)], serde_json::to_value(&table).map_err(fluidsym::Error::from)?)
}

fn conformal(cfg: &RunConfig) -> Result<(), CliError> {
    finish(&out_dir(cfg), "conformal", vec![criterion(4)], serde_json::Value::Null)
}

fn transform(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.transforms.is_empty() {
        return Err(CliError::Config("no [[transform]] entries in the configuration".into()));
    }
    let dir = out_dir(cfg);
    let (_, _, traj) = trajectory(cfg)?;
    let mut summary = Vec::new();
    for (k, req) in cfg.transforms.iter().enumerate() {
        let query = Grid1D::new(req.n, 2.0 * req.half_width)?;
        let map = req.map()?;
        let (generic, named) = match map {
            ExtendedMap::Interchange => (interchange_transform(&traj, &query, req.t)?, None),
            _ => (project_transform(&map, &traj, &query, req.t)?, Some(named_transform(&map, &traj, &query, req.t)?)),
        };
        let table = Table::from_fields(
            &query,
            &[
                ("x_star", &generic.x_star),
                ("t_star", &generic.t_star),
                ("theta_star", &generic.theta_star),
                ("R_star", &generic.r_star),
                ("J_star", &generic.j_star),
            ],
        )?;
        let file = format!("transform_{k}_{}.csv", req.name);
        table.write(&dir.join(&file))?;
        let named_gap = named.map(|n| {
            let gap = |a: &fluidsym::grid::Field1D, b: &fluidsym::grid::Field1D| {
                a.values().iter().zip(b.values()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
            };
            gap(&n.theta_star, &generic.theta_star).max(gap(&n.r_star, &generic.r_star))
        });
        println!(
            "{}({}): section residual {:.3e}{}",
            req.name,
            req.parameter,
            generic.max_residual,
            named_gap.map(|g| format!(", closed form gap {g:.3e}")).unwrap_or_default()
        );
        summary.push(json!({
            "name": req.name,
            "parameter": req.parameter,
            "t": req.t,
            "file": file,
            "max_residual": generic.max_residual,
            "closed_form_gap": named_gap,
        }));
    }
    fluidsym::io::write_json(&dir.join("transform.json"), &summary)?;
    Ok(())
}

fn emtensor(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg);
    let pot = cfg.potential.build()?;
    let initial = cfg.initial_state()?;
    let q = tensor_q(&initial, &pot)?;
    Table::from_fields(initial.grid(), &[("T_tt", &q.tt), ("T_tx", &q.tx), ("T_xt", &q.xt), ("T_xx", &q.xx)])?
        .write(&dir.join("emtensor.csv"))?;
    let mut residuals = Table::new(["dt", "energy", "momentum", "max"]);
    let mut maxima = Vec::new();
    for k in 0..3 {
        let dt = cfg.integrator.dt / f64::from(1 << k);
        let traj = evolve(&initial, &pot, &EvolveOptions::new(dt, cfg.integrator.t_final))?;
        let r = continuity_residual(&traj, &pot)?;
        let worst = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        residuals.push(vec![dt, worst(&r.energy), worst(&r.momentum), r.max])?;
        println!("dt = {dt:.3e}: continuity residual {:.3e}", r.max);
        maxima.push(r.max);
    }
    residuals.write(&dir.join("emtensor_residual.csv"))?;
    let checks = vec![Check::below("continuity residual at the finest step", maxima[2], 1e-6)];
    finish(&dir, "emtensor", vec![Criterion::from_checks(6, Ok(checks))], json!({ "residuals": maxima }))
}

fn schrodinger(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg);
    let nonlinearity = match cfg.potential.build()? {
        Potential::Free => Nonlinearity::Linear,
        Potential::PowerLaw { c, omega: 3.0 } => Nonlinearity::Quintic { c },
        other => {
            return Err(CliError::Config(format!("no Schrödinger form for {other:?}; use free or conformal")));
        }
    };
    let psi = datum(&cfg.grid()?, 1.0)?;
    let opts = NlsOptions::new(cfg.integrator.dt, cfg.integrator.t_final).stride(cfg.integrator.stride);
    let run = evolve_nls(&psi, nonlinearity, &opts)?;
    let m = effective_potential_check(&run, nonlinearity)?;
    let mut table = Table::new(["t", "continuity", "phase"]);
    for i in 0..m.times.len() {
        table.push(vec![m.times[i], m.continuity[i], m.phase[i]])?;
    }
    table.write(&dir.join("madelung.csv"))?;
    println!("Madelung residual: continuity {:.3e}, phase {:.3e}", m.max_continuity, m.max_phase);
    finish(&dir, "schrodinger", vec![criterion(7)], serde_json::to_value(&m).map_err(fluidsym::Error::from)?)
}

fn verify_all(cfg: &RunConfig) -> Result<(), CliError> {
    finish(&out_dir(cfg), "verify-all", run_all(), serde_json::Value::Null)
}
