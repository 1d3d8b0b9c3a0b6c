//! CSV tables, JSON reports and trajectory directories.
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! readers never see a partial file. Floats use the shortest representation
//! that round-trips, which keeps output bit-identical across runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::EvolveOptions;
use crate::error::{Error, Result};
use crate::grid::{Field1D, FieldMap2D, FieldPair, Grid1D, GridSpec};
use crate::potential::Potential;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Numeric table with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// One row per grid node: `x` followed by the given fields.
    pub fn from_fields(grid: &Grid1D, fields: &[(&str, &Field1D)]) -> Result<Self> {
        let mut table = Table::new(std::iter::once("x").chain(fields.iter().map(|(n, _)| *n)));
        for (j, x) in grid.coords().into_iter().enumerate() {
            table.push(std::iter::once(x).chain(fields.iter().map(|(_, f)| f.values()[j])).collect())?;
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
            .map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let mut table = Table { columns, rows: Vec::new() };
        for record in r.records() {
            let row = record?
                .iter()
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{v}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv()?.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv(&fs::read_to_string(path)?)
    }
}

/// Contents of `manifest.json` in a trajectory directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub grid: GridSpec,
    pub potential: Potential,
    pub dt: f64,
    pub stride: usize,
    pub times: Vec<f64>,
    /// Slice files relative to the directory, columns `x,R,Theta`.
    pub slices: Vec<String>,
}

pub const MANIFEST: &str = "manifest.json";

/// Store a trajectory as one CSV per slice plus a manifest.
pub fn save_trajectory(
    dir: &Path,
    traj: &FieldMap2D,
    pot: &Potential,
    opts: &EvolveOptions,
) -> Result<TrajectoryManifest> {
    fs::create_dir_all(dir)?;
    let mut slices = Vec::with_capacity(traj.len());
    for (i, s) in traj.slices().enumerate() {
        let name = format!("slice_{i:05}.csv");
        Table::from_fields(traj.grid(), &[("R", &s.r), ("Theta", &s.theta)])?.write(&dir.join(&name))?;
        slices.push(name);
    }
    let manifest = TrajectoryManifest {
        grid: traj.grid().spec(),
        potential: *pot,
        dt: opts.dt,
        stride: opts.stride,
        times: traj.times().to_vec(),
        slices,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

pub fn load_trajectory(dir: &Path) -> Result<(TrajectoryManifest, FieldMap2D)> {
    let manifest: TrajectoryManifest = read_json(&dir.join(MANIFEST))?;
    if manifest.times.len() != manifest.slices.len() {
        return Err(Error::Parse("manifest lists a different number of times and slices".into()));
    }
    let grid = Grid1D::from_spec(manifest.grid)?;
    let mut map = FieldMap2D::new(&grid);
    for (name, &t) in manifest.slices.iter().zip(&manifest.times) {
        let table = Table::read(&dir.join(name))?;
        let column = |c: &str| table.column(c).ok_or_else(|| Error::Parse(format!("{name}: missing column {c}")));
        let pair = FieldPair::new(Field1D::new(&grid, column("R")?)?, Field1D::new(&grid, column("Theta")?)?, t)?;
        map.push(&pair)?;
    }
    Ok((manifest, map))
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub pass: bool,
    pub criteria: Vec<crate::acceptance::Criterion>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        criteria: Vec<crate::acceptance::Criterion>,
        data: serde_json::Value,
    ) -> Self {
        let pass = criteria.iter().all(|c| c.pass);
        Report { command: command.into(), pass, criteria, data }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.json", self.command));
        write_json(&path, self)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, presets};

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![0.1, -1.0 / 3.0]).unwrap();
        t.push(vec![1e-300, std::f64::consts::PI]).unwrap();
        let back = Table::from_csv(&t.to_csv().unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(t.to_csv().unwrap().starts_with("a,b\n"));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = Table::new(["a"]);
        assert!(t.push(vec![1.0, 2.0]).is_err());
        assert!(Table::from_csv("a,b\n1,x\n").is_err());
    }

    #[test]
    fn trajectory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid1D::new(128, 20.0).unwrap();
        let s = presets::standard(&grid).unwrap();
        let opts = EvolveOptions::new(0.05, 0.2).stride(2);
        let traj = evolve(&s, &Potential::Free, &opts).unwrap();
        let saved = save_trajectory(dir.path(), &traj, &Potential::Free, &opts).unwrap();
        let (manifest, back) = load_trajectory(dir.path()).unwrap();
        assert_eq!(manifest, saved);
        assert_eq!(back, traj);
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.txt");
        write_atomic(&path, b"first version").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
