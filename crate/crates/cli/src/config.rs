//! Run configuration, read from a TOML file and validated on load.

use std::path::{Path, PathBuf};

use fluidsym::bargmann::ExtendedMap;
use fluidsym::dynamics::{presets, EvolveOptions};
use fluidsym::grid::{FieldPair, Grid1D};
use fluidsym::potential::Potential;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = presets::standard_grid();
        GridConfig { n: g.n(), length: g.length() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "kebab-case")]
pub enum PotentialKind {
    Free,
    /// `cR^ω`.
    PowerLaw,
    /// `c/R`.
    Membrane,
    /// `cR³`.
    Conformal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub omega: Option<f64>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig { kind: PotentialKind::Free, c: 0.0, omega: None }
    }
}

impl PotentialConfig {
    pub fn build(&self) -> Result<Potential, CliError> {
        let pot = match self.kind {
            PotentialKind::Free => Ok(Potential::Free),
            PotentialKind::PowerLaw => {
                let omega = self.omega.ok_or_else(|| CliError::Config("power_law needs `omega`".into()))?;
                Potential::power_law(self.c, omega)
            }
            PotentialKind::Membrane => Potential::membrane(self.c),
            PotentialKind::Conformal => Potential::conformal(self.c),
        };
        pot.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "kebab-case")]
pub enum Preset {
    /// Gaussian density on a small pedestal with a shifted phase bump.
    Standard,
    /// The same without the pedestal.
    StandardCompact,
    /// Gaussian on a uniform background.
    Membrane,
    /// Seeded random compact bumps.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub preset: Preset,
    #[serde(default = "default_background")]
    pub background: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_background() -> f64 {
    0.15
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig { preset: Preset::Standard, background: default_background(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { dt: 1e-3, t_final: 1.0, stride: 10 }
    }
}

/// A transformation applied to the evolved trajectory at time `t` on a
/// query grid of `n` nodes spanning `[−half_width, half_width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformRequest {
    pub name: String,
    #[serde(default)]
    pub parameter: f64,
    #[serde(default = "half")]
    pub t: f64,
    #[serde(default = "query_n")]
    pub n: usize,
    #[serde(default = "two")]
    pub half_width: f64,
}

fn half() -> f64 {
    0.5
}

fn query_n() -> usize {
    64
}

fn two() -> f64 {
    2.0
}

impl TransformRequest {
    pub fn map(&self) -> Result<ExtendedMap, CliError> {
        ExtendedMap::from_name(&self.name, self.parameter).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default, rename = "transform")]
    pub transforms: Vec<TransformRequest>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check every field against the preconditions of the routines it feeds.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.grid()?;
        self.potential.build()?;
        let i = &self.integrator;
        if !(i.dt > 0.0 && i.dt.is_finite()) {
            return bad(format!("integrator.dt = {} must be positive", i.dt));
        }
        if !(i.t_final >= 0.0 && i.t_final.is_finite()) {
            return bad(format!("integrator.t_final = {} must be non-negative", i.t_final));
        }
        if i.stride == 0 {
            return bad("integrator.stride must be at least 1".into());
        }
        if !(self.initial.background > 0.0 && self.initial.background.is_finite()) {
            return bad(format!("initial.background = {} must be positive", self.initial.background));
        }
        for t in &self.transforms {
            t.map()?;
            if !(t.parameter.is_finite() && t.t.is_finite()) {
                return bad(format!("transform `{}`: non-finite parameter or time", t.name));
            }
            Grid1D::new(t.n, 2.0 * t.half_width)
                .map_err(|e| CliError::Config(format!("transform `{}`: {e}", t.name)))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid1D, CliError> {
        Grid1D::new(self.grid.n, self.grid.length).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn initial_state(&self) -> Result<FieldPair, CliError> {
        let g = self.grid()?;
        let s = match self.initial.preset {
            Preset::Standard => presets::standard(&g),
            Preset::StandardCompact => presets::standard_compact(&g, 0.0),
            Preset::Membrane => presets::membrane(&g, self.initial.background),
            Preset::Random => presets::random_compact(&g, self.initial.seed, 0.0),
        };
        Ok(s?)
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions::new(self.integrator.dt, self.integrator.t_final).stride(self.integrator.stride)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn full_file_parses() {
        let cfg: RunConfig = toml::from_str(
            r#"
            output = "out"
            [grid]
            n = 256
            L = 20.0
            [potential]
            kind = "power_law"
            c = 0.01
            omega = 3.0
            [initial]
            preset = "random"
            seed = 4
            [integrator]
            dt = 0.01
            t_final = 0.5
            stride = 5
            [[transform]]
            name = "antiboost"
            parameter = 0.2
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.potential.build().unwrap(), Potential::PowerLaw { c: 0.01, omega: 3.0 });
        assert_eq!(cfg.transforms[0].map().unwrap(), ExtendedMap::Antiboost(0.2));
    }

    #[test]
    fn invalid_values_are_rejected() {
        for text in [
            "[grid]\nn = 100\nL = 10.0",
            "[integrator]\ndt = -1.0\nt_final = 1.0",
            "[potential]\nkind = \"power_law\"\nc = 1.0",
            "[[transform]]\nname = \"warp\"",
        ] {
            let cfg: RunConfig = toml::from_str(text).unwrap();
            assert!(cfg.validate().is_err(), "{text}");
        }
        assert!(toml::from_str::<RunConfig>("[grid]\nsize = 3").is_err());
    }
}
