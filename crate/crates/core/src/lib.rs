//! Charges, brackets and hidden symmetry of a 1+1 dimensional isentropic fluid.
//!
//! The state is a density `R` and a velocity potential `Θ` on a periodic grid.
//! Modules, roughly in dependency order:
//!
//! - [`grid`], [`potential`] and [`dynamics`]: fields, internal energies and
//!   spectral RK4 evolution
//! - [`charges`] and [`poisson`]: the ten charge functionals and their brackets
//! - [`poly`] and [`liealg`]: exact vector fields on extended space `(x, t, s)`
//! - [`conformal`]: the 5×5 matrix realization of `O(3,2)`
//! - [`bargmann`]: projection of extended-space maps to field-dependent
//!   transformations
//! - [`emtensor`] and [`schrodinger`]: energy-momentum tensors and the
//!   nonlinear Schrödinger form of the fluid
//! - [`acceptance`] and [`io`]: the verification criteria and file output
//!
//! ```
//! use fluidsym::charges::{all_charges, Generator};
//! use fluidsym::dynamics::presets;
//! use fluidsym::poisson::{bracket, table_rhs};
//! use fluidsym::potential::Potential;
//!
//! # fn main() -> fluidsym::Result<()> {
//! let grid = presets::standard_grid();
//! let state = presets::standard_compact(&grid, 0.0)?;
//! let q = all_charges(&state, &Potential::Free)?;
//! let lhs = bracket(Generator::P, Generator::B, &state, &Potential::Free)?;
//! let rhs = table_rhs(Generator::P, Generator::B).evaluate(&q);
//! assert!((lhs - rhs).abs() < 1e-9);
//! # Ok(())
//! # }
//! ```

pub mod acceptance;
pub mod bargmann;
pub mod charges;
pub mod conformal;
pub mod dynamics;
pub mod emtensor;
pub mod error;
pub mod grid;
pub mod io;
pub mod liealg;
pub mod poisson;
pub mod poly;
pub mod potential;
pub mod schrodinger;

pub use error::{Error, Result};
