//! Order-2 quantum Wasserstein distance between ground states of the transverse-field
//! Ising chain `H = -J sum sx_j sx_{j+1} - h sum sz_j` (`g = h / J`), and its critical scaling.
//!
//! The pipeline, bottom-up:
//!
//! - [`quadrature`]: kernel integrals `L(n)`, `G(m)` on `[0, pi]`.
//! - [`toeplitz`]: leading principal minors (Levinson chain, pivoted elimination fallback).
//! - [`tfim`]: correlators `C(n) = <sx_0 sx_n>`, magnetization, `<Mx>` and `<Mx^2>` on a ring.
//! - [`wasserstein`]: pure-state distance `D^2` and the self-distance / quantum Fisher information.
//! - [`scaling`]: sweeps and log-log exponent fits.
//! - [`store`]: on-disk correlator cache.
//! - [`ed`]: brute-force exact diagonalization, the independent oracle for small rings.
//!
//! The numerical kernels are generic over [`Real`] (`f32`, `f64`); the aliases below fix
//! the double-precision instantiation used by sweeps, the cache and the CLI.

pub mod ed;
pub mod error;
pub mod quadrature;
pub mod real;
pub mod scaling;
pub mod store;
pub mod tfim;
pub mod toeplitz;
pub mod wasserstein;

pub use error::{Error, Result};
pub use real::Real;

pub type QuadratureConfig = quadrature::QuadratureConfig<f64>;
pub type CorrelatorTable = tfim::CorrelatorTable<f64>;
pub type GroundStateObservables = tfim::GroundStateObservables<f64>;
pub type DistanceResult = wasserstein::DistanceResult<f64>;
pub type FitResult = scaling::FitResult<f64>;

pub use ed::{Boundary, EdSolution};
pub use scaling::{DirectSource, ScalingRun, SweepMode, SweepSpec, TableSource};
pub use tfim::MinorMethod;
