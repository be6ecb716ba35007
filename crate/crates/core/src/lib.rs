//! Numerical study of rho-harmonic self-maps of the unit disk.
//!
//! A map `w` is rho-harmonic for a conformal target density `rho` when
//! `w_{z zbar} + (log rho^2)_w(w) w_z w_zbar = 0`. This crate discretizes the
//! equivalent integral equation `w = P[f] - G[g(w)]` on a polar grid, solves
//! it by damped fixed-point iteration, and measures the quasiconformal
//! distortion quantities that the bi-Lipschitz theory of such maps controls:
//! dilatation, Mori-type modulus bounds, boundary distortion ratios, barrier
//! subharmonicity, Hopf differential holomorphy, blow-up family bounds, and
//! the hyperbolic energy density.
//!
//! Module map:
//! - [`disk`]: Poisson and Green kernels, Mobius automorphisms.
//! - [`metric`]: conformal densities, log-derivative bounds, Christoffel data.
//! - [`grid`]: polar quadrature grid, boundary parametrizations, nodal fields.
//! - [`solver`]: Poisson extension, Green potential, stencils, Picard solve.
//! - [`diagnostics`]: the distortion estimates and inequality checks.
//! - [`rescale`]: Mobius blow-up families near the rim and their bounds.

pub mod diagnostics;
pub mod disk;
mod error;
pub mod grid;
pub mod metric;
pub mod rescale;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{BoundaryMap, DiskGrid, MapField};
pub use metric::{AnalyticityBound, ConformalMetric};
pub use solver::{SolveReport, SolverConfig};
