//! Radially symmetric relaxed compressible Navier–Stokes: model, structural
//! checks, finite-volume solver, energy diagnostics and relaxation studies.

// `!(x > 0)` is deliberate throughout: NaN must fail every admissibility check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod app;
pub mod energy;
pub mod error;
pub mod io;
pub mod lab;
pub mod linalg;
pub mod model;
pub mod reduction;
pub mod scalar;
pub mod solver;
pub mod stencil;
pub mod structure;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Params = model::FluidParams<f64>;
pub type Grid = model::RadialGrid<f64>;
pub type Field = model::State<f64>;
pub type Init = model::InitConfig<f64>;
pub type Solver = solver::SolverConfig<f64>;
pub type Run = solver::Trajectory<f64>;
pub type Config = io::RunConfig<f64>;

pub type ParamsF32 = model::FluidParams<f32>;
pub type GridF32 = model::RadialGrid<f32>;
pub type FieldF32 = model::State<f32>;
pub type SolverF32 = solver::SolverConfig<f32>;
