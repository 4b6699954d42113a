//! Slab-geometry radiation magnetohydrodynamics with an asymptotic-preserving
//! unified gas kinetic scheme.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

mod dual;
mod error;
mod linalg;
mod newton;

pub mod coupled;
pub mod decomposition;
pub mod driver;
pub mod limits;
pub mod mesh;
pub mod mhd;
pub mod opacity;
pub mod params;
pub mod quadrature;
pub mod scenarios;
pub mod ugks;

pub use coupled::{CoupledMode, CoupledSolver, CoupledState, StepReport};
pub use driver::{
    convergence_study, error_norms, restrict, run, write_convergence_csv, write_csv, ConvergenceRow, ErrorNorms,
    FrameRow, OutputFrame, RunOptions, RunOutput, StepRecord,
};
pub use error::{Error, Result};
pub use limits::{ExplicitKineticSolver, LimitSolver, LimitState, LimitWall};
pub use mesh::Mesh1D;
pub use mhd::{ConservedVector, FluidGhosts, FluidModel, FluidState};
pub use newton::{NewtonReport, NewtonSettings};
pub use opacity::Opacity;
pub use params::{derive_regime, NondimParams, Regime};
pub use quadrature::{build_quadrature, Quadrature};
pub use scenarios::{
    evaluate_opacity, parse_config, preset, to_config, RunMode, Scenario, ScenarioSpec, StepRule, PRESETS,
};
pub use ugks::BoundaryData;
