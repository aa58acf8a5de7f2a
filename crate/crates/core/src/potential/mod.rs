//! Diabatic potential matrices, benchmark systems, effective-potential
//! policies, and closed-form barrier transmissions.

pub mod analytic;
pub mod benchmarks;
pub mod forms;
pub mod model;
pub mod schema;

pub use benchmarks::{Benchmark, RunDefaults, ShapeParams};
pub use forms::Curve;
pub use model::{
    CheckItem, DiabaticModel, EffectivePolicy, ModelBuilder, ScatteringProblem, ValidationReport,
};
pub use schema::ModelSpec;
