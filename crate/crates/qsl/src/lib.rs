//! Distance-penalized active learning on the unit interval.
//!
//! A mobile sensor estimating the change point of a binary step function
//! pays for every sample it takes and for every meter it travels. The
//! quantile searches here trade those two costs against each other
//! through a single parameter `m`: each step moves a fraction `1/m` into
//! the remaining hypothesis space (deterministic case) or samples at the
//! `1/m` posterior quantile (noisy case). Closed forms for the expected
//! error and distance drive an optimizer that picks `m` for a given
//! per-sample time and craft velocity, and a strip-based mission layer
//! chains 1D searches into a 2D boundary estimate.
//!
//! Replicated experiments fan out over a rayon pool when the `parallel`
//! feature (default) is enabled; disabling it yields a fully sequential
//! build with identical outputs.

// Validation sites use `!(x >= bound)` so that NaN parameters are
// rejected along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod dqs;
pub mod error;
pub mod exec;
pub mod harness;
pub mod oracle;
pub mod posterior;
pub mod pqs;
pub mod proactive;
pub mod region;
pub mod strategy;
pub mod synthetic;
pub mod theory;
pub mod trace;
pub mod verify;

pub use boundary::{
    boundary_error, estimate_lipschitz, piecewise_linear, run_mission, BoundaryEstimate,
    BoundaryErrorReport, Improvements, MissionReport, MissionSpec, StripPlan, Transect,
};
pub use dqs::{dqs, dqs_fixed_samples, dqs_with_init, FeasibleInterval};
pub use error::{QslError, Result};
pub use harness::{
    run_experiment, CompareGrid, ExperimentKind, ExperimentOutput, ExperimentSpec, ResultRow,
    ResultTable, StrategyKind,
};
pub use oracle::{Oracle, StepOracle};
pub use posterior::{binary_entropy, PosteriorGrid, UpdateParams};
pub use pqs::{pqs, stopping_reached, tpqs, ProbSearchConfig};
pub use proactive::{proactive, ProactiveConfig};
pub use region::{scan_crossings, validate_single_crossing, RegionRaster, TransectOracle};
pub use strategy::{run_search, SearchParams, SearchStrategy};
pub use synthetic::{make_synthetic_region, RegionShape, RegionSpec, ShapeField};
pub use theory::{
    dqs_expected_distance, dqs_expected_error, dqs_expected_leg_distance, optimize_lambda,
    optimize_m, pqs_error_bound, samples_to_error, sampling_time, CostModel, MonteCarloOpt,
    OptimizeMode,
};
pub use trace::{SearchTrace, TraceStep};
pub use verify::{run_verify, CheckResult, VerifyReport, VerifySuite};
