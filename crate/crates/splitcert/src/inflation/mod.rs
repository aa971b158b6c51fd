//! Classical-compatibility certification via inflation linear programs.

pub mod certify;
pub mod graph;
pub mod lp;
pub mod simplex;
pub mod witness;

pub use certify::{
    carrot_instance, evaluate_witness, extract_witness, rgb4_feasibility, rgb4_instance,
    visibility_threshold, Rgb4Options, ThresholdResult, VisibilityCase,
};
pub use graph::{build_inflation, build_joint_dag, InflationGraph, InflationPreset, InflationWiring};
pub use lp::{build_lp, BuildOptions, KnownTable, LinearProgram};
pub use simplex::{
    solve_feasibility, solve_feasibility_exact, solve_feasibility_with, FarkasCertificate,
    FeasibilityVerdict, SolverOptions,
};
pub use witness::{EventValue, WitnessAtom, WitnessPolynomial, WitnessTerm};
