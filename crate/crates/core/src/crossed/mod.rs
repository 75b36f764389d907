//! Finite stages of crossed products by finite groups and their trace simplices.

mod simplex;
mod stage;

pub use simplex::{
    control_action, group_cstar_stage, is_positive_definite, simplex_verdict, trace_pullback, trace_simplex_diameter,
    write_simplex_csv, GroupAlgebra, TraceSimplexState, COLLAPSE_THRESHOLD,
};
pub use stage::{
    connecting_map, verify_covariance, ConnectingMap, CovarianceReport, CrossedGenerator, CrossedStage, CROSSED_TOL,
};
