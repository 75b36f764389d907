//! Numerical evidence for strong outerness: commutator trace series and weak-innerness defects.

mod flow;
mod series;

pub use flow::{closed_form_flow_trace, flow_commutator_trace};
pub use series::{
    commutator_trace, commutator_trace_sequence, factor_weak_inner_defect, flow_series, weak_inner_defect,
    WitnessSeries, DEFAULT_THRESHOLD, DEFAULT_WINDOW,
};
